"""Monte Carlo broadcast trials: one source, a destination and an eavesdropper.

A trial draws a message, grows a full-rank non-systematic generator one row
per transmitted packet, and passes every packet through two independent
channels. Both receivers attempt RLC decoding after each packet. The source
stops when the destination decodes, or at ``n_max`` (or ``safety_cap`` when
there is no ``n_max``). If the eavesdropper has not decoded by then and PPR is
configured, it runs syndrome decoding once over everything it stored.

Trial ``i`` draws from streams keyed by ``(base_seed, i)`` only, so results do
not depend on worker count or scheduling, and the RLC-only and RLC+SD views of
a trial are always paired.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import binomtest

from . import analysis
from . import rng as rngmod
from .channel import ChannelSpec, transmit_block
from .codec import CodeState, GeneratorSpec, Kind
from .field import matmul, pack_row
from .linalg import RowBasis
from .ppr import CRC_BITS, SDConfig, VerifyMode, attach_crc, ppr_assisted_decode

CHUNK = 8


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulated operating point.

    ``n_max=None`` means the source keeps transmitting until the destination
    decodes (bounded by ``safety_cap``, default 20 K). ``delta`` sets
    ``eps_e = eps_d + delta`` and wins over ``eps_e``.
    """

    K: int = 20
    L: int = 128
    q: int = 2
    eps_d: float = 0.1
    eps_e: float | None = None
    delta: float | None = None
    n_max: int | None = None
    ppr: SDConfig | None = None
    trials: int = 1000
    base_seed: int = 0
    safety_cap: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.n_max is not None and self.n_max < self.K:
            raise ValueError(f"n_max={self.n_max} is below K={self.K}")
        eps_e = self.eav_epsilon
        if not 0.0 <= eps_e <= 1.0:
            raise ValueError(f"eavesdropper epsilon {eps_e} outside [0, 1]")
        if eps_e < self.eps_d:
            warnings.warn(f"eps_e={eps_e} is below eps_d={self.eps_d}", stacklevel=3)
        if self.ppr is not None and self.ppr.verify_mode is VerifyMode.CRC32:
            if self.q != 2 or self.L <= CRC_BITS:
                raise ValueError("CRC-32 verification needs q=2 and L > 32")

    @property
    def eav_epsilon(self) -> float:
        if self.delta is not None:
            return round(self.eps_d + self.delta, 12)
        return self.eps_d if self.eps_e is None else self.eps_e

    @property
    def cap(self) -> int:
        if self.n_max is not None:
            return self.n_max
        return self.safety_cap if self.safety_cap is not None else 20 * self.K


@dataclass
class TrialOutcome:
    n_stop: int
    dest_decoded: bool
    eav_rlc_decoded: bool
    eav_ppr_decoded: bool
    nu: int = 0
    n_e: int = 0
    cap_hit: bool = False
    ppr_ran: bool = False
    columns_solved: int = 0
    columns_unique: int = 0
    budget_exhausted: bool = False
    candidates: int = 0


@dataclass(frozen=True)
class Estimate:
    p_hat: float
    ci_low: float
    ci_high: float
    trials: int
    successes: int

    def contains(self, x: float) -> bool:
        return self.ci_low <= x <= self.ci_high


def wilson(successes: int, trials: int, confidence: float = 0.95) -> Estimate:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return Estimate(successes / trials, float(ci.low), float(ci.high), trials, successes)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    p_int: Estimate
    p_int_rlc: Estimate
    p_dec: Estimate
    mean_n: float
    ppr_gain: Estimate
    nu_mean: float
    cap_hits: int
    lost_intercepts: int  # paired trials where PPR turned an intercept into a miss
    sd_stats: dict = field(default_factory=dict)
    outcomes: list[TrialOutcome] = field(default_factory=list, repr=False)

    def estimate(self, mode: str, confidence: float = 0.95) -> Estimate:
        """Intercept estimate for ``mode`` ('rlc' or 'rlc+sd') at ``confidence``."""
        if mode == "rlc":
            k = self.p_int_rlc.successes
        elif mode == "rlc+sd":
            if self.config.ppr is None:
                raise ValueError("experiment ran without PPR")
            k = self.p_int.successes
        else:
            raise ValueError(f"unknown mode {mode!r}")
        return wilson(k, self.p_int.trials, confidence)


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialOutcome:
    K, L, q = cfg.K, cfg.L, cfg.q
    seed = cfg.base_seed
    state = CodeState(GeneratorSpec(Kind.FULL_RANK_NON_SYSTEMATIC, K,
                                    rngmod.derive_seed(seed, trial_index, rngmod.CODE), q))
    rng_d = rngmod.stream(seed, trial_index, rngmod.CHANNEL_D)
    rng_e = rngmod.stream(seed, trial_index, rngmod.CHANNEL_E)
    ch_d = ChannelSpec(cfg.eps_d, L)
    ch_e = ChannelSpec(cfg.eav_epsilon, L)

    U = None
    if cfg.ppr is not None:
        msg = rngmod.stream(seed, trial_index, rngmod.MESSAGE)
        U = msg.integers(0, q, size=(K, L), dtype=np.int64)
        if cfg.ppr.verify_mode is VerifyMode.CRC32:
            U = attach_crc(U[:, : L - CRC_BITS])
    blank = np.zeros((CHUNK, L), dtype=np.int64)

    basis_d = RowBasis(K, q)
    basis_e = RowBasis(K, q)
    cap = cfg.cap
    n = 0
    dest_at = eav_at = None
    X_rows, Y_rows, clean_e_all = [], [], []
    while n < cap and dest_at is None:
        G_chunk = np.array([state.grow() for _ in range(CHUNK)])
        X_chunk = matmul(G_chunk, U, q) if U is not None else blank
        _, _, clean_d = transmit_block(blank, ch_d, rng_d, q)
        Y_chunk, _, clean_e = transmit_block(X_chunk, ch_e, rng_e, q)
        for i in range(CHUNK):
            if n == cap or dest_at is not None:
                break
            n += 1
            row = pack_row(G_chunk[i]) if q == 2 else G_chunk[i]
            if clean_d[i] and basis_d.add(row) and basis_d.rank == K:
                dest_at = n
            if clean_e[i] and eav_at is None and basis_e.add(row) and basis_e.rank == K:
                eav_at = n
            clean_e_all.append(bool(clean_e[i]))
            if U is not None:
                X_rows.append(X_chunk[i])
                Y_rows.append(Y_chunk[i])

    out = TrialOutcome(
        n_stop=n,
        dest_decoded=dest_at is not None,
        eav_rlc_decoded=eav_at is not None,
        eav_ppr_decoded=eav_at is not None,
        n_e=sum(clean_e_all),
        cap_hit=dest_at is None and cfg.n_max is None,
    )
    if eav_at is None and cfg.ppr is not None:
        E_set = [i for i, c in enumerate(clean_e_all) if c]
        res = ppr_assisted_decode(state, np.array(Y_rows), E_set, cfg.ppr.resolved(ch_e),
                                  truth=np.array(X_rows))
        out.ppr_ran = True
        out.nu = res.nu
        out.columns_solved = res.columns_solved
        out.columns_unique = res.columns_unique
        out.budget_exhausted = res.budget_exhausted
        out.candidates = res.candidates
        out.eav_ppr_decoded = res.decoded is not None and np.array_equal(res.decoded, U)
    return out


def _run_range(args) -> list[TrialOutcome]:
    cfg, start, stop = args
    return [run_trial(cfg, i) for i in range(start, stop)]


def run_trials(cfg: ExperimentConfig, workers: int = 1) -> list[TrialOutcome]:
    """All trial outcomes in trial-index order."""
    if workers <= 1 or cfg.trials < 2 * workers:
        return _run_range((cfg, 0, cfg.trials))
    n_chunks = min(cfg.trials, workers * 4)
    bounds = np.linspace(0, cfg.trials, n_chunks + 1).astype(int)
    jobs = [(cfg, int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(_run_range, jobs))
    return [o for part in parts for o in part]


def summarize(cfg: ExperimentConfig, outcomes: list[TrialOutcome], keep: bool = False) -> ExperimentResult:
    n = len(outcomes)
    rlc = sum(o.eav_rlc_decoded for o in outcomes)
    sd = sum(o.eav_ppr_decoded for o in outcomes)
    ran = [o for o in outcomes if o.ppr_ran]
    stats = {
        "ppr_trials": len(ran),
        "columns_solved": sum(o.columns_solved for o in ran),
        "columns_unique": sum(o.columns_unique for o in ran),
        "budget_exhausted_trials": sum(o.budget_exhausted for o in ran),
        "candidates": sum(o.candidates for o in ran),
    }
    return ExperimentResult(
        config=cfg,
        p_int=wilson(sd if cfg.ppr is not None else rlc, n),
        p_int_rlc=wilson(rlc, n),
        p_dec=wilson(sum(o.dest_decoded for o in outcomes), n),
        mean_n=sum(o.n_stop for o in outcomes) / n,
        ppr_gain=wilson(sum(o.eav_ppr_decoded and not o.eav_rlc_decoded for o in outcomes), n),
        nu_mean=sum(o.nu for o in ran) / len(ran) if ran else 0.0,
        cap_hits=sum(o.cap_hit for o in outcomes),
        lost_intercepts=sum(o.eav_rlc_decoded and not o.eav_ppr_decoded for o in outcomes),
        sd_stats=stats,
        outcomes=outcomes if keep else [],
    )


def run_experiment(cfg: ExperimentConfig, workers: int = 1, keep_outcomes: bool = False) -> ExperimentResult:
    return summarize(cfg, run_trials(cfg, workers), keep_outcomes)


# -- figure scenarios ----------------------------------------------------------

FIG2_EPS_E = (0.1, 0.15, 0.2)
DELTAS = (0.0, 0.05, 0.1)
FIG4_NMAX = (25, 27, 29)
MODES = ("rlc", "rlc+sd")


def grid(start: float, stop: float, step: float) -> list[float]:
    n = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 10) for i in range(n)]


DEFAULT_GRIDS = {
    "fig2": grid(0.01, 0.10, 0.01),
    "fig3": grid(0.05, 0.50, 0.05),
    "fig4": grid(0.05, 0.30, 0.05),
}


def result_rows(res: ExperimentResult, analytic_p_int: float | None = None) -> list[dict]:
    """One table row per eavesdropper mode."""
    cfg = res.config
    modes = MODES if cfg.ppr is not None else ("rlc",)
    rows = []
    for mode in modes:
        est = res.p_int if mode == "rlc+sd" else res.p_int_rlc
        rows.append({
            "eps_d": cfg.eps_d,
            "eps_e": cfg.eav_epsilon,
            "n_max": cfg.n_max if cfg.n_max is not None else "inf",
            "mode": mode,
            "trials": cfg.trials,
            "p_int": est.p_hat,
            "p_int_ci_low": est.ci_low,
            "p_int_ci_high": est.ci_high,
            "p_dec": res.p_dec.p_hat,
            "mean_n": res.mean_n,
            "nu_mean": res.nu_mean if mode == "rlc+sd" else 0.0,
            "seed": cfg.base_seed,
            "cap_hits": res.cap_hits,
            "p_int_analytic": analytic_p_int if mode == "rlc" else None,
        })
    return rows


def _analytic_p_int(cfg: ExperimentConfig) -> float:
    dest = analysis.LinkParams(cfg.eps_d, cfg.K, cfg.q)
    eav = analysis.LinkParams(cfg.eav_epsilon, cfg.K, cfg.q)
    n_max = cfg.n_max if cfg.n_max is not None else analysis.horizon(dest)
    return analysis.intercept_prob(dest, eav, n_max)


def figure_scenario(which: str, *, trials: int = 1000, base_seed: int = 0, eps_d_grid=None,
                    K: int = 20, L: int = 128, q: int = 2, ppr: SDConfig | None = None,
                    safety_cap: int | None = None, workers: int = 1, progress=None) -> dict[str, list[dict]]:
    """Run the parameter grid behind one figure.

    Returns panels keyed by name, each a list of row dicts. Every grid point
    runs once with PPR enabled; the RLC and RLC+SD rows of a point come from
    the same paired trials.
    """
    if which not in DEFAULT_GRIDS:
        raise ValueError(f"unknown figure {which!r}")
    eps_grid = list(eps_d_grid) if eps_d_grid is not None else DEFAULT_GRIDS[which]
    ppr = ppr if ppr is not None else SDConfig()
    base = ExperimentConfig(K=K, L=L, q=q, ppr=ppr, trials=trials, base_seed=base_seed,
                            safety_cap=safety_cap)

    points: list[tuple[ExperimentConfig, dict]] = []
    if which == "fig2":
        for eps_e in FIG2_EPS_E:
            for eps_d in eps_grid:
                points.append((replace(base, eps_d=eps_d, eps_e=eps_e), {"delta": round(eps_e - eps_d, 10)}))
    elif which == "fig3":
        for delta in DELTAS:
            for eps_d in eps_grid:
                plan = analysis.plan_nmax(0.99, analysis.LinkParams(eps_d, K, q))
                points.append((replace(base, eps_d=eps_d, delta=delta, n_max=plan.n_max), {"delta": delta}))
    else:
        for n_max in FIG4_NMAX:
            for delta in DELTAS:
                for eps_d in eps_grid:
                    points.append((replace(base, eps_d=eps_d, delta=delta, n_max=n_max), {"delta": delta}))

    main: list[dict] = []
    for cfg, extra in points:
        if progress:
            progress(cfg)
        res = run_experiment(cfg, workers)
        for row in result_rows(res, _analytic_p_int(cfg)):
            row.update(extra)
            main.append(row)

    panels = {"p_int": main}
    if which == "fig3":
        panels["n_max"] = []
        for eps_d in eps_grid:
            plan = analysis.plan_nmax(0.99, analysis.LinkParams(eps_d, K, q))
            panels["n_max"].append({"eps_d": eps_d, "n_max": plan.n_max, "p_dec_analytic": plan.p_dec})
    elif which == "fig4":
        panels["p_dec"] = []
        for n_max in FIG4_NMAX:
            for eps_d in eps_grid:
                sims = [r for r in main if r["n_max"] == n_max and r["eps_d"] == eps_d
                        and r["mode"] == "rlc" and r["delta"] == 0.0]
                panels["p_dec"].append({
                    "eps_d": eps_d,
                    "n_max": n_max,
                    "p_dec": sims[0]["p_dec"] if sims else None,
                    "p_dec_analytic": analysis.decoding_prob(analysis.LinkParams(eps_d, K, q, n_max)),
                })
    return panels

"""Compare closed-form and simulated RLC intercept probabilities on a grid.

N_max is planned for 99% destination decoding at each eps_D. Prints the
Monte Carlo estimate, its 99% Wilson interval and whether the closed form
lies inside.
"""

import argparse
import itertools

from rlcsec.analysis import LinkParams, intercept_prob, plan_nmax
from rlcsec.sim import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--eps-d", type=float, nargs="+", default=[0.02, 0.06, 0.1])
    ap.add_argument("--eps-e", type=float, nargs="+", default=[0.1, 0.2])
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    print("eps_d,eps_e,n_max,p_int_sim,ci_low,ci_high,p_int_analytic,inside")
    for eps_d, eps_e in itertools.product(args.eps_d, args.eps_e):
        n_max = plan_nmax(0.99, LinkParams(eps_d, args.k)).n_max
        res = run_experiment(ExperimentConfig(K=args.k, eps_d=eps_d, eps_e=eps_e, n_max=n_max,
                                              trials=args.trials, base_seed=args.seed), args.workers)
        est = res.estimate("rlc", 0.99)
        theory = intercept_prob(LinkParams(eps_d, args.k), LinkParams(eps_e, args.k), n_max)
        print(f"{eps_d},{eps_e},{n_max},{est.p_hat:.4f},{est.ci_low:.4f},{est.ci_high:.4f},"
              f"{theory:.4f},{int(est.contains(theory))}")


if __name__ == "__main__":
    main()

"""Random linear coding over prime fields, with partial packet recovery at an
eavesdropper and the matching decoding/intercept probability analysis."""

__version__ = "0.1.0"

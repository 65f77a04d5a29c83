"""Nonlocal derivative calculus and wave evolution on the discrete torus (Z/LZ)^d.

Fields are complex numpy arrays whose shape determines the box: d axes
(1 <= d <= 3) of equal even length L. Axis arguments are 1-based and axis j
is array axis j - 1. Run configs are the same JSON documents the command
line tool takes; `simulate` and `scan` return plain dicts instead of files.
"""

from lattwave._core import (
    BlowupReference,
    ConfigError,
    __version__,
    blowup_reference,
    energy,
    evolve_linear,
    h1_equivalence_ratio,
    kernel_value,
    laplacian,
    load_snapshot,
    lp_alpha_norm,
    partial,
    partial_spectral,
    periodized_kernel,
    save_snapshot,
    scan,
    simulate,
    sobolev_seminorm,
    verify,
    weak_l11,
)

__all__ = [
    "BlowupReference",
    "ConfigError",
    "__version__",
    "blowup_reference",
    "energy",
    "evolve_linear",
    "h1_equivalence_ratio",
    "kernel_value",
    "laplacian",
    "load_snapshot",
    "lp_alpha_norm",
    "partial",
    "partial_spectral",
    "periodized_kernel",
    "save_snapshot",
    "scan",
    "simulate",
    "sobolev_seminorm",
    "verify",
    "weak_l11",
]

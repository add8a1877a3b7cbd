"""Kernel-smoothed BV decomposition of images into cartoon and texture."""

from ._kbv import (
    KbvError,
    bv_seminorm,
    convolve,
    disk_indicator,
    energy,
    oracle_1d,
    selftest,
    solve,
    star_norm,
    verify_optimality,
)

__all__ = [
    "KbvError",
    "bv_seminorm",
    "convolve",
    "disk_indicator",
    "energy",
    "oracle_1d",
    "selftest",
    "solve",
    "star_norm",
    "verify_optimality",
]

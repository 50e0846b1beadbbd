"""Keyed, order-independent randomness.

Every stochastic decision in the pipeline is a pure function of the run
seed and a stable record key, so results do not depend on processing
order or worker count. Keys are folded through the splitmix64 finalizer,
which gives well-distributed 64-bit values from structured integer input.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = float(2.0**-53)

# stream tags keep independent decision families decorrelated
STREAM_FILTER = 0x66696C74  # "filt"
STREAM_CATEGORY = 0x63617467  # "catg"
STREAM_WITHIN = 0x77697468  # "with"


def _mix(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = x + _GOLDEN
        x = (x ^ (x >> np.uint64(30))) * _MIX1
        x = (x ^ (x >> np.uint64(27))) * _MIX2
        return x ^ (x >> np.uint64(31))


def _as_uint64(part: int | np.ndarray) -> np.ndarray:
    if isinstance(part, np.ndarray):
        return part.astype(np.uint64, copy=False)
    return np.uint64(int(part) & _MASK64)


def keyed_uint64(*parts: int | np.ndarray) -> np.ndarray:
    """Fold integer parts (scalars or arrays) into 64-bit hash values."""
    h = np.uint64(0)
    with np.errstate(over="ignore"):
        for part in parts:
            h = _mix(h ^ _mix(_as_uint64(part)))
    return h


def keyed_unit(*parts: int | np.ndarray) -> np.ndarray | float:
    """Uniform values in [0, 1) derived from the keyed hash."""
    h = keyed_uint64(*parts)
    u = (h >> np.uint64(11)).astype(np.float64) * _INV_2_53 if isinstance(
        h, np.ndarray
    ) else float(h >> np.uint64(11)) * _INV_2_53
    return u

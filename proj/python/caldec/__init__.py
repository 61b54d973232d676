"""Robust decision policies from partially calibrated forecasts.

Thin wrapper over the compiled ``_core`` module: calibration audits, dual
solvers, closed-form and LP policies, worst-case adversaries, and the
experiment harness.
"""

try:
    from caldec._core import *  # noqa: F401,F403  (installed layout)
    from caldec import _core as _core  # noqa: F401
except ImportError:
    from _core import *  # noqa: F401,F403  (build-tree layout)
    import _core as _core  # noqa: F401

__version__ = "0.1.0"

__all__ = [name for name in dir(_core) if not name.startswith("_")]

"""Backend selection for the hot loops.

The compiled extension ``revlab._kernels`` is used when it was built;
otherwise the numpy versions in ``revlab._fallback`` are used. Setting
``REVLAB_PURE_PYTHON=1`` forces the fallback.
"""

import os

from revlab import _fallback

if os.environ.get("REVLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from revlab import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

nonlinear_phase = _impl.nonlinear_phase
cn_radial_step = _impl.cn_radial_step
leapfrog_phi4 = _impl.leapfrog_phi4
godunov_burgers = _impl.godunov_burgers
radial_shoot = _impl.radial_shoot


def compiled_available():
    try:
        from revlab import _kernels  # noqa: F401
    except ImportError:
        return False
    return True


def get_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _fallback
    if name == "cython":
        from revlab import _kernels
        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")

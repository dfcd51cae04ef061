"""Hot-kernel backend selection.

The wavelet filter-bank inner loops exist twice: a Cython extension
(_dwt_cy) and a pure-numpy fallback (_dwt_np). The compiled one is used
when importable; WAVELETON_KERNEL=python|cython forces a choice.
benchmarks/bench_kernels.py compares the two.
"""

import os

from . import _dwt_np

_BACKENDS = {"python": _dwt_np}

try:
    from . import _dwt_cy
    _BACKENDS["cython"] = _dwt_cy
except ImportError:
    _dwt_cy = None


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name="auto"):
    if name == "auto":
        return _BACKENDS.get("cython", _dwt_np)
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            "unknown kernel backend %r (available: %s)"
            % (name, ", ".join(available_backends()))
        ) from None


_active = get_backend(os.environ.get("WAVELETON_KERNEL", "auto"))


def set_backend(name):
    """Switch the active backend; returns the previous backend name."""
    global _active
    previous = _active.NAME
    _active = get_backend(name)
    return previous


def backend_name():
    return _active.NAME


def analysis_periodic(x, h, g):
    return _active.analysis_periodic(x, h, g)


def synthesis_periodic(a, d, h, g):
    return _active.synthesis_periodic(a, d, h, g)

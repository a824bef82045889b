"""Event-step kernel selection.

The compiled extension is preferred when importable; the numpy fallback is
used otherwise.  Set PCODELAY_PURE=1 before import to force the fallback,
or call set_active() at runtime (used by the benchmark and the equivalence
tests).  Both kernels implement the contract documented in _pykernel.py.
"""

from __future__ import annotations

import os

from . import _pykernel

_COMPILED = None
if os.environ.get("PCODELAY_PURE") != "1":
    try:
        from . import _speedups as _COMPILED  # type: ignore[no-redef]
    except ImportError:
        _COMPILED = None

_ACTIVE = _pykernel if _COMPILED is None else _COMPILED


def available() -> tuple[str, ...]:
    """Names of the kernels importable in this installation."""
    return ("compiled", "pure") if _COMPILED is not None else ("pure",)


def active_name() -> str:
    return "pure" if _ACTIVE is _pykernel else "compiled"


def set_active(name: str) -> None:
    """Switch kernels at runtime; affects steps taken after the call."""
    global _ACTIVE
    if name == "pure":
        _ACTIVE = _pykernel
    elif name == "compiled":
        if _COMPILED is None:
            raise RuntimeError("compiled kernel is not available in this installation")
        _ACTIVE = _COMPILED
    else:
        raise ValueError(f"unknown kernel {name!r}; choose 'pure' or 'compiled'")


def step_once(*args):
    return _ACTIVE.step_once(*args)

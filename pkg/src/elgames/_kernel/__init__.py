"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``ELGAMES_PURE=1`` in the environment to force the pure kernel even when
the extension is importable (used by the benchmark and the equivalence tests).
Both kernels implement the same contract and produce identical output.
"""
import os

if os.environ.get("ELGAMES_PURE") == "1":
    from elgames._kernel import pure as _impl
else:
    try:
        from elgames._kernel import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from elgames._kernel import pure as _impl

IMPLEMENTATION = _impl.IMPLEMENTATION
attractor = _impl.attractor
solve_parity = _impl.solve_parity

"""Red-black projected SOR for discrete obstacle problems on the torus.

The unknown ``phi`` is pushed towards the largest grid function with

    phi <= obstacle   and   phi[p] <= mean of the 4 neighbours + rhs[p]

by the update ``phi <- min(obstacle, phi + omega * (gs - phi))`` where
``gs`` is the Gauss-Seidel value.  ``omega = 1`` is plain projected
Gauss-Seidel; an infinite obstacle gives an ordinary SOR Poisson solve.

Two interchangeable backends: the compiled ``_relax`` extension and a
vectorised numpy fallback.  Set ``SINGMETRIC_KERNEL=python`` to force the
fallback.  Cells of one colour touch only cells of the other, so both
backends produce the same iterates up to rounding.
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - depends on the build
    if os.environ.get("SINGMETRIC_KERNEL") == "python":
        raise ImportError
    from . import _relax
except ImportError:  # pragma: no cover
    _relax = None

BACKEND = "cython" if _relax is not None else "python"

_masks: dict[int, tuple] = {}


def _color_masks(n: int):
    if n not in _masks:
        i, j = np.indices((n, n))
        red = (i + j) % 2 == 0
        _masks[n] = (red, ~red)
    return _masks[n]


def _half_sweep_np(phi, obstacle, rhs, omega, mask):
    gs = 0.25 * (
        np.roll(phi, 1, 0) + np.roll(phi, -1, 0) + np.roll(phi, 1, 1) + np.roll(phi, -1, 1)
    ) + rhs
    z = phi + omega * (gs - phi)
    np.minimum(z, obstacle, out=z)
    upd = np.abs(z - phi)[mask].max()
    phi[mask] = z[mask]
    return upd


def sweep_python(phi, obstacle, rhs, omega):
    n = phi.shape[0]
    if n % 2:
        raise ValueError("red-black ordering needs an even grid size")
    red, black = _color_masks(n)
    a = _half_sweep_np(phi, obstacle, rhs, omega, red)
    b = _half_sweep_np(phi, obstacle, rhs, omega, black)
    return max(a, b)


def relax_python(phi, obstacle, rhs, omega, tol, max_iters):
    it, upd = 0, 0.0
    while it < max_iters:
        upd = sweep_python(phi, obstacle, rhs, omega)
        it += 1
        if upd < tol:
            break
    return it, upd


def relax(phi, obstacle, rhs, omega=1.0, tol=1e-8, max_iters=10**6, backend=None):
    """Run sweeps in place on ``phi`` until the sup-norm update is below ``tol``.

    Returns ``(iterations, last_update)``; the caller decides whether hitting
    ``max_iters`` is an error.
    """
    if phi.shape[0] % 2 or phi.shape[0] != phi.shape[1]:
        raise ValueError("grid must be square with even size")
    backend = backend or BACKEND
    obstacle = np.ascontiguousarray(obstacle, dtype=np.float64)
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    if backend == "cython":
        if _relax is None:
            raise RuntimeError("compiled kernel not available")
        if not phi.flags.c_contiguous or phi.dtype != np.float64:
            raise ValueError("phi must be a C-contiguous float64 array")
        return _relax.relax(phi, obstacle, rhs, float(omega), float(tol), int(max_iters))
    return relax_python(phi, obstacle, rhs, float(omega), float(tol), int(max_iters))


def optimal_omega(n: int) -> float:
    """SOR factor for the periodic 5-point Laplacian: ``2 / (1 + sin(2 pi / n))``."""
    return 2.0 / (1.0 + np.sin(2 * np.pi / n))

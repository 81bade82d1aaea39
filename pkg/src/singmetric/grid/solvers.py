"""Envelopes, the ceiling operator and the Monge-Ampere (Poisson) solver on the grid.

Every potential is split as ``u = S + phi`` with ``S = sum nu_i G_{x_i}``
its singular part.  Envelope problems are posed for the bounded part
``phi``: find the largest ``phi`` below an obstacle with
``(c - sum nu) + Delta_h phi >= 0`` at every cell.  The singular part is
fixed by the atom data, which is how Lelong numbers survive the
discretisation.
"""
from __future__ import annotations

import time

import numpy as np

from ..core import ModelSoundnessError, SingularityError
from ..report import Report
from . import kernels
from .potential import (
    GridPotential,
    SolverConfig,
    _norm_atoms,
    check_cone,
    laplacian,
    mass_tol,
    np_mass,
    poisson_fft,
    singular_part,
)


class Divergence(SingularityError):
    def __init__(self, msg, residual=float("nan"), iterations=0):
        super().__init__(f"{msg} (residual {residual:.3g} after {iterations} sweeps)")
        self.residual = residual
        self.iterations = iterations


class MonotonicityViolation(ModelSoundnessError):
    pass


class IncompatibleData(SingularityError):
    pass


class SingularBudget(SingularityError):
    pass


def _omega(cfg: SolverConfig, N: int) -> float:
    return cfg.omega if cfg.omega is not None else kernels.optimal_omega(N)


def _sweep_tol(cfg: SolverConfig, omega: float) -> float:
    # optimal SOR error decays like k * rho^k, so leave a margin of 8 over (2 - omega)
    return cfg.tol * min(1.0, (2.0 - omega) / 8.0)


def solve_obstacle(obstacle, density, cfg: SolverConfig, start=None):
    """Largest ``phi <= obstacle`` with ``density + Delta_h phi >= 0``.

    Returns ``(phi, iterations)``.  ``density`` is a scalar or an array;
    a negative total density admits no bounded solution.
    """
    N = obstacle.shape[0]
    if np.mean(density) < 0:
        raise Divergence("negative total density has no bounded envelope")
    omega = _omega(cfg, N)
    rhs = np.broadcast_to(np.asarray(density, dtype=np.float64) / (4.0 * N * N), (N, N))
    phi = np.array(obstacle if start is None else np.minimum(start, obstacle), dtype=np.float64, order="C")
    it, upd = kernels.relax(phi, obstacle, rhs, omega, _sweep_tol(cfg, omega), cfg.max_iters)
    if upd >= _sweep_tol(cfg, omega):
        raise Divergence("relaxation hit max_iters", upd, it)
    return phi, it


def _split(u: GridPotential):
    S = singular_part(u.N, u.atoms)
    return S, u.values - S


def _check_pair(u: GridPotential, v: GridPotential):
    if u.N != v.N or u.c != v.c:
        raise ValueError("potentials live on different grids or classes")


def max_atoms(*atom_lists):
    out = {}
    for atoms in atom_lists:
        for cell, nu in atoms:
            out[cell] = max(out.get(cell, 0.0), nu)
    return tuple(sorted(out.items()))


def min_atoms(a, b):
    da, db = dict(a), dict(b)
    return tuple(sorted((k, min(da[k], db[k])) for k in set(da) & set(db)))


def rooftop(u: GridPotential, v: GridPotential, cfg: SolverConfig | None = None) -> GridPotential:
    """Largest cone member below ``min(u, v)``.

    Atoms of the result are the pointwise max of the inputs' Lelong numbers.
    The result is not renormalized: its sup may be negative.
    """
    cfg = cfg or SolverConfig()
    _check_pair(u, v)
    atoms = max_atoms(u.atoms, v.atoms)
    total = sum(nu for _, nu in atoms)
    if total > u.c:
        raise Divergence(f"combined Lelong mass {total:.6g} exceeds the budget {u.c:.6g}")
    S = singular_part(u.N, atoms)
    obst = np.minimum(u.values, v.values) - S
    phi, _ = solve_obstacle(obst, u.c - total, cfg)
    return GridPotential(u.N, S + phi, atoms, u.c)


def p_bracket(psi: GridPotential, cfg: SolverConfig | None = None, details: dict | None = None) -> GridPotential:
    """Envelope of the singularity type: limit of ``rooftop(psi + C, 0)`` as ``C`` grows.

    Rungs ``C = 1, 2, 4, ...`` are solved with warm starts.  On a finite
    grid the obstacle ``min(phi_psi + C, -S)`` stops changing once ``C``
    exceeds the oscillation of ``-S - phi_psi``; that rung is solved from
    the obstacle itself and is the exact limit.
    """
    cfg = cfg or SolverConfig()
    S, phi_psi = _split(psi)
    dens = psi.c - psi.total_lelong
    if dens < 0:
        raise Divergence("total Lelong number exceeds the budget")
    cap = -S
    C_sat = float((cap - phi_psi).max())
    masses, sups = [], []
    phi = None
    C = 1.0
    while True:
        saturated = C >= C_sat
        obst = cap if saturated else np.minimum(phi_psi + C, cap)
        phi, _ = solve_obstacle(obst, dens, cfg, start=None if saturated else phi)
        w = S + phi
        sups.append(float(w.max()))
        masses.append(np_mass(GridPotential.normalized(psi.N, w, psi.atoms, psi.c), cfg, check=False))
        if saturated:
            break
        C *= 2.0
    out = GridPotential.normalized(psi.N, S + phi, psi.atoms, psi.c)
    m_in = np_mass(psi, cfg, check=False)
    m_out = masses[-1]
    if abs(m_out - m_in) > mass_tol(psi.N):
        raise ModelSoundnessError(f"envelope changed the mass: {m_in:.6g} -> {m_out:.6g}")
    if details is not None:
        details.update(rungs=len(masses), masses=masses, sups=sups, C_final=C)
    return out


def scale(u: GridPotential, t: float) -> GridPotential:
    """``t * u`` for ``0 <= t <= 1``; atoms scale with it."""
    atoms = tuple((cell, t * nu) for cell, nu in u.atoms)
    return GridPotential.normalized(u.N, t * u.values, atoms, u.c)


def ceiling(u: GridPotential, cfg: SolverConfig | None = None, details: dict | None = None,
            mono_tol: float = 1e-6) -> GridPotential:
    """Limit of ``p_bracket((1 - eps) u)`` along ``cfg.eps_ladder``.

    Raises :class:`MonotonicityViolation` if an iterate rises above its
    predecessor by more than ``mono_tol`` anywhere.
    """
    cfg = cfg or SolverConfig()
    prev = None
    worst_rise = -np.inf
    for eps in cfg.eps_ladder:
        cur = p_bracket(scale(u, 1.0 - eps), cfg)
        if prev is not None:
            rise = float((cur.values - prev.values).max())
            worst_rise = max(worst_rise, rise)
            if rise > mono_tol:
                raise MonotonicityViolation(f"eps-iterate increased by {rise:.3g} at eps={eps}")
        prev = cur
    m_in = np_mass(u, cfg, check=False)
    m_out = np_mass(prev, cfg, check=False)
    if abs(m_in - m_out) > mass_tol(u.N):
        raise ModelSoundnessError(f"ceiling changed the mass: {m_in:.6g} -> {m_out:.6g}")
    if details is not None:
        details.update(worst_rise=worst_rise, mass_in=m_in, mass_out=m_out)
    return prev


def concentration_check(phi: GridPotential, psi: GridPotential, tol: float = 1e-9) -> Report:
    """Cellwise ``theta_max(phi, psi) >= 1{psi <= phi} theta_phi + 1{phi < psi} theta_psi``.

    Densities are ``c + Delta_h`` of the sampled values.  ``worst_margin``
    is the minimum of (left minus right) times ``h^2``; a violation is a
    cell where it is below ``-tol``.
    """
    t0 = time.perf_counter()
    _check_pair(phi, psi)
    c = phi.c
    h2 = phi.h**2
    m = np.maximum(phi.values, psi.values)
    lhs = c + laplacian(m)
    rhs = np.where(psi.values <= phi.values, c + laplacian(phi.values), c + laplacian(psi.values))
    margin = (lhs - rhs) * h2
    bad = margin < -tol
    return Report(
        suite="concentration",
        trials=int(margin.size),
        violations=int(bad.sum()),
        worst_margin=float(margin.min()),
        seed=None,
        runtime_ms=int(1000 * (time.perf_counter() - t0)),
        details={"violation_measure": float(bad.sum() * h2), "N": phi.N},
    )


def solve_cmae(atoms, f, cfg: SolverConfig | None = None, c: float = 1.0, method: str = "fft",
               initial=None, details: dict | None = None) -> GridPotential:
    """Solve ``c + Delta_h psi = f + sum nu_i delta^h_{x_i}`` with ``sup psi = 0``.

    Parameters
    ----------
    atoms : sequence of ((i, j), nu)
    f : (N, N) array
        Density of the non-atomic part; its integral must equal ``c - sum nu``.
    method : {"fft", "relax"}
        Spectral solve, or SOR sweeps from ``initial`` (default zero).
    """
    cfg = cfg or SolverConfig()
    f = np.asarray(f, dtype=np.float64)
    N = f.shape[0]
    if f.shape != (N, N):
        raise ValueError("density must be square")
    if np.any(f < 0):
        raise ValueError("density must be nonnegative")
    atoms = _norm_atoms(atoms, N)
    total = sum(nu for _, nu in atoms)
    if total >= c:
        raise SingularBudget(f"total Lelong number {total:.6g} must be below {c:.6g}")
    h2 = 1.0 / (N * N)
    gap = float(f.sum() * h2 - (c - total))
    if abs(gap) > cfg.tol:
        raise IncompatibleData(f"integral of f misses c - sum(nu) by {gap:.3g}")
    g = f - c
    for (i, j), nu in atoms:
        g[i, j] += nu * N * N
    g -= g.mean()  # remove round-off; |gap| <= tol already checked
    iters = 0
    if method == "fft":
        psi = poisson_fft(g)
    elif method == "relax":
        omega = _omega(cfg, N)
        psi = np.zeros((N, N)) if initial is None else np.array(initial, dtype=np.float64, order="C")
        rhs = -g * h2 / 4.0
        obst = np.full((N, N), np.inf)
        iters, upd = kernels.relax(psi, obst, rhs, omega, _sweep_tol(cfg, omega), cfg.max_iters)
        if upd >= _sweep_tol(cfg, omega):
            raise Divergence("Poisson relaxation hit max_iters", upd, iters)
    else:
        raise ValueError(f"unknown method {method!r}")
    out = GridPotential.normalized(N, psi, atoms, c)
    residual = float(np.abs(laplacian(out.values) - g).max() * h2 / 4.0)
    if residual > cfg.tol:
        raise Divergence("solution residual above tolerance", residual, iters)
    check_cone(out, cfg.cone_tol())
    m = np_mass(out, cfg, check=False)
    if abs(m - (c - total)) > mass_tol(N):
        raise ModelSoundnessError(f"recovered mass {m:.6g} differs from {c - total:.6g}")
    if details is not None:
        details.update(residual=residual, np_mass=m, iterations=iters, method=method)
    return out


# ---------------------------------------------------------------------------
# stability


def torus_distance(N: int, cell) -> np.ndarray:
    i, j = np.indices((N, N))
    di = np.abs(i - cell[0])
    dj = np.abs(j - cell[1])
    di = np.minimum(di, N - di)
    dj = np.minimum(dj, N - dj)
    return np.hypot(di, dj) / N


def off_disks(N: int, cells, radius: float) -> np.ndarray:
    keep = np.ones((N, N), dtype=bool)
    for cell in cells:
        keep &= torus_distance(N, cell) >= radius
    return keep


def stability_experiment(family, limit, cfg: SolverConfig | None = None, c: float = 1.0,
                         radius: float = 0.05, start_index: int = 1, suite: str = "stability") -> Report:
    """Solve every ``(atoms_j, f_j)`` and compare with the limit solution.

    Reports the L1 gap ``||psi_j - psi||_1`` and the sup gap off disks of
    radius ``radius`` around all atoms, a stand-in for convergence in
    capacity.  ``details["index"]`` holds the family indices starting at
    ``start_index``.  ``violations`` counts increases of either gap; the
    caller applies absolute thresholds.
    """
    t0 = time.perf_counter()
    cfg = cfg or SolverConfig()
    atoms_lim, f_lim = limit
    psi = solve_cmae(atoms_lim, f_lim, cfg, c)
    cells = {cell for cell, _ in psi.atoms}
    for atoms, _ in family:
        cells |= {cell for cell, _ in _norm_atoms(atoms, psi.N)}
    keep = off_disks(psi.N, sorted(cells), radius)
    h2 = psi.h**2
    l1, sup = [], []
    for atoms, f in family:
        pj = solve_cmae(atoms, f, cfg, c)
        diff = pj.values - psi.values
        l1.append(float(np.abs(diff).sum() * h2))
        sup.append(float(np.abs(diff[keep]).max()))
    slack = 10 * cfg.tol
    incr = sum(b > a + slack for a, b in zip(l1, l1[1:])) + sum(b > a + slack for a, b in zip(sup, sup[1:]))
    rates = [float(np.log(a / b) / np.log((k + 1) / k)) if a > 0 and b > 0 else None
             for k, (a, b) in enumerate(zip(l1, l1[1:]), start=start_index)]
    return Report(
        suite=suite,
        trials=len(l1),
        violations=int(incr),
        worst_margin=float(max(l1[-1], 0.0)) if l1 else 0.0,
        seed=None,
        runtime_ms=int(1000 * (time.perf_counter() - t0)),
        details={
            "index": list(range(start_index, start_index + len(l1))),
            "l1_gap": l1,
            "sup_gap_off_disks": sup,
            "l1_rates": rates,
            "capacity_proxy": f"sup norm off disks of radius {radius} around atoms",
            "N": psi.N,
        },
    )


def stability_families(N: int = 256, length: int = 12, c: float = 1.0, k: int = 8):
    """The three standard families as ``{name: (family, limit, start_index)}``.

    ``constant``: one atom of weight 1/2 and ``f = c - 1/2`` repeated.
    ``lelong``: ``nu_j = 1/2 - 1/(10 j)`` with ``f_j = c - nu_j``.
    ``density``: atom 3/10 with ``f_j = 7/10 + (pi / (2 j)) cos(2 pi k x)``,
    a perturbation of L1 size ``1/j``; starts at ``j = 3`` where ``f_j >= 0``.
    """
    x = (N // 2, N // 2)
    ones = np.ones((N, N))
    fam = {}
    lim = ([(x, 0.5)], (c - 0.5) * ones)
    fam["constant"] = ([lim] * length, lim, 1)
    lelong = []
    for j in range(1, length + 1):
        nu = 0.5 - 1.0 / (10 * j)
        lelong.append(([(x, nu)], (c - nu) * ones))
    fam["lelong"] = (lelong, lim, 1)
    xs = np.arange(N) / N
    wave = np.cos(2 * np.pi * k * xs)[:, None] * ones
    lim2 = ([(x, 0.3)], (c - 0.3) * ones)
    dens = [([(x, 0.3)], (c - 0.3) * ones + (np.pi / (2 * j)) * wave) for j in range(3, length + 3)]
    fam["density"] = (dens, lim2, 3)
    return fam


__all__ = [
    "Divergence",
    "IncompatibleData",
    "MonotonicityViolation",
    "SingularBudget",
    "ceiling",
    "concentration_check",
    "p_bracket",
    "rooftop",
    "scale",
    "solve_cmae",
    "solve_obstacle",
    "stability_experiment",
    "stability_families",
]

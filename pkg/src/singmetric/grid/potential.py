"""Sampled potentials on the flat N x N torus with explicit atoms.

Conventions: ``h = 1/N``, the torus has area 1, the reference form has
constant density ``c`` (so the total budget is ``c``), and

    Delta_h u[p] = (sum of the 4 neighbours - 4 u[p]) / h^2.

A grid function ``u`` lies in the discrete cone when ``c + Delta_h u >= 0``,
i.e. ``u[p] <= avg_4(u)[p] + c h^2 / 4``, at every cell that is not an atom.

An atom ``(p, nu)`` is a logarithmic pole of weight ``nu`` at cell ``p``.
On the grid it is realised by ``nu * G_p`` where ``G`` solves
``Delta_h G = delta^h - 1`` with ``delta^h = 1/h^2`` at one cell.  The
sampled value at an atom cell is finite, but the cell is treated as
pluripolar (value ``-inf``) by the truncated mass.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from ..core import SingularityError, parse_number


class NotInCone(SingularityError):
    def __init__(self, margin, cell=None):
        super().__init__(f"discrete subharmonicity fails by {margin:.3g} at cell {cell}")
        self.margin = margin
        self.cell = cell


DEFAULT_EPS_LADDER = tuple(2.0**-k for k in range(1, 11)) + (0.0,)


def mass_tol(N: int) -> float:
    """Tolerance ``12/N`` for grid masses against closed forms."""
    return 12.0 / N


@dataclass(frozen=True)
class SolverConfig:
    """Numerical knobs shared by all grid solvers.

    Parameters
    ----------
    tol : float
        Target sup-norm accuracy of the relaxation.  Over-relaxed sweeps stop
        once the update falls below ``tol * (2 - omega)``, which bounds the
        remaining error by roughly ``tol``.
    max_iters : int
        Sweep cap; hitting it raises ``Divergence``.
    trunc_depth : float or None
        The ``k`` of the truncated mass.  ``None`` picks
        ``max(20 * max(nu) * log N, 1)``.
    eps_ladder : tuple of float
        Strictly decreasing to 0; used by ``ceiling``.
    omega : float or None
        Relaxation factor; ``None`` uses the optimal periodic SOR factor and
        ``1.0`` gives plain projected Gauss-Seidel.
    """

    tol: float = 1e-8
    max_iters: int = 10**6
    trunc_depth: float | None = None
    eps_ladder: tuple = DEFAULT_EPS_LADDER
    omega: float | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        lad = tuple(float(e) for e in self.eps_ladder)
        object.__setattr__(self, "eps_ladder", lad)
        if not lad or lad[-1] != 0.0:
            raise ValueError("eps_ladder must end at 0")
        if any(a <= b for a, b in zip(lad, lad[1:])) or lad[0] >= 1 or lad[0] < 0:
            raise ValueError("eps_ladder must be strictly decreasing in [0, 1)")
        if self.omega is not None and not 0 < self.omega < 2:
            raise ValueError("omega must lie in (0, 2)")
        if self.trunc_depth is not None and not self.trunc_depth > 0:
            raise ValueError("trunc_depth must be positive")

    def cone_tol(self) -> float:
        return 10.0 * self.tol


def _norm_atoms(atoms, N):
    out = {}
    for a in atoms:
        (i, j), nu = a
        key = (int(i) % N, int(j) % N)
        nu = float(nu)
        if nu < 0:
            raise ValueError("Lelong numbers are nonnegative")
        if nu == 0:
            continue
        out[key] = out.get(key, 0.0) + nu
    return tuple(sorted(out.items()))


@dataclass(frozen=True, eq=False)
class GridPotential:
    """Potential samples on the N x N torus.

    ``values`` is stored read-only with sup at most 0.  Constructors
    normalize to sup 0 except for rooftop envelopes, which must stay below
    their obstacle.  ``atoms`` is a tuple of ``((i, j), nu)`` sorted by
    cell; zero weights are dropped.
    """

    N: int
    values: np.ndarray
    atoms: tuple = ()
    c: float = 1.0
    sup_tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        N = int(self.N)
        object.__setattr__(self, "N", N)
        if N < 4 or N % 2:
            raise ValueError("N must be even and at least 4")
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.shape != (N, N):
            raise ValueError(f"values must have shape ({N}, {N})")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite; atoms carry the poles")
        if v.max() > self.sup_tol:
            raise ValueError(f"sup of values is {v.max():.3g}, expected at most 0")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "atoms", _norm_atoms(self.atoms, N))
        object.__setattr__(self, "c", float(self.c))
        if not self.c > 0:
            raise ValueError("background density must be positive")

    @classmethod
    def normalized(cls, N, values, atoms=(), c=1.0) -> "GridPotential":
        v = np.asarray(values, dtype=np.float64)
        return cls(N, v - v.max(), atoms, c)

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def total_lelong(self) -> float:
        return float(sum(nu for _, nu in self.atoms))

    @property
    def max_lelong(self) -> float:
        return max((nu for _, nu in self.atoms), default=0.0)

    def lelong_at(self, cell) -> float:
        return dict(self.atoms).get(tuple(cell), 0.0)

    def atom_mask(self) -> np.ndarray:
        m = np.zeros((self.N, self.N), dtype=bool)
        for (i, j), _ in self.atoms:
            m[i, j] = True
        return m

    def sidecar(self) -> dict:
        return {
            "N": self.N,
            "c": self.c,
            "atoms": [[i, j, repr(nu)] for (i, j), nu in self.atoms],
        }

    def to_json(self) -> dict:
        return self.sidecar()


# ---------------------------------------------------------------------------
# discrete operators


def avg4(u: np.ndarray) -> np.ndarray:
    return 0.25 * (np.roll(u, 1, 0) + np.roll(u, -1, 0) + np.roll(u, 1, 1) + np.roll(u, -1, 1))


def laplacian(u: np.ndarray) -> np.ndarray:
    """Periodic 5-point Laplacian with ``h = 1/N``."""
    N = u.shape[0]
    return 4.0 * N * N * (avg4(u) - u)


def _symbol(N: int) -> np.ndarray:
    k = 2 * np.pi * np.fft.fftfreq(N)
    lam = (2 * np.cos(k)[:, None] + 2 * np.cos(k)[None, :] - 4) * N * N
    return lam


def poisson_fft(g: np.ndarray) -> np.ndarray:
    """Zero-mean solution of ``Delta_h psi = g`` for zero-mean ``g``."""
    N = g.shape[0]
    lam = _symbol(N)
    lam[0, 0] = 1.0
    gh = np.fft.fft2(g)
    gh[0, 0] = 0.0
    return np.fft.ifft2(gh / lam).real


@lru_cache(maxsize=16)
def _green0(N: int) -> np.ndarray:
    g = np.full((N, N), -1.0)
    g[0, 0] += N * N
    G = poisson_fft(g)
    G -= G.mean()
    G.flags.writeable = False
    return G


def green(N: int, cell=(0, 0)) -> np.ndarray:
    """Zero-mean discrete Green function with pole at ``cell``: ``Delta_h G = delta^h - 1``."""
    i, j = cell
    return np.roll(_green0(N), (int(i), int(j)), axis=(0, 1))


def singular_part(N: int, atoms) -> np.ndarray:
    """``sum nu_i G_{x_i}`` (zero mean)."""
    S = np.zeros((N, N))
    for cell, nu in atoms:
        S += nu * green(N, cell)
    return S


def green_potential(N: int, atoms, c: float = 1.0) -> GridPotential:
    """The potential ``sum nu_i G_{x_i}`` normalized to sup 0."""
    atoms = _norm_atoms(atoms, N)
    if sum(nu for _, nu in atoms) > c:
        raise ValueError("total Lelong number exceeds the budget")
    return GridPotential.normalized(N, singular_part(N, atoms), atoms, c)


def cone_defect(u: GridPotential) -> np.ndarray:
    """``u - avg4(u) - c h^2/4``; positive entries violate the cone constraint."""
    d = u.values - avg4(u.values) - u.c * u.h**2 / 4
    d[u.atom_mask()] = -np.inf
    return d


def check_cone(u: GridPotential, tol: float) -> None:
    d = cone_defect(u)
    k = int(np.argmax(d))
    if d.flat[k] > tol:
        raise NotInCone(float(d.flat[k]), np.unravel_index(k, d.shape))


def default_depth(u: GridPotential) -> float:
    return max(20.0 * u.max_lelong * math.log(u.N), 1.0)


def truncated_mass(u: GridPotential, k: float) -> float:
    """``int_{u > -k} (c + Delta_h max(u, -k)) dA`` with atom cells at ``-inf``.

    A cell counts when it and its four neighbours all lie above the cut,
    where the discrete Laplacian of ``max(u, -k)`` equals that of ``u``.
    Negative cell densities (solver round-off) are clipped, which makes the
    result exactly non-decreasing in ``k``.
    """
    low = (u.values <= -k) | u.atom_mask()
    near = low | np.roll(low, 1, 0) | np.roll(low, -1, 0) | np.roll(low, 1, 1) | np.roll(low, -1, 1)
    dens = np.maximum(u.c + laplacian(u.values), 0.0)
    return float(np.where(near, 0.0, dens).sum() * u.h**2)


def np_mass(u: GridPotential, cfg: SolverConfig | None = None, check: bool = True) -> float:
    """Non-pluripolar mass by truncation at depth ``cfg.trunc_depth``.

    With ``check`` the input is tested for cone membership and the value is
    asserted non-decreasing along the ladder ``k, 2k, 4k``.
    """
    from ..core import ModelSoundnessError

    cfg = cfg or SolverConfig()
    if check:
        check_cone(u, cfg.cone_tol())
    k = cfg.trunc_depth if cfg.trunc_depth is not None else default_depth(u)
    m = truncated_mass(u, k)
    if check:
        ladder = [m, truncated_mass(u, 2 * k), truncated_mass(u, 4 * k)]
        if any(a > b for a, b in zip(ladder, ladder[1:])):
            raise ModelSoundnessError(f"truncated mass decreases along the k ladder: {ladder}")
    return m


# ---------------------------------------------------------------------------
# file formats


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def parse_atoms(items, N: int | None = None):
    """``[[i, j, nu], ...]`` with ``nu`` a number or ``"p/q"`` string."""
    out = []
    for it in items:
        i, j, nu = it
        nu = float(parse_number(nu)) if isinstance(nu, str) else float(nu)
        out.append(((int(i), int(j)), nu))
    return out


def write_array(path, arr: np.ndarray) -> None:
    path = Path(path)
    if path.suffix == ".csv":
        np.savetxt(path, arr, delimiter=",", fmt="%.17g")
    else:
        np.ascontiguousarray(arr, dtype="<f8").tofile(path)


def read_array(path, N: int) -> np.ndarray:
    path = Path(path)
    if path.suffix == ".csv":
        arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    else:
        arr = np.fromfile(path, dtype="<f8")
        if arr.size != N * N:
            raise ValueError(f"{path}: expected {N * N} doubles, found {arr.size}")
    return arr.reshape(N, N)


def write_potential(path, u: GridPotential, extra: dict | None = None) -> None:
    write_array(path, u.values)
    side = u.sidecar()
    if extra:
        side.update(extra)
    sidecar_path(path).write_text(json.dumps(side, indent=2))


def read_potential(path) -> GridPotential:
    side = json.loads(sidecar_path(path).read_text())
    N = int(side["N"])
    vals = read_array(path, N)
    return GridPotential(N, vals, parse_atoms(side.get("atoms", []), N), float(side.get("c", 1.0)))

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from singmetric.core import ModelSoundnessError, Relation, make_handle, witness
from singmetric.dim1 import atomic, meet_atomic
from singmetric.grid import (
    Divergence,
    GridPotential,
    IncompatibleData,
    NotInCone,
    SingularBudget,
    SolverConfig,
    ceiling,
    check_cone,
    concentration_check,
    green,
    green_potential,
    join_grid,
    laplacian,
    mass_tol,
    mass_vector_grid,
    np_mass,
    p_bracket,
    read_potential,
    rooftop,
    solve_cmae,
    stability_experiment,
    stability_families,
    truncated_mass,
    write_potential,
)
from singmetric.grid import kernels
from singmetric.grid.solvers import scale, solve_obstacle


def wave(N, amp=0.02, axis=0, freq=1):
    x = np.arange(N) / N
    w = amp * np.cos(2 * np.pi * freq * x)
    w = w[:, None] * np.ones((1, N)) if axis == 0 else np.ones((N, 1)) * w[None, :]
    return w - w.max()


def five_point_matrix(N):
    """Sparse periodic 5-point Laplacian with h = 1/N."""
    I = sp.identity(N, format="csr")
    shift = sp.diags([1, 1], [1, -1], shape=(N, N), format="lil")
    shift[0, N - 1] = 1
    shift[N - 1, 0] = 1
    D = shift.tocsr() - 2 * I
    return (sp.kron(D, I) + sp.kron(I, D)) * N * N


# --- config and type --------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol=0)
    with pytest.raises(ValueError):
        SolverConfig(eps_ladder=(0.5, 0.5, 0.0))
    with pytest.raises(ValueError):
        SolverConfig(eps_ladder=(0.5, 0.25))
    with pytest.raises(ValueError):
        SolverConfig(omega=2.0)


def test_potential_invariants():
    with pytest.raises(ValueError):
        GridPotential(8, np.ones((8, 8)))  # sup must not exceed 0
    with pytest.raises(ValueError):
        GridPotential(7, np.zeros((7, 7)))
    u = GridPotential.normalized(8, np.arange(64.0).reshape(8, 8), [((9, 1), 0.25)])
    assert u.values.max() == 0 and not u.values.flags.writeable
    assert u.atoms == (((1, 1), 0.25),)  # cells wrap around the torus


def test_mass_tol_value():
    assert mass_tol(256) == pytest.approx(0.046875)


# --- Green function oracles --------------------------------------------------


@pytest.mark.parametrize("N", [8, 16])
def test_green_matches_sparse_solve(N):
    L = five_point_matrix(N)
    rhs = -np.ones(N * N)
    rhs[0] += N * N
    # pin the mean through a bordered system
    A = sp.bmat([[L, np.ones((N * N, 1))], [np.ones((1, N * N)), None]], format="csc")
    sol = spla.spsolve(A, np.append(rhs, 0.0))[:-1].reshape(N, N)
    assert np.abs(sol - green(N)).max() < 1e-10


@pytest.mark.parametrize("N", [8, 16])
def test_green_matches_eigen_sum(N):
    G = np.zeros((N, N))
    idx = np.arange(N)
    for k1 in range(N):
        for k2 in range(N):
            if k1 == k2 == 0:
                continue
            lam = N * N * (2 * np.cos(2 * np.pi * k1 / N) + 2 * np.cos(2 * np.pi * k2 / N) - 4)
            G += np.cos(2 * np.pi * (k1 * idx[:, None] + k2 * idx[None, :]) / N) / lam
    assert np.abs(G - green(N)).max() < 1e-12


def test_green_shift_and_laplacian():
    N = 16
    G = green(N, (3, 5))
    delta = -np.ones((N, N))
    delta[3, 5] += N * N
    assert np.abs(laplacian(G) - delta).max() < 1e-8
    assert abs(G.mean()) < 1e-12


# --- np_mass ------------------------------------------------------------------


def test_np_mass_zero_potential_is_c():
    u = GridPotential(32, np.zeros((32, 32)), c=1.5)
    for k in (0.5, 1, 10, 1e6):
        assert truncated_mass(u, k) == 1.5
    assert np_mass(u) == 1.5


def test_np_mass_one_atom():
    u = green_potential(256, [((128, 128), 0.5)])
    assert abs(np_mass(u) - 0.5) <= 0.05


def test_np_mass_two_atoms():
    u = green_potential(256, [((64, 64), 0.3), ((192, 128), 0.2)])
    assert abs(np_mass(u) - 0.5) <= 0.05


def test_not_in_cone():
    N = 16
    v = np.zeros((N, N))
    v[4, 4] = 1.0
    u = GridPotential.normalized(N, v)
    with pytest.raises(NotInCone):
        np_mass(u)
    with pytest.raises(NotInCone):
        check_cone(u, 1e-7)


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_truncation_monotone_in_k(seed):
    rng = np.random.default_rng(seed)
    N = 32
    k = rng.integers(1, 4)
    cells = [tuple(rng.integers(0, N, 2)) for _ in range(k)]
    nus = rng.dirichlet(np.ones(k)) * rng.uniform(0.1, 0.9)
    u = green_potential(N, list(zip(cells, nus)))
    ks = np.sort(rng.uniform(0.01, 50, 12))
    ms = [truncated_mass(u, t) for t in ks]
    assert all(a <= b for a, b in zip(ms, ms[1:]))
    assert ms[-1] <= u.c + 1e-12


def test_mass_vector_grid():
    u = green_potential(64, [((32, 32), 0.25)])
    mv = mass_vector_grid(u)
    assert mv.budget == 1.0 and mv.tolerance == mass_tol(64)
    assert abs(mv[0] - 0.75) <= mass_tol(64)


def test_grid_order_and_join():
    a = make_handle(green_potential(32, [((8, 8), 0.4), ((20, 4), 0.1)]))
    b = make_handle(green_potential(32, [((8, 8), 0.2)]))
    assert witness(a, b).relation is Relation.LEQ
    j = join_grid(a.payload, b.payload)
    assert j.atoms == (((8, 8), 0.2),)


# --- rooftop ------------------------------------------------------------------


def test_rooftop_idempotent():
    u = GridPotential(32, wave(32))
    r = rooftop(u, u)
    assert np.abs(r.values - u.values).max() < 1e-7


def test_rooftop_inactive_obstacle():
    # min of two shifted copies of a cone member is the lower one
    u = GridPotential(32, wave(32))
    v = GridPotential(32, wave(32) - 0.1)
    assert np.abs(rooftop(u, v).values - v.values).max() < 1e-7


def test_rooftop_atoms_match_dim1_meet():
    N = 128
    x = (64, 64)
    u, v = green_potential(N, [(x, 0.3)]), green_potential(N, [(x, 0.5)])
    r = rooftop(u, v)
    meet = meet_atomic(atomic(1.0, [0.3]), atomic(1.0, [0.5]))
    assert r.lelong_at(x) == meet.lelong[0] == 0.5
    assert abs(np_mass(r) - meet.mass) <= mass_tol(N)


def test_rooftop_budget_exceeded():
    u = green_potential(32, [((4, 4), 0.7)])
    v = green_potential(32, [((20, 20), 0.7)])
    with pytest.raises(Divergence):
        rooftop(u, v)


def test_rooftop_below_inputs():
    N = 32
    u, v = GridPotential(N, wave(N, axis=0)), GridPotential(N, wave(N, axis=1))
    r = rooftop(u, v)
    assert (r.values <= np.minimum(u.values, v.values) + 1e-12).all()
    check_cone(r, 1e-7)


def lp_envelope(obstacle, density):
    """Largest subsolution below the obstacle via linear programming."""
    N = obstacle.shape[0]
    n = N * N
    avg = (five_point_matrix(N) / (4 * N * N)).toarray() + np.eye(n)
    # w - avg4(w) <= density h^2 / 4
    A = np.eye(n) - avg
    b = np.full(n, density / (4.0 * N * N))
    res = linprog(-np.ones(n), A_ub=A, b_ub=b, bounds=[(None, o) for o in obstacle.ravel()], method="highs")
    assert res.status == 0
    return res.x.reshape(N, N)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_obstacle_solver_matches_linear_program(seed):
    N = 8
    rng = np.random.default_rng(seed)
    obstacle = -rng.uniform(0, 0.05, (N, N))
    ref = lp_envelope(obstacle, 1.0)
    phi, _ = solve_obstacle(obstacle, 1.0, SolverConfig(tol=1e-12))
    assert np.abs(phi - ref).max() < 1e-8


def random_cone_member(rng, N, c=1.0):
    """Random trigonometric polynomial scaled into the cone."""
    x = np.arange(N) / N
    w = np.zeros((N, N))
    for _ in range(4):
        k1, k2 = rng.integers(0, 4, 2)
        w += rng.normal() * np.cos(2 * np.pi * (k1 * x[:, None] + k2 * x[None, :]) + rng.uniform(0, 2 * np.pi))
    lap = laplacian(w)
    if lap.min() < -c:
        w *= 0.9 * c / -lap.min()
    return w


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_rooftop_extremality(seed):
    rng = np.random.default_rng(seed)
    N = 16
    u, v = GridPotential(N, wave(N, axis=0)), GridPotential(N, wave(N, axis=1, freq=2))
    r = rooftop(u, v, SolverConfig(tol=1e-10))
    floor = np.minimum(u.values, v.values)
    for _ in range(5):
        w = random_cone_member(rng, N)
        w -= (w - floor).max()  # touch min(u, v) from below
        assert (w <= r.values + 1e-8).all()


# --- p_bracket and ceiling ----------------------------------------------------


def test_p_bracket_bounded_is_zero():
    u = GridPotential(32, wave(32))
    assert np.abs(p_bracket(u).values).max() < 1e-7


def test_p_bracket_green():
    N = 64
    psi = green_potential(N, [((32, 32), 0.4)])
    info = {}
    out = p_bracket(psi, details=info)
    assert out.atoms == psi.atoms and out.values.max() == 0
    assert abs(np_mass(out) - np_mass(psi)) <= mass_tol(N)
    assert info["rungs"] >= 1


def test_p_bracket_green_plus_bump():
    N = 64
    S = green_potential(N, [((20, 20), 0.3)])
    psi = GridPotential.normalized(N, S.values + wave(N, 0.01), S.atoms)
    check_cone(psi, 1e-7)
    out = p_bracket(psi)
    assert abs(np_mass(out) - np_mass(psi)) <= mass_tol(N)
    # the envelope only depends on the atoms
    assert np.abs(out.values - p_bracket(S).values).max() < 1e-6


def test_ceiling_zero():
    u = GridPotential(16, np.zeros((16, 16)))
    assert np.abs(ceiling(u).values).max() < 1e-7


def test_ceiling_green_and_idempotent():
    N = 64
    u = green_potential(N, [((32, 32), 0.5)])
    info = {}
    c1 = ceiling(u, details=info)
    assert abs(np_mass(c1) - 0.5) <= mass_tol(N)
    assert info["worst_rise"] <= 1e-6
    c2 = ceiling(c1)
    assert np.abs(c2.values - c1.values).max() <= 1e-7


def test_scale_scales_atoms():
    u = green_potential(16, [((2, 2), 0.5)])
    assert scale(u, 0.5).atoms == (((2, 2), 0.25),)


# --- concentration ------------------------------------------------------------


def test_concentration_equal_inputs():
    u = GridPotential(32, wave(32))
    r = concentration_check(u, u)
    assert r.violations == 0 and abs(r.worst_margin) < 1e-12


def test_concentration_shifted():
    u = GridPotential(32, wave(32))
    v = GridPotential(32, wave(32) - 0.5)
    r = concentration_check(u, v)
    assert r.violations == 0 and abs(r.worst_margin) < 1e-12


def smooth_pair(N, rng_seed=0):
    rng = np.random.default_rng(rng_seed)
    a = random_cone_member(rng, N)
    b = random_cone_member(rng, N)
    return GridPotential.normalized(N, a), GridPotential.normalized(N, b)


def test_concentration_refinement():
    for N in (32, 64, 128):
        phi, psi = smooth_pair(N)
        r = concentration_check(phi, psi)
        assert r.details["violation_measure"] <= 10.0 / N


@given(st.integers(0, 10**6), st.floats(0, 0.05))
@settings(max_examples=40, deadline=None)
def test_concentration_exact_on_grid(seed, drop):
    # max(phi, psi) equals phi at the cell and dominates it at the neighbours
    rng = np.random.default_rng(seed)
    N = 16
    phi = GridPotential.normalized(N, random_cone_member(rng, N))
    b = random_cone_member(rng, N)
    psi = GridPotential(N, b - b.max() - drop)
    r = concentration_check(phi, psi, tol=0.0)
    assert r.violations == 0


# --- solve_cmae ---------------------------------------------------------------


def test_cmae_no_atoms():
    psi = solve_cmae([], np.ones((16, 16)))
    assert np.abs(psi.values).max() < 1e-12


def test_cmae_green_oracle():
    N = 64
    x = (10, 40)
    psi = solve_cmae([(x, 0.5)], np.full((N, N), 0.5))
    oracle = green_potential(N, [(x, 0.5)])
    assert np.abs(psi.values - oracle.values).max() < 1e-9


def test_cmae_gaussian_bump():
    N = 64
    x = np.arange(N) / N
    d = np.minimum(x, 1 - x)
    g = np.exp(-((d[:, None] - 0) ** 2 + (d[None, :] - 0) ** 2) / 0.02)
    f = 0.7 * g / (g.sum() / N**2)
    info = {}
    psi = solve_cmae([((32, 32), 0.3)], f, details=info)
    assert info["residual"] < 1e-8
    assert abs(np_mass(psi) - 0.7) <= mass_tol(N)


def test_cmae_errors():
    N = 16
    with pytest.raises(IncompatibleData):
        solve_cmae([((0, 0), 0.5)], np.ones((N, N)))
    with pytest.raises(SingularBudget):
        solve_cmae([((0, 0), 1.0)], np.zeros((N, N)))
    with pytest.raises(ValueError):
        solve_cmae([], np.full((N, N), 1.0), method="nope")


def test_cmae_divergence_on_iteration_cap():
    N = 32
    with pytest.raises(Divergence) as ei:
        solve_cmae([((3, 3), 0.5)], np.full((N, N), 0.5), SolverConfig(max_iters=3), method="relax")
    assert ei.value.iterations == 3


def test_cmae_uniqueness_proxy():
    N = 64
    cfg = SolverConfig()
    f = np.full((N, N), 0.6)
    atoms = [((16, 16), 0.4)]
    a = solve_cmae(atoms, f, cfg, method="relax")
    rng = np.random.default_rng(5)
    b = solve_cmae(atoms, f, cfg, method="relax", initial=rng.normal(size=(N, N)))
    assert np.abs(a.values - b.values).max() <= 2 * cfg.tol
    c = solve_cmae(atoms, f, cfg, method="fft")
    assert np.abs(a.values - c.values).max() <= 2 * cfg.tol


# --- stability ----------------------------------------------------------------


def test_stability_constant_family():
    fam, lim, start = stability_families(N=32, length=4)["constant"]
    r = stability_experiment(fam, lim, start_index=start)
    assert r.details["l1_gap"] == [0.0] * 4 and r.violations == 0


def test_stability_lelong_family_small_grid():
    fam, lim, start = stability_families(N=64, length=8)["lelong"]
    r = stability_experiment(fam, lim, start_index=start)
    gaps = r.details["l1_gap"]
    assert r.violations == 0 and gaps[-1] < gaps[0]


def test_stability_density_family_small_grid():
    fam, lim, start = stability_families(N=64, length=8)["density"]
    r = stability_experiment(fam, lim, start_index=start)
    assert r.details["index"][0] == 3
    assert r.violations == 0


# --- kernels and files --------------------------------------------------------


@pytest.mark.skipif(kernels._relax is None, reason="compiled kernel not built")
@pytest.mark.parametrize("omega", [1.0, 1.7])
def test_backends_agree(omega):
    N = 32
    rng = np.random.default_rng(0)
    obstacle = -rng.uniform(0, 0.1, (N, N))
    rhs = np.full((N, N), 1.0 / (4 * N * N))
    a, b = obstacle.copy(), obstacle.copy()
    ia, _ = kernels.relax(a, obstacle, rhs, omega, 1e-11, 5000, backend="python")
    ib, _ = kernels.relax(b, obstacle, rhs, omega, 1e-11, 5000, backend="cython")
    assert ia == ib
    assert np.abs(a - b).max() < 1e-13


def test_relax_rejects_odd_grid():
    with pytest.raises(ValueError):
        kernels.relax(np.zeros((5, 5)), np.zeros((5, 5)), np.zeros((5, 5)))


def test_optimal_omega():
    assert kernels.optimal_omega(4) == pytest.approx(1.0)
    assert 1.9 < kernels.optimal_omega(256) < 2


@pytest.mark.parametrize("suffix", [".bin", ".csv"])
def test_file_roundtrip(tmp_path, suffix):
    u = green_potential(16, [((3, 4), 0.3), ((10, 1), 0.125)], c=2.0)
    path = tmp_path / f"u{suffix}"
    write_potential(path, u)
    back = read_potential(path)
    assert back.N == 16 and back.c == 2.0 and back.atoms == u.atoms
    assert np.array_equal(back.values, u.values)


def test_truncated_read_rejected(tmp_path):
    path = tmp_path / "u.bin"
    write_potential(path, green_potential(16, [((3, 4), 0.3)]))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        read_potential(path)


def test_np_mass_ladder_assertion_is_soundness_error(monkeypatch):
    import singmetric.grid.potential as pot

    u = green_potential(16, [((3, 4), 0.3)])
    calls = iter([0.7, 0.6, 0.7])
    monkeypatch.setattr(pot, "truncated_mass", lambda *_: next(calls))
    with pytest.raises(ModelSoundnessError):
        pot.np_mass(u)

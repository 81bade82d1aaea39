"""Randomized verification suites over the three engines.

Each suite draws its trials from per-trial seeds derived from the suite
seed, so any counterexample can be replayed from the ``trial_seed`` stored
in its artifact.  Exact engines are checked with zero tolerance; grid
suites use ``grid.mass_tol``.
"""
from __future__ import annotations

import random
import time
from fractions import Fraction

import numpy as np

from . import defaults as D
from . import grid
from .core import (
    ModelSoundnessError,
    Relation,
    SingularityError,
    check_chain,
    ds_comparable,
    in_s_delta,
    make_handle,
    quasi_triangle_ratio,
    scaling_transport,
    transported_masses,
    witness,
)
from .dim1 import (
    AtomicSingularity,
    BudgetExceeded,
    atomic,
    cauchy_sequence,
    diamond_atomic,
    ds_atomic,
    leq,
    random_atomic,
    sandwich_sequences,
    semicontinuity_check,
    tail_sup,
)
from .report import Report
from .toric import (
    EnvelopeNonexistent,
    RationalPolygon,
    ToricClass,
    convex_combination,
    diamond_check,
    mixed_area,
    nested_chain,
    random_ambient,
    random_body,
    shrinking_family,
)

MAX_ARTIFACTS = 20


class UnknownSuite(SingularityError):
    pass


class UnknownProfile(SingularityError):
    pass


def trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1)[0])


def trial_rng(seed: int, trial: int) -> random.Random:
    return random.Random(trial_seed(seed, trial))


class _Tally:
    def __init__(self, suite, seed):
        self.suite = suite
        self.seed = seed
        self.trials = 0
        self.violations = 0
        self.margins = []
        self.artifacts = []
        self.details = {"defaults_version": D.VERSION}
        self._t0 = time.perf_counter()

    def trial(self, margin, ok, artifact=None):
        self.trials += 1
        self.margins.append(float(margin))
        if not ok:
            self.fail(artifact)

    def fail(self, artifact=None):
        self.violations += 1
        if artifact is not None and len(self.artifacts) < MAX_ARTIFACTS:
            self.artifacts.append(artifact)

    def report(self) -> Report:
        return Report(
            suite=self.suite,
            trials=self.trials,
            violations=self.violations,
            worst_margin=min(self.margins, default=0.0),
            seed=self.seed,
            runtime_ms=int(1000 * (time.perf_counter() - self._t0)),
            artifacts=self.artifacts,
            details=self.details,
            margins=self.margins,
        )


def _as_float(a: AtomicSingularity) -> AtomicSingularity:
    return AtomicSingularity(float(a.budget), a.points, tuple(float(v) for v in a.lelong))


def _atomic_pair_with_meet(rng: random.Random):
    k = rng.randint(1, 4)
    for _ in range(200):
        a, b = random_atomic(rng, k), random_atomic(rng, k)
        if sum(max(x, y) for x, y in zip(a.lelong, b.lelong)) <= a.budget:
            return a, b
    half = Fraction(1, 2)
    return random_atomic(rng, k, max_total=half), random_atomic(rng, k, max_total=half)


# ---------------------------------------------------------------------------
# suites


def suite_diamond_dim1(trials=1000, seed=D.DEFAULT_SEED) -> Report:
    """Mass identity ``m_a + m_b = m_join + m_meet`` for pairs whose meet exists."""
    t = _Tally("diamond-dim1", seed)
    worst_float = 0.0
    for i in range(trials):
        s = trial_seed(seed, i)
        a, b = _atomic_pair_with_meet(random.Random(s))
        exact = diamond_atomic(a, b)
        flt = diamond_atomic(_as_float(a), _as_float(b))
        err = abs(flt.lhs - flt.rhs)
        worst_float = max(worst_float, err)
        ok = exact.lhs == exact.rhs and err <= D.FLOAT_IDENTITY_TOL
        t.trial(-max(float(abs(exact.lhs - exact.rhs)), err), ok,
                {"trial_seed": s, "a": a.to_json(), "b": b.to_json()})
    t.details["worst_float_error"] = worst_float
    return t.report()


def _segments_witness():
    P = RationalPolygon.box(0, 0, 1, 1)
    A = ToricClass(P, RationalPolygon.box(0, 0, 1, 0))
    B = ToricClass(P, RationalPolygon.box(0, 0, 0, 1))
    return diamond_check(A, B)


def suite_diamond_toric(trials=1000, seed=D.DEFAULT_SEED) -> Report:
    """``area A + area B <= area hull + area cap`` on random bodies, exactly."""
    t = _Tally("diamond-toric", seed)
    strict = 0
    for i in range(trials):
        s = trial_seed(seed, i)
        rng = random.Random(s)
        P = random_ambient(rng)
        A, B = ToricClass(P, random_body(rng, P)), ToricClass(P, random_body(rng, P))
        art = {"trial_seed": s, "a": A.to_json(), "b": B.to_json()}
        try:
            r = diamond_check(A, B)
        except EnvelopeNonexistent as exc:
            art["error"] = str(exc)
            t.trial(-1.0, False, art)
            t.details["aborted_at"] = i
            break
        strict += r.strict
        t.trial(r.rhs - r.lhs, r.holds, art)
    w = _segments_witness()
    t.details["strict_fraction"] = strict / max(t.trials, 1)
    t.details["segments_witness"] = {"lhs": str(w.lhs), "rhs": str(w.rhs), "strict": w.strict}
    if not (w.lhs == 0 and w.rhs == 1 and w.strict):
        t.fail({"segments_witness": t.details["segments_witness"]})
    return t.report()


def _atomic_chain(rng: random.Random, length=3):
    """``a_1 <= a_2 <= ...``: Lelong numbers shrink along the chain."""
    k = rng.randint(1, 4)
    first = random_atomic(rng, k)
    chain = [first]
    for _ in range(length - 1):
        nu = [v * Fraction(rng.randint(0, 8), 8) for v in chain[-1].lelong]
        chain.append(chain[-1].with_lelong(nu))
    return chain


def _mass_monotone(handles) -> bool:
    return all(x.mass[j] <= y.mass[j] for x, y in zip(handles, handles[1:]) for j in range(x.n + 1))


def suite_telescoping(trials=1000, seed=D.DEFAULT_SEED) -> Report:
    """``ds(a, c) = ds(a, b) + ds(b, c)`` on certified chains in both exact engines."""
    t = _Tally("telescoping", seed)
    for i in range(trials):
        s = trial_seed(seed, i)
        rng = random.Random(s)
        P = random_ambient(rng)
        worst = 0
        ok = True
        art = {"trial_seed": s}
        for name, chain in (("toric", nested_chain(rng, P, 3)), ("atomic", _atomic_chain(rng, 3))):
            h = [make_handle(x) for x in chain]
            lhs = ds_comparable(h[0], h[2])
            rhs = ds_comparable(h[0], h[1]) + ds_comparable(h[1], h[2])
            good = check_chain(h) and lhs == rhs and _mass_monotone(h)
            worst = max(worst, abs(lhs - rhs))
            if not good:
                ok = False
                art[name] = [x.to_json() for x in chain]
        t.trial(-float(worst), ok, art)
    return t.report()


def suite_monotone_limit(trials=200, seed=D.DEFAULT_SEED) -> Report:
    """Increasing potentials (Lelong numbers decreasing to the limit) converge in ds.

    Even trials use the geometric family ``nu_j = nu + (nu_0 - nu) q^j``,
    odd trials the linear family that reaches ``nu`` at index ``L``.
    """
    t = _Tally("monotone-limit", seed)
    q = Fraction(D.MONOTONE_RATIO)
    L = D.MONOTONE_LENGTH
    final_gaps = []
    for i in range(trials):
        s = trial_seed(seed, i)
        rng = random.Random(s)
        k = rng.randint(1, 4)
        limit = random_atomic(rng, k, max_total=Fraction(1, 2))
        extra = random_atomic(rng, k, max_total=1 - sum(limit.lelong))
        top = [v + e for v, e in zip(limit.lelong, extra.lelong)]
        if i % 2 == 0:
            weights = [q**j for j in range(L + 1)]
        else:
            weights = [1 - Fraction(j, L) for j in range(L + 1)]
        fam = [limit.with_lelong(v + (w0 - v) * w for v, w0 in zip(limit.lelong, top)) for w in weights]
        gaps = [ds_atomic(a, limit) for a in fam]
        increasing = all(leq(x, y) for x, y in zip(fam, fam[1:]))
        decreasing = all(g1 < g0 or g0 == 0 for g0, g1 in zip(gaps, gaps[1:])) and all(
            g1 <= g0 for g0, g1 in zip(gaps, gaps[1:]))
        final = gaps[-1]
        final_gaps.append(float(final))
        ok = increasing and decreasing and final < D.MONOTONE_FINAL_GAP
        t.trial(D.MONOTONE_FINAL_GAP - float(final), ok,
                {"trial_seed": s, "limit": limit.to_json(), "start": fam[0].to_json()})
    t.details["worst_final_gap"] = max(final_gaps, default=0.0)
    return t.report()


def _random_triple(tag: str, rng: random.Random):
    if tag == "toric":
        P = random_ambient(rng)
        return [make_handle(ToricClass(P, random_body(rng, P))) for _ in range(3)]
    k = rng.randint(1, 4)
    return [make_handle(random_atomic(rng, k)) for _ in range(3)]


def quasi_triangle_constant(tag: str = "atomic", trials: int = D.QUASI_TRIANGLE_TRIALS,
                            seed: int = D.DEFAULT_SEED):
    """Worst ``est(a, c) / (est(a, b) + est(b, c))`` over random triples."""
    worst = Fraction(0)
    for i in range(trials):
        a, b, c = _random_triple(tag, trial_rng(seed, i))
        worst = max(worst, quasi_triangle_ratio(a, b, c))
    return worst


def suite_cauchy_decreasing(trials=100, seed=D.DEFAULT_SEED) -> Report:
    """Tail suprema of a fast Cauchy sequence form an equivalent decreasing sequence.

    The schedule is ``ds(u_j, u_{j+1}) <= K^(-2j)`` with ``K`` the empirical
    quasi-triangle constant of the atomic estimator (floored, since a
    constant above 1 is needed).  Checks ``u_j <= v_j``, ``v_j`` decreasing
    and ``ds(u_j, v_j) <= K^(1-j) K / (K - 1)``.
    """
    t = _Tally("cauchy-decreasing", seed)
    K_emp = quasi_triangle_constant("atomic", D.QUASI_TRIANGLE_TRIALS, seed)
    K = max(Fraction(K_emp), Fraction(D.CAUCHY_K_FLOOR))
    t.details.update(K_empirical=str(K_emp), K=str(K))
    L = D.CAUCHY_LENGTH
    for i in range(trials):
        s = trial_seed(seed, i)
        rng = random.Random(s)
        seq, limit = cauchy_sequence(rng, L, 1 / K**2, npoints=rng.randint(1, 4))
        ext = seq + [limit]  # the sequence continues constantly at its limit
        sched = all(ds_atomic(ext[j], ext[j + 1]) <= K ** (-2 * j) for j in range(L))
        v = [tail_sup(ext, j) for j in range(L)]
        below = all(leq(seq[j], v[j]) for j in range(L))
        dec = all(leq(v[j + 1], v[j]) for j in range(L - 1))
        slack = min(K ** (1 - j) * K / (K - 1) - ds_atomic(seq[j], v[j]) for j in range(L))
        ok = sched and below and dec and slack >= 0
        t.trial(float(slack), ok, {"trial_seed": s, "limit": limit.to_json()})
    return t.report()


def sandwich_start(delta) -> int:
    """First ``j`` with ``2^(3 - j) < delta``: beyond it tail envelopes must exist."""
    j = 0
    while Fraction(2) ** (3 - j) >= delta:
        j += 1
    return j


def suite_sandwich(trials=100, seed=D.DEFAULT_SEED) -> Report:
    """Decreasing and increasing sandwich sequences around a Cauchy sequence in S_delta."""
    t = _Tally("sandwich", seed)
    delta = Fraction(D.SANDWICH_DELTA).limit_denominator(1000)
    j0 = sandwich_start(delta)
    L = D.SANDWICH_LENGTH
    t.details["start_index"] = j0
    first_exist = []
    for i in range(trials):
        s = trial_seed(seed, i)
        rng = random.Random(s)
        amp = rng.choice([Fraction(1, 4), Fraction(1, 2)])
        seq, limit = cauchy_sequence(rng, L, Fraction(1, 2), npoints=rng.randint(1, 4), delta=delta,
                                     amplitude=amp)
        ext = seq + [limit]
        art = {"trial_seed": s, "limit": limit.to_json()}
        try:
            upper, lower = sandwich_sequences(ext, start=j0)
        except BudgetExceeded as exc:
            art["error"] = str(exc)
            t.trial(-1.0, False, art)
            continue
        in_sdelta = all(a.mass >= delta for a in seq)
        exists = [j for j in range(L) if lower[j] is not None]
        first_exist.append(exists[0] if exists else L)
        mono = all(leq(upper[j + 1], upper[j]) for j in range(L - 1))
        mono &= all(leq(lower[j], lower[j + 1]) for j in exists if j + 1 < L)
        bracket = all(leq(seq[k], upper[j]) for j in range(L) for k in range(j, L))
        bracket &= all(leq(lower[j], seq[k]) for j in exists for k in range(j, L))
        slack = min(
            min(Fraction(2) ** (1 - j) - ds_atomic(upper[j], limit) for j in range(L)),
            min(Fraction(2) ** (1 - j) - ds_atomic(lower[j], limit) for j in exists),
        )
        ok = in_sdelta and mono and bracket and slack >= 0
        t.trial(float(slack), ok, art)
    t.details["latest_first_envelope"] = max(first_exist, default=0)
    return t.report()


def _convergent_sequence(rng: random.Random, length: int):
    k = rng.randint(1, 3)
    budget = Fraction(rng.randint(2, 4))
    amp = Fraction(1, 2)
    while True:
        nu = []
        for _ in range(k):
            kind = rng.random()
            if kind < 0.4:
                nu.append(Fraction(rng.randint(0, 2)))
            elif kind < 0.6:
                nu.append(Fraction(rng.randint(0, 4), 2))
            else:
                nu.append(Fraction(rng.randint(0, 128), 64))
        if sum(nu) <= budget - amp:
            break
    limit = atomic(budget, nu)
    if rng.random() < 0.25:
        # lambda u with lambda increasing to 1
        seq = [limit.with_lelong(v * (1 - Fraction(1, j + 2)) for v in nu) for j in range(length)]
    else:
        seq = []
        for j in range(length):
            step = amp * Fraction(1, 2) ** j / k
            seq.append(limit.with_lelong(max(Fraction(0), v + rng.choice((-1, 1)) * step) for v in nu))
    return seq, limit


def suite_semicontinuity(trials=500, seed=D.DEFAULT_SEED) -> Report:
    """``J[limit] ⊆ J[u_j]`` from some index on, for convergent atomic sequences."""
    t = _Tally("semicontinuity", seed)
    L = D.SEMICONT_LENGTH
    j0s = []
    for i in range(trials):
        s = trial_seed(seed, i)
        seq, limit = _convergent_sequence(random.Random(s), L)
        art = {"trial_seed": s, "limit": limit.to_json()}
        try:
            j0 = semicontinuity_check(seq, limit)
        except ModelSoundnessError as exc:
            art["error"] = str(exc)
            t.trial(-1.0, False, art)
            continue
        j0s.append(j0)
        t.trial(L - j0, True)
    t.details["max_j0"] = max(j0s, default=0)
    return t.report()


def suite_scaling(trials=500, seed=D.DEFAULT_SEED) -> Report:
    """Transport ``u -> u + eps V`` into ``(1 + eps) theta`` on comparable toric pairs.

    Asserts ``1 <= ds' / ds <= (1 + eps)^2``.  The details also record the
    exact coefficient structure ``ds' = (Dm0 + (1 + 3 eps) Dm1) / 3`` and
    the binomial formula for transported mass vectors.
    """
    t = _Tally("scaling", seed)
    eps_list = [Fraction(e) for e in D.SCALING_EPS]
    per_eps = {str(e): {"violations": 0, "max_ratio": 0.0} for e in eps_list}
    structure_failures = 0
    for i in range(trials):
        s = trial_seed(seed, i)
        rng = random.Random(s)
        P = random_ambient(rng)
        for _ in range(100):
            A, B = nested_chain(rng, P, 2)
            if A.body != B.body:
                break
        a, b = make_handle(A), make_handle(B)
        d = ds_comparable(a, b)
        if d == 0:
            t.trial(0.0, True)
            continue
        d0 = b.mass[0] - a.mass[0]
        d1 = b.mass[1] - a.mass[1]
        ok = True
        margin = None
        for eps in eps_list:
            ta, tb = scaling_transport(a, eps), scaling_transport(b, eps)
            if ta.mass.masses != transported_masses(a.mass, eps) or tb.mass.masses != transported_masses(b.mass, eps):
                structure_failures += 1
                ok = False
            ratio = ds_comparable(ta, tb) / d
            if ratio != (d0 + (1 + 3 * eps) * d1) / (d0 + d1):
                structure_failures += 1
                ok = False
            bound = (1 + eps) ** 2
            rec = per_eps[str(eps)]
            rec["max_ratio"] = max(rec["max_ratio"], float(ratio))
            if not 1 <= ratio <= bound:
                rec["violations"] += 1
                ok = False
            m = min(ratio - 1, bound - ratio)
            margin = m if margin is None else min(margin, m)
        t.trial(float(margin), ok, {"trial_seed": s, "a": A.to_json(), "b": B.to_json()})
    for e in eps_list:
        per_eps[str(e)]["structural_upper_bound"] = float(1 + 3 * e)
    t.details.update(per_eps=per_eps, structure_failures=structure_failures)
    return t.report()


def suite_stability(trials=D.STABILITY_LENGTH, seed=D.DEFAULT_SEED, N=D.GRID_N) -> Report:
    """Solver stability along the three standard grid families.

    ``trials`` is the family length.  Violations: gap increases at indices
    at or beyond the monotone start, and final gaps above the thresholds.
    """
    t = _Tally("stability", seed)
    cfg = grid.SolverConfig()
    fams = grid.stability_families(N, max(int(trials), 2))
    out = {}
    for name, (family, limit, start) in fams.items():
        r = grid.stability_experiment(family, limit, cfg, radius=D.STABILITY_RADIUS, start_index=start,
                                      suite=f"stability/{name}")
        idx = r.details["index"]
        l1, sup = r.details["l1_gap"], r.details["sup_gap_off_disks"]
        incr = sum(1 for k in range(len(idx) - 1)
                   if idx[k] >= D.STABILITY_MONOTONE_FROM and l1[k + 1] > l1[k] + 10 * cfg.tol)
        for k in range(len(idx)):
            t.trial(min(D.STABILITY_L1_FINAL - l1[k], D.STABILITY_SUP_FINAL - sup[k]), True)
        if incr:
            for _ in range(incr):
                t.fail({"family": name, "l1_gap": l1})
        if l1[-1] >= D.STABILITY_L1_FINAL or sup[-1] >= D.STABILITY_SUP_FINAL:
            t.fail({"family": name, "final_l1": l1[-1], "final_sup": sup[-1]})
        out[name] = r.details
    t.details.update(families=out, N=N, capacity_proxy=f"sup norm off disks of radius {D.STABILITY_RADIUS}")
    return t.report()


def random_grid_config(rng: random.Random, N: int, coarse: int | None = None):
    """Atomic data with at most 4 atoms and total at most 0.8 at distinct cells.

    Cells are drawn on the ``coarse`` grid and scaled up, so the same
    physical points are available at both resolutions.
    """
    coarse = coarse or N
    k = rng.randint(1, D.ORACLE_MAX_ATOMS)
    a = random_atomic(rng, k, max_total=Fraction(D.ORACLE_MAX_TOTAL).limit_denominator(100))
    cells = set()
    while len(cells) < k:
        cells.add((rng.randrange(coarse), rng.randrange(coarse)))
    return a, sorted(cells)


def suite_oracle_grid_vs_atomic(trials=50, seed=D.DEFAULT_SEED, N=D.GRID_N, coarse=D.GRID_N_COARSE,
                                refinement=True) -> Report:
    """Grid truncated mass of ``sum nu_i G_{x_i}`` against the closed form ``c - sum nu``."""
    t = _Tally("oracle-grid-vs-atomic", seed)
    tol = grid.mass_tol(N)
    errs_fine, errs_coarse = [], []
    for i in range(trials):
        s = trial_seed(seed, i)
        a, cells = random_grid_config(random.Random(s), N, coarse)
        exact = float(a.mass)
        fine = [((ci * N // coarse, cj * N // coarse), float(nu)) for (ci, cj), nu in zip(cells, a.lelong)]
        err = abs(grid.np_mass(grid.green_potential(N, fine)) - exact)
        errs_fine.append(err)
        if refinement:
            crs = [(cell, float(nu)) for cell, nu in zip(cells, a.lelong)]
            errs_coarse.append(abs(grid.np_mass(grid.green_potential(coarse, crs)) - exact))
        t.trial(tol - err, err <= tol, {"trial_seed": s, "atomic": a.to_json(), "cells": cells})
    t.details.update(N=N, tol=tol, worst_error=max(errs_fine, default=0.0))
    if refinement:
        wf, wc = max(errs_fine, default=0.0), max(errs_coarse, default=0.0)
        ratio = wc / wf if wf > 0 else float("inf") if wc > 0 else 1.0
        t.details.update(coarse_N=coarse, worst_error_coarse=wc, refinement_ratio=ratio)
        if wc > D.REFINEMENT_FACTOR * wf:
            t.fail({"refinement": {"worst_fine": wf, "worst_coarse": wc, "ratio": ratio}})
    return t.report()


def _s_delta_family(Q0: RationalPolygon, P: RationalPolygon, steps: int):
    ts = [Fraction(1, 2**m) for m in range(steps + 1)]
    return ts, [make_handle(ToricClass(P, convex_combination(Q0, P, tt))) for tt in ts]


def suite_sdelta_completeness(trials=100, seed=D.DEFAULT_SEED) -> Report:
    """Decreasing toric families inside S_delta have converging mass vectors.

    ``Q_t = (1 - t) Q_0 + t P`` decreases to ``Q_0`` as ``t = 2^-m -> 0``.
    The mass entries are checked against their exact polynomials in ``t``.
    The contrast family ``[0,1] x [0,t]`` is Cauchy for the estimator but
    leaves every S_delta; it is the finite-model shadow of incompleteness
    outside S_delta, not a realisation of it.
    """
    t = _Tally("sdelta-completeness", seed)
    M = D.SDELTA_STEPS
    for i in range(trials):
        s = trial_seed(seed, i)
        rng = random.Random(s)
        P = random_ambient(rng)
        Q0 = random_body(rng, P)
        while Q0.area() == 0:
            Q0 = random_body(rng, P)
        base = make_handle(ToricClass(P, Q0))
        delta = base.mass[0]
        ts, fam = _s_delta_family(Q0, P, M)
        A0, V0, AP = Q0.area(), mixed_area(Q0, P), P.area()
        ok = all(in_s_delta(h, delta) for h in fam)
        ok &= all(witness(fam[k + 1], fam[k]).relation is Relation.LEQ for k in range(M))
        for tt, h in zip(ts, fam):
            ok &= h.mass[0] == 2 * ((1 - tt) ** 2 * A0 + 2 * tt * (1 - tt) * V0 + tt**2 * AP)
            ok &= h.mass[1] == 2 * ((1 - tt) * V0 + tt * AP)
        gaps = [[abs(h.mass[j] - base.mass[j]) for h in fam] for j in range(3)]
        ok &= all(g1 <= g0 for g in gaps for g0, g1 in zip(g, g[1:]))
        bound = ts[-1] * 2 * (2 * A0 + 2 * V0 + AP)
        slack = min(bound - g[-1] for g in gaps)
        ds = [ds_comparable(h, base) for h in fam]
        ok &= all(d1 <= d0 for d0, d1 in zip(ds, ds[1:])) and slack >= 0
        t.trial(float(slack), ok, {"trial_seed": s, "ambient": P.to_json(), "body": Q0.to_json()})
    contrast, good = _contrast_family(D.CONTRAST_STEPS)
    t.details["contrast"] = contrast
    if not good:
        t.fail({"contrast": contrast})
    return t.report()


def _contrast_family(steps: int):
    ts = [Fraction(1, 2**m) for m in range(steps + 1)] + [Fraction(0)]
    fam = [make_handle(c) for c in shrinking_family(ts)]
    good = all(h.mass.masses == (2 * tt, 1 + tt, 2) for tt, h in zip(ts, fam))
    good &= all(ds_comparable(fam[k], fam[m]) == abs(ts[k] - ts[m])
                for k in range(len(ts)) for m in range(k + 1, len(ts)))
    exits = {}
    for delta in (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000)):
        first = next((k for k, h in enumerate(fam) if not in_s_delta(h, delta)), None)
        exits[str(delta)] = first
        good &= first is not None
    tail = sum(ds_comparable(a, b) for a, b in zip(fam, fam[1:]))
    good &= tail == 1 and not in_s_delta(fam[-1], Fraction(1, 10**9))
    info = {
        "label": "finite-model shadow: estimator-Cauchy family leaving every S_delta",
        "t_values": [str(x) for x in ts],
        "first_index_outside": exits,
        "total_ds_along_family": str(tail),
        "limit_mass": str(fam[-1].mass[0]),
    }
    return info, good


SUITES = {
    "diamond-toric": suite_diamond_toric,
    "diamond-dim1": suite_diamond_dim1,
    "telescoping": suite_telescoping,
    "monotone-limit": suite_monotone_limit,
    "cauchy-decreasing": suite_cauchy_decreasing,
    "sandwich": suite_sandwich,
    "semicontinuity": suite_semicontinuity,
    "scaling": suite_scaling,
    "stability": suite_stability,
    "oracle-grid-vs-atomic": suite_oracle_grid_vs_atomic,
    "sdelta-completeness": suite_sdelta_completeness,
}


def run_suite(name: str, trials: int | None = None, seed: int = D.DEFAULT_SEED, **kw) -> Report:
    try:
        fn = SUITES[name]
    except KeyError:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    if trials is None:
        return fn(seed=seed, **kw)
    return fn(trials, seed, **kw)


# ---------------------------------------------------------------------------
# instance generation

PROFILES = {
    "random-body": "toric",
    "nested-chain": "toric",
    "shrinking-family": "toric",
    "atomic-random": "atomic",
    "atomic-cauchy": "atomic",
    "grid-atomic": "grid",
}

_ALIASES = {"dim1": "atomic"}


def generate(engine: str, profile: str, seed: int = D.DEFAULT_SEED, N: int = 64):
    """Reproducible instance: a handle, or a tuple of handles for chains and families."""
    engine = _ALIASES.get(engine, engine)
    if profile not in PROFILES:
        raise UnknownProfile(f"unknown profile {profile!r}")
    if PROFILES[profile] != engine:
        raise UnknownProfile(f"profile {profile!r} belongs to engine {PROFILES[profile]!r}")
    rng = trial_rng(seed, 0)
    if profile == "random-body":
        P = random_ambient(rng)
        return make_handle(ToricClass(P, random_body(rng, P)))
    if profile == "nested-chain":
        return tuple(make_handle(c) for c in nested_chain(rng, random_ambient(rng), 3))
    if profile == "shrinking-family":
        return tuple(make_handle(c) for c in shrinking_family([Fraction(1, 2**m) for m in range(8)]))
    if profile == "atomic-random":
        return make_handle(random_atomic(rng, rng.randint(1, 4)))
    if profile == "atomic-cauchy":
        seq, _ = cauchy_sequence(rng, 10, Fraction(1, 2), npoints=rng.randint(1, 4))
        return tuple(make_handle(a) for a in seq)
    a, cells = random_grid_config(rng, N)
    return make_handle(grid.green_potential(N, [(c, float(v)) for c, v in zip(cells, a.lelong)]))

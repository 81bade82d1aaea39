"""Closed-form atomic model in complex dimension one.

A singularity type is a vector of Lelong numbers at finitely many marked
points plus the total budget ``V`` of the class.  Its mass vector is
``(V - sum(nu), V)``.  Max of potentials takes the componentwise minimum of
Lelong numbers, the rooftop envelope the maximum (when the budget allows).

Marked points are opaque identifiers; only the grid engine gives them
positions.  The multiplier-ideal stalk at a point is the principal ideal
``(z^e)`` and is encoded by its exponent ``e`` alone.  Only finite log-type
singularity data is modeled.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .core import (
    ComparabilityWitness,
    MassProvider,
    MassVector,
    ModelSoundnessError,
    Relation,
    SingularityError,
    parse_number,
    register_engine,
    render_number,
)


class BudgetMismatch(SingularityError):
    pass


class MeetNonexistent(SingularityError):
    pass


class BudgetExceeded(ModelSoundnessError):
    def __init__(self, index, msg=""):
        super().__init__(msg or f"tail envelope leaves the model at index {index}")
        self.index = index


def _num(x):
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


def _slack(budget, tol):
    return budget + tol if tol else budget


@dataclass(frozen=True)
class AtomicSingularity:
    budget: Fraction | float
    points: tuple
    lelong: tuple
    tolerance: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "budget", _num(self.budget))
        object.__setattr__(self, "points", tuple(str(p) for p in self.points))
        object.__setattr__(self, "lelong", tuple(_num(v) for v in self.lelong))
        if len(self.points) != len(self.lelong):
            raise ValueError("one Lelong number per marked point")
        if len(set(self.points)) != len(self.points):
            raise ValueError("marked points must be distinct")
        if not self.budget > 0:
            raise ValueError("budget must be positive")
        if any(v < 0 for v in self.lelong):
            raise ValueError("Lelong numbers are nonnegative")
        if sum(self.lelong) > _slack(self.budget, self.tolerance):
            raise ValueError("total Lelong number exceeds the budget")

    @property
    def exact(self) -> bool:
        return isinstance(self.budget, Fraction) and all(isinstance(v, Fraction) for v in self.lelong)

    @property
    def mass(self):
        return self.budget - sum(self.lelong)

    def with_lelong(self, lelong) -> "AtomicSingularity":
        return AtomicSingularity(self.budget, self.points, tuple(lelong), self.tolerance)

    def to_json(self) -> dict:
        return {
            "budget": render_number(self.budget),
            "points": list(self.points),
            "lelong": [render_number(v) for v in self.lelong],
        }

    @classmethod
    def from_json(cls, d: dict) -> "AtomicSingularity":
        return cls(
            parse_number(d["budget"]),
            tuple(d["points"]),
            tuple(parse_number(v) for v in d["lelong"]),
            float(d.get("tolerance", 0.0)),
        )


def atomic(budget, lelong, points=None) -> AtomicSingularity:
    """Shorthand: points default to ``x1, x2, ...``."""
    if points is None:
        points = [f"x{i + 1}" for i in range(len(lelong))]
    return AtomicSingularity(budget, tuple(points), tuple(lelong))


def _check(a: AtomicSingularity, b: AtomicSingularity) -> None:
    if a.budget != b.budget:
        raise BudgetMismatch(f"budgets differ: {a.budget} vs {b.budget}")
    if a.points != b.points:
        raise BudgetMismatch("marked point lists differ")


def mass_vector_atomic(a: AtomicSingularity) -> MassVector:
    return MassVector(1, (a.mass, a.budget), a.budget, a.tolerance)


def join_atomic(a: AtomicSingularity, b: AtomicSingularity) -> AtomicSingularity:
    _check(a, b)
    return a.with_lelong(min(x, y) for x, y in zip(a.lelong, b.lelong))


def meet_atomic(a: AtomicSingularity, b: AtomicSingularity) -> AtomicSingularity | None:
    """Rooftop envelope: componentwise max, or ``None`` if it exceeds the budget.

    If some common upper bound ``w`` has ``m_a + m_b > m_w`` the envelope
    must exist; failing that is raised as a model-soundness error.
    """
    _check(a, b)
    nu = tuple(max(x, y) for x, y in zip(a.lelong, b.lelong))
    if sum(nu) > _slack(a.budget, a.tolerance):
        w = join_atomic(a, b)
        if a.mass + b.mass > w.mass:
            raise ModelSoundnessError("envelope must exist but exceeds the budget")
        return None
    return a.with_lelong(nu)


def ds_atomic(a: AtomicSingularity, b: AtomicSingularity):
    """``(1/2) * ||nu_a - nu_b||_1``: the estimator value, exact when comparable."""
    _check(a, b)
    s = sum(abs(x - y) for x, y in zip(a.lelong, b.lelong))
    if isinstance(s, Fraction):
        return s / 2
    return s / 2.0


def leq(a: AtomicSingularity, b: AtomicSingularity) -> bool:
    """``[a] <= [b]``: ``a`` is at least as singular at every point."""
    _check(a, b)
    return all(x >= y for x, y in zip(a.lelong, b.lelong))


class DiamondAtomic(NamedTuple):
    lhs: Fraction | float
    rhs: Fraction | float
    equal: bool


def diamond_atomic(a: AtomicSingularity, b: AtomicSingularity, tol: float = 1e-12) -> DiamondAtomic:
    meet = meet_atomic(a, b)
    if meet is None:
        raise MeetNonexistent("rooftop envelope leaves the model")
    lhs = a.mass + b.mass
    rhs = join_atomic(a, b).mass + meet.mass
    if a.exact and b.exact:
        return DiamondAtomic(lhs, rhs, lhs == rhs)
    return DiamondAtomic(lhs, rhs, abs(lhs - rhs) <= tol)


def multiplier_exponent(nu) -> int:
    """Least ``k >= 0`` with ``|z|^(2k - 2 nu)`` locally integrable, i.e. ``k > nu - 1``."""
    return math.floor(nu)


def multiplier_exponents(a: AtomicSingularity) -> tuple:
    return tuple(multiplier_exponent(v) for v in a.lelong)


def semicontinuity_check(seq: Sequence[AtomicSingularity], limit: AtomicSingularity) -> int:
    """First index ``j0`` with ``J[limit] ⊆ J[seq[j]]`` for every ``j >= j0``.

    Stalk inclusion is ``e_i(seq[j]) <= e_i(limit)`` at each point.  If the
    tail never settles within the given sequence the model contradicts the
    semicontinuity theorem and :class:`ModelSoundnessError` is raised.
    """
    e_lim = multiplier_exponents(limit)
    j0 = len(seq)
    for j in range(len(seq) - 1, -1, -1):
        _check(seq[j], limit)
        if all(e <= f for e, f in zip(multiplier_exponents(seq[j]), e_lim)):
            j0 = j
        else:
            break
    if j0 == len(seq):
        raise ModelSoundnessError("no index with J[limit] ⊆ J[u_j] along the tail")
    return j0


def tail_sup(seq: Sequence[AtomicSingularity], j: int) -> AtomicSingularity:
    """``usc sup_{k >= j} u_k``: componentwise min of Lelong numbers over the tail."""
    tail = seq[j:]
    return tail[0].with_lelong(min(col) for col in zip(*(s.lelong for s in tail)))


def tail_envelope(seq: Sequence[AtomicSingularity], j: int) -> AtomicSingularity | None:
    """``P(u_j, u_{j+1}, ...)``: componentwise max over the tail, if within budget."""
    tail = seq[j:]
    nu = tuple(max(col) for col in zip(*(s.lelong for s in tail)))
    if sum(nu) > _slack(tail[0].budget, tail[0].tolerance):
        return None
    return tail[0].with_lelong(nu)


def sandwich_sequences(seq: Sequence[AtomicSingularity], start: int | None = None):
    """Decreasing upper and increasing lower sandwich of a sequence.

    ``upper[j]`` is the tail supremum and ``lower[j]`` the tail envelope
    (``None`` where it does not exist).  If ``start`` is given, every
    ``lower[j]`` with ``j >= start`` must exist, otherwise
    :class:`BudgetExceeded` is raised with the offending index.
    """
    for s in seq[1:]:
        _check(seq[0], s)
    upper = [tail_sup(seq, j) for j in range(len(seq))]
    lower = [tail_envelope(seq, j) for j in range(len(seq))]
    if start is not None:
        for j in range(start, len(seq)):
            if lower[j] is None:
                raise BudgetExceeded(j)
    return upper, lower


def compare_atomic(a: AtomicSingularity, b: AtomicSingularity) -> ComparabilityWitness:
    if leq(a, b):
        return ComparabilityWitness(Relation.LEQ, "atomic: componentwise Lelong comparison")
    if leq(b, a):
        return ComparabilityWitness(Relation.GEQ, "atomic: componentwise Lelong comparison")
    return ComparabilityWitness(Relation.INCOMPARABLE, "atomic: Lelong vectors not ordered")


def transport_atomic(a: AtomicSingularity, eps) -> AtomicSingularity:
    """Adding a smooth potential leaves atoms unchanged; the budget scales."""
    factor = 1 + (Fraction(eps) if isinstance(a.budget, Fraction) and not isinstance(eps, float) else eps)
    return AtomicSingularity(a.budget * factor, a.points, a.lelong, a.tolerance)


def _compatible(a: AtomicSingularity, b: AtomicSingularity):
    if a.points != b.points:
        return "marked point lists differ"
    return None


register_engine(
    MassProvider(
        tag="atomic",
        payload_type=AtomicSingularity,
        mass=mass_vector_atomic,
        compatible=_compatible,
        compare=compare_atomic,
        join=join_atomic,
        transport=transport_atomic,
        to_json=AtomicSingularity.to_json,
    )
)


# ---------------------------------------------------------------------------
# generators


def random_atomic(rng: random.Random, npoints: int = 3, budget=Fraction(1), denom: int = 64,
                  max_total=None) -> AtomicSingularity:
    """Random exact Lelong vector with total at most ``max_total`` (default the budget)."""
    budget = Fraction(budget)
    cap = budget if max_total is None else Fraction(max_total)
    units = int(cap * denom)
    # uniform composition of at most `units` into npoints parts
    cuts = sorted(rng.randint(0, units) for _ in range(npoints))
    parts = [cuts[0]] + [cuts[i] - cuts[i - 1] for i in range(1, npoints)]
    rng.shuffle(parts)
    return atomic(budget, [Fraction(p, denom) for p in parts])


def cauchy_sequence(rng: random.Random, length: int, ratio, npoints: int = 2, budget=Fraction(1),
                    delta=Fraction(1, 10), amplitude=Fraction(1, 4)):
    """Sequence with ``ds(a_j, a_{j+1}) <= ratio^j`` and masses ``>= delta``.

    Returns ``(seq, limit)``.  ``a_j = limit + sign * amplitude * ratio^j``
    componentwise (clipped at 0), with random signs per index and point.
    """
    ratio = Fraction(ratio)
    budget = Fraction(budget)
    room = budget - Fraction(delta) - amplitude
    limit = random_atomic(rng, npoints, budget, max_total=room)
    seq = []
    for j in range(length):
        step = amplitude * ratio**j / npoints
        nu = [max(Fraction(0), v + rng.choice((-1, 1)) * step) for v in limit.lelong]
        seq.append(limit.with_lelong(nu))
    return seq, limit

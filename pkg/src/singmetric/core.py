"""Engine-independent mass vectors, distances and energy of singularity types.

Every engine (toric, atomic, grid) describes a singularity type through its
*mass profile*: the ``n + 1`` mixed masses

    m[j] = integral of theta_V^j ^ theta_u^(n - j),   j = 0, ..., n,

where ``j`` counts the factors of the least-singular potential ``V``.  So
``m[0]`` is the non-pluripolar mass of ``u`` itself and ``m[n]`` is the total
budget of the class.  All formulas in this module use that orientation.

Engines plug in through :func:`register_engine`, supplying a
:class:`MassProvider`.  Handles are built with :func:`make_handle`, which
computes the mass vector eagerly so that handles are immutable values.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence


class SingularityError(Exception):
    """Base class for errors raised by the engines."""


class IncomparableError(SingularityError):
    pass


class EngineMismatch(SingularityError):
    pass


class UnsupportedEngine(SingularityError):
    pass


class ModelSoundnessError(SingularityError):
    """A finite model contradicted a statement that holds in general.

    Raised instead of returning a value; suites treat it as an abort.
    """


# ---------------------------------------------------------------------------
# rationals


def render_rational(x) -> str:
    """Render an exact rational as ``"p/q"`` (integers as ``"p"``)."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    raise TypeError(f"not an exact rational: {x!r}")


def parse_number(s) -> Fraction | float:
    """Parse ``"p/q"``, integer strings, or plain JSON numbers.

    Strings and ints give :class:`Fraction`; floats stay floats.
    """
    if isinstance(s, bool):
        raise ValueError("boolean is not a number")
    if isinstance(s, (Fraction, int)):
        return Fraction(s)
    if isinstance(s, float):
        return s
    if isinstance(s, str):
        return Fraction(s.strip())
    raise ValueError(f"cannot parse number from {s!r}")


def render_number(x):
    """JSON form of a scalar: exact ``"p/q"`` string or a float."""
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return render_rational(x)
    return float(x)


def human_number(x) -> str:
    """Exact rational if available, else 12 significant digits."""
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return render_rational(x)
    return f"{float(x):.12g}"


# ---------------------------------------------------------------------------
# mass vectors


@dataclass(frozen=True)
class MassVector:
    """Mixed masses ``m[0..n]`` of one singularity type.

    ``tolerance`` is 0 for the exact engines and the solver tolerance for
    the grid engine; the invariants are checked up to it.
    """

    n: int
    masses: tuple
    budget: Any
    tolerance: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(self.masses))
        if self.n < 1:
            raise ValueError("dimension must be positive")
        if len(self.masses) != self.n + 1:
            raise ValueError(f"expected {self.n + 1} masses, got {len(self.masses)}")
        if not self.budget > 0:
            raise ValueError("total budget must be positive")
        # a zero tolerance must not turn exact budgets into floats
        tol = self.tolerance or 0
        if abs(self.masses[self.n] - self.budget) > tol:
            raise ValueError("m[n] must equal the total budget")
        for j, m in enumerate(self.masses):
            if m < -tol or m > (self.budget + tol if tol else self.budget):
                raise ValueError(f"m[{j}] = {m} outside [0, budget]")

    def __getitem__(self, j):
        return self.masses[j]

    def __len__(self):
        return len(self.masses)

    @property
    def exact(self) -> bool:
        return self.tolerance == 0 and all(isinstance(m, (Fraction, int)) for m in self.masses)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "masses": [render_number(m) for m in self.masses],
            "budget": render_number(self.budget),
            "tolerance": self.tolerance,
        }

    @classmethod
    def from_json(cls, d: dict) -> "MassVector":
        return cls(
            n=int(d["n"]),
            masses=tuple(parse_number(m) for m in d["masses"]),
            budget=parse_number(d["budget"]),
            tolerance=float(d.get("tolerance", 0.0)),
        )


class Relation(enum.Enum):
    LEQ = "LEQ"
    GEQ = "GEQ"
    INCOMPARABLE = "INCOMPARABLE"


@dataclass(frozen=True)
class ComparabilityWitness:
    relation: Relation
    certified_by: str


@dataclass(frozen=True)
class MassProvider:
    """What an engine must supply to plug into the distance formulas.

    ``compatible(p, q)`` returns ``None`` if two payloads live in the same
    model (same class/budget/point set), else a reason string.
    ``compare(p, q)`` returns a :class:`ComparabilityWitness` for ``[p]`` vs
    ``[q]``; ``join(p, q)`` the payload of ``[max(p, q)]``.
    ``transport(p, eps)`` realises ``u -> u + eps V`` in ``(1+eps) theta``;
    ``None`` means unsupported.
    """

    tag: str
    payload_type: type
    mass: Callable[[Any], MassVector]
    compatible: Callable[[Any, Any], str | None]
    compare: Callable[[Any, Any], ComparabilityWitness]
    join: Callable[[Any, Any], Any]
    transport: Callable[[Any, Any], Any] | None = None
    to_json: Callable[[Any], dict] | None = None


_ENGINES: dict[str, MassProvider] = {}


def register_engine(provider: MassProvider) -> None:
    _ENGINES[provider.tag] = provider


def engine(tag: str) -> MassProvider:
    try:
        return _ENGINES[tag]
    except KeyError:
        raise UnsupportedEngine(f"unknown engine {tag!r}") from None


def engine_for(payload) -> MassProvider:
    for p in _ENGINES.values():
        if isinstance(payload, p.payload_type):
            return p
    raise UnsupportedEngine(f"no engine handles {type(payload).__name__}")


@dataclass(frozen=True)
class SingularityHandle:
    """An element ``[u]`` of the space of singularity types in one engine."""

    engine: str
    payload: Any = field(compare=False)
    mass: MassVector

    @property
    def n(self) -> int:
        return self.mass.n

    def to_json(self) -> dict:
        prov = engine(self.engine)
        d = {"engine": self.engine, "mass": self.mass.to_json()}
        if prov.to_json is not None:
            d["payload"] = prov.to_json(self.payload)
        return d


def make_handle(payload) -> SingularityHandle:
    prov = engine_for(payload)
    return SingularityHandle(prov.tag, payload, prov.mass(payload))


def _check_same_model(a: SingularityHandle, b: SingularityHandle) -> MassProvider:
    if a.engine != b.engine:
        raise EngineMismatch(f"engines differ: {a.engine} vs {b.engine}")
    if a.n != b.n:
        raise EngineMismatch("dimensions differ")
    tol = max(a.mass.tolerance, b.mass.tolerance)
    if abs(a.mass.budget - b.mass.budget) > tol:
        raise EngineMismatch("total budgets differ")
    prov = engine(a.engine)
    reason = prov.compatible(a.payload, b.payload)
    if reason is not None:
        raise EngineMismatch(reason)
    return prov


def witness(a: SingularityHandle, b: SingularityHandle) -> ComparabilityWitness:
    prov = _check_same_model(a, b)
    return prov.compare(a.payload, b.payload)


def join(a: SingularityHandle, b: SingularityHandle) -> SingularityHandle:
    """The handle of ``[max(a, b)]``."""
    prov = _check_same_model(a, b)
    return make_handle(prov.join(a.payload, b.payload))


def _mass_gap(a: MassVector, b: MassVector):
    return sum(abs(y - x) for x, y in zip(a.masses, b.masses))


def ds_comparable(a: SingularityHandle, b: SingularityHandle):
    """Exact distance of two comparable types.

    ``(1/(n+1)) * sum_j |m_b[j] - m_a[j]|``; raises :class:`IncomparableError`
    unless the engine certifies ``[a] <= [b]`` or ``[b] <= [a]``.
    """
    w = witness(a, b)
    if w.relation is Relation.INCOMPARABLE:
        raise IncomparableError("neither order is certified")
    n = a.n
    gap = _mass_gap(a.mass, b.mass)
    if a.mass.exact and b.mass.exact:
        return Fraction(gap) / (n + 1)
    return float(gap) / (n + 1)


def ds_estimate(a: SingularityHandle, b: SingularityHandle):
    """Decomposition estimator ``d(a, a v b) + d(a v b, b)``.

    Equal to :func:`ds_comparable` when ``a`` and ``b`` are comparable and
    within a dimensional constant of the true pseudometric otherwise.
    """
    j = join(a, b)
    return ds_comparable(a, j) + ds_comparable(j, b)


def energy_Is(a: SingularityHandle):
    """Monge-Ampere energy of the type: ``-m[n] + mean(m)``; always ``<= 0``."""
    m = a.mass.masses
    n = a.n
    total = sum(m)
    if a.mass.exact:
        return -m[n] + Fraction(total) / (n + 1)
    return float(-m[n] + total / (n + 1))


def in_s_delta(a: SingularityHandle, delta) -> bool:
    return a.mass[0] >= delta


def scaling_transport(a: SingularityHandle, eps) -> SingularityHandle:
    """Transport ``u -> u + eps V`` into the class ``(1 + eps) theta``."""
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    prov = engine(a.engine)
    if prov.transport is None:
        raise UnsupportedEngine(f"engine {a.engine!r} has no class transport")
    if eps == 0:
        return a
    return make_handle(prov.transport(a.payload, eps))


def transported_masses(m: MassVector, eps) -> tuple:
    """Mass vector of ``u + eps V`` in ``(1 + eps) theta`` from that of ``u``.

    ``m'[j] = sum_i C(n-j, i) eps^i (1+eps)^j m[j+i]``, the binomial expansion
    of ``(theta_u + eps theta_V)^(n-j) ^ ((1+eps) theta_V)^j``.
    """
    from math import comb

    n = m.n
    out = []
    for j in range(n + 1):
        s = 0
        for i in range(n - j + 1):
            s += comb(n - j, i) * eps**i * m[j + i]
        out.append((1 + eps) ** j * s)
    return tuple(out)


def quasi_triangle_ratio(a, b, c):
    """``est(a, c) / (est(a, b) + est(b, c))``; 0 when both sides vanish."""
    num = ds_estimate(a, c)
    den = ds_estimate(a, b) + ds_estimate(b, c)
    if den == 0:
        return 0 if num == 0 else float("inf")
    return num / den


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def check_chain(handles: Sequence[SingularityHandle]) -> bool:
    """True iff consecutive handles are certified ``<=``."""
    return all(witness(x, y).relation is Relation.LEQ for x, y in zip(handles, handles[1:]))


__all__ = [
    "ComparabilityWitness",
    "EngineMismatch",
    "IncomparableError",
    "MassProvider",
    "MassVector",
    "ModelSoundnessError",
    "Relation",
    "SingularityError",
    "SingularityHandle",
    "UnsupportedEngine",
    "check_chain",
    "ds_comparable",
    "ds_estimate",
    "energy_Is",
    "human_number",
    "in_s_delta",
    "join",
    "make_handle",
    "parse_number",
    "quasi_triangle_ratio",
    "register_engine",
    "render_number",
    "render_rational",
    "scaling_transport",
    "transported_masses",
    "witness",
]

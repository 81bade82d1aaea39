"""Exact rational convex geometry in the plane: the toric model.

Modeling dictionary (standard toric pluripotential theory, imported as an
assumption of this engine):

* a singularity type in the class of the moment polygon ``P`` is a convex
  body ``Q`` inside ``P``; ``Q = P`` is the least-singular type;
* ``[max(u, v)]`` is the convex hull of ``Q_u ∪ Q_v``;
* the rooftop envelope ``P(u, v)`` is the intersection ``Q_u ∩ Q_v``
  (empty means the envelope is not a potential);
* mixed masses are normalised mixed areas,
  ``m[j] = 2! * V(Q, ..., Q, P, ..., P)`` with ``j`` copies of ``P``.

Consequences checked by the suites (diamond inequality, monotonicity,
telescoping) hold in general, so they must hold in the model; the
dictionary itself is not derived here.

Everything is exact: coordinates are :class:`fractions.Fraction` and no
floating point enters this module.  Dimension is fixed at ``n = 2``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .core import (
    ComparabilityWitness,
    MassProvider,
    MassVector,
    ModelSoundnessError,
    Relation,
    SingularityError,
    parse_number,
    register_engine,
    render_rational,
)

Point = tuple  # (Fraction, Fraction)


class AmbientMismatch(SingularityError):
    pass


class EnvelopeNonexistent(ModelSoundnessError):
    pass


def _pt(p) -> Point:
    x, y = p
    return (Fraction(x), Fraction(y))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Iterable) -> tuple:
    """Andrew's monotone chain; CCW, no collinear vertices, lexicographic-min first.

    Degenerate inputs come back as 2 vertices (segment) or 1 (point).
    """
    pts = sorted(set(_pt(p) for p in points))
    if len(pts) <= 2:
        return tuple(pts)
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        hull = hull[:1]
    return tuple(hull)


@dataclass(frozen=True)
class RationalPolygon:
    """Convex polygon with exact rational vertices, stored canonically.

    Any iterable of points is accepted; the stored vertex tuple is its
    convex hull in canonical order, so equality of bodies is equality of
    instances.  Segments and points are allowed.
    """

    vertices: tuple

    def __post_init__(self):
        hull = convex_hull(self.vertices)
        if not hull:
            raise ValueError("empty polygon")
        object.__setattr__(self, "vertices", hull)

    def __len__(self):
        return len(self.vertices)

    @property
    def dim(self) -> int:
        return min(len(self.vertices) - 1, 2)

    def area(self) -> Fraction:
        v = self.vertices
        if len(v) < 3:
            return Fraction(0)
        s = Fraction(0)
        for i in range(len(v)):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % len(v)]
            s += x0 * y1 - x1 * y0
        return s / 2

    def edges(self) -> list:
        v = self.vertices
        if len(v) == 1:
            return []
        if len(v) == 2:
            return [(v[0], v[1])]
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def contains_point(self, p) -> bool:
        p = _pt(p)
        v = self.vertices
        if len(v) == 1:
            return p == v[0]
        if len(v) == 2:
            a, b = v
            if _cross(a, b, p) != 0:
                return False
            return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(
                a[1], b[1]
            )
        return all(_cross(v[i], v[(i + 1) % len(v)], p) >= 0 for i in range(len(v)))

    def contains(self, other: "RationalPolygon") -> bool:
        return all(self.contains_point(p) for p in other.vertices)

    def translate(self, d) -> "RationalPolygon":
        dx, dy = _pt(d)
        return RationalPolygon(tuple((x + dx, y + dy) for x, y in self.vertices))

    def scale(self, s) -> "RationalPolygon":
        s = Fraction(s)
        return RationalPolygon(tuple((s * x, s * y) for x, y in self.vertices))

    def to_json(self) -> list:
        return [[render_rational(x), render_rational(y)] for x, y in self.vertices]

    @classmethod
    def from_json(cls, data) -> "RationalPolygon":
        pts = []
        for p in data:
            x, y = (parse_number(c) for c in p)
            pts.append((Fraction(x), Fraction(y)))
        return cls(tuple(pts))

    @classmethod
    def box(cls, x0, y0, x1, y1) -> "RationalPolygon":
        x0, y0, x1, y1 = map(Fraction, (x0, y0, x1, y1))
        return cls(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


# ---------------------------------------------------------------------------
# Minkowski sum and mixed area


def _half(d) -> int:
    # 0 for angles in [0, pi), 1 for [pi, 2pi)
    x, y = d
    return 0 if (y > 0 or (y == 0 and x > 0)) else 1


def _angle_less(d1, d2) -> bool:
    h1, h2 = _half(d1), _half(d2)
    if h1 != h2:
        return h1 < h2
    return d1[0] * d2[1] - d1[1] * d2[0] > 0


def _edge_vectors_from_bottom(poly: RationalPolygon):
    v = list(poly.vertices)
    k = min(range(len(v)), key=lambda i: (v[i][1], v[i][0]))
    v = v[k:] + v[:k]
    if len(v) == 1:
        return v[0], []
    if len(v) == 2:
        a, b = v
        return a, [(b[0] - a[0], b[1] - a[1]), (a[0] - b[0], a[1] - b[1])]
    vecs = [(v[(i + 1) % len(v)][0] - v[i][0], v[(i + 1) % len(v)][1] - v[i][1]) for i in range(len(v))]
    return v[0], vecs


def minkowski_sum(A: RationalPolygon, B: RationalPolygon) -> RationalPolygon:
    """``A ⊕ B`` by merging the two edge sequences by polar angle (linear time).

    Parallel edges end up adjacent and are concatenated when the result is
    canonicalised.
    """
    a0, ea = _edge_vectors_from_bottom(A)
    b0, eb = _edge_vectors_from_bottom(B)
    cur = (a0[0] + b0[0], a0[1] + b0[1])
    verts = [cur]
    i = j = 0
    while i < len(ea) or j < len(eb):
        if j >= len(eb) or (i < len(ea) and not _angle_less(eb[j], ea[i])):
            d = ea[i]
            i += 1
        else:
            d = eb[j]
            j += 1
        cur = (cur[0] + d[0], cur[1] + d[1])
        verts.append(cur)
    return RationalPolygon(tuple(verts))


def mixed_area(A: RationalPolygon, B: RationalPolygon) -> Fraction:
    """Mixed area ``V(A, B) = (area(A ⊕ B) - area(A) - area(B)) / 2``."""
    return (minkowski_sum(A, B).area() - A.area() - B.area()) / 2


# ---------------------------------------------------------------------------
# intersection and hull of union


def _segment_intersections(p1, p2, q1, q2) -> list:
    d1 = (p2[0] - p1[0], p2[1] - p1[1])
    d2 = (q2[0] - q1[0], q2[1] - q1[1])
    den = d1[0] * d2[1] - d1[1] * d2[0]
    if den == 0:
        # parallel: overlaps are picked up by endpoint containment
        return []
    wx, wy = q1[0] - p1[0], q1[1] - p1[1]
    t = (wx * d2[1] - wy * d2[0]) / den
    s = (wx * d1[1] - wy * d1[0]) / den
    if 0 <= t <= 1 and 0 <= s <= 1:
        return [(p1[0] + t * d1[0], p1[1] + t * d1[1])]
    return []


def polygon_intersection(A: RationalPolygon, B: RationalPolygon) -> RationalPolygon | None:
    """Exact ``A ∩ B`` of two convex (possibly degenerate) polygons, or ``None``.

    The intersection is the hull of the vertices of each body lying in the
    other together with all pairwise edge crossings.
    """
    cand = [p for p in A.vertices if B.contains_point(p)]
    cand += [p for p in B.vertices if A.contains_point(p)]
    for e in A.edges():
        for f in B.edges():
            cand += _segment_intersections(e[0], e[1], f[0], f[1])
    if not cand:
        return None
    return RationalPolygon(tuple(cand))


def hull_of_union(A: RationalPolygon, B: RationalPolygon) -> RationalPolygon:
    return RationalPolygon(A.vertices + B.vertices)


# ---------------------------------------------------------------------------
# toric classes


@dataclass(frozen=True)
class ToricClass:
    """A body ``Q ⊆ P`` in the class of the moment polygon ``P``."""

    ambient: RationalPolygon
    body: RationalPolygon

    def __post_init__(self):
        if self.ambient.area() <= 0:
            raise ValueError("ambient polygon must have positive area")
        if not self.ambient.contains(self.body):
            raise ValueError("body is not contained in the ambient polygon")

    @classmethod
    def minimal(cls, ambient: RationalPolygon) -> "ToricClass":
        return cls(ambient, ambient)

    def to_json(self) -> dict:
        return {"ambient": self.ambient.to_json(), "body": self.body.to_json()}

    @classmethod
    def from_json(cls, d: dict) -> "ToricClass":
        return cls(RationalPolygon.from_json(d["ambient"]), RationalPolygon.from_json(d["body"]))


def _same_ambient(A: ToricClass, B: ToricClass) -> None:
    if A.ambient != B.ambient:
        raise AmbientMismatch("toric classes live in different ambient polygons")


def intersect(A: ToricClass, B: ToricClass) -> ToricClass | None:
    """Rooftop envelope in the model; ``None`` when the bodies are disjoint."""
    _same_ambient(A, B)
    cap = polygon_intersection(A.body, B.body)
    if cap is None:
        return None
    return ToricClass(A.ambient, cap)


def hull_union(A: ToricClass, B: ToricClass) -> ToricClass:
    _same_ambient(A, B)
    return ToricClass(A.ambient, hull_of_union(A.body, B.body))


def mass_vector_toric(T: ToricClass) -> MassVector:
    P, Q = T.ambient, T.body
    budget = 2 * P.area()
    return MassVector(2, (2 * Q.area(), 2 * mixed_area(Q, P), budget), budget)


class DiamondResult(NamedTuple):
    lhs: Fraction
    rhs: Fraction
    holds: bool
    strict: bool


def diamond_check(A: ToricClass, B: ToricClass) -> DiamondResult:
    """``m_A[0] + m_B[0]`` against ``m_hull[0] + m_cap[0]``, exactly.

    An empty intersection contributes mass 0 unless some certified common
    upper bound would force the envelope to exist; that case means the model
    contradicts the envelope-existence lemma and raises
    :class:`EnvelopeNonexistent`.
    """
    _same_ambient(A, B)
    hull = hull_union(A, B)
    cap = intersect(A, B)
    mA, mB = mass_vector_toric(A)[0], mass_vector_toric(B)[0]
    mH = mass_vector_toric(hull)[0]
    lhs = mA + mB
    if cap is None:
        # the hull and the ambient are both certified common upper bounds
        for W in (hull, ToricClass.minimal(A.ambient)):
            if lhs > mass_vector_toric(W)[0]:
                raise EnvelopeNonexistent(
                    "disjoint bodies whose masses exceed a common upper bound"
                )
        mC = Fraction(0)
    else:
        mC = mass_vector_toric(cap)[0]
    rhs = mH + mC
    return DiamondResult(lhs, rhs, lhs <= rhs, lhs < rhs)


def compare_toric(A: ToricClass, B: ToricClass) -> ComparabilityWitness:
    if A.body == B.body or B.body.contains(A.body):
        return ComparabilityWitness(Relation.LEQ, "toric: body containment")
    if A.body.contains(B.body):
        return ComparabilityWitness(Relation.GEQ, "toric: body containment")
    return ComparabilityWitness(Relation.INCOMPARABLE, "toric: neither body contains the other")


def transport_toric(T: ToricClass, eps) -> ToricClass:
    """``Q -> Q ⊕ eps P`` inside ``(1 + eps) P``."""
    eps = Fraction(eps)
    return ToricClass(T.ambient.scale(1 + eps), minkowski_sum(T.body, T.ambient.scale(eps)))


def _compatible(A: ToricClass, B: ToricClass):
    if A.ambient != B.ambient:
        return "toric classes live in different ambient polygons"
    return None


register_engine(
    MassProvider(
        tag="toric",
        payload_type=ToricClass,
        mass=mass_vector_toric,
        compatible=_compatible,
        compare=compare_toric,
        join=hull_union,
        transport=transport_toric,
        to_json=ToricClass.to_json,
    )
)


# ---------------------------------------------------------------------------
# random bodies


def random_point_in(rng: random.Random, P: RationalPolygon, denom: int = 64) -> Point:
    """Uniform point of the ``1/denom`` lattice inside ``P`` (rejection)."""
    xs = [x for x, _ in P.vertices]
    ys = [y for _, y in P.vertices]
    lo_x, hi_x = int(min(xs) * denom) - 1, int(max(xs) * denom) + 1
    lo_y, hi_y = int(min(ys) * denom) - 1, int(max(ys) * denom) + 1
    for _ in range(10000):
        p = (Fraction(rng.randint(lo_x, hi_x), denom), Fraction(rng.randint(lo_y, hi_y), denom))
        if P.contains_point(p):
            return p
    raise RuntimeError("rejection sampling failed; ambient polygon too thin")


def random_body(rng: random.Random, P: RationalPolygon, k: int | None = None, denom: int = 64) -> RationalPolygon:
    """Convex hull of ``k`` (3..10 by default) random lattice points in ``P``."""
    if k is None:
        k = rng.randint(3, 10)
    return RationalPolygon(tuple(random_point_in(rng, P, denom) for _ in range(k)))


def random_ambient(rng: random.Random, denom: int = 8) -> RationalPolygon:
    """Random lattice polygon of positive area inside ``[0, 2]^2``."""
    while True:
        pts = [
            (Fraction(rng.randint(0, 2 * denom), denom), Fraction(rng.randint(0, 2 * denom), denom))
            for _ in range(rng.randint(3, 8))
        ]
        P = RationalPolygon(tuple(pts))
        if P.area() >= Fraction(1, 2):
            return P


def random_class(rng: random.Random, P: RationalPolygon | None = None) -> ToricClass:
    if P is None:
        P = random_ambient(rng)
    return ToricClass(P, random_body(rng, P))


def nested_chain(rng: random.Random, P: RationalPolygon, length: int = 3) -> list:
    """Certified chain ``Q_1 ⊆ Q_2 ⊆ ... ⊆ Q_length`` of bodies in ``P``.

    Built top-down: each body is the hull of random points of the next one.
    """
    bodies = [random_body(rng, P)]
    for _ in range(length - 1):
        outer = bodies[-1]
        if outer.dim < 2:
            inner = RationalPolygon((outer.vertices[0],))
        else:
            inner = random_body(rng, outer, k=rng.randint(1, 8))
        bodies.append(inner)
    bodies.reverse()
    return [ToricClass(P, Q) for Q in bodies]


def convex_combination(Q: RationalPolygon, P: RationalPolygon, t) -> RationalPolygon:
    """``(1 - t) Q ⊕ t P``."""
    t = Fraction(t)
    return minkowski_sum(Q.scale(1 - t), P.scale(t))


def shrinking_family(ts: Sequence) -> list:
    """``Q_t = [0,1] x [0,t]`` in ``P = [0,1]^2``: mass ``2t`` collapses to 0."""
    P = RationalPolygon.box(0, 0, 1, 1)
    return [ToricClass(P, RationalPolygon.box(0, 0, 1, t)) for t in ts]

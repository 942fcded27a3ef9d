"""Lattice and fan combinatorics for simplicial fans supported on a cone.

Points ``v_i`` are indexed from 1. Index sets (simplices) are sorted tuples
of these 1-based indices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from . import lattice as la
from .errors import (BadGorenstein, InputError, NonSimplicial, NotCovering,
                     NotProjective, SingularSimplex)

Simplex = tuple[int, ...]


def _simplex(xs: Iterable[int]) -> Simplex:
    return tuple(sorted(set(xs)))


@dataclass(frozen=True)
class BoxElement:
    """A twisted sector: a lattice point with fractional coordinates on its minimal cone."""

    gamma: tuple[int, ...]
    sigma: Simplex
    fractional_coords: tuple[tuple[int, Fraction], ...]

    @property
    def frac(self) -> dict[int, Fraction]:
        return dict(self.fractional_coords)

    def coord(self, i: int) -> Fraction:
        return self.frac.get(i, Fraction(0))

    @property
    def phase_order(self) -> int:
        return la.lcm(*(f.denominator for _, f in self.fractional_coords))

    @property
    def is_untwisted(self) -> bool:
        return not self.sigma

    def __str__(self):
        return "(" + ",".join(map(str, self.gamma)) + ")"


@dataclass(frozen=True)
class QuotientFan:
    base: BoxElement
    quotient_rank: int
    ray_labels: Simplex
    quotient_points: Mapping[int, tuple[int, ...]]
    quotient_simplices: frozenset
    maximal_simplices: tuple[Simplex, ...]
    interior_simplices: tuple[Simplex, ...]
    box_order: int

    def is_simplex(self, idx: Iterable[int]) -> bool:
        return _simplex(idx) in self.quotient_simplices

    def volume(self, simplex: Simplex) -> int:
        """Index of the sublattice spanned by a top-dimensional quotient simplex."""
        if len(simplex) != self.quotient_rank:
            raise ValueError("volume needs a top-dimensional simplex")
        if not simplex:
            return 1
        cols = [self.quotient_points[i] for i in simplex]
        return abs(int(la.det(la.transpose(cols))))


@dataclass(frozen=True)
class FanData:
    rank: int
    points: tuple[tuple[int, ...], ...]
    max_simplices: tuple[Simplex, ...]
    weights: tuple[Fraction, ...] | None = None
    gorenstein_degree: tuple[int, ...] | None = None
    name: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return len(self.points)

    def v(self, i: int) -> tuple[int, ...]:
        return self.points[i - 1]

    @property
    def is_gorenstein(self) -> bool:
        return self.gorenstein_degree is not None

    @property
    def is_projective(self) -> bool:
        return self.weights is not None

    def degree(self, c: Sequence[int]) -> int:
        if self.gorenstein_degree is None:
            raise BadGorenstein("fan has no height-one grading")
        return int(la.dot(self.gorenstein_degree, c))

    @cached_property
    def simplices(self) -> frozenset:
        out = set()
        for J in self.max_simplices:
            for k in range(len(J) + 1):
                out.update(itertools.combinations(J, k))
        return frozenset(out)

    def is_simplex(self, idx: Iterable[int]) -> bool:
        return _simplex(idx) in self.simplices

    @cached_property
    def rays(self) -> Simplex:
        return _simplex(i for J in self.max_simplices for i in J)

    def cones_containing(self, sigma: Iterable[int]) -> tuple[Simplex, ...]:
        s = set(sigma)
        return tuple(J for J in self.max_simplices if s <= set(J))

    def star(self, sigma: Iterable[int]) -> Simplex:
        return _simplex(i for J in self.cones_containing(sigma) for i in J)

    @cached_property
    def _walls(self) -> dict:
        return _walls(self)

    @cached_property
    def boundary_walls(self) -> tuple[Simplex, ...]:
        return tuple(sorted(W for W, info in self._walls.items() if info["boundary"]))

    @cached_property
    def interior_walls(self) -> tuple[tuple[Simplex, int, Simplex, int], ...]:
        """(J1, a, J2, b) with J1 - {a} = J2 - {b} an interior wall."""
        out = []
        for W, info in sorted(self._walls.items()):
            if not info["boundary"]:
                (J1, a), (J2, b) = info["cones"]
                out.append((J1, a, J2, b))
        return tuple(out)

    def is_interior(self, simplex: Iterable[int]) -> bool:
        s = set(simplex)
        return not any(s <= set(W) for W in self.boundary_walls)

    def containing_cone(self, p: Sequence) -> tuple[Simplex, dict[int, Fraction]] | None:
        """A maximal cone containing ``p`` and the coordinates of ``p`` on it."""
        for J in self.max_simplices:
            u = dual_covectors(self, J)
            coords = {i: la.dot(u[i], p) for i in J}
            if all(x >= 0 for x in coords.values()):
                return J, coords
        return None

    @cached_property
    def box(self) -> tuple[BoxElement, ...]:
        return tuple(compute_box(self))

    def to_json(self) -> dict:
        doc = {"rank": self.rank, "points": [list(p) for p in self.points],
               "max_simplices": [list(J) for J in self.max_simplices]}
        if self.weights is not None:
            doc["weights"] = [str(w) for w in self.weights]
        return doc


def simplex_volume(fan: FanData, I: Iterable[int]) -> int:
    """Index of Z-span(v_i, i in I) inside its saturation; 0 if dependent."""
    I = _simplex(I)
    if len(I) > fan.rank:
        raise ValueError("simplex larger than the rank")
    if not I:
        return 1
    cols = la.transpose([fan.v(i) for i in I])
    divs = la.elementary_divisors(cols)
    if len(divs) < len(I):
        return 0
    out = 1
    for d in divs:
        out *= d
    return out


def signed_volume(fan: FanData, I: Sequence[int]) -> int:
    """det(v_i, i in I) in the given order, for |I| = rank."""
    return int(la.det(la.transpose([fan.v(i) for i in I])))


def dual_covectors(fan: FanData, J: Iterable[int]) -> dict[int, tuple[Fraction, ...]]:
    """Covectors u_{i,J} with u_{i,J}(v_j) = delta_ij for i, j in J."""
    J = _simplex(J)
    return _dual_covectors_cached(fan.points, J)


_DUAL_CACHE: dict = {}


def _dual_covectors_cached(points, J):
    key = (points, J)
    hit = _DUAL_CACHE.get(key)
    if hit is not None:
        return hit
    if len(J) != len(points[0]):
        raise SingularSimplex(f"simplex {J} is not full-dimensional")
    cols = la.transpose([points[i - 1] for i in J])
    try:
        inv = la.inverse(cols)
    except ZeroDivisionError:
        raise SingularSimplex(f"simplex {J} has volume 0") from None
    out = {i: tuple(inv[k]) for k, i in enumerate(J)}
    if len(_DUAL_CACHE) > 4096:
        _DUAL_CACHE.clear()
    _DUAL_CACHE[key] = out
    return out


def _wall_normal(fan: FanData, W: Simplex, opposite: int) -> list[int]:
    """Primitive integer covector vanishing on W, positive on v_opposite."""
    if W:
        ns = la.nullspace([fan.v(i) for i in W])
    else:
        ns = [[Fraction(1)]]
    (h,) = ns
    den = la.lcm(*(x.denominator for x in h))
    h = la.primitive([int(x * den) for x in h])
    if la.dot(h, fan.v(opposite)) < 0:
        h = [-x for x in h]
    return h


def _walls(fan: FanData) -> dict:
    walls: dict = {}
    for J in fan.max_simplices:
        for a in J:
            W = tuple(i for i in J if i != a)
            walls.setdefault(W, []).append((J, a))
    out = {}
    for W, cones in walls.items():
        J, a = cones[0]
        h = _wall_normal(fan, W, a)
        values = [la.dot(h, p) for p in fan.points]
        boundary = all(x >= 0 for x in values)
        out[W] = {"cones": cones, "normal": h, "boundary": boundary}
    return out


def _check_walls(fan: FanData) -> None:
    for W, info in fan._walls.items():
        cones = info["cones"]
        h = info["normal"]
        if info["boundary"]:
            if len(cones) != 1:
                raise NotCovering(f"boundary wall {W} is shared by {len(cones)} cones")
            continue
        if len(cones) != 2:
            what = "no neighbour" if len(cones) == 1 else f"{len(cones)} cones"
            raise NotCovering(f"interior wall {W} has {what}")
        (_, a), (_, b) = cones
        if la.dot(h, fan.v(a)) * la.dot(h, fan.v(b)) >= 0:
            raise NotCovering(f"cones on wall {W} overlap")


def _check_degree_one(fan: FanData) -> None:
    normals = [info["normal"] for info in fan._walls.values()]
    for attempt in range(1, 50):
        weights = [1 + Fraction(1, (attempt + 7) * (j + 2) ** 2) for j in range(fan.n)]
        p = [sum(w * v[k] for w, v in zip(weights, fan.points)) for k in range(fan.rank)]
        if all(la.dot(h, p) != 0 for h in normals):
            break
    else:  # pragma: no cover - only reachable with pathological input
        raise NotCovering("could not find a generic point of the support")
    hits = 0
    for J in fan.max_simplices:
        u = dual_covectors(fan, J)
        if all(la.dot(u[i], p) > 0 for i in J):
            hits += 1
    if hits != 1:
        raise NotCovering(f"a generic point of C lies in {hits} maximal cones")


def _convexity_constraints(fan: FanData) -> list[dict[int, Fraction]]:
    """Linear forms in the weights that must be strictly negative."""
    rows = []
    for J1, a, J2, b in fan.interior_walls:
        u = dual_covectors(fan, J1)
        row = {i: la.dot(u[i], fan.v(b)) for i in J1}
        row[b] = row.get(b, 0) - 1
        rows.append(row)
    for j in range(1, fan.n + 1):
        if j in fan.rays:
            continue
        hit = fan.containing_cone(fan.v(j))
        J, coords = hit
        row = dict(coords)
        row[j] = row.get(j, 0) - 1
        rows.append(row)
    return rows


def check_weights(fan: FanData, weights: Sequence) -> list[str]:
    """Return descriptions of violated convexity constraints (empty if convex)."""
    bad = []
    for row in _convexity_constraints(fan):
        val = sum(c * Fraction(weights[i - 1]) for i, c in row.items())
        if val >= 0:
            bad.append(f"constraint {sorted(row.items())} evaluates to {val}")
    return bad


def find_weights(fan: FanData) -> tuple[Fraction, ...] | None:
    """Search for certifying weights by LP feasibility; verified exactly."""
    rows = _convexity_constraints(fan)
    if not rows:
        return tuple(Fraction(0) for _ in range(fan.n))
    import numpy as np
    from scipy.optimize import linprog

    A = np.array([[float(row.get(i, 0)) for i in range(1, fan.n + 1)] for row in rows])
    res = linprog(c=np.ones(fan.n), A_ub=A, b_ub=-np.ones(len(rows)),
                  bounds=[(0, None)] * fan.n, method="highs")
    if res.status != 0:
        return None
    for den in (1, 2, 6, 12, 60, 840, 10**6):
        w = tuple(Fraction(x).limit_denominator(den) for x in res.x)
        if not check_weights(fan, w):
            return w
    return None  # pragma: no cover


def find_gorenstein_degree(fan: FanData) -> tuple[int, ...] | None:
    m = la.solve([list(p) for p in fan.points], [1] * fan.n)
    if m is None or any(x.denominator != 1 for x in m):
        return None
    return tuple(int(x) for x in m)


def validate_fan(rank: int, points: Sequence[Sequence[int]],
                 max_simplices: Sequence[Iterable[int]], weights=None,
                 require_gorenstein: bool = False, name: str = "") -> FanData:
    """Check the standing hypotheses and return an immutable FanData.

    Raises NonSimplicial, NotCovering, NotProjective or BadGorenstein.
    If ``weights`` is omitted, certifying weights are searched for; a fan
    for which none exist is returned with ``weights=None``.
    """
    if rank < 1:
        raise InputError("rank must be positive", "rank")
    if not points:
        raise InputError("no points given", "points")
    if not max_simplices:
        raise InputError("no maximal simplices given", "max_simplices")
    pts = []
    for k, p in enumerate(points):
        if len(p) != rank:
            raise InputError(f"point has length {len(p)}, expected {rank}", f"points[{k}]")
        if any(not isinstance(x, int) or isinstance(x, bool) for x in p):
            raise InputError("points must have integer coordinates", f"points[{k}]")
        pts.append(tuple(p))
    n = len(pts)
    sims = []
    for k, J in enumerate(max_simplices):
        J = list(J)
        loc = f"max_simplices[{k}]"
        if len(set(J)) != len(J) or len(J) != rank:
            raise InputError(f"maximal simplex must have {rank} distinct indices", loc)
        if any(not isinstance(i, int) or not 1 <= i <= n for i in J):
            raise InputError(f"indices must lie in 1..{n}", loc)
        sims.append(_simplex(J))
    if len(set(sims)) != len(sims):
        raise InputError("repeated maximal simplex", "max_simplices")
    fan = FanData(rank=rank, points=tuple(pts), max_simplices=tuple(sorted(sims)), name=name)
    for k, J in enumerate(fan.max_simplices):
        if simplex_volume(fan, J) == 0:
            raise NonSimplicial(f"simplex {list(J)} has volume 0",
                                f"max_simplices[{sims.index(J)}]")
    _check_walls(fan)
    for j in range(1, n + 1):
        if fan.containing_cone(fan.v(j)) is None:
            raise NotCovering(f"v_{j} lies outside every maximal cone", f"points[{j - 1}]")
    _check_degree_one(fan)

    if weights is not None:
        if len(weights) != n:
            raise InputError(f"expected {n} weights", "weights")
        w = tuple(Fraction(x) for x in weights)
        bad = check_weights(fan, w)
        if bad:
            raise NotProjective("weights are not strictly convex: " + bad[0], "weights")
    else:
        w = find_weights(fan)
    deg = find_gorenstein_degree(fan)
    if require_gorenstein and deg is None:
        raise BadGorenstein("no integral covector takes value 1 on every point", "points")
    return FanData(rank=rank, points=fan.points, max_simplices=fan.max_simplices,
                   weights=w, gorenstein_degree=deg, name=name)


def fan_from_json(doc: Mapping, **kw) -> FanData:
    for key in ("rank", "points", "max_simplices"):
        if key not in doc:
            raise InputError(f"missing key {key!r}", key)
    weights = doc.get("weights")
    if weights is not None:
        try:
            weights = [Fraction(str(x)) for x in weights]
        except ValueError as exc:
            raise InputError(str(exc), "weights") from None
    return validate_fan(doc["rank"], doc["points"], doc["max_simplices"], weights,
                        name=doc.get("name", ""), **kw)


def require_gamma_ready(fan: FanData) -> None:
    """Gamma and pairing features need a projective fan on a height-one cone."""
    from .errors import NotGorenstein
    if not fan.is_gorenstein:
        raise NotGorenstein("the points do not lie on a height-one hyperplane")
    if not fan.is_projective:
        raise NotProjective("no strictly convex support function exists")


def compute_box(fan: FanData) -> list[BoxElement]:
    found: dict[tuple[int, ...], BoxElement] = {}
    for J in fan.max_simplices:
        V = la.transpose([fan.v(j) for j in J])
        U, D, _ = la.smith_normal_form(V)
        Uinv = [[int(x) for x in row] for row in la.inverse(U)]
        divs = [D[k][k] for k in range(fan.rank)]
        u = dual_covectors(fan, J)
        for a in itertools.product(*(range(d) for d in divs)):
            p = la.matvec(Uinv, a)
            frac = {j: la.dot(u[j], p) % 1 for j in J}
            gamma = tuple(int(sum(frac[j] * fan.v(j)[k] for j in J)) for k in range(fan.rank))
            coords = tuple((j, f) for j, f in sorted(frac.items()) if f != 0)
            elem = BoxElement(gamma=gamma, sigma=tuple(j for j, _ in coords),
                              fractional_coords=coords)
            prev = found.get(gamma)
            if prev is not None and prev != elem:  # pragma: no cover - fan invariant
                raise NotCovering(f"inconsistent box data at {gamma}")
            found[gamma] = elem
    return [found[g] for g in sorted(found)]


def star_quotient(fan: FanData, gamma: BoxElement) -> QuotientFan:
    sigma = gamma.sigma
    k = len(sigma)
    if k:
        M = la.transpose([fan.v(i) for i in sigma])
        U, _, _ = la.smith_normal_form(M)
        proj = U[k:]
    else:
        proj = la.identity(fan.rank)
    star = fan.star(sigma)
    labels = tuple(i for i in star if i not in sigma)
    qpoints = {i: tuple(la.matvec(proj, fan.v(i))) for i in labels}
    sset = set(sigma)
    qsimp = frozenset(tuple(i for i in I if i not in sset)
                      for I in fan.simplices if sset <= set(I))
    qmax = tuple(sorted(tuple(i for i in J if i not in sset)
                        for J in fan.cones_containing(sigma)))
    qint = tuple(sorted((tuple(i for i in I if i not in sset)
                         for I in fan.simplices
                         if sset <= set(I) and fan.is_interior(I)),
                        key=lambda s: (len(s), s)))
    return QuotientFan(base=gamma, quotient_rank=fan.rank - k, ray_labels=labels,
                       quotient_points=qpoints, quotient_simplices=qsimp,
                       maximal_simplices=qmax, interior_simplices=qint,
                       box_order=simplex_volume(fan, sigma))


def interior_simplices(fan: FanData) -> list[Simplex]:
    return sorted((I for I in fan.simplices if fan.is_interior(I)),
                  key=lambda s: (len(s), s))


def box_of_cone(fan: FanData, J: Iterable[int]) -> list[BoxElement]:
    """Box elements of a single cone (those whose minimal cone is a face of J)."""
    J = set(J)
    return [b for b in fan.box if set(b.sigma) <= J]


def lattice_points(fan: FanData, degree: int) -> list[tuple[int, ...]]:
    """Lattice points of C of the given degree, sorted."""
    if degree == 0:
        return [tuple([0] * fan.rank)]
    lo = [min(degree * p[k] for p in fan.points) for k in range(fan.rank)]
    hi = [max(degree * p[k] for p in fan.points) for k in range(fan.rank)]
    out = []
    for c in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
        if fan.degree(c) == degree and fan.containing_cone(c) is not None:
            out.append(tuple(c))
    return out

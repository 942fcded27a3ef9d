"""K-theory of the toric stack in sector form: ch, ch^c, chi and the pairing.

K-classes are never stored as Laurent polynomials modulo relations. A class
is its image under ch, one element of H_gamma per twisted sector; a
compactly supported class likewise lives in the sector modules.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import factorial
from typing import Sequence

from . import lattice as la
from .errors import (InputError, InteriorRequired, NonGenericDirection, NonInteger, NotABasis,
                     PoleRemains)
from .exactnum import Cyclotomic, EpsSeries, exp_series, phase
from .fans import (BoxElement, FanData, box_of_cone, compute_box, dual_covectors,
                   interior_simplices, star_quotient)
from .sectoralg import AlgElement, ModElement, Sector, build_sector

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@lru_cache(maxsize=64)
def sectors(fan: FanData) -> tuple[Sector, ...]:
    """All sectors of the fan, in the order of compute_box."""
    return tuple(build_sector(star_quotient(fan, g)) for g in compute_box(fan))


def _sector(fan: FanData, gamma) -> Sector:
    for s in sectors(fan):
        if s.box == gamma or s.box.gamma == tuple(gamma if not isinstance(gamma, BoxElement) else gamma.gamma):
            return s
    raise KeyError(f"{gamma} is not a twisted sector")


@dataclass(frozen=True)
class KMonomial:
    alpha: tuple[int, ...]

    def __str__(self):
        parts = [f"R{i}" + (f"^{a}" if a != 1 else "") for i, a in enumerate(self.alpha, 1) if a]
        return "*".join(parts) or "1"


@dataclass(frozen=True)
class KcMonomial:
    alpha: tuple[int, ...]
    I: tuple[int, ...]

    def __str__(self):
        g = "G" + "".join(map(str, self.I)) if all(i < 10 for i in self.I) else f"G{list(self.I)}"
        r = str(KMonomial(self.alpha))
        return g if r == "1" else f"{r}*{g}"


class KElement:
    """Element of K_0 as a tuple of sector-algebra components."""

    __slots__ = ("fan", "components")

    def __init__(self, fan: FanData, components: Sequence[AlgElement]):
        self.fan = fan
        self.components = tuple(components)

    def __add__(self, other):
        return KElement(self.fan, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return KElement(self.fan, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return KElement(self.fan, [-a for a in self.components])

    def __mul__(self, other):
        if isinstance(other, KElement):
            return KElement(self.fan, [a * b for a, b in zip(self.components, other.components)])
        if isinstance(other, KcElement):
            return KcElement(self.fan, [a * b for a, b in zip(self.components, other.components)])
        return KElement(self.fan, [a * other for a in self.components])

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return KElement(self.fan, [a ** k for a in self.components])

    def __eq__(self, other):
        if isinstance(other, KElement):
            return all(a == b for a, b in zip(self.components, other.components))
        return all(a == other for a in self.components)

    __hash__ = None

    def flat(self) -> list:
        return [c for a in self.components for c in a.coeffs]

    def __repr__(self):
        return " (+) ".join(f"[{a!r}]" for a in self.components)


class KcElement:
    """Element of K_0^c as a tuple of sector-module components."""

    __slots__ = ("fan", "components")

    def __init__(self, fan: FanData, components: Sequence[ModElement]):
        self.fan = fan
        self.components = tuple(components)

    def __add__(self, other):
        return KcElement(self.fan, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        return KcElement(self.fan, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return KcElement(self.fan, [-a for a in self.components])

    def __mul__(self, scalar):
        return KcElement(self.fan, [a * scalar for a in self.components])

    def __rmul__(self, other):
        if isinstance(other, KElement):
            return other * self
        return self * other

    def __eq__(self, other):
        if isinstance(other, KcElement):
            return all(a == b for a, b in zip(self.components, other.components))
        if isinstance(other, int) and other == 0:
            return all(a == 0 for a in self.components)
        return NotImplemented

    __hash__ = None

    def flat(self) -> list:
        return [c for a in self.components for c in a.coeffs]

    def __repr__(self):
        return " (+) ".join(f"[{a!r}]" for a in self.components)


def _default_cone(fan: FanData, sigma) -> tuple[int, ...]:
    return fan.cones_containing(sigma)[0]


def ch_generator(fan: FanData, sector: Sector, i: int, cone=None, route: str = "linear") -> AlgElement:
    """ch_gamma(R_i).

    For i in sigma(gamma) the unipotent part is the exponential of
    sum_j <m_i, v_j> D_j with m_i = -u_{i,J} for a maximal cone J containing
    sigma. ``route="power"`` instead multiplies rational powers
    exp(D_j)^(<m_i, v_j>), and ``cone`` selects J; both exist so the
    independence of these choices can be tested.
    """
    alg = sector.algebra
    q = sector.quotient
    g = sector.box
    if i in q.ray_labels:
        return alg.d(i).exp()
    if i not in g.sigma:
        return alg.one()
    J = cone if cone is not None else _default_cone(fan, g.sigma)
    u = dual_covectors(fan, J)[i]
    ph = phase(g.coord(i))
    if route == "linear":
        form = {j: -la.dot(u, fan.v(j)) for j in q.ray_labels}
        return alg.linear(form).exp() * ph
    out = alg.one()
    for j in q.ray_labels:
        out = out * alg.d(j).exp().rational_power(-la.dot(u, fan.v(j)))
    return out * ph


@lru_cache(maxsize=4096)
def _ch_generators(fan: FanData, k: int) -> tuple[AlgElement, ...]:
    s = sectors(fan)[k]
    return tuple(ch_generator(fan, s, i) for i in range(1, fan.n + 1))


def _ch_sector(fan: FanData, k: int, alpha: Sequence[int]) -> AlgElement:
    s = sectors(fan)[k]
    gens = _ch_generators(fan, k)
    out = s.algebra.one()
    for i, a in enumerate(alpha):
        if a:
            out = out * gens[i] ** a
    return out


def ch_monomial(fan: FanData, gamma, m: KMonomial | Sequence[int]) -> AlgElement:
    """ch_gamma(R^alpha) in H_gamma."""
    alpha = m.alpha if isinstance(m, KMonomial) else tuple(m)
    k = sectors(fan).index(_sector(fan, gamma))
    return _ch_sector(fan, k, alpha)


def ch(fan: FanData, m: KMonomial | Sequence[int]) -> KElement:
    alpha = m.alpha if isinstance(m, KMonomial) else tuple(m)
    _check_alpha(fan, alpha)
    return KElement(fan, [_ch_sector(fan, k, alpha) for k in range(len(sectors(fan)))])


def _td_prime(x: AlgElement) -> AlgElement:
    """(1 - e^{-x})/x for nilpotent x."""
    n = x.alg.socle_degree + 1
    return x.power_series([Fraction((-1) ** k, factorial(k + 1)) for k in range(n)])


def _td(x: AlgElement) -> AlgElement:
    """x/(1 - e^{-x}) for nilpotent x."""
    return _td_prime(x).inverse()


def _chc_sector(fan: FanData, k: int, alpha: Sequence[int], I: Sequence[int]) -> ModElement:
    s = sectors(fan)[k]
    sigma = s.box.sigma
    if not fan.is_simplex(set(I) | set(sigma)):
        return s.module.zero()
    gens = _ch_generators(fan, k)
    factor = _ch_sector(fan, k, alpha)
    for i in I:
        if i in sigma:
            factor = factor * (1 - gens[i - 1].inverse())
        else:
            factor = factor * _td_prime(s.algebra.d(i))
    rest = [i for i in I if i not in sigma]
    return factor * s.module.generator(rest)


def chc_monomial(fan: FanData, gamma, m: KcMonomial) -> ModElement:
    k = sectors(fan).index(_sector(fan, gamma))
    return _chc_sector(fan, k, m.alpha, m.I)


def chc(fan: FanData, m: KcMonomial) -> KcElement:
    _check_alpha(fan, m.alpha)
    if tuple(sorted(m.I)) not in set(interior_simplices(fan)):
        raise InteriorRequired(f"G{list(m.I)} is not an interior simplex")
    return KcElement(fan, [_chc_sector(fan, k, m.alpha, m.I) for k in range(len(sectors(fan)))])


def _check_alpha(fan: FanData, alpha):
    if len(alpha) != fan.n:
        raise InputError(f"exponent vector must have length {fan.n}")


# --- Euler characteristic -------------------------------------------------

def generic_direction(fan: FanData, cones, skip: int = 0) -> tuple[int, ...]:
    """w = (1, p, p^2, ...) with <u_{i,J}, w> != 0 for every listed cone."""
    found = 0
    for p in _PRIMES:
        w = tuple(p ** k for k in range(fan.rank))
        if all(la.dot(u, w) != 0 for J in cones for u in dual_covectors(fan, J).values()):
            if found == skip:
                return w
            found += 1
    raise NonGenericDirection("no generic direction found among the trial directions")


def _chi_series(fan: FanData, alpha, I, w, prec: int) -> EpsSeries:
    total = EpsSeries([], 0, prec + 1)
    for J in fan.cones_containing(I):
        if len(J) != fan.rank:
            continue
        u = dual_covectors(fan, J)
        a = {i: la.dot(u[i], w) for i in J}
        boxes = box_of_cone(fan, J)
        for g in boxes:
            term = EpsSeries([Fraction(1, len(boxes))], 0, prec + 1)
            for i in J:
                gi = g.coord(i)
                if alpha[i - 1]:
                    ph = phase(-gi * alpha[i - 1])
                    term = term * exp_series(-alpha[i - 1] * a[i], prec) * (ph if not ph.is_rational() else ph.to_fraction())
            for i in J:
                if i in I:
                    continue
                ph = phase(g.coord(i))
                e = exp_series(a[i], prec + 1) * (ph if not ph.is_rational() else ph.to_fraction())
                term = term * (1 - e).invert()
            total = total + term
    return total


def chi(fan: FanData, alpha: Sequence[int], I: Sequence[int], retries: int = 4) -> int:
    """chi(R^alpha G_I) as the q -> 1 limit along a generic direction."""
    alpha = tuple(int(a) for a in alpha)
    _check_alpha(fan, alpha)
    I = tuple(sorted(I))
    if not (fan.is_simplex(I) and fan.is_interior(I)):
        raise InteriorRequired(f"G{list(I)} is not an interior simplex")
    cones = [J for J in fan.cones_containing(I) if len(J) == fan.rank]
    prec = fan.rank + 1
    last = None
    for attempt in range(retries):
        w = generic_direction(fan, cones, attempt)
        try:
            value = _chi_series(fan, alpha, I, w, prec).constant_term_at_zero()
            break
        except PoleRemains as exc:
            last = exc
    else:
        raise NonGenericDirection(f"pole survived {retries} directions: {last}")
    if isinstance(value, Cyclotomic):
        if not value.is_rational():
            raise NonInteger(f"chi is not rational: {value!r}")
        value = value.to_fraction()
    value = Fraction(value)
    if value.denominator != 1:
        raise NonInteger(f"chi evaluated to {value}")
    return int(value)


def chi_hrr(fan: FanData, v: KcElement):
    """Sector-wise integral of the Todd-type correction times ch^c(v)."""
    total = Fraction(0)
    for k, s in enumerate(sectors(fan)):
        comp = v.components[k]
        if comp == 0:
            continue
        gens = _ch_generators(fan, k)
        corr = s.algebra.one()
        for i in s.box.sigma:
            corr = corr * (1 - gens[i - 1].inverse()).inverse()
        for i in s.quotient.ray_labels:
            corr = corr * _td(s.algebra.d(i))
        total = total + s.integral(corr * comp) * Fraction(1, s.quotient.box_order)
    if isinstance(total, Cyclotomic) and total.is_rational():
        total = total.to_fraction()
    return total


def euler_pairing(fan: FanData, w: KMonomial, v: KcMonomial) -> int:
    """chi(w^dual v) = chi(R^(beta - alpha) G_I)."""
    return chi(fan, [b - a for a, b in zip(w.alpha, v.alpha)], v.I)


# --- bases and the pairing matrix ----------------------------------------

def total_dimension(fan: FanData) -> int:
    return sum(s.algebra.dim for s in sectors(fan))


class _Independence:
    def __init__(self):
        self.rows: list[list] = []
        self.pivots: list[int] = []

    def try_add(self, vec: list) -> bool:
        v = list(vec)
        for row, p in zip(self.rows, self.pivots):
            if v[p] != 0:
                f = v[p]
                v = [x - f * y for x, y in zip(v, row)]
        p = next((k for k, x in enumerate(v) if x != 0), None)
        if p is None:
            return False
        inv = 1 / v[p]
        v = [x * inv for x in v]
        for r, row in enumerate(self.rows):
            if row[p] != 0:
                f = row[p]
                self.rows[r] = [x - f * y for x, y in zip(row, v)]
        self.rows.append(v)
        self.pivots.append(p)
        return True


def _check_basis(vectors: list[list], what: str):
    ind = _Independence()
    for k, v in enumerate(vectors):
        if not ind.try_add(v):
            raise NotABasis(f"{what} element {k} is dependent on the previous ones")


def _candidate_exponents(fan: FanData, d: int):
    rays = sorted(fan.rays, reverse=True)
    for i in rays:
        for k in range(d):
            alpha = [0] * fan.n
            alpha[i - 1] = k
            yield tuple(alpha)
    ranges = [range(d) if (i + 1) in fan.rays else range(1) for i in range(fan.n)]
    for alpha in sorted(product(*ranges), key=lambda a: (sum(a), a)):
        yield alpha


def canonical_k_basis(fan: FanData) -> list[KMonomial]:
    d = total_dimension(fan)
    ind = _Independence()
    out: list[KMonomial] = []
    for alpha in _candidate_exponents(fan, d):
        if len(out) == d:
            break
        if ind.try_add(ch(fan, alpha).flat()):
            out.append(KMonomial(alpha))
    if len(out) < d:
        raise NotABasis("could not complete a monomial basis of K_0")
    return out


def canonical_kc_basis(fan: FanData) -> list[KcMonomial]:
    d = total_dimension(fan)
    ind = _Independence()
    out: list[KcMonomial] = []
    for I in interior_simplices(fan):
        for alpha in _candidate_exponents(fan, d):
            if len(out) == d:
                return out
            m = KcMonomial(alpha, I)
            if ind.try_add(chc(fan, m).flat()):
                out.append(m)
    if len(out) < d:
        raise NotABasis("could not complete a monomial basis of K_0^c")
    return out


@dataclass(frozen=True)
class PairingMatrix:
    kbasis: tuple[KMonomial, ...]
    kcbasis: tuple[KcMonomial, ...]
    matrix: tuple[tuple[int, ...], ...]  # rows indexed by kcbasis
    det: int


def pairing_matrix(fan: FanData, kbasis: Sequence[KMonomial] | None = None,
                   kcbasis: Sequence[KcMonomial] | None = None) -> PairingMatrix:
    d = total_dimension(fan)
    kbasis = list(kbasis) if kbasis is not None else canonical_k_basis(fan)
    kcbasis = list(kcbasis) if kcbasis is not None else canonical_kc_basis(fan)
    if len(kbasis) != d or len(kcbasis) != d:
        raise NotABasis(f"bases must have {d} elements, got {len(kbasis)} and {len(kcbasis)}")
    _check_basis([ch(fan, m).flat() for m in kbasis], "K_0 basis")
    _check_basis([chc(fan, m).flat() for m in kcbasis], "K_0^c basis")
    mat = tuple(tuple(euler_pairing(fan, w, v) for w in kbasis) for v in kcbasis)
    det = la.det(mat)
    return PairingMatrix(tuple(kbasis), tuple(kcbasis), mat, int(det))

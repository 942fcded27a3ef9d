"""Artinian sector algebras H_gamma and their compactly supported modules.

Both are built as graded quotients of monomial spaces in the classes D_i of
a quotient fan. A monomial is a sorted tuple of ray labels (repeats allowed).

* The algebra is spanned by monomials supported on a simplex, modulo
  (linear forms) x (monomials one degree lower).
* The module is spanned by monomials supported on an interior simplex. The
  monomial D^a with support I stands for D^(a - 1_I) F_I, so D_i F_I = F_{I+i}
  and D_i F_I = 0 off the fan hold by construction.

Everything is exact. Coefficients of elements may be Fractions or
Cyclotomics; the structure constants are always rational.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial
from typing import Sequence

from . import lattice as la
from .errors import DualityMismatch
from .fans import QuotientFan

Monomial = tuple[int, ...]


def _is_zero(c) -> bool:
    return c == 0


def monomial_label(mono: Monomial, module: bool = False) -> str:
    """Human-readable name, e.g. ``D3^2`` or ``D3*F[2]``."""
    if module:
        support = sorted(set(mono))
        rest = list(mono)
        for i in support:
            rest.remove(i)
        f = "F[" + ",".join(map(str, support)) + "]"
        return "*".join([_dlabel(tuple(rest)), f]) if rest else f
    return _dlabel(mono) or "1"


def _dlabel(mono: Monomial) -> str:
    parts = []
    for i in sorted(set(mono)):
        k = mono.count(i)
        parts.append(f"D{i}" + (f"^{k}" if k > 1 else ""))
    return "*".join(parts)


@dataclass
class _Graded:
    """Basis and normal forms of a graded quotient of a monomial space."""

    basis: list[Monomial] = field(default_factory=list)
    index: dict[Monomial, int] = field(default_factory=dict)
    # monomial -> sparse {basis position: coefficient}
    normal: dict[Monomial, dict[int, Fraction]] = field(default_factory=dict)

    def add_degree(self, monomials: list[Monomial], relations: list[list[Fraction]]) -> int:
        """Reduce one degree; low-index monomials become pivots."""
        red, piv = la.rref(relations) if relations else ([], [])
        pivset = set(piv)
        start = len(self.basis)
        for k, m in enumerate(monomials):
            if k not in pivset:
                self.index[m] = len(self.basis)
                self.normal[m] = {len(self.basis): Fraction(1)}
                self.basis.append(m)
        for row, p in zip(red, piv):
            self.normal[monomials[p]] = {self.index[monomials[q]]: -row[q]
                                         for q in range(len(monomials))
                                         if q not in pivset and row[q] != 0}
        return len(self.basis) - start


def _monomials(labels: Sequence[int], degree: int, allowed) -> list[Monomial]:
    return [m for m in combinations_with_replacement(sorted(labels), degree)
            if allowed(frozenset(m))]


def _linear_forms(q: QuotientFan) -> list[dict[int, int]]:
    return [{i: q.quotient_points[i][k] for i in q.ray_labels}
            for k in range(q.quotient_rank)]


def _build_graded(q: QuotientFan, allowed, start_degree: int = 0) -> tuple[_Graded, dict[int, int]]:
    """Build degrees 0..quotient_rank+1. Returns the data and dims per degree."""
    g = _Graded()
    forms = _linear_forms(q)
    dims = {}
    prev: list[Monomial] = []
    for d in range(0, q.quotient_rank + 2):
        monos = _monomials(q.ray_labels, d, allowed)
        pos = {m: k for k, m in enumerate(monos)}
        rels = []
        for mu in prev:
            for form in forms:
                row = [Fraction(0)] * len(monos)
                for i, c in form.items():
                    if c:
                        m = tuple(sorted(mu + (i,)))
                        if m in pos:
                            row[pos[m]] += c
                if any(row):
                    rels.append(row)
        if d <= q.quotient_rank:
            dims[d] = g.add_degree(monos, rels)
        else:
            red, _ = la.rref(rels) if rels else ([], [])
            dims[d] = len(monos) - len(red)
        prev = monos
    return g, dims


class SectorAlgebra:
    """H_gamma: basis, structure constants and the classes of D_i."""

    def __init__(self, q: QuotientFan):
        self.quotient = q
        self.sector = q.base
        self.socle_degree = q.quotient_rank
        g, dims = _build_graded(q, lambda s: q.is_simplex(s))
        if dims[self.socle_degree + 1]:
            raise DualityMismatch(f"sector {q.base}: algebra does not vanish above degree {self.socle_degree}")
        self._g = g
        self.basis: tuple[Monomial, ...] = tuple(g.basis)
        self.dim = len(self.basis)
        self.degree_dims = {d: k for d, k in dims.items() if d <= self.socle_degree}
        self.mult_table = [[self._reduce(tuple(sorted(a + b))) for b in self.basis] for a in self.basis]
        self.d_classes = {i: self.monomial((i,)) for i in q.ray_labels}

    def _reduce(self, mono: Monomial) -> list[Fraction]:
        vec = [Fraction(0)] * len(self._g.basis)
        if len(mono) <= self.socle_degree:
            for k, c in self._g.normal.get(mono, {}).items():
                vec[k] = c
        return vec

    @property
    def labels(self) -> list[str]:
        return [monomial_label(m) for m in self.basis]

    def element(self, coeffs) -> "AlgElement":
        return AlgElement(self, tuple(coeffs))

    def monomial(self, mono: Sequence[int]) -> "AlgElement":
        return AlgElement(self, tuple(self._reduce(tuple(sorted(mono)))))

    def zero(self) -> "AlgElement":
        return AlgElement(self, (Fraction(0),) * self.dim)

    def one(self) -> "AlgElement":
        return self.monomial(())

    def d(self, i: int) -> "AlgElement":
        """Class of D_i; zero for labels outside the quotient fan."""
        return self.d_classes.get(i, self.zero())

    def linear(self, coeffs: dict[int, Fraction]) -> "AlgElement":
        out = self.zero()
        for i, c in coeffs.items():
            if c:
                out = out + self.d(i) * c
        return out


class AlgElement:
    __slots__ = ("alg", "coeffs")

    def __init__(self, alg: SectorAlgebra, coeffs: tuple):
        self.alg = alg
        self.coeffs = coeffs

    def _check(self, other):
        if other.alg is not self.alg:
            raise ValueError("elements of different sectors")

    def __add__(self, other):
        if not isinstance(other, AlgElement):
            return self + self.alg.one() * other
        self._check(other)
        return AlgElement(self.alg, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return AlgElement(self.alg, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, AlgElement):
            self._check(other)
            out = [Fraction(0)] * self.alg.dim
            table = self.alg.mult_table
            for i, a in enumerate(self.coeffs):
                if _is_zero(a):
                    continue
                for j, b in enumerate(other.coeffs):
                    if _is_zero(b):
                        continue
                    ab = a * b
                    for k, s in enumerate(table[i][j]):
                        if s:
                            out[k] = out[k] + ab * s
            return AlgElement(self.alg, tuple(out))
        if isinstance(other, ModElement):
            return other.__rmul__(self)
        return AlgElement(self.alg, tuple(a * other for a in self.coeffs))

    def __rmul__(self, other):
        return AlgElement(self.alg, tuple(other * a for a in self.coeffs))

    def __truediv__(self, other):
        if isinstance(other, AlgElement):
            return self * other.inverse()
        return self * (1 / Fraction(other) if isinstance(other, int) else 1 / other)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = self.alg.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, AlgElement):
            return self.alg is other.alg and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        return self == self.alg.one() * other

    __hash__ = None

    def constant_term(self):
        """Coefficient of 1 (the basis starts with the empty monomial)."""
        return self.coeffs[0]

    def nilpotent_part(self) -> "AlgElement":
        return self - self.alg.one() * self.constant_term()

    def is_nilpotent(self) -> bool:
        return _is_zero(self.constant_term())

    def power_series(self, coeffs: Sequence) -> "AlgElement":
        """sum_k coeffs[k] * self^k for nilpotent self; terms past the socle vanish."""
        if not self.is_nilpotent():
            raise ValueError("power series only evaluated on nilpotent elements")
        out = self.alg.zero()
        p = self.alg.one()
        for k, a in enumerate(coeffs):
            if k > self.alg.socle_degree:
                break
            if not _is_zero(a):
                out = out + p * a
            p = p * self
        return out

    def _order(self) -> int:
        return self.alg.socle_degree + 1

    def exp(self) -> "AlgElement":
        return self.power_series([Fraction(1, factorial(k)) for k in range(self._order())])

    def log(self) -> "AlgElement":
        """log of a unipotent element."""
        n = self - 1
        if not n.is_nilpotent():
            raise ValueError("log only defined for unipotent elements")
        return n.power_series([Fraction(0)] + [Fraction((-1) ** (k + 1), k) for k in range(1, self._order())])

    def rational_power(self, r) -> "AlgElement":
        """u^r = exp(r log u) for unipotent u."""
        return (self.log() * Fraction(r)).exp()

    def inverse(self) -> "AlgElement":
        c = self.constant_term()
        if _is_zero(c):
            raise ZeroDivisionError("element is not a unit")
        inv_c = 1 / c if not isinstance(c, int) else Fraction(1, c)
        n = self.nilpotent_part() * inv_c
        return n.power_series([(-1) ** k for k in range(self._order())]) * inv_c

    def __repr__(self):
        terms = [f"({c})*{lab}" for c, lab in zip(self.coeffs, self.alg.labels) if not _is_zero(c)]
        return " + ".join(terms) or "0"


class SectorModule:
    """H^c_gamma with the action of its algebra."""

    def __init__(self, q: QuotientFan, alg: SectorAlgebra):
        self.quotient = q
        self.algebra = alg
        interior = set(frozenset(s) for s in q.interior_simplices)
        g, dims = _build_graded(q, lambda s: s in interior)
        self._g = g
        self.basis: tuple[Monomial, ...] = tuple(g.basis)
        self.dim = len(self.basis)
        if self.dim != alg.dim:
            raise DualityMismatch(f"sector {q.base}: module has dimension {self.dim}, algebra {alg.dim}")
        self.action_table = [[self._reduce(tuple(sorted(a + b))) for b in self.basis] for a in alg.basis]
        self.f_generators = {s: self.generator(s) for s in q.interior_simplices}

    def _reduce(self, mono: Monomial) -> list[Fraction]:
        vec = [Fraction(0)] * len(self._g.basis)
        if len(mono) <= self.quotient.quotient_rank:
            for k, c in self._g.normal.get(mono, {}).items():
                vec[k] = c
        return vec

    @property
    def labels(self) -> list[str]:
        return [monomial_label(m, module=True) for m in self.basis]

    def element(self, coeffs) -> "ModElement":
        return ModElement(self, tuple(coeffs))

    def zero(self) -> "ModElement":
        return ModElement(self, (Fraction(0),) * self.dim)

    def generator(self, simplex: Sequence[int]) -> "ModElement":
        """F_I; zero unless I is an interior simplex of the quotient fan."""
        s = tuple(sorted(simplex))
        return ModElement(self, tuple(self._reduce(s)))

    def monomial(self, mono: Sequence[int]) -> "ModElement":
        return ModElement(self, tuple(self._reduce(tuple(sorted(mono)))))


class ModElement:
    __slots__ = ("module", "coeffs")

    def __init__(self, module: SectorModule, coeffs: tuple):
        self.module = module
        self.coeffs = coeffs

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        if other.module is not self.module:
            raise ValueError("elements of different sectors")
        return ModElement(self.module, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return ModElement(self.module, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if isinstance(scalar, (AlgElement, ModElement)):
            return NotImplemented
        return ModElement(self.module, tuple(a * scalar for a in self.coeffs))

    def __rmul__(self, other):
        if isinstance(other, AlgElement):
            if other.alg is not self.module.algebra:
                raise ValueError("elements of different sectors")
            out = [Fraction(0)] * self.module.dim
            table = self.module.action_table
            for i, a in enumerate(other.coeffs):
                if _is_zero(a):
                    continue
                for j, b in enumerate(self.coeffs):
                    if _is_zero(b):
                        continue
                    ab = a * b
                    for k, s in enumerate(table[i][j]):
                        if s:
                            out[k] = out[k] + ab * s
            return ModElement(self.module, tuple(out))
        return ModElement(self.module, tuple(other * a for a in self.coeffs))

    def __eq__(self, other):
        if isinstance(other, ModElement):
            return self.module is other.module and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        if isinstance(other, int) and other == 0:
            return all(_is_zero(a) for a in self.coeffs)
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        terms = [f"({c})*{lab}" for c, lab in zip(self.coeffs, self.module.labels) if not _is_zero(c)]
        return " + ".join(terms) or "0"


@dataclass(frozen=True)
class IntegrationFunctional:
    module: SectorModule
    values: tuple[Fraction, ...]

    def __call__(self, m: ModElement):
        total = Fraction(0)
        for a, v in zip(m.coeffs, self.values):
            if v and not _is_zero(a):
                total = total + a * v
        return total


def build_sector_algebra(q: QuotientFan) -> SectorAlgebra:
    return SectorAlgebra(q)


def build_sector_module(q: QuotientFan, alg: SectorAlgebra) -> tuple[SectorModule, IntegrationFunctional]:
    mod = SectorModule(q, alg)
    r = q.quotient_rank
    top = [k for k, m in enumerate(mod.basis) if len(m) == r]
    if len(top) != 1:
        raise DualityMismatch(f"sector {q.base}: top degree of the module has dimension {len(top)}")
    t = top[0]
    value = None
    for J in q.maximal_simplices:
        coeff = mod.generator(J).coeffs[t]
        if coeff == 0:
            raise DualityMismatch(f"sector {q.base}: F{list(J)} vanishes in the module")
        v = 1 / (q.volume(J) * coeff)
        if value is None:
            value = v
        elif v != value:
            raise DualityMismatch(f"sector {q.base}: integrals of top generators disagree")
    values = tuple(value if k == t else Fraction(0) for k in range(mod.dim))
    return mod, IntegrationFunctional(mod, values)


def pair_in_sector(a: AlgElement, m: ModElement, integral: IntegrationFunctional):
    return integral(a * m)


@dataclass
class Sector:
    """Everything attached to one twisted sector."""

    quotient: QuotientFan
    algebra: SectorAlgebra
    module: SectorModule
    integral: IntegrationFunctional

    @property
    def box(self):
        return self.quotient.base


def build_sector(q: QuotientFan) -> Sector:
    alg = build_sector_algebra(q)
    mod, integral = build_sector_module(q, alg)
    return Sector(q, alg, mod, integral)


def gram_matrix(sector: Sector) -> list[list[Fraction]]:
    alg, mod = sector.algebra, sector.module
    return [[pair_in_sector(alg.monomial(a), mod.monomial(b), sector.integral)
             for b in mod.basis] for a in alg.basis]

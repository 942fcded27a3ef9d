"""Gamma and Gamma-circ series of the better-behaved GKZ system.

Exponent sets are enumerated exactly. Series values are double-precision
complex vectors on the sector bases, multiplied with the exact structure
constants of each sector converted to floats.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import mpmath
import numpy as np

from . import lattice as la
from .errors import InputError, InteriorRequired
from .exactnum import Cyclotomic, phase
from .fans import FanData, require_gamma_ready
from .ktheory import ch_generator, sectors

TWO_PI_I = 2j * math.pi


class TruncationWarning(UserWarning):
    """The outermost enumerated shell is not negligible."""


# --- exponent sets --------------------------------------------------------

@dataclass(frozen=True)
class RelationLattice:
    """Integer relations among the points and per-(c, gamma) offsets."""

    fan: FanData
    basis: tuple[tuple[int, ...], ...]

    def offset(self, c: Sequence[int], k: int) -> tuple[Fraction, ...] | None:
        """A point of L_{c,gamma} for the k-th sector, or None if it is empty."""
        return _offset(self.fan, tuple(c), k)


def relation_lattice(fan: FanData) -> RelationLattice:
    return RelationLattice(fan, _kernel(fan))


@lru_cache(maxsize=64)
def _kernel(fan: FanData) -> tuple[tuple[int, ...], ...]:
    V = la.transpose(fan.points)
    return tuple(tuple(r) for r in la.integer_kernel(V))


@lru_cache(maxsize=1024)
def _offset(fan: FanData, c: tuple[int, ...], k: int):
    g = sectors(fan)[k].box
    V = la.transpose(fan.points)
    rhs = [-ci - gi for ci, gi in zip(c, g.gamma)]
    z = la.integer_solve(V, rhs)
    if z is None:
        return None
    return tuple(Fraction(zi) + g.coord(i) for i, zi in enumerate(z, 1))


def _positive_sum(l) -> Fraction:
    return sum((x for x in l if x > 0), Fraction(0))


@lru_cache(maxsize=1024)
def _enumerate(fan: FanData, c: tuple[int, ...], k: int, K: int) -> tuple[tuple[Fraction, ...], ...]:
    l0 = _offset(fan, c, k)
    if l0 is None:
        return ()
    B = _kernel(fan)
    if not B:
        return (l0,) if _positive_sum(l0) <= K else ()
    n = fan.n
    # every l in the set has |l_i| <= K + deg(c)
    bound = K + fan.degree(c)
    # pick coordinates where B is invertible to bound the lattice parameters
    cols = la.rref([list(map(Fraction, r)) for r in B])[1]
    sub = [[B[j][i] for j in range(len(B))] for i in cols]  # rows: chosen coords
    inv = la.inverse(sub)
    tmax = []
    for row in inv:
        tmax.append(int(sum(abs(x) * (bound + abs(l0[i])) for x, i in zip(row, cols))) + 1)
    out = []
    for t in product(*[range(-m, m + 1) for m in tmax]):
        l = tuple(l0[i] + sum(t[j] * B[j][i] for j in range(len(B))) for i in range(n))
        if _positive_sum(l) <= K:
            out.append(l)
    out.sort(key=lambda l: (_positive_sum(l), l))
    return tuple(out)


def _sector_index(fan: FanData, gamma) -> int:
    for k, s in enumerate(sectors(fan)):
        if s.box == gamma or s.box.gamma == tuple(getattr(gamma, "gamma", gamma)):
            return k
    raise KeyError(f"{gamma} is not a twisted sector")


def enumerate_L(fan: FanData, c: Sequence[int], gamma, K: int) -> list[tuple[Fraction, ...]]:
    """Elements of L_{c,gamma} with positive part summing to at most K."""
    require_gamma_ready(fan)
    return list(_enumerate(fan, tuple(c), _sector_index(fan, gamma), K))


# --- reciprocal gamma jets ------------------------------------------------

_DPS = 40


@lru_cache(maxsize=4096)
def _jet_mp(a: Fraction, order: int) -> tuple:
    with mpmath.workdps(_DPS):
        base = a - math.floor(a) + 1  # in [1, 2)
        m = int(a - base)
        b = mpmath.mpf(base.numerator) / base.denominator
        # log Gamma(b + t) = log Gamma(b) + sum_k psi^(k-1)(b) t^k / k!
        lg = [mpmath.mpf(0)] + [mpmath.polygamma(k - 1, b) / mpmath.factorial(k) for k in range(1, order + 1)]
        # exp of -(lg) as a series, then divide by Gamma(b)
        s = [mpmath.mpf(0)] * (order + 1)
        s[0] = mpmath.mpf(1)
        for k in range(1, order + 1):
            s[k] = -sum(j * lg[j] * s[k - j] for j in range(1, k + 1)) / k
        g = mpmath.rgamma(b)
        s = [x * g for x in s]
        if m > 0:
            for j in range(m):
                c0 = b + j  # divide by (c0 + t)
                out = []
                prev = mpmath.mpf(0)
                for k in range(order + 1):
                    prev = (s[k] - prev) / c0
                    out.append(prev)
                s = out
        elif m < 0:
            for j in range(m, 0):
                c0 = b + j  # multiply by (c0 + t)
                s = [c0 * s[k] + (s[k - 1] if k else 0) for k in range(order + 1)]
        return tuple(s)


def recip_gamma_jet(a, order: int) -> list[float]:
    """Taylor coefficients of t -> 1/Gamma(a + t) at t = 0 up to t^order."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    return [float(x) for x in _jet_mp(Fraction(a), order)]


# --- numeric sector algebra -----------------------------------------------

class NumericSector:
    """Float copy of one sector's algebra and module."""

    def __init__(self, fan: FanData, k: int):
        s = sectors(fan)[k]
        self.sector = s
        self.index = k
        self.box = s.box
        self.dim = s.algebra.dim
        self.order = s.algebra.socle_degree
        self.T = np.array([[[float(x) for x in cell] for cell in row] for row in s.algebra.mult_table],
                          dtype=complex).reshape(self.dim, self.dim, self.dim)
        self.A = np.array([[[float(x) for x in cell] for cell in row] for row in s.module.action_table],
                          dtype=complex).reshape(self.dim, self.dim, self.dim)
        self.one = np.zeros(self.dim, dtype=complex)
        self.one[0] = 1
        self.integral = np.array([float(v) for v in s.integral.values], dtype=complex)
        # D_i = log ch(R_i e^{-2 pi i gamma_i}), exact then converted
        self.D = []
        for i in range(1, fan.n + 1):
            u = ch_generator(fan, s, i) * phase(-s.box.coord(i))
            d = u.log()
            self.D.append(np.array([float(_rational(x)) for x in d.coeffs], dtype=complex))
        self.labels = s.algebra.labels
        self.module_labels = s.module.labels

    def mul(self, u, v):
        return np.einsum("i,j,ijk->k", u, v, self.T)

    def act(self, a, m):
        return np.einsum("i,j,ijk->k", a, m, self.A)

    def series(self, n, coeffs):
        """sum_k coeffs[k] n^k for nilpotent n."""
        out = coeffs[0] * self.one
        p = self.one
        for c in coeffs[1:self.order + 1]:
            p = self.mul(p, n)
            out = out + c * p
        return out

    def exp(self, n):
        return self.series(n, [1 / math.factorial(k) for k in range(self.order + 1)])

    def generator(self, simplex) -> np.ndarray:
        g = self.sector.module.generator(simplex)
        return np.array([float(x) for x in g.coeffs], dtype=complex)


def _rational(x) -> Fraction:
    if isinstance(x, Cyclotomic):
        return x.to_fraction()
    return Fraction(x)


@lru_cache(maxsize=64)
def numeric_sectors(fan: FanData) -> tuple[NumericSector, ...]:
    return tuple(NumericSector(fan, k) for k in range(len(sectors(fan))))


# --- series ---------------------------------------------------------------

@dataclass(frozen=True)
class SeriesConfig:
    truncation: int = 12
    log_x: tuple[complex, ...] | None = None
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.truncation < 0:
            raise ValueError("truncation bound must be nonnegative")


@dataclass(frozen=True)
class GammaTerm:
    """One summand, without the factor x^(l + D/2 pi i)."""

    sector: int
    l: tuple[Fraction, ...]
    sigma: tuple[int, ...]
    coeff: np.ndarray


@dataclass
class GammaValue:
    c: tuple[int, ...]
    kind: str  # "plain" or "compact"
    components: list[np.ndarray]
    labels: list[list[str]]
    boxes: list[str]
    tail: float = 0.0
    terms: list[GammaTerm] = field(default_factory=list, repr=False)

    def component(self, k: int) -> np.ndarray:
        return self.components[k]

    def flat(self) -> np.ndarray:
        return np.concatenate(self.components)


def _in_cone(fan: FanData, c) -> tuple[int, ...] | None:
    """Minimal cone containing c, or None if c lies outside C."""
    hit = fan.containing_cone(c)
    if hit is None:
        return None
    _, coords = hit
    return tuple(sorted(i for i, x in coords.items() if x > 0))


def is_interior_point(fan: FanData, c) -> bool:
    s = _in_cone(fan, c)
    return s is not None and fan.is_interior(s)


@lru_cache(maxsize=4096)
def _terms(fan: FanData, c: tuple[int, ...], k: int, K: int, compact: bool) -> tuple[GammaTerm, ...]:
    ns = numeric_sectors(fan)[k]
    sigma_g = set(ns.box.sigma)
    r = ns.order
    out = []
    for l in _enumerate(fan, c, k, K):
        sig = tuple(i for i, x in enumerate(l, 1) if x.denominator == 1 and x < 0)
        if compact and not fan.is_simplex(set(sig) | sigma_g):
            continue
        v = ns.one.copy()
        for i, li in enumerate(l, 1):
            jet = recip_gamma_jet(1 + li, r + (1 if (compact and i in sig) else 0))
            if compact and i in sig:
                # remove the simple zero; the D_i^{-1} leaves a factor 1/(2 pi i)
                assert abs(jet[0]) < 1e-300
                jet = [x / TWO_PI_I for x in jet[1:]]
            if r == 0 or not ns.D[i - 1].any():
                v = v * jet[0]
            else:
                v = ns.mul(v, ns.series(ns.D[i - 1] / TWO_PI_I, jet))
        if compact:
            v = ns.act(v, ns.generator(sig))
        out.append(GammaTerm(k, l, sig, v))
    return tuple(out)


def gamma_terms(fan: FanData, c: Sequence[int], K: int, compact: bool = False) -> list[GammaTerm]:
    require_gamma_ready(fan)
    c = tuple(c)
    if compact:
        if not is_interior_point(fan, c):
            raise InteriorRequired(f"{list(c)} is not in the interior of the cone")
        # supports of compact terms are never boundary simplices of the quotient fan
        for k, s in enumerate(sectors(fan)):
            for t in _terms(fan, c, k, K, True):
                assert fan.is_interior(set(t.sigma) | set(s.box.sigma)), "boundary support in a compact term"
    return [t for k in range(len(sectors(fan))) for t in _terms(fan, c, k, K, compact)]


def default_log_x(fan: FanData) -> tuple[complex, ...]:
    return tuple(0j for _ in range(fan.n))


def _x_power(l, log_x) -> complex:
    return cmath.exp(sum(float(li) * lx for li, lx in zip(l, log_x)))


def _common_factor(ns: NumericSector, log_x) -> np.ndarray:
    n = sum(d * lx for d, lx in zip(ns.D, log_x)) / TWO_PI_I
    return ns.exp(n) if ns.order else ns.one.copy()


def term_value(fan: FanData, t: GammaTerm, log_x, compact: bool) -> np.ndarray:
    ns = numeric_sectors(fan)[t.sector]
    e = _common_factor(ns, log_x)
    v = ns.act(e, t.coeff) if compact else ns.mul(e, t.coeff)
    return _x_power(t.l, log_x) * v


def _evaluate(fan: FanData, c, cfg: SeriesConfig, compact: bool) -> GammaValue:
    log_x = tuple(cfg.log_x) if cfg.log_x is not None else default_log_x(fan)
    if len(log_x) != fan.n:
        raise InputError(f"log_x must have {fan.n} entries")
    terms = gamma_terms(fan, c, cfg.truncation, compact)
    nss = numeric_sectors(fan)
    comps = [np.zeros(ns.dim, dtype=complex) for ns in nss]
    shell = 0.0
    for t in terms:
        v = term_value(fan, t, log_x, compact)
        comps[t.sector] += v
        if _positive_sum(t.l) > cfg.truncation - 1:
            shell += float(np.abs(v).sum())
    total = float(sum(np.abs(v).sum() for v in comps))
    tail = shell / total if total else 0.0
    if tail > cfg.tolerance and cfg.truncation > 0:
        warnings.warn(f"outer shell of the series at c={list(c)} has relative size {tail:.2e}",
                      TruncationWarning, stacklevel=3)
    return GammaValue(tuple(c), "compact" if compact else "plain", comps,
                      [ns.module_labels if compact else ns.labels for ns in nss],
                      [str(ns.box) for ns in nss], tail, terms)


def gamma_series(fan: FanData, c: Sequence[int], cfg: SeriesConfig) -> GammaValue:
    if _in_cone(fan, c) is None:
        raise InteriorRequired(f"{list(c)} is not in the cone")
    return _evaluate(fan, tuple(c), cfg, False)


def gamma_circ_series(fan: FanData, c: Sequence[int], cfg: SeriesConfig) -> GammaValue:
    return _evaluate(fan, tuple(c), cfg, True)


# --- checks ---------------------------------------------------------------

@dataclass
class GKZReport:
    shift_residual: float
    euler_residual: float
    exponent_sets_match: bool
    checked: int

    @property
    def max_residual(self) -> float:
        return max(self.shift_residual, self.euler_residual)

    def passed(self, tol: float) -> bool:
        return self.exponent_sets_match and self.max_residual < tol


def _apply_factor(ns: NumericSector, t: GammaTerm, i: int, v: np.ndarray, compact: bool) -> np.ndarray:
    """(l_i + D_i / 2 pi i) * v."""
    a = ns.D[i - 1] / TWO_PI_I + float(t.l[i - 1]) * ns.one
    return ns.act(a, v) if compact else ns.mul(a, v)


def check_gkz(fan: FanData, cs: Sequence[Sequence[int]], cfg: SeriesConfig, compact: bool = False) -> GKZReport:
    """Term-level check of the shift and Euler equations for the given c."""
    require_gamma_ready(fan)
    log_x = tuple(cfg.log_x) if cfg.log_x is not None else default_log_x(fan)
    K = cfg.truncation
    nss = numeric_sectors(fan)
    shift_res = 0.0
    euler_res = 0.0
    sets_ok = True
    checked = 0
    for c in map(tuple, cs):
        terms = {(t.sector, t.l): t for t in gamma_terms(fan, c, K, compact)}
        vals = {key: term_value(fan, t, log_x, compact) for key, t in terms.items()}
        scale = sum(float(np.abs(v).sum()) for v in vals.values()) or 1.0
        # exact exponent sets
        for k in range(len(nss)):
            for i in range(1, fan.n + 1):
                ci = tuple(a + b for a, b in zip(c, fan.v(i)))
                lo = set(_enumerate(fan, c, k, K))
                hi = set(_enumerate(fan, ci, k, K))
                down = {tuple(x - (1 if j == i else 0) for j, x in enumerate(l, 1)) for l in lo}
                if not down <= hi:
                    sets_ok = False
                hi_small = {l for l in hi if _positive_sum(l) <= K - 1}
                if not {tuple(x + (1 if j == i else 0) for j, x in enumerate(l, 1)) for l in hi_small} <= lo:
                    sets_ok = False
        # shift equations, term by term
        for i in range(1, fan.n + 1):
            ci = tuple(a + b for a, b in zip(c, fan.v(i)))
            if compact and not is_interior_point(fan, ci):
                continue
            target = {(t.sector, t.l): t for t in gamma_terms(fan, ci, K - 1, compact)}
            xi = cmath.exp(log_x[i - 1])
            for (k, l), t in target.items():
                src_l = tuple(x + (1 if j == i else 0) for j, x in enumerate(l, 1))
                tv = term_value(fan, t, log_x, compact)
                src = terms.get((k, src_l))
                if src is None:
                    dv = np.zeros_like(tv)
                else:
                    dv = _apply_factor(nss[k], src, i, vals[(k, src_l)], compact) / xi
                shift_res = max(shift_res, float(np.abs(dv - tv).sum()) / scale)
                checked += 1
        # Euler relations for a basis of the dual lattice
        for m in la.identity(fan.rank):
            mc = la.dot(m, c)
            for key, t in terms.items():
                ns = nss[key[0]]
                acc = mc * vals[key]
                for i in range(1, fan.n + 1):
                    w = la.dot(m, fan.v(i))
                    if w:
                        acc = acc + w * _apply_factor(ns, t, i, vals[key], compact)
                euler_res = max(euler_res, float(np.abs(acc).sum()) / scale)
                checked += 1
    return GKZReport(shift_res, euler_res, sets_ok, checked)


def untwisted_index(fan: FanData) -> int:
    return next(k for k, s in enumerate(sectors(fan)) if s.box.is_untwisted)


def rank_functional(fan: FanData, values: Sequence[GammaValue]) -> dict[tuple[int, ...], complex]:
    """Identity coefficient of the untwisted component of each Gamma_c."""
    k = untwisted_index(fan)
    return {v.c: complex(v.components[k][0]) for v in values}

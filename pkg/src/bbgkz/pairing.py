"""Pairings of solution families: Hessian, pairing with 1, candidate tables."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Mapping, Sequence

import numpy as np

from . import lattice as la
from .errors import InputError, MissingComponent, SingularMatrix
from .exactnum import Cyclotomic
from .fans import FanData, require_gamma_ready, signed_volume
from .gamma import (SeriesConfig, gamma_circ_series, gamma_series, is_interior_point,
                    numeric_sectors, untwisted_index)
from .ktheory import KcMonomial, KMonomial, ch, chc, pairing_matrix, sectors

TWO_PI_I = 2j * math.pi

# a family maps (c, log_x) to the concatenated sector components
Family = Callable[[tuple[int, ...], Sequence[complex]], np.ndarray]


@dataclass(frozen=True)
class HessianPolynomial:
    """d -> [(I, Vol_I^2)]: the coefficient of [d] is sum Vol_I^2 prod_{i in I} x_i."""

    terms: Mapping[tuple[int, ...], tuple[tuple[tuple[int, ...], int], ...]]

    def coefficient(self, d, log_x) -> complex:
        return sum(w * np.exp(sum(log_x[i - 1] for i in I)) for I, w in self.terms.get(tuple(d), ()))

    def total_at_one(self) -> int:
        return sum(w for entries in self.terms.values() for _, w in entries)


def hessian(fan: FanData) -> HessianPolynomial:
    """Logarithmic Hessian of sum_i x_i [v_i], over all points."""
    terms: dict[tuple[int, ...], list] = {}
    for I in combinations(range(1, fan.n + 1), fan.rank):
        vol = abs(signed_volume(fan, I))
        if vol == 0:
            continue
        d = tuple(sum(fan.v(i)[k] for i in I) for k in range(fan.rank))
        terms.setdefault(d, []).append((I, vol * vol))
    return HessianPolynomial({d: tuple(v) for d, v in sorted(terms.items())})


@dataclass
class ConstancyReport:
    values: list[np.ndarray]
    deviation: float
    tolerance: float

    @property
    def constant(self) -> np.ndarray:
        return np.mean(self.values, axis=0)

    @property
    def passed(self) -> bool:
        return self.deviation < self.tolerance


def constancy(values: list[np.ndarray], tolerance: float) -> ConstancyReport:
    ref = values[0]
    scale = max(float(np.abs(ref).max()), 1e-300)
    dev = max((float(np.abs(v - ref).max()) / scale for v in values[1:]), default=0.0)
    return ConstancyReport(values, dev, tolerance)


def gamma_family(fan: FanData, truncation: int, compact: bool) -> Family:
    def evaluate(c, log_x):
        cfg = SeriesConfig(truncation, tuple(log_x))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            v = gamma_circ_series(fan, c, cfg) if compact else gamma_series(fan, c, cfg)
        return v.flat()
    return evaluate


def pair_with_one(fan: FanData, psi: Family, samples: Sequence[Sequence[complex]],
                  tolerance: float = 1e-6) -> ConstancyReport:
    """sum over interior d of Coeff_d(Hessian)(x) Psi_d(x) at each sample."""
    require_gamma_ready(fan)
    h = hessian(fan)
    values = []
    for lx in samples:
        total = 0
        for d in h.terms:
            if is_interior_point(fan, d):
                total = total + h.coefficient(d, lx) * psi(d, lx)
        values.append(np.asarray(total, dtype=complex))
    return constancy(values, tolerance)


def point_class(fan: FanData) -> tuple[tuple[int, ...], "object"]:
    """ch^c of a point: Vol_I F_I in the untwisted sector, same for every maximal I."""
    k = untwisted_index(fan)
    mod = sectors(fan)[k].module
    ref = None
    for J in fan.max_simplices:
        vol = abs(signed_volume(fan, J))
        el = mod.generator(J) * vol
        if ref is None:
            ref = (J, el)
        elif not el == ref[1]:
            raise InputError(f"Vol*F differs between {ref[0]} and {J}")
    return ref


def expected_volume_constant(fan: FanData) -> np.ndarray:
    """Vol(conv) / (2 pi i)^rank times the point class, as a flat vector."""
    vol = sum(abs(signed_volume(fan, J)) for J in fan.max_simplices)
    _, el = point_class(fan)
    k = untwisted_index(fan)
    parts = []
    for j, ns in enumerate(numeric_sectors(fan)):
        if j == k:
            parts.append(np.array([float(x) for x in el.coeffs], dtype=complex))
        else:
            parts.append(np.zeros(ns.dim, dtype=complex))
    return np.concatenate(parts) * vol / TWO_PI_I ** fan.rank


@dataclass
class VolumeReport:
    constancy: ConstancyReport
    expected: np.ndarray
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.constancy.passed and self.error < self.tolerance


def verify_volume_identity(fan: FanData, samples, truncation: int = 16,
                           tolerance: float = 1e-6) -> VolumeReport:
    rep = pair_with_one(fan, gamma_family(fan, truncation, True), samples, tolerance)
    exp = expected_volume_constant(fan)
    err = float(np.abs(rep.constant - exp).max()) / float(np.abs(exp).max())
    return VolumeReport(rep, exp, err, tolerance)


# --- candidate pairings ---------------------------------------------------

@dataclass(frozen=True)
class PairingEntry:
    c: tuple[int, ...]
    d: tuple[int, ...]
    poly: tuple[tuple[Fraction, tuple[int, ...]], ...]

    def value(self, log_x) -> complex:
        return sum(complex(float(a)) * np.exp(sum(e * lx for e, lx in zip(mono, log_x)))
                   for a, mono in self.poly)


@dataclass(frozen=True)
class CandidatePairing:
    entries: tuple[PairingEntry, ...]

    @classmethod
    def from_json(cls, doc, n: int | None = None) -> "CandidatePairing":
        if isinstance(doc, Mapping):
            doc = doc.get("entries", doc.get("pairing"))
        if not isinstance(doc, list):
            raise InputError("candidate pairing must be a list of entries")
        out = []
        for k, e in enumerate(doc):
            loc = f"entries[{k}]"
            try:
                poly = tuple((Fraction(str(t["coeff"])), tuple(int(x) for x in t["monomial"]))
                             for t in e["poly"])
                entry = PairingEntry(tuple(int(x) for x in e["c"]), tuple(int(x) for x in e["d"]), poly)
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"malformed entry: {exc}", loc) from None
            if n is not None and any(len(m) != n for _, m in poly):
                raise InputError(f"monomials must have {n} exponents", loc)
            out.append(entry)
        return cls(tuple(out))

    @classmethod
    def load(cls, path, n: int | None = None) -> "CandidatePairing":
        with open(path) as fh:
            return cls.from_json(json.load(fh), n)

    def to_json(self) -> list:
        return [{"c": list(e.c), "d": list(e.d),
                 "poly": [{"coeff": str(a), "monomial": list(m)} for a, m in e.poly]}
                for e in self.entries]


@dataclass
class TensorReport:
    constancy: ConstancyReport
    shape: tuple[int, int]

    @property
    def constant(self) -> np.ndarray:
        return self.constancy.constant.reshape(self.shape)


def evaluate_candidate_pairing(fan: FanData, p: CandidatePairing, phi: Family, psi: Family,
                               samples, tolerance: float = 1e-6, degree_bound: int | None = None,
                               available: Callable[[tuple, bool], bool] | None = None) -> TensorReport:
    """sum p_{c,d}(x) Phi_c(x) (x) Psi_d(x) at each sample."""
    require_gamma_ready(fan)
    bound = 2 * fan.rank if degree_bound is None else degree_bound
    entries = []
    for e in p.entries:
        if fan.degree(e.c) + fan.degree(e.d) > bound:
            warnings.warn(f"skipping entry c={list(e.c)}, d={list(e.d)} beyond degree bound {bound}")
            continue
        if available is not None:
            if not available(e.c, False):
                raise MissingComponent(f"Phi_{list(e.c)} is not supplied")
            if not available(e.d, True):
                raise MissingComponent(f"Psi_{list(e.d)} is not supplied")
        entries.append(e)
    if not entries:
        raise InputError("no pairing entries within the degree bound")
    values = []
    shape = None
    for lx in samples:
        phis: dict = {}
        psis: dict = {}
        total = None
        for e in entries:
            if e.c not in phis:
                phis[e.c] = phi(e.c, lx)
            if e.d not in psis:
                psis[e.d] = psi(e.d, lx)
            term = e.value(lx) * np.outer(phis[e.c], psis[e.d])
            total = term if total is None else total + term
        shape = total.shape
        values.append(total.ravel())
    return TensorReport(constancy(values, tolerance), shape)


def _complex(x) -> complex:
    if isinstance(x, Cyclotomic):
        return x.complex_value()
    return complex(float(x))


@dataclass
class InverseEulerReport:
    scale: complex
    residual: float
    expected_scale: complex | None
    tolerance: float
    monomial_tensor: np.ndarray
    inverse_pairing: np.ndarray

    @property
    def passed(self) -> bool:
        ok = self.residual < self.tolerance
        if self.expected_scale is not None:
            ok = ok and abs(self.scale - self.expected_scale) <= self.tolerance * abs(self.expected_scale)
        return ok


def inverse_euler_check(fan: FanData, T: np.ndarray, scale: complex | None = None,
                        tolerance: float = 1e-6,
                        kbasis: Sequence[KMonomial] | None = None,
                        kcbasis: Sequence[KcMonomial] | None = None) -> InverseEulerReport:
    """Compare T, read in monomial bases, with a multiple of the inverse pairing matrix."""
    pm = pairing_matrix(fan, kbasis, kcbasis)
    ch_cols = np.array([[_complex(x) for x in ch(fan, m).flat()] for m in pm.kbasis]).T
    chc_cols = np.array([[_complex(x) for x in chc(fan, m).flat()] for m in pm.kcbasis]).T
    try:
        t = np.linalg.solve(ch_cols, T) @ np.linalg.inv(chc_cols).T
        q = np.array(la.inverse(pm.matrix), dtype=float)
    except (np.linalg.LinAlgError, ZeroDivisionError):
        raise SingularMatrix("pairing or character matrix is singular") from None
    fit = complex(np.vdot(q, t) / np.vdot(q, q))
    ref = abs(fit) * float(np.abs(q).max()) or 1.0
    residual = float(np.abs(t - fit * q).max()) / ref
    return InverseEulerReport(fit, residual, scale, tolerance, t, q)

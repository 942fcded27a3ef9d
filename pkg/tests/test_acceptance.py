"""Acceptance criteria 1-13, one test each.

Every test records a PASS/FAIL line; the lines are printed together at the
end of the session (see conftest.py) and also when this file is run as a
script. Criterion 13 is informational and never fails the suite.
"""
import json
import math
import subprocess
import sys
import textwrap
from fractions import Fraction

import numpy as np
import pytest

from bbgkz.fans import fan_from_json
from bbgkz.gamma import SeriesConfig, check_gkz, gamma_series, rank_functional
from bbgkz.ktheory import KcMonomial, ch, chc, chi, chi_hrr, sectors
from bbgkz.pairing import (CandidatePairing, evaluate_candidate_pairing, gamma_family, inverse_euler_check,
                           verify_volume_identity)

from conftest import bundled, samples_of

RESULTS: dict[int, str] = {}
SCALE = -3 / (4 * math.pi ** 2)
TWO_PI_I = 2j * math.pi

pytestmark = pytest.mark.filterwarnings("ignore::bbgkz.gamma.TruncationWarning")


def record(n: int, ok: bool, detail: str, gating: bool = True):
    tag = "PASS" if ok else ("INFO" if not gating else "FAIL")
    RESULTS[n] = f"criterion {n:2d}: {tag}  {detail}"
    print(RESULTS[n])
    if gating:
        assert ok, RESULTS[n]


def fan(name):
    return fan_from_json(bundled(name))


def timed(snippet: str) -> tuple[object, float]:
    """Run a snippet in a fresh interpreter; return its JSON result and wall time after imports."""
    code = textwrap.dedent("""
        import json, time
        from bbgkz.cli import load_fan
        from bbgkz.ktheory import KcMonomial, KMonomial, chi, pairing_matrix
        from bbgkz.gamma import SeriesConfig, gamma_series, gamma_circ_series
        f, _ = load_fan("keyexample")
        t0 = time.perf_counter()
    """) + textwrap.dedent(snippet) + textwrap.dedent("""
        print(json.dumps({"result": result, "seconds": time.perf_counter() - t0}))
    """)
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    doc = json.loads(out.stdout.strip().splitlines()[-1])
    return doc["result"], doc["seconds"]


def test_criterion_01_pairing_table():
    result, secs = timed("""
        kb = [KMonomial((0, 0, k)) for k in range(3)]
        kcb = [KcMonomial((0, 0, k), (2,)) for k in range(3)]
        result = [list(r) for r in pairing_matrix(f, kb, kcb).matrix]
    """)
    ok = result == [[1, 0, 0], [1, 1, 0], [2, 1, 1]] and secs < 1.0
    record(1, ok, f"matrix {result}, {secs:.3f} s")


def test_criterion_02_chi_closed_form():
    result, secs = timed("result = [chi(f, (0, 0, k), (2,)) for k in range(9)]")
    expect = [k // 2 + 1 if k % 2 == 0 else (k + 1) // 2 for k in range(9)]
    record(2, result == expect and secs < 1.0, f"chi(R3^k G2) = {result}, {secs:.3f} s")


def test_criterion_03_coarse_chi():
    c = fan("keyexample-coarse")
    got = [chi(c, (0, 0, k), (1, 3)) for k in range(9)]
    record(3, got == [int(k % 3 == 0) for k in range(9)], f"chi(R3^k G13) = {got}")


def test_criterion_04_hrr():
    bad = []
    for name, I in (("keyexample", (2,)), ("keyexample-coarse", (1, 3))):
        f = fan(name)
        for a in range(3):
            for b in range(3):
                alpha = (0, 0, b - a)
                lhs = chi(f, alpha, I)
                rhs = chi_hrr(f, chc(f, KcMonomial(alpha, I)))
                if lhs != rhs:
                    bad.append((name, a, b, lhs, rhs))
    record(4, not bad, "18 pairs agree" if not bad else f"mismatches {bad}")


def test_criterion_05_ch_fixtures():
    f = fan("keyexample")
    un, tw = sectors(f)
    one, D3 = un.algebra.one(), un.algebra.d(3)
    F2, Fe = un.module.generator((2,)), tw.module.generator(())
    r3 = ch(f, (0, 0, 1))
    g2 = chc(f, KcMonomial((0, 0, 0), (2,)))
    r3g2 = chc(f, KcMonomial((0, 0, 1), (2,)))
    ok = (r3.components[0] == one + D3 and r3.components[1] == tw.algebra.one() * -1
          and g2.components[0] == (one + D3 * Fraction(3, 2)) * F2 and g2.components[1] == Fe * 2
          and r3g2.components[0] == (one + D3 * Fraction(5, 2)) * F2 and r3g2.components[1] == Fe * -2)
    record(5, ok, f"ch(R3) = {r3!r}; ch^c(G2) = {g2!r}; ch^c(R3 G2) = {r3g2!r}")


def test_criterion_06_integration():
    f = fan("keyexample")
    un, tw = sectors(f)
    F2 = un.module.generator((2,))
    vals = (un.integral(F2), un.integral(un.algebra.d(3) * F2), tw.integral(tw.module.generator(())))
    record(6, vals == (0, Fraction(1, 2), 1), f"integrals {[str(v) for v in vals]}")


COEFFS = """
    import math
    def coeffs(value, sector, label, degree, scale=1.0):
        idx = value.labels[sector].index(label)
        out = []
        for t in value.terms:
            if t.sector == sector:
                z = complex(t.coeff[idx]) * (2j * math.pi) ** degree * scale
                if abs(z) > 1e-9:
                    out.append([z.real, z.imag])
        return out
    g0 = gamma_series(f, (0, 0), SeriesConfig(8))
    g21 = gamma_series(f, (2, 1), SeriesConfig(8))
    gc = gamma_circ_series(f, (1, 1), SeriesConfig(8))
    result = {
        "Gamma_00 D3": coeffs(g0, 0, "D3", 1),
        "Gamma_00 twisted": coeffs(g0, 1, "1", 0, math.pi),
        "Gamma_21 twisted": coeffs(g21, 1, "1", 0, math.pi),
        "Gamma0_11 F2": coeffs(gc, 0, "F[2]", 1),
        "Gamma0_11 D3F2": coeffs(gc, 0, "F[2,3]", 2),
    }
"""


def _match(got, expect, tol=1e-10):
    """Relative agreement, and exact agreement of the recovered rationals."""
    if len(got) < len(expect):
        return False
    for (re, im), q in zip(got, expect):
        if abs(im) > tol * abs(re) or abs(re - float(q)) > tol * abs(float(q)):
            return False
        if Fraction(re).limit_denominator(10 ** 5) != q:
            return False
    return True


def test_criterion_07_gamma_coefficients():
    got, secs = timed(COEFFS)
    Q = Fraction
    expect = {
        "Gamma_00 D3": [-3, Q(15, 2)],
        "Gamma_00 twisted": [-1, Q(35, 24), Q(-3003, 640)],
        "Gamma_21 twisted": [1, Q(-15, 8), Q(1155, 128)],
        "Gamma0_11 F2": [1, -3, 15],
        "Gamma0_11 D3F2": [Q(-9, 2), Q(101, 4)],
    }
    failed = [k for k in expect if not _match(got[k], expect[k])]
    record(7, not failed and secs < 10.0,
           f"{len(expect) - len(failed)}/{len(expect)} coefficient series exact at K=8, {secs:.3f} s"
           + (f"; failed {failed}" if failed else ""))


def test_criterion_08_gkz_residuals():
    f = fan("keyexample")
    samples = samples_of(bundled("keyexample"))
    assert all(abs(np.exp(2 * s[0] - 3 * s[1] + s[2])) <= 0.01 for s in samples)
    worst = 0.0
    ok = True
    for lx in samples:
        for compact, cs in ((False, [(0, 0), (1, 1), (2, 1), (3, 1), (2, 2), (4, 2)]),
                            (True, [(1, 1), (2, 1), (2, 2), (3, 2), (4, 2)])):
            rep = check_gkz(f, cs, SeriesConfig(12, lx), compact=compact)
            worst = max(worst, rep.max_residual)
            ok = ok and rep.passed(1e-8)
    record(8, ok, f"max relative residual {worst:.2e} (K=12)")


def test_criterion_09_rank():
    f = fan("keyexample")
    cs = [(0, 0), (1, 1), (2, 1), (3, 1)]
    worst = 0.0
    for lx in samples_of(bundled("keyexample")):
        vals = rank_functional(f, [gamma_series(f, c, SeriesConfig(12, lx)) for c in cs])
        worst = max(worst, max(abs(v - (1 if c == (0, 0) else 0)) for c, v in vals.items()))
    record(9, worst < 1e-10, f"max |rk(Gamma_c) - delta| = {worst:.2e}")


def test_criterion_10_pairing_with_one():
    parts = []
    ok = True
    for name in ("keyexample", "keyexample-coarse"):
        rep = verify_volume_identity(fan(name), samples_of(bundled(name)), 16, 1e-6)
        ok = ok and rep.passed
        parts.append(f"{name}: deviation {rep.constancy.deviation:.1e}, error {rep.error:.1e}")
    record(10, ok, "; ".join(parts))


def _explicit(name):
    f = fan(name)
    table = CandidatePairing.from_json(bundled("explicit-pairing"), f.n)
    rep = evaluate_candidate_pairing(f, table, gamma_family(f, 16, False), gamma_family(f, 16, True),
                                     samples_of(bundled(name)), 1e-6)
    return f, rep


def test_criterion_11_explicit_fine():
    f, rep = _explicit("keyexample")
    inv = inverse_euler_check(f, rep.constant, SCALE, 1e-6)
    ok = rep.constancy.passed and inv.passed
    record(11, ok, f"deviation {rep.constancy.deviation:.1e}, scale/(-3/4pi^2) = {(inv.scale / SCALE).real:.9f}, "
                   f"residual {inv.residual:.1e}")


def test_criterion_12_explicit_coarse():
    f, rep = _explicit("keyexample-coarse")
    assert all(abs(np.exp(-(2 * s[0] - 3 * s[1] + s[2]))) <= 0.01 for s in samples_of(bundled("keyexample-coarse")))
    target = sum(np.outer([complex(x) for x in ch(f, (0, 0, k)).flat()],
                          [complex(x) for x in chc(f, KcMonomial((0, 0, k), (1, 3))).flat()]) for k in range(3))
    target = SCALE * target
    err = float(np.abs(rep.constant - target).max()) / float(np.abs(target).max())
    ok = rep.constancy.passed and err < 1e-5
    record(12, ok, f"deviation {rep.constancy.deviation:.1e}, relative error vs -(3/4pi^2) sum R3^k (x) R3^k G13 = {err:.1e}")


def test_criterion_13_closed_form():
    f = fan("keyexample")
    x = 0.01
    v = gamma_series(f, (0, 0), SeriesConfig(30, (0j, 0j, complex(math.log(x)))))
    s, r = math.sqrt(x), math.sqrt(4 / 27 + x)
    untwisted = 3 * math.log((s + r) ** (1 / 3) - (r - s) ** (1 / 3)) - 0.5 * math.log(4 * x)
    y = (s + r) ** (2 / 3)
    c = 2 ** (2 / 3)
    twisted = -(2 / math.pi) * math.atan((-c + 3 * y) / (math.sqrt(3) * (c + 3 * y)))
    e1 = abs(v.components[0][1] * TWO_PI_I - untwisted)
    e2 = abs(v.components[1][0] - twisted)
    record(13, max(e1, e2) < 1e-6, f"errors {e1:.1e} (untwisted), {e2:.1e} (twisted) at x = {x}", gating=False)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))

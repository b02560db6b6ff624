import math
import random

import mpmath
import pytest

from cm_atlas.arith import squarefree_part
from cm_atlas.modular import (
    MAX_PRECISION,
    ROUNDING_TOLERANCE,
    DegenerateSubfieldError,
    conjugate_roots,
    dominance_check,
    eval_j,
    field_equal_exp2,
    fourier_gap,
    hcp_precision,
    hilbert_class_polynomial,
    phi2_residual,
    quadratic_subfields,
    to_fundamental_domain,
)
from cm_atlas.orders import list_by_class_number
from cm_atlas.qforms import Form, enumerate_reduced

SQRT3 = mpmath.sqrt(3)


def kleinj_hcp(disc, prec):
    """Class polynomial from mpmath's kleinj, an independent j evaluator."""
    with mpmath.workprec(prec):
        poly = [mpmath.mpc(1)]
        for f in enumerate_reduced(disc):
            tau = mpmath.mpc(-f.b, mpmath.sqrt(-disc)) / (2 * f.a)
            r = 1728 * mpmath.kleinj(tau)
            nxt = [mpmath.mpc(0)] * (len(poly) + 1)
            for k, c in enumerate(poly):
                nxt[k + 1] += c
                nxt[k] -= r * c
            poly = nxt
        ints = [int(mpmath.nint(c.real)) for c in poly]
        worst = max(abs(c - n) for c, n in zip(poly, ints))
        assert worst < 1e-10
        return ints


def test_eval_j_special_values():
    assert abs(eval_j(1j, 128) - 1728) < mpmath.mpf(2) ** -100
    assert abs(eval_j(2j, 128) - 287496) < mpmath.mpf(2) ** -100
    rho = mpmath.mpc(-0.5, SQRT3 / 2)
    assert abs(eval_j(rho, 128)) < mpmath.mpf(2) ** -100


def test_eval_j_against_kleinj():
    rng = random.Random(1)
    with mpmath.workprec(200):
        for _ in range(30):
            tau = mpmath.mpc(rng.uniform(-3, 3), rng.uniform(0.05, 3))
            ref = 1728 * mpmath.kleinj(tau)
            got = eval_j(tau, 160)
            assert abs(got - ref) <= abs(ref) * mpmath.mpf(2) ** -150 + mpmath.mpf(2) ** -150


def test_eval_j_rejects():
    with pytest.raises(ValueError):
        eval_j(1j, 32)
    with pytest.raises(ValueError):
        eval_j(1j, MAX_PRECISION + 1)
    with pytest.raises(ValueError):
        eval_j(-1j, 128)


def test_sl2_invariance():
    rng = random.Random(2)
    prec = 128
    for _ in range(100):
        with mpmath.workprec(prec + 64):
            tau = mpmath.mpc(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 2.0))
            while True:
                a, b = rng.randint(-6, 6), rng.randint(-6, 6)
                if math.gcd(a, b) == 1:
                    break
            # complete (a, b) to [[a, b], [c, d]] with ad - bc = 1
            g, x, y = _xgcd(a, b)
            c, d = -y * g, x * g
            assert a * d - b * c == 1
            gtau = (a * tau + b) / (c * tau + d)
        diff = abs(eval_j(gtau, prec) - eval_j(tau, prec))
        assert diff < mpmath.mpf(2) ** (8 - prec)


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def test_fundamental_domain():
    with mpmath.workprec(100):
        z = to_fundamental_domain(mpmath.mpc(3.3, 0.01))
        assert abs(z.real) <= 0.5 + 1e-20 and abs(z) >= 1 - 1e-20


def test_fourier_gap_samples():
    assert abs(fourier_gap(1j) - abs(1728 - math.exp(2 * math.pi))) < 1e-9
    assert abs(fourier_gap(1j) - 1192.5) < 0.1
    rho = mpmath.mpc(0.5, SQRT3 / 2)
    assert abs(fourier_gap(rho) - math.exp(math.pi * math.sqrt(3))) < 1e-9
    assert abs(fourier_gap(rho) - 230.8) < 0.1


@pytest.mark.parametrize(
    "disc, coeffs",
    [
        (-3, (0, 1)),
        (-4, (-1728, 1)),
        (-67, (147197952000, 1)),
        (-15, (-121287375, 191025, 1)),
    ],
)
def test_hcp_examples(disc, coeffs):
    H = hilbert_class_polynomial(disc)
    assert H.coefficients == coeffs
    assert H.max_residual < ROUNDING_TOLERANCE


def test_hcp_minus15_oracle():
    disc = -15
    assert kleinj_hcp(disc, 2 * hcp_precision(disc)) == [-121287375, 191025, 1]


@pytest.mark.parametrize("disc", [-23, -31, -39, -55, -63, -96, -92, -124, -156, -220, -252, -480])
def test_hcp_against_kleinj(disc):
    H = hilbert_class_polynomial(disc)
    assert list(H.coefficients) == kleinj_hcp(disc, 2 * hcp_precision(disc))


def test_hcp_properties():
    for n in range(3, 400):
        if n % 4 not in (0, 3):
            continue
        H = hilbert_class_polynomial(-n)
        assert H.degree == len(enumerate_reduced(-n))
        assert H.coefficients[-1] == 1
        if n not in (3,):
            assert H.coefficients[0] != 0


def test_hcp_string():
    assert str(hilbert_class_polynomial(-4)) == "x - 1728"
    assert str(hilbert_class_polynomial(-15)) == "x^2 + 191025*x - 121287375"
    assert str(hilbert_class_polynomial(-3)) == "x"


def test_hcp_retry(monkeypatch):
    import cm_atlas.modular as m

    expected = hilbert_class_polynomial(-420).coefficients
    calls = []
    real = m.conjugate_roots

    def starved(disc, prec):
        calls.append(prec)
        return real(disc, prec if len(calls) > 1 else 64)

    monkeypatch.setattr(m, "hcp_precision", lambda disc, guard=64: 40)
    monkeypatch.setattr(m, "conjugate_roots", starved)
    H = m.hilbert_class_polynomial(-420)
    assert calls[1] == 2 * calls[0]
    assert H.coefficients == expected


def test_hcp_gives_up(monkeypatch):
    import cm_atlas.modular as m

    monkeypatch.setattr(m, "hcp_precision", lambda disc, guard=64: 8)
    monkeypatch.setattr(m, "conjugate_roots", lambda disc, prec: real_roots(disc))
    with pytest.raises(m.PrecisionError):
        m.hilbert_class_polynomial(-5460)


def real_roots(disc):
    return conjugate_roots(disc, 64)


def test_conjugate_roots():
    r = conjugate_roots(-4)
    assert list(r) == [Form(1, 0, 1)] and abs(r[Form(1, 0, 1)] - 1728) < 1e-20
    r = conjugate_roots(-15)
    assert all(abs(v.imag) < 1e-20 for v in r.values())
    assert abs(sum(r.values()) + 191025) < 1e-15
    r = conjugate_roots(-23)
    vals = list(r.values())
    assert abs(vals[0].imag) < 1e-20
    assert abs(vals[1] - mpmath.conj(vals[2])) < 1e-9 and abs(vals[1].imag) > 1


@pytest.mark.parametrize("disc", [-15, -23, -7392])
def test_dominance_examples(disc):
    rep = dominance_check(disc)
    assert rep.max_ratio <= 0.1


def test_dominance_rejects():
    with pytest.raises(ValueError):
        dominance_check(-43)
    with pytest.raises(ValueError):
        dominance_check(-8)


@pytest.mark.parametrize(
    "disc, fields",
    [(-15, {5}), (-24, {2}), (-96, {2, 3, 6}), (-4, set()), (-960, {2, 3, 5, 6, 10, 15, 30})],
)
def test_quadratic_subfields(disc, fields):
    s = quadratic_subfields(disc)
    assert s.quadratic_subfields == fields
    if s.degree > 1:
        assert len(s.quadratic_subfields) == s.degree - 1


def test_quadratic_subfields_rejects_non_two_torsion():
    with pytest.raises(ValueError):
        quadratic_subfields(-23)


def test_subfields_match_polynomial_discriminant():
    for d in list_by_class_number(500, 2):
        c, b, _ = hilbert_class_polynomial(d).coefficients
        (field,) = quadratic_subfields(d).quadratic_subfields
        assert field == squarefree_part(b * b - 4 * c)


def test_degenerate_subfield(monkeypatch):
    import cm_atlas.modular as m

    monkeypatch.setattr(m, "conjugate_roots", lambda disc, prec: {f: mpmath.mpc(7) for f in enumerate_reduced(disc)})
    m.quadratic_subfields.cache_clear()
    try:
        with pytest.raises(DegenerateSubfieldError):
            m.quadratic_subfields(-15)
    finally:
        m.quadratic_subfields.cache_clear()


def test_field_equality():
    assert field_equal_exp2(-15, -20)
    assert not field_equal_exp2(-15, -24)
    assert field_equal_exp2(-96, -96)
    assert not field_equal_exp2(-15, -96)


def test_phi2_exact():
    assert phi2_residual(1728, 287496) == 0
    H7 = hilbert_class_polynomial(-7).coefficients
    H28 = hilbert_class_polynomial(-28).coefficients
    j7, j28 = -H7[0], -H28[0]
    assert (j7, j28) == (-3375, 16581375)
    assert phi2_residual(j7, j28) == 0
    # j = 1728 has a degree-2 endomorphism, so it is 2-isogenous to itself
    assert phi2_residual(1728, 1728) == 0
    assert phi2_residual(0, 1728) != 0


def test_phi2_symmetric():
    rng = random.Random(4)
    for _ in range(100):
        a, b = rng.randint(-10**9, 10**9), rng.randint(-10**9, 10**9)
        assert phi2_residual(a, b) == phi2_residual(b, a)


def test_phi2_float():
    with mpmath.workprec(200):
        r = phi2_residual(eval_j(1j, 180), eval_j(2j, 180))
    assert abs(r) < 1e-20


def test_weinberger_roots_real_and_dominated():
    from cm_atlas.orders import weinberger_scan

    for d in weinberger_scan():
        roots = conjugate_roots(d, 96)
        assert all(abs(v.imag) <= 1e-6 * max(1, abs(v)) for v in roots.values())
        if len(roots) > 1:
            assert dominance_check(d).max_ratio <= 0.1

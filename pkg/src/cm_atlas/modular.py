"""The j-function at high precision, Hilbert class polynomials, and the
quadratic subfields of Q(j(tau)) for 2-torsion class groups."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mpc, mpf

from .arith import squarefree_part
from .qforms import Form, check_discriminant, class_group, enumerate_reduced

MAX_PRECISION = 1 << 17
ROUNDING_TOLERANCE = mpf(2) ** -20
MAX_RETRIES = 3
DEFAULT_GUARD_BITS = 64


class PrecisionError(ArithmeticError):
    pass


class DegenerateSubfieldError(ArithmeticError):
    pass


@lru_cache(maxsize=8)
def _divisor_power_sums(n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    s3 = [0] * (n + 1)
    s5 = [0] * (n + 1)
    for d in range(1, n + 1):
        d3, d5 = d**3, d**5
        for m in range(d, n + 1, d):
            s3[m] += d3
            s5[m] += d5
    return tuple(s3), tuple(s5)


def to_fundamental_domain(tau):
    """Move tau into the standard fundamental domain of SL2(Z)."""
    tau = mpc(tau)
    for _ in range(10_000):
        tau -= mpmath.nint(tau.real)
        if abs(tau) < 1:
            tau = -1 / tau
        else:
            return tau
    raise PrecisionError("fundamental domain reduction did not terminate")


def eval_j(tau, prec: int = 128):
    """j(tau) via j = 1728 E4^3 / (E4^3 - E6^2), accurate to about prec bits."""
    if prec < 64:
        raise ValueError("prec must be at least 64 bits")
    if prec > MAX_PRECISION:
        raise ValueError(f"precision {prec} exceeds ceiling {MAX_PRECISION}")
    with mpmath.workprec(prec + 32):
        tau = mpc(tau)
        if tau.imag <= 0:
            raise ValueError("tau must lie in the upper half plane")
        tau = to_fundamental_domain(tau)
        y = tau.imag
    # E4^3 - E6^2 is about 1728 q, so the difference eats log2(1/|q|) bits
    lost = int(mpmath.ceil(2 * mpmath.pi * y / mpmath.log(2)))
    wp = prec + 32 + lost
    with mpmath.workprec(wp):
        tau = mpc(tau)
        q = mpmath.expjpi(2 * tau)
        log_q = float(2 * mpmath.pi * tau.imag)  # -log|q|
        # sigma_5(n) |q|^n < n^6 |q|^n; stop once that drops below 2^-wp
        nterms = 1
        while nterms * log_q - 6 * math.log(nterms) < wp * math.log(2) + 16:
            nterms += 1
        s3, s5 = _divisor_power_sums(nterms)
        e4 = mpc(0)
        e6 = mpc(0)
        for n in range(nterms, 0, -1):
            e4 = (e4 + s3[n]) * q
            e6 = (e6 + s5[n]) * q
        e4 = 1 + 240 * e4
        e6 = 1 - 504 * e6
        e43 = e4**3
        return 1728 * e43 / (e43 - e6 * e6)


def cm_tau(f: Form):
    """The CM point (-b + sqrt(disc)) / (2a) of a form."""
    return mpc(-f.b, mpmath.sqrt(-f.disc)) / (2 * f.a)


def conjugate_roots(disc: int, prec: int = 128) -> dict[Form, mpc]:
    """One j-value per reduced form, keyed by the form (its class)."""
    out = {}
    with mpmath.workprec(prec + 16):
        for f in enumerate_reduced(disc):
            out[f] = eval_j(cm_tau(f), prec)
    return out


def hcp_precision(disc: int, guard_bits: int = DEFAULT_GUARD_BITS) -> int:
    forms = enumerate_reduced(disc)
    size = math.pi * math.sqrt(-disc) * sum(1 / f.a for f in forms) / math.log(2)
    return math.ceil(size) + 16 * len(forms) + guard_bits


def _format_poly(coeffs) -> str:
    n = len(coeffs) - 1
    out = ""
    for k in range(n, -1, -1):
        c = coeffs[k]
        if c == 0 and k != n:
            continue
        if k == 0:
            mono = str(abs(c))
        else:
            mono = "x" if k == 1 else f"x^{k}"
            if abs(c) != 1:
                mono = f"{abs(c)}*{mono}"
        if k == n:
            out = ("-" if c < 0 else "") + mono
        else:
            out += (" - " if c < 0 else " + ") + mono
    return out


@dataclass(frozen=True)
class HilbertPolynomial:
    disc: int
    coefficients: tuple[int, ...]  # lowest degree first
    max_residual: float = field(default=0.0, compare=False)
    precision: int = field(default=0, compare=False)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def __str__(self):
        return _format_poly(self.coefficients)


def _expand(roots):
    coeffs = [mpc(1)]
    for r in roots:
        nxt = [mpc(0)] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k + 1] += c
            nxt[k] -= r * c
        coeffs = nxt
    return coeffs


def _round_all(values):
    ints, worst = [], mpf(0)
    for v in values:
        n = int(mpmath.nint(v.real))
        worst = max(worst, abs(v.real - n), abs(v.imag))
        ints.append(n)
    return ints, worst


def hilbert_class_polynomial(disc: int, guard_bits: int = DEFAULT_GUARD_BITS) -> HilbertPolynomial:
    check_discriminant(disc)
    prec = hcp_precision(disc, guard_bits)
    for _ in range(MAX_RETRIES + 1):
        roots = conjugate_roots(disc, prec)
        with mpmath.workprec(prec):
            ints, worst = _round_all(_expand(roots.values()))
        if worst < ROUNDING_TOLERANCE:
            return HilbertPolynomial(disc, tuple(ints), float(worst), prec)
        prec *= 2
    raise PrecisionError(f"H_{disc}: rounding residual {worst} after {MAX_RETRIES} retries")


@dataclass(frozen=True)
class DominanceReport:
    disc: int
    dominant: mpc
    max_ratio: float


def dominance_check(disc: int, prec: int = 64) -> DominanceReport:
    """Largest |j(tau')| / |j(tau)| over the non-dominant conjugates."""
    check_discriminant(disc)
    if -disc < 11:
        raise ValueError("dominance needs |disc| >= 11")
    roots = conjugate_roots(disc, prec)
    if len(roots) < 2:
        raise ValueError(f"class number of {disc} is 1; no other conjugate")
    items = list(roots.items())
    (f0, dom), rest = items[0], items[1:]
    assert f0.a == 1
    ratio = max(abs(v) for _, v in rest) / abs(dom)
    return DominanceReport(disc, dom, float(ratio))


def fourier_gap(z, prec: int = 64) -> float:
    """| |j(z)| - |1/q_z| | for z in the upper half plane."""
    with mpmath.workprec(prec + 32):
        z = mpc(z)
        q = mpmath.expjpi(2 * z)
        return float(abs(abs(eval_j(z, prec)) - 1 / abs(q)))


@dataclass(frozen=True)
class SubfieldSet:
    disc: int
    degree: int
    quadratic_subfields: frozenset[int]


def _f2_coordinates(group) -> tuple[list[int], int]:
    """Coordinates of each element of an elementary abelian 2-group over F2."""
    h = group.order
    coords = [-1] * h
    coords[0] = 0
    members = [0]
    rank = 0
    for g in range(h):
        if coords[g] != -1:
            continue
        for x in list(members):
            y = group.mul(x, g)
            coords[y] = coords[x] | (1 << rank)
            members.append(y)
        rank += 1
    return coords, rank


def _is_two_torsion_group(group) -> bool:
    return all(d == 2 for d in group.elementary_divisors)


@lru_cache(maxsize=512)
def quadratic_subfields(disc: int, guard_bits: int = DEFAULT_GUARD_BITS) -> SubfieldSet:
    """Quadratic subfields Q(sqrt d) of Q(j(tau)), found from the signed
    sums of the conjugates over each index-2 subgroup of the class group."""
    group = class_group(disc)
    if not _is_two_torsion_group(group):
        raise ValueError(f"class group of {disc} is not annihilated by 2")
    h = group.order
    if h == 1:
        return SubfieldSet(disc, 1, frozenset())
    coords, rank = _f2_coordinates(group)
    # t_H is about |j_dominant|^2
    prec = max(
        hcp_precision(disc, guard_bits),
        math.ceil(2 * math.pi * math.sqrt(-disc) / math.log(2)) + 16 * h + guard_bits,
    )
    for _ in range(MAX_RETRIES + 1):
        roots = conjugate_roots(disc, prec)
        js = [roots[f] for f in group.reduced_forms]
        fields = set()
        ok = True
        with mpmath.workprec(prec):
            for chi in range(1, 1 << rank):
                delta = mpc(0)
                for x in range(h):
                    sign = -1 if bin(coords[x] & chi).count("1") % 2 else 1
                    delta += sign * js[x]
                (t,), worst = _round_all([delta * delta])
                if worst >= ROUNDING_TOLERANCE:
                    ok = False
                    break
                if t <= 0 or math.isqrt(t) ** 2 == t:
                    raise DegenerateSubfieldError(f"disc {disc}: subgroup sum square {t} is not a non-square positive")
                fields.add(squarefree_part(t))
        if ok:
            return SubfieldSet(disc, h, frozenset(fields))
        prec *= 2
    raise PrecisionError(f"subfield sums for {disc} did not round cleanly")


def field_equal_exp2(disc1: int, disc2: int) -> bool:
    """Equality of Q(j) for two discriminants with 2-torsion class groups."""
    s1 = quadratic_subfields(disc1)
    s2 = quadratic_subfields(disc2)
    return s1.degree == s2.degree and s1.quadratic_subfields == s2.quadratic_subfields


def phi2_residual(x1, x2):
    """The level-2 modular polynomial at (x1, x2); exact for exact inputs."""
    return (
        -x1 * x1 * x2 * x2
        + x1**3
        + x2**3
        + 1488 * x1 * x1 * x2
        + 1488 * x1 * x2 * x2
        + 40773375 * x1 * x2
        - 162000 * x1 * x1
        - 162000 * x2 * x2
        + 8748000000 * x1
        + 8748000000 * x2
        - 157464000000000
    )

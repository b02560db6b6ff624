"""CM-points with rational or real quadratic coordinates, exact line
geometry, polynomial similarity and the end-to-end theorem checks."""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .arith import rational_root, squarefree_part
from .modular import HilbertPolynomial, field_equal_exp2, hilbert_class_polynomial, quadratic_subfields
from .orders import DEFAULT_SCAN_BOUND, counts_table, list_by_class_number, split_discriminant, weinberger_scan
from .qforms import class_group

HCPProvider = Callable[[int], HilbertPolynomial]

LEG_B_BOUND = 2000
EXPECTED_LEG_A_COUPLES = 15
EXPECTED_LEG_A_FIELDS = 6
EXPECTED_LEG_B = frozenset({-23, -31, -63, -39, -55})
EXPECTED_RATIONAL_POINTS = 169
EXPECTED_QUADRATIC_POINTS = 217
EXPECTED_CONJUGATE_POINTS = 29
EXPECTED_ORDERED_PAIRS = 94


@lru_cache(maxsize=None)
def default_hcp(disc: int) -> HilbertPolynomial:
    return hilbert_class_polynomial(disc)


# ---------------------------------------------------------------- numbers


@dataclass(frozen=True)
class QuadNum:
    """u + v*sqrt(d) with rational u, v; d = 1 and v = 0 for rationals."""

    u: Fraction
    v: Fraction = Fraction(0)
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "u", Fraction(self.u))
        object.__setattr__(self, "v", Fraction(self.v))
        if self.v == 0:
            object.__setattr__(self, "d", 1)
        elif self.d <= 1:
            raise ValueError("irrational part needs d > 1")

    @property
    def is_rational(self) -> bool:
        return self.v == 0

    def _common(self, other) -> tuple[QuadNum, int]:
        if not isinstance(other, QuadNum):
            other = QuadNum(Fraction(other))
        if self.d != other.d and self.d != 1 and other.d != 1:
            raise ValueError(f"incompatible fields Q(sqrt {self.d}) and Q(sqrt {other.d})")
        return other, max(self.d, other.d)

    def __add__(self, other):
        other, d = self._common(other)
        return QuadNum(self.u + other.u, self.v + other.v, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadNum(-self.u, -self.v, self.d)

    def __sub__(self, other):
        return self + (-other if isinstance(other, QuadNum) else -Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other, d = self._common(other)
        return QuadNum(self.u * other.u + self.v * other.v * d, self.u * other.v + self.v * other.u, d)

    __rmul__ = __mul__

    def conjugate(self) -> QuadNum:
        return QuadNum(self.u, -self.v, self.d)

    def __eq__(self, other):
        if not isinstance(other, QuadNum):
            try:
                other = QuadNum(Fraction(other))
            except (TypeError, ValueError):
                return NotImplemented
        return (self.u, self.v, self.d) == (other.u, other.v, other.d)

    def __hash__(self):
        return hash((self.u, self.v, self.d))

    def __float__(self):
        return float(self.u) + float(self.v) * math.sqrt(self.d)

    def __str__(self):
        if self.is_rational:
            return str(self.u)
        sign = "-" if self.v < 0 else "+"
        return f"{self.u} {sign} {abs(self.v)}*sqrt({self.d})"


def _q(x) -> QuadNum:
    return x if isinstance(x, QuadNum) else QuadNum(Fraction(x))


# ---------------------------------------------------------------- points and lines


@dataclass(frozen=True)
class CMPoint:
    coords: tuple[QuadNum, QuadNum]
    disc1: int
    disc2: int

    @property
    def x(self) -> QuadNum:
        return self.coords[0]

    @property
    def y(self) -> QuadNum:
        return self.coords[1]

    @property
    def is_rational(self) -> bool:
        return self.x.is_rational and self.y.is_rational

    def conjugate(self) -> CMPoint:
        return CMPoint((self.x.conjugate(), self.y.conjugate()), self.disc1, self.disc2)

    def swapped(self) -> CMPoint:
        return CMPoint((self.y, self.x), self.disc2, self.disc1)

    def __str__(self):
        return f"({self.x}, {self.y})"


@dataclass(frozen=True)
class RationalLine:
    """A1*x1 + A2*x2 + B = 0 with the first nonzero coefficient scaled to 1."""

    A1: Fraction
    A2: Fraction
    B: Fraction

    @classmethod
    def canonical(cls, A1, A2, B) -> RationalLine:
        A1, A2, B = Fraction(A1), Fraction(A2), Fraction(B)
        if A1 == 0 and A2 == 0:
            raise ValueError("degenerate line: A1 = A2 = 0")
        lead = A1 if A1 != 0 else A2
        return cls(A1 / lead, A2 / lead, B / lead)

    @classmethod
    def through(cls, p: CMPoint, q: CMPoint) -> RationalLine:
        if not (p.is_rational and q.is_rational):
            raise ValueError("both points must be rational")
        x1, y1, x2, y2 = p.x.u, p.y.u, q.x.u, q.y.u
        if (x1, y1) == (x2, y2):
            raise ValueError("points coincide")
        return cls.canonical(y2 - y1, x1 - x2, x2 * y1 - x1 * y2)

    def evaluate(self, p: CMPoint):
        return self.A1 * p.x + self.A2 * p.y + self.B

    def contains(self, p: CMPoint) -> bool:
        return _q(self.evaluate(p)) == 0

    def __str__(self):
        out = ""
        for coef, var in ((self.A1, "x1"), (self.A2, "x2"), (self.B, "")):
            if coef == 0:
                continue
            mag = abs(coef)
            term = var if (mag == 1 and var) else (f"{mag}*{var}" if var else str(mag))
            if not out:
                out = ("-" if coef < 0 else "") + term
            else:
                out += (" - " if coef < 0 else " + ") + term
        return out + " = 0"


def is_special_line(line: RationalLine) -> bool:
    """Vertical, horizontal, or the diagonal x1 = x2."""
    return line.A1 == 0 or line.A2 == 0 or (line.A1, line.A2, line.B) == (1, -1, 0)


def collinear(p1: CMPoint, p2: CMPoint, p3: CMPoint) -> bool:
    det = (p2.x - p1.x) * (p3.y - p1.y) - (p3.x - p1.x) * (p2.y - p1.y)
    return _q(det) == 0


def line_through_conjugates(p: CMPoint) -> RationalLine:
    """The rational line through a quadratic point and its conjugate."""
    x, y = p.x, p.y
    if x.is_rational and y.is_rational:
        raise ValueError("point is rational; it equals its conjugate")
    if not x.is_rational and not y.is_rational and x.d != y.d:
        raise ValueError("coordinates lie in different quadratic fields")
    # A1 = y - y', A2 = x' - x, B = x y' - x' y, all divided by sqrt(d)
    return RationalLine.canonical(2 * y.v, -2 * x.v, 2 * (x.v * y.u - x.u * y.v))


# ---------------------------------------------------------------- similarity


@dataclass(frozen=True)
class SimilarityWitness:
    alpha: Fraction
    beta: Fraction
    lam: Fraction


def _coeffs(p) -> list[Fraction]:
    cs = p.coefficients if isinstance(p, HilbertPolynomial) else p
    return [Fraction(c) for c in cs]


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def substitute_linear(p: Sequence, alpha, beta) -> list[Fraction]:
    """Coefficients of p(alpha*x + beta), lowest degree first."""
    out = [Fraction(0)]
    lin = [Fraction(beta), Fraction(alpha)]
    for c in reversed(_coeffs(p)):
        out = _poly_mul(out, lin)
        out[0] += c
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _depress(cs: list[Fraction]) -> tuple[list[Fraction], Fraction]:
    n = len(cs) - 1
    shift = -cs[n - 1] / (n * cs[n])
    return substitute_linear(cs, 1, shift), shift


def similar(f, g) -> SimilarityWitness | None:
    """Rational (alpha, beta, lam), alpha*lam != 0, with f(alpha x + beta) = lam g(x)."""
    fc, gc = _coeffs(f), _coeffs(g)
    n = len(fc) - 1
    if n < 1 or len(gc) - 1 < 1:
        raise ValueError("polynomials must have degree >= 1")
    if len(gc) - 1 != n:
        return None
    fd, sf = _depress(fc)
    gd, sg = _depress(gc)
    # f~(alpha y) = lam g~(y) with lam = lead_f alpha^n / lead_g
    ratio = fc[n] / gc[n]
    candidates: list[Fraction] = [Fraction(1)]
    for j in range(n - 1, -1, -1):
        a, b = fd[j], gd[j]
        if (a == 0) != (b == 0):
            return None
        if a == 0:
            continue
        k = n - j
        r = a / (b * ratio)
        root = rational_root(abs(r), k)
        if root is None:
            return None
        if k % 2:
            candidates = [root if r > 0 else -root]
        elif r < 0:
            return None
        else:
            candidates = [root, -root]
        break
    for alpha in candidates:
        beta = sf - alpha * sg
        lam = ratio * alpha**n
        if substitute_linear(fc, alpha, beta) == [lam * c for c in gc]:
            return SimilarityWitness(alpha, beta, lam)
    return None


# ---------------------------------------------------------------- enumeration


def rational_cm_points(hcp: HCPProvider = default_hcp, bound: int = DEFAULT_SCAN_BOUND) -> list[CMPoint]:
    """All (j1, j2) with both coordinates rational CM j-invariants."""
    discs = list_by_class_number(bound, 1)
    values = [(d, QuadNum(Fraction(-hcp(d).coefficients[0]))) for d in discs]
    return [CMPoint((x, y), d1, d2) for (d1, x), (d2, y) in itertools.product(values, repeat=2)]


def quadratic_roots(H: HilbertPolynomial) -> tuple[QuadNum, QuadNum]:
    """(dominant, other) roots of a degree-2 class polynomial, exactly."""
    if H.degree != 2:
        raise ValueError(f"H_{H.disc} has degree {H.degree}, not 2")
    c, b, _ = H.coefficients
    pd = b * b - 4 * c
    d = squarefree_part(pd)
    m = math.isqrt(pd // d)
    assert m * m * d == pd and d > 1
    # the dominant root has the sign of -b
    s = -1 if b > 0 else 1
    dom = QuadNum(Fraction(-b, 2), Fraction(s * m, 2), d)
    return dom, dom.conjugate()


@dataclass
class QuadraticInventory:
    points: list[CMPoint]
    conjugate_points: list[CMPoint]
    pair_points: list[CMPoint]
    ordered_pairs: list[tuple[int, int]]
    same_order_field_pairs: list[tuple[int, int]]


def quadratic_inventory(hcp: HCPProvider = default_hcp, bound: int = DEFAULT_SCAN_BOUND) -> QuadraticInventory:
    discs = list_by_class_number(bound, 2)
    roots = {}
    for d in discs:
        dom, other = quadratic_roots(hcp(d))
        (sub,) = quadratic_subfields(d).quadratic_subfields
        if sub != dom.d:
            raise ArithmeticError(f"field mismatch for {d}: polynomial gives {dom.d}, subgroup sums give {sub}")
        roots[d] = (dom, other)
    conj = [CMPoint(roots[d], d, d) for d in discs]
    pairs = [(d1, d2) for d1 in discs for d2 in discs if d1 != d2 and field_equal_exp2(d1, d2)]
    pair_points = []
    for d1, d2 in pairs:
        x = roots[d1][0]
        for y in roots[d2]:
            pair_points.append(CMPoint((x, y), d1, d2))
    same_K = sorted(
        {tuple(sorted((d1, d2), reverse=True)) for d1, d2 in pairs if split_discriminant(d1).D == split_discriminant(d2).D},
        reverse=True,
    )
    return QuadraticInventory(conj + pair_points, conj, pair_points, pairs, same_K)


def quadratic_cm_points(hcp: HCPProvider = default_hcp, bound: int = DEFAULT_SCAN_BOUND) -> list[CMPoint]:
    return quadratic_inventory(hcp, bound).points


# ---------------------------------------------------------------- scans


def scan_collinear_rational(points: Sequence[CMPoint], allow_diagonal: bool = False) -> list[tuple[CMPoint, CMPoint, CMPoint]]:
    """Triples of rational points sharing a non-special rational line."""
    incidence: dict[RationalLine, set[int]] = defaultdict(set)
    for i, j in itertools.combinations(range(len(points)), 2):
        line = RationalLine.through(points[i], points[j])
        if is_special_line(line) and not (allow_diagonal and (line.A1, line.A2, line.B) == (1, -1, 0)):
            continue
        incidence[line].update((i, j))
    triples = set()
    for members in incidence.values():
        if len(members) >= 3:
            triples.update(itertools.combinations(sorted(members), 3))
    return [tuple(points[k] for k in t) for t in sorted(triples)]


def _triple_key(t):
    return sorted((abs(p.disc1), abs(p.disc2)) for p in t)


def swap_triple(t):
    return tuple(sorted((p.swapped() for p in t), key=lambda p: (abs(p.disc1), abs(p.disc2))))


def up_to_swap(triples):
    """One representative per orbit of the coordinate swap x1 <-> x2."""
    reps = []
    for t in triples:
        if _triple_key(t) <= _triple_key(swap_triple(t)):
            reps.append(t)
    return reps


@dataclass
class LineAudit:
    lines: list[RationalLine]
    distinct: int
    special: list[int] = field(default_factory=list)
    duplicates: list[tuple[int, int]] = field(default_factory=list)
    rational_hits: list[tuple[int, int]] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return len(self.special) + len(self.duplicates) + len(self.rational_hits)


def quadratic_line_audit(quadratic: Sequence[CMPoint], rational: Sequence[CMPoint]) -> LineAudit:
    lines = [line_through_conjugates(p) for p in quadratic]
    seen: dict[RationalLine, int] = {}
    audit = LineAudit(lines, len(set(lines)))
    for i, line in enumerate(lines):
        if line in seen:
            audit.duplicates.append((seen[line], i))
        else:
            seen[line] = i
        if is_special_line(line):
            audit.special.append(i)
        for k, r in enumerate(rational):
            if line.contains(r):
                audit.rational_hits.append((i, k))
    return audit


# ---------------------------------------------------------------- Table 2


def _generators(subfields) -> tuple[int, ...]:
    """Smallest squarefree d's whose products give every subfield."""
    span = {1}
    gens = []
    for d in sorted(subfields):
        if d not in span:
            gens.append(d)
            span |= {squarefree_part(s * d) for s in span}
    return tuple(gens)


@dataclass(frozen=True)
class Table2Row:
    generators: tuple[int, ...]
    subfields: tuple[int, ...]
    degree: int
    discriminants: tuple[int, ...]
    class_group: tuple[int, ...]

    @property
    def label(self) -> str:
        if not self.generators:
            return "Q"
        return "Q(" + ",".join(f"sqrt{d}" for d in self.generators) + ")"


def build_table2(bound: int = DEFAULT_SCAN_BOUND) -> list[Table2Row]:
    groups: dict[tuple, list[int]] = defaultdict(list)
    for disc in sorted(weinberger_scan(bound), reverse=True):
        s = quadratic_subfields(disc)
        groups[(s.degree, tuple(sorted(s.quadratic_subfields)))].append(disc)
    rows = []
    for (degree, subs), discs in groups.items():
        if len({split_discriminant(d).D for d in discs}) < 2:
            continue
        shapes = {class_group(d).elementary_divisors for d in discs}
        assert len(shapes) == 1
        rows.append(Table2Row(_generators(subs), subs, degree, tuple(discs), shapes.pop()))
    rows.sort(key=lambda r: (r.degree, r.generators))
    return rows


# ---------------------------------------------------------------- theorem legs


def leg_a_couples(table: Sequence[Table2Row]) -> list[tuple[int, int, str]]:
    couples = []
    for row in table:
        if row.degree < 3:
            continue
        for d1, d2 in itertools.combinations(row.discriminants, 2):
            if split_discriminant(d1).D != split_discriminant(d2).D:
                couples.append((d1, d2, row.label))
    return couples


def leg_b_discriminants(bound: int = LEG_B_BOUND) -> list[int]:
    """Discriminants with h(disc) = h(4 disc) in {3, 4}."""
    h, _ = counts_table(4 * bound)
    return [-n for n in range(3, bound + 1) if h[n] in (3, 4) and h[4 * n] == h[n]]


def _witness_json(w: SimilarityWitness | None):
    return None if w is None else {"alpha": str(w.alpha), "beta": str(w.beta), "lambda": str(w.lam)}


def verify_theorem(hcp: HCPProvider = default_hcp, bound: int = DEFAULT_SCAN_BOUND, leg_b_bound: int = LEG_B_BOUND) -> dict:
    table = build_table2(bound)
    couples = leg_a_couples(table)
    fields = sorted({label for _, _, label in couples})
    checks_a = [
        {"disc1": d1, "disc2": d2, "field": label, "witness": _witness_json(similar(hcp(d1), hcp(d2)))}
        for d1, d2, label in couples
    ]
    leg_a = {
        "couples": checks_a,
        "couple_count": len(couples),
        "fields": fields,
        "field_count": len(fields),
        "pass": len(couples) == EXPECTED_LEG_A_COUPLES
        and len(fields) == EXPECTED_LEG_A_FIELDS
        and all(c["witness"] is None for c in checks_a),
    }

    found_b = leg_b_discriminants(leg_b_bound)
    checks_b = [
        {"disc": d, "class_number": hcp(d).degree, "witness": _witness_json(similar(hcp(d), hcp(4 * d)))}
        for d in found_b
    ]
    leg_b = {
        "bound": leg_b_bound,
        "discriminants": found_b,
        "checks": checks_b,
        "pass": set(found_b) == EXPECTED_LEG_B and all(c["witness"] is None for c in checks_b),
    }

    rational = rational_cm_points(hcp, bound)
    inv = quadratic_inventory(hcp, bound)
    exceptions = {
        "rational_points": len(rational),
        "quadratic_points": len(inv.points),
        "conjugate_points": len(inv.conjugate_points),
        "pair_points": len(inv.pair_points),
        "ordered_pairs": len(inv.ordered_pairs),
        "same_order_field_pairs": [list(p) for p in inv.same_order_field_pairs],
        "pass": len(rational) == EXPECTED_RATIONAL_POINTS
        and len(inv.points) == EXPECTED_QUADRATIC_POINTS
        and len(inv.conjugate_points) == EXPECTED_CONJUGATE_POINTS
        and len(inv.ordered_pairs) == EXPECTED_ORDERED_PAIRS,
    }
    return {
        "legA": leg_a,
        "legB": leg_b,
        "exceptions": exceptions,
        "similarity_checks": len(checks_a) + len(checks_b),
        "pass": leg_a["pass"] and leg_b["pass"] and exceptions["pass"],
    }

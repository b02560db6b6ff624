"""Positive definite binary quadratic forms and form class groups."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import NamedTuple

from .arith import factorize


class Form(NamedTuple):
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def __str__(self):
        return f"({self.a},{self.b},{self.c})"


def check_discriminant(disc: int) -> None:
    if disc >= 0 or disc % 4 not in (0, 1):
        raise ValueError(f"{disc} is not a negative discriminant (need disc < 0, disc = 0,1 mod 4)")


def _check_form(f: Form) -> None:
    if f.disc >= 0 or f.a <= 0:
        raise ValueError(f"{f} is not positive definite")
    if math.gcd(f.a, f.b, f.c) != 1:
        raise ValueError(f"{f} is not primitive")


def is_reduced(f: Form) -> bool:
    a, b, c = f
    return (-a < b <= a < c) or (0 <= b <= a == c)


def is_ambiguous(f: Form) -> bool:
    """A reduced form whose class is its own inverse."""
    return f.b == 0 or f.a == f.b or f.a == f.c


def reduce(f: Form) -> Form:
    f = Form(*f)
    _check_form(f)
    a, b, c = f
    while True:
        if not -a < b <= a:
            r = (a - b) // (2 * a)
            b, c = b + 2 * r * a, a * r * r + b * r + c
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            continue
        return Form(a, b, c)


def identity_form(disc: int) -> Form:
    check_discriminant(disc)
    r = disc % 4
    return Form(1, r, (r - disc) // 4)


def inverse(f: Form) -> Form:
    return reduce(Form(f.a, -f.b, f.c))


@lru_cache(maxsize=4096)
def enumerate_reduced(disc: int) -> tuple[Form, ...]:
    """All reduced primitive forms of discriminant disc, sorted by (a, b)."""
    check_discriminant(disc)
    n = -disc
    out = []
    a = 1
    while 3 * a * a <= n:
        for b in range(-a + 1, a + 1):
            if (b * b + n) % (4 * a):
                continue
            c = (b * b + n) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(a, b, c) == 1:
                out.append(Form(a, b, c))
        a += 1
    return tuple(out)


def class_number(disc: int) -> int:
    return len(enumerate_reduced(disc))


def _with_leading_coprime(g: Form, m: int) -> Form:
    """An equivalent form to g whose first coefficient is coprime to m."""
    if math.gcd(g.a, m) == 1:
        return g
    radius = 32
    while True:
        for x, y in _primitive_vectors(radius):
            v = g(x, y)
            if math.gcd(v, m) != 1:
                continue
            # complete (x, y) to a unimodular matrix [[x, r], [y, s]]
            _, s, r = _ext_gcd(x, -y)
            assert x * s - y * r == 1
            b2 = 2 * g.a * x * r + g.b * (x * s + r * y) + 2 * g.c * y * s
            return Form(v, b2, g(r, s))
        radius *= 2


@lru_cache(maxsize=8)
def _primitive_vectors(radius: int) -> tuple[tuple[int, int], ...]:
    pts = [p for p in product(range(-radius, radius + 1), repeat=2) if math.gcd(*p) == 1]
    return tuple(sorted(pts, key=lambda p: (abs(p[0]) + abs(p[1]), p)))


def _ext_gcd(u: int, v: int) -> tuple[int, int, int]:
    """(g, s, t) with s*u + t*v = g = gcd(u, v) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while v:
        q, rem = divmod(u, v)
        u, v = v, rem
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if u < 0:
        u, s0, t0 = -u, -s0, -t0
    return u, s0, t0


def compose(f: Form, g: Form) -> Form:
    """Reduced representative of the product class of f and g."""
    f, g = Form(*f), Form(*g)
    _check_form(f)
    _check_form(g)
    disc = f.disc
    if g.disc != disc:
        raise ValueError(f"discriminant mismatch: {f.disc} vs {g.disc}")
    g = _with_leading_coprime(g, f.a)
    a1, b1 = f.a, f.b
    a2, b2 = g.a, g.b
    k = pow(a1, -1, a2) * ((b2 - b1) // 2) % a2 if a2 > 1 else 0
    B = b1 + 2 * a1 * k
    A = a1 * a2
    C, rem = divmod(B * B - disc, 4 * A)
    assert rem == 0
    return reduce(Form(A, B, C))


def power(f: Form, n: int) -> Form:
    result = identity_form(f.disc)
    base = reduce(f)
    if n < 0:
        base, n = inverse(base), -n
    while n:
        if n & 1:
            result = compose(result, base)
        base = compose(base, base)
        n >>= 1
    return result


@dataclass(frozen=True)
class FormClassGroup:
    disc: int
    reduced_forms: tuple[Form, ...]
    elementary_divisors: tuple[int, ...]
    table: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.reduced_forms)

    def index(self, f: Form) -> int:
        return self.reduced_forms.index(reduce(f))

    def mul(self, i: int, j: int) -> int:
        return self.table[i][j]

    @property
    def identity(self) -> int:
        return 0  # the a = 1 form sorts first


def _element_order(table, i: int) -> int:
    n, x = 1, i
    while x != 0:
        x = table[x][i]
        n += 1
    return n


def _elementary_divisors(table) -> tuple[int, ...]:
    h = len(table)
    if h == 1:
        return ()
    orders = [_element_order(table, i) for i in range(h)]
    # exponents of the p-primary part from |G[p^k]| = p^(sum_i min(k, e_i))
    invariants: list[list[int]] = []
    for p in factorize(h).primes:
        prev_log = 0
        at_least = []
        k = 1
        while True:
            count = sum(1 for o in orders if p**k % o == 0)
            log = round(math.log(count, p))
            assert p**log == count
            if log == prev_log:
                break
            at_least.append(log - prev_log)
            prev_log = log
            k += 1
        # at_least[k-1] = #{i : e_i >= k}; conjugate partition gives the e_i
        exps = [sum(1 for r in at_least if r > j) for j in range(at_least[0])]
        invariants.append(sorted((p**e for e in exps), reverse=True))
    width = max(len(v) for v in invariants)
    divisors = []
    for j in range(width):
        d = 1
        for v in invariants:
            if j < len(v):
                d *= v[j]
        divisors.append(d)
    return tuple(sorted(divisors))


@lru_cache(maxsize=1024)
def class_group(disc: int) -> FormClassGroup:
    forms = enumerate_reduced(disc)
    pos = {f: i for i, f in enumerate(forms)}
    table = tuple(tuple(pos[compose(f, g)] for g in forms) for f in forms)
    return FormClassGroup(disc, forms, _elementary_divisors(table), table)


def is_two_torsion(disc: int) -> bool:
    """True iff every class squares to the identity."""
    e = identity_form(disc)
    return all(compose(f, f) == e for f in enumerate_reduced(disc))

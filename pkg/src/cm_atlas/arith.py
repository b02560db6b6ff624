"""Exact integer helpers: factorization, Kronecker symbol, squarefree kernels."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

TRIAL_LIMIT = 10_000


def _sieve(n: int) -> list[int]:
    flags = bytearray(b"\x01") * (n + 1)
    flags[:2] = b"\x00\x00"
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = bytes(len(range(p * p, n + 1, p)))
    return [i for i, v in enumerate(flags) if v]


SMALL_PRIMES = _sieve(TRIAL_LIMIT)


@dataclass(frozen=True)
class Factorization:
    sign: int
    primes: dict[int, int] = field(default_factory=dict)

    def value(self) -> int:
        n = self.sign
        for p, e in self.primes.items():
            n *= p**e
        return n

    def __str__(self):
        parts = [f"{p}^{e}" if e > 1 else str(p) for p, e in sorted(self.primes.items())]
        if self.sign < 0:
            parts.insert(0, "-1")
        return "*".join(parts) or "1"


def _strip_small(n: int) -> tuple[dict[int, int], int]:
    """Divide out primes below TRIAL_LIMIT; return exponents and the cofactor."""
    exps: dict[int, int] = {}
    for p in SMALL_PRIMES:
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            exps[p] = e
    return exps, n


def factorize(n: int) -> Factorization:
    if n == 0:
        raise ValueError("cannot factor 0")
    sign = -1 if n < 0 else 1
    exps, m = _strip_small(abs(n))
    # cofactor may still be composite if it exceeds TRIAL_LIMIT**2
    p = SMALL_PRIMES[-1] + 2
    while m > 1 and p * p <= m:
        while m % p == 0:
            m //= p
            exps[p] = exps.get(p, 0) + 1
        p += 2
    if m > 1:
        exps[m] = exps.get(m, 0) + 1
    return Factorization(sign, dict(sorted(exps.items())))


def omega(n: int) -> int:
    """Number of distinct prime divisors of n."""
    return len(factorize(n).primes)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n >= 1."""
    if n < 1:
        raise ValueError("n must be positive")
    if a % 2 == 0 and n % 2 == 0:
        return 0
    v = (n & -n).bit_length() - 1
    n >>= v
    k = 1
    if v % 2 and a % 8 in (3, 5):
        k = -1
    a %= n
    while a:
        v = (a & -a).bit_length() - 1
        a >>= v
        if v % 2 and n % 8 in (3, 5):
            k = -k
        if a % 4 == 3 and n % 4 == 3:
            k = -k
        a, n = n % a, a
    return k if n == 1 else 0


def squarefree_part(n: int) -> int:
    """Squarefree m with n = m*s^2, sign of n kept.

    Primes below TRIAL_LIMIT are removed by trial division.  A larger
    cofactor is accepted when it is prime (below TRIAL_LIMIT**2) or a perfect
    square; otherwise ValueError is raised.  Large inputs coming from class
    polynomials are of the second kind.
    """
    if n == 0:
        raise ValueError("squarefree part of 0 is undefined")
    sign = -1 if n < 0 else 1
    exps, m = _strip_small(abs(n))
    out = sign
    for p, e in exps.items():
        if e % 2:
            out *= p
    if m == 1:
        return out
    if m < TRIAL_LIMIT**2:
        return out * m
    if gmpy2.is_square(m):
        return out
    raise ValueError(f"cofactor of {n} too large to classify by trial division")


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).primes.values())


def is_fundamental(d: int) -> bool:
    """True for fundamental discriminants (any sign, d != 0, 1)."""
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def rational_root(q: Fraction, k: int) -> Fraction | None:
    """Exact non-negative k-th root of a non-negative rational, or None."""
    if q < 0:
        raise ValueError("negative radicand")
    rn, ok_n = gmpy2.iroot(gmpy2.mpz(q.numerator), k)
    rd, ok_d = gmpy2.iroot(gmpy2.mpz(q.denominator), k)
    if ok_n and ok_d:
        return Fraction(int(rn), int(rd))
    return None

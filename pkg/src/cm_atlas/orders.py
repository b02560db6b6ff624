"""Imaginary quadratic orders: conductors, class numbers, discriminant scans."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .arith import factorize, is_fundamental, kronecker, squarefree_part
from .qforms import check_discriminant, class_number

DEFAULT_SCAN_BOUND = 10_000
STRETCH_SCAN_BOUND = 100_000


@dataclass(frozen=True)
class OrderDesc:
    disc: int
    D: int
    f: int


@dataclass(frozen=True)
class CompositumReport:
    f: int
    excess: int


def split_discriminant(disc: int) -> OrderDesc:
    """Write disc = D * f**2 with D fundamental."""
    check_discriminant(disc)
    m = squarefree_part(disc)
    D = m if m % 4 == 1 else 4 * m
    f = math.isqrt(disc // D)
    assert D * f * f == disc and is_fundamental(D)
    return OrderDesc(disc, D, f)


def unit_index(D: int, f: int) -> int:
    """[O_K^* : O^*] for the order of conductor f in Q(sqrt D)."""
    if f > 1 and D == -4:
        return 2
    if f > 1 and D == -3:
        return 3
    return 1


@lru_cache(maxsize=1 << 16)
def class_number_formula(D: int, f: int, h_D: int | None = None) -> int:
    """h(D f^2) from h(D) and the local factors at primes dividing f.

    Computed over exact rationals; a non-integral result raises
    ArithmeticError since it can only come from a bug.
    """
    if h_D is None:
        h_D = class_number(D)
    h = Fraction(f * h_D, unit_index(D, f))
    for p in factorize(f).primes:
        h *= 1 - Fraction(kronecker(D, p), p)
    if h.denominator != 1:
        raise ArithmeticError(f"non-integral class number {h} for D={D}, f={f}")
    return int(h)


def compositum_degree(D: int, f1: int, f2: int) -> CompositumReport:
    """Index of the compositum of the ring class fields of conductors f1, f2
    inside the ring class field of conductor lcm(f1, f2)."""
    if f1 < 1 or f2 < 1:
        raise ValueError("conductors must be positive")
    f = math.lcm(f1, f2)
    excess = 1
    if f1 > 1 and f2 > 1 and math.gcd(f1, f2) == 1:
        excess = {-4: 2, -3: 3}.get(D, 1)
    return CompositumReport(f, excess)


def pff2_consistent(D: int, f1: int, f2: int) -> bool:
    """Whether the class numbers allow Q(j(tau1)) = Q(j(tau2)) for two
    orders of the same field with conductors f1, f2."""
    rep = compositum_degree(D, f1, f2)
    h_D = class_number(D)
    h1 = class_number_formula(D, f1, h_D)
    h2 = class_number_formula(D, f2, h_D)
    h = class_number_formula(D, rep.f, h_D)
    return h1 == h2 and h1 * rep.excess == h


_table: tuple[np.ndarray, np.ndarray] | None = None


def counts_table(bound: int) -> tuple[np.ndarray, np.ndarray]:
    """(h, amb) arrays indexed by |disc| up to bound; read-only views of a
    shared table that only grows."""
    global _table
    if _table is None or len(_table[0]) <= bound:
        h, amb = _kernels.form_counts(bound)
        h.setflags(write=False)
        amb.setflags(write=False)
        _table = (h, amb)
    h, amb = _table
    return h[: bound + 1], amb[: bound + 1]


def weinberger_scan(bound: int = DEFAULT_SCAN_BOUND) -> list[int]:
    """Discriminants with |disc| <= bound whose class group is killed by 2."""
    if bound < 3:
        return []
    h, amb = counts_table(bound)
    n = np.nonzero((h > 0) & (amb == h))[0]
    return [-int(x) for x in n]


def list_by_class_number(bound: int, h: int) -> list[int]:
    hs, _ = counts_table(bound)
    return [-int(x) for x in np.nonzero(hs == h)[0]]


def class_numbers_upto(bound: int) -> dict[int, int]:
    hs, _ = counts_table(bound)
    return {-int(n): int(hs[n]) for n in np.nonzero(hs)[0]}

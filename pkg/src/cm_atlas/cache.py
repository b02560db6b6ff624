"""On-disk cache of Hilbert class polynomials.

One record per line, ``disc;c0,c1,...,ch`` in decimal with the lowest degree
first, sorted by ``|disc|``.
"""
from __future__ import annotations

import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .modular import HilbertPolynomial, hilbert_class_polynomial
from .qforms import class_number

log = logging.getLogger(__name__)

ENV_VAR = "CM_ATLAS_CACHE"


def default_cache_path() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "cm_atlas" / "hcp.txt"


def format_record(H: HilbertPolynomial) -> str:
    return f"{H.disc};" + ",".join(str(c) for c in H.coefficients)


def parse_record(line: str) -> HilbertPolynomial:
    head, _, body = line.strip().partition(";")
    disc = int(head)
    coeffs = tuple(int(c) for c in body.split(","))
    if coeffs[-1] != 1 or len(coeffs) - 1 != class_number(disc):
        raise ValueError(f"record for {disc} is not monic of the right degree")
    return HilbertPolynomial(disc, coeffs, 0.0, 0)


class HCPCache:
    """File-backed memo of class polynomials; the only writer of its file."""

    def __init__(self, path: str | os.PathLike | None = None, guard_bits: int = 64):
        self.path = Path(path) if path is not None else default_cache_path()
        self.guard_bits = guard_bits
        self._polys: dict[int, HilbertPolynomial] = {}
        self.hits = 0
        self.misses = 0
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        for lineno, line in enumerate(self.path.read_text().splitlines(), 1):
            if not line.strip():
                continue
            try:
                H = parse_record(line)
            except (ValueError, IndexError) as exc:
                log.warning("ignoring corrupt cache line %s:%d (%s)", self.path, lineno, exc)
                continue
            self._polys[H.disc] = H

    def __contains__(self, disc: int) -> bool:
        return disc in self._polys

    def load_hcp(self, disc: int) -> HilbertPolynomial | None:
        return self._polys.get(disc)

    def cache_hcp(self, H: HilbertPolynomial) -> None:
        self._polys[H.disc] = H
        self.flush()

    def flush(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        body = "".join(format_record(self._polys[d]) + "\n" for d in sorted(self._polys, key=abs))
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".hcp-")
        with os.fdopen(fd, "w") as fh:
            fh.write(body)
        os.replace(tmp, self.path)

    def __call__(self, disc: int) -> HilbertPolynomial:
        H = self._polys.get(disc)
        if H is not None:
            self.hits += 1
            return H
        self.misses += 1
        H = hilbert_class_polynomial(disc, self.guard_bits)
        self.cache_hcp(H)
        return H

    def prefetch(self, discs, workers: int = 1) -> None:
        """Compute missing polynomials, in parallel when workers > 1."""
        missing = sorted({d for d in discs if d not in self._polys}, key=abs)
        if not missing:
            return
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                polys = list(pool.map(hilbert_class_polynomial, missing, [self.guard_bits] * len(missing)))
        else:
            polys = [hilbert_class_polynomial(d, self.guard_bits) for d in missing]
        self.misses += len(polys)
        for H in polys:
            self._polys[H.disc] = H
        self.flush()


class MemoryHCP:
    """Provider with the cache interface but no file."""

    def __init__(self, guard_bits: int = 64):
        self.guard_bits = guard_bits
        self._polys: dict[int, HilbertPolynomial] = {}

    def __call__(self, disc: int) -> HilbertPolynomial:
        if disc not in self._polys:
            self._polys[disc] = hilbert_class_polynomial(disc, self.guard_bits)
        return self._polys[disc]

    def prefetch(self, discs, workers: int = 1) -> None:
        for d in discs:
            self(d)

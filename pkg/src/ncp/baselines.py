"""Ground-truth and comparison decoders.

``exhaustive_nearest`` scans all 2^n codewords (Gray order, one column XOR
per step) and is the oracle every other decoder is validated against.
``prange_decode`` is classic information-set decoding: guess n coordinates,
invert the restricted generator, accept if the full-length distance is
small enough.  Singular restrictions restart rather than repair the set, so
iteration counts stay comparable to the hit-probability model
(1 - eta)^-n for relative error rate eta.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .bitvec import BitVec
from .codes import ENUM_CAP, LinearCode, _check_cap
from .rng import RngStream


@dataclass(frozen=True)
class OracleResult:
    """Nearest codeword by full scan; ties report the lexicographically
    smallest message (coordinate 0 most significant) with unique=False."""

    x_star: BitVec
    distance: int
    unique: bool


def _lex_key(bits: int, n: int) -> int:
    """Bit-reversed value: compares like the coordinate-0-first bit string."""
    out = 0
    for i in range(n):
        out = (out << 1) | ((bits >> i) & 1)
    return out


def exhaustive_nearest(code: LinearCode, w: BitVec, cap: int = ENUM_CAP) -> OracleResult:
    """Exact minimum of wt(C x + w) over all 2^n messages."""
    _check_cap(code.n, "exhaustive_nearest", cap)
    if w.length != code.m:
        raise ValueError(f"word length {w.length} != m={code.m}")
    best_d = code.m + 1
    best_x = 0
    best_key = 0
    unique = True
    for x, cw in code.iter_codewords():
        d = (cw ^ w.bits).bit_count()
        if d < best_d:
            best_d = d
            best_x = x
            best_key = _lex_key(x, code.n)
            unique = True
        elif d == best_d:
            unique = False
            key = _lex_key(x, code.n)
            if key < best_key:
                best_x = x
                best_key = key
    return OracleResult(BitVec(code.n, best_x), best_d, unique)


@dataclass(frozen=True)
class PrangeResult:
    """Outcome of an information-set decoding run; message is None when the
    iteration budget ran out."""

    message: Optional[BitVec]
    iterations: int

    @property
    def found(self) -> bool:
        return self.message is not None


def _solve_square(rows: List[int], n: int, y: int) -> Optional[int]:
    """Solve the n x n system with rows as masks; None when singular."""
    aug = [r | (((y >> i) & 1) << n) for i, r in enumerate(rows)]
    for col in range(n):
        sel = next((k for k in range(col, n) if (aug[k] >> col) & 1), None)
        if sel is None:
            return None
        aug[col], aug[sel] = aug[sel], aug[col]
        for k in range(n):
            if k != col and (aug[k] >> col) & 1:
                aug[k] ^= aug[col]
    x = 0
    for col in range(n):
        x |= ((aug[col] >> n) & 1) << col
    return x


def prange_decode(
    code: LinearCode,
    w: BitVec,
    target_distance: int,
    rng: RngStream,
    max_iters: int = 10_000,
) -> PrangeResult:
    """Find a message whose codeword is within target_distance of w.

    Each iteration draws a uniform size-n information set, solves for the
    unique codeword agreeing with w there (restarting when the restricted
    generator is singular), and accepts on total distance.
    """
    if target_distance < 0:
        raise ValueError("target_distance must be non-negative")
    if w.length != code.m:
        raise ValueError(f"word length {w.length} != m={code.m}")
    m, n = code.m, code.n
    for it in range(1, max_iters + 1):
        order = np.argsort(rng.words(m), kind="stable")
        info = [int(i) for i in order[:n]]
        rows = [code.rows[i] for i in info]
        y = 0
        for k, i in enumerate(info):
            y |= w.get(i) << k
        x = _solve_square(rows, n, y)
        if x is None:
            continue
        xv = BitVec(n, x)
        if (code.encode(xv) ^ w).weight() <= target_distance:
            return PrangeResult(xv, it)
    return PrangeResult(None, max_iters)

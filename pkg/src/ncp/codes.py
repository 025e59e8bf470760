"""Binary linear codes: construction, auditing, and serialization.

A code is the column span {C*x : x in F2^n} of a full-rank m x n generator
C.  We store both views of C: the n columns (length-m masks, used to encode)
and the m rows (length-n masks, used as per-coordinate syndromes: the
syndrome of a word w is the XOR of the rows indexed by its support, and it
vanishes exactly on dual codewords).

The balance audit is exhaustive over the 2^n - 1 nonzero codewords up to a
cap; beyond the cap a sampling estimate is offered and labeled as such.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .bitvec import BitMatrix, BitVec, nullspace_basis, rank
from .rng import RngStream

log = logging.getLogger(__name__)

ENUM_CAP = 24  # messages enumerated exhaustively up to 2^ENUM_CAP codewords


class EnumerationCapError(ValueError):
    """Raised when an exhaustive enumeration would exceed the message cap."""


def _check_cap(n: int, what: str, cap: int = ENUM_CAP) -> None:
    if n > cap:
        raise EnumerationCapError(
            f"{what} enumerates 2^{n} codewords which exceeds the cap 2^{cap}; "
            "use the sampling variant instead"
        )


class LinearCode:
    """Full-rank binary linear code of blocklength m and message length n."""

    __slots__ = ("m", "n", "columns", "rows", "dual_basis", "_syn64")

    def __init__(self, m: int, columns: Tuple[int, ...]):
        n = len(columns)
        if not 1 <= n < m:
            raise ValueError(f"need m > n >= 1, got m={m}, n={n}")
        col_matrix = BitMatrix(m, columns)
        if rank(col_matrix) != n:
            raise ValueError("generator does not have full column rank")
        self.m = m
        self.n = n
        self.columns = tuple(columns)
        rows = [0] * m
        for j, c in enumerate(columns):
            while c:
                lsb = c & -c
                rows[lsb.bit_length() - 1] |= 1 << j
                c ^= lsb
        self.rows = tuple(rows)
        self.dual_basis = nullspace_basis(col_matrix)
        self._syn64 = (
            np.array(self.rows, dtype=np.uint64) if n <= 64 else None
        )

    @property
    def generator(self) -> BitMatrix:
        """The m x n generator, one length-n row per coordinate."""
        return BitMatrix(self.n, self.rows)

    @property
    def column_syndromes(self) -> Tuple[int, ...]:
        """Row i of the generator as an n-bit value (syndrome of unit vector i)."""
        return self.rows

    def syndromes_u64(self) -> np.ndarray:
        if self._syn64 is None:
            raise ValueError(f"n={self.n} exceeds 64; packed syndromes unavailable")
        return self._syn64

    def encode(self, x: BitVec) -> BitVec:
        """C*x as a length-m word."""
        if x.length != self.n:
            raise ValueError(f"message length {x.length} != n={self.n}")
        w = 0
        b = x.bits
        while b:
            lsb = b & -b
            w ^= self.columns[lsb.bit_length() - 1]
            b ^= lsb
        return BitVec(self.m, w)

    def syndrome(self, w: BitVec) -> int:
        """n-bit syndrome of w; zero exactly when w is a dual codeword."""
        if w.length != self.m:
            raise ValueError(f"word length {w.length} != m={self.m}")
        s = 0
        b = w.bits
        while b:
            lsb = b & -b
            s ^= self.rows[lsb.bit_length() - 1]
            b ^= lsb
        return s

    def is_dual(self, w: BitVec) -> bool:
        return self.syndrome(w) == 0

    def iter_codewords(self) -> Iterator[Tuple[int, int]]:
        """Yield (message_bits, codeword_bits) for all 2^n messages, Gray order."""
        x = 0
        cw = 0
        yield 0, 0
        for k in range(1, 1 << self.n):
            j = (k & -k).bit_length() - 1
            x ^= 1 << j
            cw ^= self.columns[j]
            yield x, cw

    def drop_column(self, i: int) -> "LinearCode":
        """Subcode generated by all columns except column i."""
        if not 0 <= i < self.n:
            raise IndexError(i)
        if self.n < 2:
            raise ValueError("cannot drop a column of an n=1 code")
        cols = self.columns[:i] + self.columns[i + 1 :]
        return LinearCode(self.m, cols)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, LinearCode)
            and self.m == other.m
            and self.columns == other.columns
        )

    def __hash__(self) -> int:
        return hash((self.m, self.columns))

    def __repr__(self) -> str:
        return f"<LinearCode m={self.m} n={self.n}>"


def random_code(m: int, n: int, rng: RngStream) -> LinearCode:
    """Uniformly random generator, resampled until it has full column rank."""
    if not 1 <= n < m:
        raise ValueError(f"need m > n >= 1, got m={m}, n={n}")
    while True:
        columns = tuple(rng.bits(m).bits for _ in range(n))
        try:
            return LinearCode(m, columns)
        except ValueError:
            continue  # rank-deficient draw, probability < 2^(n-m)


@dataclass(frozen=True)
class BalanceAudit:
    """Exact worst imbalance over nonzero codewords.

    ``imbalance`` is max |m - 2*wt(v)| as an integer, so beta_star is the
    exact rational imbalance/m rendered as a float; ``witness`` is a message
    achieving it.
    """

    m: int
    imbalance: int
    witness: BitVec
    exhaustive: bool = True

    @property
    def beta_star(self) -> float:
        return self.imbalance / self.m

    def passes(self, beta: float) -> bool:
        """Is every nonzero codeword beta-balanced?"""
        return self.imbalance <= beta * self.m


def audit_balance(code: LinearCode, cap: int = ENUM_CAP) -> BalanceAudit:
    """Exact max over all 2^n - 1 nonzero codewords of |1 - 2 wt(v)/m|."""
    _check_cap(code.n, "audit_balance", cap)
    worst = -1
    witness = 0
    it = code.iter_codewords()
    next(it)  # skip the zero codeword
    for x, cw in it:
        imb = abs(code.m - 2 * cw.bit_count())
        if imb > worst:
            worst = imb
            witness = x
    return BalanceAudit(code.m, worst, BitVec(code.n, witness))


def audit_balance_sampled(
    code: LinearCode, samples: int, rng: RngStream
) -> BalanceAudit:
    """Sampling lower-bound estimate of the worst imbalance (not exhaustive)."""
    worst = -1
    witness = 0
    for _ in range(samples):
        x = rng.bits(code.n)
        if x.bits == 0:
            continue
        imb = abs(code.m - 2 * code.encode(x).weight())
        if imb > worst:
            worst = imb
            witness = x.bits
    if worst < 0:
        raise ValueError("no nonzero message sampled; increase samples")
    return BalanceAudit(code.m, worst, BitVec(code.n, witness), exhaustive=False)


def dual_distance(code: LinearCode, weight_cap: int = 8) -> Optional[int]:
    """Minimum weight of a nonzero dual codeword, or None when above the cap.

    Searches supports of increasing weight; a support is dual exactly when
    the per-coordinate syndromes on it XOR to zero.  Weights 1 and 2 are
    closed-form scans; larger weights fall back to depth-first enumeration
    with incremental syndromes (fine for the small m where they matter).
    """
    if weight_cap < 1:
        raise ValueError("weight_cap must be at least 1")
    rows = code.rows
    m = code.m
    if any(r == 0 for r in rows):
        return 1
    if weight_cap >= 2:
        seen = {}
        for i, r in enumerate(rows):
            if r in seen:
                return 2
            seen[r] = i
    for w in range(3, weight_cap + 1):
        if _dfs_weight_w(rows, m, w):
            return w
    return None


def _dfs_weight_w(rows: Tuple[int, ...], m: int, w: int) -> bool:
    """Is there a weight-w support whose syndromes XOR to zero?"""

    def rec(start: int, left: int, acc: int) -> bool:
        if left == 0:
            return acc == 0
        for i in range(start, m - left + 1):
            if rec(i + 1, left - 1, acc ^ rows[i]):
                return True
        return False

    return rec(0, w, 0)


class Closeness(Enum):
    CLOSE = "close"
    SEPARATED = "separated"
    NEITHER = "neither"


def closeness_class(
    code: LinearCode, w: BitVec, eta: float, beta: float, cap: int = ENUM_CAP
) -> Closeness:
    """Classify w: within eta*m of the code, or beta-separated from it.

    Close means min_v wt(w+v) <= eta*m; separated means every coset shift
    w+v is beta-balanced.  For degenerate parameters the two can overlap, in
    which case Close wins and a warning is logged.
    """
    _check_cap(code.n, "closeness_class", cap)
    if w.length != code.m:
        raise ValueError(f"word length {w.length} != m={code.m}")
    m = code.m
    min_dist = m + 1
    max_imb = -1
    for _, cw in code.iter_codewords():
        d = (cw ^ w.bits).bit_count()
        min_dist = min(min_dist, d)
        max_imb = max(max_imb, abs(m - 2 * d))
    close = min_dist <= eta * m
    separated = max_imb <= beta * m
    if close and separated:
        log.warning(
            "degenerate parameters: w is both %g-close and %g-separated; "
            "reporting Close",
            eta,
            beta,
        )
    if close:
        return Closeness.CLOSE
    if separated:
        return Closeness.SEPARATED
    return Closeness.NEITHER


def distance_to_code(code: LinearCode, w: BitVec, cap: int = ENUM_CAP) -> int:
    """min_v wt(w + v) by exhaustive enumeration."""
    _check_cap(code.n, "distance_to_code", cap)
    return min((cw ^ w.bits).bit_count() for _, cw in code.iter_codewords())


# --- serialization ---------------------------------------------------------

CODE_MAGIC = "ncp-code v1"


def code_to_text(code: LinearCode, audit: Optional[BalanceAudit] = None) -> str:
    lines = [f"{CODE_MAGIC} m={code.m} n={code.n}"]
    lines += [BitVec(code.m, c).to_text() for c in code.columns]
    if audit is not None:
        lines.append(
            f"# beta_star={audit.beta_star!r} witness={audit.witness.to_text()}"
        )
    return "\n".join(lines) + "\n"


def code_from_text(text: str) -> Tuple[LinearCode, Optional[BalanceAudit]]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(CODE_MAGIC):
        raise ValueError(f"not a code file (expected '{CODE_MAGIC} ...' header)")
    fields = dict(kv.split("=") for kv in lines[0][len(CODE_MAGIC) :].split())
    m, n = int(fields["m"]), int(fields["n"])
    columns = []
    audit = None
    for ln in lines[1:]:
        if not ln:
            continue
        if ln.startswith("#"):
            kv = dict(p.split("=") for p in ln[1:].split())
            if "beta_star" in kv and "witness" in kv:
                witness = BitVec.from_text(kv["witness"])
                imb = round(float(kv["beta_star"]) * m)
                audit = BalanceAudit(m, imb, witness)
            continue
        v = BitVec.from_text(ln)
        if v.length != m:
            raise ValueError(f"column length {v.length} != m={m}")
        columns.append(v.bits)
    if len(columns) != n:
        raise ValueError(f"expected {n} columns, found {len(columns)}")
    return LinearCode(m, tuple(columns)), audit


def write_code_file(
    path, code: LinearCode, audit: Optional[BalanceAudit] = None
) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(code_to_text(code, audit))


def read_code_file(path) -> Tuple[LinearCode, Optional[BalanceAudit]]:
    with open(path, "r", encoding="ascii") as fh:
        return code_from_text(fh.read())


def code_hash(code: LinearCode) -> str:
    """Stable identifier: sha256 of the canonical file form, sans comments."""
    return hashlib.sha256(code_to_text(code).encode("ascii")).hexdigest()[:16]

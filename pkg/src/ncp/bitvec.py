"""Bit-packed linear algebra over GF(2).

A vector is a fixed-length bit string packed into one Python integer: bit j
of ``bits`` is coordinate j, so the text form (coordinate 0 first) is the
binary expansion read from the least significant bit upward.  Integers are
immutable, which makes every value here safe to share across threads.

Gaussian elimination (``rank``, ``nullspace_basis``, ``solve``) works on a
scratch copy and never mutates its input.
"""

from __future__ import annotations

from typing import Iterable, Iterator, List, Optional, Sequence

import numpy as np


class BitVec:
    """Immutable fixed-length vector over GF(2)."""

    __slots__ = ("length", "bits")

    def __init__(self, length: int, bits: int = 0):
        if length < 0:
            raise ValueError("length must be non-negative")
        if bits < 0 or bits >> length:
            raise ValueError(f"bits 0x{bits:x} out of range for length {length}")
        self.length = length
        self.bits = bits

    @classmethod
    def zeros(cls, length: int) -> "BitVec":
        return cls(length, 0)

    @classmethod
    def ones(cls, length: int) -> "BitVec":
        return cls(length, (1 << length) - 1)

    @classmethod
    def from_text(cls, text: str) -> "BitVec":
        """Parse the external '0'/'1' form, coordinate 0 first."""
        if not set(text) <= {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(len(text), int(text[::-1], 2) if text else 0)

    @classmethod
    def from_bits(cls, values: Iterable[int]) -> "BitVec":
        bits = 0
        n = 0
        for v in values:
            if v & 1:
                bits |= 1 << n
            n += 1
        return cls(n, bits)

    @classmethod
    def from_indices(cls, length: int, indices: Iterable[int]) -> "BitVec":
        """XOR of unit vectors: indices appearing an even number of times cancel."""
        bits = 0
        for i in indices:
            if not 0 <= i < length:
                raise ValueError(f"index {i} out of range for length {length}")
            bits ^= 1 << i
        return cls(length, bits)

    @classmethod
    def from_u8(cls, arr: np.ndarray) -> "BitVec":
        packed = np.packbits(arr.astype(np.uint8, copy=False), bitorder="little")
        return cls(len(arr), int.from_bytes(packed.tobytes(), "little"))

    def to_text(self) -> str:
        return format(self.bits, f"0{self.length}b")[::-1] if self.length else ""

    def to_u8(self) -> np.ndarray:
        """0/1 array of length ``length``."""
        nbytes = (self.length + 7) // 8
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.length]

    def to_words(self) -> np.ndarray:
        """Packed uint64 words, little-endian, trailing bits zero."""
        nwords = max(1, (self.length + 63) // 64)
        raw = self.bits.to_bytes(nwords * 8, "little")
        return np.frombuffer(raw, dtype=np.uint64)

    def weight(self) -> int:
        return self.bits.bit_count()

    def get(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def with_flipped(self, i: int) -> "BitVec":
        if not 0 <= i < self.length:
            raise IndexError(i)
        return BitVec(self.length, self.bits ^ (1 << i))

    def support(self) -> List[int]:
        out = []
        b = self.bits
        while b:
            lsb = b & -b
            out.append(lsb.bit_length() - 1)
            b ^= lsb
        return out

    def _check_len(self, other: "BitVec") -> None:
        if self.length != other.length:
            raise ValueError(f"length mismatch: {self.length} vs {other.length}")

    def __xor__(self, other: "BitVec") -> "BitVec":
        self._check_len(other)
        return BitVec(self.length, self.bits ^ other.bits)

    def __and__(self, other: "BitVec") -> "BitVec":
        self._check_len(other)
        return BitVec(self.length, self.bits & other.bits)

    def __invert__(self) -> "BitVec":
        return BitVec(self.length, self.bits ^ ((1 << self.length) - 1))

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BitVec)
            and self.length == other.length
            and self.bits == other.bits
        )

    def __hash__(self) -> int:
        return hash((self.length, self.bits))

    def __repr__(self) -> str:
        if self.length <= 64:
            return f"BitVec.from_text({self.to_text()!r})"
        return f"<BitVec len={self.length} weight={self.weight()}>"


def dot(a: BitVec, b: BitVec) -> int:
    """Inner product over GF(2): parity of the AND of the two vectors."""
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} vs {b.length}")
    return (a.bits & b.bits).bit_count() & 1


class BitMatrix:
    """Immutable matrix over GF(2), stored as a tuple of row masks."""

    __slots__ = ("cols", "row_bits")

    def __init__(self, cols: int, row_bits: Sequence[int]):
        if cols < 0:
            raise ValueError("cols must be non-negative")
        rows = tuple(row_bits)
        for r in rows:
            if r < 0 or r >> cols:
                raise ValueError(f"row 0x{r:x} out of range for {cols} columns")
        self.cols = cols
        self.row_bits = rows

    @classmethod
    def from_rows(cls, rows: Sequence[BitVec]) -> "BitMatrix":
        if not rows:
            raise ValueError("cannot infer column count from an empty row list")
        cols = rows[0].length
        for r in rows:
            if r.length != cols:
                raise ValueError("rows have mixed lengths")
        return cls(cols, [r.bits for r in rows])

    @classmethod
    def from_text(cls, text: str) -> "BitMatrix":
        lines = [ln for ln in text.splitlines() if ln]
        return cls.from_rows([BitVec.from_text(ln) for ln in lines])

    @classmethod
    def identity(cls, k: int) -> "BitMatrix":
        return cls(k, [1 << i for i in range(k)])

    @classmethod
    def zeros(cls, nrows: int, cols: int) -> "BitMatrix":
        return cls(cols, [0] * nrows)

    @property
    def nrows(self) -> int:
        return len(self.row_bits)

    def row(self, i: int) -> BitVec:
        return BitVec(self.cols, self.row_bits[i])

    def __iter__(self) -> Iterator[BitVec]:
        for r in self.row_bits:
            yield BitVec(self.cols, r)

    def mul(self, x: BitVec) -> BitVec:
        """Matrix-vector product M*x; x has ``cols`` coordinates."""
        if x.length != self.cols:
            raise ValueError(f"length mismatch: {self.cols} cols vs {x.length}")
        out = 0
        for i, r in enumerate(self.row_bits):
            if (r & x.bits).bit_count() & 1:
                out |= 1 << i
        return BitVec(self.nrows, out)

    def transpose(self) -> "BitMatrix":
        rows = []
        for j in range(self.cols):
            r = 0
            for i, m in enumerate(self.row_bits):
                r |= ((m >> j) & 1) << i
            rows.append(r)
        return BitMatrix(self.nrows, rows)

    def to_text(self) -> str:
        return "\n".join(self.row(i).to_text() for i in range(self.nrows))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BitMatrix)
            and self.cols == other.cols
            and self.row_bits == other.row_bits
        )

    def __hash__(self) -> int:
        return hash((self.cols, self.row_bits))

    def __repr__(self) -> str:
        return f"<BitMatrix {self.nrows}x{self.cols}>"


def _rref(row_bits: Sequence[int], cols: int):
    """Reduced row echelon form; returns (rows, pivot_columns)."""
    work = list(row_bits)
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r >= len(work):
            break
        sel = next((k for k in range(r, len(work)) if (work[k] >> c) & 1), None)
        if sel is None:
            continue
        work[r], work[sel] = work[sel], work[r]
        for k in range(len(work)):
            if k != r and (work[k] >> c) & 1:
                work[k] ^= work[r]
        pivots.append(c)
        r += 1
    return work, pivots


def rank(matrix: BitMatrix) -> int:
    """Rank over GF(2) via Gaussian elimination on a copy."""
    _, pivots = _rref(matrix.row_bits, matrix.cols)
    return len(pivots)


def nullspace_basis(matrix: BitMatrix) -> BitMatrix:
    """Basis of {x : M*x = 0}, one basis vector per non-pivot column.

    The returned matrix has ``cols - rank(M)`` rows of length ``cols``; it
    may have zero rows (trivial kernel).
    """
    rref, pivots = _rref(matrix.row_bits, matrix.cols)
    pivot_set = set(pivots)
    basis = []
    for f in range(matrix.cols):
        if f in pivot_set:
            continue
        v = 1 << f
        for r, p in enumerate(pivots):
            if (rref[r] >> f) & 1:
                v |= 1 << p
        basis.append(v)
    return BitMatrix(matrix.cols, basis)


def solve(matrix: BitMatrix, y: BitVec) -> Optional[BitVec]:
    """Solve M*x = y; returns None when the system is inconsistent.

    Free variables (if the columns are dependent) are set to zero, so with
    full column rank the solution is the unique one.
    """
    if y.length != matrix.nrows:
        raise ValueError(f"length mismatch: {matrix.nrows} rows vs {y.length}")
    cols = matrix.cols
    aug = [
        r | (((y.bits >> i) & 1) << cols) for i, r in enumerate(matrix.row_bits)
    ]
    rref, pivots = _rref(aug, cols)
    for r in rref[len(pivots):]:
        if r >> cols:
            return None
    x = 0
    for r, p in enumerate(pivots):
        if rref[r] >> cols:
            x |= 1 << p
    return BitVec(cols, x)

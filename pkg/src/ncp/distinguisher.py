"""Threshold distinguishers, interval distinguishers, and the gap experiment.

A threshold distinguisher holds parity tests (rows of H, shift bits b) and
decides by comparing  A(w) = sum_i (-1)^{<h_i, w> + b_i}  against an integer
threshold; ``accept_above`` records which side accepts (compiling an
interval distinguisher can land the accepting intervals on the negative
side, and flipping the shifts instead would negate the statistic).

The interval-to-threshold compiler realizes the product polynomial
prod_i (A - a_i) with two constructions: padding with constant rows
subtracts a breakpoint, and XOR-ing all row pairs multiplies two
statistics.  Both are exact and exhaustively testable.

The gap experiment measures how differently the statistic behaves on
noise-corrupted random codewords versus uniform words; only rows inside the
dual code can tell the two apart, and each contributes at most
(1 - eta)^wt(h) <= exp(-eta * d) with d the dual distance.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .bitvec import BitMatrix, BitVec
from .codes import LinearCode
from .dist import Advice
from .rng import RngStream

SIZE_BUDGET = 1 << 24  # compiled distinguishers stay exhaustively verifiable


class NotThresholdExpressible(ValueError):
    """Accept pattern does not alternate, so no root polynomial realizes it."""


def _packed_rows(rows: BitMatrix) -> np.ndarray:
    nw = max(1, (rows.cols + 63) // 64)
    out = np.empty((rows.nrows, nw), dtype=np.uint64)
    for i, r in enumerate(rows.row_bits):
        out[i] = np.frombuffer(r.to_bytes(nw * 8, "little"), dtype=np.uint64)
    return out


@dataclass(frozen=True)
class ThresholdDistinguisher:
    rows: BitMatrix
    shifts: BitVec
    threshold: int
    accept_above: bool = True

    def __post_init__(self):
        if self.shifts.length != self.rows.nrows:
            raise ValueError("one shift bit per row required")

    @property
    def size(self) -> int:
        return self.rows.nrows

    @property
    def m(self) -> int:
        return self.rows.cols

    def statistic(self, w: BitVec) -> int:
        """A(w) = sum_i (-1)^{<h_i, w> + b_i}, exact integer in [-N, N]."""
        if w.length != self.rows.cols:
            raise ValueError(f"word length {w.length} != m={self.rows.cols}")
        acc = 0
        for i, r in enumerate(self.rows.row_bits):
            par = ((r & w.bits).bit_count() + self.shifts.get(i)) & 1
            acc += 1 - 2 * par
        return acc

    def statistics(self, words: np.ndarray) -> np.ndarray:
        """Vectorized statistic over packed words of shape (B, ceil(m/64))."""
        packed = _packed_rows(self.rows)
        acc = np.zeros(len(words), dtype=np.int64)
        for i in range(self.size):
            par = np.bitwise_count(words & packed[i]).sum(axis=1, dtype=np.int64)
            par = (par + self.shifts.get(i)) & 1
            acc += 1 - 2 * par
        return acc

    def accepts(self, w: BitVec) -> bool:
        s = self.statistic(w)
        return s >= self.threshold if self.accept_above else s <= -self.threshold


@dataclass(frozen=True)
class IntervalDistinguisher:
    """Decision by which of k intervals the statistic lands in.

    ``breakpoints`` are strictly increasing integers in [-N, N] cutting the
    line into k = len(breakpoints) + 1 intervals; a boundary value belongs
    to the upper interval.  ``accept_pattern`` has one accept bit per
    interval, bottom interval first.
    """

    rows: BitMatrix
    shifts: BitVec
    breakpoints: Tuple[int, ...]
    accept_pattern: Tuple[bool, ...]

    def __post_init__(self):
        if self.shifts.length != self.rows.nrows:
            raise ValueError("one shift bit per row required")
        if len(self.accept_pattern) != len(self.breakpoints) + 1:
            raise ValueError("need one accept bit per interval")
        if any(b >= c for b, c in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        n = self.rows.nrows
        if self.breakpoints and not (
            -n <= self.breakpoints[0] and self.breakpoints[-1] <= n
        ):
            raise ValueError(f"breakpoints must lie in [-{n}, {n}]")

    @property
    def size(self) -> int:
        return self.rows.nrows

    @property
    def k(self) -> int:
        return len(self.accept_pattern)

    def statistic(self, w: BitVec) -> int:
        return ThresholdDistinguisher(self.rows, self.shifts, 0).statistic(w)

    def interval_index(self, value: int) -> int:
        return bisect_right(self.breakpoints, value)

    def accepts(self, w: BitVec) -> bool:
        return self.accept_pattern[self.interval_index(self.statistic(w))]


def subtract_constant(
    d: ThresholdDistinguisher, a: int, budget: int = SIZE_BUDGET
) -> ThresholdDistinguisher:
    """Distinguisher with statistic A(w) - a: pad |a| constant rows.

    A zero row contributes (-1)^b, so b = 1 rows subtract and b = 0 rows
    add; size grows by |a|.
    """
    if d.size + abs(a) > budget:
        raise ValueError(f"size {d.size} + |{a}| exceeds budget {budget}")
    pad_rows = [0] * abs(a)
    pad_shift = ((1 << abs(a)) - 1) if a > 0 else 0
    rows = BitMatrix(d.rows.cols, list(d.rows.row_bits) + pad_rows)
    shifts = BitVec(d.size + abs(a), d.shifts.bits | (pad_shift << d.size))
    return ThresholdDistinguisher(rows, shifts, d.threshold - a, d.accept_above)


def multiply(
    d1: ThresholdDistinguisher,
    d2: ThresholdDistinguisher,
    budget: int = SIZE_BUDGET,
) -> ThresholdDistinguisher:
    """Distinguisher with statistic A1(w) * A2(w): XOR all row pairs.

    Size is the product N1*N2; the threshold is reset to 1 (callers pick
    the decision rule for the product).
    """
    if d1.rows.cols != d2.rows.cols:
        raise ValueError("blocklength mismatch")
    if d1.size * d2.size > budget:
        raise ValueError(f"product size {d1.size * d2.size} exceeds budget {budget}")
    rows: List[int] = []
    shift_bits = 0
    pos = 0
    for i, r1 in enumerate(d1.rows.row_bits):
        b1 = d1.shifts.get(i)
        for j, r2 in enumerate(d2.rows.row_bits):
            rows.append(r1 ^ r2)
            shift_bits |= (b1 ^ d2.shifts.get(j)) << pos
            pos += 1
    return ThresholdDistinguisher(
        BitMatrix(d1.rows.cols, rows), BitVec(pos, shift_bits), 1
    )


def compile_interval(
    d: IntervalDistinguisher, budget: int = SIZE_BUDGET
) -> ThresholdDistinguisher:
    """Threshold distinguisher whose statistic is prod_i (A(w) - a_i).

    The product polynomial alternates sign across the k intervals, so only
    alternating accept patterns compile; others raise
    NotThresholdExpressible.  The compiled size is at most (2N)^(k-1).  The
    top interval maps to the positive side, so accept_above mirrors the top
    accept bit; decisions agree with the interval distinguisher everywhere
    the statistic does not sit exactly on a breakpoint.
    """
    if d.k < 2:
        raise ValueError("need at least one breakpoint")
    if any(x == y for x, y in zip(d.accept_pattern, d.accept_pattern[1:])):
        raise NotThresholdExpressible(
            f"accept pattern {d.accept_pattern} does not alternate"
        )
    base = ThresholdDistinguisher(d.rows, d.shifts, 0)
    cur = subtract_constant(base, d.breakpoints[0], budget)
    for a in d.breakpoints[1:]:
        cur = multiply(cur, subtract_constant(base, a, budget), budget)
    return ThresholdDistinguisher(
        cur.rows, cur.shifts, 1, accept_above=d.accept_pattern[-1]
    )


def advice_distinguisher(advice: Advice, threshold: int) -> ThresholdDistinguisher:
    """View advice rows as a threshold distinguisher."""
    rows = BitMatrix(advice.m, [advice.row(i).bits for i in range(advice.n_rows)])
    shifts = BitVec.from_bits(int(b) for b in advice.shifts)
    return ThresholdDistinguisher(rows, shifts, threshold)


# --- corrupted-codeword experiments -----------------------------------------


def lpn_sample(code: LinearCode, eta: float, rng: RngStream) -> BitVec:
    """One corrupted codeword C x + e, x uniform, e bits Bernoulli(eta/2).

    eta = 0 returns an exact codeword; eta = 2 is the degenerate edge where
    every bit flips.
    """
    if not 0 <= eta <= 2:
        raise ValueError(f"eta must be in [0, 2], got {eta}")
    x = rng.bits(code.n)
    e = BitVec.from_u8(rng.bernoulli(eta / 2, code.m))
    return code.encode(x) ^ e


def random_dual_rows(
    code: LinearCode,
    count: int,
    rng: RngStream,
    weight: Optional[int] = None,
) -> BitMatrix:
    """Random nonzero dual codewords, optionally of one exact weight.

    Without ``weight``: uniform nonzero elements of the dual code (their
    weight is at least the dual distance by definition).  With ``weight``:
    enumerate all weight-w dual codewords and draw ``count`` of them without
    replacement (feasible for the small weights where this is interesting).
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if weight is None:
        dim = code.m - code.n
        rows = []
        while len(rows) < count:
            combo = rng.bits(dim)
            if combo.bits == 0:
                continue
            h = 0
            b = combo.bits
            while b:
                lsb = b & -b
                h ^= code.dual_basis.row_bits[lsb.bit_length() - 1]
                b ^= lsb
            rows.append(h)
        return BitMatrix(code.m, rows)
    from itertools import combinations

    found = []
    for sup in combinations(range(code.m), weight):
        s = 0
        for i in sup:
            s ^= code.rows[i]
        if s == 0:
            found.append(sum(1 << i for i in sup))
    if len(found) < count:
        raise ValueError(
            f"only {len(found)} dual codewords of weight {weight} exist"
        )
    picks = []
    pool = list(range(len(found)))
    for _ in range(count):
        picks.append(pool.pop(rng.index(len(pool))))
    return BitMatrix(code.m, [found[i] for i in picks])


@dataclass(frozen=True)
class GapReport:
    """Raw sums from a gap experiment; means and radii are derived.

    Statistics are exact integers; floats appear only in the derived
    reporting properties, so confidence radii can always be recomputed.
    """

    size: int
    trials: int
    eta: float
    dual_distance: int
    sum_corrupted: int
    sumsq_corrupted: int
    sum_uniform: int
    sumsq_uniform: int

    @property
    def mean_corrupted(self) -> float:
        return self.sum_corrupted / self.trials

    @property
    def mean_uniform(self) -> float:
        return self.sum_uniform / self.trials

    def stderr_corrupted(self) -> float:
        return self._stderr(self.sum_corrupted, self.sumsq_corrupted)

    def stderr_uniform(self) -> float:
        return self._stderr(self.sum_uniform, self.sumsq_uniform)

    def _stderr(self, s: int, sq: int) -> float:
        var = sq / self.trials - (s / self.trials) ** 2
        return math.sqrt(max(var, 0.0) / self.trials)

    @property
    def bound(self) -> float:
        """Dual-distance bound on the gap: N * exp(-eta * d)."""
        return self.size * math.exp(-self.eta * self.dual_distance)

    @property
    def gap(self) -> float:
        return self.mean_corrupted - self.mean_uniform


def gap_experiment(
    code: LinearCode,
    d: ThresholdDistinguisher,
    eta: float,
    trials: int,
    rng: RngStream,
    dual_distance: int,
    batch: int = 4096,
) -> GapReport:
    """Empirical E A(w) on corrupted codewords vs E A(r) on uniform words.

    Trials are processed in batches; batch b draws from the derived stream
    rng.derive(b) (x bits, then error bits, then the uniform word), so the
    result is deterministic for a given stream.
    """
    if d.m != code.m:
        raise ValueError("distinguisher and code blocklengths differ")
    if not 0 <= eta <= 2:
        raise ValueError(f"eta must be in [0, 2], got {eta}")
    if code.n > 64:
        raise ValueError("vectorized gap experiment supports n <= 64")
    m, n = code.m, code.n
    nw = max(1, (m + 63) // 64)
    colw = np.empty((n, nw), dtype=np.uint64)
    for j in range(n):
        colw[j] = np.frombuffer(
            code.columns[j].to_bytes(nw * 8, "little"), dtype=np.uint64
        )
    tail_mask = (
        np.uint64((1 << (m % 64)) - 1) if m % 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    )
    sums = [0, 0, 0, 0]
    done = 0
    b = 0
    while done < trials:
        cur = min(batch, trials - done)
        stream = rng.derive(b)
        xm = stream.words(cur)
        cw = np.zeros((cur, nw), dtype=np.uint64)
        for j in range(n):
            sel = ((xm >> np.uint64(j)) & np.uint64(1)).astype(bool)
            cw[sel] ^= colw[j]
        ebits = stream.bernoulli(eta / 2, cur * m).reshape(cur, m)
        epad = np.zeros((cur, nw * 64), dtype=np.uint8)
        epad[:, :m] = ebits
        ew = np.packbits(epad, axis=1, bitorder="little").view(np.uint64)
        corrupted = cw ^ ew
        uniform = stream.words(cur * nw).reshape(cur, nw)
        uniform[:, -1] &= tail_mask
        sc = d.statistics(corrupted)
        su = d.statistics(uniform)
        sums[0] += int(sc.sum())
        sums[1] += int((sc.astype(object) ** 2).sum())
        sums[2] += int(su.sum())
        sums[3] += int((su.astype(object) ** 2).sum())
        done += cur
        b += 1
    return GapReport(
        d.size, trials, eta, dual_distance, sums[0], sums[1], sums[2], sums[3]
    )

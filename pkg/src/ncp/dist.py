"""The light-dual-codeword distribution, its exact oracles, and advice.

A draw from D is the XOR of ell independent uniform unit vectors in F2^m
(ell even, so the zero vector is in the support).  Its bias under the
linear test w is exactly ((m - 2 wt(w)) / m)^ell, a rational with
denominator m^ell; conditioning D on the dual code of C gives the advice
distribution, whose bias under w is the ratio of two integer sums

    sum_v (m - 2 wt(v + w))^ell   /   sum_v (m - 2 wt(v))^ell

over the 2^n codewords v.  All "exact" functions here work in integer or
Fraction arithmetic; floats appear only in sampling and reporting.

Sampling the conditional distribution uses syndrome rejection: a candidate
tuple of ell coordinate indices is accepted when the XOR of the
per-coordinate syndromes vanishes (expected acceptance rate about 2^-n).
The enumeration sampler is the ground-truth oracle for tiny instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate
from typing import Dict, List, Optional, Tuple

import numpy as np

from .bitvec import BitVec
from .codes import LinearCode, _check_cap
from .rng import GENERATOR_NAME, RngStream

PMF_WEIGHT_CAP = 64  # largest m for the Krawtchouk pmf inversion (cost cap)


class AdviceSamplingError(RuntimeError):
    """Rejection sampling exhausted its trial budget."""


@dataclass(frozen=True)
class DistParams:
    """Blocklength m and an even tuple length ell."""

    m: int
    ell: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.ell < 0 or self.ell % 2:
            raise ValueError(f"ell must be a non-negative even integer, got {self.ell}")


def sample_D(params: DistParams, rng: RngStream) -> BitVec:
    """XOR of ell uniform unit vectors; weight is even and at most ell."""
    idx = rng.indices(params.m, params.ell)
    return BitVec.from_indices(params.m, (int(i) for i in idx))


def fourier_D(params: DistParams, w_weight: int) -> float:
    """Bias of D under any test of the given weight: (1 - 2k/m)^ell."""
    if not 0 <= w_weight <= params.m:
        raise ValueError(f"weight {w_weight} out of range [0, {params.m}]")
    return ((params.m - 2 * w_weight) / params.m) ** params.ell


def fourier_weight_numerators(m: int, ell: int) -> List[int]:
    """(m - 2k)^ell for k = 0..m; the bias at weight k over denominator m^ell."""
    return [(m - 2 * k) ** ell for k in range(m + 1)]


def krawtchouk(m: int, k: int, x: int) -> int:
    """Binary Krawtchouk polynomial K_k(x) = sum_j (-1)^j C(x,j) C(m-x,k-j)."""
    return sum(
        (-1) ** j * math.comb(x, j) * math.comb(m - x, k - j)
        for j in range(0, k + 1)
    )


def exact_pmf_D(params: DistParams, w_weight: int) -> Fraction:
    """Probability that a D draw equals one fixed vector of the given weight.

    Inverse Fourier transform grouped by test weight:
    D(h) = 2^-m sum_k (1 - 2k/m)^ell K_k(wt(h)), evaluated exactly.
    """
    m, ell = params.m, params.ell
    if not 0 <= w_weight <= m:
        raise ValueError(f"weight {w_weight} out of range [0, {m}]")
    if m > PMF_WEIGHT_CAP:
        raise ValueError(f"m={m} exceeds the exact pmf cap {PMF_WEIGHT_CAP}")
    tbl = fourier_weight_numerators(m, ell)
    total = sum(tbl[k] * krawtchouk(m, k, w_weight) for k in range(m + 1))
    return Fraction(total, (1 << m) * m**ell)


def fourier_DC_pair(
    code: LinearCode, params: DistParams, w: BitVec
) -> Tuple[int, int]:
    """Exact conditional bias at w as an integer (numerator, denominator)."""
    if params.m != code.m or w.length != code.m:
        raise ValueError("blocklength mismatch")
    _check_cap(code.n, "fourier_DC_pair")
    tbl = fourier_weight_numerators(params.m, params.ell)
    num = 0
    den = 0
    for _, cw in code.iter_codewords():
        den += tbl[cw.bit_count()]
        num += tbl[(cw ^ w.bits).bit_count()]
    return num, den


def fourier_DC_exact(code: LinearCode, params: DistParams, w: BitVec) -> Fraction:
    """Exact bias of the dual-conditioned distribution under the test w."""
    num, den = fourier_DC_pair(code, params, w)
    return Fraction(num, den)


def fourier_DC_many(
    code: LinearCode, params: DistParams, words: np.ndarray
) -> Tuple[np.ndarray, int]:
    """Vectorized fourier_DC numerators for packed words.

    ``words`` is a (B, ceil(m/64)) uint64 array of packed test vectors;
    returns (numerators as int64 of shape (B,), common denominator).  Caller
    must keep 2^n * m^ell below 2^63 for exactness.
    """
    m, ell, n = params.m, params.ell, code.n
    _check_cap(n, "fourier_DC_many", 20)
    if (1 << n) * m**ell > (1 << 62):
        raise ValueError("2^n * m^ell too large for exact int64 accumulation")
    tbl = np.array(fourier_weight_numerators(m, ell), dtype=np.int64)
    nw = max(1, (m + 63) // 64)
    cws = np.empty(((1 << n), nw), dtype=np.uint64)
    for i, (_, cw) in enumerate(code.iter_codewords()):
        cws[i] = np.frombuffer(cw.to_bytes(nw * 8, "little"), dtype=np.uint64)
    den = int(tbl[np.bitwise_count(cws).sum(axis=1)].sum())
    nums = np.empty(len(words), dtype=np.int64)
    block = max(1, (1 << 22) // (cws.shape[0] * nw))
    for lo in range(0, len(words), block):
        chunk = words[lo : lo + block]
        wt = np.bitwise_count(chunk[:, None, :] ^ cws[None, :, :]).sum(axis=2)
        nums[lo : lo + len(chunk)] = tbl[wt].sum(axis=1)
    return nums, den


def zc_exact(code: LinearCode, params: DistParams) -> Fraction:
    """Exact acceptance rate of syndrome rejection: 2^-n sum_v D_hat(v)."""
    _check_cap(code.n, "zc_exact")
    tbl = fourier_weight_numerators(params.m, params.ell)
    total = sum(tbl[cw.bit_count()] for _, cw in code.iter_codewords())
    return Fraction(total, (1 << code.n) * params.m**params.ell)


def _parity_vec(m: int, idx) -> BitVec:
    return BitVec.from_indices(m, (int(i) for i in idx))


def sample_DC_rejection(
    code: LinearCode,
    params: DistParams,
    rng: RngStream,
    max_trials: Optional[int] = None,
) -> BitVec:
    """One draw from D conditioned on the dual code, by syndrome rejection.

    Draws ell-index tuples, accumulates the n-bit syndrome over the tuple,
    and accepts on zero syndrome, returning the parity vector of the
    multiset.  The default trial budget 2^(n+7) is ~128x the expected
    number needed, so exhausting it indicates a bug or wrong parameters.
    """
    if params.m != code.m:
        raise ValueError("blocklength mismatch")
    if max_trials is None:
        max_trials = 1 << (code.n + 7)
    if params.ell == 0:
        return BitVec.zeros(code.m)
    syn = code.syndromes_u64()
    done = 0
    while done < max_trials:
        batch = min(1024, max_trials - done)
        idx = rng.indices(code.m, batch * params.ell).reshape(batch, params.ell)
        synd = np.bitwise_xor.reduce(syn[idx], axis=1)
        hits = np.flatnonzero(synd == 0)
        if len(hits):
            return _parity_vec(code.m, idx[hits[0]])
        done += batch
    raise AdviceSamplingError(
        f"no acceptance in {max_trials} trials "
        f"(observed rate 0, expected about 2^-{code.n})"
    )


class ExactDCSampler:
    """Ground-truth conditional sampler for tiny instances (m - n <= 20).

    Enumerates every dual codeword, weights it by the exact pmf of D, and
    samples from the normalized table with exact big-integer arithmetic.
    """

    def __init__(self, code: LinearCode, params: DistParams):
        if params.m != code.m:
            raise ValueError("blocklength mismatch")
        dim = code.m - code.n
        if dim > 20:
            raise ValueError(f"dual dimension {dim} exceeds the enumeration cap 20")
        numers = self._pmf_numerators(params)
        self.duals: List[int] = []
        weights: List[int] = []
        h = 0
        for k in range(1 << dim):
            if k:
                j = (k & -k).bit_length() - 1
                h ^= code.dual_basis.row_bits[j]
            wgt = numers[h.bit_count()]
            if wgt:
                self.duals.append(h)
                weights.append(wgt)
        self.code = code
        self.params = params
        self._weights = weights
        self._cum = [0] + list(accumulate(weights))  # exact python ints
        self.total = self._cum[-1]

    @staticmethod
    def _pmf_numerators(params: DistParams) -> List[int]:
        m, ell = params.m, params.ell
        tbl = fourier_weight_numerators(m, ell)
        return [
            sum(tbl[k] * krawtchouk(m, k, t) for k in range(m + 1))
            for t in range(m + 1)
        ]

    def probabilities(self) -> Dict[BitVec, Fraction]:
        return {
            BitVec(self.code.m, h): Fraction(wgt, self.total)
            for h, wgt in zip(self.duals, self._weights)
        }

    def sample(self, rng: RngStream) -> BitVec:
        r = rng.big_index(self.total)
        lo, hi = 0, len(self.duals)
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if self._cum[mid] <= r:
                lo = mid
            else:
                hi = mid
        return BitVec(self.code.m, self.duals[lo])


def sample_DC_exact(code: LinearCode, params: DistParams, rng: RngStream) -> BitVec:
    """One exactly-distributed conditional draw via full enumeration."""
    return ExactDCSampler(code, params).sample(rng)


# --- advice ----------------------------------------------------------------


@dataclass
class Advice:
    """N conditional draws as rows, with provenance.

    Rows are stored two ways: ``idx`` holds one index multiset per row (the
    XOR of the corresponding unit vectors is the row vector; width is even,
    repeats cancel), and ``sup_flat``/``sup_ptr`` hold the canonical
    odd-multiplicity supports in CSR layout for column-indexed work.
    ``shifts`` are the affine shift bits b (all-zero by default).
    """

    m: int
    ell: int
    idx: np.ndarray
    sup_flat: np.ndarray
    sup_ptr: np.ndarray
    shifts: np.ndarray
    seed: int
    stream_id: int
    code_id: str
    generator: str = GENERATOR_NAME
    candidates: Optional[int] = None
    accepted: Optional[int] = None

    @property
    def n_rows(self) -> int:
        return len(self.shifts)

    def row(self, i: int) -> BitVec:
        lo, hi = int(self.sup_ptr[i]), int(self.sup_ptr[i + 1])
        return BitVec.from_indices(self.m, (int(j) for j in self.sup_flat[lo:hi]))

    def row_weights(self) -> np.ndarray:
        return np.diff(self.sup_ptr)

    def rows_u64(self) -> np.ndarray:
        """Dense packed rows, (N, ceil(m/64)) uint64."""
        nw = max(1, (self.m + 63) // 64)
        out = np.zeros((self.n_rows, nw), dtype=np.uint64)
        rows = np.repeat(np.arange(self.n_rows), self.row_weights())
        cols = self.sup_flat.astype(np.int64)
        np.bitwise_xor.at(
            out, (rows, cols // 64), np.uint64(1) << (cols % 64).astype(np.uint64)
        )
        return out


def _multiset_supports(idx_rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Canonical odd-multiplicity supports of each index-multiset row."""
    k, width = idx_rows.shape
    if width == 0:
        return np.empty(0, dtype=np.int32), np.zeros(k, dtype=np.int64)
    s = np.sort(idx_rows, axis=1)
    mult = (s[:, :, None] == s[:, None, :]).sum(axis=2)
    first = np.ones(s.shape, dtype=bool)
    first[:, 1:] = s[:, 1:] != s[:, :-1]
    keep = first & (mult % 2 == 1)
    return s[keep].astype(np.int32), keep.sum(axis=1).astype(np.int64)


def verify_dual_rows(advice: Advice, code: LinearCode) -> bool:
    """Every advice row must have zero syndrome."""
    if advice.n_rows == 0 or advice.idx.shape[1] == 0:
        return True
    syn = code.syndromes_u64()
    return bool((np.bitwise_xor.reduce(syn[advice.idx], axis=1) == 0).all())


def make_advice(
    code: LinearCode,
    params: DistParams,
    n_rows: int,
    rng: RngStream,
    threads: int = 1,
    batch: Optional[int] = None,
) -> Advice:
    """N independent conditional draws by batched syndrome rejection.

    Candidate batch b is drawn from the derived stream rng.derive(b) and
    accepted rows are consumed in batch order, so the result is identical
    no matter how many worker threads process the batches.
    """
    if n_rows < 1:
        raise ValueError("n_rows must be at least 1")
    if params.m != code.m:
        raise ValueError("blocklength mismatch")
    from .codes import code_hash

    m, ell, n = params.m, params.ell, code.n
    if ell == 0:
        idx = np.empty((n_rows, 0), dtype=np.int32)
        return Advice(
            m, ell, idx,
            np.empty(0, dtype=np.int32), np.zeros(n_rows + 1, dtype=np.int64),
            np.zeros(n_rows, dtype=np.uint8),
            rng.seed, rng.stream_id, code_hash(code),
            candidates=n_rows, accepted=n_rows,
        )
    syn = code.syndromes_u64()
    if batch is None:
        batch = min(1 << 22, max(1 << 14, (n_rows << n) // 8))
    budget = n_rows << (n + 7)

    def run_batch(b: int) -> np.ndarray:
        stream = rng.derive(b)
        idx = stream.indices(m, batch * ell).reshape(batch, ell).astype(np.int32)
        synd = np.bitwise_xor.reduce(syn[idx], axis=1)
        return idx[synd == 0]

    chunks: List[np.ndarray] = []
    accepted = 0
    candidates = 0
    next_b = 0
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            pending: Dict[int, object] = {}
            consumed = 0
            while accepted < n_rows and candidates < budget:
                while len(pending) < threads:
                    pending[next_b] = pool.submit(run_batch, next_b)
                    next_b += 1
                acc = pending.pop(consumed).result()
                consumed += 1
                chunks.append(acc)
                accepted += len(acc)
                candidates += batch
    else:
        while accepted < n_rows and candidates < budget:
            acc = run_batch(next_b)
            next_b += 1
            chunks.append(acc)
            accepted += len(acc)
            candidates += batch
    if accepted < n_rows:
        raise AdviceSamplingError(
            f"only {accepted} acceptances in {candidates} candidates "
            f"(rate {accepted / max(1, candidates):.3g}, expected about 2^-{n})"
        )
    all_idx = np.concatenate(chunks, axis=0)[:n_rows]
    sup_flat, lengths = _multiset_supports(all_idx)
    sup_ptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(lengths, out=sup_ptr[1:])
    return Advice(
        m, ell, all_idx, sup_flat, sup_ptr,
        np.zeros(n_rows, dtype=np.uint8),
        rng.seed, rng.stream_id, code_hash(code),
        candidates=candidates, accepted=accepted,
    )


# --- advice serialization ----------------------------------------------------

ADVICE_MAGIC = "ncp-advice v1"


def write_advice_file(path, advice: Advice) -> None:
    """Text form: header, then one '<h-bits> <b-bit>' line per row."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            f"{ADVICE_MAGIC} N={advice.n_rows} m={advice.m} l={advice.ell} "
            f"seed={advice.seed} code={advice.code_id}\n"
        )
        for i in range(advice.n_rows):
            line = bytearray(b"0" * advice.m)
            lo, hi = int(advice.sup_ptr[i]), int(advice.sup_ptr[i + 1])
            for j in advice.sup_flat[lo:hi]:
                line[int(j)] = ord("1")
            fh.write(f"{line.decode('ascii')} {int(advice.shifts[i])}\n")


def read_advice_file(path, code: Optional[LinearCode] = None) -> Advice:
    """Parse an advice file; with a code given, rows are syndrome-checked."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith(ADVICE_MAGIC):
            raise ValueError(f"not an advice file (expected '{ADVICE_MAGIC} ...')")
        fields = dict(kv.split("=") for kv in header[len(ADVICE_MAGIC) :].split())
        n_rows, m, ell = int(fields["N"]), int(fields["m"]), int(fields["l"])
        seed = int(fields["seed"])
        code_id = fields.get("code", "")
        supports: List[List[int]] = []
        shifts = np.zeros(n_rows, dtype=np.uint8)
        for i in range(n_rows):
            parts = fh.readline().split()
            if len(parts) != 2:
                raise ValueError(f"malformed advice row {i}")
            row = BitVec.from_text(parts[0])
            if row.length != m:
                raise ValueError(f"row {i} has length {row.length}, expected {m}")
            if row.weight() % 2 != ell % 2:
                raise ValueError(f"row {i} weight parity does not match l={ell}")
            supports.append(row.support())
            shifts[i] = int(parts[1]) & 1
    width = max(2, max((len(s) for s in supports), default=0))
    width += width % 2
    idx = np.zeros((n_rows, width), dtype=np.int32)
    lengths = np.zeros(n_rows, dtype=np.int64)
    flat: List[int] = []
    for i, sup in enumerate(supports):
        idx[i, : len(sup)] = sup
        # zero-padding comes in pairs (width and support are both even)
        lengths[i] = len(sup)
        flat.extend(sup)
    sup_ptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(lengths, out=sup_ptr[1:])
    advice = Advice(
        m, ell, idx, np.array(flat, dtype=np.int32), sup_ptr, shifts,
        seed, 0, code_id,
    )
    if code is not None:
        from .codes import code_hash

        if code_id and code_id != code_hash(code):
            raise ValueError("advice was generated for a different code")
        if not verify_dual_rows(advice, code):
            raise ValueError("advice contains rows outside the dual code")
    return advice

"""Decoding with preprocessed advice: threshold decision and bit-flip search.

Both algorithms compare empirical biases of the advice rows.  The decision
algorithm accepts a word w when  sum_i (-1)^{<h_i, w> + b_i}  exceeds t*N;
the comparison is done in exact arithmetic (integer statistic against a
rational threshold), never in floats at the accept boundary.

The search algorithm computes the statistic once and then, for each
coordinate i, the statistic of w with bit i flipped.  Flipping bit i toggles
exactly the rows whose vector has a 1 there, so the flipped statistic is
S - 2 * sum_{rows k with h_k[i] = 1} sign_k, computed for all coordinates
with one column-indexed pass.  Strictly-smaller-than-S flips mark clean
coordinates; the rest form the error estimate, and the message is recovered
by solving the linear system.  A coordinate touched by no advice row is
therefore classified as an error; we warn when that happens and let the
final solve surface the failure.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Optional, Tuple

import numpy as np

from .bitvec import BitVec, solve
from .codes import Closeness, LinearCode, closeness_class
from .dist import Advice, DistParams

log = logging.getLogger(__name__)

MAX_ROWS = 1 << 62  # statistics must fit in a signed 64-bit integer


class DecodeFailure(Exception):
    """Recovered error pattern is inconsistent with the code.

    Signals noise beyond the guarantee or unlucky advice (for example a
    coordinate untouched by every advice row).
    """


class ParameterError(ValueError):
    """A decoder parameter violates its admissible range."""


@dataclass(frozen=True)
class DecoderParams:
    """Parameter bundle (beta, eta, alpha, ell, N, t, delta) for one mode.

    ``n_theory`` is the worst-case row count (valid for every w at once);
    ``n_rows`` is the count actually used and may be overridden downward for
    per-instance experiments.  ``t`` is only meaningful in decision mode.
    """

    mode: str
    n: int
    m: int
    beta: float
    eta: float
    alpha: float
    ell: int
    t: float
    delta: float
    n_theory: int
    n_rows: int

    def __post_init__(self):
        if self.n_rows < 1 or self.n_rows > MAX_ROWS:
            raise ParameterError(f"n_rows must be in [1, 2^62], got {self.n_rows}")

    def dist_params(self) -> DistParams:
        return DistParams(self.m, self.ell)

    def with_rows(self, n_rows: int) -> "DecoderParams":
        return replace(self, n_rows=n_rows)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParameterError(msg)


def decision_params(
    n: int, m: int, beta: float, eta: float, n_rows: Optional[int] = None
) -> DecoderParams:
    """Decision-mode parameters.

    ell = 2*ceil(n / log2(1/beta)), threshold t = (1/3)(1-2 eta)^(2(n/log2(1/beta)+1)),
    margin delta = t/2, and worst-case rows N = 72 m (1-2 eta)^(-4(n/log2(1/beta)+1))
    = 2 m / delta^2.
    """
    _require(n >= 1 and m > n, f"need m > n >= 1, got n={n}, m={m}")
    _require(0 < beta < 1 / 6, f"decision mode needs 0 < beta < 1/6, got {beta}")
    _require(0 < eta < 1 / 6, f"decision mode needs 0 < eta < 1/6, got {eta}")
    x = n / math.log2(1 / beta)
    ell = 2 * math.ceil(x)
    scale = (1 - 2 * eta) ** (2 * (x + 1))
    t = scale / 3
    delta = scale / 6
    n_theory = math.ceil(72 * m * (1 - 2 * eta) ** (-4 * (x + 1)))
    # gap check in place of the asymptotic "sufficiently large n" assumption:
    # separated words satisfy the accept rule only when t - delta > 2^-n
    if t - delta <= 2.0**-n:
        log.warning(
            "decision gap t - delta = %.3g does not clear 2^-n = %.3g; "
            "instance too small for the threshold to separate",
            t - delta,
            2.0**-n,
        )
    return DecoderParams(
        "decision", n, m, beta, eta, beta, ell, t, delta,
        n_theory, n_rows if n_rows is not None else min(n_theory, MAX_ROWS),
    )


def search_params(
    n: int, m: int, beta: float, eta: float, n_rows: Optional[int] = None
) -> DecoderParams:
    """Search-mode parameters.

    alpha = beta + 2 eta, ell = 2*ceil(n / log2(1/alpha)), per-coordinate
    margin delta = (ell/m)(1-4 eta)^ell, worst-case rows N = 8 m / delta^2.
    """
    _require(n >= 1 and m > n, f"need m > n >= 1, got n={n}, m={m}")
    _require(1 / m <= beta < 1 / 8, f"search mode needs 1/m <= beta < 1/8, got {beta}")
    _require(1 / m <= eta < 1 / 8, f"search mode needs 1/m <= eta < 1/8, got {eta}")
    alpha = beta + 2 * eta
    ell = 2 * math.ceil(n / math.log2(1 / alpha))
    delta = (ell / m) * (1 - 4 * eta) ** ell
    n_theory = math.ceil(8 * m / delta**2)
    return DecoderParams(
        "search", n, m, beta, eta, alpha, ell, 0.0, delta,
        n_theory, n_rows if n_rows is not None else min(n_theory, MAX_ROWS),
    )


def calibrated_rows(params: DecoderParams, c: int = 32) -> int:
    """Per-instance row count min(N_theory, c (m/ell)^2 ln m).

    The worst-case N_theory comes from a union bound over every w at once;
    per-instance success needs far fewer rows.
    """
    cap = math.ceil(c * (params.m / params.ell) ** 2 * math.log(params.m))
    return min(params.n_theory, cap)


def _row_parities(w: BitVec, advice: Advice) -> np.ndarray:
    if w.length != advice.m:
        raise ValueError(f"word length {w.length} != advice m={advice.m}")
    if advice.idx.shape[1] == 0:
        par = np.zeros(advice.n_rows, dtype=np.uint8)
    else:
        par = np.bitwise_xor.reduce(w.to_u8()[advice.idx], axis=1)
    if advice.shifts.any():
        par = par ^ advice.shifts
    return par


def statistic(w: BitVec, advice: Advice) -> int:
    """S = sum over rows of (-1)^(<h_i, w> + b_i), exact integer."""
    par = _row_parities(w, advice)
    return advice.n_rows - 2 * int(par.sum(dtype=np.int64))


def decide(w: BitVec, advice: Advice, params: DecoderParams) -> bool:
    """True (close to the code) when the statistic strictly exceeds t*N."""
    if params.mode != "decision":
        raise ParameterError("decide requires decision-mode parameters")
    if advice.n_rows != params.n_rows:
        raise ParameterError(
            f"advice has {advice.n_rows} rows but params expect {params.n_rows}"
        )
    s = statistic(w, advice)
    return Fraction(s) > Fraction(params.t) * params.n_rows


def flip_statistics(w: BitVec, advice: Advice) -> Tuple[int, np.ndarray]:
    """(S, flipped) where flipped[i] is the statistic of w with bit i flipped.

    flipped[i] = S - 2 * T_i with T_i the signed count of rows whose vector
    has a 1 at coordinate i; exact int64 throughout.
    """
    par = _row_parities(w, advice)
    s = advice.n_rows - 2 * int(par.sum(dtype=np.int64))
    rep = np.repeat(par, advice.row_weights())
    cols = advice.sup_flat
    t_neg = np.bincount(cols[rep == 1], minlength=advice.m)
    t_pos = np.bincount(cols[rep == 0], minlength=advice.m)
    t = t_pos.astype(np.int64) - t_neg.astype(np.int64)
    return s, s - 2 * t


def search(
    w: BitVec, advice: Advice, code: LinearCode, params: DecoderParams
) -> BitVec:
    """Recover the message of the codeword nearest to w.

    Flips every coordinate whose flip does not strictly decrease the
    statistic, then solves C x = w + e_hat.  Raises DecodeFailure when the
    system is inconsistent.
    """
    if code.m != advice.m:
        raise ValueError("advice and code blocklengths differ")
    if advice.n_rows != params.n_rows:
        raise ParameterError(
            f"advice has {advice.n_rows} rows but params expect {params.n_rows}"
        )
    s, flipped = flip_statistics(w, advice)
    untouched = np.bincount(advice.sup_flat, minlength=advice.m) == 0
    if untouched.any():
        log.warning(
            "%d coordinates are untouched by every advice row and will be "
            "classified as errors",
            int(untouched.sum()),
        )
    ehat = BitVec.from_u8((flipped >= s).astype(np.uint8))
    x = solve(code.generator, w ^ ehat)
    if x is None:
        raise DecodeFailure(
            "estimated error pattern is inconsistent with the code"
            + (" (advice left coordinates untouched)" if untouched.any() else "")
        )
    return x


DecisionOracle = Callable[[LinearCode, BitVec, float, float], bool]


def exact_closeness_oracle(code: LinearCode, w: BitVec, beta: float, eta: float) -> bool:
    """Promise-perfect decision oracle by exhaustive enumeration."""
    return closeness_class(code, w, eta, beta) is Closeness.CLOSE


def search_via_decision(
    w: BitVec,
    code: LinearCode,
    decision_oracle: DecisionOracle,
    beta: float,
    eta: float,
) -> BitVec:
    """Recover the message with n decision-oracle calls, one per coordinate.

    Bit i of the answer is 0 exactly when the subcode with column i removed
    still answers YES at separation beta + 2 eta: dropping a used column
    leaves w separated from the subcode, dropping an unused one keeps it
    close.
    """
    alpha = beta + 2 * eta
    bits = []
    for i in range(code.n):
        sub = code.drop_column(i)
        bits.append(0 if decision_oracle(sub, w, alpha, eta) else 1)
    return BitVec.from_bits(bits)

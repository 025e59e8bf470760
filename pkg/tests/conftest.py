"""Shared helpers for the test suite.

Expected values tagged as derived in the tests come from the independent
oracles below (brute-force tuple enumeration, exhaustive kernel scans,
conditioned code draws), never from the code paths they validate.
"""

from __future__ import annotations

from itertools import product
from typing import Dict, List, Tuple

import numpy as np

from ncp.bitvec import BitVec
from ncp.codes import LinearCode, audit_balance, random_code
from ncp.dist import Advice
from ncp.rng import RngStream


def brute_force_D(m: int, ell: int) -> Dict[int, float]:
    """Exact law of the XOR of ell unit vectors by enumerating all m^ell tuples."""
    counts: Dict[int, int] = {}
    for tup in product(range(m), repeat=ell):
        h = 0
        for i in tup:
            h ^= 1 << i
        counts[h] = counts.get(h, 0) + 1
    total = m**ell
    return {h: c / total for h, c in counts.items()}


def advice_from_rows(m: int, ell: int, rows: List[BitVec], code_id: str = "") -> Advice:
    """Build an advice bundle from explicit row vectors (test scaffolding)."""
    supports = [r.support() for r in rows]
    width = max(2, max((len(s) for s in supports), default=0))
    width += width % 2
    idx = np.zeros((len(rows), width), dtype=np.int32)
    flat: List[int] = []
    lengths = np.zeros(len(rows), dtype=np.int64)
    for i, sup in enumerate(supports):
        idx[i, : len(sup)] = sup
        lengths[i] = len(sup)
        flat.extend(sup)
    ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    np.cumsum(lengths, out=ptr[1:])
    return Advice(
        m, ell, idx, np.array(flat, dtype=np.int32), ptr,
        np.zeros(len(rows), dtype=np.uint8), 0, 0, code_id,
    )


def balanced_code(
    m: int, n: int, max_imbalance: int, rng: RngStream, max_draws: int = 500_000
) -> Tuple[LinearCode, int]:
    """Random code conditioned on the exact audit imbalance; (code, imbalance).

    Codes this small rarely satisfy tight balance promises, so the draw is
    conditioned; the acceptance tests document this.
    """
    for k in range(max_draws):
        code = random_code(m, n, rng.derive(k))
        audit = audit_balance(code)
        if audit.imbalance <= max_imbalance:
            return code, audit.imbalance
    raise AssertionError(
        f"no (m={m}, n={n}) code with imbalance <= {max_imbalance} "
        f"in {max_draws} draws"
    )


FLAT_CODE_8_2 = LinearCode(
    8,
    (
        BitVec.from_text("11110000").bits,
        BitVec.from_text("11001100").bits,
    ),
)
# all three nonzero codewords of FLAT_CODE_8_2 have weight exactly 4

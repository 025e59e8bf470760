import math

import pytest

from ncp.bitvec import BitMatrix, BitVec, rank, solve
from ncp.codes import (
    Closeness,
    EnumerationCapError,
    LinearCode,
    audit_balance,
    audit_balance_sampled,
    closeness_class,
    code_from_text,
    code_hash,
    code_to_text,
    distance_to_code,
    dual_distance,
    random_code,
)
from ncp.rng import RngStream


def one_column_code(column: str) -> LinearCode:
    return LinearCode(len(column), (BitVec.from_text(column).bits,))


def test_random_code_rank_and_tiny():
    rng = RngStream(1)
    code = random_code(8, 1, rng)
    nonzero = [cw for _, cw in code.iter_codewords() if cw]
    assert len(nonzero) == 1  # 2^1 - 1
    for k in range(20):
        c = random_code(12, 5, rng.derive(k + 1))
        assert rank(BitMatrix(c.m, c.columns)) == 5


def test_generator_bit_fraction():
    rng = RngStream(2)
    ones = 0
    total = 0
    for k in range(200):
        c = random_code(16, 4, rng.derive(k))
        ones += sum(col.bit_count() for col in c.columns)
        total += 16 * 4
    sigma = 0.5 / math.sqrt(total)
    assert abs(ones / total - 0.5) < 5 * sigma


def test_rows_are_column_syndromes():
    rng = RngStream(3)
    code = random_code(10, 3, rng)
    for i in range(code.m):
        u = BitVec.from_indices(code.m, [i])
        assert code.syndrome(u) == code.rows[i]
    assert code.column_syndromes == code.rows


def test_encode_and_duality():
    rng = RngStream(4)
    code = random_code(12, 4, rng)
    assert code.encode(BitVec.zeros(4)).weight() == 0
    for row in code.dual_basis:
        assert code.syndrome(row) == 0
    # syndrome is linear
    a, b = rng.bits(12), rng.bits(12)
    assert code.syndrome(a ^ b) == code.syndrome(a) ^ code.syndrome(b)


def test_audit_balance_single_column():
    assert audit_balance(one_column_code("1100")).beta_star == 0.0
    audit = audit_balance(one_column_code("1111"))
    assert audit.beta_star == 1.0
    assert audit.witness == BitVec.from_text("1")


def test_audit_witness_reproduces():
    rng = RngStream(5)
    code = random_code(20, 6, rng)
    audit = audit_balance(code)
    imb = abs(code.m - 2 * code.encode(audit.witness).weight())
    assert imb == audit.imbalance


def test_audit_invariant_under_message_basis_change():
    rng = RngStream(6)
    code = random_code(18, 5, rng)
    # random invertible message-side transform: new column j = C * t_j
    while True:
        t = BitMatrix(5, [rng.bits(5).bits for _ in range(5)])
        if rank(t) == 5:
            break
    new_cols = tuple(code.encode(t.row(j)).bits for j in range(5))
    transformed = LinearCode(code.m, new_cols)
    assert audit_balance(transformed).imbalance == audit_balance(code).imbalance


def test_audit_cap_and_sampled_mode():
    rng = RngStream(7)
    code = random_code(30, 25, rng)
    with pytest.raises(EnumerationCapError):
        audit_balance(code)
    est = audit_balance_sampled(code, 200, rng.derive(1))
    assert not est.exhaustive
    assert 0 <= est.beta_star <= 1


def test_random_large_code_is_balanced():
    # union bound: P(some codeword unbalanced at beta) < 2^(n - beta^2 m / 2 + 1)
    rng = RngStream(8)
    beta = 1 / 6
    for k in range(5):
        code = random_code(4096, 8, rng.derive(k))
        assert audit_balance(code).passes(beta)


def test_dual_distance_examples():
    assert dual_distance(one_column_code("1100")) == 1  # rows 2,3 are zero
    assert dual_distance(one_column_code("1111")) == 2  # equal nonzero rows
    assert dual_distance(one_column_code("1111"), weight_cap=1) is None


def _dual_distance_oracle(code: LinearCode) -> int:
    """Min weight over all 2^(m-n) dual codewords, by full enumeration."""
    best = code.m + 1
    h = 0
    for k in range(1, 1 << code.dual_basis.nrows):
        j = (k & -k).bit_length() - 1
        h ^= code.dual_basis.row_bits[j]
        best = min(best, h.bit_count())
    return best


def test_dual_distance_matches_exhaustive_enumeration():
    rng = RngStream(9)
    for k in range(10):
        code = random_code(14, 9, rng.derive(k))
        oracle = _dual_distance_oracle(code)
        assert dual_distance(code, weight_cap=14) == oracle


def test_weight_one_dual_rate():
    # a weight-1 dual codeword needs an all-zero generator row; at n=16
    # the chance is below m * 2^-n = 0.4%, so >= 99% of codes clear it
    rng = RngStream(10)
    trials = 1000
    at_least_2 = 0
    for k in range(trials):
        code = random_code(256, 16, rng.derive(k))
        if all(r != 0 for r in code.rows):
            at_least_2 += 1
    assert at_least_2 >= 0.99 * trials


def test_closeness_examples():
    rng = RngStream(11)
    code = random_code(10, 3, rng)
    cw = code.encode(rng.bits(3))
    assert closeness_class(code, cw, 0.0, 0.0) is Closeness.CLOSE
    two = LinearCode(4, (BitVec.from_text("1100").bits,))
    assert closeness_class(two, BitVec.from_text("0110"), 0.1, 0.0) is (
        Closeness.SEPARATED
    )  # both distances are exactly 2 = m/2
    # distance 2 > eta*m = 1 and a shift of weight 2 breaks the band at beta=0.3
    single = one_column_code("11110000")
    w = BitVec.from_text("11000000")
    assert closeness_class(single, w, 1 / 8, 0.3) is Closeness.NEITHER


def test_closeness_matches_distance():
    rng = RngStream(12)
    code = random_code(12, 4, rng)
    for k in range(30):
        w = rng.bits(12)
        eta = rng.index(5) / 12
        if closeness_class(code, w, eta, 0.01) is Closeness.CLOSE:
            assert distance_to_code(code, w) <= eta * 12


def test_drop_column():
    rng = RngStream(13)
    code = random_code(12, 4, rng)
    sub = code.drop_column(1)
    assert sub.n == 3
    assert sub.columns == (code.columns[0], code.columns[2], code.columns[3])
    subwords = {cw for _, cw in sub.iter_codewords()}
    words = {cw for _, cw in code.iter_codewords()}
    assert subwords <= words


def test_code_file_roundtrip(tmp_path):
    rng = RngStream(14)
    code = random_code(16, 5, rng)
    audit = audit_balance(code)
    text = code_to_text(code, audit)
    assert text.startswith(f"ncp-code v1 m=16 n=5\n")
    loaded, loaded_audit = code_from_text(text)
    assert loaded == code
    assert loaded_audit is not None
    assert loaded_audit.imbalance == audit.imbalance
    assert loaded_audit.witness == audit.witness
    # hash ignores the audit comment
    assert code_hash(loaded) == code_hash(code)
    path = tmp_path / "code.txt"
    path.write_text(text)
    from ncp.codes import read_code_file

    again, _ = read_code_file(path)
    assert again == code


def test_generator_solve_consistency():
    rng = RngStream(15)
    code = random_code(12, 4, rng)
    x = rng.bits(4)
    assert solve(code.generator, code.encode(x)) == x

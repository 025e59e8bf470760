import pytest

from ncp.bitvec import BitMatrix, BitVec, dot, nullspace_basis, rank, solve
from ncp.rng import RngStream


def test_weight_examples():
    assert BitVec.zeros(8).weight() == 0
    assert BitVec.ones(8).weight() == 8
    # popcount by hand: 1,0,1,1,0,0,0,0
    assert BitVec.from_text("10110000").weight() == 3


def test_dot_examples():
    a = BitVec.from_text("1100")
    b = BitVec.from_text("1010")
    assert dot(a, b) == 1  # 1*1 + 1*0 + 0*1 + 0*0 = 1 mod 2
    assert dot(a, BitVec.zeros(4)) == 0
    rng = RngStream(7)
    for _ in range(20):
        v = rng.bits(13)
        assert dot(v, v) == v.weight() % 2


def test_dot_length_mismatch():
    with pytest.raises(ValueError):
        dot(BitVec.zeros(3), BitVec.zeros(4))


def test_text_roundtrip():
    rng = RngStream(1)
    for length in (0, 1, 7, 8, 64, 65, 200):
        v = rng.bits(length)
        assert BitVec.from_text(v.to_text()) == v
        assert len(v.to_text()) == length


def test_text_order_is_coordinate_zero_first():
    v = BitVec.from_text("100")
    assert v.get(0) == 1 and v.get(1) == 0 and v.get(2) == 0


def test_u8_words_roundtrip():
    rng = RngStream(2)
    for length in (1, 8, 63, 64, 100):
        v = rng.bits(length)
        assert BitVec.from_u8(v.to_u8()) == v
        assert v.to_u8().sum() == v.weight()
        words = v.to_words()
        back = int.from_bytes(words.astype("<u8").tobytes(), "little")
        assert back == v.bits


def test_from_indices_parity():
    v = BitVec.from_indices(6, [1, 3, 3, 5, 5, 5])
    assert v == BitVec.from_text("010001")


def test_flip_support():
    v = BitVec.from_text("0110")
    assert v.with_flipped(0) == BitVec.from_text("1110")
    assert v.support() == [1, 2]


def test_rank_examples():
    assert rank(BitMatrix.identity(4)) == 4
    assert rank(BitMatrix.zeros(3, 3)) == 0
    m = BitMatrix.from_text("1100\n1100\n0011")
    assert rank(m) == 2  # duplicate row collapses


def test_nullspace_examples():
    assert nullspace_basis(BitMatrix.identity(5)).nrows == 0
    full = nullspace_basis(BitMatrix.zeros(1, 4))
    assert full.nrows == 4 and rank(full) == 4
    single = BitMatrix.from_text("1100")
    basis = nullspace_basis(single)
    assert basis.nrows == 3
    # oracle: enumerate all 16 vectors; the kernel is {x : x0 ^ x1 = 0}
    kernel = {x for x in range(16) if ((x & 1) ^ ((x >> 1) & 1)) == 0}
    for row in basis.row_bits:
        assert row in kernel
    assert rank(basis) == 3


def test_solve_examples():
    ident = BitMatrix.identity(4)
    y = BitVec.from_text("0110")
    assert solve(ident, y) == y
    # M has columns 1100 and 0011; check 1100 ^ 0011 = 1111
    m = BitMatrix.from_text("10\n10\n01\n01")
    x = solve(m, BitVec.from_text("1111"))
    assert x == BitVec.from_text("11")
    narrow = BitMatrix.from_text("1\n1\n0\n0")
    assert solve(narrow, BitVec.from_text("1000")) is None


def test_solve_does_not_mutate():
    m = BitMatrix.from_text("11\n01\n10")
    rows_before = m.row_bits
    solve(m, BitVec.from_text("101"))
    assert m.row_bits == rows_before


def test_random_properties():
    rng = RngStream(99)
    for trial in range(40):
        nrows = 1 + rng.index(8)
        cols = 1 + rng.index(64)
        mat = BitMatrix(cols, [rng.bits(cols).bits for _ in range(nrows)])
        r = rank(mat)
        basis = nullspace_basis(mat)
        assert basis.nrows + r == cols
        for row in basis:
            assert mat.mul(row).weight() == 0
        # dot(a, b) == weight(a & b) mod 2
        a, b = rng.bits(cols), rng.bits(cols)
        assert dot(a, b) == (a & b).weight() % 2


def test_solve_roundtrip_random():
    rng = RngStream(123)
    done = 0
    k = 0
    while done < 30:
        k += 1
        nrows = 2 + rng.index(10)
        cols = 1 + rng.index(nrows)
        mat = BitMatrix(cols, [rng.bits(cols).bits for _ in range(nrows)])
        if rank(mat) != cols:
            continue
        x = rng.bits(cols)
        assert solve(mat, mat.mul(x)) == x
        done += 1


def test_transpose_involution():
    rng = RngStream(5)
    mat = BitMatrix(10, [rng.bits(10).bits for _ in range(6)])
    assert mat.transpose().transpose() == mat
    assert BitMatrix.from_text(mat.to_text()) == mat


def test_bitvec_validation():
    with pytest.raises(ValueError):
        BitVec(3, 8)
    with pytest.raises(ValueError):
        BitVec.from_text("01x")
    with pytest.raises(ValueError):
        BitMatrix(2, [4])

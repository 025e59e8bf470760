import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import FLAT_CODE_8_2, advice_from_rows, brute_force_D
from ncp.bitvec import BitVec
from ncp.codes import LinearCode, code_hash, random_code
from ncp.dist import (
    Advice,
    AdviceSamplingError,
    DistParams,
    ExactDCSampler,
    exact_pmf_D,
    fourier_D,
    fourier_DC_exact,
    fourier_DC_many,
    fourier_weight_numerators,
    make_advice,
    read_advice_file,
    sample_D,
    sample_DC_exact,
    sample_DC_rejection,
    verify_dual_rows,
    write_advice_file,
    zc_exact,
)
from ncp.rng import RngStream

TWO_WORD_CODE = LinearCode(2, (BitVec.from_text("11").bits,))  # {00, 11}


def test_params_validation():
    with pytest.raises(ValueError):
        DistParams(4, 3)
    with pytest.raises(ValueError):
        DistParams(0, 2)
    DistParams(4, 0)  # even, allowed


def test_sample_D_support_m2():
    params = DistParams(2, 2)
    rng = RngStream(21)
    counts = {0: 0, 3: 0}
    n = 100_000
    for _ in range(n):
        h = sample_D(params, rng)
        counts[h.bits] += 1  # KeyError would flag 01/10, which never occur
    # enumeration of all 4 tuples: 00 and 11 each with probability 1/2
    sigma = math.sqrt(n * 0.25)
    assert abs(counts[0] - n / 2) < 5 * sigma
    assert abs(counts[3] - n / 2) < 5 * sigma


def test_sample_D_parity_and_empty():
    params = DistParams(6, 4)
    rng = RngStream(22)
    for _ in range(200):
        assert sample_D(params, rng).weight() % 2 == 0
    assert sample_D(DistParams(6, 0), rng) == BitVec.zeros(6)


def test_fourier_D_values():
    assert fourier_D(DistParams(8, 4), 0) == 1.0
    assert fourier_D(DistParams(4, 2), 1) == pytest.approx(0.25)  # (1 - 2/4)^2
    assert fourier_D(DistParams(4, 6), 2) == 0.0


def test_exact_pmf_matches_brute_force():
    for m in (2, 3, 4):
        for ell in (0, 2, 4, 6):
            params = DistParams(m, ell)
            law = brute_force_D(m, ell)
            for h in range(1 << m):
                expect = law.get(h, 0.0)
                got = exact_pmf_D(params, bin(h).count("1"))
                assert abs(float(got) - expect) < 1e-10, (m, ell, h)


def test_exact_pmf_sums_to_one():
    for m in (2, 8, 17, 32):
        for ell in (2, 6):
            params = DistParams(m, ell)
            total = sum(
                math.comb(m, t) * exact_pmf_D(params, t) for t in range(m + 1)
            )
            assert total == 1  # exact rational arithmetic


def test_exact_pmf_odd_weight_zero():
    params = DistParams(6, 4)
    assert exact_pmf_D(params, 3) == 0
    assert exact_pmf_D(params, 1) == 0
    assert exact_pmf_D(params, 2) > 0


def test_exact_pmf_cap():
    with pytest.raises(ValueError):
        exact_pmf_D(DistParams(65, 2), 0)


def test_fourier_DC_basic():
    params = DistParams(2, 2)
    assert fourier_DC_exact(TWO_WORD_CODE, params, BitVec.zeros(2)) == 1
    # D-hat at weight 1 vanishes when m=2, so the numerator is (0+0)
    assert fourier_DC_exact(TWO_WORD_CODE, params, BitVec.from_text("10")) == 0


def test_fourier_DC_periodic_mod_code():
    rng = RngStream(23)
    code = random_code(10, 3, rng)
    params = DistParams(10, 4)
    w = rng.bits(10)
    base = fourier_DC_exact(code, params, w)
    for _, cw in code.iter_codewords():
        assert fourier_DC_exact(code, params, w ^ BitVec(10, cw)) == base


def test_fourier_DC_many_matches_scalar():
    rng = RngStream(24)
    code = random_code(12, 4, rng)
    params = DistParams(12, 4)
    words = [rng.bits(12) for _ in range(50)]
    packed = np.stack([w.to_words() for w in words])
    nums, den = fourier_DC_many(code, params, packed)
    for w, num in zip(words, nums):
        assert fourier_DC_exact(code, params, w) == Fraction(int(num), den)


def test_zc_range():
    # 1 <= sum_v D-hat(v) <= 1 + 2^-n on codes whose audit passes the
    # decision-mode balance requirement
    params = DistParams(8, 4)
    z = zc_exact(FLAT_CODE_8_2, params)
    n = FLAT_CODE_8_2.n
    assert Fraction(1, 1 << n) <= z <= Fraction(1, 1 << n) * (1 + Fraction(1, 1 << n))


def test_rejection_sampler_is_dual():
    rng = RngStream(25)
    code = random_code(16, 4, rng)
    params = DistParams(16, 4)
    for _ in range(50):
        h = sample_DC_rejection(code, params, rng)
        assert code.syndrome(h) == 0


def test_rejection_sampler_budget_error():
    rng = RngStream(26)
    code = random_code(16, 6, rng)
    params = DistParams(16, 2)
    with pytest.raises(AdviceSamplingError):
        # a budget of 1 trial cannot reliably hit a 2^-6 acceptance event
        sample_DC_rejection(code, params, rng, max_trials=1)


def test_exact_table_two_word_code():
    sampler = ExactDCSampler(TWO_WORD_CODE, DistParams(2, 2))
    probs = sampler.probabilities()
    assert probs == {
        BitVec.from_text("00"): Fraction(1, 2),
        BitVec.from_text("11"): Fraction(1, 2),
    }
    assert sum(probs.values()) == 1


def test_exact_table_total_mass():
    rng = RngStream(27)
    code = random_code(12, 3, rng)
    sampler = ExactDCSampler(code, DistParams(12, 4))
    assert sum(sampler.probabilities().values()) == 1
    h = sampler.sample(rng)
    assert code.syndrome(h) == 0


def test_rejection_matches_exact_table_chisquare():
    from scipy.stats import chisquare

    rng = RngStream(28)
    code = random_code(8, 2, rng)
    params = DistParams(8, 4)
    sampler = ExactDCSampler(code, params)
    probs = sampler.probabilities()
    n = 20_000
    counts = {h: 0 for h in probs}
    for _ in range(n):
        counts[sample_DC_rejection(code, params, rng)] += 1
    keys = list(probs)
    f_exp = np.array([float(probs[k]) * n for k in keys])
    f_obs = np.array([counts[k] for k in keys], dtype=float)
    keep = f_exp >= 5
    # fold rare outcomes into one bin to keep the chi-square valid
    f_obs = np.append(f_obs[keep], f_obs[~keep].sum())
    f_exp = np.append(f_exp[keep], f_exp[~keep].sum())
    stat, p = chisquare(f_obs, f_exp)
    assert p > 0.001


def test_make_advice_rows_are_dual_and_deterministic():
    rng = RngStream(29)
    code = random_code(32, 5, rng)
    params = DistParams(32, 4)
    advice = make_advice(code, params, 500, RngStream(77, 0))
    assert advice.n_rows == 500
    assert verify_dual_rows(advice, code)
    assert advice.code_id == code_hash(code)
    again = make_advice(code, params, 500, RngStream(77, 0))
    assert np.array_equal(advice.idx, again.idx)
    assert np.array_equal(advice.sup_flat, again.sup_flat)
    threaded = make_advice(code, params, 500, RngStream(77, 0), threads=3)
    assert np.array_equal(advice.idx, threaded.idx)
    assert np.array_equal(advice.sup_flat, threaded.sup_flat)


def test_make_advice_codeword_bias_is_one():
    rng = RngStream(30)
    code = random_code(16, 3, rng)
    params = DistParams(16, 4)
    advice = make_advice(code, params, 200, rng.derive(9))
    cw = code.encode(rng.bits(3))
    w8 = cw.to_u8()
    parities = np.bitwise_xor.reduce(w8[advice.idx], axis=1)
    assert not parities.any()  # <h_i, codeword> = 0 for every dual row


def test_make_advice_mean_matches_exact_fourier():
    rng = RngStream(31)
    code = random_code(8, 2, rng)
    params = DistParams(8, 4)
    n_rows = 10_000
    advice = make_advice(code, params, n_rows, rng.derive(5))
    w = rng.bits(8)
    w8 = w.to_u8()
    parities = np.bitwise_xor.reduce(w8[advice.idx], axis=1)
    mean = 1 - 2 * parities.mean()
    expect = float(fourier_DC_exact(code, params, w))
    assert abs(mean - expect) < 5 / math.sqrt(n_rows)


def test_row_weight_parity_matches_ell():
    rng = RngStream(32)
    code = random_code(16, 3, rng)
    advice = make_advice(code, DistParams(16, 4), 300, rng.derive(1))
    assert (advice.row_weights() % 2 == 0).all()
    assert (advice.row_weights() <= 4).all()


def test_advice_file_roundtrip(tmp_path):
    rng = RngStream(33)
    code = random_code(12, 3, rng)
    advice = make_advice(code, DistParams(12, 4), 40, rng.derive(2))
    path = tmp_path / "advice.txt"
    write_advice_file(path, advice)
    first = path.read_text().splitlines()[0]
    assert first.startswith("ncp-advice v1 N=40 m=12 l=4 ")
    loaded = read_advice_file(path, code)
    assert loaded.n_rows == advice.n_rows
    for i in range(advice.n_rows):
        assert loaded.row(i) == advice.row(i)
    assert np.array_equal(loaded.shifts, advice.shifts)


def test_advice_file_rejects_wrong_code(tmp_path):
    rng = RngStream(34)
    code = random_code(12, 3, rng)
    other = random_code(12, 3, rng.derive(99))
    advice = make_advice(code, DistParams(12, 4), 10, rng.derive(3))
    path = tmp_path / "advice.txt"
    write_advice_file(path, advice)
    with pytest.raises(ValueError):
        read_advice_file(path, other)


def test_advice_rows_u64_matches_rows():
    rng = RngStream(35)
    code = random_code(70, 4, rng)
    advice = make_advice(code, DistParams(70, 4), 25, rng.derive(1))
    dense = advice.rows_u64()
    for i in range(25):
        expect = advice.row(i).to_words()
        assert np.array_equal(dense[i], expect)

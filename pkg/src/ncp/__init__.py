"""Nearest-codeword decoding with preprocessing for balanced binary codes."""

from .bitvec import BitMatrix, BitVec, dot, nullspace_basis, rank, solve
from .codes import (
    BalanceAudit,
    Closeness,
    LinearCode,
    audit_balance,
    audit_balance_sampled,
    closeness_class,
    code_hash,
    dual_distance,
    random_code,
    read_code_file,
    write_code_file,
)
from .decoder import (
    DecodeFailure,
    DecoderParams,
    calibrated_rows,
    decide,
    decision_params,
    flip_statistics,
    search,
    search_params,
    search_via_decision,
    statistic,
)
from .dist import (
    Advice,
    DistParams,
    ExactDCSampler,
    exact_pmf_D,
    fourier_D,
    fourier_DC_exact,
    make_advice,
    read_advice_file,
    sample_D,
    sample_DC_exact,
    sample_DC_rejection,
    write_advice_file,
    zc_exact,
)
from .distinguisher import (
    GapReport,
    IntervalDistinguisher,
    NotThresholdExpressible,
    ThresholdDistinguisher,
    compile_interval,
    gap_experiment,
    lpn_sample,
    multiply,
    subtract_constant,
)
from .baselines import OracleResult, PrangeResult, exhaustive_nearest, prange_decode
from .rng import RngStream, mix_seed

__version__ = "0.1.0"

"""Command-line front end.

Exit codes follow the decoding outcome: 0 = YES / success, 1 = NO,
2 = decode failure or not found.  The master seed comes from --seed, the
NCP_SEED environment variable, or defaults to 0.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from pathlib import Path
from typing import List, Optional

from .baselines import exhaustive_nearest, prange_decode
from .bitvec import BitMatrix, BitVec
from .codes import (
    audit_balance,
    code_to_text,
    dual_distance,
    random_code,
    read_code_file,
)
from .decoder import (
    DecodeFailure,
    calibrated_rows,
    decide,
    decision_params,
    search,
    search_params,
    search_via_decision,
)
from .dist import make_advice, read_advice_file, write_advice_file
from .distinguisher import (
    advice_distinguisher,
    gap_experiment,
    random_dual_rows,
    ThresholdDistinguisher,
)
from .experiments import (
    ExperimentConfig,
    PH_ADVICE,
    bench,
    bench_to_csv,
    records_to_csv,
    replay_trial,
    run_experiment,
)
from .rng import RngStream, mix_seed

EXIT_YES = 0
EXIT_NO = 1
EXIT_FAIL = 2


def _read_word(path: str) -> BitVec:
    text = Path(path).read_text(encoding="ascii").strip()
    return BitVec.from_text(text)


def _out_stream(args):
    if getattr(args, "out", None):
        return open(args.out, "w", encoding="ascii")
    return sys.stdout


def _emit(args, text: str) -> None:
    out = _out_stream(args)
    out.write(text)
    if out is not sys.stdout:
        out.close()


def _resolve_beta(args, code) -> float:
    if getattr(args, "beta", None) is not None:
        return args.beta
    audit = audit_balance(code)
    return max(audit.beta_star, 1.0 / code.m)


def cmd_gen_code(args) -> int:
    code = random_code(args.m, args.n, RngStream(args.seed, 0))
    audit = audit_balance(code) if args.n <= 24 else None
    _emit(args, code_to_text(code, audit))
    return EXIT_YES


def cmd_audit(args) -> int:
    code, _ = read_code_file(args.code)
    audit = audit_balance(code, cap=args.cap)
    dd = dual_distance(code, weight_cap=args.weight_cap)
    print(f"beta_star={audit.beta_star!r} witness={audit.witness.to_text()}")
    print(f"dual_distance={dd if dd is not None else f'>{args.weight_cap}'}")
    if args.write:
        with open(args.code, "a", encoding="ascii") as fh:
            fh.write(
                f"# beta_star={audit.beta_star!r} witness={audit.witness.to_text()}\n"
            )
    return EXIT_YES


def _params_for(args, code, beta):
    if args.mode == "decide":
        return decision_params(code.n, code.m, beta, args.eta)
    return search_params(code.n, code.m, beta, args.eta)


def cmd_preprocess(args) -> int:
    code, _ = read_code_file(args.code)
    beta = _resolve_beta(args, code)
    base = _params_for(args, code, beta)
    rows = args.rows if args.rows is not None else calibrated_rows(base)
    params = base.with_rows(rows)
    advice = make_advice(
        code, params.dist_params(), rows, RngStream(args.seed, 0),
        threads=args.threads,
    )
    write_advice_file(args.out or "advice.txt", advice)
    print(
        f"wrote {rows} rows (ell={params.ell}, N_theory={params.n_theory}, "
        f"acceptance {advice.accepted}/{advice.candidates})",
        file=sys.stderr,
    )
    return EXIT_YES


def cmd_decide(args) -> int:
    code, _ = read_code_file(args.code)
    advice = read_advice_file(args.advice, code)
    w = _read_word(args.word)
    beta = _resolve_beta(args, code)
    params = decision_params(code.n, code.m, beta, args.eta).with_rows(
        advice.n_rows
    )
    yes = decide(w, advice, params)
    print("YES" if yes else "NO")
    return EXIT_YES if yes else EXIT_NO


def cmd_search(args) -> int:
    code, _ = read_code_file(args.code)
    advice = read_advice_file(args.advice, code)
    w = _read_word(args.word)
    beta = _resolve_beta(args, code)
    params = search_params(code.n, code.m, beta, args.eta).with_rows(advice.n_rows)
    try:
        x = search(w, advice, code, params)
    except DecodeFailure as exc:
        print(f"decode failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(x.to_text())
    return EXIT_YES


def cmd_reduce(args) -> int:
    code, _ = read_code_file(args.code)
    w = _read_word(args.word)
    beta = args.beta
    alpha = beta + 2 * args.eta
    oracles = {}
    for i in range(code.n):
        sub = code.drop_column(i)
        base = decision_params(code.n - 1, code.m, alpha, args.eta)
        rows = args.rows if args.rows is not None else calibrated_rows(base)
        params = base.with_rows(rows)
        advice = make_advice(
            sub, params.dist_params(), rows,
            RngStream(mix_seed(args.seed, PH_ADVICE, i), 0),
            threads=args.threads,
        )
        oracles[sub] = (advice, params)

    def oracle(sub, word, _alpha, _eta):
        advice, params = oracles[sub]
        return decide(word, advice, params)

    x = search_via_decision(w, code, oracle, beta, args.eta)
    dist = (code.encode(x) ^ w).weight()
    print(x.to_text())
    if dist > args.eta * code.m:
        print(f"decode failure: residual distance {dist}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_YES


def cmd_oracle(args) -> int:
    code, _ = read_code_file(args.code)
    w = _read_word(args.word)
    res = exhaustive_nearest(code, w)
    print(f"x={res.x_star.to_text()} distance={res.distance} unique={res.unique}")
    return EXIT_YES


def cmd_prange(args) -> int:
    code, _ = read_code_file(args.code)
    w = _read_word(args.word)
    res = prange_decode(code, w, args.dist, RngStream(args.seed, 0), args.max_iters)
    if not res.found:
        print(f"not found in {res.iterations} iterations", file=sys.stderr)
        return EXIT_FAIL
    print(f"x={res.message.to_text()} iterations={res.iterations}")
    return EXIT_YES


def cmd_lower_bound(args) -> int:
    code, _ = read_code_file(args.code)
    dd = dual_distance(code, weight_cap=args.weight_cap)
    if dd is None:
        print(f"dual distance above cap {args.weight_cap}", file=sys.stderr)
        return EXIT_FAIL
    rng = RngStream(args.seed, 0)
    if args.advice:
        advice = read_advice_file(args.advice, code)
        dist = advice_distinguisher(advice, 0)
    else:
        rows = random_dual_rows(
            code, args.random_dual_rows, rng.derive(1 << 32), weight=args.row_weight
        )
        dist = ThresholdDistinguisher(
            rows, BitVec.zeros(rows.nrows), 0
        )
    report = gap_experiment(code, dist, args.eta, args.trials, rng, dd)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["n", "m", "dual_distance", "eta", "N", "mean_lpn", "mean_uniform",
         "bound", "ci"]
    )
    ci = 5 * max(report.stderr_corrupted(), report.stderr_uniform())
    writer.writerow(
        [code.n, code.m, dd, repr(args.eta), dist.size,
         repr(report.mean_corrupted), repr(report.mean_uniform),
         repr(report.bound), repr(ci)]
    )
    _emit(args, buf.getvalue())
    return EXIT_YES


def _experiment_config(args) -> ExperimentConfig:
    return ExperimentConfig(
        mode=args.mode, n=args.n, m=args.m, eta=args.eta, trials=args.trials,
        seed=args.seed, beta=args.beta, n_rows=args.rows,
        instance_kind=args.instances, share_preprocessing=not args.no_share,
        threads=args.threads, code_path=args.code, cache_dir=args.cache_dir,
    )


def cmd_experiment(args) -> int:
    config = _experiment_config(args)
    if args.replay_trial is not None:
        records = [replay_trial(config, args.replay_trial)]
    else:
        records = run_experiment(config)
    _emit(args, records_to_csv(records))
    return EXIT_YES


def cmd_bench(args) -> int:
    config = _experiment_config(args)
    record = bench(config)
    _emit(args, bench_to_csv([record]))
    return EXIT_YES


def build_parser() -> argparse.ArgumentParser:
    env_seed = int(os.environ.get("NCP_SEED", "0"))
    top = argparse.ArgumentParser(
        prog="ncp",
        description="Nearest-codeword decoding with preprocessed dual-codeword advice",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=env_seed,
                        help="master seed (default: $NCP_SEED or 0)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", type=str, default=None,
                        help="output file (default: stdout)")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-code", parents=[common], help="draw a random code")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_gen_code)

    p = sub.add_parser("audit", parents=[common], help="balance and dual distance")
    p.add_argument("--code", required=True)
    p.add_argument("--cap", type=int, default=24)
    p.add_argument("--weight-cap", type=int, default=8)
    p.add_argument("--write", action="store_true",
                   help="append the audit comment to the code file")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("preprocess", parents=[common], help="generate advice")
    p.add_argument("--code", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--mode", choices=["decide", "search"], default="decide")
    p.add_argument("--rows", type=int, default=None,
                   help="advice rows (default: calibrated)")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("decide", parents=[common], help="threshold decision")
    p.add_argument("--code", required=True)
    p.add_argument("--advice", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--beta", type=float, default=None)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("search", parents=[common], help="bit-flip search decode")
    p.add_argument("--code", required=True)
    p.add_argument("--advice", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--beta", type=float, default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("reduce", parents=[common],
                       help="search via per-coordinate decision oracles")
    p.add_argument("--code", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--rows", type=int, default=None)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("oracle", parents=[common], help="exhaustive nearest codeword")
    p.add_argument("--code", required=True)
    p.add_argument("--word", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("prange", parents=[common], help="information-set decoding")
    p.add_argument("--code", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--dist", type=int, required=True)
    p.add_argument("--max-iters", type=int, default=10_000)
    p.set_defaults(func=cmd_prange)

    p = sub.add_parser("lower-bound", parents=[common],
                       help="gap experiment for the threshold model")
    p.add_argument("--code", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--advice", default=None)
    p.add_argument("--random-dual-rows", type=int, default=64)
    p.add_argument("--row-weight", type=int, default=None)
    p.add_argument("--weight-cap", type=int, default=8)
    p.set_defaults(func=cmd_lower_bound)

    for name, fn in (("experiment", cmd_experiment), ("bench", cmd_bench)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--mode", choices=["decide", "search", "reduce"],
                       required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--eta", type=float, required=True)
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--trials", type=int, default=10)
        p.add_argument("--rows", type=int, default=None)
        p.add_argument("--instances", choices=["alternate", "yes", "no"],
                       default="alternate")
        p.add_argument("--no-share", action="store_true",
                       help="draw a fresh code and advice per trial")
        p.add_argument("--code", default=None, help="reuse a code file")
        p.add_argument("--cache-dir", default=None)
        if name == "experiment":
            p.add_argument("--replay-trial", type=int, default=None)
        p.set_defaults(func=fn)

    return top


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

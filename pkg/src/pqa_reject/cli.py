"""Command line: ``pqa-reject {stats,evaluate,synth,validate-conformal}``.

Exit codes: 0 success, 1 validation error, 2 data error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import report, synth
from .corpus import load_corpus
from .errors import ConfigError, DataError, PQARejectError
from .scorers import SCORE_KINDS

log = logging.getLogger("pqa_reject")


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pair(text):
    values = _floats(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return tuple(values)


def _methods(text):
    return [m.strip() for m in text.split(",") if m.strip()]


def _add_corpus_args(p):
    p.add_argument("--questions", help="questions JSON-lines file")
    p.add_argument("--reviews", help="review sentences JSON-lines file")
    p.add_argument("--judgments", help="relevance judgments JSON-lines file")


def _add_out(p):
    p.add_argument("--out", help="output file (default: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqa-reject",
        description="Conformal rejection of unreliable reviews for product question answering.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="answerable-question statistics per relevance threshold")
    _add_corpus_args(p)
    p.add_argument("--thresholds", type=_floats, default=list(report.STATS_THRESHOLDS))
    _add_out(p)

    p = sub.add_parser("evaluate", help="vanilla / THRS / IMCP leave-one-out report")
    _add_corpus_args(p)
    p.add_argument("--scores", action="append", default=[],
                   help="external score file; repeat for several scorers")
    p.add_argument("--score-kind", choices=SCORE_KINDS,
                   help="override the score_kind header of every score file")
    p.add_argument("--lexical", action="store_true",
                   help="also evaluate the built-in BM25 scorer when --scores is given")
    p.add_argument("--thresholds", type=_floats, default=list(report.DEFAULT_THRESHOLDS))
    p.add_argument("--methods", type=_methods, default=["vanilla", "thrs", "imcp"])
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--epsilon-step", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full-precision", action="store_true",
                   help="print full float precision instead of 3 decimals")
    _add_out(p)

    p = sub.add_parser("synth", help="write a seeded synthetic corpus and score file")
    p.add_argument("--n-questions", type=int, default=synth.SynthConfig.n_questions)
    p.add_argument("--reviews-per-question", type=int,
                   default=synth.SynthConfig.reviews_per_question)
    p.add_argument("--answerable-rate", type=float, default=synth.SynthConfig.answerable_rate)
    p.add_argument("--relevant-rate", type=float, default=synth.SynthConfig.relevant_rate)
    p.add_argument("--relevant-beta", type=_pair, default=synth.SynthConfig.relevant_beta,
                   help="Beta(a,b) of relevant-review probabilities, as 'a,b'")
    p.add_argument("--irrelevant-beta", type=_pair, default=synth.SynthConfig.irrelevant_beta,
                   help="Beta(a,b) of irrelevant-review probabilities, as 'a,b'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("validate-conformal", help="Monte Carlo coverage check of the p-values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=10_000, help="number of test points")
    p.add_argument("--n-calibration", type=int, default=100_000)
    p.add_argument("--epsilons", type=_floats, default=[0.05, 0.1, 0.2, 0.3])
    p.add_argument("--shift", type=float, default=0.0,
                   help="move test probabilities toward the wrong class (negative control)")
    _add_out(p)
    return parser


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def cmd_stats(args):
    problems = [f"--{n} is required" for n in ("questions", "reviews", "judgments")
                if not getattr(args, n)]
    problems += [f"relevance threshold {t} outside [0, 3]" for t in args.thresholds
                 if not 0.0 <= t <= 3.0]
    if problems:
        raise ConfigError(problems)
    report.check_inputs_exist([args.questions, args.reviews, args.judgments])
    corpus = load_corpus(args.questions, args.reviews, args.judgments)
    _emit(report.format_stats(corpus, args.thresholds), args.out)


def cmd_evaluate(args):
    config = report.ExperimentConfig(
        questions=args.questions, reviews=args.reviews, judgments=args.judgments,
        scores=args.scores, score_kind=args.score_kind, lexical=args.lexical,
        thresholds=args.thresholds, methods=args.methods, depth=args.depth,
        epsilon_step=args.epsilon_step, seed=args.seed,
    )
    rows = report.evaluate(config)
    _emit(report.format_report(rows, args.full_precision), args.out)


def cmd_synth(args):
    config = synth.SynthConfig(
        n_questions=args.n_questions,
        reviews_per_question=args.reviews_per_question,
        answerable_rate=args.answerable_rate,
        relevant_rate=args.relevant_rate,
        relevant_beta=args.relevant_beta,
        irrelevant_beta=args.irrelevant_beta,
    )
    paths = synth.write_corpus(synth.generate_corpus(config, args.seed), args.out, args.seed)
    for p in paths.values():
        log.info("wrote %s", p)


def cmd_validate_conformal(args):
    rows = synth.validity_table(args.seed, args.n, args.epsilons, args.n_calibration, args.shift)
    lines = ["epsilon,miscoverage,bound,status"]
    lines += [f"{r.epsilon:g},{r.miscoverage:.4f},{r.bound:.4f},{'PASS' if r.passed else 'FAIL'}"
              for r in rows]
    _emit("\n".join(lines) + "\n", args.out)


COMMANDS = {
    "stats": cmd_stats,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
    "validate-conformal": cmd_validate_conformal,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except PQARejectError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())

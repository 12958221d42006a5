"""Command-line entry point: ``nctorus <subcommand> [options]``.

Exit status is 0 on success, 2 on usage errors and 3 when a computed
object violates a numerical invariant.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from .afl import BUILTIN_PARTITIONS, afl_profile, builtin_partitions
from .classical import (
    ACTIONS,
    DEFAULT_PRECISION,
    GridPartition,
    PrecisionError,
    read_word,
    required_precision,
    to_binary,
    trajectory_words,
    write_word,
)
from .depth import (
    encode_qubit_string,
    load_or_build,
    logical_depth,
    canonical_program,
)
from .entropy import BRUDNO_LABEL, block_entropy_profile, brudno_rate, trajectory_brudno
from .errors import BudgetExceeded, NumericalInvariantError
from .report import ClassificationVerdict, EvidenceOptions, classify_automorphism
from .sl2z import TSV_COLUMNS, SL2Matrix, TraceMode, sweep_classify
from .weyl import Theta

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3
LN2 = math.log(2)


class UsageError(Exception):
    pass


def _matrix(text: str) -> SL2Matrix:
    try:
        return SL2Matrix.parse(text)
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _theta(text: str) -> Theta:
    try:
        return Theta.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _trace_mode(text: str) -> str:
    try:
        return TraceMode(text).value
    except ValueError:
        return text  # rejected by ``choices`` with the usual message


def _bits(text: str) -> str:
    if not text or any(ch not in "01" for ch in text):
        raise argparse.ArgumentTypeError(f"not a bit string: {text!r}")
    return text


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in {"1", "true", "yes", "on"}:
        return True
    if value in {"0", "false", "no", "off"}:
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("global options")
    g.add_argument("--nats", action="store_true", default=default(False), help="report entropies in nats")
    g.add_argument("--seed", type=int, default=default(0), help="seed for every random draw")
    g.add_argument("--precision", type=int, default=default(DEFAULT_PRECISION), help="fixed-point bits for orbits")
    g.add_argument("--trace-mode", type=_trace_mode, choices=[m.value for m in TraceMode], default=default("positive"),
                   help="chaos rule: 'positive' (trace > 2) or 'hyperbolic' (|trace| > 2)")
    g.add_argument("--out", choices=["tsv", "json"], default=default(None), help="output format")
    g.add_argument("--config", default=default(None), help="file of 'key = value' lines; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nctorus", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        _global_options(p, suppress=True)
        return p

    p = command("classify", "spectral report and verdict for one matrix")
    p.add_argument("--matrix", type=_matrix, required=True, help="a,b,c,d")
    p.add_argument("--theta", type=_theta, default=Theta.golden(), help="p/q, decimal or 'golden'")
    p.add_argument("--evidence", action="store_true", help="gather evidence even when a theorem decides")

    p = command("sweep", "classify every matrix with bounded entries")
    p.add_argument("--max-entry", type=int, required=True)

    p = command("simulate", "symbolic orbit words of the classical map")
    p.add_argument("--matrix", type=_matrix, required=True)
    p.add_argument("--grid", type=int, default=2)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--action", choices=ACTIONS, default="transpose")
    p.add_argument("--word-out", help="binary word file; with several seeds, '{i}' is replaced by the index")

    p = command("entropy", "plug-in block entropy profile")
    p.add_argument("--matrix", type=_matrix, required=True)
    p.add_argument("--grid", type=int, default=2)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--maxn", type=int, default=12)
    p.add_argument("--miller-madow", action="store_true")
    p.add_argument("--action", choices=ACTIONS, default="transpose")

    p = command("brudno", "LZ78 compression rate of a word file or of orbit words")
    p.add_argument("--word", help="binary word file")
    p.add_argument("--matrix", type=_matrix)
    p.add_argument("--grid", type=int, default=4)
    p.add_argument("--length", type=int, default=100_000)
    p.add_argument("--seeds", type=int, default=8)
    p.add_argument("--action", choices=ACTIONS, default="transpose")

    p = command("afl", "AFL entropy production profile")
    p.add_argument("--matrix", type=_matrix, required=True)
    p.add_argument("--theta", type=_theta, default=Theta.golden())
    p.add_argument("--partition", choices=BUILTIN_PARTITIONS, default="weyl2")
    p.add_argument("--maxn", type=int, default=4)

    p = command("depth", "toy-machine logical depth bracket")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--string", type=_bits)
    src.add_argument("--qubits", help="JSON list of [re, im] amplitudes given as exact fraction strings")
    p.add_argument("--significance", type=int, default=1)
    p.add_argument("--max-prog-len", type=int, default=18)
    p.add_argument("--budget", type=int, default=4096)
    p.add_argument("--cache", help="program table cache file")

    p = command("report", "verdicts with evidence for several matrices")
    p.add_argument("--matrix", type=_matrix, action="append", required=True)
    p.add_argument("--theta", type=_theta, default=Theta.golden())
    return parser


def _read_config(path: str) -> dict[str, str]:
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for number, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = _read_config(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    parsers = [parser, *subparsers.choices.values()]
    for key, value in values.items():
        targets = [(p, a) for p in parsers for a in p._actions if a.dest == key and a.dest != "config"]
        if not targets:
            raise UsageError(f"unknown config key {key!r}")
        for p, action in targets:
            if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                converted = _bool(value)
            elif action.type is not None:
                try:
                    converted = action.type(value)
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"config key {key}: {exc}") from None
            else:
                converted = value
            if action.choices is not None and converted not in action.choices:
                raise UsageError(f"config key {key}: {value!r} not in {list(action.choices)}")
            # subcommand parsers carry SUPPRESS defaults for globals; only the root holds them
            if p is parser or action.default is not argparse.SUPPRESS:
                p.set_defaults(**{key: converted})
                action.required = False


def _emit(args, payload: dict, tsv: Callable[[], str], default: str = "json") -> None:
    fmt = args.out or default
    if fmt == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(tsv())


def _units(args) -> str:
    return "nats" if args.nats else "bits"


def cmd_classify(args) -> None:
    options = EvidenceOptions(seed=args.seed, always_gather=args.evidence)
    v = classify_automorphism(args.matrix, args.theta, options, args.trace_mode)
    _emit(args, v.to_dict(), lambda: _verdict_tsv([v]))


def _verdict_tsv(verdicts: list[ClassificationVerdict]) -> str:
    return "\n".join(["\t".join(ClassificationVerdict.TSV_HEADER)] + [v.tsv_row() for v in verdicts])


def cmd_report(args) -> None:
    options = EvidenceOptions(seed=args.seed, always_gather=True)
    verdicts = [classify_automorphism(C, args.theta, options, args.trace_mode) for C in args.matrix]
    payload = {"seed": args.seed, "verdicts": [v.to_dict() for v in verdicts]}
    _emit(args, payload, lambda: _verdict_tsv(verdicts))


def cmd_sweep(args) -> None:
    if not 0 <= args.max_entry <= 10:
        raise UsageError("--max-entry must lie in [0, 10]")
    reports = sweep_classify(args.max_entry, args.trace_mode)
    payload = {"max_entry": args.max_entry, "trace_mode": args.trace_mode, "count": len(reports),
               "reports": [r.to_dict() for r in reports]}
    _emit(args, payload, lambda: "\n".join(["\t".join(TSV_COLUMNS)] + [r.tsv_row() for r in reports]), "tsv")


def cmd_simulate(args) -> None:
    words = trajectory_words(
        args.matrix, GridPartition(args.grid), args.length, args.seeds, args.seed, args.precision, args.action
    )
    paths = []
    if args.word_out:
        for i, w in enumerate(words):
            path = args.word_out.replace("{i}", str(i)) if len(words) > 1 else args.word_out
            if len(words) > 1 and path == args.word_out:
                path = f"{args.word_out}.{i}"
            write_word(path, w)
            paths.append(path)
    payload = {
        "matrix": list(args.matrix.entries), "grid": args.grid, "length": args.length,
        "seed": args.seed, "precision": args.precision, "action": args.action,
        "files": paths, "words": [w.to_text() for w in words] if not paths else None,
    }
    _emit(args, payload, lambda: "\n".join(paths or [w.to_text() for w in words]), "tsv")


def cmd_entropy(args) -> None:
    profile = block_entropy_profile(
        args.matrix, GridPartition(args.grid), args.samples, args.maxn, args.precision, args.seed,
        args.miller_madow, _units(args), args.action,
    )
    _emit(args, profile.to_dict(), profile.tsv, "tsv")


def cmd_brudno(args) -> None:
    scale = LN2 if args.nats else 1.0
    units = f"{_units(args)} per symbol"
    if args.word:
        w = read_word(args.word)
        rate = brudno_rate(w) * scale
        payload = {"file": args.word, "alphabet": w.alphabet_size, "length": len(w),
                   "rate_per_symbol": rate, "units": units, "label": BRUDNO_LABEL}
        if w.alphabet_size != 2:
            payload["rate_per_binary_digit"] = brudno_rate(to_binary(w)) * scale
        _emit(args, payload, lambda: "\t".join(map(str, ("rate", rate))))
        return
    if args.matrix is None:
        raise UsageError("brudno needs --word or --matrix")
    # long words need more bits than the default; the precision actually used is echoed
    precision = max(args.precision, required_precision(args.matrix, args.length))
    est = trajectory_brudno(args.matrix, GridPartition(args.grid), args.length, args.seeds, args.seed,
                            precision, args.action)
    payload = est.to_dict()
    for key in ("mean_rate_per_binary_digit", "mean_rate_per_symbol"):
        payload[key] *= scale
    payload["binary_rates"] = [r * scale for r in est.binary_rates]
    payload["symbol_rates"] = [r * scale for r in est.symbol_rates]
    payload["units"] = _units(args)
    _emit(args, payload, lambda: "\n".join(
        ["seed_index\trate_per_binary_digit\trate_per_symbol"]
        + [f"{i}\t{b!r}\t{s!r}" for i, (b, s) in enumerate(zip(payload["binary_rates"], payload["symbol_rates"]))]
    ))


def cmd_afl(args) -> None:
    if args.theta.is_rational:
        print(f"warning: theta = {args.theta} is rational", file=sys.stderr)
    X = builtin_partitions(args.theta, args.partition)
    profile = afl_profile(args.matrix, X, args.maxn, _units(args), args.partition)
    _emit(args, profile.to_dict(), profile.tsv, "tsv")


def _parse_qubits(text: str) -> list:
    from fractions import Fraction

    try:
        raw = json.loads(text)
        return [(Fraction(str(re)), Fraction(str(im))) for re, im in raw]
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise UsageError(f"--qubits: {exc}") from None


def cmd_depth(args) -> None:
    if args.max_prog_len > 26:
        raise UsageError("--max-prog-len is limited to 26")
    x = args.string
    extra = {}
    if args.qubits is not None:
        amps = _parse_qubits(args.qubits)
        try:
            x = encode_qubit_string(amps)
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc)) from None
        extra["encoding"] = x
    table = load_or_build(args.max_prog_len, args.budget, args.cache)
    bracket = logical_depth(x, args.significance, args.max_prog_len, args.budget, table)
    cp = canonical_program(x, args.max_prog_len, args.budget, table)
    payload = {**bracket.to_dict(), **extra, "canonical_program": cp.program, "K_lower": cp.K_lower,
               "K_upper": cp.K_upper, "canonical_exact": cp.exact}
    _emit(args, payload, lambda: "\n".join([
        "string\tsignificance\tlower\tupper\texact\tK_lower\tK_upper",
        f"{x}\t{args.significance}\t{bracket.lower}\t{payload['upper']}\t{str(bracket.exact).lower()}"
        f"\t{cp.K_lower}\t{cp.K_upper}",
    ]))


COMMANDS = {
    "classify": cmd_classify, "sweep": cmd_sweep, "simulate": cmd_simulate, "entropy": cmd_entropy,
    "brudno": cmd_brudno, "afl": cmd_afl, "depth": cmd_depth, "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"nctorus: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except NumericalInvariantError as exc:
        print(f"nctorus: numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, PrecisionError, BudgetExceeded, ValueError) as exc:
        print(f"nctorus: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``lpdirichlet {constants,classify,flow,construct}``.

Exit codes: 0 success, 2 usage or domain error, 3 horizon or resource
failure.  JSON output is deterministic: keys sorted, floats rounded to
15 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .cf import DEFAULT_PREC, CFExpansion
from .classifier import classify, regime_of
from .constructors import (LABELS, ba_w, good_condition_check, witness_di1_minus_di2,
                           witness_di2_minus_di1, witness_di_minus_ba, witness_from_json)
from .errors import DomainError, HorizonError, PrecisionError, PreconditionError, ResourceError
from .flow import critical_times, crossing_locus_distances, write_trace_csv
from .lp import INF, constants, is_p0, p_zero

EXIT_OK, EXIT_USAGE, EXIT_HORIZON = 0, 2, 3

DEFAULTS = {"digits": None, "tmax": 1e4, "precision": DEFAULT_PREC, "format": "json",
            "workers": 1, "a0": 0, "seed": 0, "offset": None, "locus": False}


class UsageError(Exception):
    pass


def _round(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return float(f"{obj:.15g}")
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(_round(obj), sort_keys=True) + "\n"


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def parse_p(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "oo"):
        return INF
    if t == "p0":
        return p_zero()
    try:
        return float(t)
    except ValueError:
        raise UsageError(f"cannot parse p from {text!r}") from None


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(v) for v in text.replace(" ", "").split(",")]
    except ValueError:
        raise UsageError(f"cannot parse digits from {text!r}") from None


def parse_periodic(text: str, a0: int = 0) -> CFExpansion:
    """``"1,2"`` is the period ``(1, 2)``; ``"3,1;2"`` is preperiod ``(3, 1)`` then period ``(2)``."""
    pre, _, per = text.rpartition(";") if ";" in text else ("", "", text)
    period = _int_list(per)
    if not period:
        raise UsageError("empty period")
    return CFExpansion.periodic(a0, _int_list(pre), period)


def load_digit_file(path) -> CFExpansion:
    """A witness JSON file or plain text ``a0; a1, a2, ...`` (or whitespace separated digits)."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        if data.get("label") == "ba-w":
            c = data["construction"]
            return ba_w(c["epsilon"], c["words"], c.get("seed", 0), c.get("cycle", True))[1].as_expansion()
        if "construction" in data:
            return witness_from_json(data).as_expansion()
        if "kind" in data:
            return CFExpansion.from_json(data)
        if "digits_prefix" in data:
            return CFExpansion.prefix(0, data["digits_prefix"])
        raise UsageError("unrecognized JSON digit file")
    a0 = 0
    if ";" in text:
        head, text = text.split(";", 1)
        a0 = int(head.strip().lstrip("["))
    tokens = text.replace(",", " ").replace("]", " ").split()
    try:
        return CFExpansion.prefix(a0, [int(t) for t in tokens])
    except ValueError:
        raise UsageError(f"cannot parse digits in {path}") from None


def number_from_args(args) -> CFExpansion:
    given = [k for k in ("number", "rational", "periodic", "digit_file") if getattr(args, k, None)]
    if len(given) != 1:
        raise UsageError("give exactly one of --number, --rational, --periodic, --digit-file")
    if args.number:
        if args.number not in ("e", "golden"):
            raise UsageError(f"unknown named number {args.number!r}")
        return CFExpansion.e() if args.number == "e" else CFExpansion.golden()
    if args.rational:
        try:
            return CFExpansion.from_fraction(args.rational)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"cannot parse rational {args.rational!r}") from None
    if args.periodic:
        return parse_periodic(args.periodic, args.a0)
    return load_digit_file(args.digit_file)


# subcommands


def cmd_constants(args) -> str:
    if args.p0:
        p0 = p_zero()
        return dumps({"p0": p0, "p0_doubled_precision": p_zero(prec=2 * DEFAULT_PREC)})
    if args.p is None:
        raise UsageError("constants needs --p or --p0")
    p = parse_p(args.p)
    c = constants(p)
    out = c.to_json()
    out["p"] = "inf" if p == INF else p
    out["regime"] = regime_of(p).tag
    out["is_p0"] = p != INF and is_p0(p)
    return dumps(out)


def cmd_classify(args) -> str:
    if args.p is None:
        raise UsageError("classify needs --p")
    x = number_from_args(args)
    horizon = args.digits or 2000
    return dumps(classify(x, parse_p(args.p), horizon).to_json())


def cmd_flow(args) -> str:
    if args.p is None:
        raise UsageError("flow needs --p")
    x = number_from_args(args)
    p = parse_p(args.p)
    est = critical_times(x, p, float(args.tmax), prec=args.precision, workers=args.workers)
    if args.format == "csv":
        if not args.out:
            raise UsageError("--format csv needs --out")
        # the trace goes to the file, the summary to stdout
        write_trace_csv(est, args.out, x, with_locus=args.locus, prec=args.precision)
    summary = est.to_json()
    summary["number"] = str(x)
    if args.locus and p != INF:
        summary["crossing_locus_distances"] = crossing_locus_distances(x, est, args.precision)
    return dumps(summary)


def cmd_construct(args) -> str:
    label = args.label
    n = args.digits or 4096
    if label == "ba-w":
        if args.epsilon is None or not args.word:
            raise UsageError("ba-w needs --epsilon and at least one --word")
        words = [_int_list(w) for w in args.word]
        params, stream = ba_w(args.epsilon, words, args.seed)
        period = sum(params.nu) + sum(len(w) for w in params.words)
        check = good_condition_check(args.epsilon, words, max(n, 2 * period))
        out = {"label": label, "parameters": params.to_json(), "good_condition": check.to_json(),
               "construction": stream.as_expansion().metadata["construction"],
               "digits_prefix": stream.prefix(n)}
    else:
        if label == "di-minus-ba":
            if args.p is None:
                raise UsageError("di-minus-ba needs --p")
            w = witness_di_minus_ba(parse_p(args.p), offset=args.offset)
        elif label == "di1-minus-di2":
            w = witness_di1_minus_di2(offset=3 if args.offset is None else args.offset)
        else:
            w = witness_di2_minus_di1(offset=3 if args.offset is None else args.offset)
        out = w.to_json(n)
    if args.format == "txt":
        return " ".join(map(str, out["digits_prefix"])) + "\n"
    return dumps(out)


COMMANDS = {"constants": cmd_constants, "classify": cmd_classify, "flow": cmd_flow,
            "construct": cmd_construct}


def _add_number(sp):
    sp.add_argument("--number", help="named number: e or golden")
    sp.add_argument("--rational", metavar="P/Q")
    sp.add_argument("--periodic", metavar="PRE;PERIOD", help="e.g. '1' or '3,1;2'")
    sp.add_argument("--a0", type=int, help="integer part for --periodic (default 0)")
    sp.add_argument("--digit-file", dest="digit_file", metavar="PATH",
                    help="plain digits or a witness JSON file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpdirichlet",
                                 description="Dirichlet improvability for L_p norms.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("constants", help="sigma_p, Delta_p, 1/sqrt(Delta_p), p0")
    sp.add_argument("--p")
    sp.add_argument("--p0", action="store_true", default=None)

    sp = sub.add_parser("classify", help="improvability verdict")
    _add_number(sp)
    sp.add_argument("--p")
    sp.add_argument("--digits", type=int, help="scan horizon (default 2000)")

    sp = sub.add_parser("flow", help="critical times and Dirichlet estimate")
    _add_number(sp)
    sp.add_argument("--p")
    sp.add_argument("--tmax", type=float)
    sp.add_argument("--precision", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--format", choices=("json", "csv"))
    sp.add_argument("--locus", action="store_true", default=None,
                    help="add distances to the critical locus")

    sp = sub.add_parser("construct", help="emit a witness prefix")
    sp.add_argument("--label", required=True, choices=LABELS)
    sp.add_argument("--p")
    sp.add_argument("--digits", type=int, help="prefix length (default 4096)")
    sp.add_argument("--offset", type=int, help="schedule offset c in n_i = 2^(i+c)")
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--word", action="append", help="comma separated word, repeatable")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--format", choices=("json", "txt"))

    for name in COMMANDS:
        p = sub.choices[name]
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--config", metavar="PATH", help="JSON file with the same keys as the flags")
    return ap


def _merge_config(args):
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if getattr(args, key, None) is None:
                setattr(args, key, value)
    for key, value in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    if args.precision < 64:
        raise UsageError("precision must be >= 64 bits")
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args)
        text = COMMANDS[args.command](args)
        if text:
            _emit(text, args.out if args.command != "flow" or args.format != "csv" else None)
    except (UsageError, DomainError, PreconditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HorizonError, ResourceError, PrecisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HORIZON
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

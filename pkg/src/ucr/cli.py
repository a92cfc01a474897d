"""The ucr command line.

    ucr validate COALGEBRA
    ucr resolve COALGEBRA [--dim D] [--trunc N] [--strategy gu|min|padded] [--out FILE]
    ucr resolve --verify-only RESOLUTION
    ucr quillen COALGEBRA [--s-max S] [--t-max T] [--dim D] [--trunc N] [--format json|csv]
    ucr obstructions COALGEBRA [--n-max n] [--trunc N]
    ucr chi EXTENSION [--lambda auto|FILE]
    ucr delta EXTENSION LAMBDA LAMBDA2

Reports go to stdout (or --out); a short human summary goes to stderr.
Exit codes: 0 success, 1 usage or I/O, 2 mathematical failure, 3 truncation.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from . import __version__
from .coalg import UnstableCoalgebra, validate
from .cosimplicial import EdgeUndefined
from .documents import (
    SCHEMA,
    DocumentError,
    canonical_json,
    coalgebra_from_document,
    coalgebra_to_document,
    digest,
)
from .galgebra import InvariantViolation, NoSolution, StructuralError, TruncationOverflow, identity
from .quillen import (
    CofreeComplex,
    QuillenComplex,
    auto_lifting,
    characteristic_cocycle,
    difference_cocycle,
    extension_comparison,
    extension_from_twist,
    form_from_dict,
    obstruction_groups,
    perturb,
    quillen_table,
    twist_from_terms,
    validate_extension,
)
from .resolution import (
    STRATEGIES,
    PreconditionError,
    build_resolution,
    resolution_from_json,
    resolution_to_json,
    verify_resolution,
)

EXIT_OK, EXIT_USAGE, EXIT_MATH, EXIT_TRUNC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class MathFailure(Exception):
    """A computation finished and found a violated axiom; carries the report."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _threads() -> int:
    raw = os.environ.get("UCR_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"UCR_THREADS must be a non-negative integer, got {raw!r}") from None
    if n < 0:
        raise UsageError(f"UCR_THREADS must be a non-negative integer, got {n}")
    return n


def _read(path: str) -> tuple[Any, bytes]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(data), data
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DocumentError(f"{path}: not valid JSON ({exc})") from None


def _load_coalgebra(path: str) -> tuple[UnstableCoalgebra, bytes]:
    doc, raw = _read(path)
    return coalgebra_from_document(doc), raw


def _truncated(K: UnstableCoalgebra, N: int) -> UnstableCoalgebra:
    if K.trunc < N:
        raise TruncationOverflow(f"the input is known only through degree {K.trunc}; "
                                 f"lower --trunc to ≤ {K.trunc} or extend the document's truncation")
    return K.truncate(N) if K.trunc > N else K


def _report(command: str, path: str, raw: bytes, parameters: dict, results: dict) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "report",
        "header": {
            "tool": f"ucr {__version__}",
            "generated": _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat(),
            "threads": _threads(),
        },
        "body": {
            "command": command,
            "input": {"file": Path(path).name, "hash": digest(raw)},
            "parameters": parameters,
            "results": results,
        },
    }


def _say(*lines: str) -> None:
    for line in lines:
        print(line, file=sys.stderr)


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> tuple[dict, int]:
    K, raw = _load_coalgebra(args.coalgebra)
    rep = validate(K)
    out = _report("validate", args.coalgebra, raw, {}, {"validation": rep.to_dict(), "dims": list(K.space.dims())})
    if not rep.ok:
        _say_failures(rep)
        raise MathFailure("coalgebra axioms fail", out)
    _say(f"ok: {sum(K.space.dims())} basis elements through degree {K.trunc}, all axioms hold")
    return out, EXIT_OK


def _dims_table(res) -> list[str]:
    lines = ["level  " + " ".join(f"{d:>5}" for d in range(res.N + 1))]
    for n, row in enumerate(res.fresh_dims()):
        lines.append(f"V^{n:<4} " + " ".join(f"{x:>5}" for x in row))
    return lines


def cmd_resolve(args) -> tuple[dict, int]:
    if args.verify_only:
        doc, raw = _read(args.source)
        if not isinstance(doc, dict) or doc.get("kind") != "resolution" or "coalgebra" not in doc:
            raise DocumentError("--verify-only expects a resolution document written by `ucr resolve --out`")
        K = coalgebra_from_document(doc["coalgebra"])
        res = resolution_from_json(doc, _truncated(K, int(doc["N"])))
        rep = verify_resolution(res)
        params = {"D": res.D, "N": res.N, "strategy": res.strategy, "verify_only": True}
        out = _report("resolve", args.source, raw, params, {
            "verification": rep.to_dict(), "stamp": "verified" if rep.ok else "failed"})
        if not rep.ok:
            _say_failures(rep)
            raise MathFailure("stored resolution fails verification", out)
        _say("verified")
        return out, EXIT_OK
    K, raw = _load_coalgebra(args.source)
    _require_valid(K)
    N = args.trunc
    res = build_resolution(_truncated(K, N), args.dim, N, args.strategy)
    rep = verify_resolution(res)
    stamp = "verified" if rep.ok else "failed"
    params = {"D": args.dim, "N": N, "strategy": args.strategy}
    results = {"summary": res.summary(), "stamp": stamp, "verification": rep.to_dict()}
    out = _report("resolve", args.source, raw, params, results)
    if args.out:
        doc = resolution_to_json(res, stamp)
        doc["coalgebra"] = coalgebra_to_document(res.base)
        _write(args.out, canonical_json(doc))
        results["written"] = Path(args.out).name
    _say(*_dims_table(res), f"stamp: {stamp}")
    if not rep.ok:
        raise MathFailure("the constructed resolution fails verification", out)
    return out, EXIT_OK


def _say_failures(rep) -> None:
    for c in rep.failures():
        w = c.witness or {}
        _say(f"FAIL {c.name}: {w.get('element', '?')}: {w.get('operation', '')}: {w.get('discrepancy', '')}")


def _require_valid(K: UnstableCoalgebra) -> None:
    rep = validate(K)
    if not rep.ok:
        _say_failures(rep)
        raise MathFailure("the input coalgebra fails validation")


def cmd_quillen(args) -> tuple[dict | str, int]:
    K, raw = _load_coalgebra(args.coalgebra)
    _require_valid(K)
    N = args.trunc
    D = args.dim if args.dim is not None else args.s_max + 1
    if D < args.s_max + 1:
        raise EdgeUndefined(f"H^{args.s_max} needs --dim ≥ {args.s_max + 1}")
    tables = quillen_table(_truncated(K, N), args.s_max, args.t_max, N, args.strategy, D=D)
    params = {"D": D, "N": N, "strategy": args.strategy, "s_max": args.s_max, "t_max": args.t_max}
    for t, tab in tables.items():
        _say(f"Σ^{t}K: " + ", ".join(f"H^{s} = {tab.total(s)}" for s in tab.s_values))
    if args.format == "csv":
        return _csv(tables, args.s_max), EXIT_OK
    out = _report("quillen", args.coalgebra, raw, params, {"tables": [tab.to_dict() for tab in tables.values()]})
    return out, EXIT_OK


def _csv(tables: dict, s_max: int) -> str:
    blocks = []
    for t, tab in tables.items():
        lines = [f"# coefficients Σ^{t}K; entry = dim H^s with coefficients in degrees ≤ degree",
                 "degree," + ",".join(f"s{s}" for s in range(s_max + 1))]
        for d in range(tab.N + 1):
            lines.append(f"{d}," + ",".join(str(tab.dims[s][d]) for s in range(s_max + 1)))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def cmd_obstructions(args) -> tuple[dict, int]:
    K, raw = _load_coalgebra(args.coalgebra)
    _require_valid(K)
    N = args.trunc
    tabs = obstruction_groups(_truncated(K, N), args.n_max, N, args.strategy)
    params = {"D": tabs["D"], "N": N, "strategy": args.strategy, "n_max": args.n_max}
    for label, rows in (("A", tabs["A"]), ("B", tabs["B"])):
        for r in rows:
            _say(f"table {label} stage {r['n']}: H^{r['s']}(K; Σ^{r['n']}K) = {r['dim']}: {r['verdict']}")
    out = _report("obstructions", args.coalgebra, raw, params,
                  {"table_A": tabs["A"], "table_B": tabs["B"],
                   "note": "table A holds characteristic-class groups, table B difference-obstruction groups"})
    return out, EXIT_OK


def _load_extension(path: str):
    doc, raw = _read(path)
    if not isinstance(doc, dict) or doc.get("kind") != "extension":
        raise DocumentError(f"{path}: expected an extension document")
    for key in ("stage", "coalgebra"):
        if key not in doc:
            raise DocumentError(f"{path}: missing field {key!r}")
    n = doc["stage"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise DocumentError(f"{path}: stage must be an integer ≥ 1")
    K = coalgebra_from_document(doc["coalgebra"])
    _require_valid(K)
    N = int(doc.get("N", K.trunc))
    D = int(doc.get("D", n + 3))
    strategy = doc.get("strategy", "gu")
    if strategy not in STRATEGIES:
        raise DocumentError(f"{path}: unknown strategy {strategy!r}")
    if D < n + 2:
        raise EdgeUndefined(f"stage {n} needs a resolution with D ≥ {n + 2}")
    res = build_resolution(_truncated(K, N), D, N, strategy)
    cc = CofreeComplex(res, n + 2)
    try:
        twist = twist_from_terms(cc, n, doc.get("twist", {}))
    except (KeyError, TypeError, IndexError) as exc:
        raise DocumentError(f"{path}: malformed twist ({exc})") from None
    ext = extension_from_twist(cc, n, twist)
    rep = validate_extension(ext)
    if not rep.ok:
        raise MathFailure("the extension is not a comodule extension: " +
                          "; ".join(f"{c.name}: {c.witness['discrepancy']}" for c in rep.failures()))
    params = {"stage": n, "D": D, "N": N, "strategy": strategy}
    return ext, raw, params


def _load_lifting(source: str, ext, cx: QuillenComplex):
    lam = auto_lifting(ext)
    if source == "auto":
        return lam, "auto"
    doc, _ = _read(source)
    if not isinstance(doc, dict) or doc.get("kind") != "lifting" or not isinstance(doc.get("perturbation", {}), dict):
        raise DocumentError(f"{source}: expected a lifting document with a 'perturbation' object")
    form = form_from_dict(cx, ext.n + 1, doc.get("perturbation", {}))
    return perturb(ext, lam, form, cx), Path(source).name


def cmd_chi(args) -> tuple[dict, int]:
    ext, raw, params = _load_extension(args.extension)
    cx = QuillenComplex(ext.complex.res, ext.M)
    lam, label = _load_lifting(args.lam, ext, cx)
    r = characteristic_cocycle(ext, lam, cx)
    params["lambda"] = label
    out = _report("chi", args.extension, raw, params, {"characteristic": r.to_dict()})
    _say(f"characteristic class at stage {ext.n}: {'zero' if r.is_zero_class else 'nonzero class'}")
    return out, EXIT_OK


def cmd_delta(args) -> tuple[dict, int]:
    ext, raw, params = _load_extension(args.extension)
    cx = QuillenComplex(ext.complex.res, ext.M)
    lam, l1 = _load_lifting(args.lam, ext, cx)
    lam2, l2 = _load_lifting(args.lam2, ext, cx)
    r = difference_cocycle(ext, lam, lam2, cx)
    params.update({"lambda": l1, "lambda_prime": l2})
    results = {"difference": r.to_dict()}
    if r.is_zero_class:
        h = extension_comparison(ext, lam, lam2, r.witness, cx)
        results["comparison"] = {
            "verified": ["h∘ι = ι", "π∘h = π", "λ′∘h = λ", "h is an invertible comodule map"],
            "identity": h == identity(ext.E.space),
        }
    out = _report("delta", args.extension, raw, params, results)
    _say(f"difference class at stage {ext.n}: {'zero' if r.is_zero_class else 'nonzero class'}")
    return out, EXIT_OK


# ---------------------------------------------------------------------------
# plumbing


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from None


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _positive(text: str) -> int:
    v = _nonneg(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ucr", description="Exact computations with unstable coalgebras over the Steenrod algebra.")
    p.add_argument("--version", action="version", version=f"ucr {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check the coalgebra axioms")
    v.add_argument("coalgebra")
    v.add_argument("--out")
    v.set_defaults(run=cmd_validate)

    r = sub.add_parser("resolve", help="build and verify a cofree CW resolution")
    r.add_argument("source", help="coalgebra document, or a resolution document with --verify-only")
    r.add_argument("--dim", type=_positive, default=3)
    r.add_argument("--trunc", type=_nonneg, default=8)
    r.add_argument("--strategy", choices=STRATEGIES, default="gu")
    r.add_argument("--out", help="write the resolution document here")
    r.add_argument("--report", help="write the report here instead of stdout")
    r.add_argument("--verify-only", action="store_true")
    r.set_defaults(run=cmd_resolve)

    q = sub.add_parser("quillen", help="Quillen cohomology H^s(K; Σ^t K)")
    q.add_argument("coalgebra")
    q.add_argument("--s-max", type=_nonneg, default=2)
    q.add_argument("--t-max", type=_positive, default=2)
    q.add_argument("--dim", type=_positive)
    q.add_argument("--trunc", type=_nonneg, default=8)
    q.add_argument("--strategy", choices=STRATEGIES, default="gu")
    q.add_argument("--format", choices=("json", "csv"), default="json")
    q.add_argument("--out")
    q.set_defaults(run=cmd_quillen)

    o = sub.add_parser("obstructions", help="obstruction groups for characteristic classes and difference obstructions")
    o.add_argument("coalgebra")
    o.add_argument("--n-max", type=_positive, default=1)
    o.add_argument("--trunc", type=_nonneg, default=8)
    o.add_argument("--strategy", choices=STRATEGIES, default="gu")
    o.add_argument("--out")
    o.set_defaults(run=cmd_obstructions)

    c = sub.add_parser("chi", help="characteristic cocycle of an extension")
    c.add_argument("extension")
    c.add_argument("--lambda", dest="lam", default="auto", help="'auto' or a lifting document")
    c.add_argument("--out")
    c.set_defaults(run=cmd_chi)

    d = sub.add_parser("delta", help="difference cocycle of two liftings")
    d.add_argument("extension")
    d.add_argument("lam", metavar="LAMBDA", help="'auto' or a lifting document")
    d.add_argument("lam2", metavar="LAMBDA2", help="'auto' or a lifting document")
    d.add_argument("--out")
    d.set_defaults(run=cmd_delta)
    return p


def _emit(out: dict | str, path: str | None) -> None:
    text = out if isinstance(out, str) else canonical_json(out)
    if path:
        _write(path, text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _threads()
        dest = getattr(args, "report", None) if args.command == "resolve" else getattr(args, "out", None)
        try:
            out, code = args.run(args)
        except MathFailure as exc:
            if exc.report is not None:
                _emit(exc.report, dest)
            raise
        _emit(out, dest)
        return code
    except UsageError as exc:
        _say(f"ucr: error: {exc}")
        return EXIT_USAGE
    except DocumentError as exc:
        _say(f"ucr: input error: {exc}")
        return EXIT_USAGE
    except (TruncationOverflow, EdgeUndefined) as exc:
        _say(f"ucr: truncation: {exc}")
        return EXIT_TRUNC
    except (MathFailure, InvariantViolation, PreconditionError, NoSolution) as exc:
        _say(f"ucr: failed: {exc}")
        return EXIT_MATH
    except StructuralError as exc:
        _say(f"ucr: input error: {exc}")
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())

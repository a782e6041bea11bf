"""Command line front end: parse a DSL file, run one engine operation, print JSON.

Exit codes: 0 success, 1 mathematical failure (empty flat locus, step budget,
radical budget, failed verification), 2 input error.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

from . import engine, report
from .algebra import RadicalBudgetExceeded
from .dsl import DSLError, Session, parse_input
from .geometry import AffineChart, BlowupError, blow_up
from .modules import ModuleError, locally_free_test

COMMANDS = ("gb", "fitting", "flat-locus", "filtration", "center", "flatify", "resolve-ci",
            "stratify", "blowup", "verify")


class CLIError(Exception):
    def __init__(self, code: str, message: str, exit_code: int = 2, **extra):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code
        self.extra = extra


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flatify", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("input", help="DSL input file ('-' for stdin)")
    ap.add_argument("--module")
    ap.add_argument("--family")
    ap.add_argument("--ideal")
    ap.add_argument("--delta", help="comma-separated admissible ranks")
    ap.add_argument("--window", help="degree window LO:HI")
    ap.add_argument("--max-steps", type=int, default=32)
    ap.add_argument("--verify", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--allow-empty-flat-locus", action="store_true")
    ap.add_argument("--radical-budget", type=int, default=200)
    ap.add_argument("--out", help="write the report here instead of stdout")
    return ap


def _ranks(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    try:
        vals = sorted({int(t) for t in text.split(",") if t.strip()})
    except ValueError:
        raise CLIError("bad_flag", f"--delta expects integers, got {text!r}") from None
    if not vals or vals[0] < 0:
        raise CLIError("bad_flag", "--delta needs at least one non-negative rank")
    return vals


def _window(text: Optional[str]) -> Optional[Tuple[int, int]]:
    if text is None:
        return None
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise CLIError("bad_flag", f"--window expects LO:HI, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise CLIError("bad_flag", "--window must satisfy 0 <= LO <= HI")
    return lo, hi


def _lookup(session: Session, kind: str, name: Optional[str]):
    table = session.table(kind)
    if name is None:
        if len(table) == 1:
            return next(iter(table.values()))
        raise CLIError("missing_flag", f"specify --{kind}")
    if name not in table:
        raise CLIError("unknown_name", f"no {kind} named {name!r}")
    return table[name]


def _target(session: Session, args) -> Tuple[str, object]:
    if args.family is not None:
        return "family", _lookup(session, "family", args.family)
    if args.module is not None:
        return "module", _lookup(session, "module", args.module)
    if session.modules and not session.families:
        return "module", _lookup(session, "module", None)
    if session.families and not session.modules:
        return "family", _lookup(session, "family", None)
    raise CLIError("missing_flag", "specify --module or --family")


def _pieces(fam, window):
    from .modules import graded_piece
    lo, hi = window or engine.default_window(fam)
    return [graded_piece(fam, d) for d in range(lo, hi + 1)]


def run(command: str, session: Session, args) -> Tuple[Dict, int]:
    """Execute ``command``; returns the result payload and the exit code."""
    if command == "gb":
        I = _lookup(session, "ideal", args.ideal)
        return {"ideal": report.ideal(I), "ring": report.ring(I.ring),
                "dimension": I.dimension()}, 0

    if command == "resolve-ci":
        I = _lookup(session, "ideal", args.ideal)
        rep = engine.resolve_closed_immersion(I, verify=args.verify, seed=args.seed)
        return report.flattening(rep), 0 if rep.success else 1

    if command == "blowup":
        I = _lookup(session, "ideal", args.ideal)
        step = blow_up(AffineChart.root(I.ring), I)
        return report.blowup(step), 0

    kind, obj = _target(session, args)
    window = _window(args.window)
    delta = _ranks(args.delta)

    if command == "fitting":
        M = _need_module(kind, obj)
        return {"fitting_ideals": [report.ideal(F) for F in M.fitting_ideals()]}, 0

    if command == "flat-locus":
        mods = [obj] if kind == "module" else _pieces(obj, window)
        return report.locus(engine.flat_locus(mods)), 0

    if command == "filtration":
        mods = obj if kind == "module" else _pieces(obj, window)
        filt = engine.flattening_filtration(mods, args.radical_budget)
        return report.filtration(filt), 0 if filt.complete else 1

    if command == "center":
        M = _need_module(kind, obj)
        data = engine.flatify_center(M, _need_delta(delta),
                                     allow_empty=args.allow_empty_flat_locus)
        return report.center(data), 0

    if command == "stratify":
        fam = _need_family(kind, obj)
        rep = engine.hilbert_stratification(fam, window or engine.default_window(fam),
                                            args.radical_budget)
        return report.strata(rep), 0

    if command == "flatify":
        if kind == "module":
            rep = engine.flatify_module(obj, _need_delta(delta), verify=args.verify,
                                        allow_empty=args.allow_empty_flat_locus, seed=args.seed)
        else:
            rep = engine.projective_flatify(obj, window, max_steps=args.max_steps,
                                            verify=args.verify, seed=args.seed,
                                            radical_budget=args.radical_budget)
        code = 0 if rep.status in ("success", "vacuous") else 1
        out = report.flattening(rep)
        if rep.status == "budget":
            out["error"] = {"code": "step_budget", "message": "max_steps exhausted"}
        return out, code

    if command == "verify":
        if kind == "module":
            test = locally_free_test(obj, delta)
            return {"locally_free": test.verdict, "ranks": test.profile.ranks,
                    "fitting_idempotent": test.idempotent}, 0 if test.verdict else 1
        lo, hi = window or engine.default_window(obj)
        ok, per = engine.family_flat(obj, range(lo, hi + 1))
        return {"flat": ok, "degrees": {str(d): v for d, v in zip(range(lo, hi + 1), per)}}, \
            0 if ok else 1

    raise CLIError("bad_command", f"unknown command {command!r}")


def _need_module(kind, obj):
    if kind != "module":
        raise CLIError("missing_flag", "this command needs --module")
    return obj


def _need_family(kind, obj):
    if kind != "family":
        raise CLIError("missing_flag", "this command needs --family")
    return obj


def _need_delta(delta):
    if delta is None:
        raise CLIError("missing_flag", "module mode needs --delta")
    return delta


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    text = ""
    doc = {"version": report.SCHEMA_VERSION, "command": args.command, "seed": args.seed}
    try:
        try:
            if args.input == "-":
                text = sys.stdin.read()
            else:
                with open(args.input, encoding="utf-8") as fh:
                    text = fh.read()
        except OSError as exc:
            raise CLIError("io", str(exc)) from None
        doc["input_sha256"] = hashlib.sha256(text.encode("utf-8")).hexdigest()
        try:
            session = parse_input(text)
        except DSLError as exc:
            raise CLIError(exc.code, str(exc), line=exc.line, col=exc.col) from None
        result, code = run(args.command, session, args)
    except CLIError as exc:
        result = {"error": {"code": exc.code, "message": str(exc), **exc.extra}}
        code = exc.exit_code
    except engine.EmptyFlatLocus as exc:
        result, code = {"error": {"code": "empty_flat_locus", "message": str(exc)}}, 1
    except RadicalBudgetExceeded as exc:
        result, code = {"error": {"code": "radical_budget", "message": str(exc)}}, 1
    except engine.EngineError as exc:
        result, code = {"error": {"code": "verification_failed", "message": str(exc)}}, 1
    except (BlowupError, ModuleError, ValueError) as exc:
        result, code = {"error": {"code": "invalid_argument", "message": str(exc)}}, 2
    doc.setdefault("input_sha256", hashlib.sha256(text.encode("utf-8")).hexdigest())
    doc["result"] = result
    doc["timing_ms"] = round((time.perf_counter() - start) * 1000)
    out = report.dumps(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: toricsp {analyze, plot-roof, scenario, phi, capacity}.

Exit codes: 0 success, 1 a scenario verdict failed, 2 invalid input,
3 a sign could not be certified within the precision cap.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

log = logging.getLogger("toricsp")

EXIT_OK, EXIT_VERDICT, EXIT_INVALID, EXIT_INDETERMINATE = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="emit the JSON report instead of text")
    p.add_argument("--out", help="write the output to this file")
    p.add_argument("--precision-bits", type=int, help="interval ladder cap (overrides TSP_PRECISION_BITS)")
    p.add_argument("--tolerance", type=float, help="tolerance of the numeric (smooth metric) path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="toricsp", description="Exact analysis of adelic toric metrized divisors.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="roof functions, essential minimum, A/B/F sets, monocriticality")
    p.add_argument("--config", required=True)
    _common(p)

    p = sub.add_parser("plot-roof", help="SVG of a local or the global roof function")
    p.add_argument("--config", required=True)
    p.add_argument("--place", default="global")
    _common(p)

    p = sub.add_parser("scenario", help="run a named worked example against its golden values")
    p.add_argument("name", help="e.g. example5, prop8(c=5/4), bogomolov-prop2(n0=[1,1], a0=[1,0])")
    _common(p)

    p = sub.add_parser("phi", help="evaluate Phi_v on the measures of a measure file")
    p.add_argument("--config", required=True)
    p.add_argument("--place", required=True)
    p.add_argument("--measures", help="TOML file with a [measures] table (default: the config itself)")
    _common(p)

    p = sub.add_parser("capacity", help="adelic set capacity and the Theorem 13 hypotheses")
    p.add_argument("--config", required=True)
    _common(p)
    return ap


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _analysis_text(doc: dict) -> str:
    lines = [f"divisor: {doc['divisor']['name'] or '(unnamed)'}  dim {doc['divisor']['dim']}"]
    em = doc["ess_min"]
    lines.append(f"essential minimum: {em['exact'] if em['exact'] is not None else em['float']}"
                 + ("  [numeric]" if doc["numeric"] else ""))
    lines.append(f"maximizing set: {_set_text(doc['cmax'])}")
    for v in sorted(doc["places"]):
        s = doc["places"][v]
        lines.append(f"  {v}: A = {_set_text(s['A'])}  B = {_set_text(s['B'])}  F = {_set_text(s['F'])}")
    lines.append(f"monocritical: {str(doc['monocritical']).lower()}")
    if doc["critical_point"]:
        for v, u in sorted(doc["critical_point"].items()):
            lines.append(f"  critical point at {v}: ({', '.join(map(str, u))})")
    lines.append(f"quasi-canonical: {str(doc['quasi_canonical']).lower()}")
    return "\n".join(lines) + "\n"


def _set_text(d: dict) -> str:
    if d.get("text"):
        return d["text"]
    if d.get("empty"):
        return "empty"
    if "interval" in d:
        return f"[{d['interval'][0]}, {d['interval'][1]}]"
    s = "conv[" + "; ".join("(" + ", ".join(v) + ")" for v in d["vertices"]) + "]"
    if d.get("rays"):
        s += " + cone[" + "; ".join("(" + ", ".join(r) + ")" for r in d["rays"]) + "]"
    return s


def cmd_analyze(args) -> int:
    from .adelic import analyze
    from .config import load_config
    from .report import analysis_document, dumps, validate_report

    d = load_config(args.config).divisor
    if d is None:
        raise ValueError("config has no [divisor] table")
    doc = analysis_document(analyze(d))
    validate_report(doc)
    _emit(dumps(doc) if args.json else _analysis_text(doc), args.out)
    return EXIT_OK


def cmd_plot(args) -> int:
    from .config import load_config
    from .plot import plot_roof, roof_svg

    d = load_config(args.config).divisor
    if args.out:
        plot_roof(d, args.place, args.out)
    else:
        sys.stdout.write(roof_svg(d, args.place))
    return EXIT_OK


def cmd_scenario(args) -> int:
    from .report import dumps, validate_report
    from .scenarios import run_scenario

    doc = run_scenario(args.name)
    validate_report(doc)
    if args.json:
        _emit(dumps(doc), args.out)
    else:
        lines = [f"scenario {doc['scenario']}" + (f" {doc['params']}" if doc["params"] else "")]
        if doc["banner"]:
            lines.append(f"*** {doc['banner']} ***")
        for v in doc["verdicts"]:
            lines.append(f"  [{'PASS' if v['pass'] else 'FAIL'}] {v['check']}: observed {v['observed']!r}"
                         + (f", expected {v['expected']!r}" if v["source"] != "invariant" else ""))
        if not doc["golden"]:
            lines.append("  (no golden values for these parameters; invariants only)")
        lines.append("passed" if doc["passed"] else "FAILED")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if doc["passed"] else EXIT_VERDICT


def cmd_phi(args) -> int:
    from .adelic import phi
    from .config import load_config
    from .exactlog import LogScalar, format_logscalar
    from .places import Place
    from .report import SCHEMA_VERSION, dumps, validate_report

    cfg = load_config(args.config)
    mcfg = load_config(args.measures) if args.measures else cfg
    if not mcfg.measures:
        raise ValueError("no [measures] table to evaluate")
    v = Place.parse(args.place)
    rows = {}
    for name, mu in sorted(mcfg.measures.items()):
        val = phi(cfg.divisor, v, mu)
        rows[name] = {"exact": format_logscalar(val) if isinstance(val, LogScalar) else None, "float": float(val)}
    doc = {"schema_version": SCHEMA_VERSION, "kind": "phi", "place": str(v), "values": rows}
    validate_report(doc)
    if args.json:
        _emit(dumps(doc), args.out)
    else:
        _emit("".join(f"Phi_{v}({n}) = {r['exact'] if r['exact'] is not None else r['float']}\n"
                      for n, r in rows.items()), args.out)
    return EXIT_OK


def cmd_capacity(args) -> int:
    from .config import load_config
    from .potential import global_capacity, theorem13_check
    from .report import SCHEMA_VERSION, dumps, validate_report

    cfg = load_config(args.config)
    if cfg.sets is None:
        raise ValueError("config has no [sets] table")
    doc = {"schema_version": SCHEMA_VERSION, "kind": "capacity",
           "sets": cfg.sets.describe(), "capacity": str(global_capacity(cfg.sets))}
    if cfg.divisor is not None:
        doc["theorem13"] = theorem13_check(cfg.divisor, cfg.sets)
    validate_report(doc)
    if args.json:
        _emit(dumps(doc), args.out)
    else:
        lines = [f"global capacity: {doc['capacity']}"]
        t = doc.get("theorem13")
        if t:
            lines.append(f"capacity one: {t['capacity_one']}  centered: {t['centered']}  ({t['fekete_szego']})")
            for v, r in t["places"].items():
                lines.append(f"  {v}: support in F {r['support_in_F']}, expectation in B {r['expectation_in_B']}")
            lines.append("theorem 13 hypotheses: " + ("satisfied" if t["passed"] else "not satisfied"))
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "plot-roof": cmd_plot, "scenario": cmd_scenario,
            "phi": cmd_phi, "capacity": cmd_capacity}


def main(argv=None) -> int:
    from .adelic import DivisorValidationError, set_tolerance
    from .exactlog import IndeterminateSignError

    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.precision_bits is not None and args.precision_bits < 64:
        print("error: --precision-bits must be at least 64", file=sys.stderr)
        return EXIT_INVALID
    if args.tolerance is not None and not args.tolerance > 0:
        print("error: --tolerance must be positive", file=sys.stderr)
        return EXIT_INVALID
    from . import adelic

    old_bits, old_tol = os.environ.get("TSP_PRECISION_BITS"), adelic.NUM_TOL
    if args.precision_bits is not None:
        os.environ["TSP_PRECISION_BITS"] = str(args.precision_bits)
    if args.tolerance is not None:
        set_tolerance(args.tolerance)
    try:
        return COMMANDS[args.command](args)
    except DivisorValidationError as e:
        print(f"error: {e.path}: {e.reason}" if e.path else f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except IndeterminateSignError as e:
        print(f"indeterminate sign: {e}", file=sys.stderr)
        return EXIT_INDETERMINATE
    except (ValueError, FileNotFoundError, IsADirectoryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    finally:
        # main() may be called in-process; leave the settings as we found them
        if old_bits is None:
            os.environ.pop("TSP_PRECISION_BITS", None)
        else:
            os.environ["TSP_PRECISION_BITS"] = old_bits
        adelic.NUM_TOL = old_tol

if __name__ == "__main__":
    sys.exit(main())

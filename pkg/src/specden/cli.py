"""Command-line front end.

Exit codes: 0 success, 1 internal error, 2 verification failure or bad input.
Every file written with ``--out`` gets a ``<out>.manifest.json`` next to it.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import __version__

OK, INTERNAL, FAILED = 0, 1, 2

FORMATS_HELP = "Output schemas are documented in docs/formats.md."


class UsageError(Exception):
    """Bad input detected after argument parsing."""


# --------------------------------------------------------------------------
# argument types


def bits_arg(text: str) -> int:
    n = int(text)
    if n < 2:
        raise argparse.ArgumentTypeError("N must be at least 2")
    if n > 8:
        raise argparse.ArgumentTypeError("N above 8 is outside the supported range")
    return n


def positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def energies_arg(text: str) -> list[float]:
    """Comma list ``0.1,0.2`` or decade range ``1e-1..1e-8``."""
    from .hopping import decade_grid

    try:
        if ".." in text:
            lo, hi = text.split("..")
            return decade_grid(float(lo), float(hi))
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("energies must be positive")
    return vals


def seed_arg(text: str) -> int:
    s = int(text, 0)
    if not 0 <= s < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return s


# --------------------------------------------------------------------------
# output plumbing


class Run:
    """Collects outputs of one invocation and writes the manifest."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.t0 = time.perf_counter()
        self.outputs: list[str] = []

    def emit_rows(self, rows, fieldnames=None, json_data=None, text: str | None = None):
        """CSV to --out (plus a JSON mirror), or to stdout."""
        from .output import csv_text, json_text, with_suffix_json, write_csv, write_json

        out = getattr(self.args, "out", None)
        as_json = getattr(self.args, "json", False)
        if out:
            if str(out).endswith(".json"):
                self.outputs.append(str(write_json(out, json_data if json_data is not None else rows)))
            else:
                self.outputs.append(str(write_csv(out, rows, fieldnames)))
                mirror = with_suffix_json(out)
                self.outputs.append(str(write_json(mirror, json_data if json_data is not None else rows)))
        if as_json:
            print(json_text(json_data if json_data is not None else rows))
        elif text is not None:
            print(text, end="" if text.endswith("\n") else "\n")
        elif not out:
            print(csv_text(rows, fieldnames), end="")

    def finish(self, seed: int | None = None) -> None:
        from .output import RunManifest, write_manifest

        out = getattr(self.args, "out", None)
        target = out or getattr(self.args, "manifest", None)
        if not target:
            return
        flags = {k: v for k, v in vars(self.args).items() if k not in ("func", "argv")}
        m = RunManifest(
            command=self.args.command,
            flags=flags,
            seed=seed,
            wall_time=time.perf_counter() - self.t0,
            outputs=self.outputs,
            argv=self.args.argv,
        )
        if out:
            write_manifest(m, out)
        else:
            from .output import write_json

            write_json(target, m.to_json())


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


# --------------------------------------------------------------------------
# subcommands


def cmd_verify(args) -> int:
    from .carry import CarryParams, build_carry_system, offending_pairs, verify_initial_set_avoided, verify_no_interference
    from .tds import validate_system

    run = Run(args)
    p = CarryParams(args.bits)
    sys_ = build_carry_system(p)
    timings = {}
    t = time.perf_counter()
    val = validate_system(sys_)
    timings["validate_system"] = time.perf_counter() - t
    t = time.perf_counter()
    c = verify_initial_set_avoided(sys_)
    timings["verify_initial_set_avoided"] = time.perf_counter() - t
    t = time.perf_counter()
    b = verify_no_interference(sys_)
    timings["verify_no_interference"] = time.perf_counter() - t
    ok = val.ok and c.ok and b.ok
    report = {
        "n_bits": p.bits,
        "d_value": p.max_digit,
        "instructions": len(sys_.instructions),
        "ok": ok,
        "validate_system": val.to_json(),
        "initial_set_avoided": {"ok": c.ok, "failures": [d for d in c.details if not d["disjoint_from_I"]]},
        "no_interference": {"ok": b.ok, "pairs_checked": len(b.details),
                        "offending_pairs": [list(x) for x in offending_pairs(b)]},
        "seconds": timings,
    }
    lines = [
        f"bits={p.bits} max_digit={p.max_digit} instructions={len(sys_.instructions)}",
        f"validate_system: {'ok' if val.ok else 'FAIL'}",
        *(f"  {msg}" for msg in val.partition + val.condition_i + val.condition_ii),
        f"resulting sets miss the initial set: {'ok' if c.ok else 'FAIL'}",
        *(f"  {d['instruction']}: {d['resulting_set']}" for d in c.details if not d["disjoint_from_I"]),
        f"pairwise disjoint resulting sets ({len(b.details)} pairs): {'ok' if b.ok else 'FAIL'}",
        *(f"  {u} / {v}" for u, v in offending_pairs(b)),
    ]
    run.emit_rows([report], json_data=report, text="\n".join(lines))
    run.finish()
    return OK if ok else FAILED


def cmd_trace(args) -> int:
    from .carry import CarryParams, build_carry_system, trace

    run = Run(args)
    p = CarryParams(args.bits)
    sys_ = build_carry_system(p)
    try:
        path = trace(p, args.digits, sys_)
    except RuntimeError as exc:
        _err(str(exc))
        return FAILED
    a = p.alphabet
    lo = min((q for x in path for q, _ in x.tape), default=0) - 1
    hi = max((q for x in path for q, _ in x.tape), default=0) + 1
    rows = []
    for i, x in enumerate(path):
        ins = sys_.instruction_index(x)
        rows.append({
            "step": i,
            "tape": x.render(a, lo, hi).rsplit(", ", 1)[0],
            "state": _state_name(x.state),
            "symbol_at_head": a.names[x.symbol(0)],
            "instruction": sys_.instructions[ins].name if ins is not None else "e",
        })
    fields = ["step", "tape", "state", "symbol_at_head", "instruction"]
    if args.format == "csv":
        run.emit_rows(rows, fields)
    else:
        w = max(len(r["tape"]) for r in rows)
        text = "\n".join(f"{r['step']:>5}  {r['tape']:<{w}}  {r['state']:<18} {r['instruction']}"
                         for r in rows)
        run.emit_rows(rows, fields, text=text)
    run.finish()
    return OK


def _state_name(s: int) -> str:
    from .tds import STATES

    return STATES.names[s]


def cmd_census(args) -> int:
    from .carry import CarryParams, chain_census, guaranteed_measure

    run = Run(args)
    p = CarryParams(args.bits)
    cen = chain_census(p, args.max_digits)
    rows = []
    for r in cen.records:
        rows.append({
            "j": r.j,
            "l_j": r.length,
            "measure": r.measure,
            "measure_float": float(r.measure),
            "guaranteed_measure": guaranteed_measure(p, r.j),
            "length_ok": r.counting_bound_ok,
            "lower_bound_ok": r.lower_bound_ok,
            "accepted": r.accepted,
        })
    data = {"n_bits": p.bits, "d_value": p.max_digit, "disjoint": cen.disjoint,
            "total_measure": cen.total_measure, "records": rows}
    run.emit_rows(rows, json_data=data)
    print(f"# disjoint={cen.disjoint} total_measure={cen.total_measure} "
          f"({float(cen.total_measure):.6g})", file=sys.stderr)
    run.finish()
    ok = cen.disjoint and all(r.lower_bound_ok and r.counting_bound_ok and r.accepted
                              for r in cen.records) and cen.total_measure < 1
    return OK if ok else FAILED


def cmd_lemma_cert(args) -> int:
    from .chain_spectra import cofactor_oracle, det_exact, bottom_eigen_certificate

    run = Run(args)
    rows = []
    ok = True
    for m in range(2, args.max_length + 1):
        cert = bottom_eigen_certificate(m, rel_bits=args.rel_bits or None)
        row = cert.csv_row()
        row["det_is_one"] = det_exact(m) == 1
        if m <= args.cofactor_max:
            row["cofactor_ok"] = cofactor_oracle(m)
            ok &= row["cofactor_ok"]
        else:
            row["cofactor_ok"] = ""
        ok &= cert.passed and row["det_is_one"]
        rows.append(row)
    fields = ["m", "det", "lambda1_lo", "lambda1_hi", "threshold", "pass", "det_is_one", "cofactor_ok"]
    if not rows:
        print("# nothing to certify: lengths start at m = 2", file=sys.stderr)
    run.emit_rows(rows, fields)
    run.finish()
    return OK if ok else FAILED


def cmd_bs_det(args) -> int:
    from .chain_spectra import bs_determinant_gap

    run = Run(args)
    rows = []
    ok = True
    for g in bs_determinant_gap(args.max_length):
        rows.append({
            "m": g.m,
            "det_chain": str(g.det_chain),
            "det_limit_side": str(g.det_plus),
            "normalized": g.normalized,
            "verdict": g.verdict,
        })
        ok &= g.det_chain == 1 and g.verdict
    run.emit_rows(rows, ["m", "det_chain", "det_limit_side", "normalized", "verdict"])
    run.finish()
    return OK if ok else FAILED


def cmd_bound_table(args) -> int:
    from .carry import CarryParams, chain_census, chain_mass_constants
    from .spectral_estimator import ThresholdError, bound_table, interpolation_check

    run = Run(args)
    p = CarryParams(args.bits)
    try:
        d = Fraction(args.delta)
    except ValueError:
        raise UsageError(f"cannot parse delta {args.delta!r}") from None
    census = chain_census(p, args.max_digits)
    try:
        rows = bound_table(p, args.max_digits, d, census)
    except ThresholdError as exc:
        _err(str(exc))
        return FAILED
    out = [r.to_json() for r in rows]
    C = chain_mass_constants(p).mass_constant
    data = {
        "n_bits": p.bits, "delta": args.delta, "C": C, "label": "certified lower bounds only",
        "rows": out,
        "between_grid_points": interpolation_check(rows, d, C, nominal_ratio=p.max_digit + 1),
    }
    run.emit_rows(out, list(out[0].keys()) if out else None, json_data=data)
    run.finish()
    return OK if all(r.ratio >= 1 for r in rows) else FAILED


def cmd_group_ring(args) -> int:
    from .carry import CarryParams
    from .spectral_estimator import emit_group_ring_form

    run = Run(args)
    text = emit_group_ring_form(CarryParams(args.bits))
    if args.out:
        Path(args.out).write_text(text)
        run.outputs.append(str(args.out))
    else:
        print(text, end="")
    run.finish()
    return OK


def cmd_dos(args) -> int:
    from .hopping import dos_window, parse_law

    run = Run(args)
    try:
        law = parse_law(args.law)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if args.size % 2:
        raise UsageError(f"--size {args.size} must be even (the estimator subtracts n/2)")
    est = dos_window(law, args.size, args.samples, args.energies, args.seed)
    fields = ["epsilon", "mu_hat", "stderr", "n", "samples", "seed"]
    data = {"law": est.law, "rows": est.rows()}
    run.emit_rows(est.rows(), fields, json_data=data)
    run.finish(seed=args.seed)
    return OK


def cmd_fit(args) -> int:
    from .hopping import DosEstimate, FitError, fit_log_exponent
    from .output import read_csv

    run = Run(args)
    path = Path(args.input)
    if not path.is_file():
        raise UsageError(f"input file not found: {path}")
    rows = read_csv(path)
    try:
        est = DosEstimate(
            epsilons=tuple(float(r["epsilon"]) for r in rows),
            mu_hat=tuple(float(r["mu_hat"]) for r in rows),
            stderr=tuple(float(r["stderr"]) for r in rows),
            samples=int(rows[0]["samples"]),
            n=int(rows[0]["n"]),
            seed=int(rows[0]["seed"]),
        )
    except (KeyError, IndexError, ValueError) as exc:
        raise UsageError(f"{path} is not a dos CSV: {exc}") from None
    try:
        fit = fit_log_exponent(est)
    except FitError as exc:
        _err(str(exc))
        return FAILED
    data = {
        "alpha": fit.alpha,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "poor_fit": fit.poor,
        "residuals": list(fit.residuals),
        "epsilons": [est.epsilons[i] for i in fit.used],
        "power_ratios": {str(k): list(v) for k, v in fit.power_ratios.items()},
        "power_trend_increasing": {str(k): v for k, v in fit.power_trend.items()},
    }
    lines = [f"alpha = {fit.alpha:.4f}  intercept = {fit.intercept:.4f}  "
             f"R^2 = {fit.r_squared:.5f}{'  (poor fit)' if fit.poor else ''}"]
    for eta, ok in fit.power_trend.items():
        lines.append(f"mu/eps^{eta}: {'increasing' if ok else 'not increasing'} as eps decreases")
    run.emit_rows([{"alpha": fit.alpha, "intercept": fit.intercept, "r_squared": fit.r_squared,
                    "poor_fit": fit.poor}], json_data=data, text="\n".join(lines))
    run.finish(seed=est.seed)
    return OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="specden",
        description="Certified spectral bounds for carry-machine operators and "
                    "random hopping chain experiments.",
        epilog=FORMATS_HELP + " SPECDEN_THREADS caps parallel threads.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help: str, out: bool = True) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help, description=help, epilog=FORMATS_HELP)
        sp.set_defaults(func=func)
        if out:
            sp.add_argument("--out", help="write CSV (or .json) here; a manifest goes next to it")
            sp.add_argument("--manifest", help="manifest path when no --out is given")
        return sp

    sp = add("verify", cmd_verify, "check the partition, resulting-set disjointness and initial-set avoidance")
    sp.add_argument("--bits", type=bits_arg, required=True)
    sp.add_argument("--json", action="store_true", help="machine-readable report on stdout")

    sp = add("trace", cmd_trace, "trajectory of the canonical j-digit configuration")
    sp.add_argument("--bits", type=bits_arg, required=True)
    sp.add_argument("--digits", type=positive_int, required=True)
    sp.add_argument("--format", choices=("table", "csv"), default="table")

    sp = add("census", cmd_census, "chain lengths, measures and disjointness, j = 1..J")
    sp.add_argument("--bits", type=bits_arg, required=True)
    sp.add_argument("--max-digits", type=positive_int, required=True)
    sp.add_argument("--json", action="store_true")

    sp = add("lemma-cert", cmd_lemma_cert, "exact certificates 0 < lambda_1(U_m) < 5^-ceil(m/3)")
    sp.add_argument("--max-length", type=positive_int, required=True)
    sp.add_argument("--rel-bits", type=int, default=0,
                    help="also enclose lambda_1 to this many relative bits (0: skip)")
    sp.add_argument("--cofactor-max", type=int, default=30,
                    help="run the inverse-entry oracle for m up to this value")

    sp = add("bs-det", cmd_bs_det, "determinants of U_m and of the all-5 matrix")
    sp.add_argument("--max-length", type=positive_int, required=True)

    sp = add("bound-table", cmd_bound_table, "certified lower bounds at eps_j = 5^(-l_j/3)")
    sp.add_argument("--bits", type=bits_arg, required=True)
    sp.add_argument("--max-digits", type=positive_int, required=True)
    sp.add_argument("--delta", required=True, help="exponent d, e.g. 0.27 or 27/100")
    sp.add_argument("--json", action="store_true")

    sp = add("group-ring", cmd_group_ring, "render S as a group ring element")
    sp.add_argument("--bits", type=bits_arg, required=True)

    sp = add("dos", cmd_dos, "Monte Carlo density of states of random hopping chains near 0")
    sp.add_argument("--size", type=positive_int, required=True)
    sp.add_argument("--samples", type=positive_int, default=1)
    sp.add_argument("--law", default="trig3",
                    help="trig3 | constant:<v> | file:<path> | trig:c0,c1,...")
    sp.add_argument("--energies", type=energies_arg, required=True,
                    help="comma list or decade range like 1e-1..1e-8")
    sp.add_argument("--seed", type=seed_arg, default=0)
    sp.add_argument("--json", action="store_true")

    sp = add("fit", cmd_fit, "fit mu = A |log eps|^-alpha to a dos CSV")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--json", action="store_true")
    return ap


def main(argv: list[str] | None = None) -> int:
    from .kernels import configure_threads

    ap = build_parser()
    args = ap.parse_args(argv)  # exits with 2 on usage errors
    args.argv = list(sys.argv[1:] if argv is None else argv)
    configure_threads()
    try:
        return args.func(args)
    except UsageError as exc:
        _err(str(exc))
        return FAILED
    except BrokenPipeError:
        return OK
    except Exception as exc:  # noqa: BLE001 - anything else is a bug
        _err(f"internal error: {type(exc).__name__}: {exc}")
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())

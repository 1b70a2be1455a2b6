"""Command-line front end.

Subcommands: state-measure, channel-measure, one-shot, sweep, selftest.
Inputs are JSON state/channel descriptions (file path or inline string);
reports are emitted as JSON (schema "kappa-cost/1") or CSV. Exit codes:
0 success, 2 parse error, 3 dimension error, 4 solver failure, 5 selftest
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import (
    __version__,
    channel_measures,
    channels,
    checks,
    matcore,
    sdpcore,
    state_measures,
    states,
)

SCHEMA = "kappa-cost/1"

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_SOLVER = 4
EXIT_SELFTEST = 5

ENV_GAP_TOL = "KAPPACOST_GAP_TOL"
ENV_FEAS_TOL = "KAPPACOST_FEAS_TOL"

STATE_QUANTITIES = ("e_kappa", "e_n", "z_upper", "one_shot", "closed_form")
CHANNEL_QUANTITIES = (
    "e_kappa",
    "q_theta",
    "one_shot",
    "closed_form",
    "gaussian",
    "sequential_bounds",
)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _solver_config(args) -> sdpcore.SolverConfig:
    gap = args.gap_tol
    if gap is None:
        gap = float(os.environ.get(ENV_GAP_TOL, 1e-8))
    feas = args.feas_tol
    if feas is None:
        feas = float(os.environ.get(ENV_FEAS_TOL, 1e-8))
    return sdpcore.SolverConfig(gap_tol=gap, feas_tol=feas)


def _load_json_input(raw: str) -> dict:
    text = raw
    if os.path.exists(raw):
        with open(raw) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"input is not valid JSON: line {exc.lineno} column {exc.colno}", EXIT_PARSE)


def _parse_state(obj: dict) -> states.DensityMatrix:
    try:
        return states.state_from_json(obj)
    except matcore.DimensionMismatchError as exc:
        raise CliError(f"dimension mismatch: {exc}", EXIT_DIMENSION)
    except (states.StateValidationError, ValueError, TypeError) as exc:
        raise CliError(f"invalid state: {exc}", EXIT_PARSE)


def _parse_channel(obj: dict):
    try:
        return channels.channel_from_json(obj)
    except matcore.DimensionMismatchError as exc:
        raise CliError(f"dimension mismatch: {exc}", EXIT_DIMENSION)
    except (channels.ChannelValidationError, ValueError, TypeError) as exc:
        raise CliError(f"invalid channel: {exc}", EXIT_PARSE)


def _maybe_matrix(m, include: bool):
    if not include or m is None:
        return None
    return states.matrix_to_json(m)


def _agreement(a: float | None, b: float | None, rel: float = 1e-5):
    if a is None or b is None:
        return None
    return bool(abs(a - b) <= rel * max(1.0, abs(a), abs(b)))


def _run_quantity(fn):
    """Run one quantity; solver failures are recorded, not fatal to the batch."""
    try:
        return fn(), None
    except (sdpcore.SolverFailure, sdpcore.BracketError) as exc:
        return None, str(exc)


def _state_results(dm: states.DensityMatrix, quantities, cfg, witnesses: bool):
    results = {}
    had_solver_error = False
    closed = state_measures.closed_form_state(dm)
    for q in quantities:
        if q == "e_kappa":
            res, err = _run_quantity(lambda: state_measures.exact_cost(dm, cfg))
            if err:
                results[q] = {"error": err}
                had_solver_error = True
                continue
            results[q] = {
                "value_bits": res.value_bits,
                "primal_bits": res.primal_bits,
                "dual_bits": res.dual_bits,
                "gap": res.gap,
                "solver_iterations": res.solver_iterations,
                "closed_form_bits": closed,
                "closed_form_agrees": _agreement(res.value_bits, closed),
            }
            if witnesses:
                results[q]["witness_s"] = _maybe_matrix(res.witness_primal, True)
                results[q]["witness_v"] = _maybe_matrix(res.witness_dual[0], True)
                results[q]["witness_w"] = _maybe_matrix(res.witness_dual[1], True)
        elif q == "e_n":
            results[q] = {"value_bits": state_measures.log_negativity(dm)}
        elif q == "z_upper":
            results[q] = {
                "value_bits": state_measures.z_upper(dm),
                "binegativity_holds": state_measures.binegativity_holds(dm),
            }
        elif q == "one_shot":
            res, err = _run_quantity(lambda: state_measures.one_shot_ppt_cost(dm, cfg))
            if err:
                results[q] = {"error": err}
                had_solver_error = True
                continue
            results[q] = {
                "cost_bits": res.cost_bits,
                "m_real": res.m_real,
                "m_integer": res.m_integer,
                "sandwich_bits": list(res.sandwich),
            }
            if witnesses:
                results[q]["witness_g"] = _maybe_matrix(res.g_witness.mat, True)
        elif q == "closed_form":
            results[q] = {"value_bits": closed, "available": closed is not None}
        else:
            raise CliError(f"unknown state quantity {q!r}", EXIT_PARSE)
    return results, had_solver_error


def _channel_results(ch, quantities, cfg, witnesses: bool):
    results = {}
    had_solver_error = False
    if isinstance(ch, channels.GaussianChannelParams):
        for q in quantities:
            if q == "gaussian":
                gc = channel_measures.gaussian_cost(ch)
                results[q] = {"tag": gc.tag, "value_bits": gc.value_bits}
            else:
                results[q] = {
                    "error": "Gaussian channels support only the 'gaussian' quantity"
                }
        return results, had_solver_error
    closed = channel_measures.closed_form_channel(ch)
    for q in quantities:
        if q == "e_kappa":
            res, err = _run_quantity(lambda: channel_measures.e_kappa_channel(ch, cfg))
            if err:
                results[q] = {"error": err}
                had_solver_error = True
                continue
            results[q] = {
                "value_bits": res.value_bits,
                "primal_bits": res.primal_bits,
                "dual_bits": res.dual_bits,
                "gap": res.gap,
                "solver_iterations": res.solver_iterations,
                "closed_form_bits": closed,
                "closed_form_agrees": _agreement(res.value_bits, closed),
            }
            if witnesses:
                results[q]["witness_q"] = _maybe_matrix(res.q_witness, True)
                results[q]["witness_v"] = _maybe_matrix(res.dual_witness[0], True)
                results[q]["witness_w"] = _maybe_matrix(res.dual_witness[1], True)
                results[q]["witness_rho_a"] = _maybe_matrix(res.dual_witness[2], True)
        elif q == "q_theta":
            res, err = _run_quantity(lambda: channel_measures.q_theta(ch, cfg))
            if err:
                results[q] = {"error": err}
                had_solver_error = True
            else:
                results[q] = {"value_bits": res}
        elif q == "one_shot":
            res, err = _run_quantity(
                lambda: channel_measures.one_shot_channel_cost(ch, cfg)
            )
            if err:
                results[q] = {"error": err}
                had_solver_error = True
                continue
            results[q] = {
                "cost_bits": res.one_shot_bits,
                "m_real": res.m_real,
                "m_integer": res.m_integer,
                "parallel_asymptotic_bits": res.parallel_asymptotic_bits,
                "sequential_asymptotic_bits": res.sequential_asymptotic_bits,
            }
            if witnesses:
                results[q]["witness_q"] = _maybe_matrix(res.q_choi_witness, True)
        elif q == "closed_form":
            results[q] = {"value_bits": closed, "available": closed is not None}
        elif q == "gaussian":
            results[q] = {"error": "channel has a finite Choi matrix; not Gaussian"}
        elif q == "sequential_bounds":
            res, err = _run_quantity(
                lambda: channel_measures.e_kappa_channel_primal(ch, cfg)
            )
            if err:
                results[q] = {"error": err}
                had_solver_error = True
                continue
            bounds = {
                str(n): list(channel_measures.sequential_bounds(res.value_bits, n))
                for n in (1, 2, 3, 4, 5)
            }
            results[q] = {"e_kappa_bits": res.value_bits, "bounds_by_n": bounds}
        else:
            raise CliError(f"unknown channel quantity {q!r}", EXIT_PARSE)
    return results, had_solver_error


def _make_report(command: str, input_obj, results, args, t0: float) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "input": input_obj,
        "results": results,
        "seed": args.seed,
        "tolerances": {"gap_tol": _solver_config(args).gap_tol, "feas_tol": _solver_config(args).feas_tol},
        "versions": {"kappacost": __version__, "numpy": np.__version__},
        "wall_clock_s": round(time.time() - t0, 3),
    }


def _flatten(prefix: str, obj, rows):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(obj, (list, tuple)):
        rows.append((prefix, json.dumps(obj)))
    else:
        rows.append((prefix, obj))


def _emit(report: dict, args):
    if args.format == "csv":
        rows = []
        _flatten("", report["results"], rows)
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["quantity", "value"])
        for key, value in rows:
            writer.writerow([key, value])
        text = buf.getvalue()
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_state_measure(args) -> int:
    t0 = time.time()
    obj = _load_json_input(args.input)
    dm = _parse_state(obj)
    cfg = _solver_config(args)
    quantities = args.quantities or ["e_kappa", "e_n", "z_upper", "closed_form"]
    results, solver_error = _state_results(dm, quantities, cfg, args.witnesses)
    _emit(_make_report("state-measure", obj, results, args, t0), args)
    return EXIT_SOLVER if solver_error else EXIT_OK


def cmd_channel_measure(args) -> int:
    t0 = time.time()
    obj = _load_json_input(args.input)
    ch = _parse_channel(obj)
    cfg = _solver_config(args)
    default = ["gaussian"] if isinstance(ch, channels.GaussianChannelParams) else [
        "e_kappa",
        "q_theta",
        "closed_form",
    ]
    quantities = args.quantities or default
    results, solver_error = _channel_results(ch, quantities, cfg, args.witnesses)
    _emit(_make_report("channel-measure", obj, results, args, t0), args)
    return EXIT_SOLVER if solver_error else EXIT_OK


def cmd_one_shot(args) -> int:
    t0 = time.time()
    obj = _load_json_input(args.input)
    cfg = _solver_config(args)
    is_channel = "choi" in obj or str(obj.get("kind", "")).lower() in (
        "identity",
        "erasure",
        "depolarizing",
        "dephasing",
        "amplitude_damping",
        "isotropic_twirl",
    )
    if is_channel:
        ch = _parse_channel(obj)
        results, solver_error = _channel_results(ch, ["one_shot"], cfg, args.witnesses)
    else:
        dm = _parse_state(obj)
        results, solver_error = _state_results(dm, ["one_shot"], cfg, args.witnesses)
    _emit(_make_report("one-shot", obj, results, args, t0), args)
    return EXIT_SOLVER if solver_error else EXIT_OK


def _sweep_point(payload):
    r, gap_tol, feas_tol = payload
    cfg = sdpcore.SolverConfig(gap_tol=gap_tol, feas_tol=feas_tol)
    ch = channels.amplitude_damping_channel(r)
    try:
        e = channel_measures.e_kappa_channel_primal(ch, cfg).value_bits
        qt = channel_measures.q_theta(ch, cfg)
        return {"r": r, "e_kappa_bits": e, "q_theta_bits": qt, "error": None}
    except (sdpcore.SolverFailure, sdpcore.BracketError) as exc:
        return {"r": r, "e_kappa_bits": None, "q_theta_bits": None, "error": str(exc)}


def sweep_amplitude_damping(steps: int, jobs: int = 1, cfg: sdpcore.SolverConfig | None = None):
    """Amplitude damping cost curve on an r-grid over [0, 1].

    Returns rows of (r, e_kappa_bits, q_theta_bits), ordered by r; per-point
    solver failures are recorded in the row and do not abort the sweep.
    """
    if steps < 2:
        raise ValueError("sweep needs at least 2 steps")
    cfg = cfg or sdpcore.SolverConfig()
    grid = [i / (steps - 1) for i in range(steps)]
    payloads = [(r, cfg.gap_tol, cfg.feas_tol) for r in grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]
    rows.sort(key=lambda row: row["r"])
    return rows


def cmd_sweep(args) -> int:
    t0 = time.time()
    cfg = _solver_config(args)
    rows = sweep_amplitude_damping(args.steps, jobs=args.jobs, cfg=cfg)
    solver_error = any(row["error"] for row in rows)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["r", "e_kappa_bits", "q_theta_bits", "error"])
        for row in rows:
            writer.writerow(
                [row["r"], row["e_kappa_bits"], row["q_theta_bits"], row["error"] or ""]
            )
        text = buf.getvalue()
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        report = _make_report("sweep", {"family": "amplitude_damping", "steps": args.steps}, rows, args, t0)
        _emit(report, args)
    if args.plot:
        _render_sweep_plot(rows, args.plot)
    return EXIT_SOLVER if solver_error else EXIT_OK


def _render_sweep_plot(rows, path: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    good = [row for row in rows if row["error"] is None]
    rs = [row["r"] for row in good]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(rs, [row["e_kappa_bits"] for row in good], label="exact cost (bits)")
    ax.plot(
        rs,
        [row["q_theta_bits"] for row in good],
        linestyle="--",
        label="partial transposition bound (bits)",
    )
    ax.set_xlabel("damping parameter r")
    ax.set_ylabel("bits")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cmd_selftest(args) -> int:
    t0 = time.time()
    suites = checks.run_all()
    all_ok = all(s.ok for s in suites)
    lines = []
    for s in suites:
        flag = "PASS" if s.ok else "FAIL"
        lines.append(f"{flag}  {s.passed}/{s.total}  {s.name}")
        for failure in s.failures:
            lines.append(f"      {failure}")
    summary = "\n".join(lines)
    if args.format == "json":
        report = _make_report(
            "selftest",
            None,
            [
                {
                    "name": s.name,
                    "passed": s.passed,
                    "total": s.total,
                    "failures": s.failures,
                }
                for s in suites
            ],
            args,
            t0,
        )
        _emit(report, args)
    else:
        out = summary + "\n"
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(out)
        else:
            sys.stdout.write(out)
    return EXIT_OK if all_ok else EXIT_SELFTEST


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kappacost",
        description="Exact PPT entanglement cost of bipartite states and channels.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input: bool):
        if needs_input:
            p.add_argument("--input", required=True, help="JSON file path or inline JSON")
        p.add_argument("--quantities", nargs="*", default=None)
        p.add_argument("--output", default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--witnesses", action="store_true")
        p.add_argument("--gap-tol", type=float, default=None)
        p.add_argument("--feas-tol", type=float, default=None)

    p = sub.add_parser("state-measure", help="state quantities from a state JSON")
    common(p, True)
    p.set_defaults(fn=cmd_state_measure)

    p = sub.add_parser("channel-measure", help="channel quantities from a channel JSON")
    common(p, True)
    p.set_defaults(fn=cmd_channel_measure)

    p = sub.add_parser("one-shot", help="one-shot exact cost of a state or channel")
    common(p, True)
    p.set_defaults(fn=cmd_one_shot)

    p = sub.add_parser("sweep", help="amplitude damping cost curve")
    common(p, False)
    p.add_argument("--steps", type=int, default=21)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--plot", default=None, help="optional PNG path for the curve")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("selftest", help="run the full invariant battery")
    common(p, False)
    p.set_defaults(fn=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except sdpcore.SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except matcore.DimensionMismatchError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION


if __name__ == "__main__":
    sys.exit(main())

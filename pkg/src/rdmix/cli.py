"""Command-line front-end: profile | simulate | verify | constants | conjugate | sweep.

Exit codes: 0 success, 1 verification failure, 2 numerical failure, 3 usage
or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, runio
from .certificates import (
    compute_constants,
    select_certificate,
    verify_decay,
)
from .conjugate import PhiFamily, m_hat, phi_conjugate_bound, phi_conjugate_numeric
from .errors import ParseError, RdmixError, ThetaTooLarge, UnsupportedRegime
from .profile import profile_invariants, solve_profile
from .simulate import run

logger = logging.getLogger("rdmix")

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_NUMERICAL = 2
EXIT_USAGE = 3


def _load_config(path: str):
    return runio.parse_config(Path(path).read_text(encoding="utf-8"))


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_profile(args) -> int:
    config = _load_config(args.config)
    grid = config.make_grid()
    sol = solve_profile(config.data, grid, tol=config.profile_tol)
    out = _outdir(args)
    csv_path = out / "profile.csv"
    runio.write_profile_csv(csv_path, sol)
    checks = profile_invariants(sol, tol=max(config.profile_tol, 10.0 * sol.residual_norm))
    report = {
        "residual_norm": sol.residual_norm,
        "multiplier_mismatch": sol.multiplier_mismatch(),
        "invariants": checks,
        # boundary magnitudes let users judge the domain-truncation quality
        "tail_magnitudes": {
            "Lambda": max(abs(float(sol.Lambda[0])), abs(float(sol.Lambda[-1]))),
            "U1": max(abs(float(sol.U1[0])), abs(float(sol.U1[-1]))),
            "V1": max(abs(float(sol.V1[0])), abs(float(sol.V1[-1]))),
        },
        "profile_csv": str(csv_path),
    }
    runio.write_json(out / "profile_report.json", report)
    if not args.quiet:
        print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK if all(checks.values()) else EXIT_NUMERICAL


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    out = _outdir(args)
    t0 = time.time()
    result = run(config)
    p_list = config.effective_p_list()
    diag_path = out / "diagnostics.csv"
    runio.write_diagnostics_csv(diag_path, result.records, p_list)

    notes: list[str] = []
    verdicts = []
    report = None
    if result.records:
        report = compute_constants(result.profile, config.data, 1.0)
        # the Boltzmann certificate plus every power-family certificate the
        # sampled entropy list supports; each is judged against its own curve
        for p in [1.0] + [q for q in p_list if q != 1.0]:
            curve = [(r.tau, r.E_B if p == 1.0 else r.E_p[p]) for r in result.records]
            try:
                rep = report if p == 1.0 else compute_constants(result.profile, config.data, p)
                cert = select_certificate(rep, config.data, p)
            except ThetaTooLarge as exc:
                notes.append(f"no certificate (ThetaTooLarge): {exc}")
                continue
            except RdmixError as exc:
                if p == 1.0:
                    notes.append(f"no certificate ({type(exc).__name__}): {exc}")
                continue  # power family simply not applicable here
            if p == 1.0:
                runio.write_json(out / "certificate.json", runio.certificate_to_dict(cert))
            verdict = verify_decay(curve, cert, slack=args.slack)
            verdicts.append(
                {
                    "p": p,
                    "certificate": runio.certificate_to_dict(cert),
                    **runio.verdict_to_dict(verdict),
                }
            )

    summary = {
        "tau_end": config.tau_end,
        "samples": len(result.records),
        "steps_accepted": result.steps_accepted,
        "steps_rejected": result.steps_rejected,
        "final": (
            {
                "tau": result.records[-1].tau,
                "E_B": result.records[-1].E_B,
                "E_p": {f"{p:g}": result.records[-1].E_p[p] for p in p_list},
            }
            if result.records
            else None
        ),
        "fitted_slope": verdicts[0]["fitted_slope"] if verdicts else None,
        "constants": runio.constants_to_dict(report) if report is not None else None,
        "verdicts": verdicts,
        "notes": notes,
        "diagnostics_csv": str(diag_path),
    }
    runio.write_json(out / "summary.json", summary)
    manifest = runio.RunManifest(
        config_text=runio.serialize_config(config),
        code_version=__version__,
        grid_n=config.grid_n,
        grid_half_width=result.profile.grid.half_width,
        dtau_initial=config.dtau_initial,
        outputs={"diagnostics": str(diag_path), "summary": str(out / "summary.json")},
        wall_clock_seconds=time.time() - t0,
    )
    runio.write_manifest(out / "manifest.json", manifest)
    if not args.quiet:
        print(json.dumps(summary, indent=2, sort_keys=True))
    if verdicts and not all(v["passed"] for v in verdicts):
        return EXIT_VERIFY_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    columns = runio.read_diagnostics_csv(args.diagnostics)
    cert = runio.read_certificate_json(args.certificate)
    curve = list(zip(columns["tau"], columns["E_B"]))
    verdict = verify_decay(curve, cert, slack=args.slack)
    payload = {"certificate": runio.certificate_to_dict(cert), **runio.verdict_to_dict(verdict)}
    if args.out:
        runio.write_json(_outdir(args) / "verdict.json", payload)
    if not args.quiet:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK if verdict.passed else EXIT_VERIFY_FAIL


def cmd_constants(args) -> int:
    config = _load_config(args.config)
    grid = config.make_grid()
    sol = solve_profile(config.data, grid, tol=config.profile_tol)
    report = compute_constants(sol, config.data, args.p)
    payload = runio.constants_to_dict(report)
    try:
        cert = select_certificate(report, config.data, args.p)
        payload["certificate"] = runio.certificate_to_dict(cert)
    except (ThetaTooLarge, UnsupportedRegime) as exc:
        payload["certificate"] = None
        payload["note"] = str(exc)
    if args.out:
        runio.write_json(_outdir(args) / "constants.json", payload)
    if not args.quiet:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_conjugate(args) -> int:
    out = _outdir(args)
    alphas = [float(tok) for tok in args.alpha.split(",")]
    lo, hi, count = (float(x) for x in args.xi_range.split(":"))
    xis = np.linspace(lo, hi, int(count))
    rows = []
    for a in alphas:
        fam = PhiFamily("boltzmann_alpha", a)
        for xi in xis:
            rows.append(
                [a, float(xi), phi_conjugate_numeric(fam, float(xi)), phi_conjugate_bound(a, float(xi))]
            )
    bounds_path = out / "conjugate_bounds.csv"
    runio.write_csv(bounds_path, ["alpha", "xi", "numeric", "bound"], rows)
    written = [str(bounds_path)]
    if args.m_hat:
        mh_rows = []
        for pair in args.m_hat.split(","):
            p_str, a_str = pair.split(":")
            mh_rows.append([float(p_str), float(a_str), m_hat(float(p_str), float(a_str))])
        mh_path = out / "m_hat.csv"
        runio.write_csv(mh_path, ["p", "alpha", "m_hat"], mh_rows)
        written.append(str(mh_path))
    if not args.quiet:
        print(json.dumps({"written": written}, indent=2))
    return EXIT_OK


def _sweep_one(config, key: str, value: float):
    data = config.data
    if key == "problem.A_plus":
        data = replace(data, A_plus=value)
    elif key == "problem.A_minus":
        data = replace(data, A_minus=value)
    elif key == "problem.k":
        data = replace(data, k=value)
    elif key == "problem.d1":
        data = replace(data, d1=value)
    elif key == "problem.d2":
        data = replace(data, d2=value)
    else:
        raise ParseError(0, key, "unsupported sweep parameter")
    cfg = replace(config, data=data)
    grid = cfg.make_grid()
    sol = solve_profile(cfg.data, grid, tol=cfg.profile_tol)
    report = compute_constants(sol, cfg.data, 1.0)
    row = {
        "value": value,
        "theta": report.theta,
        "lambda_star": report.lambda_star,
        "theta_ge_half": report.theta >= 0.5,
    }
    try:
        cert = select_certificate(report, cfg.data, 1.0)
        row["certificate"] = runio.certificate_to_dict(cert)
    except (ThetaTooLarge, UnsupportedRegime) as exc:
        row["certificate"] = None
        row["note"] = str(exc)
    return row


def cmd_sweep(args) -> int:
    config = _load_config(args.config)
    values = [float(tok) for tok in args.values.split(",")] if args.values else []
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        rows = list(pool.map(lambda v: _sweep_one(config, args.param, v), values))
    flagged = [row["value"] for row in rows if row["theta_ge_half"]]
    aggregate = {
        "param": args.param,
        "rows": rows,
        "first_flagged_value": min(flagged) if flagged else None,
    }
    out = _outdir(args)
    runio.write_json(out / "sweep.json", aggregate)
    if not args.quiet:
        print(json.dumps(aggregate, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a key-value config file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--quiet", action="store_true", help="suppress stdout reports")
    common.add_argument("--threads", type=int, default=1, help="sweep parallelism")

    parser = argparse.ArgumentParser(prog="rdmix", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("profile", parents=[common], help="solve the similarity profile")
    p_sim = sub.add_parser("simulate", parents=[common], help="run the scaled system")
    p_sim.add_argument("--slack", type=float, default=0.05)
    p_ver = sub.add_parser("verify", parents=[common], help="judge a diagnostics CSV")
    p_ver.add_argument("--diagnostics", required=True)
    p_ver.add_argument("--certificate", required=True)
    p_ver.add_argument("--slack", type=float, default=0.05)
    p_con = sub.add_parser("constants", parents=[common], help="decay constants as JSON")
    p_con.add_argument("--p", type=float, default=1.0)
    p_cj = sub.add_parser("conjugate", parents=[common], help="conjugate bound tables")
    p_cj.add_argument("--alpha", default="1,1.5,2,3")
    p_cj.add_argument("--xi-range", default="-5:5:201", dest="xi_range")
    p_cj.add_argument("--m-hat", default="", dest="m_hat")
    p_sw = sub.add_parser("sweep", parents=[common], help="parameter sweep of constants")
    p_sw.add_argument("--param", default="problem.A_plus")
    p_sw.add_argument("--values", default="")
    return parser


_COMMANDS = {
    "profile": cmd_profile,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "constants": cmd_constants,
    "conjugate": cmd_conjugate,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO)
    needs_config = args.command in ("profile", "simulate", "constants", "sweep")
    if needs_config and not args.config:
        print("error: --config is required for this command", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RdmixError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

"""Configuration parsing and deterministic serialization of all outputs.

Configs are plain-text ``section.key = value`` lines with ``#`` comments.
CSV and JSON writers format floats with ``repr`` (shortest round-trip
decimal) and fixed column orders, so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .certificates import ConstantsReport, RateCertificate, VerificationVerdict
from .entropy import DiagnosticsRecord
from .errors import DomainError, ParseError
from .profile import ProblemData, ProfileSolution
from .simulate import InitialConditionSpec, SimConfig

logger = logging.getLogger("rdmix")

_REQUIRED = object()

# key -> (converter, default); _REQUIRED keys must be present
_SCHEMA: dict[str, tuple] = {
    "problem.alpha": (float, _REQUIRED),
    "problem.beta": (float, _REQUIRED),
    "problem.d1": (float, 1.0),
    "problem.d2": (float, 1.0),
    "problem.k": (float, 1.0),
    "problem.A_minus": (float, _REQUIRED),
    "problem.A_plus": (float, _REQUIRED),
    "grid.L": (float, None),
    "grid.n": (int, 2001),
    "time.tau_end": (float, _REQUIRED),
    "time.dtau": (float, 1e-3),
    "time.dtau_min": (float, 1e-9),
    "time.dtau_max": (float, 1e-2),
    "output.sample_interval": (float, 0.02),
    "output.path": (str, None),
    "ic.kind": (str, "profile_exact"),
    "ic.amplitude": (float, 0.0),
    "ic.width": (float, 1.0),
    "ic.center": (float, 0.0),
    "ic.path": (str, None),
    "entropy.p_list": (str, None),
    "solver.tol": (float, 1e-8),
}


def parse_config(text: str) -> SimConfig:
    """Parse and validate a key-value config; unknown keys are rejected.

    When beta > alpha the species are swapped into the canonical orientation
    (alpha >= beta) with a logged note; the swap exchanges the diffusivities
    and leaves the equilibria A+- unchanged.
    """
    raw: dict[str, tuple[int, str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(lineno, stripped, "expected 'key = value'")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _SCHEMA:
            raise ParseError(lineno, key, "unknown key")
        if key in raw:
            raise ParseError(lineno, key, "duplicate key")
        raw[key] = (lineno, value)

    values: dict[str, object] = {}
    for key, (conv, default) in _SCHEMA.items():
        if key in raw:
            lineno, text_value = raw[key]
            try:
                values[key] = conv(text_value)
            except ValueError:
                raise ParseError(lineno, key, f"cannot parse {text_value!r} as {conv.__name__}")
        elif default is _REQUIRED:
            raise ParseError(0, key, "required key missing")
        else:
            values[key] = default

    def line_of(key: str) -> int:
        return raw[key][0] if key in raw else 0

    alpha, beta = values["problem.alpha"], values["problem.beta"]
    if alpha < 1.0:
        raise ParseError(line_of("problem.alpha"), "problem.alpha", "alpha must be >= 1")
    if beta < 1.0:
        raise ParseError(line_of("problem.beta"), "problem.beta", "beta must be >= 1")
    d1, d2 = values["problem.d1"], values["problem.d2"]
    if beta > alpha:
        logger.info(
            "normalizing orientation: swapping species so alpha >= beta "
            "(alpha=%g, beta=%g, d1=%g, d2=%g -> alpha=%g, beta=%g, d1=%g, d2=%g)",
            alpha, beta, d1, d2, beta, alpha, d2, d1,
        )
        alpha, beta, d1, d2 = beta, alpha, d2, d1

    try:
        data = ProblemData(
            alpha=alpha,
            beta=beta,
            d1=d1,
            d2=d2,
            k=values["problem.k"],
            A_minus=values["problem.A_minus"],
            A_plus=values["problem.A_plus"],
        )
    except DomainError as exc:
        raise ParseError(0, "problem", str(exc))

    p_list = None
    if values["entropy.p_list"] is not None:
        try:
            p_list = tuple(float(tok) for tok in str(values["entropy.p_list"]).split(","))
        except ValueError:
            raise ParseError(line_of("entropy.p_list"), "entropy.p_list", "expected comma floats")

    ic = InitialConditionSpec(
        kind=values["ic.kind"],
        amplitude=values["ic.amplitude"],
        width=values["ic.width"],
        center=values["ic.center"],
        path=values["ic.path"],
    )
    try:
        return SimConfig(
            data=data,
            tau_end=values["time.tau_end"],
            grid_n=values["grid.n"],
            grid_half_width=values["grid.L"],
            dtau_initial=values["time.dtau"],
            dtau_min=values["time.dtau_min"],
            dtau_max=values["time.dtau_max"],
            sample_interval=values["output.sample_interval"],
            ic=ic,
            p_list=p_list,
            profile_tol=values["solver.tol"],
        )
    except DomainError as exc:
        raise ParseError(0, "config", str(exc))


def serialize_config(config: SimConfig, output_path: str | None = None) -> str:
    """Config text whose parse reproduces ``config`` exactly."""
    d = config.data
    lines = [
        f"problem.alpha = {d.alpha!r}",
        f"problem.beta = {d.beta!r}",
        f"problem.d1 = {d.d1!r}",
        f"problem.d2 = {d.d2!r}",
        f"problem.k = {d.k!r}",
        f"problem.A_minus = {d.A_minus!r}",
        f"problem.A_plus = {d.A_plus!r}",
        f"grid.n = {config.grid_n}",
        f"time.tau_end = {config.tau_end!r}",
        f"time.dtau = {config.dtau_initial!r}",
        f"time.dtau_min = {config.dtau_min!r}",
        f"time.dtau_max = {config.dtau_max!r}",
        f"output.sample_interval = {config.sample_interval!r}",
        f"ic.kind = {config.ic.kind}",
        f"ic.amplitude = {config.ic.amplitude!r}",
        f"ic.width = {config.ic.width!r}",
        f"ic.center = {config.ic.center!r}",
        f"solver.tol = {config.profile_tol!r}",
    ]
    if config.grid_half_width is not None:
        lines.insert(7, f"grid.L = {config.grid_half_width!r}")
    if config.ic.path is not None:
        lines.append(f"ic.path = {config.ic.path}")
    if config.p_list is not None:
        lines.append("entropy.p_list = " + ",".join(repr(p) for p in config.p_list))
    if output_path is not None:
        lines.append(f"output.path = {output_path}")
    return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def diagnostics_header(p_list: tuple[float, ...]) -> list[str]:
    cols = ["tau", "E_B"]
    cols += [f"E_p_{p:g}" for p in p_list]
    cols += [
        "I_Fisher",
        "D_react",
        "I_Lambda",
        "I_Lambda_1",
        "I_Lambda_2",
        "hellinger_sq",
        "D_B_total",
        "dissipation_residual",
    ]
    return cols


def diagnostics_row(rec: DiagnosticsRecord, p_list: tuple[float, ...]) -> list:
    row = [rec.tau, rec.E_B]
    row += [rec.E_p[p] for p in p_list]
    row += [
        rec.I_Fisher,
        rec.D_react,
        rec.I_Lambda,
        rec.I_Lambda_1,
        rec.I_Lambda_2,
        rec.hellinger_sq,
        rec.D_B_total,
        rec.dissipation_residual,
    ]
    return row


def write_diagnostics_csv(path, records, p_list: tuple[float, ...]) -> None:
    write_csv(path, diagnostics_header(p_list), (diagnostics_row(r, p_list) for r in records))


def read_diagnostics_csv(path) -> dict[str, np.ndarray]:
    """Columns of a diagnostics CSV keyed by header name."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array([[float(x) for x in row] for row in rows]) if rows else np.zeros((0, len(header)))
    return {name: data[:, j] for j, name in enumerate(header)}


def write_profile_csv(path, sol: ProfileSolution) -> None:
    header = ["y", "U", "V", "Lambda", "U1", "U2", "V1", "V2"]
    rows = zip(sol.grid.nodes, sol.U, sol.V, sol.Lambda, sol.U1, sol.U2, sol.V1, sol.V2)
    write_csv(path, header, ([float(x) for x in row] for row in rows))


def certificate_to_dict(cert: RateCertificate) -> dict:
    return {
        "eta": cert.eta,
        "mu": cert.mu,
        "K": cert.K,
        "gamma": cert.gamma,
        "regime_tag": cert.regime_tag,
    }


def certificate_from_dict(obj: dict) -> RateCertificate:
    return RateCertificate(
        eta=float(obj["eta"]),
        mu=float(obj["mu"]),
        K=float(obj["K"]),
        gamma=float(obj["gamma"]),
        regime_tag=str(obj.get("regime_tag", "")),
    )


def read_certificate_json(path) -> RateCertificate:
    with open(path, encoding="utf-8") as fh:
        return certificate_from_dict(json.load(fh))


def constants_to_dict(report: ConstantsReport) -> dict:
    out = {
        name: getattr(report, name)
        for name in (
            "c_tilde_alpha",
            "lambda_star",
            "mu0",
            "K0",
            "mu1",
            "K1",
            "K2",
            "theta",
            "kappa",
            "mu_tilde",
            "K_tilde",
            "mu_tilde_star",
            "K_star",
        )
    }
    out["provenance"] = dict(report.provenance)
    return out


def verdict_to_dict(verdict: VerificationVerdict) -> dict:
    return {
        "passed": verdict.passed,
        "worst_ratio": verdict.worst_ratio,
        "slack": verdict.slack,
        "fitted_slope": verdict.fitted_slope,
        "fit_window": list(verdict.window),
        "n_samples": verdict.n_samples,
    }


@dataclass
class RunManifest:
    """Everything needed to reproduce a run's outputs byte for byte."""

    config_text: str
    code_version: str
    grid_n: int
    grid_half_width: float
    dtau_initial: float
    outputs: dict[str, str] = field(default_factory=dict)
    wall_clock_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "config_text": self.config_text,
            "code_version": self.code_version,
            "grid_n": self.grid_n,
            "grid_half_width": self.grid_half_width,
            "dtau_initial": self.dtau_initial,
            "outputs": dict(self.outputs),
            "wall_clock_seconds": self.wall_clock_seconds,
        }


def write_manifest(path, manifest: RunManifest) -> None:
    write_json(path, manifest.to_dict())

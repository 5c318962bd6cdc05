"""Config-driven experiment runner.

``vqakit run config.yaml`` executes one experiment (a VQE flux sweep, a
separability search, or Gibbs preparation), writing JSON results, CSV
sweep tables, optimizer traces and a config echo into the output
directory.  Identical config + seed reproduces byte-identical result
files.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import gibbs as gibbs_mod
from . import hamiltonian as ham
from . import vqe as vqe_mod
from . import vsv as vsv_mod
from .ansatz import build_gr_xy_reduced, build_hva_hubbard
from .hamiltonian import HubbardSpec
from .optimize import OptimizerConfig
from .statevector import ShotsMode

EXPERIMENTS = ("vqe_flux_sweep", "vsv", "gibbs", "gibbs_beta_sweep")
MODEL_KINDS = ("hubbard", "ising", "xy", "xxz")


class ConfigError(Exception):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    output_dir: str
    model: dict
    ansatz: dict
    optimizer: dict
    mode: dict
    extras: dict
    raw: dict


@dataclass
class RunReport:
    config_hash: str
    artifacts: list[str]
    wall_time_seconds: float
    version: str
    error: str | None = None


def _check_model(model: dict, violations: list[str]) -> None:
    kind = model.get("kind")
    if kind not in MODEL_KINDS:
        violations.append(f"model.kind: expected one of {MODEL_KINDS}, got {kind!r}")
        return
    if kind == "hubbard":
        for key in ("sites", "colours"):
            if not isinstance(model.get(key), int) or model.get(key, 0) < 1:
                violations.append(f"model.{key}: positive integer required")
        particles = model.get("particles")
        if particles is not None and not all(
            isinstance(p, int) and p >= 0 for p in particles
        ):
            violations.append("model.particles: non-negative integers required")
        if model.get("onsite", 0) < 0:
            violations.append("model.onsite: must be non-negative")
    else:
        n = model.get("n")
        if not isinstance(n, int) or n < 2:
            violations.append("model.n: integer >= 2 required")
        if "h" not in model:
            violations.append("model.h: field required")
        if kind == "xy" and not 0 <= model.get("gamma", 0) <= 1:
            violations.append("model.gamma: must lie in [0, 1]")


def _check_mode(mode: dict, violations: list[str]) -> None:
    kind = mode.get("kind")
    if kind not in ("statevector", "shots"):
        violations.append(
            f"mode.kind: expected 'statevector' or 'shots', got {kind!r}"
        )
        return
    if kind == "statevector" and "shots" in mode:
        violations.append("mode: conflicting statevector and shots settings")
    if kind == "shots":
        if not isinstance(mode.get("shots"), int) or mode["shots"] < 1:
            violations.append("mode.shots: positive integer required")


def validate_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate a config file, reporting every violation at once."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError([f"parse error: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config root must be a mapping"])
    violations: list[str] = []
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        violations.append(
            f"experiment: expected one of {EXPERIMENTS}, got {experiment!r}"
        )
    if not isinstance(raw.get("seed"), int):
        violations.append("seed: mandatory integer field")
    model = raw.get("model", {})
    if not isinstance(model, dict):
        violations.append("model: mapping required")
        model = {}
    elif experiment != "vsv":
        _check_model(model, violations)
    mode = raw.get("mode", {"kind": "statevector"})
    if not isinstance(mode, dict):
        violations.append("mode: mapping required")
        mode = {"kind": "statevector"}
    else:
        _check_mode(mode, violations)
    if experiment in ("gibbs", "gibbs_beta_sweep"):
        betas = raw.get("betas", [raw.get("beta")])
        if experiment == "gibbs" and raw.get("beta") is None:
            violations.append("beta: field required for gibbs runs")
        for b in betas:
            if b is not None and (not isinstance(b, (int, float)) or b < 0):
                violations.append(f"beta: must be non-negative, got {b!r}")
        if experiment == "gibbs_beta_sweep" and not raw.get("betas"):
            violations.append("betas: non-empty list required for beta sweeps")
    if experiment == "vsv":
        state = raw.get("state", {})
        if state.get("kind") not in ("ghz", "xmems"):
            violations.append("state.kind: expected 'ghz' or 'xmems'")
        if not isinstance(state.get("n"), int) or state.get("n", 0) < 2:
            violations.append("state.n: integer >= 2 required")
    if violations:
        raise ConfigError(violations)
    extras = {
        k: v
        for k, v in raw.items()
        if k not in ("experiment", "seed", "output_dir", "model", "ansatz", "optimizer", "mode")
    }
    return ExperimentConfig(
        experiment=experiment,
        seed=raw["seed"],
        output_dir=raw.get("output_dir", "results"),
        model=model,
        ansatz=raw.get("ansatz", {}),
        optimizer=raw.get("optimizer", {}),
        mode=mode,
        extras=extras,
        raw=raw,
    )


def _build_mode(config: ExperimentConfig):
    if config.mode["kind"] == "statevector":
        return "statevector"
    return ShotsMode(config.mode["shots"], config.mode.get("seed", config.seed))


def _build_optimizer(config: ExperimentConfig, default_kind: str) -> OptimizerConfig:
    opts = dict(config.optimizer)
    kind = opts.pop("kind", default_kind)
    runs = opts.pop("runs", None)  # consumed by the workflow, not the optimizer
    return OptimizerConfig(kind=kind, **opts)


def _build_model_hamiltonian(model: dict):
    kind = model["kind"]
    periodic = model.get("periodic", True)
    if kind == "ising":
        return ham.build_ising(model["n"], model["h"], periodic)
    if kind == "xy":
        return ham.build_xy(model["n"], model["gamma"], model["h"], periodic)
    if kind == "xxz":
        return ham.build_xxz(model["n"], model["delta"], model["h"], periodic)
    raise ValueError(f"no spin-chain builder for {kind!r}")


def _format_float(value: float) -> str:
    return format(float(value), ".17g")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                _format_float(v) if isinstance(v, float) else str(v) for v in row
            )
        )
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_trace(path: Path, history, params) -> None:
    digest = hashlib.sha256(np.asarray(params, dtype=float).tobytes()).hexdigest()[:16]
    rows = [(evaluation, float(value), digest) for evaluation, value in history]
    _write_csv(path, ["evaluation", "value", "params_hash"], rows)


def _run_gibbs_once(config: ExperimentConfig, beta: float):
    model = config.model
    n = model["n"]
    hamiltonian = _build_model_hamiltonian(model)
    ansatz_cfg = config.ansatz
    if ansatz_cfg.get("kind") == "grover_rudolph_xy_reduced":
        ancilla = build_gr_xy_reduced(model["h"], model.get("gamma", 0.0), beta)
        _, system = gibbs_mod.default_gibbs_ansatz("xy", n)
    else:
        ancilla, system = gibbs_mod.default_gibbs_ansatz(model["kind"], n)
        from .ansatz import build_hw_efficient_ry, build_parity_brickwall

        if "ancilla_layers" in ansatz_cfg:
            topology = "linear" if model["kind"] == "ising" else "alternating"
            ancilla = build_hw_efficient_ry(
                n, ansatz_cfg["ancilla_layers"], topology
            )
        if "system_layers" in ansatz_cfg:
            system = build_parity_brickwall(n, ansatz_cfg["system_layers"])
    problem = gibbs_mod.GibbsProblem(
        hamiltonian=hamiltonian,
        beta=beta,
        ancilla_ansatz=ancilla,
        system_ansatz=system,
        mode=_build_mode(config),
        optimizer=_build_optimizer(config, "quasi_newton"),
        runs=config.optimizer.get("runs", 10),
        seed=config.seed,
    )
    return problem, gibbs_mod.run_gibbs(problem)


def _gibbs_row(beta: float, result) -> dict:
    return {
        "beta": beta,
        "best_fidelity": result.best_fidelity,
        "fidelity_mean": float(result.run_fidelities.mean()),
        "free_energy": result.free_energy,
        "entropy": result.entropy,
        "energy": result.energy,
        "runs": [float(v) for v in result.run_fidelities],
    }


def run_experiment(config: ExperimentConfig, output_dir: str | None = None) -> RunReport:
    """Dispatch one validated experiment and persist its artifacts."""
    start = time.monotonic()
    out = Path(output_dir or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts: list[str] = []
    echo_path = out / "config_echo.yaml"
    echo_text = yaml.safe_dump(config.raw, sort_keys=True)
    echo_path.write_text(echo_text)
    artifacts.append(str(echo_path))
    config_hash = hashlib.sha256(echo_text.encode()).hexdigest()[:16]
    error: str | None = None
    try:
        if config.experiment == "gibbs":
            beta = float(config.extras["beta"])
            problem, result = _run_gibbs_once(config, beta)
            exact_free = (
                ham.free_energy_exact(problem.hamiltonian, beta) if beta > 0 else None
            )
            payload = {
                "experiment": "gibbs",
                "model": config.model,
                "n": config.model["n"],
                "beta": beta,
                "mode": config.mode,
                "shots": config.mode.get("shots"),
                "best_fidelity": result.best_fidelity,
                "fidelity_best_params": result.fidelity_vs_exact,
                "free_energy": result.free_energy,
                "exact_free_energy": exact_free,
                "entropy": result.entropy,
                "energy": result.energy,
                "probabilities": [float(p) for p in result.probabilities],
                "parameters": [float(p) for p in result.parameters],
                "runs": [float(v) for v in result.run_fidelities],
            }
            _write_json(out / "result.json", payload)
            artifacts.append(str(out / "result.json"))
        elif config.experiment == "gibbs_beta_sweep":
            rows = []
            for beta in config.extras["betas"]:
                problem, result = _run_gibbs_once(config, float(beta))
                exact_free = (
                    ham.free_energy_exact(problem.hamiltonian, float(beta))
                    if beta > 0
                    else -math.log(2.0**config.model["n"]) * 0.0
                )
                rows.append(
                    (
                        float(beta),
                        result.best_fidelity,
                        float(result.run_fidelities.mean()),
                        result.free_energy,
                        float(exact_free),
                    )
                )
            _write_csv(
                out / "sweep.csv",
                ["beta", "fidelity_best", "fidelity_mean", "free_energy", "exact_free_energy"],
                rows,
            )
            artifacts.append(str(out / "sweep.csv"))
            payload = {
                "experiment": "gibbs_beta_sweep",
                "model": config.model,
                "rows": [list(r) for r in rows],
            }
            _write_json(out / "result.json", payload)
            artifacts.append(str(out / "result.json"))
        elif config.experiment == "vsv":
            state_cfg = config.extras.get("state", config.raw.get("state"))
            n = state_cfg["n"]
            if state_cfg["kind"] == "ghz":
                rho = vsv_mod.ghz_density(n)
                reference = vsv_mod.ghz_hse_analytic(n)
            else:
                spec = vsv_mod.XMemsSpec(n, state_cfg.get("gamma", 0.5))
                rho = vsv_mod.xmems_state(spec)
                reference = (
                    vsv_mod.xmems_css_2qubit(spec.gamma)[1] if n == 2 else None
                )
            upper = _build_optimizer(config, "nft")
            upper = replace(upper, seed=config.seed)
            s = config.extras.get("components", 2**n)
            result = vsv_mod.vsv_minimize(rho, s, upper, mode=_build_mode(config))
            payload = {
                "experiment": "vsv",
                "n": n,
                "s": s,
                "mode": config.mode,
                "shots": config.mode.get("shots"),
                "hse": result.hse,
                "iterations": len(result.history),
                "evaluations": result.evaluations,
                "ensemble": {
                    "p": [float(v) for v in result.ensemble.probabilities],
                    "theta": [[float(v) for v in row] for row in result.ensemble.theta],
                    "phi": [[float(v) for v in row] for row in result.ensemble.phi],
                },
                "reference_hse": reference,
            }
            _write_json(out / "result.json", payload)
            artifacts.append(str(out / "result.json"))
            _write_trace(
                out / "trace.csv", result.history, result.ensemble.probabilities
            )
            artifacts.append(str(out / "trace.csv"))
        elif config.experiment == "vqe_flux_sweep":
            model = config.model
            spec = HubbardSpec(
                sites=model["sites"],
                colours=model["colours"],
                hopping=tuple(model.get("hopping", [1.0])),
                onsite=model.get("onsite", 0.0),
                neighbour=tuple(model.get("neighbour", [])),
                flux=0.0,
                particles=tuple(model.get("particles", [])),
            )
            problem = vqe_mod.VqeProblem(
                spec=spec,
                ansatz_layers=config.ansatz.get("layers", 3),
                mode=_build_mode(config),
                optimizer=_build_optimizer(config, "quasi_newton"),
                restarts=config.optimizer.get("runs", 5),
            )
            grid = config.extras.get(
                "phi_grid", [round(x, 10) for x in np.linspace(0.0, 1.0, 21)]
            )
            sweep = vqe_mod.flux_sweep(
                problem,
                np.asarray(grid, dtype=float),
                seed=config.seed,
                mirror=config.extras.get("mirror", True),
            )
            (out / "sweep.csv").write_text(vqe_mod.sweep_to_csv(sweep))
            artifacts.append(str(out / "sweep.csv"))
            payload = {
                "experiment": "vqe_flux_sweep",
                "model": config.model,
                "layers": problem.ansatz_layers,
                "energies": [float(e) for e in sweep.energies],
                "exact_energies": [float(e) for e in sweep.exact_energies],
                "max_abs_energy_error": float(
                    np.max(np.abs(sweep.energies - sweep.exact_energies))
                ),
            }
            _write_json(out / "result.json", payload)
            artifacts.append(str(out / "result.json"))
    except Exception as exc:  # noqa: BLE001 - reported, artifacts retained
        error = f"{type(exc).__name__}: {exc}"
    report = RunReport(
        config_hash=config_hash,
        artifacts=artifacts,
        wall_time_seconds=time.monotonic() - start,
        version=__version__,
        error=error,
    )
    _write_json(
        out / "report.json",
        {
            "config_hash": report.config_hash,
            "artifacts": report.artifacts,
            "wall_time_seconds": report.wall_time_seconds,
            "version": report.version,
            "error": report.error,
        },
    )
    return report


def emit_reference_tables(output_dir: str | Path) -> list[str]:
    """Analytic reference values for plot overlays and test fixtures."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    ghz_rows = [(n, float(vsv_mod.ghz_hse_analytic(n))) for n in range(2, 8)]
    path = out / "ghz_hse.csv"
    _write_csv(path, ["n", "hse"], ghz_rows)
    written.append(str(path))

    gammas = np.linspace(0.0, 0.5, 51)
    xmems_rows = [
        (float(g), float(vsv_mod.xmems_css_2qubit(float(g))[1])) for g in gammas
    ]
    path = out / "xmems_2qubit_hse.csv"
    _write_csv(path, ["gamma", "hse"], xmems_rows)
    written.append(str(path))

    spectrum = gibbs_mod.xy_spectrum_exact(4, 0.5, 0.5)
    rows = [
        (k, float(e), p)
        for k, (e, p) in enumerate(zip(spectrum.energies, spectrum.parities))
    ]
    path = out / "xy_spectrum_n4.csv"
    _write_csv(path, ["index", "energy", "parity"], rows)
    written.append(str(path))
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vqakit", description="variational quantum algorithm toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute an experiment config")
    run_p.add_argument("config")
    run_p.add_argument("--output-dir", default=None)
    run_p.add_argument("--seed-override", type=int, default=None)
    val_p = sub.add_parser("validate", help="validate an experiment config")
    val_p.add_argument("config")
    ref_p = sub.add_parser("references", help="write analytic reference tables")
    ref_p.add_argument("output_dir")
    args = parser.parse_args(argv)

    if args.command == "validate":
        try:
            validate_config(args.config)
        except ConfigError as exc:
            for violation in exc.violations:
                print(f"invalid: {violation}", file=sys.stderr)
            return 1
        print("ok")
        return 0
    if args.command == "references":
        for path in emit_reference_tables(args.output_dir):
            print(path)
        return 0
    try:
        config = validate_config(args.config)
    except ConfigError as exc:
        for violation in exc.violations:
            print(f"invalid: {violation}", file=sys.stderr)
        return 1
    if args.seed_override is not None:
        raw = dict(config.raw)
        raw["seed"] = args.seed_override
        config = replace(config, seed=args.seed_override, raw=raw)
    report = run_experiment(config, args.output_dir)
    if report.error:
        print(f"error: {report.error}", file=sys.stderr)
        return 2
    for artifact in report.artifacts:
        print(artifact)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Scenario runner: every computation as a subcommand over a config file.

Usage::

    spinbath <subcommand> --config <path> [--out <path>] [--format csv|json]

Subcommands: ``susceptibility``, ``kk-check``, ``rates``, ``volterra``,
``oracle``, ``thermal``, ``bloch``. Configs are plain text ``key = value``
lines ('#' starts a comment); the model uses a one-line grammar, e.g.
``model = ohmic alpha=0.1 s=1 omega_c=10``. All outputs are deterministic:
identical configs produce bit-identical files, with floats serialized at
17 significant digits.

Exit codes: 0 success, 2 configuration error, 3 numerical error. A
first-order probability leaving its validity window is reported as a
warning in the run summary, not a failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .amplitude import markov_amplitude, markov_rates, solve_amplitude, solve_discrete_oracle
from .bloch import simulate_bloch
from .numerics import GridSpec, NumericalError, QuadratureSpec
from .response import chi_freq, chi_time, kk_residual
from .spectral import PhysicalConstants, SpectralModel, parse_model
from .thermal import Direction, ThermalState, finite_time_probability, golden_rule_rate

SUBCOMMANDS = (
    "susceptibility",
    "kk-check",
    "rates",
    "volterra",
    "oracle",
    "thermal",
    "bloch",
)


class ConfigError(Exception):
    """Invalid or missing configuration; message names the offending key."""


@dataclass
class ScenarioConfig:
    model: SpectralModel
    omega0: float
    constants: PhysicalConstants
    temperature: float
    quad: QuadratureSpec
    time_grid: GridSpec
    freq_grid: GridSpec
    temp_grid: GridSpec
    dt: float
    t_max: float
    epsilon: float
    n_modes: int
    scan: str
    direction: str
    n_hat: tuple[float, float, float]
    s0: tuple[float, float, float]
    out: str | None
    format: str


@dataclass
class RunSummary:
    command: str
    wall_time_s: float
    scalars: dict[str, float] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "wall_time_s": round(self.wall_time_s, 6),
            "scalars": {k: _float_repr(v) for k, v in self.scalars.items()},
            "outputs": self.outputs,
            "warnings": self.warnings,
        }
        return json.dumps(payload)


_DEFAULTS: dict[str, str] = {
    "omega0": "1.0",
    "hbar": "1.0",
    "c": "1.0",
    "K": "1.0",
    "temperature": "1.0",
    "abs_tol": "1e-10",
    "rel_tol": "1e-8",
    "max_subdivisions": "2000",
    "upper_cutoff": "1e4",
    "dt": "0.01",
    "t_max": "10.0",
    "epsilon": "1e-3",
    "n_modes": "400",
    "t_start": "0.0",
    "t_stop": "",  # defaults to t_max
    "t_points": "101",
    "w_start": "0.1",
    "w_stop": "5.0",
    "w_points": "101",
    "T_start": "0.0",
    "T_stop": "2.0",
    "T_points": "21",
    "scan": "temperature",
    "direction": "re_from_im",
    "n_hat": "0,0,1",
    "s0": "0.5,0,0",
    "out": "",
    "format": "csv",
}


def _float_repr(x: float) -> float:
    # round-trips through 17 significant digits
    return float(f"{x:.17g}")


def _parse_float(key: str, raw: str) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {raw!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite")
    return v


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {raw!r}") from None


def _parse_triplet(key: str, raw: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected three comma-separated numbers")
    return tuple(_parse_float(key, p) for p in parts)  # type: ignore[return-value]


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a config; total function with key-level errors."""
    raw = dict(_DEFAULTS)
    model_line: str | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = body.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "model":
            model_line = value
            continue
        if key not in _DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[key] = value

    if model_line is None:
        raise ConfigError("model: missing")

    constants = PhysicalConstants(
        hbar=_require_positive("hbar", _parse_float("hbar", raw["hbar"])),
        c=_require_positive("c", _parse_float("c", raw["c"])),
        k_B=_require_positive("K", _parse_float("K", raw["K"])),
    )
    try:
        model = parse_model(model_line, constants=constants)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    try:
        quad = QuadratureSpec(
            abs_tol=_parse_float("abs_tol", raw["abs_tol"]),
            rel_tol=_parse_float("rel_tol", raw["rel_tol"]),
            max_subdivisions=_parse_int("max_subdivisions", raw["max_subdivisions"]),
            upper_cutoff=_parse_float("upper_cutoff", raw["upper_cutoff"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    t_max = _require_positive("t_max", _parse_float("t_max", raw["t_max"]))
    dt = _require_positive("dt", _parse_float("dt", raw["dt"]))
    if t_max < dt:
        raise ConfigError("t_max: must be >= dt")
    t_stop_raw = raw["t_stop"] or str(t_max)

    def grid(prefix: str, start_key: str, stop_key: str, n_key: str, stop_raw: str) -> GridSpec:
        try:
            return GridSpec(
                start=_parse_float(start_key, raw[start_key]),
                stop=_parse_float(stop_key, stop_raw),
                n_points=_parse_int(n_key, raw[n_key]),
            )
        except ValueError as exc:
            raise ConfigError(f"{prefix}: {exc}") from None

    time_grid = grid("time grid", "t_start", "t_stop", "t_points", t_stop_raw)
    freq_grid = grid("frequency grid", "w_start", "w_stop", "w_points", raw["w_stop"])
    temp_grid = grid("temperature grid", "T_start", "T_stop", "T_points", raw["T_stop"])

    temperature = _parse_float("temperature", raw["temperature"])
    if temperature < 0:
        raise ConfigError("temperature: must be >= 0")
    epsilon = _require_positive("epsilon", _parse_float("epsilon", raw["epsilon"]))
    omega0 = _require_positive("omega0", _parse_float("omega0", raw["omega0"]))
    n_modes = _parse_int("n_modes", raw["n_modes"])
    if n_modes < 1:
        raise ConfigError("n_modes: must be >= 1")
    scan = raw["scan"]
    if scan not in ("temperature", "time"):
        raise ConfigError("scan: must be 'temperature' or 'time'")
    direction = raw["direction"]
    if direction not in ("re_from_im", "im_from_re"):
        raise ConfigError("direction: must be 're_from_im' or 'im_from_re'")
    fmt = raw["format"]
    if fmt not in ("csv", "json"):
        raise ConfigError("format: must be 'csv' or 'json'")
    n_hat = _parse_triplet("n_hat", raw["n_hat"])
    if abs(math.sqrt(sum(x * x for x in n_hat)) - 1.0) > 1e-9:
        raise ConfigError("n_hat: must be a unit vector")
    s0 = _parse_triplet("s0", raw["s0"])

    return ScenarioConfig(
        model=model,
        omega0=omega0,
        constants=constants,
        temperature=temperature,
        quad=quad,
        time_grid=time_grid,
        freq_grid=freq_grid,
        temp_grid=temp_grid,
        dt=dt,
        t_max=t_max,
        epsilon=epsilon,
        n_modes=n_modes,
        scan=scan,
        direction=direction,
        n_hat=n_hat,
        s0=s0,
        out=raw["out"] or None,
        format=fmt,
    )


def _require_positive(key: str, v: float) -> float:
    if not (v > 0):
        raise ConfigError(f"{key}: must be > 0")
    return v


def _fmt_cell(v: float, json_mode: bool) -> str:
    if math.isfinite(v):
        return f"{v:.17g}"
    if json_mode:
        # the stdlib json parser accepts these spellings
        return "NaN" if math.isnan(v) else ("Infinity" if v > 0 else "-Infinity")
    return f"{v:.17g}"


def _write_table(path: Path, columns: list[str], rows: list[list[float]], fmt: str) -> str:
    json_mode = fmt == "json"
    if fmt == "csv":
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_fmt_cell(v, json_mode) for v in row))
        path.write_text("\n".join(lines) + "\n")
    else:
        body = ",\n".join(
            "    [" + ", ".join(_fmt_cell(v, json_mode) for v in row) + "]" for row in rows
        )
        text = (
            '{\n"columns": ' + json.dumps(columns) + ',\n"rows": [\n'
            + body + "\n]\n}\n"
        )
        path.write_text(text)
    return str(path)


def _out_path(config: ScenarioConfig, subcommand: str, suffix: str = "") -> Path:
    stem = config.out or f"spinbath_{subcommand.replace('-', '_')}"
    ext = "." + config.format
    if stem.endswith(ext):
        stem = stem[: -len(ext)]
    return Path(stem + suffix + ext)


def _run_susceptibility(config: ScenarioConfig) -> tuple[dict, list[str]]:
    rows_t = []
    for t in config.time_grid.values():
        rows_t.append([float(t), chi_time(config.model, float(t), config.quad)])
    rows_w = []
    for w in config.freq_grid.values():
        val = chi_freq(config.model, float(w), config.epsilon, config.quad)
        rows_w.append([float(w), val.real, val.imag, config.epsilon])
    p1 = _write_table(_out_path(config, "susceptibility", "_time"), ["t", "chi"], rows_t, config.format)
    p2 = _write_table(
        _out_path(config, "susceptibility", "_freq"),
        ["omega", "re_chi", "im_chi", "epsilon"],
        rows_w,
        config.format,
    )
    scalars = {"chi_abs_max": max(abs(r[1]) for r in rows_t)}
    return scalars, [p1, p2]


def _run_kk_check(config: ScenarioConfig) -> tuple[dict, list[str]]:
    residual = kk_residual(
        config.model, config.freq_grid, config.epsilon, config.quad,
        direction=config.direction,
    )
    rows = [[config.epsilon, residual]]
    path = _write_table(_out_path(config, "kk-check"), ["epsilon", "residual"], rows, config.format)
    return {"kk_residual": residual}, [path]


def _run_rates(config: ScenarioConfig) -> tuple[dict, list[str]]:
    rates = markov_rates(config.model, config.omega0, config.quad)
    rows = [[config.omega0, rates.beta, rates.delta]]
    path = _write_table(_out_path(config, "rates"), ["omega0", "beta", "delta"], rows, config.format)
    return {"beta": rates.beta, "delta": rates.delta}, [path]


def _run_volterra(config: ScenarioConfig) -> tuple[dict, list[str]]:
    rates = markov_rates(config.model, config.omega0, config.quad)
    traj = solve_amplitude(config.model, config.omega0, config.t_max, config.dt, config.quad)
    rows = []
    for t, c in zip(traj.t, traj.c):
        rows.append([float(t), c.real, c.imag, abs(c), abs(markov_amplitude(rates, float(t)))])
    path = _write_table(
        _out_path(config, "volterra"),
        ["t", "re_c", "im_c", "abs_c", "markov_abs_c"],
        rows,
        config.format,
    )
    scalars = {
        "beta": rates.beta,
        "delta": rates.delta,
        "abs_c_final": abs(traj.c[-1]),
    }
    return scalars, [path]


def _run_oracle(config: ScenarioConfig) -> tuple[dict, list[str]]:
    traj = solve_discrete_oracle(
        config.model, config.omega0, config.n_modes, config.t_max, config.dt,
        quad=config.quad,
    )
    rows = [
        [float(t), abs(c), float(d)]
        for t, c, d in zip(traj.t, traj.c, traj.norm_defect)
    ]
    path = _write_table(
        _out_path(config, "oracle"), ["t", "abs_c", "norm_defect"], rows, config.format
    )
    return {"max_norm_defect": float(np.max(np.abs(traj.norm_defect)))}, [path]


def _run_thermal(config: ScenarioConfig) -> tuple[dict, list[str]]:
    if config.scan == "temperature":
        rows = []
        for T in config.temp_grid.values():
            thermal = ThermalState(temperature=float(T), constants=config.constants)
            up = golden_rule_rate(config.model, config.omega0, thermal, Direction.UP)
            down = golden_rule_rate(config.model, config.omega0, thermal, Direction.DOWN)
            if T > 0:
                x = config.constants.hbar * config.omega0 / (config.constants.k_B * float(T))
                boltz = math.exp(x) if x < 700 else math.inf
            else:
                boltz = math.inf
            ratio = down / up if up > 0 else math.inf
            rows.append([float(T), up, down, ratio, boltz])
        path = _write_table(
            _out_path(config, "thermal"),
            ["T", "rate_up", "rate_down", "ratio", "boltzmann_factor"],
            rows,
            config.format,
        )
        finite = [r[3] for r in rows if math.isfinite(r[3])]
        scalars = {"rate_down_max": max(r[2] for r in rows)}
        if finite:
            scalars["ratio_min"] = min(finite)
        return scalars, [path]

    thermal = ThermalState(temperature=config.temperature, constants=config.constants)
    rows = []
    for t in config.time_grid.values():
        up = finite_time_probability(
            config.model, config.omega0, thermal, Direction.UP, float(t), config.quad
        )
        down = finite_time_probability(
            config.model, config.omega0, thermal, Direction.DOWN, float(t), config.quad
        )
        rows.append([float(t), up.probability, down.probability])
    path = _write_table(
        _out_path(config, "thermal"), ["t", "p_up", "p_down"], rows, config.format
    )
    return {"p_down_final": rows[-1][2], "p_up_final": rows[-1][1]}, [path]


def _run_bloch(config: ScenarioConfig) -> tuple[dict, list[str]]:
    traj = simulate_bloch(
        config.model, config.omega0, config.n_hat, config.s0,
        config.t_max, config.dt, config.quad,
    )
    rows = [
        [float(t), sx, sy, sz, float(d)]
        for t, (sx, sy, sz), d in zip(traj.t, traj.s, traj.norm_drift)
    ]
    path = _write_table(
        _out_path(config, "bloch"), ["t", "Sx", "Sy", "Sz", "norm_drift"], rows, config.format
    )
    return {"max_norm_drift": float(np.max(np.abs(traj.norm_drift)))}, [path]


_RUNNERS = {
    "susceptibility": _run_susceptibility,
    "kk-check": _run_kk_check,
    "rates": _run_rates,
    "volterra": _run_volterra,
    "oracle": _run_oracle,
    "thermal": _run_thermal,
    "bloch": _run_bloch,
}


def run(subcommand: str, config: ScenarioConfig) -> RunSummary:
    """Execute one subcommand; returns the summary printed by the CLI."""
    if subcommand not in _RUNNERS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        scalars, outputs = _RUNNERS[subcommand](config)
    elapsed = time.perf_counter() - start
    notes = [str(w.message) for w in caught]
    for key, val in scalars.items():
        if not math.isfinite(val):
            raise NumericalError(f"summary scalar {key!r} is not finite")
    return RunSummary(
        command=subcommand,
        wall_time_s=elapsed,
        scalars=scalars,
        outputs=outputs,
        warnings=notes,
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="spinbath",
        description="Spin-in-absorbing-environment scenario runner",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="path to the config file")
    parser.add_argument("--out", default=None, help="output path (stem or file)")
    parser.add_argument("--format", default=None, choices=("csv", "json"))
    args = parser.parse_args(argv)

    try:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config!r}: {exc}") from None
        config = parse_config(text)
        if args.out is not None:
            config.out = args.out
        if args.format is not None:
            config.format = args.format
        summary = run(args.subcommand, config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    print(summary.to_json())
    return 0


if __name__ == "__main__":
    sys.exit(main())

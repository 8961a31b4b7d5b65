"""Command-line harness: config ingestion, experiment presets, CSV/SVG
emission and run manifests.

Config values come from (lowest to highest precedence) built-in defaults,
a flat ``key = value`` config file or a previously written manifest.json,
and command-line flags.  Every run writes a manifest capturing the full
effective config plus the package version; feeding that manifest back via
``--config`` reproduces the CSV outputs byte for byte.

Exit codes: 0 success, 2 configuration error, 3 model/runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .ensemble import EnsembleReport, run_ensemble, sweep_mu
from .errors import ConfigError, KinexError
from .indicators import indicator_series
from .model import ExchangeModel, equilibrium_for_income
from .sde import SimulationConfig, run_trajectory
from .svg import bar_chart, line_plot

TABLE_MUS = (24.5, 27.0, 29.5)
TABLE3_MUS = (22.0, 24.5, 27.0, 29.5, 32.0)


@dataclass(frozen=True)
class RunConfig:
    n: int = 10
    delta_r: float = 10.0
    s_unit: float = 1.0
    gamma: float = 0.001
    dt: float = 0.1
    steps: int = 5000
    realizations: int = 50
    mu0: float = 27.0
    conserve_income: bool = True
    positivity_eps: float = 1e-12
    seed: int = 0
    sample_stride: int = 1
    noise_mode: str = "truncate"
    workers: int = 1
    mu_min: float = 20.4
    mu_max: float = 32.0
    mu_points: int = 100
    out: str = "runs"

    def sim_config(self, **overrides) -> SimulationConfig:
        base = dict(
            gamma=self.gamma,
            dt=self.dt,
            steps=self.steps,
            conserve_income=self.conserve_income,
            positivity_eps=self.positivity_eps,
            seed=self.seed,
            noise_mode=self.noise_mode,
        )
        base.update(overrides)
        return SimulationConfig(**base)


_INT_KEYS = {"n", "steps", "realizations", "seed", "sample_stride", "workers", "mu_points"}
_FLOAT_KEYS = {"delta_r", "s_unit", "gamma", "dt", "mu0", "positivity_eps", "mu_min", "mu_max"}
_BOOL_KEYS = {"conserve_income"}
_STR_KEYS = {"noise_mode", "out"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS | _STR_KEYS


def _coerce(key: str, raw) -> object:
    try:
        if key in _INT_KEYS:
            if isinstance(raw, bool):
                raise ValueError("boolean is not a count")
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _BOOL_KEYS:
            if isinstance(raw, bool):
                return raw
            low = str(raw).strip().lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return str(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from None


def _read_config_file(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        values = data.get("config", data)
        if not isinstance(values, dict):
            raise ConfigError(f"{path}: expected an object with config fields")
        return dict(values)
    values: dict = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


def _validate(cfg: RunConfig) -> RunConfig:
    def fail(key: str, msg: str) -> None:
        raise ConfigError(f"{key}: {msg}")

    if cfg.n < 3:
        fail("n", f"need at least 3 classes, got {cfg.n}")
    if not cfg.delta_r > 0:
        fail("delta_r", f"must be positive, got {cfg.delta_r}")
    if not 0 < cfg.s_unit < cfg.delta_r:
        fail("s_unit", f"must lie in (0, delta_r), got {cfg.s_unit}")
    if cfg.gamma < 0:
        fail("gamma", f"must be nonnegative, got {cfg.gamma}")
    if not cfg.dt > 0:
        fail("dt", f"must be positive, got {cfg.dt}")
    if cfg.steps < 1:
        fail("steps", f"must be at least 1, got {cfg.steps}")
    if cfg.realizations < 2:
        fail("realizations", f"need at least 2, got {cfg.realizations}")
    r1, rn = cfg.delta_r, cfg.n * cfg.delta_r
    if not r1 < cfg.mu0 < rn:
        fail("mu0", f"must lie strictly between {r1} and {rn}, got {cfg.mu0}")
    if not 0 <= cfg.positivity_eps < 1.0 / cfg.n:
        fail("positivity_eps", f"must lie in [0, 1/n), got {cfg.positivity_eps}")
    if not 1 <= cfg.sample_stride <= cfg.steps // 2:
        fail("sample_stride", f"must leave at least two samples, got {cfg.sample_stride}")
    if cfg.noise_mode not in ("truncate", "clip"):
        fail("noise_mode", f"must be 'truncate' or 'clip', got {cfg.noise_mode!r}")
    if cfg.workers < 1:
        fail("workers", f"must be at least 1, got {cfg.workers}")
    if not (r1 < cfg.mu_min < cfg.mu_max < rn):
        fail("mu_min", f"sweep grid must satisfy {r1} < mu_min < mu_max < {rn}")
    if cfg.mu_points < 2:
        fail("mu_points", f"need at least 2 grid points, got {cfg.mu_points}")
    return cfg


def parse_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge defaults, an optional config file and explicit overrides into
    a validated RunConfig.  Unknown keys and malformed values raise
    :class:`ConfigError` naming the offending key."""
    values: dict = {}
    if path is not None:
        values.update(_read_config_file(Path(path)))
    if overrides:
        values.update(overrides)
    unknown = sorted(set(values) - _ALL_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    coerced = {k: _coerce(k, v) for k, v in values.items()}
    return _validate(RunConfig(**coerced))


# ---------------------------------------------------------------------------
# output writers


def _f(v: float) -> str:
    return f"{float(v):.17g}"


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_manifest(out: Path, command: str, cfg: RunConfig, outputs: list[str]) -> None:
    manifest = {
        "tool": "kinex",
        "version": __version__,
        "command": command,
        "config": dataclasses.asdict(cfg),
        "outputs": sorted(outputs),
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _ensemble_rows(report: EnsembleReport):
    def opt(v) -> str:
        return "" if v is None else _f(v)

    for s in report.realizations:
        yield (str(s.index), _f(s.r_gm), opt(s.r_gmu), opt(s.r_mmu))
    yield ("mean", _f(report.mean_r_gm), opt(report.mean_r_gmu), opt(report.mean_r_mmu))
    yield (report.spread, _f(report.se_r_gm), opt(report.se_r_gmu), opt(report.se_r_mmu))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_coefficients(cfg: RunConfig, out: Path) -> list[str]:
    model = ExchangeModel.build(cfg.n, cfg.delta_r, cfg.s_unit)
    n = model.n
    _write_csv(
        out / "payments.csv",
        "h,k,p",
        ((str(h + 1), str(k + 1), _f(model.payments.p[h, k]))
         for h in range(n) for k in range(n)),
    )
    _write_csv(
        out / "coefficients.csv",
        "i,h,k,c",
        ((str(i + 1), str(h + 1), str(k + 1), _f(model.coefficients.c[i, h, k]))
         for i in range(n) for h in range(n) for k in range(n)),
    )
    _write_csv(
        out / "matrix_a.csv",
        "j,i,a",
        ((str(j + 1), str(i + 1), _f(model.correction.a[j, i]))
         for j in range(n) for i in range(n)),
    )
    return ["payments.csv", "coefficients.csv", "matrix_a.csv"]


def _equilibrium(cfg: RunConfig, model: ExchangeModel, mu: float | None = None) -> np.ndarray:
    return equilibrium_for_income(mu if mu is not None else cfg.mu0, model.ladder, model.coefficients)


def _cmd_equilibrate(cfg: RunConfig, out: Path) -> list[str]:
    model = ExchangeModel.build(cfg.n, cfg.delta_r, cfg.s_unit)
    x = _equilibrium(cfg, model)
    _write_csv(
        out / "equilibrium.csv",
        "class,r,x",
        ((str(j + 1), _f(model.ladder.r[j]), _f(x[j])) for j in range(model.n)),
    )
    bar_chart(
        out / "equilibrium.svg", x,
        title=f"Stationary distribution, total income {cfg.mu0:g}",
        xlabel="income class", ylabel="population fraction",
    )
    return ["equilibrium.csv", "equilibrium.svg"]


def _trajectory_rows(cfg: RunConfig, model: ExchangeModel, traj, stride: int):
    idx = range(0, traj.states.shape[0], stride)
    times = traj.times[list(idx)]
    states = traj.states[list(idx)]
    series = indicator_series(times, states, model)
    for k in range(times.size):
        yield (
            _f(times[k]),
            *(_f(v) for v in states[k]),
            _f(series.g[k]), _f(series.m[k]), _f(series.mu[k]),
        )


def _cmd_simulate(cfg: RunConfig, out: Path) -> list[str]:
    model = ExchangeModel.build(cfg.n, cfg.delta_r, cfg.s_unit)
    x0 = _equilibrium(cfg, model)
    traj = run_trajectory(x0, model, cfg.sim_config())
    header = "t," + ",".join(f"x{j + 1}" for j in range(model.n)) + ",G,M,mu"
    _write_csv(out / "trajectory.csv", header, _trajectory_rows(cfg, model, traj, cfg.sample_stride))
    return ["trajectory.csv"]


def _cmd_ensemble(cfg: RunConfig, out: Path) -> list[str]:
    model = ExchangeModel.build(cfg.n, cfg.delta_r, cfg.s_unit)
    x0 = _equilibrium(cfg, model)
    report = run_ensemble(
        model, x0, cfg.sim_config(), cfg.realizations,
        workers=cfg.workers, stride=cfg.sample_stride,
    )
    _write_csv(out / "ensemble.csv", "realization,R_GM,R_Gmu,R_Mmu", _ensemble_rows(report))
    return ["ensemble.csv"]


def _sweep(cfg: RunConfig):
    model = ExchangeModel.build(cfg.n, cfg.delta_r, cfg.s_unit)
    grid = np.linspace(cfg.mu_min, cfg.mu_max, cfg.mu_points)
    sim = cfg.sim_config(conserve_income=False)
    return sweep_mu(model, sim, grid, realizations=cfg.realizations, workers=cfg.workers)


def _write_sweep_csv(out: Path, res) -> None:
    _write_csv(
        out / "sweep.csv",
        "mu0,G_eq,R_MG,se_MG,R_muG,se_muG,R_Mmu,se_Mmu",
        ((_f(res.mu0[i]), _f(res.g_eq[i]), _f(res.r_mg[i]), _f(res.se_mg[i]),
          _f(res.r_mug[i]), _f(res.se_mug[i]), _f(res.r_mmu[i]), _f(res.se_mmu[i]))
         for i in range(res.mu0.size)),
    )


def _cmd_sweep(cfg: RunConfig, out: Path) -> list[str]:
    _write_sweep_csv(out, _sweep(cfg))
    return ["sweep.csv"]


def _cmd_figures(cfg: RunConfig, out: Path) -> list[str]:
    """Reproduction preset: stationary profile, sample time series, the
    three correlation tables and the sweep, with companion SVG plots."""
    model = ExchangeModel.build(cfg.n, cfg.delta_r, cfg.s_unit)
    outputs: list[str] = []

    outputs += _cmd_equilibrate(cfg, out)

    # income-conserving correlation table at the configured (default) dt
    rows = []
    for mu in TABLE_MUS:
        x0 = _equilibrium(cfg, model, mu)
        cells = []
        for col in range(3):
            rep = run_ensemble(
                model, x0, cfg.sim_config(seed=cfg.seed + col),
                cfg.realizations, workers=cfg.workers,
            )
            cells += [_f(rep.mean_r_gm), _f(rep.se_r_gm)]
        rows.append((_f(mu), *cells))
    _write_csv(
        out / "table1.csv",
        "mu,R_GM_a,se_a,R_GM_b,se_b,R_GM_c,se_c",
        rows,
    )
    outputs.append("table1.csv")

    # tables with freely wandering total income
    preset = cfg.sim_config(conserve_income=False)
    rows2 = []
    for mu in TABLE_MUS:
        x0 = _equilibrium(cfg, model, mu)
        cells = []
        for col in range(3):
            rep = run_ensemble(
                model, x0, dataclasses.replace(preset, seed=cfg.seed + col),
                cfg.realizations, workers=cfg.workers,
            )
            cells += [_f(rep.mean_r_gm), _f(rep.se_r_gm), _f(rep.mean_r_gmu), _f(rep.se_r_gmu)]
        rows2.append((_f(mu), *cells))
    _write_csv(
        out / "table2.csv",
        "mu,R_GM_a,se_GM_a,R_Gmu_a,se_Gmu_a,R_GM_b,se_GM_b,R_Gmu_b,se_Gmu_b,R_GM_c,se_GM_c,R_Gmu_c,se_Gmu_c",
        rows2,
    )
    outputs.append("table2.csv")

    rows3 = []
    for mu in TABLE3_MUS:
        x0 = _equilibrium(cfg, model, mu)
        rep = run_ensemble(model, x0, preset, cfg.realizations, workers=cfg.workers)
        rows3.append((_f(mu), _f(rep.mean_r_mmu), _f(rep.se_r_mmu)))
    _write_csv(out / "table3.csv", "mu,R_Mmu,se_Mmu", rows3)
    outputs.append("table3.csv")

    # sample time series with the comparison rescaling (M x 800, mu / 80)
    for mu in TABLE_MUS:
        x0 = _equilibrium(cfg, model, mu)
        traj = run_trajectory(x0, model, preset)
        series = indicator_series(traj.times[1:], traj.states[1:], model)
        steps = np.arange(1, series.g.size + 1, dtype=float)
        name = f"timeseries_mu{mu:g}.svg"
        line_plot(
            out / name,
            [(steps, series.g, "G"),
             (steps, series.m * 800.0, "M x 800"),
             (steps, series.mu / 80.0, "mu / 80")],
            title=f"Indicator time series, initial total income {mu:g}",
            xlabel="step", ylabel="rescaled indicators",
        )
        outputs.append(name)

    res = _sweep(cfg)
    _write_sweep_csv(out, res)
    outputs.append("sweep.csv")
    for fname, vals, label in (
        ("sweep_r_mg.svg", res.r_mg, "R_MG"),
        ("sweep_r_mug.svg", res.r_mug, "R_muG"),
        ("sweep_r_mmu.svg", res.r_mmu, "R_Mmu"),
    ):
        line_plot(
            out / fname, [(res.g_eq, vals, label)],
            title=f"{label} versus equilibrium Gini index",
            xlabel="G at equilibrium", ylabel=label, markers=True,
        )
        outputs.append(fname)
    return outputs


_COMMANDS = {
    "coefficients": _cmd_coefficients,
    "equilibrate": _cmd_equilibrate,
    "simulate": _cmd_simulate,
    "ensemble": _cmd_ensemble,
    "sweep": _cmd_sweep,
    "figures": _cmd_figures,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinex",
        description="Income-class exchange simulator with conservation-constrained noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("coefficients", "dump payment matrix, transition tensor and correction matrix"),
        ("equilibrate", "relax to the stationary distribution for a target total income"),
        ("simulate", "run one stochastic trajectory and dump it as CSV"),
        ("ensemble", "run a realization ensemble and report correlations"),
        ("sweep", "sweep the initial total income and record correlations vs Gini"),
        ("figures", "reproduce all tables, the sweep and companion SVG plots"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="config file (key = value lines) or a manifest.json")
        p.add_argument("--n", type=int, help="number of income classes")
        p.add_argument("--delta-r", dest="delta_r", type=float, help="class income spacing")
        p.add_argument("--s-unit", dest="s_unit", type=float, help="money unit per exchange")
        p.add_argument("--gamma", type=float, help="noise amplitude")
        p.add_argument("--dt", type=float, help="integration time step")
        p.add_argument("--steps", type=int, help="steps per trajectory")
        p.add_argument("--realizations", type=int, help="trajectories per ensemble")
        p.add_argument("--mu", dest="mu0", type=float, help="target total income")
        p.add_argument(
            "--conserve-income", dest="conserve_income",
            action=argparse.BooleanOptionalAction, default=None,
            help="enforce income conservation in the noise (default: yes)",
        )
        p.add_argument("--positivity-eps", dest="positivity_eps", type=float,
                       help="threshold treating a class fraction as vanished")
        p.add_argument("--seed", type=int, help="base random seed")
        p.add_argument("--stride", dest="sample_stride", type=int, help="indicator sampling stride")
        p.add_argument("--noise-mode", dest="noise_mode", choices=("truncate", "clip"),
                       help="how to bound the Gaussian draws")
        p.add_argument("--workers", type=int, help="concurrent realization workers")
        p.add_argument("--mu-min", dest="mu_min", type=float, help="sweep grid lower bound")
        p.add_argument("--mu-max", dest="mu_max", type=float, help="sweep grid upper bound")
        p.add_argument("--mu-points", dest="mu_points", type=int, help="sweep grid size")
        p.add_argument("--out", help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key in _ALL_KEYS and value is not None
    }
    try:
        cfg = parse_config(args.config, overrides)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        outputs = _COMMANDS[args.command](cfg, out)
        _write_manifest(out, args.command, cfg, outputs)
    except ConfigError as exc:
        print(f"kinex: config error: {exc}", file=sys.stderr)
        return 2
    except KinexError as exc:
        print(f"kinex: error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

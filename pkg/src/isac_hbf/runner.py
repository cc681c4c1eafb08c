"""Monte-Carlo trials, parameter sweeps and CSV export."""
from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .beampattern import build_quadratic_form, spec_from_config
from .channel import draw_channels
from .combiner import LmbcSettings, design_combiners
from .config import SystemConfig, target_layout, user_layout
from .errors import ConfigError
from .gmse import gm_sequential
from .metrics import EvaluationReport, evaluate
from .precoder import design_hybrid

SWEEP_PARAMS = ("snr_db", "epsilon_db", "n_users", "n_targets", "n_rf")
SWEEP_COLUMNS = ("param", "value", "trials", "mean_sum_se", "std_sum_se", "mean_gm_se",
                 "mean_min_rate", "mean_psi_db", "infeasible_frac")
BEAMPATTERN_COLUMNS = ("angle_deg", "gain_db")


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial.

    The stream depends on the master seed and trial index only, so every
    swept value sees the same channel draws (paired comparisons).
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(trial_index)]))


class DesignCache:
    """Memo of hybrid designs keyed by everything except the SNR.

    The design depends on the transmit power only through a common scale of
    ``F_BB_hat``, so an SNR sweep can reuse one design per trial.
    """

    def __init__(self):
        self._store: dict = {}

    @staticmethod
    def key(config: SystemConfig, trial_index: int):
        return (dataclasses.replace(config, snr_db=0.0, n_trials=1, objective="sum_se"), trial_index)

    def get(self, config: SystemConfig, trial_index: int):
        design = self._store.get(self.key(config, trial_index))
        if design is None:
            return None
        factor = math.sqrt(config.tx_power_w / design.power)
        return dataclasses.replace(design, F_BB_hat=design.F_BB_hat * factor, power=design.power * factor**2)

    def put(self, config: SystemConfig, trial_index: int, design) -> None:
        self._store[self.key(config, trial_index)] = design


def make_context(config: SystemConfig) -> dict:
    """Per-scenario objects shared by all trials; the quadratic form only when a finite budget needs it."""
    spec = spec_from_config(config)
    needs_qf = math.isfinite(config.epsilon) and spec.zeta > 0
    return {"spec": spec, "qf": build_quadratic_form(spec) if needs_qf else None}


def run_trial(config: SystemConfig, trial_index: int, cache: DesignCache | None = None,
              context: dict | None = None) -> EvaluationReport:
    """One Monte-Carlo trial: draw channels, design, evaluate.  Deterministic in (config, trial_index)."""
    config.validate()
    context = context or make_context(config)
    spec, qf = context["spec"], context["qf"]
    rng = trial_rng(config.seed, trial_index)
    channels = draw_channels(config, rng)

    design = cache.get(config, trial_index) if cache is not None else None
    if design is None:
        design = design_hybrid(channels, spec, config, qf=qf, rng=rng)
        if cache is not None:
            cache.put(config, trial_index, design)

    noise_var = config.effective_noise_var
    combiners = design_combiners(channels, noise_var, LmbcSettings.from_solver(config.solver),
                                 config.tx_power_w / config.n_streams)
    report = evaluate(design, combiners, channels, spec, noise_var)
    if config.objective == "gm_se":
        _, _, report, _ = gm_sequential(channels, spec, config, qf=qf, initial=(design, report))
    return report


def apply_sweep_value(config: SystemConfig, param: str, value) -> SystemConfig:
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"cannot sweep {param!r}; choose from {SWEEP_PARAMS}")
    if param == "n_users":
        n = int(value)
        return config.replace(n_users=n, user_angles_deg=user_layout(n))
    if param == "n_targets":
        n = int(value)
        return config.replace(n_targets=n, target_angles_deg=target_layout(n))
    if param == "n_rf":
        return config.replace(n_rf=int(value))
    return config.replace(**{param: float(value)})


@dataclass(frozen=True)
class SweepRow:
    value: float
    trials: int
    mean_sum_se: float
    std_sum_se: float
    mean_gm_se: float
    mean_min_rate: float
    mean_psi_db: float
    infeasible_frac: float


@dataclass
class SweepResult:
    param: str
    rows: list[SweepRow] = field(default_factory=list)
    reports: dict = field(default_factory=dict)  # swept value -> list of per-trial reports

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def aggregate(value, reports: list[EvaluationReport]) -> SweepRow:
    n = len(reports)
    sums = np.array([r.sum_se for r in reports])
    mean = math.fsum(sums) / n
    std = math.sqrt(math.fsum((sums - mean) ** 2) / n)
    return SweepRow(
        value=float(value),
        trials=n,
        mean_sum_se=mean,
        std_sum_se=std,
        mean_gm_se=math.fsum(r.gm_se for r in reports) / n,
        mean_min_rate=math.fsum(r.min_rate for r in reports) / n,
        mean_psi_db=math.fsum(r.psi_db for r in reports) / n,
        infeasible_frac=sum(not r.feasible for r in reports) / n,
    )


def run_sweep(config: SystemConfig, param: str, values, n_trials: int | None = None,
              cache: DesignCache | None = None,
              progress: Callable[[str], None] | None = None) -> SweepResult:
    """Run ``n_trials`` (default ``config.n_trials``) trials for every value of ``param``."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"cannot sweep {param!r}; choose from {SWEEP_PARAMS}")
    n_trials = config.n_trials if n_trials is None else int(n_trials)
    if n_trials < 1:
        raise ConfigError("n_trials must be positive")
    cache = cache if cache is not None else DesignCache()
    result = SweepResult(param)
    for value in values:
        cfg = apply_sweep_value(config, param, value).validate()
        context = make_context(cfg)
        reports = [run_trial(cfg, t, cache=cache, context=context) for t in range(n_trials)]
        result.reports[float(value)] = reports
        result.rows.append(aggregate(value, reports))
        if progress is not None:
            row = result.rows[-1]
            progress(f"{param}={value}: sum-SE {row.mean_sum_se:.4f}, min rate {row.mean_min_rate:.4f}")
    return result


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.9g}"


def _write_rows(path, header, rows) -> Path:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def emit_csv(result: SweepResult, path) -> Path:
    rows = ([result.param, r.value, r.trials, r.mean_sum_se, r.std_sum_se, r.mean_gm_se,
             r.mean_min_rate, r.mean_psi_db, r.infeasible_frac] for r in result.rows)
    return _write_rows(path, SWEEP_COLUMNS, rows)


def emit_beampattern_csv(angles, gains, path) -> Path:
    gains = np.asarray(gains, dtype=float)
    with np.errstate(divide="ignore"):
        gains_db = 10.0 * np.log10(gains)
    return _write_rows(path, BEAMPATTERN_COLUMNS, zip(np.asarray(angles, dtype=float), gains_db))


def design_beampattern(config: SystemConfig, trial_index: int = 0):
    """Normalized transmit beampattern (unit total power) of one trial's design."""
    context = make_context(config)
    rng = trial_rng(config.seed, trial_index)
    channels = draw_channels(config, rng)
    design = design_hybrid(channels, context["spec"], config, qf=context["qf"], rng=rng)
    combiners = design_combiners(channels, config.effective_noise_var,
                                 LmbcSettings.from_solver(config.solver), config.tx_power_w / config.n_streams)
    report = evaluate(design, combiners, channels, context["spec"], config.effective_noise_var)
    return report.beampattern[0], report.beampattern[1], design


def convergence_trace(config: SystemConfig, trial_index: int = 0):
    """Penalized RF-design cost after every accepted inner step, with the outer-iteration index."""
    _, _, design = design_beampattern(config, trial_index)
    diag = design.diagnostics
    outer = np.repeat(np.arange(len(diag.inner_iterations)), diag.inner_iterations)
    costs = np.asarray(diag.penalized[1:])
    return outer[: costs.size], costs, diag


def emit_convergence_csv(config: SystemConfig, path, trial_index: int = 0) -> Path:
    outer, costs, _ = convergence_trace(config, trial_index)
    rows = ((i + 1, int(o), c) for i, (o, c) in enumerate(zip(outer, costs)))
    return _write_rows(path, ("iteration", "outer_iteration", "penalized_objective"), rows)

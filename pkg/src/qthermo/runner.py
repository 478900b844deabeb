# SPDX-License-Identifier: MIT
"""Run scenarios and summarize their invariants"""

import glob
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from qthermo.common import ThermoTool, apply_prefix_wrapper
from qthermo.config import SCHEMA_VERSION, ScenarioConfig, load
from qthermo.dynamics import evolve, is_sampled, step_count
from qthermo.equilibrium import check_equilibrium_bipartite, check_equilibrium_undecomposed
from qthermo.errors import ConfigError, QthermoError
from qthermo.failures import (
    BalanceResidual,
    InequalityViolated,
    NegativeContactTemperature,
    NotInEquilibrium,
    PositivityProjected,
    SecondLawViolated,
)
from qthermo.run_report import write_ledger_csv, write_report_json
from qthermo.thermo import (
    ExchangeLedger,
    Temperatures,
    build_ledger,
    classify_partition,
    diagnostics,
    inequality_suite,
)

# residual column, ledger columns setting its scale, enforced
RESIDUALS = (
    ("first_law", "residual_first_law", ("W1_ex", "W2_ex", "Q_ex", "E1_dot", "E2_dot", "E12_dot"), True),
    ("energy_balance", "residual_energy_balance", ("E_dot", "W", "Q"), True),
    ("heat_sum", "residual_heat_sum", ("Q1", "Q2", "Q12", "Q"), True),
    ("entropy_rate_deficiency", "residual_entropy_rate_cd", ("S1_dot", "S2_dot", "S_dot"), False),
    ("inert", "residual_inert", ("Q12", "E12_dot"), False),
    ("sigma_forms", "residual_sigma_forms", ("Sigma", "Sigma_iso"), False),
)


@dataclass
class InvariantSummary:
    """How an invariant fared over a run.

    ``worst`` is the smallest value for inequalities, diagnostics and
    extracted reciprocal temperatures and the largest magnitude for residuals
    and projections.
    """

    name: str
    kind: str
    enforced: bool
    checked: int = 0
    violations: int = 0
    first_violation: Optional[float] = None
    worst: Optional[float] = None

    def record(self, t: float, value: float, ok: bool) -> None:
        self.checked += 1
        if self.worst is None:
            self.worst = value
        elif self.kind in ("inequality", "diagnostic", "extraction"):
            self.worst = min(self.worst, value)
        else:
            self.worst = max(self.worst, value)
        if not ok:
            self.violations += 1
            if self.first_violation is None:
                self.first_violation = t

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "enforced": self.enforced,
            "checked": self.checked,
            "violations": self.violations,
            "first_violation": self.first_violation,
            "worst": self.worst,
        }


@dataclass
class RunReport:
    """Outcome of one scenario run.

    ``elapsed`` is wall-clock time; it is shown in summaries but kept out of
    ``as_dict`` so the JSON report is reproducible.
    """

    name: str
    status: str = "ok"
    steps: int = 0
    sample_every: int = 1
    rows: list = field(default_factory=list)
    invariants: dict = field(default_factory=dict)
    equilibrium: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    projections: int = 0
    hermiticity_drift: float = 0.0
    partition: Optional[str] = None
    error: Optional[str] = None
    elapsed: float = 0.0
    policy: str = "none"
    dims: tuple = ()
    seed: Optional[int] = None

    @property
    def exit_code(self) -> int:
        return 0 if self.status == "ok" else 1

    @property
    def violations(self) -> int:
        return sum(s.violations for s in self.invariants.values() if s.enforced)

    @property
    def max_first_law_residual(self) -> float:
        summary = self.invariants.get("first_law")
        return summary.worst if summary and summary.worst is not None else 0.0

    def as_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "status": self.status,
            "error": self.error,
            "dims": list(self.dims),
            "policy": self.policy,
            "seed": self.seed,
            "steps": self.steps,
            "sample_every": self.sample_every,
            "rows": len(self.rows),
            "partition": self.partition,
            "positivity_projections": self.projections,
            "max_hermiticity_drift": self.hermiticity_drift,
            "max_first_law_residual": self.max_first_law_residual,
            "violations": self.violations,
            "invariants": [self.invariants[k].as_dict() for k in sorted(self.invariants)],
            "equilibrium": self.equilibrium,
            "failures": [f.as_dict() for f in self.failures],
        }


def _scale(row: ExchangeLedger, columns) -> float:
    return max([1.0] + [abs(getattr(row, c)) for c in columns])


def _row_temperatures(temps: Temperatures, row: ExchangeLedger) -> Temperatures:
    """The temperatures a ledger row was computed with"""
    if temps.mode != "extracted":
        return temps
    return temps.replace(
        theta=row.theta or temps.theta,
        theta1=row.theta1 or temps.theta1,
        theta2=row.theta2 or temps.theta2,
    )


def _work_derivatives(snapshot) -> tuple:
    """Generators and rates of every work variable, coupling terms summed"""
    coupling = []
    for j in range(len(snapshot.a12_dot)):
        g = np.zeros_like(snapshot.h)
        for generators in (snapshot.dh1_coupling, snapshot.dh2_coupling, snapshot.dh12_coupling):
            if j < len(generators):
                g = g + generators[j]
        coupling.append(g)
    generators = tuple(snapshot.dh1_own) + tuple(snapshot.dh2_own) + tuple(coupling)
    rates = np.concatenate([snapshot.a1_dot, snapshot.a2_dot, snapshot.a12_dot])
    return generators, rates


class ScenarioRunner(ThermoTool):
    """Integrate one scenario and write its ledger and report"""

    def __init__(self, config: ScenarioConfig, out_dir, tool_debug=False):
        log_prefix = "qthermo" if tool_debug else None
        super().__init__(log_prefix)
        self.config = config
        self.out_dir = out_dir
        self.samples = []
        self.invariants = {}
        self.partitions = set()
        self.steps = step_count(config.t_span, config.dt)

    def _track(self, name, kind, enforced) -> InvariantSummary:
        if name not in self.invariants:
            self.invariants[name] = InvariantSummary(name, kind, enforced)
        return self.invariants[name]

    def observe(self, t, rho, snapshot, ro) -> ExchangeLedger:
        cfg = self.config
        row = build_ledger(t, rho, snapshot, ro, cfg.temperatures, cfg.units, cfg.z, cfg.reservoir)
        self.check_residuals(row)
        self.check_contact_temperatures(row)
        self.partitions.add(self.check_inequalities(row, rho))
        step = int(round((t - cfg.t_span[0]) / cfg.dt))
        if is_sampled(step, self.steps, cfg.sample_every):
            self.samples.append((row, rho))
        return row

    def check_residuals(self, row: ExchangeLedger) -> None:
        tolerances = self.config.tolerances
        extracted = self.config.temperatures.mode == "extracted"
        for name, column, scale_columns, enforced in RESIDUALS:
            if name == "sigma_forms":
                enforced = extracted
            tol = tolerances["first_law"] if name == "first_law" else tolerances["residual"]
            value = abs(getattr(row, column))
            ok = value <= tol * _scale(row, scale_columns)
            self._track(name, "residual", enforced).record(row.t, value, ok)
        reservoir = self.config.reservoir
        if reservoir is not None:
            value = abs(row.Q2_HR - row.C_HR * reservoir.rate)
            ok = value <= tolerances["residual"] * _scale(row, ("Q2_HR", "C_HR"))
            self._track("reservoir_heat", "residual", True).record(row.t, value, ok)

    def check_contact_temperatures(self, row: ExchangeLedger) -> None:
        cfg = self.config
        if cfg.temperatures.mode != "extracted":
            return
        if cfg.dims.bipartite:
            columns = (
                ("contact_temperature_1", row.beta1_extracted),
                ("contact_temperature_2", row.beta2_extracted),
            )
        else:
            columns = (("contact_temperature", row.beta_extracted),)
        for name, beta in columns:
            # 0 marks an undefined temperature
            if beta == 0.0:
                continue
            self._track(name, "extraction", True).record(row.t, beta, beta > 0)

    def check_inequalities(self, row: ExchangeLedger, rho) -> Optional[str]:
        cfg = self.config
        temps = _row_temperatures(cfg.temperatures, row)
        partition = classify_partition(row, temps, cfg.tolerances["residual"])
        tol = cfg.tolerances["inequality"]
        for check in inequality_suite(row, temps, cfg.omega_ex, partition, rho, tol):
            self._track(check.name, "inequality", True).record(row.t, check.value, check.satisfied)
        for check in diagnostics(row, temps, tol):
            self._track(check.name, "diagnostic", False).record(row.t, check.value, check.satisfied)
        return partition.name if cfg.dims.bipartite else None

    def check_equilibrium(self, report: RunReport) -> None:
        cfg = self.config
        row, rho = self.samples[-1]
        temps = _row_temperatures(cfg.temperatures, row)
        snapshot = cfg.triple.at(row.t)
        ro = cfg.policy(rho, snapshot)
        tol = cfg.tolerances["equilibrium"]
        generators, rates = _work_derivatives(snapshot)
        undecomposed = check_equilibrium_undecomposed(
            rho, snapshot.h, ro, temps.theta, rates, generators, temps.t_box, tol, cfg.units
        )
        report.equilibrium = {"undecomposed": undecomposed.as_dict()}
        checks = [undecomposed]
        if cfg.dims.bipartite:
            bipartite = check_equilibrium_bipartite(rho, snapshot, ro, temps, tol, cfg.units)
            report.equilibrium["bipartite"] = bipartite.as_dict()
            checks.append(bipartite)
        for kind, check in zip(("undecomposed", "bipartite"), checks):
            failed = check.failed()
            if failed:
                header = f"{cfg.name}: {kind} equilibrium fails"
                logging.debug(apply_prefix_wrapper(header, "\n".join(failed)))
            if check.necessary_ok and not check.sufficient_ok:
                report.failures.append(NotInEquilibrium(failed))

    def collect_failures(self, report: RunReport, projections: list) -> None:
        tolerances = self.config.tolerances
        for name in sorted(self.invariants):
            summary = self.invariants[name]
            if not summary.violations:
                continue
            if summary.kind == "inequality":
                report.failures.append(
                    InequalityViolated(name, summary.first_violation, summary.worst, summary.violations)
                )
            elif summary.kind == "residual" and summary.enforced:
                tol = tolerances["first_law"] if name == "first_law" else tolerances["residual"]
                report.failures.append(
                    BalanceResidual(name, summary.first_violation, summary.worst, tol)
                )
            elif summary.kind == "extraction":
                report.failures.append(
                    NegativeContactTemperature(
                        name, summary.first_violation, summary.worst, summary.violations
                    )
                )
            elif name.startswith("second_law"):
                report.failures.append(SecondLawViolated(name, summary.first_violation, summary.worst))
        if projections:
            report.failures.append(
                PositivityProjected(len(projections), min(v for _, v in projections))
            )

    def run(self) -> RunReport:
        """Integrate, evaluate every invariant and write the output files"""
        cfg = self.config
        report = RunReport(
            name=cfg.name,
            policy=cfg.resolved["propagator"]["policy"],
            dims=(cfg.dims.d1, cfg.dims.d2),
            seed=cfg.seed,
            steps=self.steps,
            sample_every=cfg.sample_every,
        )
        start = time.perf_counter()
        trajectory = None
        try:
            trajectory = evolve(
                cfg.initial,
                cfg.triple,
                cfg.policy,
                cfg.t_span,
                cfg.dt,
                cfg.units,
                observer=self.observe,
                sample_every=cfg.sample_every,
            )
        except QthermoError as e:
            logging.error("Scenario %s aborted: %s", cfg.name, e)
            report.status = "aborted"
            report.error = str(e)

        report.rows = [row for row, _ in self.samples]
        projections = trajectory.projections if trajectory else []
        if trajectory is not None:
            report.projections = len(projections)
            report.hermiticity_drift = max(trajectory.hermiticity_drift, default=0.0)
            summary = self._track("positivity", "projection", False)
            for t, value in projections:
                summary.record(t, abs(value), False)
        partitions = self.partitions - {None}
        if partitions:
            report.partition = "mixed" if len(partitions) > 1 else partitions.pop()
        report.invariants = self.invariants
        if self.samples and report.status == "ok":
            self.check_equilibrium(report)
        self.collect_failures(report, projections)
        report.elapsed = time.perf_counter() - start

        os.makedirs(self.out_dir, exist_ok=True)
        write_ledger_csv(report.rows, os.path.join(self.out_dir, cfg.output["csv"]))
        write_report_json(report.as_dict(), os.path.join(self.out_dir, cfg.output["report"]))
        logging.info(
            "Scenario %s: %s, %d rows, %d violation(s) in %.3fs",
            cfg.name,
            report.status,
            len(report.rows),
            report.violations,
            report.elapsed,
        )
        return report


def run_file(path, out_dir) -> dict:
    """Validate and run one scenario file; never raises for scenario problems"""
    entry = {"scenario": os.path.basename(path), "status": "ok", "errors": [], "violations": 0, "rows": 0}
    try:
        config = ScenarioConfig.from_dict(load(path))
        report = ScenarioRunner(config, out_dir).run()
    except ConfigError as e:
        entry["status"] = "invalid"
        entry["errors"] = e.errors
        return entry
    except (QthermoError, OSError) as e:
        entry["status"] = "error"
        entry["errors"] = [str(e)]
        return entry
    entry["status"] = report.status
    entry["violations"] = report.violations
    entry["rows"] = len(report.rows)
    entry["partition"] = report.partition
    entry["max_first_law_residual"] = report.max_first_law_residual
    if report.error:
        entry["errors"] = [report.error]
    return entry


def scenario_stem(path) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def run_batch(pattern, out_dir, jobs=1) -> list:
    """Run every scenario matching ``pattern``, each in ``out_dir/<stem>``.

    Raises:
        ConfigError: nothing matches ``pattern``
    """
    paths = sorted(glob.glob(pattern))
    if not paths:
        raise ConfigError(f"{pattern}: no scenario files match")
    targets = [os.path.join(out_dir, scenario_stem(p)) for p in paths]
    if jobs <= 1:
        return [run_file(p, t) for p, t in zip(paths, targets)]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(run_file, paths, targets))

"""Parameter sweeps over the three computation engines.

A sweep config is a JSON document::

    {
      "base": {"g": 10, "kappa_b": 0.5, "kappa_c": 0.5, "E": 0.01},
      "axes": [{"name": "delta_a", "min": 5, "max": 200, "count": 60, "scale": "log"}],
      "constraint": "optimal-curve",
      "engine": "master-equation",
      "cutoffs": {"n_a_max": 3, "n_b_max": 4, "n_c_max": 4},
      "convergence": {"enabled": false, "rel_tol": 0.001}
    }

Unknown keys anywhere are rejected.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from itertools import product
from typing import Optional

import numpy as np

from . import __version__
from .analytic import DegenerateDenominator, g2_pair_analytic, optimal_delta, pair_number_analytic
from .fock import ModeCutoffs, build_space
from .liouvillian import IntegrationError, liouvillian
from .model import SystemParams
from .observables import REPORT_FIELDS, ConsistencyError, CorrelationReport, report
from .steady import SteadyStateError, residual, steady_state
from .weakdrive import SingularHierarchy, observables_from_amplitudes, solve_amplitudes

ENGINES = ("master-equation", "weak-drive", "analytic")
SWEEPABLE = ("delta_a", "delta_b", "delta_c", "delta_bc_sum", "g", "E", "kappa", "kappa_a")
CONSTRAINTS = (None, "optimal-curve")
MAX_CUTOFF = 12
CSV_TRAILER = ("residual", "cutoff_a", "cutoff_b", "cutoff_c", "error")

NUMERICAL_ERRORS = (SteadyStateError, DegenerateDenominator, SingularHierarchy,
                    ConsistencyError, IntegrationError, ArithmeticError,
                    np.linalg.LinAlgError, ValueError)


class ConfigError(ValueError):
    pass


class NoConvergence(RuntimeError):
    """Fock cutoffs hit the cap before the observables settled."""


class PointError(RuntimeError):
    """A numerical failure tagged with the parameter point that caused it."""

    def __init__(self, params: SystemParams, cause: Exception):
        super().__init__(f"{type(cause).__name__}: {cause} at {params}")
        self.params = params
        self.cause = cause


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {self.name!r}; choose from {SWEEPABLE}")
        if int(self.count) != self.count or self.count < 2:
            raise ConfigError(f"axis {self.name}: count must be an integer >= 2")
        if not self.min < self.max:
            raise ConfigError(f"axis {self.name}: min must be < max")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"axis {self.name}: scale must be 'linear' or 'log'")
        if self.scale == "log" and self.min <= 0:
            raise ConfigError(f"axis {self.name}: log scale needs min > 0")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.min, self.max, int(self.count))
        return np.linspace(self.min, self.max, int(self.count))


@dataclass(frozen=True)
class Convergence:
    enabled: bool = False
    rel_tol: float = 1e-3

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ConfigError("convergence.rel_tol must be > 0")


@dataclass(frozen=True)
class SweepConfig:
    base: SystemParams
    axes: tuple[Axis, ...]
    constraint: Optional[str] = None
    engine: str = "master-equation"
    cutoffs: ModeCutoffs = ModeCutoffs()
    convergence: Convergence = Convergence()

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError("a sweep needs one or two axes")
        names = [ax.name for ax in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate axes {names}")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}")
        if self.constraint not in CONSTRAINTS:
            raise ConfigError(f"constraint must be one of {CONSTRAINTS[1:]} or null")
        if self.constraint and set(names) & {"delta_b", "delta_c", "delta_bc_sum"}:
            raise ConfigError("the optimal-curve constraint fixes delta_b and delta_c; "
                              "they cannot also be swept")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        _reject_unknown(data, {f.name for f in fields(cls)}, "config")
        try:
            base = data.get("base", {})
            _reject_unknown(base, {f.name for f in fields(SystemParams)}, "base")
            axes = data.get("axes")
            if not isinstance(axes, list):
                raise ConfigError("axes must be a list")
            for ax in axes:
                _reject_unknown(ax, {f.name for f in fields(Axis)}, "axis")
            cut = data.get("cutoffs", {})
            _reject_unknown(cut, {f.name for f in fields(ModeCutoffs)}, "cutoffs")
            conv = data.get("convergence", {})
            _reject_unknown(conv, {f.name for f in fields(Convergence)}, "convergence")
            return cls(base=SystemParams(**base), axes=tuple(Axis(**ax) for ax in axes),
                       constraint=data.get("constraint"),
                       engine=data.get("engine", "master-equation"),
                       cutoffs=ModeCutoffs(**cut), convergence=Convergence(**conv))
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "base": self.base.as_dict(),
            "axes": [asdict(ax) for ax in self.axes],
            "constraint": self.constraint,
            "engine": self.engine,
            "cutoffs": asdict(self.cutoffs),
            "convergence": asdict(self.convergence),
        }

    def grid(self) -> list[dict]:
        """Swept values per point, first axis outermost."""
        names = [ax.name for ax in self.axes]
        return [dict(zip(names, map(float, combo)))
                for combo in product(*(ax.values() for ax in self.axes))]


def _reject_unknown(data, allowed, where):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def apply_point(base: SystemParams, swept: dict, constraint: Optional[str] = None) -> SystemParams:
    """Parameters of one grid point.

    ``delta_bc_sum`` splits evenly between modes b and c and ``kappa`` sets
    both subharmonic decay rates.
    """
    changes = {}
    for name, value in swept.items():
        if name == "delta_bc_sum":
            changes.update(delta_b=value / 2, delta_c=value / 2)
        elif name == "kappa":
            changes.update(kappa_b=value, kappa_c=value)
        else:
            changes[name] = value
    p = base.replace(**changes)
    if constraint == "optimal-curve":
        delta = optimal_delta(p.delta_a, p.g)
        p = p.replace(delta_b=delta, delta_c=delta)
    return p


def _master_equation(p: SystemParams, cutoffs: ModeCutoffs):
    space = build_space(cutoffs)
    L = liouvillian(space, p)
    rho = steady_state(L)
    return report(rho, space), residual(L, rho)


def run_point(p: SystemParams, engine: str = "master-equation",
              cutoffs: ModeCutoffs = ModeCutoffs()) -> CorrelationReport:
    """Observables at one point; fields an engine does not compute are flagged unavailable."""
    return _run_point(p, engine, cutoffs)[0]


def _run_point(p, engine, cutoffs):
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    try:
        if engine == "master-equation":
            return _master_equation(p, cutoffs)
        if engine == "weak-drive":
            amps = solve_amplitudes(p)
            if p.E == 0:
                return CorrelationReport(n_a=0.0, n_D=0.0,
                                         flags={"g2_D": "undefined"}), None
            n_D, g2_D = observables_from_amplitudes(amps)
            return CorrelationReport(n_a=abs(amps.c100) ** 2, n_D=n_D, g2_D=g2_D), None
        n_D = pair_number_analytic(p)
        return CorrelationReport(n_D=n_D, g2_D=g2_pair_analytic(p)), None
    except NUMERICAL_ERRORS as exc:
        raise PointError(p, exc) from exc


def _relative_change(new, old) -> float:
    if new is None or old is None:
        return 0.0 if new is old else math.inf
    scale = max(abs(new), abs(old))
    return 0.0 if scale == 0 else abs(new - old) / scale


def _converge(p, start, rel_tol, cap):
    if not rel_tol > 0:
        raise ValueError("rel_tol must be > 0")
    current = start
    rep, res = _master_equation(p, current)
    while True:
        nxt = current.incremented(2)
        if max(nxt.as_tuple()) > cap:
            raise NoConvergence(
                f"n_D/g2_D still moving by more than {rel_tol:g} at cutoffs "
                f"{current.as_tuple()} (cap {cap})")
        rep_next, res_next = _master_equation(p, nxt)
        if max(_relative_change(rep_next.n_D, rep.n_D),
               _relative_change(rep_next.g2_D, rep.g2_D)) < rel_tol:
            return current, rep, res
        current, rep, res = nxt, rep_next, res_next


def converge_cutoffs(p: SystemParams, start: ModeCutoffs = ModeCutoffs(),
                     rel_tol: float = 1e-3, cap: int = MAX_CUTOFF) -> ModeCutoffs:
    """Smallest cutoffs in the sequence ``start, start+2, ...`` whose n_D and g2_D
    agree with the next step to ``rel_tol``.

    Raises
    ------
    NoConvergence
        If the next step would exceed ``cap`` in any mode.
    """
    return _converge(p, start, rel_tol, cap)[0]


@dataclass
class SweepRow:
    index: int
    swept: dict
    params: Optional[SystemParams]
    engine: str
    cutoffs: ModeCutoffs
    report: Optional[CorrelationReport] = None
    residual: Optional[float] = None
    error: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "swept": self.swept,
            "params": self.params.as_dict() if self.params else None,
            "engine": self.engine,
            "cutoffs": list(self.cutoffs.as_tuple()),
            "report": self.report.as_dict() if self.report else None,
            "residual": self.residual,
            "error": self.error,
        }


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def metadata(self) -> dict:
        return {"config": self.config.to_dict(), "version": __version__,
                "wall_time_s": self.wall_time}

    @property
    def columns(self) -> list[str]:
        return [ax.name for ax in self.config.axes] + list(REPORT_FIELDS) + list(CSV_TRAILER)


def _evaluate(task) -> SweepRow:
    index, swept, config = task
    try:
        p = apply_point(config.base, swept, config.constraint)
    except ValueError as exc:
        return SweepRow(index, swept, None, config.engine, config.cutoffs,
                        error=f"{type(exc).__name__}: {exc}")
    cutoffs = config.cutoffs
    q = p.normalized()
    try:
        if config.engine == "master-equation" and config.convergence.enabled:
            try:
                cutoffs, rep, res = _converge(q, cutoffs, config.convergence.rel_tol, MAX_CUTOFF)
            except NUMERICAL_ERRORS as exc:
                raise PointError(q, exc) from exc
        else:
            rep, res = _run_point(q, config.engine, cutoffs)
    except (PointError, NoConvergence) as exc:
        cause = getattr(exc, "cause", exc)
        return SweepRow(index, swept, p, config.engine, cutoffs,
                        error=f"{type(cause).__name__}: {cause}")
    return SweepRow(index, swept, p, config.engine, cutoffs, report=rep, residual=res)


def default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def run_sweep(config: SweepConfig, workers: Optional[int] = None) -> SweepResult:
    """Evaluate every grid point; failures become error rows, never exceptions."""
    start = time.perf_counter()
    tasks = [(i, swept, config) for i, swept in enumerate(config.grid())]
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        rows = [_evaluate(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(tasks) // (4 * workers))
            rows = list(pool.map(_evaluate, tasks, chunksize=chunk))
    rows.sort(key=lambda r: r.index)
    return SweepResult(config, rows, time.perf_counter() - start)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(value)
    return format(float(value), ".17g")


def csv_rows(result: SweepResult) -> list[list[str]]:
    out = []
    for row in result.rows:
        values = dict(row.report.values()) if row.report else {}
        cells = [_fmt(row.swept[ax.name]) for ax in result.config.axes]
        cells += [_fmt(values.get(name)) for name in REPORT_FIELDS]
        cells.append(_fmt(row.residual))
        cells += [_fmt(n) for n in row.cutoffs.as_tuple()]
        cells.append(row.error or "")
        out.append(cells)
    return out


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    writer.writerows(csv_rows(result))
    return buf.getvalue()


def to_json(result: SweepResult) -> str:
    doc = {"metadata": result.metadata, "columns": result.columns,
           "rows": [row.as_dict() for row in result.rows]}
    return json.dumps(doc, indent=2, allow_nan=False)


def emit(result: SweepResult, fmt: str = "csv", path=None) -> str:
    """Serialize ``result``; write it to ``path`` when given and return the text."""
    if fmt == "csv":
        text = to_csv(result)
    elif fmt == "json":
        text = to_json(result)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text

"""Repeated seeded trials over instances and parameter grids, aggregated into
per-row statistics and written as CSV plus an aligned text table."""

from __future__ import annotations

import csv
import dataclasses
import itertools
import logging
import math
import statistics
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .colony import RunConfig
from .engine import Mode, RunReport, run, run_timed_baseline
from .instance import load_instance, load_optima

log = logging.getLogger(__name__)

GRID_KEYS = ("mode", "max_mod_frac", "partial_prob", "two_opt_prob", "two_opt_window")
PAIRINGS = ("time", "iterations")
FULL_TRIALS = 100
DEFAULT_TRIALS = 10

TSPLIB_SET = ("pcb442", "d657", "rat783", "pr1002", "pr2392")
ART_SET = ("mona-lisa100K", "vangogh120K", "venus140K", "earring200K")
CAPS = (0.5, 0.4, 0.3, 0.2, 0.1)


class PairingError(ValueError):
    """Speedup requested between rows that were not measured comparably."""


def default_optima() -> dict[str, int]:
    with resources.as_file(resources.files("partialaco") / "data" / "optima.txt") as p:
        return load_optima(p)


@dataclass(frozen=True)
class GridPoint:
    mode: Mode
    overrides: tuple[tuple[str, Any], ...] = ()

    @classmethod
    def of(cls, values: dict[str, Any]) -> "GridPoint":
        values = dict(values)
        mode = Mode.parse(values.pop("mode", Mode.PARTIAL))
        return cls(mode, tuple(sorted(values.items())))

    def config(self, base: RunConfig) -> RunConfig:
        return base.replace(**dict(self.overrides))

    @property
    def label(self) -> str:
        short = {Mode.PARTIAL: "partial", Mode.PACO: "paco", Mode.CLASSIC: "classic"}[self.mode]
        names = {"max_mod_frac": "mod", "partial_prob": "pp", "two_opt_prob": "2opt", "two_opt_window": "win"}
        parts = [short] + [f"{names.get(k, k)}={v:g}" for k, v in self.overrides]
        return " ".join(parts)


@dataclass
class ExperimentSpec:
    name: str
    instances: list[Path]
    trials: int = DEFAULT_TRIALS
    base: RunConfig = field(default_factory=RunConfig)
    grid: dict[str, list] = field(default_factory=lambda: {"mode": ["partial"]})
    out_dir: Path | None = None
    optima: dict[str, int] = field(default_factory=dict)
    baseline: dict[str, Any] | None = None
    pairing: str = "time"

    def __post_init__(self) -> None:
        self.instances = [Path(p) for p in self.instances]
        if self.out_dir is not None:
            self.out_dir = Path(self.out_dir)
        self.validate()

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.instances:
            raise ValueError("no instances given")
        if not self.grid or any(not v for v in self.grid.values()):
            raise ValueError("parameter grid is empty")
        bad = set(self.grid) - set(GRID_KEYS)
        if self.baseline:
            bad |= set(self.baseline) - set(GRID_KEYS)
        if bad:
            raise ValueError(f"unknown grid keys: {sorted(bad)}")
        if self.pairing not in PAIRINGS:
            raise ValueError(f"pairing must be one of {PAIRINGS}")
        missing = [str(p) for p in self.instances if not p.is_file()]
        if missing:
            raise FileNotFoundError(f"instance files not found: {', '.join(missing)}")

    def points(self) -> list[GridPoint]:
        keys = list(self.grid)
        return [GridPoint.of(dict(zip(keys, combo))) for combo in itertools.product(*(self.grid[k] for k in keys))]

    def baseline_point(self) -> GridPoint | None:
        return GridPoint.of(self.baseline) if self.baseline else None


@dataclass
class AggregateStats:
    """One table row. %-error columns are nan when the optimum is unknown."""

    instance: str
    label: str
    mode: str
    n: int
    trials: int
    failures: int
    mean: float
    sd: float
    best: float
    worst: float
    time_mean: float
    time_sd: float
    iters_mean: float
    length_mean: float
    best_length: int
    budget: str
    speedup: float = math.nan
    baseline: str = ""
    error: str = ""

    @classmethod
    def from_values(cls, pct_errors: list[float | None], times: list[float], iters: list[int] | None = None,
                    lengths: list[int] | None = None, *, instance: str = "", label: str = "",
                    mode: str = "", n: int = 0, failures: int = 0, budget: str = "",
                    error: str = "") -> "AggregateStats":
        iters = iters or []
        lengths = lengths or []
        pct = [p for p in pct_errors if p is not None]
        return cls(
            instance=instance, label=label, mode=mode, n=n,
            trials=len(times) + failures, failures=failures,
            mean=_mean(pct), sd=_sd(pct),
            best=min(pct) if pct else math.nan, worst=max(pct) if pct else math.nan,
            time_mean=_mean(times), time_sd=_sd(times),
            iters_mean=_mean(iters), length_mean=_mean(lengths),
            best_length=min(lengths) if lengths else -1,
            budget=budget, error=error,
        )


def _mean(xs) -> float:
    return statistics.fmean(xs) if xs else math.nan


def _sd(xs) -> float:
    if not xs:
        return math.nan
    return statistics.stdev(xs) if len(xs) > 1 else 0.0


def report_speedup(reference: AggregateStats, baseline: AggregateStats, basis: str = "time") -> float:
    """Speedup of ``reference`` over ``baseline``.

    ``basis="time"``: both ran the same iteration count; baseline mean time
    divided by reference mean time. ``basis="iterations"``: the baseline ran
    for the reference's wall time; reference iterations divided by baseline
    iterations.
    """
    if reference.instance != baseline.instance:
        raise PairingError(f"instances differ: {reference.instance} vs {baseline.instance}")
    if basis == "time":
        if baseline.budget == "timed" or reference.budget != baseline.budget:
            raise PairingError(f"equal-iteration pairing needs matching budgets, got "
                               f"{reference.budget!r} vs {baseline.budget!r}")
        return baseline.time_mean / reference.time_mean
    if basis == "iterations":
        if baseline.budget != "timed" or reference.budget == "timed":
            raise PairingError("iteration pairing needs a timed baseline against a fixed-iteration reference")
        return reference.iters_mean / baseline.iters_mean
    raise PairingError(f"unknown pairing basis {basis!r}")


# -- CSV ------------------------------------------------------------------

ROW_FIELDS = [f.name for f in dataclasses.fields(AggregateStats)]
RUN_FIELDS = ["instance", "label", "trial", "seed", "length", "pct_error", "wall_time",
              "iterations", "comparisons", "partial_builds", "two_opt_runs", "error"]


def _cell(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def write_rows(rows: list[AggregateStats], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(ROW_FIELDS)
        for r in rows:
            w.writerow([_cell(getattr(r, f)) for f in ROW_FIELDS])


def read_rows(path: str | Path) -> list[AggregateStats]:
    types = {f.name: f.type for f in dataclasses.fields(AggregateStats)}
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            kw = {}
            for k, v in rec.items():
                t = types[k]
                kw[k] = float(v) if t == "float" else int(v) if t == "int" else v
            out.append(AggregateStats(**kw))
    return out


def render_table(rows: list[AggregateStats]) -> str:
    """Aligned plain-text rendering of the rows."""
    head = ["instance", "config", "mean ± sd %", "best %", "worst %", "time ± sd s", "iters", "speedup"]
    body = []
    for r in rows:
        body.append([
            r.instance, r.label,
            f"{r.mean:.2f} ± {r.sd:.2f}", f"{r.best:.2f}", f"{r.worst:.2f}",
            f"{r.time_mean:.2f} ± {r.time_sd:.2f}", f"{r.iters_mean:.1f}",
            "" if math.isnan(r.speedup) else f"{r.speedup:.2f}x",
        ] + ([f"ERROR: {r.error}"] if r.error else []))
    widths = [max(len(row[i]) for row in [head] + body) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(head, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        cells = [c.ljust(w) for c, w in zip(row, widths)] + row[len(widths):]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


# -- running --------------------------------------------------------------

def _slug(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-." else "_" for c in text)


class _Sweep:
    def __init__(self, spec: ExperimentSpec, backend, progress: Callable[[str], None] | None) -> None:
        self.spec = spec
        self.backend = backend
        self.progress = progress or (lambda msg: None)
        self.runs_fh = None
        self.runs = None
        out = spec.out_dir
        if out is not None:
            (out / "convergence").mkdir(parents=True, exist_ok=True)
            self.runs_fh = open(out / "runs.csv", "w", newline="", encoding="utf-8")
            self.runs = csv.writer(self.runs_fh)
            self.runs.writerow(RUN_FIELDS)

    def close(self) -> None:
        if self.runs_fh is not None:
            self.runs_fh.close()

    def _trace(self, inst_name: str, label: str, trial: int) -> Path | None:
        if self.spec.out_dir is None:
            return None
        return self.spec.out_dir / "convergence" / f"{_slug(inst_name)}__{_slug(label)}__t{trial}.csv"

    def trials(self, inst, point: GridPoint, label: str, budgets: list[float] | None = None):
        """Run every trial of one row; returns (stats, per-trial reports or None)."""
        spec = self.spec
        reports: list[RunReport | None] = []
        errors = []
        for t in range(spec.trials):
            seed = spec.base.seed + t
            trace = self._trace(inst.name, label, t)
            try:
                cfg = point.config(spec.base).replace(seed=seed)
                if budgets is None:
                    rep = run(inst, cfg, point.mode, convergence_csv=trace, backend=self.backend)
                elif budgets[t] is None:
                    raise RuntimeError("reference trial failed; no budget to match")
                else:
                    rep = run_timed_baseline(inst, cfg, budgets[t], convergence_csv=trace, backend=self.backend)
            except Exception as exc:  # noqa: BLE001 - recorded per row
                log.warning("%s %s trial %d failed: %s", inst.name, label, t, exc)
                errors.append(f"{type(exc).__name__}: {exc}")
                reports.append(None)
                self._record(inst.name, label, t, seed, None, str(exc))
                continue
            reports.append(rep)
            self._record(inst.name, label, t, seed, rep, "")
            self.progress(f"{inst.name} | {label} | trial {t + 1}/{spec.trials} | "
                          f"{rep.best_length} ({_fmt_pct(rep.pct_error)}) in {rep.wall_time:.2f}s")
        ok = [r for r in reports if r is not None]
        stats = AggregateStats.from_values(
            [r.pct_error for r in ok], [r.wall_time for r in ok], [r.iterations_done for r in ok],
            [r.best_length for r in ok], instance=inst.name, label=label, mode=point.mode.value,
            n=inst.n, failures=len(errors),
            budget="timed" if budgets is not None else f"iterations={spec.base.iterations}",
            error="; ".join(sorted(set(errors))),
        )
        return stats, reports

    def _record(self, inst_name, label, trial, seed, rep: RunReport | None, error: str) -> None:
        if self.runs is None:
            return
        if rep is None:
            self.runs.writerow([inst_name, label, trial, seed, "", "", "", "", "", "", "", error])
        else:
            self.runs.writerow([inst_name, label, trial, seed, rep.best_length, _cell(rep.pct_error),
                                _cell(rep.wall_time), rep.iterations_done, rep.comparisons_total,
                                rep.partial_builds, rep.two_opt_runs, ""])
        self.runs_fh.flush()


def _fmt_pct(p: float | None) -> str:
    return "n/a" if p is None else f"{p:.2f}%"


def _failed_row(path: Path, label: str, mode: str, exc: Exception) -> AggregateStats:
    row = AggregateStats.from_values([], [], instance=path.stem, label=label, mode=mode,
                                     error=f"{type(exc).__name__}: {exc}")
    return row


def run_experiment(spec: ExperimentSpec, *, backend=None,
                   progress: Callable[[str], None] | None = None) -> list[AggregateStats]:
    """Run every (instance, grid point) row for ``spec.trials`` seeded trials.

    Trial t uses seed ``spec.base.seed + t``. With a baseline, each row gets
    a speedup against it: for ``pairing="time"`` the baseline runs the same
    iteration count once per instance; for ``pairing="iterations"`` a timed
    P-ACO baseline is run per row and trial for that trial's wall time.
    Failed runs are recorded and skipped; the sweep continues.
    """
    sweep = _Sweep(spec, backend, progress)
    rows: list[AggregateStats] = []
    bp = spec.baseline_point()
    try:
        for path in spec.instances:
            try:
                inst = load_instance(path, spec.optima)
            except Exception as exc:  # noqa: BLE001
                rows.append(_failed_row(path, "load", "", exc))
                continue
            base_row = None
            if bp is not None and spec.pairing == "time":
                base_row, _ = sweep.trials(inst, bp, bp.label)
                base_row.speedup = 1.0
                rows.append(base_row)
            for point in spec.points():
                if base_row is not None and point == bp:
                    continue
                row, reports = sweep.trials(inst, point, point.label)
                rows.append(row)
                if bp is None:
                    continue
                if spec.pairing == "time":
                    row.baseline = base_row.label
                    row.speedup = _safe_speedup(row, base_row, "time")
                else:
                    budgets = [r.wall_time if r is not None else None for r in reports]
                    label = f"{bp.label} timed vs {point.label}"
                    timed, _ = sweep.trials(inst, bp, label, budgets=budgets)
                    timed.speedup = 1.0
                    row.baseline = label
                    row.speedup = _safe_speedup(row, timed, "iterations")
                    rows.append(timed)
            if spec.out_dir is not None:
                _write_outputs(spec.out_dir, rows)
    finally:
        sweep.close()
    if spec.out_dir is not None:
        _write_outputs(spec.out_dir, rows)
    return rows


def _safe_speedup(row: AggregateStats, base: AggregateStats, basis: str) -> float:
    if row.failures == row.trials or base.failures == base.trials:
        return math.nan
    return report_speedup(row, base, basis)


def _write_outputs(out: Path, rows: list[AggregateStats]) -> None:
    write_rows(rows, out / "rows.csv")
    (out / "table.txt").write_text(render_table(rows), encoding="utf-8")


# -- presets --------------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    description: str
    instances: tuple[str, ...]
    grid: dict[str, list]
    baseline: dict[str, Any] | None = None
    pairing: str = "time"
    trials: int = DEFAULT_TRIALS
    extended: bool = False


_NO_LS = {"two_opt_prob": [0.0]}
_LS = {"two_opt_prob": [0.001]}
_ART = {"two_opt_prob": [0.001], "two_opt_window": [500]}

PRESETS: dict[str, Preset] = {
    "table1": Preset("P-ACO, full constructions, no 2-opt", TSPLIB_SET, {"mode": ["paco"], **_NO_LS}),
    "table2": Preset("PartialACO, no cap, no 2-opt", TSPLIB_SET,
                     {"mode": ["partial"], "max_mod_frac": [1.0], "partial_prob": [1.0], **_NO_LS},
                     baseline={"mode": "paco", "two_opt_prob": 0.0}),
    "table3": Preset("PartialACO, max modification 50%..10%, no 2-opt", TSPLIB_SET,
                     {"mode": ["partial"], "max_mod_frac": list(CAPS), "partial_prob": [1.0], **_NO_LS},
                     baseline={"mode": "paco", "two_opt_prob": 0.0}),
    "table4": Preset("PartialACO, partial probability 0.95, max modification 50%..10%", TSPLIB_SET,
                     {"mode": ["partial"], "max_mod_frac": list(CAPS), "partial_prob": [0.95], **_NO_LS},
                     baseline={"mode": "paco", "two_opt_prob": 0.0}),
    "paco_2opt": Preset("P-ACO with 2-opt probability 0.001", TSPLIB_SET, {"mode": ["paco"], **_LS}),
    "table5": Preset("PartialACO, no cap, 2-opt probability 0.001", TSPLIB_SET,
                     {"mode": ["partial"], "max_mod_frac": [1.0], "partial_prob": [1.0], **_LS},
                     baseline={"mode": "paco", "two_opt_prob": 0.001}),
    "table6": Preset("PartialACO, 2-opt probability 0.001, max modification 50%..10%", TSPLIB_SET,
                     {"mode": ["partial"], "max_mod_frac": list(CAPS), "partial_prob": [1.0], **_LS},
                     baseline={"mode": "paco", "two_opt_prob": 0.001}),
    "table7": Preset("PartialACO on art instances, 1% cap, windowed 2-opt", ART_SET,
                     {"mode": ["partial"], "max_mod_frac": [0.01], "partial_prob": [1.0], **_ART},
                     extended=True),
    "table8": Preset("table7 against time-limited P-ACO (iteration speedup)", ART_SET,
                     {"mode": ["partial"], "max_mod_frac": [0.01], "partial_prob": [1.0], **_ART},
                     baseline={"mode": "paco", "two_opt_prob": 0.001, "two_opt_window": 500},
                     pairing="iterations", extended=True),
}


def preset_spec(name: str, data_dir: str | Path, *, trials: int | None = None,
                out_dir: str | Path | None = None, optima: dict[str, int] | None = None,
                instances: list[str] | None = None, **cfg) -> ExperimentSpec:
    """Build the ExperimentSpec for a named preset.

    Instances are looked up as ``<data_dir>/<name>.tsp``; ``instances``
    restricts the set. Extra keyword arguments override RunConfig fields.
    """
    try:
        p = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None
    names = instances or list(p.instances)
    data_dir = Path(data_dir)
    return ExperimentSpec(
        name=name,
        instances=[data_dir / f"{i}.tsp" for i in names],
        trials=trials or p.trials,
        base=RunConfig(**cfg),
        grid={k: list(v) for k, v in p.grid.items()},
        out_dir=out_dir,
        optima={**default_optima(), **(optima or {})},
        baseline=dict(p.baseline) if p.baseline else None,
        pairing=p.pairing,
    )


# -- TOML sweep files -----------------------------------------------------

def load_spec(path: str | Path, **overrides) -> ExperimentSpec:
    """Read a sweep description.

    Top-level keys: ``name``, ``instances`` (list of paths), ``trials``,
    ``out_dir``, ``optima`` (file), ``pairing``, or ``preset`` with
    ``data_dir`` to start from a built-in preset. Tables ``[config]``
    (RunConfig fields), ``[grid]`` (lists) and ``[baseline]``. Relative
    paths resolve against the file's directory.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    root = path.parent

    def rel(p):
        p = Path(p)
        return p if p.is_absolute() else root / p

    known = {"name", "instances", "trials", "out_dir", "optima", "pairing", "preset", "data_dir",
             "config", "grid", "baseline"}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
    cfg = {**doc.get("config", {}), **{k: v for k, v in overrides.items() if k != "trials" and k != "out_dir"}}
    optima = load_optima(rel(doc["optima"])) if "optima" in doc else {}
    trials = overrides.get("trials") or doc.get("trials")
    out_dir = overrides.get("out_dir") or (rel(doc["out_dir"]) if "out_dir" in doc else None)

    if "preset" in doc:
        spec = preset_spec(doc["preset"], rel(doc.get("data_dir", ".")), trials=trials, out_dir=out_dir,
                           optima=optima, instances=doc.get("instances"), **cfg)
        if "grid" in doc:
            spec.grid = {k: list(v) for k, v in doc["grid"].items()}
        if "baseline" in doc:
            spec.baseline = dict(doc["baseline"])
        if "pairing" in doc:
            spec.pairing = doc["pairing"]
        if "name" in doc:
            spec.name = doc["name"]
        spec.validate()
        return spec

    if "instances" not in doc:
        raise ValueError(f"{path}: 'instances' or 'preset' is required")
    grid = {k: (list(v) if isinstance(v, list) else [v]) for k, v in doc.get("grid", {"mode": ["partial"]}).items()}
    return ExperimentSpec(
        name=doc.get("name", path.stem),
        instances=[rel(p) for p in doc["instances"]],
        trials=trials or DEFAULT_TRIALS,
        base=RunConfig(**cfg),
        grid=grid,
        out_dir=out_dir,
        optima={**default_optima(), **optima},
        baseline=doc.get("baseline"),
        pairing=doc.get("pairing", "time"),
    )

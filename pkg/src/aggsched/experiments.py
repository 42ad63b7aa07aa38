"""Parameter sweeps over random topologies: run the scheduling schemes on
paired topologies per sweep point, verify every schedule, and aggregate
delays into CSVs.

Schemes:

* ddas     -- minimal-sleep-delay tree, all current leaves each round
* spt-das  -- shortest-path tree, all current leaves each round
* ndas     -- minimal-sleep-delay tree, deepest remaining layer each round

All schemes at one (sweep value, trial) cell consume the identical topology
(seed derived from base seed, swept field, value, and trial), so scheme
comparisons are paired. Results are merged by key, so worker count never
changes output bytes.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

from .model import Params
from .netgen import derive_seed, field_tag, generate_network
from .scheduler import CandidatePolicy, aggregation_delay, schedule, verify_schedule
from .tree import build_ddas_tree, build_spt_tree, compute_layers

SWEEP_FIELDS = ("active_slot_count", "period_length", "node_count", "channel_count")

TRIALS_HEADER = ("sweep_field", "sweep_value", "scheme", "trial", "seed", "delay_slots")
SUMMARY_HEADER = ("sweep_field", "sweep_value", "scheme", "mean", "std", "min", "max", "n")


class Scheme(Enum):
    DDAS = "ddas"
    SPT_DAS = "spt-das"
    NDAS = "ndas"

    @property
    def uses_spt_tree(self) -> bool:
        return self is Scheme.SPT_DAS

    @property
    def policy(self) -> CandidatePolicy:
        if self is Scheme.NDAS:
            return CandidatePolicy.DEEPEST_LAYER_ONLY
        return CandidatePolicy.ALL_LEAVES


class SweepVerificationError(RuntimeError):
    """A produced schedule failed verification; the sweep is aborted."""


@dataclass(frozen=True)
class SweepSpec:
    base: Params
    swept_field: str
    values: tuple[int, ...]
    trials: int
    schemes: tuple[Scheme, ...] = (Scheme.DDAS, Scheme.SPT_DAS, Scheme.NDAS)

    def __post_init__(self) -> None:
        if self.swept_field not in SWEEP_FIELDS:
            raise ValueError(f"swept_field must be one of {SWEEP_FIELDS}")
        if not self.values:
            raise ValueError("values must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not self.schemes or len(set(self.schemes)) != len(self.schemes):
            raise ValueError("schemes must be non-empty and unique")
        for value in self.values:
            self.params_at(value)  # Params validation rejects bad sweep points

    def params_at(self, value: int, seed: int | None = None) -> Params:
        fields = {self.swept_field: value}
        if seed is not None:
            fields["rng_seed"] = seed
        return replace(self.base, **fields)

    def cell_seed(self, trial: int) -> int:
        # Common random numbers: one seed per trial index, shared by every
        # sweep value (and every scheme), so comparisons across sweep points
        # are paired wherever the swept field permits it.
        return derive_seed(self.base.rng_seed, field_tag(self.swept_field), trial)


@dataclass(frozen=True)
class SweepRow:
    scheme: Scheme
    value: int
    trial: int
    seed: int
    delay: int


@dataclass(frozen=True)
class ExperimentResult:
    sweep_field: str
    values: tuple[int, ...]
    schemes: tuple[Scheme, ...]
    rows: tuple[SweepRow, ...]

    def delays(self, scheme: Scheme, value: int) -> tuple[int, ...]:
        return tuple(r.delay for r in self.rows if r.scheme is scheme and r.value == value)

    def mean_delay(self, scheme: Scheme, value: int) -> float:
        delays = self.delays(scheme, value)
        if not delays:
            raise ValueError(f"no rows for {scheme.value} at {self.sweep_field}={value}")
        return sum(delays) / len(delays)


@dataclass(frozen=True)
class SummaryRow:
    scheme: Scheme
    value: int
    mean: float
    std: float
    min: int
    max: int
    n: int


@dataclass(frozen=True)
class ImprovementRow:
    value: int
    baseline_mean: float
    improved_mean: float
    improvement: float  # (baseline - improved) / baseline


def _run_trial(task: tuple[SweepSpec, int, int]) -> list[SweepRow]:
    spec, value, trial = task
    seed = spec.cell_seed(trial)
    net = generate_network(spec.params_at(value, seed=seed))
    layering = compute_layers(net)
    trees = {}
    rows = []
    for scheme in spec.schemes:
        kind = "spt" if scheme.uses_spt_tree else "ddas"
        if kind not in trees:
            build = build_spt_tree if kind == "spt" else build_ddas_tree
            trees[kind] = build(net, layering)
        tree = trees[kind]
        sched = schedule(net, tree, scheme.policy)
        violations = verify_schedule(net, tree, sched)
        if violations:
            raise SweepVerificationError(
                f"scheme {scheme.value} at {spec.swept_field}={value} trial={trial} "
                f"seed={seed}: {violations[0]}"
            )
        rows.append(
            SweepRow(scheme=scheme, value=value, trial=trial, seed=seed,
                     delay=aggregation_delay(sched))
        )
    return rows


def run_sweep(spec: SweepSpec, jobs: int = 1) -> ExperimentResult:
    """Run every (value, trial, scheme) cell; abort on any verifier violation.

    Deterministic given the spec, for any ``jobs``.
    """
    tasks = [(spec, value, trial) for value in spec.values for trial in range(spec.trials)]
    if jobs <= 1:
        row_lists = [_run_trial(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (jobs * 4))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            row_lists = list(pool.map(_run_trial, tasks, chunksize=chunk))
    value_order = {v: i for i, v in enumerate(spec.values)}
    scheme_order = {s: i for i, s in enumerate(spec.schemes)}
    rows = sorted(
        (r for rl in row_lists for r in rl),
        key=lambda r: (value_order[r.value], r.trial, scheme_order[r.scheme]),
    )
    return ExperimentResult(
        sweep_field=spec.swept_field,
        values=spec.values,
        schemes=spec.schemes,
        rows=tuple(rows),
    )


def summary(result: ExperimentResult) -> tuple[SummaryRow, ...]:
    """Per (scheme, value): mean, sample standard deviation, min, max, count."""
    out = []
    for value in result.values:
        for scheme in result.schemes:
            delays = result.delays(scheme, value)
            if not delays:
                continue
            n = len(delays)
            mean = sum(delays) / n
            var = sum((d - mean) ** 2 for d in delays) / (n - 1) if n > 1 else 0.0
            out.append(
                SummaryRow(
                    scheme=scheme, value=value, mean=mean, std=math.sqrt(var),
                    min=min(delays), max=max(delays), n=n,
                )
            )
    return tuple(out)


def summarize(
    result: ExperimentResult,
    improved: Scheme = Scheme.DDAS,
    baseline: Scheme = Scheme.NDAS,
) -> tuple[ImprovementRow, ...]:
    """Relative improvement of one scheme's mean delay over another, per value."""
    for scheme in (improved, baseline):
        if scheme not in result.schemes:
            raise ValueError(f"result does not contain scheme {scheme.value}")
    out = []
    for value in result.values:
        b = result.mean_delay(baseline, value)
        i = result.mean_delay(improved, value)
        out.append(
            ImprovementRow(
                value=value, baseline_mean=b, improved_mean=i, improvement=(b - i) / b
            )
        )
    return tuple(out)


def trials_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRIALS_HEADER)
    for r in result.rows:
        writer.writerow(
            [result.sweep_field, r.value, r.scheme.value, r.trial, r.seed, r.delay]
        )
    return buf.getvalue()


def from_trials_csv(text: str) -> ExperimentResult:
    """Inverse of trials_csv; value and scheme order follow first appearance."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != TRIALS_HEADER:
        raise ValueError(f"unexpected trials CSV header: {header}")
    sweep_field = None
    values: list[int] = []
    schemes: list[Scheme] = []
    rows = []
    for record in reader:
        if not record:
            continue
        field, value, scheme_name, trial, seed, delay = record
        if sweep_field is None:
            sweep_field = field
        elif field != sweep_field:
            raise ValueError(f"mixed sweep fields in one CSV: {sweep_field} vs {field}")
        value = int(value)
        scheme = Scheme(scheme_name)
        if value not in values:
            values.append(value)
        if scheme not in schemes:
            schemes.append(scheme)
        rows.append(
            SweepRow(scheme=scheme, value=value, trial=int(trial), seed=int(seed),
                     delay=int(delay))
        )
    if sweep_field is None:
        raise ValueError("trials CSV has no data rows")
    return ExperimentResult(
        sweep_field=sweep_field, values=tuple(values), schemes=tuple(schemes),
        rows=tuple(rows),
    )


def summary_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in summary(result):
        writer.writerow(
            [result.sweep_field, row.value, row.scheme.value, repr(row.mean),
             repr(row.std), row.min, row.max, row.n]
        )
    return buf.getvalue()


def plot_data(result: ExperimentResult) -> str:
    """Whitespace-separated plot file: sweep value, then one mean per scheme."""
    lines = ["# " + result.sweep_field + " " + " ".join(s.value for s in result.schemes)]
    for value in result.values:
        means = " ".join(repr(result.mean_delay(s, value)) for s in result.schemes)
        lines.append(f"{value} {means}")
    return "\n".join(lines) + "\n"


_CONFIG_FIELD_BY_KEY = {
    "active": "active_slot_count",
    "period": "period_length",
    "nodes": "node_count",
    "channels": "channel_count",
}


def parse_sweep_config(text: str) -> SweepSpec:
    """Flat key=value sweep description.

    Recognized keys: nodes, area, range, irange, period, active, channels,
    seed (base parameters); sweep (active|period|nodes|channels), values
    (comma-separated), trials, schemes (comma-separated scheme names).
    Blank lines and lines starting with # are skipped.
    """
    entries: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line is not key=value: {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in entries:
            raise ValueError(f"duplicate config key: {key}")
        entries[key] = value.strip()

    known = {"nodes", "area", "range", "irange", "period", "active", "channels",
             "seed", "sweep", "values", "trials", "schemes"}
    unknown = set(entries) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for required in ("nodes", "sweep", "values", "trials"):
        if required not in entries:
            raise ValueError(f"config is missing required key: {required}")

    base = Params(
        node_count=int(entries["nodes"]),
        area_side=float(entries.get("area", 100.0)),
        comm_range=float(entries.get("range", 20.0)),
        interference_range=float(entries["irange"]) if "irange" in entries else None,
        period_length=int(entries.get("period", 20)),
        active_slot_count=int(entries.get("active", 2)),
        channel_count=int(entries.get("channels", 3)),
        rng_seed=int(entries.get("seed", 0)),
    )
    sweep_key = entries["sweep"]
    if sweep_key not in _CONFIG_FIELD_BY_KEY:
        raise ValueError(f"sweep must be one of {sorted(_CONFIG_FIELD_BY_KEY)}")
    values = tuple(int(v) for v in entries["values"].split(",") if v.strip())
    if "schemes" in entries:
        schemes = tuple(Scheme(s.strip()) for s in entries["schemes"].split(",") if s.strip())
    else:
        schemes = (Scheme.DDAS, Scheme.SPT_DAS, Scheme.NDAS)
    return SweepSpec(
        base=base,
        swept_field=_CONFIG_FIELD_BY_KEY[sweep_key],
        values=values,
        trials=int(entries["trials"]),
        schemes=schemes,
    )

"""File formats for instances, traces, run reports and summaries.

Everything is structured text: instances and reports are JSON documents with
sorted keys, traces and per-cycle series are JSON lines, tabular summaries
are CSV with a fixed, documented header.  Serialization is canonical, so
identical data yields byte-identical files; writes go through a temp file
and an atomic rename.
"""

import csv
import hashlib
import io
import json
import os
from typing import Iterable

from .domain import AgentSpec, Instance, ScenarioTrace, TaskSpec
from .strategies import StrategyConfig

SUMMARY_COLUMNS = [
    "scenario", "strategy", "seed", "total_profit", "profit_pct_of_fop",
    "full_rotations", "avg_rotations_per_task", "cycles", "budget_mode",
]

REPORT_SCHEMA = "rotagap.report.v1"


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _compact_map(mapping: dict[str, int]) -> int | dict[str, int]:
    """Agent-independent values serialize as a bare int."""
    values = set(mapping.values())
    if len(values) == 1:
        return next(iter(values))
    return dict(sorted(mapping.items()))


def _expand_map(value, compatible: Iterable[str]) -> dict[str, int]:
    if isinstance(value, dict):
        return {a: int(v) for a, v in value.items()}
    return {a: int(value) for a in compatible}


def instance_to_dict(instance: Instance) -> dict:
    return {
        "agents": [{"id": a.id, "capacity": a.capacity} for a in instance.agents],
        "tasks": [
            {
                "id": t.id,
                "compatible": sorted(t.compatible),
                "weight": _compact_map(t.weights),
                "profit": _compact_map(t.profits),
            }
            for t in instance.tasks
        ],
        "metadata": instance.metadata,
    }


def instance_from_dict(data: dict) -> Instance:
    agents = tuple(AgentSpec(id=a["id"], capacity=int(a["capacity"]))
                   for a in data["agents"])
    tasks = []
    for t in data["tasks"]:
        compatible = frozenset(t["compatible"])
        tasks.append(TaskSpec(
            id=t["id"],
            compatible=compatible,
            weights=_expand_map(t["weight"], compatible),
            profits=_expand_map(t["profit"], compatible),
        ))
    return Instance(agents=agents, tasks=tuple(tasks),
                    metadata=data.get("metadata", {}))


def save_instance(path: str, instance: Instance) -> None:
    atomic_write_text(path, _dump_json(instance_to_dict(instance)))


def load_instance(path: str) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def trace_to_lines(trace: ScenarioTrace) -> str:
    """JSON lines: a header record, then one record per cycle."""
    out = io.StringIO()
    out.write(json.dumps({"cycles": trace.cycles, "seed": trace.seed},
                         sort_keys=True) + "\n")
    for k in range(1, trace.cycles + 1):
        agents, tasks = trace.entry(k)
        record = {"cycle": k, "agents": sorted(agents), "tasks": sorted(tasks)}
        out.write(json.dumps(record, sort_keys=True) + "\n")
    return out.getvalue()


def trace_from_lines(text: str) -> ScenarioTrace:
    lines = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty trace file")
    header, records = lines[0], lines[1:]
    cycles = int(header["cycles"])
    if len(records) != cycles:
        raise ValueError(f"trace header says {cycles} cycles, found {len(records)}")
    agents = []
    tasks = []
    for expected, record in enumerate(records, start=1):
        if int(record["cycle"]) != expected:
            raise ValueError(f"trace cycles out of order at {record['cycle']}")
        agents.append(frozenset(record["agents"]))
        tasks.append(frozenset(record["tasks"]))
    return ScenarioTrace(cycles=cycles, available_agents=tuple(agents),
                         available_tasks=tuple(tasks), seed=int(header["seed"]))


def save_trace(path: str, trace: ScenarioTrace) -> None:
    atomic_write_text(path, trace_to_lines(trace))


def load_trace(path: str) -> ScenarioTrace:
    with open(path, encoding="utf-8") as fh:
        return trace_from_lines(fh.read())


def scenario_label(instance: Instance) -> str:
    meta = instance.metadata
    generator = meta.get("generator", "custom")
    label = f"{generator}-{len(instance.agents)}x{len(instance.tasks)}"
    correlation = meta.get("params", {}).get("correlation")
    if correlation:
        label += f"-{correlation}"
    return label


def run_report_to_dict(report, *, scenario: str, seed: int, budget_mode: str,
                       config: dict) -> dict:
    """Summary document for one run; the per-cycle series goes to a separate
    JSON-lines file."""
    strategy: StrategyConfig = report.strategy
    return {
        "schema": REPORT_SCHEMA,
        "scenario": scenario,
        "strategy": {
            "kind": strategy.kind,
            "label": strategy.label,
            "gamma": strategy.gamma,
            "alpha": strategy.alpha,
            "beta": strategy.beta,
        },
        "seed": seed,
        "budget_mode": budget_mode,
        "cycles": len(report.per_cycle),
        "total_profit": report.total_profit,
        "full_rotations": report.full_rotations,
        "avg_rotations_per_task": report.avg_rotations_per_task,
        "final_counts": report.final_counts.tolist(),
        "provenance": report.provenance,
        "config": config,
    }


def cycle_lines(report) -> str:
    out = io.StringIO()
    for c in report.per_cycle:
        record = {
            "cycle": c.cycle,
            "profit": c.profit,
            "objective": c.objective,
            "max_ap": c.max_ap,
            "assigned_count": c.assigned_count,
            "budget_exhausted": c.budget_exhausted,
        }
        out.write(json.dumps(record, sort_keys=True) + "\n")
    return out.getvalue()


def summary_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return out.getvalue()


def read_summary(path: str) -> list[dict]:
    """Read a summary CSV, enforcing the documented column set."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SUMMARY_COLUMNS:
            raise ValueError(
                f"{path}: unexpected summary columns {reader.fieldnames}")
        return list(reader)

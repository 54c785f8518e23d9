"""The clock-reduction pipeline and its stages."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from ..ta import TimedAutomaton
from .clocks import (ClockClass, ClockGraph, active_clocks, build_clock_graph, partition_active_clocks,
                     reachable_zones, remove_redundant_resets, stage4_rename)
from .coloring import chromatic_number, color_graph
from .guards import BisimCounter, stage3_merge
from .locations import stage1_prune, stage2_split

__all__ = [
    "ClockClass", "ClockGraph", "PipelineReport", "StageStats", "active_clocks", "build_clock_graph",
    "chromatic_number", "color_clock_graph", "color_graph", "minimize_pipeline", "partition_active_clocks",
    "reachable_zones", "remove_redundant_resets", "stage1_prune", "stage2_split", "stage3_merge",
    "stage4_rename",
]


def color_clock_graph(g: ClockGraph) -> tuple[dict[int, int], int]:
    colors, count = color_graph(len(g.vertices), g.edges)
    return dict(enumerate(colors)), count


@dataclass
class StageStats:
    stage: str
    locations: int
    edges: int
    clocks: int

    @classmethod
    def of(cls, stage: str, ta: TimedAutomaton) -> StageStats:
        return cls(stage, len(ta.locations), len(ta.edges), ta.nclocks)


@dataclass
class PipelineReport:
    stages: list[StageStats] = field(default_factory=list)
    bisim_checks: int = 0
    clock_names: dict[str, list[str]] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def minimize_pipeline(ta: TimedAutomaton) -> tuple[TimedAutomaton, PipelineReport]:
    """Prune, split, merge guards, then rename clocks."""
    report = PipelineReport([StageStats.of("input", ta)])
    a1 = stage1_prune(ta)
    report.stages.append(StageStats.of("prune", a1))
    a2 = stage2_split(a1)
    report.stages.append(StageStats.of("split", a2))
    check = BisimCounter()
    a3 = stage3_merge(a2, check)
    report.bisim_checks = check.calls
    report.stages.append(StageStats.of("merge", a3))
    a4, info = stage4_rename(a3, details=True)
    report.stages.append(StageStats.of("rename", a4))
    if info is not None:
        report.clock_names = info.names
    return a4, report

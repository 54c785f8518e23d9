"""Timed automata: zones, pre-stable zone graphs, timed bisimulation and clock reduction."""
from __future__ import annotations

from .bisim import BisimResult, Verdict, check_timed_bisim
from .ta import Constraint, Edge, TaError, TimedAutomaton, load, load_example, parse_ta, serialize_ta, validate
from .zonegraph import ZoneGraph, build_zone_graph, export_graph

__version__ = "0.1.0"

__all__ = [
    "BisimResult", "Constraint", "Edge", "TaError", "TimedAutomaton", "Verdict", "ZoneGraph",
    "build_zone_graph", "check_timed_bisim", "export_graph", "load", "load_example", "parse_ta",
    "serialize_ta", "validate",
]

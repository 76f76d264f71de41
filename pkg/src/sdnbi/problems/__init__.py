"""Benchmark problems behind a uniform contract."""

from sdnbi.problems.base import BenchmarkDefaults, ProblemSpec, evaluate
from sdnbi.problems.benchmarks import MOP1, PROBLEMS, SCH2, TNK, ZDT3, ZDT5, get_problem, zdt5_v
from sdnbi.problems.reference import reference_front

__all__ = [
    "BenchmarkDefaults",
    "ProblemSpec",
    "evaluate",
    "MOP1",
    "SCH2",
    "TNK",
    "ZDT3",
    "ZDT5",
    "PROBLEMS",
    "get_problem",
    "zdt5_v",
    "reference_front",
]

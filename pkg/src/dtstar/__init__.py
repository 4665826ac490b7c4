"""Receding-horizon planning for repetitive pick-and-drop style LTL missions
on grids with timed blockages."""

from .buchi import BuchiAutomaton, LassoPlan, LassoTrace, accepts_lasso, parse_automaton, verify_plan
from .dyncost import EdgeCostTable, TimedPath, dy_cost, timed_shortest_path
from .greedy import greedy1, greedy2, greedy_plan
from .horizon import DecisionDag, expand, gen_cons
from .product import (
    InfeasibleSpecError,
    ProductNode,
    ReducedGraph,
    build_reduced_graph,
    static_plan,
    update_graph,
)
from .scenario import EventGenerator, Scenario, load_scenario
from .simulator import ExecutionLog, metrics, run
from .solvers import DecisionSequence, TimedPlan, plan_in_H, solve_exact
from .workspace import Blockages, DynamicEvent, Workspace, blocked_during

__version__ = "0.1.0"

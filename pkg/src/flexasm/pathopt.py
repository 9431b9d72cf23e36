"""Node graphs, edge model grids, cost functions and assembly planning.

For a structure of n tiles there are two directed graphs, one per action:
*pickup* (action node = the stack) and *assemble* (action node = the next
tile's position).  Tile nodes are (tile, arm) pairs; every tile-to-tile
edge swaps the walking arm, since the robot holds with one arm and
reaches with the other.  Adjacency matrices are (2n+1) x (2n+1) with a
zero diagonal.

Each edge is priced by gridding the robot's two quintic trajectory legs
(home -> action pose, action pose -> home) into z waypoints apiece,
building the closed attitude loop at every waypoint, and summing a system
norm over the resulting 2z models: peak wrench-to-rate gain, wrench-to-
attitude power, input-sensitivity peak, or the frequency-uncertainty
margin.  A hard cap turns any offending edge infinite.  Dijkstra then
picks minimum-cost paths; a unit-weight breadth-first search provides the
step-count baseline the optimized plans are measured against.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import IkNotConverged, LayoutError, StateInvalid, Unreachable
from .linss import StateSpace, h2_norm, hinf_norm, minimal_stable_projection
from .robot import quintic_waypoints
from .robust import mu_real_repeated
from .scenario import (
    HOME_JOINTS,
    AssemblyState,
    ScenarioConfig,
    ScenarioModels,
)

__all__ = [
    "NodeGraph",
    "CostSpec",
    "EdgeModelArray",
    "build_node_graphs",
    "shortest_path",
    "grid_edge_models",
    "edge_cost",
    "AssemblyPlanner",
    "plan_full_assembly",
    "PlanResult",
    "COST_KINDS",
]

COST_KINDS = ("hinf-wrench", "h2-theta", "hinf-isens", "mu")

PICKUP = "pickup"
ASSEMBLE = "assemble"


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

@dataclass
class NodeGraph:
    """Directed action graph over (tile, arm) states plus one action node."""

    kind: str
    n: int
    nodes: list
    adjacency: np.ndarray
    weights: Optional[np.ndarray] = None

    @property
    def action_index(self) -> int:
        return 2 * self.n

    def node_index(self, node) -> int:
        if node in ("stack", "target", "action"):
            return self.action_index
        tile, arm = node
        if not (1 <= tile <= self.n and arm in (1, 2)):
            raise StateInvalid(f"no node {node} in a {self.n}-tile graph")
        return 2 * (tile - 1) + (arm - 1)

    def edges(self):
        rows, cols = np.nonzero(self.adjacency)
        return list(zip(rows.tolist(), cols.tolist()))


def _cells_adjacent(a, b) -> bool:
    dr, dc = abs(a[0] - b[0]), abs(a[1] - b[1])
    return (dr, dc) != (0, 0) and dr <= 1 and dc <= 1


def build_node_graphs(cfg: ScenarioConfig, n: int):
    """Pickup and assemble graphs for the n-tile structure.

    Walking edges join docking tiles whose cells touch (side or diagonal)
    and always swap the gripping arm.  The stack node is reachable from
    tiles within arm reach of the stack; the assemble node from tiles
    adjacent to the next tile's cell (absent for the final structure).
    """
    if not 1 <= n <= cfg.n_tiles:
        raise LayoutError(f"no structure of size {n} in an N={cfg.n_tiles} run")
    cells = cfg.layout.cells[:n]
    size = 2 * n + 1
    nodes = [(t, a) for t in range(1, n + 1) for a in (1, 2)]

    walk = np.zeros((size, size))
    for a_t in range(1, n + 1):
        for b_t in range(1, n + 1):
            if a_t == b_t or not _cells_adjacent(cells[a_t - 1], cells[b_t - 1]):
                continue
            for arm in (1, 2):
                src = 2 * (a_t - 1) + (arm - 1)
                dst = 2 * (b_t - 1) + (2 - arm)
                walk[src, dst] = 1.0

    pickup = np.array(walk)
    c0 = cfg.stack_center()
    for t in range(1, n + 1):
        if np.linalg.norm(cfg.tile_center(t) - c0) <= cfg.stack_reach:
            for arm in (1, 2):
                pickup[2 * (t - 1) + (arm - 1), 2 * n] = 1.0

    assemble = np.array(walk)
    if n < cfg.n_tiles:
        nxt = cfg.layout.cells[n]
        for t in range(1, n + 1):
            if _cells_adjacent(cells[t - 1], nxt):
                for arm in (1, 2):
                    assemble[2 * (t - 1) + (arm - 1), 2 * n] = 1.0

    return (NodeGraph(PICKUP, n, nodes + ["stack"], pickup),
            NodeGraph(ASSEMBLE, n, nodes + ["target"], assemble))


def shortest_path(graph: NodeGraph, src, dst, mode: str = "dijkstra"):
    """Minimum-cost (or minimum-hop) path.

    Returns ``(path_indices, total_weight)``.  Ties break on fewer hops,
    then on lexicographic node order, so results are deterministic.
    ``bfs_unit`` treats every edge as weight one.
    """
    s = src if isinstance(src, int) else graph.node_index(src)
    t = dst if isinstance(dst, int) else graph.node_index(dst)
    size = graph.adjacency.shape[0]
    if mode == "dijkstra":
        if graph.weights is None:
            raise StateInvalid("graph has no weights; assign costs first")
        W = graph.weights
    elif mode == "bfs_unit":
        W = np.where(graph.adjacency > 0, 1.0, np.inf)
        if graph.weights is not None:
            # hard-constrained (infinite-cost) edges are impassable for
            # the unit-weight baseline as well
            W = np.where(np.isfinite(graph.weights), W, np.inf)
    else:
        raise ValueError(f"unknown search mode {mode!r}")

    if s == t:
        return [s], 0.0

    best = {}
    heap = [(0.0, 0, (s,))]
    while heap:
        cost, hops, path = heapq.heappop(heap)
        node = path[-1]
        if node == t:
            return list(path), cost
        if node in best and best[node] <= (cost, hops, path):
            continue
        best[node] = (cost, hops, path)
        for nxt in range(size):
            if graph.adjacency[node, nxt] <= 0:
                continue
            w = W[node, nxt]
            if not np.isfinite(w):
                continue
            heapq.heappush(heap, (cost + w, hops + 1, path + (nxt,)))
    raise Unreachable(f"no path from node {s} to node {t} in {graph.kind} graph")


# ---------------------------------------------------------------------------
# edge model grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CostSpec:
    """Which norm weights the edges, and an optional per-system hard cap."""

    kind: str
    hard_cap: Optional[float] = None
    mu_delta_max: float = 20.0

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise ValueError(f"cost kind must be one of {COST_KINDS}")
        if self.hard_cap is not None and self.hard_cap <= 0:
            raise ValueError("hard cap must be positive")

    @property
    def key(self):
        return (self.kind, self.hard_cap, self.mu_delta_max)


@dataclass
class EdgeModelArray:
    """The 2z closed-loop models attached to one graph edge.

    ``leg1`` runs from home to the action pose under the pre-action state,
    ``leg2`` back home under the post-action one.  ``dock_distance``
    records the gripped tile's distance to the hub CoM per waypoint.
    """

    edge_id: int
    kind: str
    n: int
    src: tuple
    dst: object
    leg1: list
    leg2: list
    dock_distance: np.ndarray
    state_pre: Optional[AssemblyState] = None
    state_post: Optional[AssemblyState] = None

    @property
    def systems(self) -> list:
        return self.leg1 + self.leg2


def _leg_systems(models: ScenarioModels, state: AssemblyState, sweeps, z, K_att):
    """Closed loops along one leg; ``sweeps`` maps arm number to (q0, q1)."""
    paths = {arm: quintic_waypoints(q0, q1, z) for arm, (q0, q1) in sweeps.items()}
    out = []
    for k in range(z):
        qs = tuple(paths[arm][k] if arm in paths else HOME_JOINTS
                   for arm in (1, 2, 3))
        out.append(models.closed_loop(state, qs, K_att))
    return out


def grid_edge_models(models: ScenarioModels, kind: str, n: int, src, dst,
                     K_att: np.ndarray, z: Optional[int] = None,
                     edge_id: int = 0) -> EdgeModelArray:
    """Build the 2z closed-loop models for one edge.

    Walking edges solve the two-arm straddle so the free arm's tip meets
    the target tile center; action edges park arm 3 on the stack (pickup)
    or on the next tile's cell (assemble).  Leg 2 always returns to the
    home configuration under the post-action state.
    """
    cfg = models.cfg
    z = cfg.z_grid if z is None else z
    tile, arm = src
    delta_walk = 0 if kind == PICKUP else 1
    pre = AssemblyState(n, tile, arm, delta_walk)

    if dst in ("stack", "target"):
        if dst == "stack":
            target = cfg.stack_center()
            post = AssemblyState(n, tile, arm, 1)
        else:
            if n >= cfg.n_tiles:
                raise StateInvalid(f"no tile left to assemble after F_{n}")
            target = cfg.hub.offset("P2") + cfg.layout.center(n + 1, cfg.pitch)
            post = AssemblyState(n + 1, tile, arm, 0)
        q_grip, q_reach = models.solve_reach(pre, 3, target)
        sweeps1 = {arm: (HOME_JOINTS, q_grip), 3: (HOME_JOINTS, q_reach)}
        sweeps2 = {arm: (q_grip, HOME_JOINTS), 3: (q_reach, HOME_JOINTS)}
        leg1 = _leg_systems(models, pre, sweeps1, z, K_att)
        leg2 = _leg_systems(models, post, sweeps2, z, K_att)
        dock = [float(np.linalg.norm(cfg.tile_center(tile)))] * (2 * z)
    else:
        tile_b, arm_b = dst
        if arm_b != 3 - arm:
            raise StateInvalid("walking must swap the gripping arm")
        target = cfg.tile_center(tile_b)
        q_grip, q_reach = models.solve_reach(pre, arm_b, target)
        post = AssemblyState(n, tile_b, arm_b, delta_walk)
        sweeps1 = {arm: (HOME_JOINTS, q_grip), arm_b: (HOME_JOINTS, q_reach)}
        sweeps2 = {arm_b: (q_reach, HOME_JOINTS), arm: (q_grip, HOME_JOINTS)}
        leg1 = _leg_systems(models, pre, sweeps1, z, K_att)
        leg2 = _leg_systems(models, post, sweeps2, z, K_att)
        dock = ([float(np.linalg.norm(cfg.tile_center(tile)))] * z
                + [float(np.linalg.norm(cfg.tile_center(tile_b)))] * z)

    return EdgeModelArray(edge_id, kind, n, src, dst, leg1, leg2,
                          np.asarray(dock), state_pre=pre, state_post=post)


def per_system_metric(sys: StateSpace, spec: CostSpec) -> float:
    """One closed-loop model's contribution to an edge weight."""
    if spec.kind == "hinf-wrench":
        return hinf_norm(minimal_stable_projection(sys, "W_ext", "omega_dot_G"))
    if spec.kind == "h2-theta":
        return h2_norm(minimal_stable_projection(sys, "W_ext", "Theta_G"))
    if spec.kind == "hinf-isens":
        return hinf_norm(minimal_stable_projection(sys, "d_t", "e_t"))
    return mu_real_repeated(sys, delta_max=spec.mu_delta_max).mu_lower


def edge_cost(array: EdgeModelArray, spec: CostSpec):
    """Sum of the per-system metric over the 2z models.

    Returns ``(cost, values)``; any value beyond the hard cap makes the
    whole edge infinite, which Dijkstra treats as impassable.
    """
    values = np.array([per_system_metric(s, spec) for s in array.systems])
    cost = float(np.sum(values))
    if spec.hard_cap is not None and np.any(values > spec.hard_cap):
        cost = np.inf
    return cost, values


# ---------------------------------------------------------------------------
# planner
# ---------------------------------------------------------------------------

@dataclass
class EdgeLog:
    edge_id: int
    kind: str
    n: int
    src: object
    dst: object
    values: np.ndarray
    cost: float
    dock_distance: np.ndarray


@dataclass
class StageLog:
    kind: str
    n: int
    path_nodes: list
    edges: list
    cost: float


@dataclass
class PlanResult:
    """Full-assembly plan and its evaluation.

    ``series`` rows are ``(grid_index, value, edge_id, action)`` for the
    optimized plan; the baseline plan's rows sit in ``series_baseline``.
    """

    spec: CostSpec
    stages: list
    stages_baseline: list
    cumulative: float
    cumulative_baseline: float
    series: list
    series_baseline: list
    mean_dock_distance: float
    mean_dock_distance_baseline: float

    @property
    def improvement_percent(self) -> float:
        if self.cumulative == 0.0:
            return 0.0
        return 100.0 * (self.cumulative_baseline - self.cumulative) / self.cumulative


class AssemblyPlanner:
    """Caches edge model arrays and costs across cost specs and searches."""

    def __init__(self, cfg: ScenarioConfig, K_att: Optional[np.ndarray] = None):
        self.cfg = cfg
        self.models = ScenarioModels(cfg)
        self.K_att = self.models.design_gains() if K_att is None else K_att
        self._arrays = {}
        self._costs = {}
        self._next_edge_id = 0

    def edge_array(self, kind: str, n: int, src, dst) -> Optional[EdgeModelArray]:
        """Models for one edge, or None when the straddle is unreachable.

        An edge whose action pose has no inverse-kinematics solution is a
        hard constraint: it stays in the adjacency but prices to infinity
        (the inferred arm geometry cannot span every diagonal).
        """
        key = (kind, n, src, dst)
        if key not in self._arrays:
            try:
                self._arrays[key] = grid_edge_models(
                    self.models, kind, n, src, dst, self.K_att,
                    edge_id=self._next_edge_id)
            except IkNotConverged:
                self._arrays[key] = None
            self._next_edge_id += 1
        return self._arrays[key]

    def edge_values(self, kind: str, n: int, src, dst, spec: CostSpec):
        key = (kind, n, src, dst, spec.key)
        if key not in self._costs:
            arr = self.edge_array(kind, n, src, dst)
            self._costs[key] = (np.inf, np.zeros(0)) if arr is None \
                else edge_cost(arr, spec)
        return self._costs[key]

    def weight_graph(self, graph: NodeGraph, spec: CostSpec) -> NodeGraph:
        W = np.full_like(graph.adjacency, np.inf, dtype=float)
        for i, k in graph.edges():
            src = graph.nodes[i]
            dst = graph.nodes[k]
            W[i, k] = self.edge_values(graph.kind, graph.n, src, dst, spec)[0]
        graph.weights = W
        return graph

    def _run_plan(self, spec: CostSpec, start, mode: str):
        cfg = self.cfg
        node = start
        stages = []
        series = []
        dock = []
        grid_index = 0
        cumulative = 0.0
        for n in range(1, cfg.n_tiles):
            pick, asm = build_node_graphs(cfg, n)
            for graph, goal in ((pick, "stack"), (asm, "target")):
                self.weight_graph(graph, spec)
                path, _ = shortest_path(graph, node, goal,
                                        "dijkstra" if mode == "weighted" else "bfs_unit")
                edges = []
                stage_cost = 0.0
                for i in range(len(path) - 1):
                    src = graph.nodes[path[i]]
                    dst = graph.nodes[path[i + 1]]
                    arr = self.edge_array(graph.kind, n, src, dst)
                    cost, values = self.edge_values(graph.kind, n, src, dst, spec)
                    edge_id = arr.edge_id if arr is not None else -1
                    dists = arr.dock_distance if arr is not None else np.zeros(0)
                    edges.append(EdgeLog(edge_id, graph.kind, n, src, dst,
                                         values, cost, dists))
                    stage_cost += cost
                    for v, d in zip(values, dists):
                        series.append((grid_index, float(v), edge_id, graph.kind))
                        dock.append(d)
                        grid_index += 1
                cumulative += stage_cost
                stages.append(StageLog(graph.kind, n, [graph.nodes[i] for i in path],
                                       edges, stage_cost))
                node = graph.nodes[path[-2]] if len(path) > 1 else node
        return stages, cumulative, series, float(np.mean(dock)) if dock else 0.0

    def plan_full_assembly(self, spec: CostSpec, start=(1, 1)) -> PlanResult:
        """Alternate pickup/assemble stages from one tile to the full set.

        The optimized plan runs Dijkstra on metric-weighted graphs; the
        baseline takes minimum-hop paths and is evaluated under the same
        metric for comparison.
        """
        stages_w, cum_w, series_w, dock_w = self._run_plan(spec, start, "weighted")
        stages_u, cum_u, series_u, dock_u = self._run_plan(spec, start, "baseline")
        return PlanResult(spec, stages_w, stages_u, cum_w, cum_u,
                          series_w, series_u, dock_w, dock_u)


def plan_full_assembly(cfg: ScenarioConfig, spec: CostSpec,
                       start=(1, 1), K_att=None) -> PlanResult:
    return AssemblyPlanner(cfg, K_att).plan_full_assembly(spec, start)

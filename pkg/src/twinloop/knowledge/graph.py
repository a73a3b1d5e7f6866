"""Dynamic knowledge graph built each step from current and forecast states.

Nodes cover cells (gnb), backhaul links (link_fn), and service slices; edges
carry traffic-dependency, orchestration, and control-signaling relations. All
nodes share one fixed feature layout of named groups, each present as a
(current, forecast, forecast-minus-current delta) triple; a node only fills
the groups that apply to its kind and leaves the rest at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import PreconditionError
from ..simcore.topology import NetworkTopology
from ..twin.features import FeatureRegistry, VirtualState

NODE_KINDS = ("gnb", "slice", "link_fn", "control_fn")
EDGE_RELATIONS = ("traffic_dependency", "orchestration", "control_signaling")

GRAPH_FEATURE_GROUPS = (
    "util",
    "latency",
    "p95_latency",
    "error",
    "handover",
    "throughput",
    "attached_frac",
    "link_load",
    "link_up",
    "slice_latency",
    "slice_throughput",
    "slice_util",
)
N_GROUPS = len(GRAPH_FEATURE_GROUPS)
FEATURE_WIDTH = 3 * N_GROUPS  # layout: [current | forecast | delta]

# fixed scales turning raw aggregates into SLA-relative levels
LATENCY_SCALE_MS = 20.0
THROUGHPUT_SCALE = 12.0


def group_index(group: str, component: str) -> int:
    g = GRAPH_FEATURE_GROUPS.index(group)
    offset = {"cur": 0, "fcst": N_GROUPS, "delta": 2 * N_GROUPS}[component]
    return offset + g


@dataclass
class GraphNode:
    node_id: str
    kind: str
    ref: int    # element index within its kind


@dataclass
class KnowledgeGraph:
    nodes: list[GraphNode]
    edges: list[tuple[str, str, str]]
    features: np.ndarray  # (|V|, FEATURE_WIDTH)
    t: int
    index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.index:
            self.index = {n.node_id: i for i, n in enumerate(self.nodes)}
        for src, dst, rel in self.edges:
            if src not in self.index or dst not in self.index:
                raise PreconditionError(f"edge ({src}, {dst}) references unknown node")
            if rel not in EDGE_RELATIONS:
                raise PreconditionError(f"unknown edge relation {rel!r}")
        if self.features.shape != (len(self.nodes), FEATURE_WIDTH):
            raise PreconditionError(
                f"feature matrix {self.features.shape} != ({len(self.nodes)}, {FEATURE_WIDTH})"
            )

    def node(self, node_id: str) -> GraphNode:
        return self.nodes[self.index[node_id]]

    def neighbors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for src, dst, _ in self.edges:
            i, j = self.index[src], self.index[dst]
            out[i].append(j)
            out[j].append(i)
        return out

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "nodes": [{"id": n.node_id, "kind": n.kind, "ref": n.ref} for n in self.nodes],
            "edges": [{"src": s, "dst": d, "relation": r} for s, d, r in self.edges],
            "features": {n.node_id: self.features[i].tolist() for i, n in enumerate(self.nodes)},
            "feature_groups": list(GRAPH_FEATURE_GROUPS),
        }


def _cell_groups(state: VirtualState, registry: FeatureRegistry, ue_count: float) -> np.ndarray:
    """Per-cell raw group values (bs_count, 7) from one virtual state."""
    B = registry.bs_count
    stat = state.stat.reshape(B, -1)
    attached = state.struct[2 * registry.link_count:]
    out = np.zeros((B, 7))
    out[:, 0] = stat[:, 3]                            # util
    out[:, 1] = stat[:, 0] / LATENCY_SCALE_MS         # latency
    out[:, 2] = stat[:, 1] / LATENCY_SCALE_MS         # p95 latency
    out[:, 3] = stat[:, 4]                            # error
    out[:, 4] = stat[:, 5]                            # handover rate
    out[:, 5] = stat[:, 2] / THROUGHPUT_SCALE         # throughput
    out[:, 6] = attached / max(ue_count, 1.0)         # attached fraction
    return out


def _link_groups(state: VirtualState, registry: FeatureRegistry) -> np.ndarray:
    L = registry.link_count
    out = np.zeros((L, 2))
    out[:, 0] = state.struct[:L]
    out[:, 1] = state.struct[L: 2 * L]
    return out


def _slice_groups(cells: np.ndarray, n_slices: int) -> np.ndarray:
    """Slice-level view: mean latency, throughput, and utilization over cells."""
    means = cells.mean(axis=0) if len(cells) else np.zeros(7)
    row = np.array([means[1], means[5], means[0]])
    return np.tile(row, (n_slices, 1))


def build_graph(
    current: VirtualState,
    forecast: VirtualState,
    topo: NetworkTopology,
    slices: tuple[str, ...] = ("embb", "urllc"),
    registry: FeatureRegistry | None = None,
) -> KnowledgeGraph:
    """Assemble nodes, relations, and the (current, forecast, delta) feature matrix."""
    registry = registry or FeatureRegistry(topo.bs_count, topo.link_count)
    if len(current.vector) != len(forecast.vector):
        raise PreconditionError("current and forecast state dimensions differ")
    if len(current.vector) != registry.dim:
        raise PreconditionError("state dimension does not match topology registry")

    nodes: list[GraphNode] = []
    rows: list[np.ndarray] = []

    cur_cells = _cell_groups(current, registry, topo.ue_count)
    fc_cells = _cell_groups(forecast, registry, topo.ue_count)
    cur_links = _link_groups(current, registry)
    fc_links = _link_groups(forecast, registry)
    cur_slices = _slice_groups(cur_cells, len(slices))
    fc_slices = _slice_groups(fc_cells, len(slices))

    def make_row(groups: dict[str, tuple[float, float]]) -> np.ndarray:
        row = np.zeros(FEATURE_WIDTH)
        for name, (cur, fc) in groups.items():
            row[group_index(name, "cur")] = cur
            row[group_index(name, "fcst")] = fc
            row[group_index(name, "delta")] = fc - cur
        return row

    gnb_groups = GRAPH_FEATURE_GROUPS[:7]
    for j in range(topo.bs_count):
        nodes.append(GraphNode(f"gnb{j}", "gnb", j))
        rows.append(make_row({g: (cur_cells[j, i], fc_cells[j, i])
                              for i, g in enumerate(gnb_groups)}))
    for e in range(topo.link_count):
        nodes.append(GraphNode(f"link{e}", "link_fn", e))
        rows.append(make_row({
            "link_load": (cur_links[e, 0], fc_links[e, 0]),
            "link_up": (cur_links[e, 1], fc_links[e, 1]),
        }))
    for s, name in enumerate(slices):
        nodes.append(GraphNode(f"slice-{name}", "slice", s))
        rows.append(make_row({
            "slice_latency": (cur_slices[s, 0], fc_slices[s, 0]),
            "slice_throughput": (cur_slices[s, 1], fc_slices[s, 1]),
            "slice_util": (cur_slices[s, 2], fc_slices[s, 2]),
        }))

    edges: list[tuple[str, str, str]] = []
    seen = set()
    for j in range(topo.bs_count):
        for other in topo.overlap_neighbors(j):
            key = (min(j, other), max(j, other))
            if key not in seen:
                seen.add(key)
                edges.append((f"gnb{key[0]}", f"gnb{key[1]}", "traffic_dependency"))
    for link in topo.links:
        edges.append((f"link{link.link_id}", f"gnb{link.a}", "traffic_dependency"))
        edges.append((f"link{link.link_id}", f"gnb{link.b}", "traffic_dependency"))
    for s, name in enumerate(slices):
        for j in range(topo.bs_count):
            edges.append((f"slice-{name}", f"gnb{j}", "orchestration"))

    return KnowledgeGraph(
        nodes=nodes,
        edges=edges,
        features=np.stack(rows) if rows else np.zeros((0, FEATURE_WIDTH)),
        t=current.t,
    )

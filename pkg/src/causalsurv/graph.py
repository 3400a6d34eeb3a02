"""Causal DAG representation, d-separation, and backdoor-set identification.

A DAG is the graphical half of a structural causal model: nodes are
variables (observed or latent), directed edges are direct causal
influences.  Identification of the treatment effect reduces to finding an
observed set of nodes that satisfies the backdoor criterion relative to
(treatment, outcome): no member descends from the treatment, and the set
blocks every path into the treatment that reaches the outcome.  Latent
nodes participate in paths but may never be adjusted for, which is what
makes identifiability fail in latent-confounding shapes.

All graph values are immutable after validation and every operation is a
pure function, so concurrent readers are safe.
"""

import json
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

from .errors import (
    CycleDetected,
    DuplicateEdge,
    DuplicateNode,
    GraphError,
    GraphFileError,
    GraphTooLarge,
    OverlappingSets,
    TreatmentEqualsOutcome,
    UnknownNode,
)

__all__ = [
    "CausalDag",
    "AdjustmentSet",
    "validate_dag",
    "descendants",
    "d_separated",
    "satisfies_backdoor",
    "minimal_backdoor_sets",
    "load_graph",
    "find_open_backdoor_path",
]


@dataclass(frozen=True)
class CausalDag:
    """Validated directed acyclic graph with per-node observability flags."""

    nodes: tuple[str, ...]
    observed: frozenset[str]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        parents = {v: [] for v in self.nodes}
        children = {v: [] for v in self.nodes}
        for a, b in self.edges:
            parents[b].append(a)
            children[a].append(b)
        # sorted adjacency keeps every traversal deterministic
        object.__setattr__(
            self, "_parents", {v: tuple(sorted(ps)) for v, ps in parents.items()}
        )
        object.__setattr__(
            self, "_children", {v: tuple(sorted(cs)) for v, cs in children.items()}
        )

    def parents(self, node: str) -> tuple[str, ...]:
        self._require(node)
        return self._parents[node]

    def children(self, node: str) -> tuple[str, ...]:
        self._require(node)
        return self._children[node]

    def is_observed(self, node: str) -> bool:
        self._require(node)
        return node in self.observed

    def observed_nodes(self) -> tuple[str, ...]:
        return tuple(v for v in self.nodes if v in self.observed)

    def _require(self, node: str) -> None:
        if node not in self._parents:
            raise UnknownNode(f"unknown node {node!r}")


@dataclass(frozen=True)
class AdjustmentSet:
    """Candidate adjustment set for the stored (treatment, outcome) pair."""

    variables: frozenset[str]
    valid: bool
    treatment: str
    outcome: str

    def sorted_members(self) -> tuple[str, ...]:
        return tuple(sorted(self.variables))


def validate_dag(nodes, edges) -> CausalDag:
    """Build a CausalDag, rejecting duplicates, dangling edges, and cycles.

    ``nodes`` entries are either plain names (observed) or (name, observed)
    pairs.  ``edges`` entries are (parent, child) pairs.
    """
    names: list[str] = []
    observed: set[str] = set()
    seen: set[str] = set()
    for item in nodes:
        if isinstance(item, str):
            name, obs = item, True
        else:
            name, obs = item
        if not isinstance(name, str) or not name:
            raise GraphError(f"node name must be a non-empty string, got {name!r}")
        if name in seen:
            raise DuplicateNode(f"duplicate node {name!r}")
        seen.add(name)
        names.append(name)
        if obs:
            observed.add(name)

    edge_list: list[tuple[str, str]] = []
    edge_seen: set[tuple[str, str]] = set()
    for pair in edges:
        a, b = pair
        for end in (a, b):
            if end not in seen:
                raise UnknownNode(f"edge endpoint {end!r} is not a declared node")
        if a == b:
            raise CycleDetected([a, a])
        if (a, b) in edge_seen:
            raise DuplicateEdge(f"duplicate edge {a!r} -> {b!r}")
        edge_seen.add((a, b))
        edge_list.append((a, b))

    _check_acyclic(names, edge_list)
    return CausalDag(tuple(names), frozenset(observed), tuple(edge_list))


def _check_acyclic(names, edges):
    children = {v: [] for v in names}
    indeg = {v: 0 for v in names}
    for a, b in edges:
        children[a].append(b)
        indeg[b] += 1
    queue = deque(v for v in names if indeg[v] == 0)
    emitted = 0
    while queue:
        v = queue.popleft()
        emitted += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    if emitted == len(names):
        return
    # every remaining node lies on or leads into a cycle; walk until a repeat
    remaining = {v for v in names if indeg[v] > 0}
    start = sorted(remaining)[0]
    trail, pos = [start], {start: 0}
    while True:
        nxt = min(c for c in children[trail[-1]] if c in remaining)
        if nxt in pos:
            cycle = trail[pos[nxt]:] + [nxt]
            raise CycleDetected(cycle)
        pos[nxt] = len(trail)
        trail.append(nxt)


def descendants(dag: CausalDag, node: str) -> set[str]:
    """All nodes reachable from ``node`` by directed paths, excluding itself."""
    dag._require(node)
    out: set[str] = set()
    queue = deque([node])
    while queue:
        v = queue.popleft()
        for c in dag.children(v):
            if c not in out:
                out.add(c)
                queue.append(c)
    return out


def _ancestors_of(parents, targets):
    """Targets plus every node with a directed path into a target."""
    out = set(targets)
    queue = deque(targets)
    while queue:
        v = queue.popleft()
        for p in parents[v]:
            if p not in out:
                out.add(p)
                queue.append(p)
    return out


def _d_separated(parents, children, a, b, given):
    """Reachability test over (node, arrival-direction) states.

    The ball travels every undirected path; a state records whether it
    arrived through an edge pointing into the node ('down', from a parent)
    or out of it ('up', from a child).  A non-collider in the conditioning
    set stops the ball; a collider passes it back to parents only if the
    collider or one of its descendants is conditioned on.
    """
    collider_open = _ancestors_of(parents, given)
    queue = deque((x, "up") for x in sorted(a))
    seen = set(queue)
    while queue:
        v, direction = queue.popleft()
        if v in b:
            return False
        moves = []
        if direction == "up":
            if v not in given:
                moves.extend((p, "up") for p in parents[v])
                moves.extend((c, "down") for c in children[v])
        else:
            if v not in given:
                moves.extend((c, "down") for c in children[v])
            if v in collider_open:
                moves.extend((p, "up") for p in parents[v])
        for state in moves:
            if state not in seen:
                seen.add(state)
                queue.append(state)
    return True


def _as_name_set(dag, value, label):
    out = frozenset(value)
    for name in out:
        if name not in dag._parents:
            raise UnknownNode(f"unknown node {name!r} in {label}")
    return out


def d_separated(dag: CausalDag, a, b, given) -> bool:
    """True iff ``given`` blocks every path between the sets ``a`` and ``b``."""
    a = _as_name_set(dag, a, "first set")
    b = _as_name_set(dag, b, "second set")
    given = _as_name_set(dag, given, "conditioning set")
    for x, y in ((a, b), (a, given), (b, given)):
        overlap = x & y
        if overlap:
            raise OverlappingSets(f"sets overlap on {sorted(overlap)!r}")
    if not a or not b:
        return True
    return _d_separated(dag._parents, dag._children, a, b, given)


def satisfies_backdoor(dag: CausalDag, z, treatment: str, outcome: str) -> AdjustmentSet:
    """Check the backdoor criterion for ``z`` relative to (treatment, outcome).

    Valid iff every member is observed, none descends from the treatment,
    and ``z`` d-separates treatment from outcome once all edges out of the
    treatment are removed.
    """
    dag._require(treatment)
    dag._require(outcome)
    if treatment == outcome:
        raise TreatmentEqualsOutcome(f"treatment and outcome are both {treatment!r}")
    z = _as_name_set(dag, z, "adjustment set")
    if treatment in z or outcome in z:
        raise OverlappingSets("adjustment set must exclude treatment and outcome")

    valid = z <= dag.observed and not (z & descendants(dag, treatment))
    if valid:
        parents = dict(dag._parents)
        children = dict(dag._children)
        children[treatment] = ()
        for c in dag.children(treatment):
            parents[c] = tuple(p for p in parents[c] if p != treatment)
        valid = _d_separated(parents, children, {treatment}, {outcome}, z)
    return AdjustmentSet(z, valid, treatment, outcome)


def minimal_backdoor_sets(
    dag: CausalDag, treatment: str, outcome: str, max_candidates: int = 20
) -> list[AdjustmentSet]:
    """All inclusion-minimal observed sets satisfying the backdoor criterion.

    Exhaustive over subsets of observed non-descendants of the treatment
    (these graphs are desk-scale), ascending by size then lexicographically;
    an empty result means the effect is not backdoor-identifiable.
    """
    dag._require(treatment)
    dag._require(outcome)
    if treatment == outcome:
        raise TreatmentEqualsOutcome(f"treatment and outcome are both {treatment!r}")
    banned = descendants(dag, treatment) | {treatment, outcome}
    candidates = sorted(v for v in dag.observed_nodes() if v not in banned)
    if len(candidates) > max_candidates:
        raise GraphTooLarge(
            f"{len(candidates)} candidate nodes exceed the cap of {max_candidates}"
        )
    minimal: list[AdjustmentSet] = []
    for size in range(len(candidates) + 1):
        for combo in combinations(candidates, size):
            s = frozenset(combo)
            if any(m.variables < s for m in minimal):
                continue
            checked = satisfies_backdoor(dag, s, treatment, outcome)
            if checked.valid:
                minimal.append(checked)
    return minimal


def find_open_backdoor_path(dag: CausalDag, treatment: str, outcome: str):
    """One backdoor path left open by the empty set, or None.

    Used to explain non-identifiability: a path starting with an arrow into
    the treatment that contains no collider is open unconditionally.
    """
    dag._require(treatment)
    dag._require(outcome)

    # walk undirected paths, remembering edge orientation to spot colliders
    def extend(node, arrived_into, path, edge_dirs):
        if node == outcome:
            return list(path)
        neighbors = [(c, True) for c in dag.children(node)] + [
            (p, False) for p in dag.parents(node)
        ]
        for nxt, forward in sorted(neighbors):
            if nxt in path:
                continue
            if arrived_into and not forward:
                continue  # node would be a collider: blocked by the empty set
            found = extend(nxt, forward, path + [nxt], edge_dirs + [forward])
            if found:
                return found
        return None

    for parent in dag.parents(treatment):
        found = extend(parent, False, [treatment, parent], [False])
        if found:
            return found
    return None


def format_path(dag: CausalDag, path) -> str:
    """Render a node path with edge directions, e.g. ``X <- Z -> Y``."""
    parts = [path[0]]
    for a, b in zip(path, path[1:]):
        arrow = " -> " if b in dag.children(a) else " <- "
        parts.append(arrow + b)
    return "".join(parts)


# --- graph JSON interface ----------------------------------------------------

def load_graph(source) -> CausalDag:
    """Read a graph JSON file: {"nodes": [...], "edges": [[parent, child], ...]}.

    Node entries are objects with "name" (string) and optional "observed"
    (bool, default true).  Malformed input is rejected with the offending
    position in the message.
    """
    if hasattr(source, "read"):
        text = source.read()
        origin = getattr(source, "name", "<graph>")
    else:
        origin = str(source)
        text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFileError(
            f"{origin}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise GraphFileError(f"{origin}: top level must be an object")

    raw_nodes = doc.get("nodes")
    if not isinstance(raw_nodes, list):
        raise GraphFileError(f'{origin}: "nodes" must be an array')
    nodes = []
    for i, entry in enumerate(raw_nodes):
        where = f"{origin}: nodes[{i}]"
        if isinstance(entry, str):
            nodes.append((entry, True))
            continue
        if not isinstance(entry, dict):
            raise GraphFileError(f"{where}: expected an object or a string")
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise GraphFileError(f'{where}: "name" must be a non-empty string')
        obs = entry.get("observed", True)
        if not isinstance(obs, bool):
            raise GraphFileError(f'{where}: "observed" must be a boolean')
        nodes.append((name, obs))

    raw_edges = doc.get("edges")
    if not isinstance(raw_edges, list):
        raise GraphFileError(f'{origin}: "edges" must be an array')
    edges = []
    for i, entry in enumerate(raw_edges):
        where = f"{origin}: edges[{i}]"
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(e, str) for e in entry)
        ):
            raise GraphFileError(f"{where}: expected a [parent, child] string pair")
        edges.append((entry[0], entry[1]))

    return validate_dag(nodes, edges)

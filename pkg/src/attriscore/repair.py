"""Conflict hypergraphs, subset/cardinality repairs and the inconsistency degree.

A repair deletes tuples until no denial constraint is violated.  Seen on the
conflict hypergraph (tuples as vertices, minimal violations as hyperedges),
S-repairs are the maximal independent sets and C-repairs are what is left
after deleting a minimum hitting set.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .config import HITTING_SET_NODES, REPAIR_CAP, WITNESS_CAP
from .errors import (EmptyInstance, HittingSetAborted, MalformedHypergraph,
                     RepairCapExceeded)
from .relcore import RelationalInstance, minimal_sets, minimal_witnesses, sorted_sets


@dataclass(frozen=True)
class ConflictHypergraph:
    vertices: frozenset
    edges: frozenset

    def __post_init__(self):
        for e in self.edges:
            if not e:
                raise MalformedHypergraph("empty hyperedge")
            if not e <= self.vertices:
                raise MalformedHypergraph("hyperedge mentions unknown vertices", edge=e - self.vertices)

    @classmethod
    def from_edges(cls, edges, vertices=()):
        edges = frozenset(frozenset(e) for e in edges)
        verts = frozenset(vertices).union(*edges) if edges else frozenset(vertices)
        return cls(verts, edges)

    def to_dict(self):
        return {"vertices": sorted(self.vertices), "edges": sorted_sets(self.edges)}


@dataclass(frozen=True)
class RepairSet:
    kind: str
    repairs: frozenset

    def __iter__(self):
        return iter(self.repairs)

    def __len__(self):
        return len(self.repairs)

    def __contains__(self, item):
        return frozenset(item) in self.repairs

    def to_dict(self):
        return {"kind": self.kind, "repairs": sorted_sets(self.repairs)}


def build_conflict_hypergraph(instance: RelationalInstance, constraints: Iterable,
                              witness_cap=WITNESS_CAP) -> ConflictHypergraph:
    edges = set()
    for dc in constraints:
        edges.update(minimal_witnesses(instance, dc, cap=witness_cap))
    return ConflictHypergraph(instance.ids, frozenset(edges))


def is_consistent(instance, constraints, witness_cap=WITNESS_CAP):
    return not build_conflict_hypergraph(instance, constraints, witness_cap).edges


# ---------------------------------------------------------------------------
# exact minimum hitting set


class _Budget:
    def __init__(self, cap):
        self.cap = cap
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.nodes > self.cap:
            raise HittingSetAborted(f"exact search aborted after {self.cap} nodes", cap=self.cap)


def _edge_key(e):
    return (len(e), sorted(e))


def _disjoint_lower_bound(edges):
    used, count = set(), 0
    for e in sorted(edges, key=_edge_key):
        if used.isdisjoint(e):
            used |= e
            count += 1
    return count


def _bnb(edges, bound, budget):
    """Smallest cover of ``edges`` with fewer than ``bound`` vertices, or None.

    Branches on the vertices of the smallest edge: branch i takes the i-th
    vertex and forbids the earlier ones, so branches never overlap.
    """
    budget.tick()
    if not edges:
        return frozenset()
    if _disjoint_lower_bound(edges) >= bound:
        return None
    edge = min(edges, key=_edge_key)
    best = None
    banned = set()
    for v in sorted(edge):
        rest = []
        feasible = True
        for f in edges:
            if v in f:
                continue
            f = f - banned if banned else f
            if not f:
                feasible = False
                break
            rest.append(f)
        if feasible:
            sub = _bnb(rest, bound - 1, budget)
            if sub is not None:
                best = sub | {v}
                bound = len(best)
        banned.add(v)
    return best


def _prepare(edges, forced, excluded):
    """Remove edges hit by ``forced`` and vertices in ``excluded``; None if infeasible."""
    out = []
    for e in edges:
        if not forced.isdisjoint(e):
            continue
        e = e - excluded
        if not e:
            return None
        out.append(frozenset(e))
    return list(minimal_sets(out))


def lexmin_cover(edges, forced=frozenset(), excluded=frozenset(), node_cap=HITTING_SET_NODES,
                 budget=None) -> Optional[frozenset]:
    """Minimum hitting set containing ``forced`` and avoiding ``excluded``.

    Among all minimum solutions the lexicographically smallest (by sorted
    tuple id) is returned.  None when the exclusions make covering impossible.
    """
    budget = budget or _Budget(node_cap)
    forced, excluded = frozenset(forced), set(excluded)
    work = _prepare(edges, forced, frozenset(excluded))
    if work is None:
        return None
    optimum = _bnb(work, float("inf"), budget)
    need = len(optimum)
    chosen = set()
    for v in sorted(set().union(*work) if work else ()):
        if not work:
            break
        if need == 0:
            break
        trial = _prepare(work, frozenset({v}), frozenset(excluded))
        if trial is not None:
            sub = _bnb(trial, need, budget)
            if sub is not None and len(sub) == need - 1:
                chosen.add(v)
                need -= 1
                work = trial
                continue
        excluded.add(v)
        work = _prepare(work, frozenset(), frozenset({v}))
    return frozenset(forced | chosen)


def min_hitting_set(h: ConflictHypergraph, forced=None, node_cap=HITTING_SET_NODES):
    """Exact ``(size, witness)`` for a minimum vertex set meeting every hyperedge.

    With ``forced`` the witness must contain that vertex.  Ties go to the
    lexicographically smallest witness.  Raises HittingSetAborted rather than
    returning an approximation when the node budget runs out.
    """
    forced_set = frozenset() if forced is None else frozenset({forced})
    cover = lexmin_cover(h.edges, forced=forced_set, node_cap=node_cap)
    return len(cover), cover


# ---------------------------------------------------------------------------
# repairs


def minimal_transversals(edges, cap=REPAIR_CAP, node_cap=HITTING_SET_NODES):
    """Enumerate every subset-minimal hitting set of ``edges``."""
    edges = list(minimal_sets(frozenset(e) for e in edges))
    if any(not e for e in edges):
        raise MalformedHypergraph("empty hyperedge")
    budget = _Budget(node_cap)
    found = []

    def is_minimal(chosen):
        for v in chosen:
            others = chosen - {v}
            if all(not others.isdisjoint(e) for e in edges):
                return False
        return True

    def walk(open_edges, chosen):
        budget.tick()
        if not open_edges:
            if is_minimal(chosen):
                found.append(frozenset(chosen))
                if len(found) > cap:
                    raise RepairCapExceeded(f"more than {cap} repairs", cap=cap)
            return
        edge = min(open_edges, key=_edge_key)
        banned = set()
        for v in sorted(edge):
            rest, feasible = [], True
            for f in open_edges:
                if v in f:
                    continue
                f = f - banned
                if not f:
                    feasible = False
                    break
                rest.append(f)
            if feasible:
                walk(rest, chosen | {v})
            banned.add(v)

    walk(edges, frozenset())
    return frozenset(found)


def s_repairs(instance, constraints, cap=REPAIR_CAP, witness_cap=WITNESS_CAP,
              node_cap=HITTING_SET_NODES) -> RepairSet:
    h = build_conflict_hypergraph(instance, constraints, witness_cap)
    return s_repairs_of(h, cap, node_cap)


def s_repairs_of(h: ConflictHypergraph, cap=REPAIR_CAP, node_cap=HITTING_SET_NODES) -> RepairSet:
    if not h.edges:
        return RepairSet("S", frozenset({h.vertices}))
    repairs = frozenset(h.vertices - t for t in minimal_transversals(h.edges, cap, node_cap))
    return RepairSet("S", repairs)


def c_repairs(instance, constraints, cap=REPAIR_CAP, witness_cap=WITNESS_CAP,
              node_cap=HITTING_SET_NODES) -> RepairSet:
    return c_repairs_of(s_repairs(instance, constraints, cap, witness_cap, node_cap))


def c_repairs_of(srep: RepairSet) -> RepairSet:
    top = max(len(r) for r in srep.repairs)
    return RepairSet("C", frozenset(r for r in srep.repairs if len(r) == top))


# ---------------------------------------------------------------------------
# inconsistency degree


def inc_degree(instance, constraints, witness_cap=WITNESS_CAP, node_cap=HITTING_SET_NODES) -> Fraction:
    """Fraction of tuples a closest C-repair has to delete."""
    if len(instance) == 0:
        raise EmptyInstance("the inconsistency degree is undefined for an empty instance")
    h = build_conflict_hypergraph(instance, constraints, witness_cap)
    size, _ = min_hitting_set(h, node_cap=node_cap)
    return Fraction(size, len(instance))


def greedy_hitting_set(edges):
    """Repeatedly take the vertex meeting most open edges (smallest id on ties)."""
    open_edges = [frozenset(e) for e in edges]
    chosen = set()
    while open_edges:
        counts = {}
        for e in open_edges:
            for v in e:
                counts[v] = counts.get(v, 0) + 1
        v = min(counts, key=lambda u: (-counts[u], u))
        chosen.add(v)
        open_edges = [e for e in open_edges if v not in e]
    return frozenset(chosen)


def greedy_inc_degree(instance, constraints, witness_cap=WITNESS_CAP) -> Fraction:
    """Upper bound on ``inc_degree`` from a greedy hitting set; approximate by design."""
    if len(instance) == 0:
        raise EmptyInstance("the inconsistency degree is undefined for an empty instance")
    h = build_conflict_hypergraph(instance, constraints, witness_cap)
    return Fraction(len(greedy_hitting_set(h.edges)), len(instance))

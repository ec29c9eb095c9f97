"""Actual causes and responsibility for Boolean conjunctive query answers.

Tuple level: a tuple is an actual cause when some contingency set of other
tuples can be deleted so that the tuple becomes counterfactual.  Attribute
level: the interventions replace individual values with NULL.
"""

from dataclasses import dataclass
from fractions import Fraction

from .config import HITTING_SET_NODES, WITNESS_CAP
from .errors import CapExceeded, NothingToExplain
from .relcore import NULL, Var, _matches, as_query, eval_bcq, minimal_witnesses
from .repair import _Budget, lexmin_cover, minimal_transversals


@dataclass(frozen=True)
class CauseReport:
    tuple_id: str
    is_actual: bool
    is_counterfactual: bool
    responsibility: Fraction
    contingency: frozenset

    def to_dict(self):
        return {
            "tuple_id": self.tuple_id,
            "is_actual": self.is_actual,
            "is_counterfactual": self.is_counterfactual,
            "responsibility": self.responsibility,
            "contingency": sorted(self.contingency),
        }


@dataclass(frozen=True)
class AttrCauseReport:
    position: tuple  # (tuple_id, 1-based attribute index)
    responsibility: Fraction
    change_set: frozenset

    @property
    def label(self):
        return position_label(self.position)

    def to_dict(self):
        return {
            "position": self.label,
            "tuple_id": self.position[0],
            "attribute": self.position[1],
            "responsibility": self.responsibility,
            "change_set": sorted(position_label(p) for p in sorted(self.change_set)),
        }


def position_label(position):
    tid, j = position
    return f"{tid}[{j}]"


def _witnesses_or_raise(instance, query, witness_cap):
    witnesses = minimal_witnesses(instance, query, cap=witness_cap)
    if not witnesses:
        raise NothingToExplain(f"{as_query(query)} is false in the instance; nothing to explain")
    return witnesses


def minimum_contingency(witnesses, tid, node_cap=HITTING_SET_NODES):
    """Smallest Γ with ``D∖Γ ⊨ Q`` and ``D∖(Γ ∪ {tid}) ⊭ Q``; None if ``tid`` is no cause.

    Stated on the minimal-witness hypergraph: Γ ∪ {tid} must hit every
    witness while some witness containing ``tid`` stays untouched by Γ.
    The forced-vertex minimum hitting set is tried first; when the witness
    it leaves intact does not exist, each witness through ``tid`` is pinned
    in turn and the witnesses avoiding ``tid`` are covered outside it.
    """
    through = [w for w in witnesses if tid in w]
    if not through:
        return None
    budget = _Budget(node_cap)
    cover = lexmin_cover(witnesses, forced={tid}, budget=budget)
    gamma = cover - {tid}
    if any(gamma.isdisjoint(w) for w in through):
        return gamma
    # the forced cover is only a lower bound here
    others = [w for w in witnesses if tid not in w]
    best = None
    for w in sorted(through, key=lambda s: (len(s), sorted(s))):
        cand = lexmin_cover(others, excluded=w, budget=budget)
        if cand is None:
            continue
        if best is None or (len(cand), sorted(cand)) < (len(best), sorted(best)):
            best = cand
    return best


def _report(witnesses, tid, node_cap):
    gamma = minimum_contingency(witnesses, tid, node_cap)
    if gamma is None:
        return CauseReport(tid, False, False, Fraction(0), frozenset())
    return CauseReport(tid, True, not gamma, Fraction(1, 1 + len(gamma)), gamma)


def actual_causes(instance, query, witness_cap=WITNESS_CAP, node_cap=HITTING_SET_NODES):
    """Reports for every actual cause, ordered by tuple id."""
    witnesses = _witnesses_or_raise(instance, query, witness_cap)
    causes = sorted(set().union(*witnesses))
    return [_report(witnesses, tid, node_cap) for tid in causes]


def cause_report(instance, query, tid, witness_cap=WITNESS_CAP, node_cap=HITTING_SET_NODES):
    if tid not in instance:
        raise KeyError(f"no tuple with id {tid!r}")
    witnesses = _witnesses_or_raise(instance, query, witness_cap)
    return _report(witnesses, tid, node_cap)


def responsibility(instance, query, tid, witness_cap=WITNESS_CAP, node_cap=HITTING_SET_NODES) -> Fraction:
    return cause_report(instance, query, tid, witness_cap, node_cap).responsibility


def most_responsible_causes(instance, query, witness_cap=WITNESS_CAP, node_cap=HITTING_SET_NODES):
    reports = actual_causes(instance, query, witness_cap, node_cap)
    top = max(r.responsibility for r in reports)
    return frozenset(r.tuple_id for r in reports if r.responsibility == top)


# ---------------------------------------------------------------------------
# attribute level


def _position_edges(instance, query, witness_cap):
    """Per satisfying match, the positions where it joins or selects.

    A position qualifies when the query term there is a constant or a
    variable occurring more than once in the query.
    """
    occurrences = {}
    for atom in query.atoms:
        for t in atom.terms:
            if isinstance(t, Var):
                occurrences[t] = occurrences.get(t, 0) + 1
    edges = set()
    for n, match in enumerate(_matches(instance, query.atoms), start=1):
        if n > witness_cap:
            raise CapExceeded(f"more than {witness_cap} satisfying assignments", cap=witness_cap)
        edge = set()
        for atom, tid in zip(query.atoms, match):
            for j, t in enumerate(atom.terms, start=1):
                if not isinstance(t, Var) or occurrences[t] > 1:
                    edge.add((tid, j))
        edges.add(frozenset(edge))
    return edges


def candidate_positions(instance, query, witness_cap=WITNESS_CAP):
    """Positions taking part in a join or selection of some satisfying match."""
    return sorted(set().union(*_position_edges(instance, as_query(query), witness_cap)))


def minimal_null_change_sets(instance, query, witness_cap=WITNESS_CAP, node_cap=HITTING_SET_NODES):
    """Subset-minimal sets of positions whose nulling makes ``query`` false.

    Nulls never create matches, so a set falsifies the query exactly when it
    meets the join/selection positions of every match.  The minimal sets are
    therefore the minimal transversals of those position sets; each one is
    re-checked against the nulled instance.
    """
    query = as_query(query)
    edges = _position_edges(instance, query, witness_cap)
    if not edges:
        raise NothingToExplain(f"{query} is false in the instance; nothing to explain")
    if frozenset() in edges:
        # a match with no join or selection cannot be broken by the candidates
        return frozenset()
    sets = minimal_transversals(edges, node_cap=node_cap)
    for s in sets:
        nulled = instance.with_values({p: NULL for p in s})
        assert not eval_bcq(nulled, query), "nulling a transversal must falsify the query"
    return sets


def attr_level_causes(instance, query, witness_cap=WITNESS_CAP):
    """Responsibility of each position: 1 / (size of smallest change-set containing it)."""
    sets = minimal_null_change_sets(instance, query, witness_cap)
    best = {}
    for s in sorted(sets, key=lambda s: (len(s), sorted(s))):
        for p in s:
            if p not in best or len(s) < len(best[p]):
                best[p] = s
    return [AttrCauseReport(p, Fraction(1, len(best[p])), best[p]) for p in sorted(best)]

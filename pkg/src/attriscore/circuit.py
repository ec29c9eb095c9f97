"""Boolean circuits, decision trees and their compilation into dDBCs.

A dDBC is a circuit whose AND gates have variable-disjoint children
(decomposable) and whose OR gates have pairwise contradictory children
(deterministic).  Both properties make model counting a single bottom-up
pass.
"""

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Optional

from .config import DETERMINISM_BUDGET
from .errors import (CircuitError, DecomposabilityViolation, DeterminismCheckTooLarge,
                     DeterminismViolation, MissingFeatureValue, TreeError, UnvalidatedCircuit)

KINDS = ("var", "const", "not", "and", "or")


def as_bit(value, feature=None):
    if value in (0, 1):  # also matches False/True
        return int(value)
    if value in ("0", "1"):
        return int(value)
    raise CircuitError(f"feature {feature!r}: {value!r} is not a Boolean value", feature=feature)


@dataclass(frozen=True)
class Gate:
    id: object
    kind: str
    children: tuple = ()
    feature: Optional[str] = None
    value: Optional[int] = None

    def to_dict(self):
        out = {"id": self.id, "kind": self.kind}
        if self.children:
            out["children"] = list(self.children)
        if self.kind == "var":
            out["feature"] = self.feature
        if self.kind == "const":
            out["value"] = self.value
        return out


class Circuit:
    """A DAG of gates listed children-first, with one output gate."""

    def __init__(self, features, gates, output):
        self.features = tuple(features)
        if len(set(self.features)) != len(self.features):
            raise CircuitError("duplicate feature names")
        self.gates = tuple(gates)
        self.output = output
        self._index = {}
        self._varsets = {}
        declared = set(self.features)
        for g in self.gates:
            if g.id in self._index:
                raise CircuitError(f"duplicate gate id {g.id!r}", gate=g.id)
            if g.kind not in KINDS:
                raise CircuitError(f"gate {g.id!r}: unknown kind {g.kind!r}", gate=g.id)
            for c in g.children:
                if c not in self._index:
                    raise CircuitError(f"gate {g.id!r}: child {c!r} is not defined before it", gate=g.id)
            if g.kind == "var":
                if g.feature not in declared:
                    raise CircuitError(f"gate {g.id!r}: undeclared feature {g.feature!r}", gate=g.id)
                if g.children:
                    raise CircuitError(f"gate {g.id!r}: input gates take no children", gate=g.id)
                vs = frozenset({g.feature})
            elif g.kind == "const":
                if g.value not in (0, 1) or g.children:
                    raise CircuitError(f"gate {g.id!r}: constants are 0 or 1 with no children", gate=g.id)
                vs = frozenset()
            elif g.kind == "not":
                if len(g.children) != 1:
                    raise CircuitError(f"gate {g.id!r}: NOT takes exactly one child", gate=g.id)
                vs = self._varsets[g.children[0]]
            else:
                vs = frozenset().union(*(self._varsets[c] for c in g.children))
            self._index[g.id] = g
            self._varsets[g.id] = vs
        if output not in self._index:
            raise CircuitError(f"output gate {output!r} is not defined")

    def __repr__(self):
        return f"Circuit({len(self.features)} features, {len(self.gates)} gates)"

    def __len__(self):
        return len(self.gates)

    def gate(self, gid) -> Gate:
        return self._index[gid]

    def varset(self, gid=None) -> frozenset:
        return self._varsets[self.output if gid is None else gid]

    def evaluate(self, entity: Mapping) -> int:
        needed = self.varset()
        missing = sorted(f for f in needed if f not in entity)
        if missing:
            raise MissingFeatureValue(f"no value for feature(s) {', '.join(missing)}", features=missing)
        vals = {}
        for g in self.gates:
            k = g.kind
            if k == "var":
                if g.feature in entity:
                    vals[g.id] = as_bit(entity[g.feature], g.feature)
            elif k == "const":
                vals[g.id] = g.value
            elif k == "not":
                if g.children[0] in vals:
                    vals[g.id] = 1 - vals[g.children[0]]
            elif k == "and":
                cs = [vals.get(c) for c in g.children]
                if None not in cs:
                    vals[g.id] = int(all(cs))
            else:
                cs = [vals.get(c) for c in g.children]
                if None not in cs:
                    vals[g.id] = int(any(cs))
        return vals[self.output]

    __call__ = evaluate

    def to_dict(self):
        return {"features": list(self.features), "gates": [g.to_dict() for g in self.gates],
                "output": self.output}

    @classmethod
    def from_dict(cls, data):
        try:
            gates = [Gate(g["id"], g["kind"], tuple(g.get("children", ())), g.get("feature"), g.get("value"))
                     for g in data["gates"]]
            return cls(data["features"], gates, data["output"])
        except (KeyError, TypeError) as exc:
            raise CircuitError(f"malformed circuit JSON: {exc}") from None


class CircuitBuilder:
    """Small helper for building circuits by hand.

    >>> b = CircuitBuilder(["x1", "x2"])
    >>> out = b.conj(b.var("x1"), b.neg(b.var("x2")))
    >>> b.build(out).evaluate({"x1": 1, "x2": 0})
    1
    """

    def __init__(self, features):
        self.features = list(features)
        self.gates = []
        self._memo = {}

    def _add(self, kind, children=(), feature=None, value=None):
        key = (kind, tuple(children), feature, value)
        if key in self._memo:
            return self._memo[key]
        gid = len(self.gates)
        self.gates.append(Gate(gid, kind, tuple(children), feature, value))
        self._memo[key] = gid
        return gid

    def var(self, feature):
        return self._add("var", feature=feature)

    def const(self, value):
        return self._add("const", value=int(value))

    def neg(self, child):
        return self._add("not", (child,))

    def conj(self, *children):
        return self._add("and", children)

    def disj(self, *children):
        return self._add("or", children)

    def build(self, output) -> Circuit:
        return Circuit(self.features, self.gates, output)


def load_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return Circuit.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class DDBC:
    """A circuit certified deterministic and decomposable.

    ``certificate`` maps each OR gate to its mutual-exclusion evidence:
    ``("literal", pairs)`` when every child pair disagrees on a literal,
    ``("exhaustive", assignments)`` when truth tables were compared, or
    ``("trusted", None)`` when the caller vouched for it.
    """

    circuit: Circuit
    certificate: Mapping = field(default_factory=dict)

    @property
    def features(self):
        return self.circuit.features

    def varset(self, gid=None):
        return self.circuit.varset(gid)

    def evaluate(self, entity):
        return self.circuit.evaluate(entity)

    __call__ = evaluate

    def to_dict(self):
        return self.circuit.to_dict()


_UNSAT = "unsat"


def _implied_literals(c: Circuit):
    """Literals (feature, bit) every satisfying input of each gate must set."""
    out = {}
    for g in c.gates:
        if g.kind == "var":
            out[g.id] = frozenset({(g.feature, 1)})
        elif g.kind == "const":
            out[g.id] = _UNSAT if g.value == 0 else frozenset()
        elif g.kind == "not":
            child = c.gate(g.children[0])
            if child.kind == "var":
                out[g.id] = frozenset({(child.feature, 0)})
            elif child.kind == "const":
                out[g.id] = _UNSAT if child.value == 1 else frozenset()
            else:
                out[g.id] = frozenset()
        elif g.kind == "and":
            lits, unsat = set(), False
            for ch in g.children:
                if out[ch] is _UNSAT:
                    unsat = True
                    break
                lits |= out[ch]
            if unsat or any((f, 1 - b) in lits for f, b in lits):
                out[g.id] = _UNSAT
            else:
                out[g.id] = frozenset(lits)
        else:
            live = [out[ch] for ch in g.children if out[ch] is not _UNSAT]
            if not live:
                out[g.id] = _UNSAT
            else:
                out[g.id] = frozenset.intersection(*live)
    return out


def _contradictory(a, b):
    if a is _UNSAT or b is _UNSAT:
        return True
    return any((f, 1 - v) in b for f, v in a)


def _var_pattern(k, m):
    """Truth-table column of the k-th of m variables, as an integer bitmask."""
    block = 1 << k
    unit = ((1 << block) - 1) << block
    period = 2 * block
    total = 1 << m
    return unit * (((1 << total) - 1) // ((1 << period) - 1))


def truth_table(c: Circuit, gid, variables):
    """Bitmask of the assignments to ``variables`` (bit i <-> assignment i) making gate ``gid`` true."""
    m = len(variables)
    full = (1 << (1 << m)) - 1
    pos = {f: i for i, f in enumerate(variables)}
    memo = {}

    def go(x):
        if x in memo:
            return memo[x]
        g = c.gate(x)
        if g.kind == "var":
            r = _var_pattern(pos[g.feature], m)
        elif g.kind == "const":
            r = full if g.value else 0
        elif g.kind == "not":
            r = full & ~go(g.children[0])
        elif g.kind == "and":
            r = full
            for ch in g.children:
                r &= go(ch)
        else:
            r = 0
            for ch in g.children:
                r |= go(ch)
        memo[x] = r
        return r

    return go(gid)


def _assignment(index, variables):
    return {f: (index >> i) & 1 for i, f in enumerate(variables)}


def validate_ddbc(c: Circuit, budget=DETERMINISM_BUDGET, trust_determinism=False) -> DDBC:
    if isinstance(c, DDBC):
        return c
    implied = _implied_literals(c)
    certificate = {}
    for g in c.gates:
        if g.kind == "and":
            for a, b in combinations(g.children, 2):
                shared = c.varset(a) & c.varset(b)
                if shared:
                    f = sorted(shared)[0]
                    raise DecomposabilityViolation(f"AND gate {g.id!r}: children share feature {f!r}",
                                                   gate=g.id, feature=f)
        elif g.kind == "or":
            literal_pairs, exhaustive, skipped = 0, 0, 0
            for a, b in combinations(g.children, 2):
                if _contradictory(implied[a], implied[b]):
                    literal_pairs += 1
                    continue
                variables = sorted(c.varset(a) | c.varset(b))
                if (1 << len(variables)) > budget:
                    if trust_determinism:
                        skipped += 1
                        continue
                    raise DeterminismCheckTooLarge(
                        f"OR gate {g.id!r}: determinism check needs 2^{len(variables)} assignments",
                        gate=g.id, variables=len(variables))
                both = truth_table(c, a, variables) & truth_table(c, b, variables)
                exhaustive += 1 << len(variables)
                if both:
                    low = (both & -both).bit_length() - 1
                    witness = _assignment(low, variables)
                    raise DeterminismViolation(f"OR gate {g.id!r}: children {a!r} and {b!r} are both true "
                                               f"under {witness}", gate=g.id, witness=witness)
            if skipped:
                certificate[g.id] = ("trusted", None)
            elif exhaustive:
                certificate[g.id] = ("exhaustive", exhaustive)
            else:
                certificate[g.id] = ("literal", literal_pairs)
    return DDBC(c, certificate)


# ---------------------------------------------------------------------------
# counting


def model_count(c: DDBC, n=None) -> int:
    """Number of assignments to all ``n`` declared features that output 1.

    OR children are smoothed arithmetically: each child's count is scaled by
    2 to the number of gate variables it does not mention.
    """
    if not isinstance(c, DDBC):
        raise UnvalidatedCircuit("model counting needs a validated dDBC; call validate_ddbc first")
    circ = c.circuit
    n = len(circ.features) if n is None else n
    count = {}
    for g in circ.gates:
        width = len(circ.varset(g.id))
        if g.kind == "var":
            count[g.id] = 1
        elif g.kind == "const":
            count[g.id] = g.value
        elif g.kind == "not":
            count[g.id] = (1 << width) - count[g.children[0]]
        elif g.kind == "and":
            r = 1
            for ch in g.children:
                r *= count[ch]
            count[g.id] = r
        else:
            count[g.id] = sum(count[ch] << (width - len(circ.varset(ch))) for ch in g.children)
    return count[circ.output] << (n - len(circ.varset()))


def truth_table_count(c, features=None) -> int:
    """Model count by explicit enumeration; the oracle for ``model_count``."""
    circ = c.circuit if isinstance(c, DDBC) else c
    features = list(circ.features if features is None else features)
    inner = sorted(circ.varset())
    mask = truth_table(circ, circ.output, inner)
    return bin(mask).count("1") << (len(features) - len(inner))


# ---------------------------------------------------------------------------
# decision trees


@dataclass(frozen=True)
class TreeNode:
    id: object
    feature: Optional[str] = None
    children: Mapping = field(default_factory=dict)
    leaf: Optional[int] = None

    @property
    def is_leaf(self):
        return self.leaf is not None


class DecisionTree:
    """A decision tree over finite feature domains.

    ``exactly_one`` is filled in by :func:`binarize_dt`: it maps each original
    multi-valued feature to its indicator features, of which exactly one is 1.
    """

    def __init__(self, features: Mapping, nodes, root, exactly_one: Optional[Mapping] = None,
                 indicators: Optional[Mapping] = None):
        self.features = {f: tuple(dom) for f, dom in features.items()}
        self.nodes = {n.id: n for n in nodes}
        self.root = root
        self.exactly_one = {f: tuple(inds) for f, inds in (exactly_one or {}).items()}
        self.indicator = {ind: tuple(src) for ind, src in (indicators or {}).items()}
        missing = [i for inds in self.exactly_one.values() for i in inds if i not in self.indicator]
        if missing:
            raise TreeError(f"indicator features without a source value: {', '.join(missing)}")
        self._check()

    def _check(self):
        if self.root not in self.nodes:
            raise TreeError(f"root {self.root!r} is not a node")
        for n in self.nodes.values():
            if n.is_leaf:
                if n.leaf not in (0, 1):
                    raise TreeError(f"leaf {n.id!r}: labels are 0 or 1", node=n.id)
                continue
            if n.feature not in self.features:
                raise TreeError(f"node {n.id!r}: feature {n.feature!r} has no declared domain", node=n.id)
            dom = self.features[n.feature]
            if not dom:
                raise TreeError(f"feature {n.feature!r} has an empty domain", feature=n.feature)
            if set(n.children) != set(dom):
                raise TreeError(f"node {n.id!r}: children must cover the domain of {n.feature!r} exactly",
                                node=n.id)
            for child in n.children.values():
                if child not in self.nodes:
                    raise TreeError(f"node {n.id!r}: unknown child {child!r}", node=n.id)

        def walk(nid, path):
            node = self.nodes[nid]
            if node.is_leaf:
                return
            if node.feature in path:
                raise TreeError(f"feature {node.feature!r} repeats on a root-to-leaf path", node=nid,
                                feature=node.feature)
            for child in set(node.children.values()):
                walk(child, path | {node.feature})

        walk(self.root, frozenset())

    def __repr__(self):
        return f"DecisionTree({len(self.features)} features, {len(self.nodes)} nodes)"

    def __len__(self):
        return len(self.nodes)

    def evaluate(self, entity: Mapping) -> int:
        node = self.nodes[self.root]
        while not node.is_leaf:
            if node.feature not in entity:
                raise MissingFeatureValue(f"no value for feature {node.feature!r}", features=[node.feature])
            value = entity[node.feature]
            if value not in node.children:
                value = _lookup_value(self.features[node.feature], value, node.feature)
            node = self.nodes[node.children[value]]
        return node.leaf

    __call__ = evaluate

    def encode(self, entity: Mapping) -> dict:
        """Translate an entity over the original features into indicator form."""
        out = {f: v for f, v in entity.items() if f not in self.exactly_one}
        for orig, inds in self.exactly_one.items():
            if orig not in entity:
                raise MissingFeatureValue(f"no value for feature {orig!r}", features=[orig])
            for ind in inds:
                out[ind] = int(self.indicator[ind][1] == entity[orig])
        return out

    def is_binary(self):
        return all(set(dom) == {0, 1} for dom in self.features.values())

    def to_dict(self):
        nodes = []
        for n in self.nodes.values():
            if n.is_leaf:
                nodes.append({"id": n.id, "leaf": n.leaf})
            else:
                nodes.append({"id": n.id, "feature": n.feature,
                              "children": {_json_key(v): c for v, c in n.children.items()}})
        out = {"features": {f: list(d) for f, d in self.features.items()}, "nodes": nodes, "root": self.root}
        if self.exactly_one:
            out["exactly_one"] = {f: list(inds) for f, inds in self.exactly_one.items()}
            out["indicators"] = {ind: [orig, v] for ind, (orig, v) in self.indicator.items()}
        return out

    @classmethod
    def from_dict(cls, data):
        try:
            features = {f: tuple(dom) for f, dom in data["features"].items()}
            nodes = []
            for nd in data["nodes"]:
                if "leaf" in nd:
                    nodes.append(TreeNode(nd["id"], leaf=nd["leaf"]))
                else:
                    f = nd["feature"]
                    if f not in features:
                        raise TreeError(f"node {nd['id']!r}: feature {f!r} has no declared domain", node=nd["id"])
                    children = {_lookup_value(features[f], k, f): c for k, c in nd["children"].items()}
                    nodes.append(TreeNode(nd["id"], f, children))
            return cls(features, nodes, data["root"], data.get("exactly_one"), data.get("indicators"))
        except (KeyError, TypeError, AttributeError) as exc:
            raise TreeError(f"malformed decision-tree JSON: {exc}") from None


def _json_key(value):
    return str(value)


def _lookup_value(domain, key, feature):
    for v in domain:
        if v == key or str(v) == str(key):
            return v
    raise TreeError(f"value {key!r} is not in the domain of {feature!r}", feature=feature)


def load_tree(path) -> DecisionTree:
    with open(path, encoding="utf-8") as fh:
        return DecisionTree.from_dict(json.load(fh))


def binarize_dt(tree: DecisionTree) -> DecisionTree:
    """Replace each non-Boolean feature F by indicators ``F=v``, one per value.

    A test on F becomes a chain of indicator tests in domain order; the last
    value needs no test of its own.  Already-Boolean trees come back as is.
    """
    if tree.is_binary():
        return tree
    features, exactly_one, indicator = {}, {}, {}
    for f, dom in tree.features.items():
        if set(dom) == {0, 1}:
            features[f] = (0, 1)
            continue
        inds = []
        for v in dom:
            name = f"{f}={v}"
            if name in tree.features or name in features:
                raise TreeError(f"indicator name {name!r} clashes with an existing feature", feature=f)
            features[name] = (0, 1)
            indicator[name] = (f, v)
            inds.append(name)
        exactly_one[f] = tuple(inds)
    nodes = []
    for n in tree.nodes.values():
        if n.is_leaf or n.feature not in exactly_one:
            nodes.append(n)
            continue
        dom = tree.features[n.feature]
        inds = exactly_one[n.feature]
        if len(dom) == 1:
            # a single-valued test always takes its only branch
            nodes.append(TreeNode(n.id, inds[0], {0: n.children[dom[0]], 1: n.children[dom[0]]}))
            continue
        chain = [n.id] + [f"{n.id}#{i}" for i in range(1, len(dom) - 1)]
        for i, nid in enumerate(chain):
            nxt = chain[i + 1] if i + 1 < len(chain) else n.children[dom[-1]]
            nodes.append(TreeNode(nid, inds[i], {1: n.children[dom[i]], 0: nxt}))
    return DecisionTree(features, nodes, tree.root, exactly_one, indicator)


def compile_dt(tree: DecisionTree) -> DDBC:
    """Compile a Boolean decision tree node by node.

    Leaves become constants; a node testing F with subtrees c0, c1 becomes
    ``OR(AND(NOT F, c0), AND(F, c1))``.  The two OR branches disagree on F
    and F does not occur below the node, so the result is a dDBC.
    """
    for f, dom in tree.features.items():
        if set(dom) != {0, 1}:
            raise TreeError(f"feature {f!r} is not Boolean; binarize the tree first", feature=f)
    gates, made = [], {}

    def add(gid, kind, children=(), feature=None, value=None):
        if gid not in made:
            gates.append(Gate(gid, kind, tuple(children), feature, value))
            made[gid] = True
        return gid

    def build(nid):
        node = tree.nodes[nid]
        if node.is_leaf:
            return add(f"const{node.leaf}", "const", value=node.leaf)
        out = f"n{nid}"
        if out in made:
            return out
        low, high = build(node.children[0]), build(node.children[1])
        if low == high:
            return low
        x = add(f"x:{node.feature}", "var", feature=node.feature)
        nx = add(f"~x:{node.feature}", "not", (x,))
        a0 = add(f"n{nid}.0", "and", (nx, low))
        a1 = add(f"n{nid}.1", "and", (x, high))
        return add(out, "or", (a0, a1))

    output = build(tree.root)
    return validate_ddbc(Circuit(list(tree.features), gates, output))

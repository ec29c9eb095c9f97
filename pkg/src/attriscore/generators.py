"""Seeded random instances, constraints, circuits, trees and games for testing."""

import itertools
import random
from fractions import Fraction

from .circuit import CircuitBuilder, DecisionTree, TreeNode, validate_ddbc
from .relcore import Atom, BooleanQuery, DenialConstraint, RelationalInstance, Var


def random_instance(rng: random.Random, max_tuples=10, predicates=(("R", 2), ("S", 1)), constants="abc"):
    """A small instance whose ids are ``pred:k``; duplicates are dropped."""
    facts, seen = [], set()
    for _ in range(rng.randint(0, max_tuples)):
        pred, arity = rng.choice(predicates)
        values = tuple(rng.choice(constants) for _ in range(arity))
        if (pred, values) in seen:
            continue
        seen.add((pred, values))
        facts.append((f"{pred}:{len(facts) + 1}", pred, values))
    arities = dict(predicates)
    from .relcore import Schema

    schema = Schema(arities, {p: tuple(f"a{i + 1}" for i in range(a)) for p, a in arities.items()})
    return RelationalInstance.from_facts(facts, schema=schema)


def random_atoms(rng: random.Random, predicates=(("R", 2), ("S", 1)), constants="abc", max_atoms=3):
    names = [Var(n) for n in ("x", "y", "z", "w")]
    atoms = []
    for _ in range(rng.randint(1, max_atoms)):
        pred, arity = rng.choice(predicates)
        terms = tuple(rng.choice(names) if rng.random() < 0.8 else rng.choice(constants) for _ in range(arity))
        atoms.append(Atom(pred, terms))
    return tuple(atoms)


def random_query(rng, **kw):
    return BooleanQuery(random_atoms(rng, **kw))


def random_constraints(rng, count=2, **kw):
    return [DenialConstraint(random_atoms(rng, **kw)) for _ in range(rng.randint(1, count))]


def random_ddbc(rng: random.Random, n_features, depth=4, exhaustive_bias=0.15):
    """A random validated dDBC over ``x1..xn``.

    Built from decomposable ANDs over a partition of the variables and
    decision ORs (``F ∧ a ∨ ¬F ∧ b``); occasionally an OR of ``g`` and its
    negation is used so the exhaustive determinism check also gets exercised.
    """
    features = [f"x{i}" for i in range(1, n_features + 1)]
    b = CircuitBuilder(features)

    def grow(vars_, d):
        if not vars_ or d == 0:
            if vars_ and rng.random() < 0.8:
                v = b.var(rng.choice(vars_))
                return b.neg(v) if rng.random() < 0.5 else v
            return b.const(rng.random() < 0.5)
        roll = rng.random()
        if roll < 0.35 and len(vars_) > 1:
            pool = list(vars_)
            rng.shuffle(pool)
            k = rng.randint(2, min(3, len(pool)))
            parts = [pool[i::k] for i in range(k)]
            return b.conj(*(grow(p, d - 1) for p in parts))
        if roll < 0.35 + exhaustive_bias and len(vars_) > 1:
            # (g ∧ h1) ∨ (¬g ∧ h2): exclusive, but not provably so from literals
            pool = list(vars_)
            rng.shuffle(pool)
            cut = rng.randint(1, len(pool) - 1)
            g = grow(pool[:cut], d - 1)
            return b.disj(b.conj(g, grow(pool[cut:], d - 1)), b.conj(b.neg(g), grow(pool[cut:], d - 1)))
        if roll < 0.9:
            pivot = rng.choice(vars_)
            rest = [v for v in vars_ if v != pivot]
            x = b.var(pivot)
            return b.disj(b.conj(b.neg(x), grow(rest, d - 1)), b.conj(x, grow(rest, d - 1)))
        return b.neg(grow(vars_, d - 1))

    out = grow(features, depth)
    return validate_ddbc(b.build(out))


def random_tree(rng: random.Random, domains, depth=4, leaf_bias=0.25):
    """A random decision tree over ``domains`` (feature → values)."""
    nodes = []

    def grow(used, d):
        nid = f"n{len(nodes)}"
        free = [f for f in domains if f not in used]
        if d == 0 or not free or rng.random() < leaf_bias:
            nodes.append(TreeNode(nid, None, None, rng.randint(0, 1)))
            return nid
        feature = rng.choice(free)
        slot = len(nodes)
        nodes.append(None)
        children = {v: grow(used | {feature}, d - 1) for v in domains[feature]}
        nodes[slot] = TreeNode(nid, feature, children, None)
        return nid

    root = grow(frozenset(), depth)
    return DecisionTree({f: tuple(v) for f, v in domains.items()}, nodes, root)


def path_tree(n_features, label_every=1):
    """A deep tree testing ``x1..xn`` in order; every ``label_every``-th right branch exits early."""
    nodes = []
    features = {f"x{i}": (0, 1) for i in range(1, n_features + 1)}
    for i in range(1, n_features + 1):
        leaf = f"l{i}"
        nxt = f"t{i + 1}" if i < n_features else f"end"
        nodes.append(TreeNode(f"t{i}", f"x{i}", {0: leaf, 1: nxt} if i % 2 else {0: nxt, 1: leaf}, None))
        nodes.append(TreeNode(leaf, None, None, (i // max(label_every, 1)) % 2))
    nodes.append(TreeNode("end", None, None, 1))
    return DecisionTree(features, nodes, "t1")


def random_game(rng: random.Random, players, denominator=12):
    """A random game as a dict from frozenset to Fraction."""
    return {frozenset(s): Fraction(rng.randint(0, denominator), denominator)
            for r in range(len(players) + 1) for s in itertools.combinations(players, r)}

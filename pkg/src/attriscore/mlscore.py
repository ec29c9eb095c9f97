"""Attribution scores for binary classifiers: Shapley/Shap and generalized Resp.

All arithmetic is exact (``fractions.Fraction`` and Python integers).  A
classifier is any callable mapping an entity (``{feature: value}``) to 0 or
1; decision trees, circuits and :class:`TabulatedClassifier` all qualify.
"""

import csv
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, NamedTuple, Optional

import numpy as np

from .circuit import DDBC, Circuit, DecisionTree, as_bit, model_count, truth_table_count
from .config import MAX_CANDIDATES, MAX_GAMMA, SHAP_BRUTE_FEATURES
from .errors import (ContingencySearchCapExceeded, PreconditionViolation, ShapCapExceeded,
                     UnsupportedDistribution, UnvalidatedCircuit, ZeroProbabilityCondition)


# ---------------------------------------------------------------------------
# feature spaces, entities, distributions


def _coerce(domain, value, feature):
    for v in domain:
        if v == value or str(v) == str(value):
            return v
    raise PreconditionViolation(f"{value!r} is not in the domain of {feature!r}", feature=feature)


@dataclass(frozen=True)
class FeatureSpace:
    features: tuple
    domains: Mapping

    def __post_init__(self):
        if len(set(self.features)) != len(self.features):
            raise PreconditionViolation("feature names must be unique")
        for f in self.features:
            if not self.domains.get(f):
                raise PreconditionViolation(f"feature {f!r} needs a nonempty domain", feature=f)

    @classmethod
    def from_domains(cls, domains: Mapping):
        return cls(tuple(domains), {f: tuple(d) for f, d in domains.items()})

    @classmethod
    def boolean(cls, features):
        return cls(tuple(features), {f: (0, 1) for f in features})

    @classmethod
    def of(cls, classifier):
        """The natural space of a tree or circuit."""
        if isinstance(classifier, DecisionTree):
            return cls.from_domains(classifier.features)
        if isinstance(classifier, (Circuit, DDBC)):
            return cls.boolean(classifier.features)
        if isinstance(classifier, TabulatedClassifier):
            return classifier.space
        raise TypeError(f"cannot infer a feature space for {classifier!r}")

    @classmethod
    def from_dict(cls, data):
        return cls.from_domains(data.get("features", data))

    def to_dict(self):
        return {"features": {f: list(self.domains[f]) for f in self.features}}

    @property
    def size(self):
        return math.prod(len(self.domains[f]) for f in self.features)

    def entities(self):
        for values in itertools.product(*(self.domains[f] for f in self.features)):
            yield dict(zip(self.features, values))

    def entity(self, mapping: Mapping) -> dict:
        """Validate and normalise an entity; string values are matched to the domain."""
        missing = [f for f in self.features if f not in mapping]
        if missing:
            raise PreconditionViolation(f"entity lacks feature(s) {', '.join(missing)}", features=missing)
        return {f: _coerce(self.domains[f], mapping[f], f) for f in self.features}

    def is_boolean(self):
        return all(set(self.domains[f]) == {0, 1} for f in self.features)


class Uniform:
    kind = "uniform"

    def __init__(self, space: FeatureSpace):
        self.space = space

    def marginal(self, feature):
        dom = self.space.domains[feature]
        return {v: Fraction(1, len(dom)) for v in dom}

    def to_dict(self):
        return {"kind": "uniform"}


class Product:
    """Independent features with the given per-feature marginals."""

    kind = "product"

    def __init__(self, space: FeatureSpace, marginals: Mapping):
        self.space = space
        self.marginals = {}
        for f in space.features:
            given = marginals.get(f)
            if given is None:
                dom = space.domains[f]
                self.marginals[f] = {v: Fraction(1, len(dom)) for v in dom}
                continue
            m = {_coerce(space.domains[f], v, f): Fraction(p) for v, p in given.items()}
            for v in space.domains[f]:
                m.setdefault(v, Fraction(0))
            if any(p < 0 for p in m.values()) or sum(m.values()) != 1:
                raise PreconditionViolation(f"marginal of {f!r} must be nonnegative and sum to 1", feature=f)
            self.marginals[f] = m

    def marginal(self, feature):
        return dict(self.marginals[feature])

    def to_dict(self):
        return {"kind": "product",
                "marginals": {f: {str(v): {"num": p.numerator, "den": p.denominator} for v, p in m.items()}
                              for f, m in self.marginals.items()}}


class Empirical:
    """A weighted sample of entities; weights are normalised to sum to 1."""

    kind = "empirical"

    def __init__(self, space: FeatureSpace, sample, weights=None):
        self.space = space
        rows = [space.entity(e) for e in sample]
        if not rows:
            raise PreconditionViolation("an empirical distribution needs a nonempty sample")
        weights = [Fraction(1)] * len(rows) if weights is None else [Fraction(w) for w in weights]
        if len(weights) != len(rows) or any(w <= 0 for w in weights):
            raise PreconditionViolation("one positive weight per sample row is required")
        total = sum(weights)
        self.sample = [(r, w / total) for r, w in zip(rows, weights)]

    def marginal(self, feature):
        m = {v: Fraction(0) for v in self.space.domains[feature]}
        for row, w in self.sample:
            m[row[feature]] += w
        return m

    def to_dict(self):
        return {"kind": "empirical", "size": len(self.sample)}


def distribution_from_dict(space: FeatureSpace, data: Mapping, base_dir="."):
    kind = data.get("kind")
    if kind == "uniform":
        return Uniform(space)
    if kind == "product":
        marginals = {f: {v: parse_rational(p) for v, p in m.items()} for f, m in data.get("marginals", {}).items()}
        return Product(space, marginals)
    if kind == "empirical":
        import os

        path = os.path.join(base_dir, data["sample"])
        sample = read_entities(path)
        weights = data.get("weights")
        if isinstance(weights, str):
            weights = [parse_rational(row.pop(weights)) for row in sample]
        elif weights is not None:
            weights = [parse_rational(w) for w in weights]
        return Empirical(space, sample, weights)
    raise PreconditionViolation(f"unknown distribution kind {kind!r}")


def load_distribution(space, path):
    import os

    with open(path, encoding="utf-8") as fh:
        return distribution_from_dict(space, json.load(fh), os.path.dirname(os.path.abspath(path)))


def parse_rational(value) -> Fraction:
    if isinstance(value, Mapping):
        return Fraction(int(value["num"]), int(value["den"]))
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def read_entities(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k.strip(): v.strip() for k, v in row.items()} for row in csv.DictReader(fh)]


class TabulatedClassifier:
    """A classifier given as an explicit table over the whole (small) space."""

    def __init__(self, space: FeatureSpace, table: Mapping):
        self.space = space
        self.table = {tuple(k): as_bit(v) for k, v in table.items()}
        if len(self.table) != space.size:
            raise PreconditionViolation("the table must label every entity of the space")

    @classmethod
    def from_function(cls, space: FeatureSpace, fn: Callable):
        return cls(space, {tuple(e[f] for f in space.features): fn(e) for e in space.entities()})

    def __call__(self, entity):
        return self.table[tuple(entity[f] for f in self.space.features)]


# ---------------------------------------------------------------------------
# the game function


def _label(classifier, entity):
    return as_bit(classifier(entity))


def game_value(classifier, dist, e, subset) -> Fraction:
    """Expected label over entities agreeing with ``e`` on ``subset``."""
    space = dist.space
    e = space.entity(e)
    subset = frozenset(subset)
    if isinstance(dist, Empirical):
        num = den = Fraction(0)
        for row, w in dist.sample:
            if all(row[f] == e[f] for f in subset):
                den += w
                num += w * _label(classifier, row)
        if den == 0:
            raise ZeroProbabilityCondition(f"no probability mass agrees with the entity on {sorted(subset)}",
                                           subset=sorted(subset))
        return num / den
    for f in subset:
        if dist.marginal(f)[e[f]] == 0:
            raise ZeroProbabilityCondition(f"conditioning on {sorted(subset)} has probability zero",
                                           subset=sorted(subset))
    free = [f for f in space.features if f not in subset]
    margs = [dist.marginal(f) for f in free]
    total = Fraction(0)
    entity = dict(e)
    for values in itertools.product(*(space.domains[f] for f in free)):
        p = Fraction(1)
        for m, v in zip(margs, values):
            p *= m[v]
        if p == 0:
            continue
        entity.update(zip(free, values))
        total += p * _label(classifier, entity)
    return total


class GameFunction:
    """``S ↦ E[L(e') | e'_S = e_S]`` for a fixed entity, memoised."""

    def __init__(self, classifier, dist, e):
        self.classifier = classifier
        self.dist = dist
        self.e = dist.space.entity(e)
        self.players = dist.space.features
        self._cache = {}

    def __call__(self, subset):
        subset = frozenset(subset)
        if subset not in self._cache:
            self._cache[subset] = game_value(self.classifier, self.dist, self.e, subset)
        return self._cache[subset]

    def all_values(self):
        """Every subset's value at once.

        For independent features the label table over the space is reduced
        one feature at a time to a (fixed to e, averaged) pair, which yields
        the whole power set in O(n · |space|) operations.
        """
        if isinstance(self.dist, Empirical):
            return {frozenset(s): self(s) for s in _powerset(self.players)}
        space, e = self.dist.space, self.e
        n = len(self.players)
        for f in self.players:
            if self.dist.marginal(f)[e[f]] == 0:
                raise ZeroProbabilityCondition(f"the value of {f!r} has probability zero", subset=[f])
        shape = [len(space.domains[f]) for f in self.players]
        table = np.empty(shape if shape else (), dtype=object)
        for idx, values in zip(np.ndindex(*shape), itertools.product(*(space.domains[f] for f in self.players))):
            table[idx] = Fraction(_label(self.classifier, dict(zip(self.players, values))))
        for axis, f in enumerate(self.players):
            dom = space.domains[f]
            marg = self.dist.marginal(f)
            fixed = np.take(table, dom.index(e[f]), axis=axis)
            averaged = sum(marg[v] * np.take(table, i, axis=axis) for i, v in enumerate(dom))
            table = np.stack([fixed, averaged], axis=axis)
        out = {}
        for bits in itertools.product((0, 1), repeat=n):
            s = frozenset(f for f, b in zip(self.players, bits) if b == 0)
            out[s] = Fraction(table[bits]) if n else Fraction(table[()])
        self._cache.update(out)
        return out


def _powerset(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


# ---------------------------------------------------------------------------
# Shapley and Shap


def _weights(n):
    return [Fraction(math.factorial(s) * math.factorial(n - s - 1), math.factorial(n)) for s in range(n)]


def shapley(players, game: Callable, p, cap=SHAP_BRUTE_FEATURES) -> Fraction:
    """Shapley value of ``p`` by direct summation over all coalitions."""
    players = list(players)
    if p not in players:
        raise PreconditionViolation(f"{p!r} is not a player", player=p)
    n = len(players)
    if n > cap:
        raise ShapCapExceeded(f"{n} players exceed the brute-force cap of {cap}", cap=cap)
    w = _weights(n)
    others = [q for q in players if q != p]
    total = Fraction(0)
    for s in _powerset(others):
        s = frozenset(s)
        total += w[len(s)] * (Fraction(game(s | {p})) - Fraction(game(s)))
    return total


def shapley_values(players, game: Callable, cap=SHAP_BRUTE_FEATURES) -> dict:
    players = list(players)
    n = len(players)
    if n > cap:
        raise ShapCapExceeded(f"{n} players exceed the brute-force cap of {cap}", cap=cap)
    w = _weights(n)
    values = {frozenset(s): Fraction(game(frozenset(s))) for s in _powerset(players)}
    out = {}
    for p in players:
        total = Fraction(0)
        for s, v in values.items():
            if p not in s:
                total += w[len(s)] * (values[s | {p}] - v)
        out[p] = total
    return out


def shap_bruteforce(classifier, dist, e, feature, cap=SHAP_BRUTE_FEATURES) -> Fraction:
    game = GameFunction(classifier, dist, e)
    if len(game.players) > cap:
        raise ShapCapExceeded(f"{len(game.players)} features exceed the brute-force cap of {cap}", cap=cap)
    values = game.all_values()
    return shapley(game.players, values.__getitem__, feature, cap)


def shap_all_bruteforce(classifier, dist, e, cap=SHAP_BRUTE_FEATURES) -> dict:
    game = GameFunction(classifier, dist, e)
    if len(game.players) > cap:
        raise ShapCapExceeded(f"{len(game.players)} features exceed the brute-force cap of {cap}", cap=cap)
    values = game.all_values()
    return shapley_values(game.players, values.__getitem__, cap)


def _binomials(n):
    rows = [[1]]
    for i in range(1, n + 1):
        prev = rows[-1]
        rows.append([1] + [prev[j - 1] + prev[j] for j in range(1, i)] + [1])
    return rows


def shap_ddbc(c: DDBC, dist, e) -> dict:
    """Shap of every feature on a dDBC in time polynomial in circuit size.

    For each gate g with variables V and each k, the DP keeps the sum over
    k-subsets S of V of Pr[g = 1 | variables in S fixed to e], scaled by
    d^(|V| - k) so everything stays integral (d is the common denominator of
    the marginals).  AND gates convolve (children share no variables), OR
    gates add children after padding with the variables they do not mention
    (children are mutually exclusive), NOT gates complement.

    Per feature x two passes are made: x fixed to e[x], and x left random
    but never counted as a player; only gates whose variables include x are
    recomputed.
    """
    if not isinstance(c, DDBC):
        raise UnvalidatedCircuit("Shap over circuits needs a validated dDBC; call validate_ddbc first")
    if isinstance(dist, Empirical):
        raise UnsupportedDistribution("polynomial-time Shap supports uniform and product distributions only")
    circ = c.circuit
    space = dist.space
    feats = list(circ.features)
    if set(feats) != set(space.features) or not space.is_boolean():
        raise PreconditionViolation("the distribution must range over the circuit's Boolean features")
    e = space.entity(e)
    ev = {f: as_bit(e[f]) for f in feats}
    p1 = {f: dist.marginal(f)[1] for f in feats}
    for f in feats:
        if (p1[f] if ev[f] else 1 - p1[f]) == 0:
            raise ZeroProbabilityCondition(f"the value of {f!r} has probability zero", subset=[f])
    d = math.lcm(*(p.denominator for p in p1.values())) if feats else 1
    a = {f: int(p1[f] * d) for f in feats}
    n = len(feats)
    binom = _binomials(n + 1)
    top = max((len(circ.varset(g.id)) for g in circ.gates), default=0)
    dpow = [d**i for i in range(top + 2)]

    def sizes(gid, x, mode):
        vs = circ.varset(gid)
        if x is None or x not in vs:
            return len(vs), len(vs)
        if mode == "fixed":
            return len(vs) - 1, len(vs) - 1
        return len(vs), len(vs) - 1  # W counts x, V does not

    def run(x, mode, base):
        gam = {}
        for g in circ.gates:
            if x is not None and x not in circ.varset(g.id):
                gam[g.id] = base[g.id]
                continue
            W, V = sizes(g.id, x, mode)
            if g.kind == "var":
                f = g.feature
                if f == x:
                    vec = [ev[f]] if mode == "fixed" else [a[f]]
                else:
                    vec = [a[f], ev[f]]
            elif g.kind == "const":
                vec = [g.value]
            elif g.kind == "not":
                child = gam[g.children[0]]
                vec = [binom[V][k] * dpow[W - k] - child[k] for k in range(V + 1)]
            elif g.kind == "and":
                vec = [1]
                for ch in g.children:
                    cv = gam[ch]
                    out = [0] * (len(vec) + len(cv) - 1)
                    for i, u in enumerate(vec):
                        if u:
                            for j, w in enumerate(cv):
                                out[i + j] += u * w
                    vec = out
            else:
                vec = [0] * (V + 1)
                for ch in g.children:
                    Wc, Vc = sizes(ch, x, mode)
                    extra_v, extra_w = V - Vc, W - Wc
                    for j, u in enumerate(gam[ch]):
                        if not u:
                            continue
                        for t in range(extra_v + 1):
                            vec[j + t] += u * binom[extra_v][t] * dpow[extra_w - t]
            gam[g.id] = vec
        return gam

    base = run(None, None, None)
    out_id = circ.output
    weights = _weights(n) if n else []
    scores = {}
    for x in feats:
        if x not in circ.varset(out_id):
            scores[x] = Fraction(0)
            continue
        fixed = run(x, "fixed", base)[out_id]
        free = run(x, "free", base)[out_id]
        Wf, Vf = sizes(out_id, x, "fixed")
        Wr, Vr = sizes(out_id, x, "free")
        players = n - 1
        total = Fraction(0)
        for k in range(players + 1):
            with_x = sum(Fraction(u * binom[players - Vf][k - j], dpow[Wf - j])
                         for j, u in enumerate(fixed) if 0 <= k - j <= players - Vf)
            without = sum(Fraction(u * binom[players - Vr][k - j], dpow[Wr - j])
                          for j, u in enumerate(free) if 0 <= k - j <= players - Vr)
            total += weights[k] * (with_x - without)
        scores[x] = total
    return scores


class CountIdentityCheck(NamedTuple):
    lhs: int
    rhs: Fraction
    equal: bool


def sat_count_identity(classifier, e, cap=SHAP_BRUTE_FEATURES) -> CountIdentityCheck:
    """Compare the model count with ``2^n · (L(e) - Σ Shap)`` under the uniform distribution.

    dDBCs use ``model_count`` and ``shap_ddbc``; plain circuits and other
    Boolean classifiers use truth-table counting and brute-force Shap.
    """
    if isinstance(classifier, DDBC):
        space = FeatureSpace.boolean(classifier.features)
        dist = Uniform(space)
        lhs = model_count(classifier)
        shap = shap_ddbc(classifier, dist, e)
    else:
        space = FeatureSpace.of(classifier)
        if not space.is_boolean():
            raise PreconditionViolation("the counting identity needs Boolean features")
        dist = Uniform(space)
        if isinstance(classifier, Circuit):
            lhs = truth_table_count(classifier)
        else:
            lhs = sum(_label(classifier, x) for x in space.entities())
        shap = shap_all_bruteforce(classifier, dist, e, cap)
    e = space.entity(e)
    rhs = 2 ** len(space.features) * (_label(classifier, e) - sum(shap.values()))
    return CountIdentityCheck(lhs, rhs, lhs == rhs)


# ---------------------------------------------------------------------------
# generalized responsibility


def resp_local(classifier, dist, e, feature, contingency: Mapping) -> Fraction:
    """Local responsibility of ``feature`` under the contingent change ``contingency``.

    ``(1 - E_v[L(e^{Γ,w}[feature := v])]) / (1 + |Γ|)``, the expectation taken
    over the feature's marginal (uniform over its domain for ``Uniform``).
    """
    space = dist.space
    e = space.entity(e)
    if feature not in space.features:
        raise PreconditionViolation(f"unknown feature {feature!r}", feature=feature)
    if _label(classifier, e) != 1:
        raise PreconditionViolation("the entity must carry label 1", check="label")
    if feature in contingency:
        raise PreconditionViolation(f"{feature!r} may not be part of its own contingency", check="self")
    changed = dict(e)
    for f, w in contingency.items():
        if f not in space.features:
            raise PreconditionViolation(f"unknown contingency feature {f!r}", check="unknown", feature=f)
        w = _coerce(space.domains[f], w, f)
        if w == e[f]:
            raise PreconditionViolation(f"contingency must change {f!r} away from its value", check="unchanged",
                                        feature=f)
        changed[f] = w
    if _label(classifier, changed) != 1:
        raise PreconditionViolation("the contingency alone switches the label", check="contingency_flips")
    return _local_score(classifier, dist.marginal(feature), changed, feature, len(contingency))


def _local_score(classifier, marginal, changed, feature, size):
    expected = Fraction(0)
    probe = dict(changed)
    for v, p in marginal.items():
        if p:
            probe[feature] = v
            expected += p * _label(classifier, probe)
    return (1 - expected) / (1 + size)


class RespResult(NamedTuple):
    score: Fraction
    contingency: Optional[dict]


def best_contingency(classifier, dist, e, feature, max_gamma=MAX_GAMMA,
                     max_candidates=MAX_CANDIDATES) -> RespResult:
    """Global responsibility together with one maximising contingency.

    Contingency sizes are tried from 0 upwards; the first size with a
    positive local score fixes |Γ| and the best local score of that size is
    returned.  Ties go to the first contingency in feature/domain order.
    """
    space = dist.space
    e = space.entity(e)
    if feature not in space.features:
        raise PreconditionViolation(f"unknown feature {feature!r}", feature=feature)
    if _label(classifier, e) != 1:
        raise PreconditionViolation("the entity must carry label 1", check="label")
    marginal = dist.marginal(feature)
    others = [f for f in space.features if f != feature]
    seen = 0
    best = RespResult(Fraction(0), None)
    for k in range(0, min(max_gamma, len(others)) + 1):
        for gamma in itertools.combinations(others, k):
            alternatives = [[v for v in space.domains[f] if v != e[f]] for f in gamma]
            for w in itertools.product(*alternatives):
                seen += 1
                if seen > max_candidates:
                    raise ContingencySearchCapExceeded(
                        f"contingency search stopped after {max_candidates} candidates",
                        cap=max_candidates, best=str(best.score), size=k)
                changed = dict(e)
                changed.update(zip(gamma, w))
                if _label(classifier, changed) != 1:
                    continue
                score = _local_score(classifier, marginal, changed, feature, k)
                if score > best.score:
                    best = RespResult(score, dict(zip(gamma, w)))
        if best.score > 0:
            return best
    return RespResult(Fraction(0), None)


def resp_global(classifier, dist, e, feature, max_gamma=MAX_GAMMA, max_candidates=MAX_CANDIDATES) -> Fraction:
    return best_contingency(classifier, dist, e, feature, max_gamma, max_candidates).score

"""Independent brute-force oracles.

Nothing here reuses the library's search code: queries are evaluated by
trying every variable assignment over the active domain, causes and repairs
by enumerating subsets, Shapley values by averaging over permutations.
"""

import itertools
import math
from fractions import Fraction

from attriscore.relcore import NULL, Var


def subsets(items, max_size=None):
    items = sorted(items)
    top = len(items) if max_size is None else min(max_size, len(items))
    for r in range(top + 1):
        for combo in itertools.combinations(items, r):
            yield frozenset(combo)


def naive_holds(facts, atoms):
    """``facts``: {tid: (pred, values)}.  True when some assignment satisfies every atom.

    Only variables used more than once are assigned; a variable used once
    accepts any value, NULL included.  NULL equals nothing.
    """
    counts = {}
    for a in atoms:
        for t in a.terms:
            if isinstance(t, Var):
                counts[t.name] = counts.get(t.name, 0) + 1
    rows = list(facts.values())
    domain = sorted({c for _, v in rows for c in v if c is not NULL})
    joined = sorted(n for n, k in counts.items() if k > 1)

    def fits(atom, values, env):
        for t, v in zip(atom.terms, values):
            if isinstance(t, Var) and counts[t.name] == 1:
                continue
            want = env[t.name] if isinstance(t, Var) else t
            if v is NULL or v != want:
                return False
        return True

    for choice in itertools.product(domain, repeat=len(joined)):
        env = dict(zip(joined, choice))
        if all(any(p == a.predicate and fits(a, v, env) for p, v in rows) for a in atoms):
            return True
    return False


def instance_facts(instance):
    return {tid: (instance.fact(tid).predicate, tuple(instance.fact(tid).values)) for tid in instance.ids}


def restrict(facts, keep):
    return {t: f for t, f in facts.items() if t in keep}


def brute_witnesses(instance, query):
    facts = instance_facts(instance)
    sat = [s for s in subsets(facts) if naive_holds(restrict(facts, s), query.atoms)]
    return frozenset(s for s in sat if not any(o < s for o in sat))


def brute_responsibility(instance, query):
    """{tid: Fraction} for every tuple (0 for non-causes)."""
    facts = instance_facts(instance)
    ids = set(facts)
    out = {}
    for tid in sorted(ids):
        out[tid] = Fraction(0)
        for gamma in subsets(ids - {tid}):
            rest = ids - gamma
            if naive_holds(restrict(facts, rest), query.atoms) and \
                    not naive_holds(restrict(facts, rest - {tid}), query.atoms):
                out[tid] = Fraction(1, 1 + len(gamma))
                break
    return out


def brute_min_contingency_size(instance, query, tid):
    facts = instance_facts(instance)
    ids = set(facts)
    for gamma in subsets(ids - {tid}):
        rest = ids - gamma
        if naive_holds(restrict(facts, rest), query.atoms) and \
                not naive_holds(restrict(facts, rest - {tid}), query.atoms):
            return len(gamma)
    return None


def is_valid_contingency(instance, query, tid, gamma):
    facts = instance_facts(instance)
    rest = set(facts) - set(gamma)
    return tid not in gamma and naive_holds(restrict(facts, rest), query.atoms) and \
        not naive_holds(restrict(facts, rest - {tid}), query.atoms)


def brute_repairs(instance, constraints):
    """(S-repairs, C-repairs, minimum number of deletions)."""
    facts = instance_facts(instance)
    consistent = [s for s in subsets(facts)
                  if not any(naive_holds(restrict(facts, s), dc.atoms) for dc in constraints)]
    srep = frozenset(s for s in consistent if not any(s < o for o in consistent))
    top = max(len(s) for s in srep)
    crep = frozenset(s for s in srep if len(s) == top)
    return srep, crep, len(facts) - top


def brute_null_change_sets(instance, query):
    """Minimal sets over all positions whose nulling falsifies the query."""
    positions = [(tid, j) for tid in instance.ids for j in range(1, len(instance.fact(tid).values) + 1)]
    found = []
    for s in subsets(positions):
        if any(f <= s for f in found):
            continue
        nulled = instance.with_values({p: NULL for p in s})
        if not naive_holds(instance_facts(nulled), query.atoms):
            found.append(s)
    return frozenset(found)


# ---------------------------------------------------------------------------
# classifiers


def all_entities(domains):
    names = list(domains)
    for values in itertools.product(*(domains[f] for f in names)):
        yield dict(zip(names, values))


def entity_probability(dist, entity):
    if dist.kind == "empirical":
        return sum((w for row, w in dist.sample if row == entity), Fraction(0))
    p = Fraction(1)
    for f, v in entity.items():
        p *= dist.marginal(f)[v]
    return p


def brute_game(classifier, dist, domains, e, subset):
    num = den = Fraction(0)
    for x in all_entities(domains):
        if all(x[f] == e[f] for f in subset):
            p = entity_probability(dist, x)
            den += p
            num += p * classifier(x)
    return num / den


def permutation_shapley(players, game):
    """Average marginal contribution over all orderings."""
    players = list(players)
    totals = {p: Fraction(0) for p in players}
    for order in itertools.permutations(players):
        before = frozenset()
        for p in order:
            totals[p] += Fraction(game(before | {p})) - Fraction(game(before))
            before = before | {p}
    n_perm = math.factorial(len(players))
    return {p: t / n_perm for p, t in totals.items()}


def brute_shap(classifier, dist, domains, e):
    cache = {}

    def game(s):
        if s not in cache:
            cache[s] = brute_game(classifier, dist, domains, e, s)
        return cache[s]

    return permutation_shapley(list(domains), game)


def truth_table_models(circuit):
    return sum(circuit.evaluate(dict(zip(circuit.features, bits)))
               for bits in itertools.product((0, 1), repeat=len(circuit.features)))


def brute_resp_global(classifier, dist, domains, e, feature):
    """Global Resp by listing every admissible (Γ, w̄) at once."""
    others = [f for f in domains if f != feature]
    scored = []
    for r in range(len(others) + 1):
        for gamma in itertools.combinations(others, r):
            for w in itertools.product(*([v for v in domains[f] if v != e[f]] for f in gamma)):
                changed = dict(e)
                changed.update(zip(gamma, w))
                if classifier(changed) != 1:
                    continue
                expected = Fraction(0)
                for v, p in dist.marginal(feature).items():
                    probe = dict(changed)
                    probe[feature] = v
                    expected += p * classifier(probe)
                local = (1 - expected) / (1 + r)
                if local > 0:
                    scored.append((r, local))
    if not scored:
        return Fraction(0)
    smallest = min(r for r, _ in scored)
    return max(s for r, s in scored if r == smallest)

"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N ... PASS|FAIL`` line (also repeated in
the pytest terminal summary).  All comparisons are exact rationals; the only
tolerances are the wall-clock limits pinned below.
"""

import itertools
import random
import time
from fractions import Fraction

import oracles
from acceptance_log import record

from attriscore import circuit as circ
from attriscore import dbcause, mlscore, relcore, repair
from attriscore.cli import data_path
from attriscore.generators import (path_tree, random_constraints, random_ddbc, random_game, random_instance,
                                   random_query, random_tree)

CAUSES_SECONDS = 1.0        # criterion 1
IDENTITY_SUITE_SECONDS = 60.0    # criterion 6
IDENTITY_CIRCUITS = 200
MAX_FEATURES = 12
RANDOM_INSTANCES = 100      # criterion 8
MAX_TUPLES = 10
TRACTABLE_FEATURES = 25     # criterion 9
TRACTABLE_SECONDS = 5.0
RANDOM_GAMES = 100          # criterion 10
MAX_PLAYERS = 6


def _verdict(number, title, ok, detail=""):
    record(f"criterion {number:>2} {title}: {'PASS' if ok else 'FAIL'}" + (f"  [{detail}]" if detail else ""))


def _db(name):
    return relcore.load_instance(data_path(name))


def test_criterion_01_tuple_causes():
    start = time.perf_counter()
    d = _db("ex1")
    q = relcore.load_query(data_path("ex1.q"), d.schema)
    reports = {r.tuple_id: r for r in dbcause.actual_causes(d, q)}
    others = dbcause.responsibility(d, q, "R:cd")
    elapsed = time.perf_counter() - start
    want = {"S:a": Fraction(1, 2), "R:ab": Fraction(1, 2), "R:bb": Fraction(1, 2), "S:b": Fraction(1)}
    got = {t: r.responsibility for t, r in reports.items()}
    ok = got == want and others == 0 and reports["S:b"].is_counterfactual and elapsed < CAUSES_SECONDS
    _verdict(1, "causes and responsibilities", ok, f"{ {k: str(v) for k, v in sorted(got.items())} }, "
             f"R:cd={others}, {elapsed:.3f}s < {CAUSES_SECONDS}s")
    assert got == want
    assert others == 0
    assert elapsed < CAUSES_SECONDS


def test_criterion_02_repairs_two_dcs():
    d = _db("ex3")
    dcs = relcore.load_constraints(data_path("ex3.dc"), d.schema)
    s = repair.s_repairs(d, dcs)
    c = repair.c_repairs_of(s)
    deg = repair.inc_degree(d, dcs)
    want_s = {frozenset({"P:e", "Q:ab", "R:ac"}), frozenset({"P:e", "P:a"})}
    want_c = {frozenset({"P:e", "Q:ab", "R:ac"})}
    ok = set(s.repairs) == want_s and set(c.repairs) == want_c and deg == Fraction(1, 4)
    _verdict(2, "S-/C-repairs and inc-deg 1/4", ok, f"S={s.to_dict()['repairs']}, inc-deg={deg}")
    assert set(s.repairs) == want_s
    assert set(c.repairs) == want_c
    assert deg == Fraction(1, 4)


def test_criterion_03_hypergraph_repairs():
    d = _db("hyper")
    dcs = relcore.load_constraints(data_path("hyper.dc"), d.schema)
    s = repair.s_repairs(d, dcs)
    c = repair.c_repairs_of(s)
    deg = repair.inc_degree(d, dcs)
    want_s = {frozenset({"B:a", "C:a"}), frozenset({"C:a", "D:a", "E:a"}), frozenset({"A:a", "B:a", "D:a"})}
    want_c = {frozenset({"C:a", "D:a", "E:a"}), frozenset({"A:a", "B:a", "D:a"})}
    ok = set(s.repairs) == want_s and set(c.repairs) == want_c and deg == Fraction(2, 5)
    _verdict(3, "hypergraph S-/C-repairs and inc-deg 2/5", ok,
             f"S={s.to_dict()['repairs']}, C={c.to_dict()['repairs']}, inc-deg={deg}")
    assert deg == Fraction(2, 5)
    assert set(s.repairs) == want_s
    assert set(c.repairs) == want_c


def test_criterion_04_attribute_causes():
    d = _db("attr")
    q = relcore.load_query(data_path("attr.q"), d.schema)
    sets = dbcause.minimal_null_change_sets(d, q)
    resp = {c.position: c.responsibility for c in dbcause.attr_level_causes(d, q)}
    want = {frozenset({("t6", 1)}), frozenset({("t1", 2), ("t3", 2)})}
    resp_ok = resp.get(("t6", 1)) == 1 and resp.get(("t1", 2)) == resp.get(("t3", 2)) == Fraction(1, 2)
    ok = set(sets) == want and resp_ok
    shown = sorted(sorted(dbcause.position_label(p) for p in s) for s in sets)
    _verdict(4, "attribute-level NULL change-sets", ok, f"{len(sets)} sets {shown}, responsibilities ok={resp_ok}")
    assert resp_ok
    assert set(sets) == want


def test_criterion_05_monotone_2cnf():
    c = circ.load_circuit(data_path("monotone2cnf.json"))
    e1, e2 = {"x1": 1, "x2": 0, "x3": 1}, {"x1": 1, "x2": 0, "x3": 0}
    labels = (c(e1), c(e2))
    count = oracles.truth_table_models(c)
    ok = labels == (1, 0) and count == 5 and circ.truth_table_count(c) == 5
    _verdict(5, "monotone 2-CNF labels and count", ok, f"labels={labels}, count={count}")
    assert labels == (1, 0)
    assert count == 5


def test_criterion_06_counting_identity():
    rng = random.Random(6)
    start = time.perf_counter()
    failures = []
    for i in range(IDENTITY_CIRCUITS):
        n = rng.randint(1, MAX_FEATURES)
        d = random_ddbc(rng, n, depth=rng.randint(2, 6))
        e = {f: rng.randint(0, 1) for f in d.features}
        shap = mlscore.shap_ddbc(d, mlscore.Uniform(mlscore.FeatureSpace.boolean(d.features)), e)
        rhs = 2 ** n * (d.evaluate(e) - sum(shap.values()))
        lhs = oracles.truth_table_models(d.circuit)
        if lhs != rhs:
            failures.append((i, lhs, rhs))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < IDENTITY_SUITE_SECONDS
    _verdict(6, "#SAT = 2^n (L(e) - sum Shap)", ok,
             f"{IDENTITY_CIRCUITS - len(failures)}/{IDENTITY_CIRCUITS} exact, {elapsed:.1f}s < {IDENTITY_SUITE_SECONDS}s")
    assert not failures
    assert elapsed < IDENTITY_SUITE_SECONDS


def _shap_pairs(rng, per_size=4):
    for n in range(1, MAX_FEATURES + 1):
        domains = {f"x{i}": (0, 1) for i in range(1, n + 1)}
        for _ in range(per_size):
            tree = random_tree(rng, domains, depth=min(n, 7), leaf_bias=0.15)
            yield "tree", circ.compile_dt(tree), tree
            yield "ddbc", random_ddbc(rng, n, depth=rng.randint(2, 6)), None


def test_criterion_07_oracle_equivalence():
    rng = random.Random(7)
    shap_cases = shap_bad = 0
    for kind, d, tree in _shap_pairs(rng):
        space = mlscore.FeatureSpace.boolean(d.features)
        marg = {f: {1: Fraction(rng.randint(1, 5), 6)} for f in d.features}
        marg = {f: {1: m[1], 0: 1 - m[1]} for f, m in marg.items()}
        for dist in (mlscore.Uniform(space), mlscore.Product(space, marg)):
            e = {f: rng.randint(0, 1) for f in d.features}
            fast = mlscore.shap_ddbc(d, dist, e)
            slow = mlscore.shap_all_bruteforce(tree or d.circuit, dist, e)
            shap_cases += 1
            shap_bad += fast != slow

    resp_cases = resp_bad = 0
    for n in range(1, 5):
        domains = {f"f{i}": ("a", "b", "c") for i in range(1, n + 1)}
        space = mlscore.FeatureSpace.from_domains(domains)
        entities = list(space.entities())
        if n <= 2:
            tables = itertools.product((0, 1), repeat=len(entities))
        else:
            tables = (tuple(rng.randint(0, 1) for _ in entities) for _ in range(25))
        for table in tables:
            clf = mlscore.TabulatedClassifier(space, {tuple(x.values()): lab for x, lab in zip(entities, table)})
            weights = {f: {v: Fraction(rng.randint(1, 3)) for v in dom} for f, dom in domains.items()}
            product = mlscore.Product(space, {f: {v: w / sum(ws.values()) for v, w in ws.items()}
                                              for f, ws in weights.items()})
            for dist in (mlscore.Uniform(space), product):
                picks = [x for x in entities if clf(x) == 1]
                if n > 2:
                    picks = rng.sample(picks, min(3, len(picks)))
                for e in picks:
                    for f in domains:
                        got = mlscore.resp_global(clf, dist, e, f)
                        want = oracles.brute_resp_global(clf, dist, domains, e, f)
                        resp_cases += 1
                        resp_bad += got != want
    ok = shap_bad == 0 and resp_bad == 0
    _verdict(7, "shap_ddbc = brute force, resp_global = enumeration", ok,
             f"shap {shap_cases - shap_bad}/{shap_cases}, resp {resp_cases - resp_bad}/{resp_cases}")
    assert shap_bad == 0
    assert resp_bad == 0


def test_criterion_08_repair_duality():
    rng = random.Random(8)
    bad = []
    for i in range(RANDOM_INSTANCES):
        d = random_instance(rng, max_tuples=MAX_TUPLES)
        dcs = random_constraints(rng)
        q = random_query(rng)
        if len(d) == 0:
            d = random_instance(rng, max_tuples=MAX_TUPLES)
        srep_want, crep_want, deletions = oracles.brute_repairs(d, dcs)
        srep = repair.s_repairs(d, dcs)
        crep = repair.c_repairs_of(srep)
        if set(srep.repairs) != set(srep_want) or set(crep.repairs) != set(crep_want):
            bad.append((i, "repairs"))
        if len(d) and repair.inc_degree(d, dcs) != Fraction(deletions, len(d)):
            bad.append((i, "inc-deg"))
        want = oracles.brute_responsibility(d, q)
        if not any(want.values()):
            continue
        for r in dbcause.actual_causes(d, q):
            if r.responsibility != want[r.tuple_id] or \
                    not oracles.is_valid_contingency(d, q, r.tuple_id, r.contingency):
                bad.append((i, r.tuple_id))
        causes = {r.tuple_id for r in dbcause.actual_causes(d, q)}
        if causes != {t for t, v in want.items() if v}:
            bad.append((i, "cause set"))
    _verdict(8, "causes and repairs = subset-enumeration ground truth", not bad,
             f"{RANDOM_INSTANCES} instances, mismatches={bad[:5]}")
    assert not bad


def test_criterion_09_tractability():
    rng = random.Random(9)
    domains = {f"x{i}": (0, 1) for i in range(1, TRACTABLE_FEATURES + 6)}
    trees = {"path": path_tree(TRACTABLE_FEATURES + 5),
             "bushy": random_tree(rng, domains, depth=10, leaf_bias=0.05)}
    ok, details = True, []
    for name, tree in trees.items():
        d = circ.compile_dt(tree)
        space = mlscore.FeatureSpace.boolean(d.features)
        e = {f: rng.randint(0, 1) for f in d.features}
        start = time.perf_counter()
        scores = mlscore.shap_ddbc(d, mlscore.Uniform(space), e)
        elapsed = time.perf_counter() - start
        efficient = sum(scores.values()) == d.evaluate(e) - Fraction(circ.model_count(d), 2 ** len(d.features))
        ok &= len(d.features) >= TRACTABLE_FEATURES and elapsed < TRACTABLE_SECONDS and efficient
        details.append(f"{name}: {len(d.features)} features, {len(d.circuit)} gates, {elapsed:.3f}s")
    _verdict(9, "shap_ddbc on large compiled trees", ok, "; ".join(details) + f" (limit {TRACTABLE_SECONDS}s)")
    assert ok


def test_criterion_10_shapley_axioms():
    rng = random.Random(10)
    bad = []
    for i in range(RANDOM_GAMES):
        n = rng.randint(2, MAX_PLAYERS)
        players = [f"p{k}" for k in range(n)]
        base = random_game(rng, players)
        p, q = rng.sample(players, 2)
        swap = {p: q, q: p}

        def mirrored(s):
            return frozenset(swap.get(x, x) for x in s)

        symmetric = {s: max(v, base[mirrored(s)]) for s, v in base.items()}
        null = rng.choice(players)
        with_null = {s: base[s - {null}] for s in base}

        values = mlscore.shapley_values(players, base.__getitem__)
        if sum(values.values()) != base[frozenset(players)] - base[frozenset()]:
            bad.append((i, "efficiency"))
        if values != oracles.permutation_shapley(players, base.__getitem__):
            bad.append((i, "permutation oracle"))
        sym = mlscore.shapley_values(players, symmetric.__getitem__)
        if sym[p] != sym[q]:
            bad.append((i, "symmetry"))
        if mlscore.shapley(players, with_null.__getitem__, null) != 0:
            bad.append((i, "null player"))
    _verdict(10, "Shapley efficiency, symmetry, null player", not bad, f"{RANDOM_GAMES} games, failures={bad[:5]}")
    assert not bad

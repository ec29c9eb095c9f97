import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from strategies import ddbcs

from attriscore.circuit import CircuitBuilder, compile_dt, load_circuit, load_tree, validate_ddbc
from attriscore.cli import data_path
from attriscore.errors import (ContingencySearchCapExceeded, PreconditionViolation, ShapCapExceeded,
                               UnsupportedDistribution, UnvalidatedCircuit, ZeroProbabilityCondition)
from attriscore.generators import random_game, random_tree
from attriscore.mlscore import (Empirical, FeatureSpace, GameFunction, Product, TabulatedClassifier, Uniform,
                                _weights, best_contingency, game_value, load_distribution, parse_rational,
                                resp_global, resp_local, sat_count_identity, shap_all_bruteforce,
                                shap_bruteforce, shap_ddbc, shapley, shapley_values)


def and_circuit():
    b = CircuitBuilder(["x1", "x2"])
    return b.build(b.conj(b.var("x1"), b.var("x2")))


def test_game_value_examples():
    c = and_circuit()
    dist = Uniform(FeatureSpace.boolean(["x1", "x2"]))
    e = {"x1": 1, "x2": 1}
    assert game_value(c, dist, e, {"x1", "x2"}) == 1
    assert game_value(c, dist, e, {"x1"}) == Fraction(1, 2)
    assert game_value(c, dist, e, set()) == Fraction(1, 4)


def test_all_values_matches_single_values():
    c = load_circuit(data_path("ddbc4.json"))
    space = FeatureSpace.of(c)
    dist = load_distribution(space, data_path("ddbc4_product.json"))
    g = GameFunction(c, dist, {"x1": 1, "x2": 0, "x3": 1, "x4": 0})
    values = g.all_values()
    assert len(values) == 16
    for s, v in values.items():
        assert v == game_value(c, dist, g.e, s)


def test_empirical_zero_probability():
    tree = load_tree(data_path("loan_tree.json"))
    space = FeatureSpace.of(tree)
    dist = load_distribution(space, data_path("loan_empirical.json"))
    with pytest.raises(ZeroProbabilityCondition):
        game_value(tree, dist, {"Age": "young", "Income": "high", "Savings": "high"}, {"Age", "Income"})


def test_product_marginals_must_sum_to_one():
    space = FeatureSpace.boolean(["x"])
    with pytest.raises(PreconditionViolation):
        Product(space, {"x": {0: Fraction(1, 2), 1: Fraction(1, 3)}})


def test_parse_rational():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational({"num": 1, "den": 3}) == Fraction(1, 3)
    assert parse_rational(1) == 1


def test_shapley_axioms():
    players = ["a", "b", "c"]
    # a and b are symmetric, c never matters
    game = lambda s: Fraction(len(s & {"a", "b"}) ** 2)
    phi = shapley_values(players, game)
    assert phi["a"] == phi["b"]
    assert phi["c"] == 0
    assert sum(phi.values()) == game(frozenset(players)) - game(frozenset())
    assert shapley(players, game, "a") == phi["a"]


def test_shapley_cap():
    with pytest.raises(ShapCapExceeded):
        shapley(list(range(5)), lambda s: 0, 0, cap=4)
    with pytest.raises(PreconditionViolation):
        shapley(["a"], lambda s: 0, "z")


def test_weights():
    assert _weights(7)[1] == Fraction(1, 42)
    assert _weights(1) == [1]


def test_single_feature_shap():
    b = CircuitBuilder(["x"])
    c = b.build(b.var("x"))
    assert shap_bruteforce(c, Uniform(FeatureSpace.boolean(["x"])), {"x": 1}, "x") == Fraction(1, 2)


def test_monotone_efficiency():
    c = load_circuit(data_path("monotone2cnf.json"))
    dist = Uniform(FeatureSpace.of(c))
    for e in FeatureSpace.of(c).entities():
        shap = shap_all_bruteforce(c, dist, e)
        assert sum(shap.values()) == c(e) - Fraction(5, 8)


def test_shap_ddbc_constant_is_zero():
    b = CircuitBuilder(["x1", "x2", "x3"])
    d = validate_ddbc(b.build(b.const(1)))
    dist = Uniform(FeatureSpace.boolean(d.features))
    assert set(shap_ddbc(d, dist, {"x1": 1, "x2": 0, "x3": 1}).values()) == {0}


def test_shap_ddbc_fixture_matches_brute_force():
    c = load_circuit(data_path("ddbc4.json"))
    d = validate_ddbc(c)
    space = FeatureSpace.of(c)
    for dist in (Uniform(space), load_distribution(space, data_path("ddbc4_product.json"))):
        for e in space.entities():
            assert shap_ddbc(d, dist, e) == shap_all_bruteforce(c, dist, e)


def test_shap_ddbc_rejections():
    c = load_circuit(data_path("ddbc4.json"))
    space = FeatureSpace.of(c)
    e = {"x1": 1, "x2": 0, "x3": 1, "x4": 1}
    with pytest.raises(UnvalidatedCircuit):
        shap_ddbc(c, Uniform(space), e)
    with pytest.raises(UnsupportedDistribution):
        shap_ddbc(validate_ddbc(c), Empirical(space, [e]), e)


def test_zero_probability_value_rejected():
    d = validate_ddbc(and_circuit())
    space = FeatureSpace.boolean(["x1", "x2"])
    dist = Product(space, {"x1": {1: Fraction(1), 0: Fraction(0)}})
    with pytest.raises(ZeroProbabilityCondition):
        shap_ddbc(d, dist, {"x1": 0, "x2": 1})


def test_counting_identity_examples():
    d = validate_ddbc(load_circuit(data_path("ddbc4.json")))
    for e in FeatureSpace.of(d.circuit).entities():
        check = sat_count_identity(d, e)
        assert check.equal and check.lhs == check.rhs
    b = CircuitBuilder(["x1", "x2"])
    one = validate_ddbc(b.build(b.const(1)))
    assert sat_count_identity(one, {"x1": 0, "x2": 0}) == (4, 4, True)
    # non-deterministic circuits go through the truth table
    mono = load_circuit(data_path("monotone2cnf.json"))
    assert sat_count_identity(mono, {"x1": 1, "x2": 1, "x3": 0}).lhs == 5


def test_resp_local_examples():
    c = and_circuit()
    dist = Uniform(FeatureSpace.boolean(["x1", "x2"]))
    e = {"x1": 1, "x2": 1}
    assert resp_local(c, dist, e, "x1", {}) == Fraction(1, 2)
    b = CircuitBuilder(["x1", "x2"])
    one = b.build(b.const(1))
    assert resp_local(one, dist, e, "x1", {}) == 0
    space = FeatureSpace.from_domains({"C": ("r", "g", "b")})
    red = TabulatedClassifier.from_function(space, lambda x: int(x["C"] != "r"))
    assert resp_local(red, Uniform(space), {"C": "g"}, "C", {}) == Fraction(1, 3)


@pytest.mark.parametrize("entity,contingency,check", [
    ({"x1": 0, "x2": 1}, {}, "label"),
    ({"x1": 1, "x2": 1}, {"x1": 0}, "self"),
    ({"x1": 1, "x2": 1}, {"x9": 0}, "unknown"),
    ({"x1": 1, "x2": 1}, {"x2": 1}, "unchanged"),
    ({"x1": 1, "x2": 1}, {"x2": 0}, "contingency_flips"),
])
def test_resp_local_preconditions(entity, contingency, check):
    dist = Uniform(FeatureSpace.boolean(["x1", "x2"]))
    with pytest.raises(PreconditionViolation) as info:
        resp_local(and_circuit(), dist, entity, "x1", contingency)
    assert info.value.details["check"] == check


def test_resp_global_needs_contingency():
    tree = load_tree(data_path("loan_tree.json"))
    space = FeatureSpace.of(tree)
    e = {"Age": "young", "Income": "low", "Savings": "low"}
    best = best_contingency(tree, Uniform(space), e, "Income")
    assert best.score == Fraction(1, 4)
    assert best.contingency == {"Savings": "high"}
    assert resp_global(tree, Uniform(space), e, "Age") == 0
    empirical = load_distribution(space, data_path("loan_empirical.json"))
    assert resp_global(tree, empirical, e, "Income") == Fraction(1, 5)


def test_resp_global_cap_reports_best_so_far():
    tree = load_tree(data_path("loan_tree.json"))
    space = FeatureSpace.of(tree)
    e = {"Age": "young", "Income": "low", "Savings": "low"}
    with pytest.raises(ContingencySearchCapExceeded) as info:
        resp_global(tree, Uniform(space), e, "Income", max_candidates=2)
    assert info.value.details["best"] == "0"


def test_entity_coercion_from_strings():
    c = and_circuit()
    dist = Uniform(FeatureSpace.boolean(["x1", "x2"]))
    assert game_value(c, dist, {"x1": "1", "x2": "1"}, {"x1", "x2"}) == 1


@settings(max_examples=40, deadline=None)
@given(ddbcs(max_features=6), st.integers(0, 2**6 - 1), st.integers(0, 2**16))
def test_shap_ddbc_matches_permutation_oracle(d, bits, seed):
    rng = random.Random(seed)
    space = FeatureSpace.boolean(d.features)
    marg = {}
    for f in d.features:
        p = Fraction(rng.randint(1, 5), 6)
        marg[f] = {1: p, 0: 1 - p}
    dist = Product(space, marg)
    e = {f: (bits >> i) & 1 for i, f in enumerate(d.features)}
    expected = oracles.brute_shap(d.circuit, dist, space.domains, e)
    assert shap_ddbc(d, dist, e) == expected
    assert sum(expected.values()) == d(e) - game_value(d.circuit, dist, e, set())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 3))
def test_brute_force_shap_on_ternary_trees(seed, n):
    rng = random.Random(seed)
    domains = {f"f{i}": ("p", "q", "r")[: rng.randint(2, 3)] for i in range(n)}
    tree = random_tree(rng, domains, depth=n, leaf_bias=0.2)
    space = FeatureSpace.from_domains(domains)
    dist = Uniform(space)
    e = rng.choice(list(space.entities()))
    assert shap_all_bruteforce(tree, dist, e) == oracles.brute_shap(tree, dist, domains, e)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_resp_in_unit_interval_and_matches_oracle(seed):
    rng = random.Random(seed)
    domains = {f"f{i}": ("p", "q", "r") for i in range(3)}
    tree = random_tree(rng, domains, depth=3, leaf_bias=0.2)
    space = FeatureSpace.from_domains(domains)
    dist = Uniform(space)
    positives = [e for e in space.entities() if tree(e) == 1]
    if not positives:
        return
    e = rng.choice(positives)
    for f in domains:
        score = resp_global(tree, dist, e, f)
        assert 0 <= score <= 1
        assert score == oracles.brute_resp_global(tree, dist, domains, e, f)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_random_games_efficiency(seed):
    rng = random.Random(seed)
    players = [f"p{i}" for i in range(rng.randint(1, 5))]
    table = random_game(rng, players)
    phi = shapley_values(players, table.__getitem__)
    assert phi == oracles.permutation_shapley(players, table.__getitem__)
    assert sum(phi.values()) == table[frozenset(players)] - table[frozenset()]


def test_compiled_tree_shap_equals_tree_shap():
    t = load_tree(data_path("tree7.json"))
    d = compile_dt(t)
    space = FeatureSpace.of(t)
    dist = Uniform(space)
    for e in space.entities():
        assert shap_ddbc(d, dist, e) == shap_all_bruteforce(t, dist, e)

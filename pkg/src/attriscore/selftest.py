"""Bundled worked examples, re-run by ``attriscore selftest``."""

from fractions import Fraction
from importlib import resources

from . import circuit as circ
from . import dbcause, mlscore, relcore, repair


def _path(*parts):
    return str(resources.files("attriscore").joinpath("data").joinpath(*parts))


def _db(name):
    return relcore.load_instance(_path(name))


def _tuple_causes():
    d = _db("ex1")
    q = relcore.load_query(_path("ex1.q"), d.schema)
    got = {r.tuple_id: r.responsibility for r in dbcause.actual_causes(d, q)}
    want = {"S:a": Fraction(1, 2), "R:ab": Fraction(1, 2), "R:bb": Fraction(1, 2), "S:b": Fraction(1)}
    return got == want and dbcause.responsibility(d, q, "R:cd") == 0, got


def _query_without_sb():
    d = _db("ex1")
    q = relcore.load_query(_path("ex1.q"), d.schema)
    return relcore.eval_bcq(d, q) and not relcore.eval_bcq(d.without({"S:b"}), q), None


def _ex3_repairs():
    d = _db("ex3")
    dcs = relcore.load_constraints(_path("ex3.dc"), d.schema)
    s = repair.s_repairs(d, dcs)
    c = repair.c_repairs_of(s)
    want_s = {frozenset({"P:e", "Q:ab", "R:ac"}), frozenset({"P:e", "P:a"})}
    ok = set(s.repairs) == want_s and set(c.repairs) == {frozenset({"P:e", "Q:ab", "R:ac"})}
    return ok and repair.inc_degree(d, dcs) == Fraction(1, 4), s.to_dict()


def _hypergraph_example():
    # the three repairs listed for this example are all S-repairs, the two
    # larger ones are C-repairs, and a closest repair deletes 2 of 5 tuples
    d = _db("hyper")
    dcs = relcore.load_constraints(_path("hyper.dc"), d.schema)
    s = repair.s_repairs(d, dcs)
    c = repair.c_repairs_of(s)
    listed = [{"B:a", "C:a"}, {"C:a", "D:a", "E:a"}, {"A:a", "B:a", "D:a"}]
    ok = all(frozenset(r) in s.repairs for r in listed)
    ok &= all(frozenset(r) in c.repairs for r in listed[1:])
    return ok and repair.inc_degree(d, dcs) == Fraction(2, 5), s.to_dict()


def _attribute_causes():
    d = _db("attr")
    q = relcore.load_query(_path("attr.q"), d.schema)
    sets = dbcause.minimal_null_change_sets(d, q)
    resp = {c.position: c.responsibility for c in dbcause.attr_level_causes(d, q)}
    ok = frozenset({("t6", 1)}) in sets and frozenset({("t1", 2), ("t3", 2)}) in sets
    ok &= resp[("t6", 1)] == 1 and resp[("t1", 2)] == resp[("t3", 2)] == Fraction(1, 2)
    return ok, sorted(dbcause.position_label(p) for p in resp)


def _monotone_labels():
    c = circ.load_circuit(_path("monotone2cnf.json"))
    labels = (c({"x1": 1, "x2": 0, "x3": 1}), c({"x1": 1, "x2": 0, "x3": 0}))
    return labels == (1, 0) and circ.truth_table_count(c) == 5, labels


def _monotone_game():
    c = circ.load_circuit(_path("monotone2cnf.json"))
    space = mlscore.FeatureSpace.boolean(c.features)
    dist = mlscore.Uniform(space)
    e = {"x1": 1, "x2": 0, "x3": 1}
    g = mlscore.game_value(c, dist, e, {"x2"})
    check = mlscore.sat_count_identity(c, e)
    return g == Fraction(1, 4) and check.lhs == 5 and check.equal, check.rhs


def _ddbc4():
    c = circ.load_circuit(_path("ddbc4.json"))
    d = circ.validate_ddbc(c)
    space = mlscore.FeatureSpace.boolean(c.features)
    dist = mlscore.Uniform(space)
    e = {"x1": 1, "x2": 0, "x3": 1, "x4": 1}
    ok = mlscore.shap_ddbc(d, dist, e) == mlscore.shap_all_bruteforce(c, dist, e)
    return ok and circ.model_count(d) == circ.truth_table_count(c), circ.model_count(d)


def _tree_compilation():
    t = circ.load_tree(_path("tree7.json"))
    d = circ.compile_dt(t)
    space = mlscore.FeatureSpace.of(t)
    ok = all(d.evaluate(e) == t(e) for e in space.entities())
    return ok and len(d.circuit) <= 4 * len(t), len(d.circuit)


def _shapley_coefficient():
    # coefficient of a one-feature coalition among seven features
    return mlscore._weights(7)[1] == Fraction(1, 42), None


def _loan_resp():
    t = circ.load_tree(_path("loan_tree.json"))
    space = mlscore.FeatureSpace.of(t)
    dist = mlscore.Uniform(space)
    e = {"Age": "young", "Income": "low", "Savings": "low"}
    r = mlscore.best_contingency(t, dist, e, "Income")
    ok = r.contingency is not None and len(r.contingency) == 1 and r.score == Fraction(1, 4)
    return ok and mlscore.resp_global(t, dist, e, "Age") == 0, r.score


CHECKS = [
    ("tuple causes and responsibilities", _tuple_causes),
    ("query fails once S(b) is removed", _query_without_sb),
    ("repairs and inconsistency degree, two DCs", _ex3_repairs),
    ("hypergraph repairs and inconsistency degree", _hypergraph_example),
    ("attribute-level causes", _attribute_causes),
    ("monotone 2-CNF labels and count", _monotone_labels),
    ("monotone 2-CNF game value and counting identity", _monotone_game),
    ("four-feature dDBC: Shap and model count", _ddbc4),
    ("decision-tree compilation", _tree_compilation),
    ("Shapley coefficient 1/42", _shapley_coefficient),
    ("loan tree responsibility", _loan_resp),
]


def run_selftest():
    results = []
    for name, check in CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # a crash is a failed check, reported not raised
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"check": name, "ok": bool(ok), "detail": detail})
    return results

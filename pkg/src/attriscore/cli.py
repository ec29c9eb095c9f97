"""Command-line front end: ``attriscore <subcommand> [flags]``.

Output goes to stdout as compact JSON (rationals as ``{"num":..,"den":..}``)
or, with ``--format table``, as aligned text with 6-significant-digit
decimals next to the exact value.  Domain errors exit with status 1 and a
JSON error object on stderr; usage errors exit with status 2.
"""

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib import resources

from . import circuit as circ
from . import dbcause, mlscore, relcore, repair
from .config import RunConfig
from .errors import (AttriscoreError, DecomposabilityViolation, DeterminismCheckTooLarge,
                     DeterminismViolation)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# rendering


def to_jsonable(value):
    if isinstance(value, Fraction):
        return {"num": value.numerator, "den": value.denominator}
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if value is relcore.NULL:
        return "NULL"
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (frozenset, set)):
        return [to_jsonable(v) for v in sorted(value, key=str)]
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    return str(value)


def decimal(q: Fraction) -> str:
    return f"{float(q):.6g}"


def _cell(value):
    if isinstance(value, Fraction):
        exact = str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
        return f"{exact} ({decimal(value)})"
    if isinstance(value, dict) and set(value) == {"num", "den"}:
        return _cell(Fraction(value["num"], value["den"]))
    if isinstance(value, (list, tuple, frozenset, set)):
        return "{" + ", ".join(_cell(v) for v in value) + "}"
    if isinstance(value, dict):
        return ", ".join(f"{k}={_cell(v)}" for k, v in value.items())
    return str(value)


def render_table(value) -> str:
    if isinstance(value, dict) and not (set(value) == {"num", "den"}):
        width = max((len(str(k)) for k in value), default=0)
        lines = []
        for k, v in value.items():
            if isinstance(v, list) and v and isinstance(v[0], dict):
                lines.append(f"{k}:")
                lines.extend("  " + _cell(item) for item in v)
            else:
                lines.append(f"{str(k).ljust(width)}  {_cell(v)}")
        return "\n".join(lines)
    if isinstance(value, list):
        return "\n".join(_cell(v) for v in value)
    return _cell(value)


def emit(report, fmt, out):
    if fmt == "table":
        out.write(render_table(report) + "\n")
    else:
        out.write(json.dumps(to_jsonable(report), separators=(",", ":")) + "\n")


# ---------------------------------------------------------------------------
# inputs


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise UsageError(f"{args.command} needs " + ", ".join(f"--{n}" for n in missing))


def _instance(args, cfg):
    _need(args, "data")
    return relcore.load_instance(args.data, max_tuples=cfg.max_tuples)


def _query(args, instance):
    _need(args, "query")
    return relcore.load_query(args.query, instance.schema)


def _constraints(args, instance):
    _need(args, "dc")
    return relcore.load_constraints(args.dc, instance.schema)


def _classifier(args):
    if (args.tree is None) == (args.circuit is None):
        raise UsageError(f"{args.command} needs exactly one of --tree or --circuit")
    if args.tree is not None:
        return circ.load_tree(args.tree)
    return circ.load_circuit(args.circuit)


def _space(args, classifier):
    if args.space:
        with open(args.space, encoding="utf-8") as fh:
            return mlscore.FeatureSpace.from_dict(json.load(fh))
    return mlscore.FeatureSpace.of(classifier)


def _distribution(args, space):
    if args.dist is None:
        return mlscore.Uniform(space)
    return mlscore.load_distribution(space, args.dist)


def _entity(args, space):
    _need(args, "entity")
    text = args.entity.strip()
    if "=" in text:
        pairs = [p.split("=", 1) for p in text.split(",") if p.strip()]
        return space.entity({k.strip(): v.strip() for k, v in pairs})
    if not text.isdigit():
        raise UsageError("--entity takes a row index into --entities or inline name=value pairs")
    if args.entities is None:
        raise UsageError("a row index for --entity needs --entities <csv>")
    rows = mlscore.read_entities(args.entities)
    index = int(text)
    if index >= len(rows):
        raise UsageError(f"--entity {index} is out of range; the file has {len(rows)} rows")
    return space.entity(rows[index])


def _ddbc(classifier, cfg):
    if isinstance(classifier, circ.DecisionTree):
        if not classifier.is_binary():
            raise UsageError("the ddbc method needs a binary tree; binarize it with compile-dt first")
        return circ.compile_dt(classifier)
    return circ.validate_ddbc(classifier, budget=cfg.determinism_budget, trust_determinism=cfg.trust_determinism)


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args, cfg):
    instance = _instance(args, cfg)
    q = _query(args, instance)
    return {"query": str(q), "holds": relcore.eval_bcq(instance, q)}


def cmd_causes(args, cfg):
    instance = _instance(args, cfg)
    q = _query(args, instance)
    reports = dbcause.actual_causes(instance, q, cfg.witness_cap, cfg.hitting_set_nodes)
    return {"causes": [r.to_dict() for r in reports]}


def cmd_resp(args, cfg):
    instance = _instance(args, cfg)
    q = _query(args, instance)
    _need(args, "tuple")
    if args.tuple not in instance:
        raise relcore.SchemaError(f"no tuple with id {args.tuple!r}", tuple_id=args.tuple)
    return dbcause.responsibility(instance, q, args.tuple, cfg.witness_cap, cfg.hitting_set_nodes)


def cmd_attr_causes(args, cfg):
    instance = _instance(args, cfg)
    q = _query(args, instance)
    sets = dbcause.minimal_null_change_sets(instance, q, cfg.witness_cap, cfg.hitting_set_nodes)
    causes = dbcause.attr_level_causes(instance, q, cfg.witness_cap)
    ordered = sorted(sets, key=lambda s: (len(s), sorted(s)))
    return {"change_sets": [[dbcause.position_label(p) for p in sorted(s)] for s in ordered],
            "causes": [c.to_dict() for c in causes]}


def cmd_repairs(args, cfg):
    instance = _instance(args, cfg)
    dcs = _constraints(args, instance)
    h = repair.build_conflict_hypergraph(instance, dcs, cfg.witness_cap)
    srep = repair.s_repairs_of(h, cfg.repair_cap, cfg.hitting_set_nodes)
    return (srep if args.kind == "s" else repair.c_repairs_of(srep)).to_dict()


def cmd_inc_deg(args, cfg):
    instance = _instance(args, cfg)
    dcs = _constraints(args, instance)
    if args.approx:
        return repair.greedy_inc_degree(instance, dcs, cfg.witness_cap)
    return repair.inc_degree(instance, dcs, cfg.witness_cap, cfg.hitting_set_nodes)


def cmd_compile_dt(args, cfg):
    _need(args, "tree")
    tree = circ.load_tree(args.tree)
    if not tree.is_binary():
        tree = circ.binarize_dt(tree)
    ddbc = circ.compile_dt(tree)
    data = ddbc.circuit.to_dict()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=1)
            fh.write("\n")
        return {"written": args.out, "gates": len(ddbc.circuit), "features": list(ddbc.features)}
    return data


def cmd_validate(args, cfg):
    _need(args, "circuit")
    ddbc = _ddbc(circ.load_circuit(args.circuit), cfg)
    return {"valid": True, "certificate": {str(k): list(v) for k, v in ddbc.certificate.items()}}


def cmd_model_count(args, cfg):
    _need(args, "circuit")
    c = circ.load_circuit(args.circuit)
    if args.brute:
        return {"count": circ.truth_table_count(c), "method": "truth-table"}
    return {"count": circ.model_count(_ddbc(c, cfg)), "method": "ddbc"}


def cmd_shap(args, cfg):
    classifier = _classifier(args)
    space = _space(args, classifier)
    dist = _distribution(args, space)
    e = _entity(args, space)
    if args.method == "ddbc":
        scores = mlscore.shap_ddbc(_ddbc(classifier, cfg), dist, e)
    elif args.feature:
        scores = {args.feature: mlscore.shap_bruteforce(classifier, dist, e, args.feature, cfg.shap_brute_features)}
    else:
        scores = mlscore.shap_all_bruteforce(classifier, dist, e, cfg.shap_brute_features)
    if args.feature:
        if args.feature not in scores:
            raise mlscore.PreconditionViolation(f"unknown feature {args.feature!r}", feature=args.feature)
        scores = {args.feature: scores[args.feature]}
    return scores


def cmd_resp_ml(args, cfg):
    _need(args, "feature")
    classifier = _classifier(args)
    space = _space(args, classifier)
    dist = _distribution(args, space)
    e = _entity(args, space)
    result = mlscore.best_contingency(classifier, dist, e, args.feature, cfg.max_gamma, cfg.max_candidates)
    return {"feature": args.feature, "score": result.score, "contingency": result.contingency}


def cmd_count_identity(args, cfg):
    classifier = _classifier(args)
    if isinstance(classifier, circ.DecisionTree):
        classifier = _ddbc(classifier, cfg)
    elif not args.brute:
        try:
            classifier = _ddbc(classifier, cfg)
        except (DeterminismViolation, DecomposabilityViolation, DeterminismCheckTooLarge):
            pass  # not a dDBC: fall back to truth tables and brute-force Shap
    space = mlscore.FeatureSpace.boolean(classifier.features)
    e = _entity(args, space)
    check = mlscore.sat_count_identity(classifier, e, cfg.shap_brute_features)
    return {"lhs": check.lhs, "rhs": check.rhs, "equal": check.equal}


def cmd_selftest(args, cfg):
    from .selftest import run_selftest

    results = run_selftest()
    failed = [r for r in results if not r["ok"]]
    report = {"checks": results, "passed": len(results) - len(failed), "failed": len(failed)}
    if failed:
        args.exit_code = 1
    return report


COMMANDS = {
    "eval": (cmd_eval, "evaluate a Boolean conjunctive query"),
    "causes": (cmd_causes, "actual causes with responsibility and a minimum contingency set"),
    "resp": (cmd_resp, "responsibility of one tuple"),
    "attr-causes": (cmd_attr_causes, "attribute-level causes via NULL change-sets"),
    "repairs": (cmd_repairs, "S- or C-repairs under denial constraints"),
    "inc-deg": (cmd_inc_deg, "repair-based inconsistency degree"),
    "compile-dt": (cmd_compile_dt, "compile a decision tree into a dDBC"),
    "validate": (cmd_validate, "check determinism and decomposability"),
    "model-count": (cmd_model_count, "count satisfying assignments"),
    "shap": (cmd_shap, "Shap scores of an entity"),
    "resp-ml": (cmd_resp_ml, "generalized responsibility of one feature"),
    "check-eq8": (cmd_count_identity, "compare the model count with 2^n (L(e) - sum of Shap)"),
    "selftest": (cmd_selftest, "run the bundled worked examples"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run caps")
    common.add_argument("--format", choices=("json", "table"), help="output format (default json)")
    common.add_argument("--data", help="directory of CSV relations")
    common.add_argument("--query", help="query file")
    common.add_argument("--dc", help="denial-constraint file")
    common.add_argument("--tuple", help="tuple id")
    common.add_argument("--tree", help="decision-tree JSON")
    common.add_argument("--circuit", help="circuit JSON")
    common.add_argument("--entity", help="row index into --entities, or inline name=value,...")
    common.add_argument("--entities", help="CSV of entities")
    common.add_argument("--space", help="feature-space JSON (defaults to the classifier's own)")
    common.add_argument("--dist", help="distribution JSON (defaults to uniform)")
    common.add_argument("--feature", help="feature name")
    common.add_argument("--trust-determinism", action="store_true", default=None,
                        help="accept OR gates too large to check exhaustively")

    parser = argparse.ArgumentParser(prog="attriscore", description="Causal attribution scores for databases "
                                     "and binary classifiers.")
    sub = parser.add_subparsers(dest="command", metavar="<command>")
    sub.required = True
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if name == "repairs":
            p.add_argument("--kind", choices=("s", "c"), default="s")
        elif name == "inc-deg":
            p.add_argument("--approx", action="store_true", help="greedy upper bound instead of the exact value")
        elif name == "compile-dt":
            p.add_argument("--out", help="write the circuit here instead of stdout")
        elif name == "model-count":
            p.add_argument("--brute", action="store_true", help="count by truth table (no dDBC needed)")
        elif name == "shap":
            p.add_argument("--method", choices=("brute", "ddbc"), default="brute")
        elif name == "check-eq8":
            p.add_argument("--brute", action="store_true", help="skip dDBC validation")
    return parser


def _load_config(args):
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {}
    if args.format:
        overrides["output"] = args.format
    if args.trust_determinism:
        overrides["trust_determinism"] = True
    if overrides:
        cfg = RunConfig.from_dict({**cfg.to_dict(), **overrides})
    return cfg


def _fail(err, code, stderr, status):
    payload = {"error": {"code": code, "message": str(err)}}
    if isinstance(err, AttriscoreError):
        payload["error"] = to_jsonable(err.to_dict())
    stderr.write(json.dumps(payload, separators=(",", ":")) + "\n")
    return status


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.exit_code = 0
    try:
        cfg = _load_config(args)
        report = COMMANDS[args.command][0](args, cfg)
    except UsageError as exc:
        stderr.write(f"attriscore {args.command}: {exc}\n")
        return 2
    except AttriscoreError as exc:
        return _fail(exc, exc.code, stderr, 1)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        return _fail(exc, "cli.input", stderr, 1)
    emit(report, cfg.output, stdout)
    return args.exit_code


def data_path(*parts) -> str:
    """Path of a bundled fixture."""
    return os.fspath(resources.files("attriscore").joinpath("data").joinpath(*parts))


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

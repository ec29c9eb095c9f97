"""Causal attribution scores for query answers and binary classifiers."""

from .circuit import (DDBC, Circuit, CircuitBuilder, DecisionTree, TreeNode, binarize_dt, compile_dt,
                      load_circuit, load_tree, model_count, truth_table_count, validate_ddbc)
from .config import RunConfig
from .dbcause import (AttrCauseReport, CauseReport, actual_causes, attr_level_causes, cause_report,
                      minimal_null_change_sets, minimum_contingency, most_responsible_causes, responsibility)
from .errors import AttriscoreError
from .mlscore import (Empirical, FeatureSpace, GameFunction, Product, TabulatedClassifier, Uniform,
                      best_contingency, game_value, resp_global, resp_local, sat_count_identity, shap_all_bruteforce,
                      shap_bruteforce, shap_ddbc, shapley, shapley_values)
from .relcore import (NULL, Atom, BooleanQuery, DenialConstraint, RelationalInstance, Schema, Var, cq_to_dc,
                      dc_to_cq, eval_bcq, load_constraints, load_instance, load_query, minimal_witnesses,
                      parse_constraints, parse_query)
from .repair import (ConflictHypergraph, RepairSet, build_conflict_hypergraph, c_repairs, greedy_inc_degree,
                     inc_degree, min_hitting_set, s_repairs)

__version__ = "0.1.0"

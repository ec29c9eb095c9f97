"""
Generalized responsibility for classifiers
==========================================

A loan tree rejects (label 1) applicants with low income or low savings.
Resp asks how much a single feature's value matters, allowing a few other
features to be changed first.
"""
from attriscore import FeatureSpace, Uniform, best_contingency, load_tree, resp_local
from attriscore.cli import data_path
from attriscore.mlscore import load_distribution

tree = load_tree(data_path("loan_tree.json"))
space = FeatureSpace.of(tree)
e = {"Age": "young", "Income": "low", "Savings": "low"}
print("label:", tree(e))

###############################################################################
# Changing Income alone never flips the label since Savings is still low.

print("local, no contingency:", resp_local(tree, Uniform(space), e, "Income", {}))

###############################################################################
# Raising Savings first makes Income decisive half of the time.

print("local, Savings=high:", resp_local(tree, Uniform(space), e, "Income", {"Savings": "high"}))

for feature in space.features:
    best = best_contingency(tree, Uniform(space), e, feature)
    print(f"  {feature:8} Resp={best.score}  contingency={best.contingency}")

###############################################################################
# With an empirical distribution the expectation follows the sample.

empirical = load_distribution(space, data_path("loan_empirical.json"))
print("empirical:", best_contingency(tree, empirical, e, "Income"))

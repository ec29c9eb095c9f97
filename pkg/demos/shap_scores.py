"""
Shap scores on a circuit
========================

The game value of a feature set S is the expected label when the features
in S are pinned to the entity's values and the rest are drawn from the
distribution.  Shap is the Shapley value of that game.
"""
import time

import numpy as np

from attriscore import FeatureSpace, Uniform, load_circuit, sat_count_identity, shap_all_bruteforce, shap_ddbc
from attriscore import compile_dt, validate_ddbc
from attriscore.cli import data_path
from attriscore.generators import path_tree
from attriscore.mlscore import load_distribution

c = load_circuit(data_path("ddbc4.json"))
d = validate_ddbc(c)
space = FeatureSpace.of(c)
e = {"x1": 1, "x2": 0, "x3": 1, "x4": 1}

for dist in (Uniform(space), load_distribution(space, data_path("ddbc4_product.json"))):
    fast = shap_ddbc(d, dist, e)
    slow = shap_all_bruteforce(c, dist, e)
    print(dist.kind, {f: str(v) for f, v in fast.items()}, "agrees:", fast == slow)

###############################################################################
# Under the uniform distribution the scores sum to L(e) minus the fraction
# of positive entities, so the model count can be read off the scores.

print(sat_count_identity(d, e))

###############################################################################
# The circuit algorithm stays fast where brute force would need 2^n games.

t = path_tree(25)
big = compile_dt(t)
entity = {f: i % 2 for i, f in enumerate(t.features)}
start = time.perf_counter()
scores = shap_ddbc(big, Uniform(FeatureSpace.of(t)), entity)
print(f"25 features in {time.perf_counter() - start:.2f}s")
top = np.array([float(scores[f]) for f in t.features])
print("first five:", np.round(top[:5], 4), " sum:", sum(scores.values()))

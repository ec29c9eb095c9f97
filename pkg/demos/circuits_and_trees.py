"""
Decision trees as deterministic circuits
========================================

A decision tree over Boolean features compiles to a circuit whose AND gates
split variables and whose OR gates have disjoint children.  Such circuits
count their models in one bottom-up pass.
"""
import itertools

from attriscore import compile_dt, load_circuit, load_tree, model_count, truth_table_count, validate_ddbc
from attriscore.cli import data_path
from attriscore.errors import DeterminismViolation

tree = load_tree(data_path("tree7.json"))
d = compile_dt(tree)
print(f"tree nodes: {len(tree)}, circuit gates: {len(d.circuit)}")
print("models:", model_count(d), "truth table:", truth_table_count(d.circuit))

for bits in itertools.product((0, 1), repeat=3):
    e = dict(zip(tree.features, bits))
    assert tree(e) == d(e)

###############################################################################
# A monotone CNF is not deterministic: both disjuncts of a clause can hold.

cnf = load_circuit(data_path("monotone2cnf.json"))
try:
    validate_ddbc(cnf)
except DeterminismViolation as exc:
    print("rejected:", exc)
print("its model count by truth table:", truth_table_count(cnf))

###############################################################################
# The hand-built four-feature circuit passes and records why each OR gate
# is deterministic.

ok = validate_ddbc(load_circuit(data_path("ddbc4.json")))
print("certificates:", ok.certificate, "models:", model_count(ok))

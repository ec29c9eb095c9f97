"""
Which tuples make a query true?
===============================

A small instance with a unary relation S and a binary relation R.  The
query asks for an S-value that points through R to another S-value.
"""
from attriscore import actual_causes, eval_bcq, load_instance, load_query, minimal_witnesses
from attriscore.cli import data_path

db = load_instance(data_path("ex1"))
q = load_query(data_path("ex1.q"), db.schema)
print(q, "->", eval_bcq(db, q))

###############################################################################
# Minimal witnesses
# -----------------
# Every minimal sub-instance on which the query still holds.

for w in sorted(minimal_witnesses(db, q), key=sorted):
    print("  witness:", sorted(w))

###############################################################################
# Causes and responsibility
# -------------------------
# S:b sits in both witnesses, so deleting it alone kills the query.  The
# other causes need one more deletion first, which halves their score.

for c in actual_causes(db, q):
    kind = "counterfactual" if c.is_counterfactual else "actual"
    print(f"  {c.tuple_id:5} {kind:14} resp={c.responsibility}  contingency={sorted(c.contingency)}")

print("without S:b:", eval_bcq(db.without({"S:b"}), q))

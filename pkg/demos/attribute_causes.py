"""
Attribute values as causes
==========================

Instead of deleting tuples we overwrite single values with NULL.  A NULL
never joins and never matches a constant, so nulling the right positions
falsifies the query.
"""
from attriscore import attr_level_causes, load_instance, load_query, minimal_null_change_sets
from attriscore.cli import data_path
from attriscore.dbcause import position_label

db = load_instance(data_path("attr"))
q = load_query(data_path("attr.q"), db.schema)
print(q)
for tid in sorted(db.ids):
    print(" ", tid, db.fact(tid))

###############################################################################
# The minimal sets of positions whose nulling falsifies the query.

for s in sorted(minimal_null_change_sets(db, q), key=lambda s: (len(s), sorted(s))):
    print("  change set:", [position_label(p) for p in sorted(s)])

###############################################################################
# Each position's responsibility comes from the smallest change set
# containing it.

for cause in attr_level_causes(db, q):
    print(f"  {cause.label:6} resp={cause.responsibility}")

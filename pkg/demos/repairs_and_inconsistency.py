"""
Repairs of an inconsistent instance
===================================

Five one-tuple relations A..E and three denial constraints.  Each violated
constraint becomes a hyperedge over the tuples that together break it.
"""
from attriscore import build_conflict_hypergraph, c_repairs, greedy_inc_degree, inc_degree, s_repairs
from attriscore import load_constraints, load_instance
from attriscore.cli import data_path

db = load_instance(data_path("hyper"))
dcs = load_constraints(data_path("hyper.dc"), db.schema)
for dc in dcs:
    print(dc)

h = build_conflict_hypergraph(db, dcs)
print("hyperedges:", [sorted(e) for e in h.edges])

###############################################################################
# Subset repairs keep a maximal conflict-free set of tuples; cardinality
# repairs keep as many tuples as possible.

srep = s_repairs(db, dcs)
crep = c_repairs(db, dcs)
for r in sorted(srep, key=sorted):
    print("  S-repair:", sorted(r), "(also a C-repair)" if r in crep.repairs else "")

###############################################################################
# Inconsistency degree: the fewest deletions that restore consistency,
# as a fraction of the instance.  The greedy cover gives an upper bound.

print("inc-deg:", inc_degree(db, dcs), " greedy bound:", greedy_inc_degree(db, dcs))

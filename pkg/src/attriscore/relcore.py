"""Relational instances, conjunctive queries and denial constraints.

Queries are written Datalog style, one rule per line::

    Q :- S(x), R(x, y), S(y)      # a Boolean conjunctive query
    :- P(x), Q(x, y)              # a denial constraint (headless rule)

A term is a variable when it starts with ``?`` or is a bare lowercase
identifier whose first letter is one of ``u v w x y z`` (``x``, ``y1``,
``z_old``).  Every other bare word, number or quoted string is a constant;
quote a constant that would otherwise read as a variable (``P("x")``).  The
bare word ``NULL`` is the null constant, which equals nothing (not even itself).
"""

import csv
import os
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Union

from .config import MAX_TUPLES, WITNESS_CAP
from .errors import InstanceTooLarge, QuerySyntaxError, SchemaError, WitnessCapExceeded


class _Null:
    """The SQL-style null: never equal to anything, itself included."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NULL"

    def __reduce__(self):
        return (_Null, ())


NULL = _Null()


def render_value(value):
    return "NULL" if value is NULL else str(value)


# ---------------------------------------------------------------------------
# schema and instances


@dataclass(frozen=True)
class Schema:
    predicates: Mapping[str, int]
    attributes: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        for name, arity in self.predicates.items():
            if not isinstance(arity, int) or arity < 1:
                raise SchemaError(f"predicate {name!r} needs a positive arity", predicate=name)
        for name, attrs in self.attributes.items():
            if name not in self.predicates:
                raise SchemaError(f"attribute names given for unknown predicate {name!r}", predicate=name)
            if len(attrs) != self.predicates[name]:
                raise SchemaError(f"{name}: {len(attrs)} attribute names for arity {self.predicates[name]}",
                                  predicate=name)

    def arity(self, predicate):
        try:
            return self.predicates[predicate]
        except KeyError:
            raise SchemaError(f"unknown predicate {predicate!r}", predicate=predicate) from None

    def attribute_names(self, predicate):
        names = self.attributes.get(predicate)
        if names is None:
            return tuple(str(i + 1) for i in range(self.arity(predicate)))
        return tuple(names)


class Fact(NamedTuple):
    predicate: str
    values: tuple

    def __str__(self):
        return f"{self.predicate}({', '.join(render_value(v) for v in self.values)})"


class RelationalInstance:
    """A finite set of ground atoms, each under a stable tuple identifier.

    Instances are treated as immutable; the editing helpers return copies.
    """

    def __init__(self, schema: Schema, facts: Mapping[str, Fact]):
        self.schema = schema
        self._facts = {}
        seen = {}
        for tid, fact in facts.items():
            pred, values = fact.predicate, tuple(fact.values)
            if len(values) != schema.arity(pred):
                raise SchemaError(f"tuple {tid!r}: {pred} has arity {schema.arity(pred)}, got {len(values)} values",
                                  tuple_id=tid)
            if NULL not in values:
                key = (pred, values)
                if key in seen:
                    raise SchemaError(f"tuples {seen[key]!r} and {tid!r} are duplicates", tuple_id=tid)
                seen[key] = tid
            self._facts[str(tid)] = Fact(pred, values)
        self._by_pred = defaultdict(list)
        for tid in sorted(self._facts):
            self._by_pred[self._facts[tid].predicate].append(tid)

    @classmethod
    def from_facts(cls, facts: Iterable, schema: Optional[Schema] = None):
        """Build from ``(tuple_id, predicate, values)`` triples.

        Without a schema, arities are inferred from the facts themselves.
        """
        facts = [(str(tid), pred, tuple(values)) for tid, pred, values in facts]
        if schema is None:
            arities = {}
            for tid, pred, values in facts:
                if arities.setdefault(pred, len(values)) != len(values):
                    raise SchemaError(f"predicate {pred!r} used with two arities", predicate=pred)
            schema = Schema(arities)
        ids = [tid for tid, _, _ in facts]
        if len(set(ids)) != len(ids):
            raise SchemaError("tuple ids must be unique")
        return cls(schema, {tid: Fact(pred, values) for tid, pred, values in facts})

    @classmethod
    def from_relations(cls, relations: Mapping[str, Iterable], schema: Optional[Schema] = None):
        """Build from ``{predicate: [values, ...]}``; ids are ``Pred(v1,v2)``."""
        facts = []
        for pred, rows in relations.items():
            for values in rows:
                values = tuple(values)
                facts.append((f"{pred}({','.join(render_value(v) for v in values)})", pred, values))
        return cls.from_facts(facts, schema)

    def __len__(self):
        return len(self._facts)

    def __contains__(self, tid):
        return tid in self._facts

    def __iter__(self):
        return iter(sorted(self._facts))

    def __eq__(self, other):
        return isinstance(other, RelationalInstance) and self._facts == other._facts

    def __repr__(self):
        return f"RelationalInstance({len(self)} tuples)"

    @property
    def ids(self):
        return frozenset(self._facts)

    def fact(self, tid) -> Fact:
        return self._facts[tid]

    def relation(self, predicate):
        return [(tid, self._facts[tid].values) for tid in self._by_pred.get(predicate, ())]

    def relation_size(self, predicate):
        return len(self._by_pred.get(predicate, ()))

    def restrict(self, ids):
        ids = set(ids)
        return RelationalInstance(self.schema, {t: f for t, f in self._facts.items() if t in ids})

    def without(self, ids):
        ids = set(ids)
        return RelationalInstance(self.schema, {t: f for t, f in self._facts.items() if t not in ids})

    def with_values(self, changes: Mapping):
        """Copy with ``{(tuple_id, position): value}`` applied; positions are 1-based."""
        facts = dict(self._facts)
        for (tid, pos), value in changes.items():
            pred, values = facts[tid]
            values = list(values)
            values[pos - 1] = value
            facts[tid] = Fact(pred, tuple(values))
        return RelationalInstance(self.schema, facts)


def load_instance(directory, max_tuples=MAX_TUPLES) -> RelationalInstance:
    """Read every ``*.csv`` in ``directory`` as one relation.

    The file stem names the predicate and the header row names attributes.
    A leading ``#id`` column supplies tuple ids; otherwise ids are
    ``pred:row`` with rows counted from 1.  A cell holding ``NULL`` is the
    null constant.
    """
    arities, attributes, facts = {}, {}, []
    names = sorted(n for n in os.listdir(directory) if n.endswith(".csv"))
    for name in names:
        pred = name[: -len(".csv")]
        with open(os.path.join(directory, name), newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise SchemaError(f"{name}: missing header row", predicate=pred)
        header = [h.strip() for h in rows[0]]
        has_ids = bool(header) and header[0] == "#id"
        attrs = header[1:] if has_ids else header
        arities[pred] = len(attrs)
        attributes[pred] = tuple(attrs)
        for i, row in enumerate(rows[1:], start=1):
            if not row or all(not c.strip() for c in row):
                continue
            cells = [c.strip() for c in row]
            tid = cells[0] if has_ids else f"{pred}:{i}"
            values = tuple(NULL if c == "NULL" else c for c in (cells[1:] if has_ids else cells))
            facts.append((tid, pred, values))
            if len(facts) > max_tuples:
                raise InstanceTooLarge(f"instance exceeds {max_tuples} tuples", cap=max_tuples)
    return RelationalInstance.from_facts(facts, Schema(arities, attributes))


# ---------------------------------------------------------------------------
# queries


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


Term = Union[Var, str, _Null]


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: tuple

    def __str__(self):
        return f"{self.predicate}({', '.join(_render_term(t) for t in self.terms)})"

    @property
    def variables(self):
        return [t for t in self.terms if isinstance(t, Var)]


def _render_term(term):
    if isinstance(term, Var):
        return term.name
    if term is NULL:
        return "NULL"
    if _is_variable_word(term) or not re.fullmatch(r"[A-Za-z0-9_.\-]+", term) or term == "NULL":
        return '"' + term.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return term


@dataclass(frozen=True)
class BooleanQuery:
    """``∃x̄ (A1 ∧ … ∧ Am)`` with every variable existentially bound."""

    atoms: tuple
    name: str = "Q"

    def __post_init__(self):
        if not self.atoms:
            raise QuerySyntaxError("a query needs at least one atom")

    def __str__(self):
        return f"{self.name} :- " + ", ".join(str(a) for a in self.atoms)

    @property
    def variables(self):
        seen = {}
        for atom in self.atoms:
            for v in atom.variables:
                seen.setdefault(v, None)
        return list(seen)

    @property
    def predicates(self):
        return {a.predicate for a in self.atoms}


@dataclass(frozen=True)
class DenialConstraint:
    """``¬∃x̄ (A1 ∧ … ∧ Am)``: the join of the atoms is forbidden."""

    atoms: tuple

    def __post_init__(self):
        if not self.atoms:
            raise QuerySyntaxError("a denial constraint needs at least one atom")

    def __str__(self):
        return ":- " + ", ".join(str(a) for a in self.atoms)


def cq_to_dc(query: BooleanQuery) -> DenialConstraint:
    return DenialConstraint(query.atoms)


def dc_to_cq(constraint: DenialConstraint, name="Q") -> BooleanQuery:
    return BooleanQuery(constraint.atoms, name)


def as_query(q) -> BooleanQuery:
    return dc_to_cq(q) if isinstance(q, DenialConstraint) else q


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<neck>:-)
  | (?P<punct>[(),.])
  | (?P<string>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_']*)
  | (?P<word>[A-Za-z0-9_][A-Za-z0-9_'\-]*)
    """,
    re.VERBOSE,
)


def _is_variable_word(word):
    return bool(re.fullmatch(r"[u-z][A-Za-z0-9_']*", word))


def _tokenize(line, lineno):
    pos, tokens = 0, []
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            raise QuerySyntaxError(f"line {lineno}: unexpected character {line[pos]!r}", pos, line)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append((kind, m.group(), m.start()))
        pos = m.end()
    return tokens


class _RuleParser:
    def __init__(self, line, lineno):
        self.line = line
        self.lineno = lineno
        self.tokens = _tokenize(line, lineno)
        self.i = 0

    def error(self, message, pos=None):
        if pos is None:
            pos = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.line)
        return QuerySyntaxError(f"line {self.lineno}: {message}", pos, self.line)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.line))

    def take(self, kind, text=None):
        tok = self.peek()
        if tok[0] != kind or (text is not None and tok[1] != text):
            want = text or kind
            got = "end of line" if tok[0] is None else repr(tok[1])
            raise self.error(f"expected {want}, got {got}")
        self.i += 1
        return tok

    def rule(self):
        head = None
        if self.peek()[0] == "word":
            head = self.take("word")[1]
        self.take("neck")
        atoms = [self.atom()]
        while self.peek()[1] == ",":
            self.take("punct", ",")
            atoms.append(self.atom())
        if self.peek()[1] == ".":
            self.take("punct", ".")
        if self.peek()[0] is not None:
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return head, atoms

    def atom(self):
        kind, pred, pos = self.take("word")
        self.take("punct", "(")
        terms = [self.term()]
        while self.peek()[1] == ",":
            self.take("punct", ",")
            terms.append(self.term())
        self.take("punct", ")")
        return Atom(pred, tuple(terms)), pos

    def term(self):
        kind, text, pos = self.peek()
        if kind == "var":
            self.i += 1
            return Var(text[1:])
        if kind == "string":
            self.i += 1
            return re.sub(r"\\(.)", r"\1", text[1:-1])
        if kind == "word":
            self.i += 1
            if text == "NULL":
                return NULL
            return Var(text) if _is_variable_word(text) else text
        raise self.error("expected a variable or constant")


def _check_atoms(parser, atoms, schema):
    if schema is None:
        return
    for atom, pos in atoms:
        if atom.predicate not in schema.predicates:
            raise parser.error(f"unknown predicate {atom.predicate!r}", pos)
        arity = schema.predicates[atom.predicate]
        if len(atom.terms) != arity:
            raise parser.error(f"{atom.predicate} has arity {arity}, used with {len(atom.terms)} terms", pos)


def _rules(text, schema):
    for lineno, line in enumerate(text.splitlines(), start=1):
        parser = _RuleParser(line, lineno)
        if not parser.tokens:
            continue
        head, atoms = parser.rule()
        _check_atoms(parser, atoms, schema)
        yield head, tuple(a for a, _ in atoms)


def parse_program(text, schema: Optional[Schema] = None):
    """Parse every rule; headed rules become queries, headless ones constraints."""
    out = []
    for head, atoms in _rules(text, schema):
        out.append(BooleanQuery(atoms, head) if head is not None else DenialConstraint(atoms))
    return out


def parse_query(text, schema: Optional[Schema] = None) -> BooleanQuery:
    rules = parse_program(text, schema)
    if len(rules) != 1:
        raise QuerySyntaxError(f"expected exactly one query, found {len(rules)}")
    return as_query(rules[0])


def parse_constraints(text, schema: Optional[Schema] = None):
    """A set of denial constraints; headed rules are read as their negation."""
    return [r if isinstance(r, DenialConstraint) else cq_to_dc(r) for r in parse_program(text, schema)]


def load_query(path, schema=None) -> BooleanQuery:
    with open(path, encoding="utf-8") as fh:
        return parse_query(fh.read(), schema)


def load_constraints(path, schema=None):
    with open(path, encoding="utf-8") as fh:
        return parse_constraints(fh.read(), schema)


# ---------------------------------------------------------------------------
# evaluation


def _check_against(instance, atoms):
    for atom in atoms:
        arity = instance.schema.arity(atom.predicate)
        if arity != len(atom.terms):
            raise SchemaError(f"{atom.predicate} has arity {arity}, used with {len(atom.terms)} terms",
                              predicate=atom.predicate)


_UNBOUND = object()


def _matches(instance, atoms) -> Iterator[tuple]:
    """Backtracking join; yields the tuple id matched by each atom (query order).

    Atoms are joined in ascending order of relation size.  A null equals
    nothing, itself included: it fails a constant selection and any variable
    that occurs more than once, but may fill a variable used only once.
    """
    _check_against(instance, atoms)
    counts = Counter(t for a in atoms for t in a.terms if isinstance(t, Var))
    order = sorted(range(len(atoms)), key=lambda i: (instance.relation_size(atoms[i].predicate), i))
    chosen = [None] * len(atoms)

    def extend(k, binding):
        if k == len(order):
            yield tuple(chosen)
            return
        idx = order[k]
        atom = atoms[idx]
        for tid, values in instance.relation(atom.predicate):
            new = binding
            ok = True
            for term, value in zip(atom.terms, values):
                if value is NULL:
                    if isinstance(term, Var) and counts[term] == 1:
                        continue
                    ok = False
                    break
                if isinstance(term, Var):
                    bound = new.get(term, _UNBOUND)
                    if bound is _UNBOUND:
                        if new is binding:
                            new = dict(binding)
                        new[term] = value
                    elif bound != value:
                        ok = False
                        break
                elif term is NULL or term != value:
                    ok = False
                    break
            if ok:
                chosen[idx] = tid
                yield from extend(k + 1, new)

    yield from extend(0, {})


def eval_bcq(instance: RelationalInstance, query) -> bool:
    query = as_query(query)
    for _ in _matches(instance, query.atoms):
        return True
    return False


def minimal_witnesses(instance: RelationalInstance, query, cap=WITNESS_CAP) -> frozenset:
    """All subset-minimal sets of tuple ids that make ``query`` true.

    Raises WitnessCapExceeded once more than ``cap`` satisfying assignments
    have been enumerated.
    """
    query = as_query(query)
    images = set()
    for n, match in enumerate(_matches(instance, query.atoms), start=1):
        if n > cap:
            raise WitnessCapExceeded(f"more than {cap} satisfying assignments", cap=cap)
        images.add(frozenset(match))
    return minimal_sets(images)


def minimal_sets(sets) -> frozenset:
    """Keep only the members with no proper subset in the family."""
    kept = []
    for s in sorted(set(sets), key=lambda s: (len(s), sorted(s))):
        if not any(k <= s for k in kept):
            kept.append(s)
    return frozenset(kept)


def sorted_sets(sets):
    """Deterministic listing: by size, then lexicographically by sorted ids."""
    return [sorted(s) for s in sorted(sets, key=lambda s: (len(s), sorted(s)))]

"""Exception hierarchy.

Every error carries a module-qualified ``code`` so the command-line front end
can emit structured JSON without guessing where a failure came from.
"""


class AttriscoreError(Exception):
    code = "attriscore.error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        out = {"code": self.code, "message": self.message}
        out.update({k: _jsonable(v) for k, v in self.details.items()})
        return out


def _jsonable(value):
    if isinstance(value, (frozenset, set)):
        return sorted(_jsonable(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


class CapExceeded(AttriscoreError):
    """A configured enumeration budget was hit before the answer was known."""

    code = "attriscore.cap_exceeded"


# relcore
class QuerySyntaxError(AttriscoreError):
    code = "relcore.syntax"

    def __init__(self, message, position=None, text=None):
        super().__init__(message, position=position)
        self.position = position
        self.text = text

    def __str__(self):
        if self.position is None:
            return self.message
        return f"{self.message} (at column {self.position + 1})"


class SchemaError(AttriscoreError):
    code = "relcore.schema"


class WitnessCapExceeded(CapExceeded):
    code = "relcore.witness_cap"


class InstanceTooLarge(CapExceeded):
    code = "relcore.instance_too_large"


# repair
class MalformedHypergraph(AttriscoreError):
    code = "repair.malformed"


class RepairCapExceeded(CapExceeded):
    code = "repair.repair_cap"


class HittingSetAborted(CapExceeded):
    code = "repair.exact_search_aborted"


class EmptyInstance(AttriscoreError):
    code = "repair.empty_instance"


# dbcause
class NothingToExplain(AttriscoreError):
    code = "dbcause.nothing_to_explain"


# circuit
class CircuitError(AttriscoreError):
    code = "circuit.malformed"


class MissingFeatureValue(AttriscoreError):
    code = "circuit.missing_feature"


class DecomposabilityViolation(AttriscoreError):
    code = "circuit.decomposability"


class DeterminismViolation(AttriscoreError):
    code = "circuit.determinism"


class DeterminismCheckTooLarge(CapExceeded):
    code = "circuit.determinism_too_large"


class UnvalidatedCircuit(AttriscoreError):
    code = "circuit.unvalidated"


class TreeError(AttriscoreError):
    code = "circuit.tree"


# mlscore
class ZeroProbabilityCondition(AttriscoreError):
    code = "mlscore.zero_probability"


class PreconditionViolation(AttriscoreError):
    code = "mlscore.precondition"


class UnsupportedDistribution(AttriscoreError):
    code = "mlscore.unsupported_distribution"


class ShapCapExceeded(CapExceeded):
    code = "mlscore.shap_cap"


class ContingencySearchCapExceeded(CapExceeded):
    """Carries the best score seen before the candidate budget ran out."""

    code = "mlscore.contingency_cap"


# cli
class ConfigError(AttriscoreError):
    code = "cli.config"

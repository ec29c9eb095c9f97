"""Run-time caps shared by the library entry points and the CLI."""

import json
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError

MAX_TUPLES = 5_000
WITNESS_CAP = 10**6
REPAIR_CAP = 10**5
HITTING_SET_NODES = 10**7
DETERMINISM_BUDGET = 2**20
MAX_GAMMA = 4
MAX_CANDIDATES = 10**6
SHAP_BRUTE_FEATURES = 20


@dataclass(frozen=True)
class RunConfig:
    max_tuples: int = MAX_TUPLES
    witness_cap: int = WITNESS_CAP
    repair_cap: int = REPAIR_CAP
    hitting_set_nodes: int = HITTING_SET_NODES
    determinism_budget: int = DETERMINISM_BUDGET
    max_gamma: int = MAX_GAMMA
    max_candidates: int = MAX_CANDIDATES
    shap_brute_features: int = SHAP_BRUTE_FEATURES
    trust_determinism: bool = False
    output: str = "json"
    tie_break: str = "lexicographic"
    seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type is int and f.name != "seed":
                if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
                    raise ConfigError(f"cap {f.name!r} must be a positive integer", key=f.name)
        if self.output not in ("json", "table"):
            raise ConfigError("output must be 'json' or 'table'", key="output")
        if self.tie_break != "lexicographic":
            raise ConfigError("only the lexicographic tie-break is supported", key="tie_break")

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}", keys=unknown)
        return cls(**data)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(data)

    def to_dict(self):
        return asdict(self)

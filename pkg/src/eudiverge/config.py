"""Experiment configuration: a JSON file, optionally overridden by CLI flags.

Schema (every key optional; defaults shown)::

    {
      "k": 2,
      "evidence": {"0": 0, "1": 1},
      "utility": {"label": "UNBOUNDED_ID", "scale": "1", "offset": "0"},
      "n_max": 10000,
      "j_max": 50,
      "budgets": {"eval": 1000000, "search": 1000000, "steps": 1000000},
      "checkpoints": [100, 1000, 10000],
      "dominance_x_max": 200,
      "min_passing": 3,
      "workers": 1,
      "fixedpoint": {"a": 1, "b": 7, "probes": [0, 1, 2, 3], "limit": 100000},
      "out": "out"
    }

``budgets.eval`` bounds every run of phi_n(k) and of synthesized witnesses,
``budgets.search`` bounds the inverse-utility scan and ``budgets.steps``
bounds the partial-sum, dominance and fixed-point probe runs.  Evidence may
also be given as a list of ``[input, output]`` pairs.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError
from .priors import BUILTIN_UTILITIES, get_utility
from .smn import Evidence

DEFAULTS = {
    "k": 2,
    "evidence": {"0": 0, "1": 1},
    "utility": {"label": "UNBOUNDED_ID", "scale": "1", "offset": "0"},
    "n_max": 10000,
    "j_max": 50,
    "budgets": {"eval": 10**6, "search": 10**6, "steps": 10**6},
    "checkpoints": [100, 1000, 10000],
    "dominance_x_max": 200,
    "min_passing": 3,
    "workers": 1,
    "fixedpoint": {"a": 1, "b": 7, "probes": [0, 1, 2, 3], "limit": 100000},
    "out": "out",
}


@dataclass
class ExperimentConfig:
    k: int
    evidence: Evidence
    utility_label: str
    utility_scale: str
    utility_offset: str
    n_max: int
    j_max: int
    eval_budget: int
    search_budget: int
    step_budget: int
    checkpoints: list
    dominance_x_max: int
    min_passing: int
    workers: int
    fp_a: int
    fp_b: int
    fp_probes: list
    fp_limit: int
    out: Path
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def utility(self):
        return get_utility(self.utility_label, self.utility_scale, self.utility_offset)

    def canonical(self) -> dict:
        """Resolved settings, for echoing into reports (``out`` left out)."""
        d = copy.deepcopy(self.raw)
        d.pop("out", None)
        return d


def _merge(base, over):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key != "evidence":
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _natural(d, path, minimum=0):
    node = d
    for part in path:
        node = node[part]
    if not isinstance(node, int) or isinstance(node, bool) or node < minimum:
        name = ".".join(path)
        raise ConfigError(f"{name}: expected an integer >= {minimum}, got {node!r}")
    return node


def _evidence(raw):
    try:
        if isinstance(raw, dict):
            pairs = {int(i): v for i, v in raw.items()}
        else:
            pairs = {}
            for i, v in raw:
                if i in pairs:
                    raise ConfigError(f"evidence: input {i} listed twice")
                pairs[i] = v
        return Evidence(pairs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"evidence: {exc}") from None


def build_config(overrides: dict = None, file_data: dict = None) -> ExperimentConfig:
    data = _merge(DEFAULTS, file_data or {})
    data = _merge(data, overrides or {})
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    k = _natural(data, ["k"])
    evidence = _evidence(data["evidence"])
    if k in evidence:
        raise ConfigError(f"k: probed input {k} must not be an evidence input")
    util = data["utility"]
    if util.get("label") not in BUILTIN_UTILITIES:
        raise ConfigError(
            f"utility.label: expected one of {sorted(BUILTIN_UTILITIES)}, got {util.get('label')!r}"
        )
    for key in ("scale", "offset"):
        try:
            Fraction(str(util.get(key, "1" if key == "scale" else "0")))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"utility.{key}: not a rational like '3/2': {util.get(key)!r}") from None
    if Fraction(str(util.get("scale", "1"))) == 0:
        raise ConfigError("utility.scale: must be nonzero")
    for b in ("eval", "search", "steps"):
        _natural(data, ["budgets", b], minimum=1)
    cps = data["checkpoints"]
    if not isinstance(cps, list) or not all(isinstance(c, int) and c >= 0 for c in cps):
        raise ConfigError(f"checkpoints: expected a list of naturals, got {cps!r}")
    probes = data["fixedpoint"]["probes"]
    if not isinstance(probes, list) or not all(isinstance(c, int) and c >= 0 for c in probes):
        raise ConfigError(f"fixedpoint.probes: expected a list of naturals, got {probes!r}")

    return ExperimentConfig(
        k=k,
        evidence=evidence,
        utility_label=util["label"],
        utility_scale=str(util.get("scale", "1")),
        utility_offset=str(util.get("offset", "0")),
        n_max=_natural(data, ["n_max"]),
        j_max=_natural(data, ["j_max"]),
        eval_budget=data["budgets"]["eval"],
        search_budget=data["budgets"]["search"],
        step_budget=data["budgets"]["steps"],
        checkpoints=sorted(cps),
        dominance_x_max=_natural(data, ["dominance_x_max"]),
        min_passing=_natural(data, ["min_passing"]),
        workers=_natural(data, ["workers"], minimum=1),
        fp_a=_natural(data, ["fixedpoint", "a"]),
        fp_b=_natural(data, ["fixedpoint", "b"]),
        fp_probes=probes,
        fp_limit=_natural(data, ["fixedpoint", "limit"], minimum=1),
        out=Path(data["out"]),
        raw=data,
    )


def load_config(path=None, overrides: dict = None) -> ExperimentConfig:
    file_data = None
    if path is not None:
        path = Path(path)
        try:
            file_data = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(file_data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    return build_config(overrides, file_data)

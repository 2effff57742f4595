from cqp.semantics.config import (
    Component,
    Config,
    ProbConfig,
    canonicalize,
    config_key,
    format_ket,
    normalize_procs,
)
from cqp.semantics.explore import (
    Edge,
    Lts,
    StateNode,
    explore,
    final_output_density,
    initial_config,
    input_choice_tags,
)
from cqp.semantics.export import lts_to_dot, lts_to_json, lts_to_json_str, LTS_SCHEMA
from cqp.semantics.labels import TAU, InputLabel, Label, OutputLabel, ProbStep, Tau
from cqp.semantics.policy import InputPolicy, PolicyState
from cqp.semantics.step import Semantics, Step, eval_bit

__all__ = [
    "Component",
    "Config",
    "Edge",
    "InputLabel",
    "InputPolicy",
    "LTS_SCHEMA",
    "Label",
    "Lts",
    "OutputLabel",
    "PolicyState",
    "ProbConfig",
    "ProbStep",
    "Semantics",
    "StateNode",
    "Step",
    "TAU",
    "Tau",
    "canonicalize",
    "config_key",
    "eval_bit",
    "explore",
    "final_output_density",
    "format_ket",
    "initial_config",
    "input_choice_tags",
    "lts_to_dot",
    "lts_to_json",
    "lts_to_json_str",
    "normalize_procs",
]

"""LTS serialization: JSON (schema below) and Graphviz DOT."""

from __future__ import annotations

import json

from cqp.lang.ast import pretty_term
from cqp.semantics.explore import Lts
from cqp.semantics.labels import InputLabel, OutputLabel, ProbStep, Tau

LTS_SCHEMA = {
    "type": "object",
    "required": ["states", "transitions", "initial"],
    "properties": {
        "states": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind", "term", "mixture"],
                "properties": {
                    "id": {"type": "integer"},
                    "kind": {"enum": ["n", "p"]},
                    "term": {"type": "string"},
                    "mixture": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["weight", "state", "values"],
                            "properties": {
                                "weight": {"type": "number"},
                                "state": {
                                    "type": "array",
                                    "items": {
                                        "type": "array",
                                        "items": {"type": "number"},
                                        "minItems": 2,
                                        "maxItems": 2,
                                    },
                                },
                                "values": {"type": "array", "items": {"type": "integer"}},
                            },
                        },
                    },
                    "qubits": {"type": "array", "items": {"type": "string"}},
                    "owned": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
        "transitions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["src", "label", "dst"],
                "properties": {
                    "src": {"type": "integer"},
                    "dst": {"type": "integer"},
                    "label": {
                        "type": "object",
                        "required": ["type"],
                        "properties": {
                            "type": {"enum": ["tau", "output", "input", "prob"]},
                            "channel": {"type": "string"},
                            "values": {"type": "array"},
                            "qubits": {"type": "array", "items": {"type": "string"}},
                            "prob": {"type": "number"},
                        },
                    },
                },
            },
        },
        "initial": {"type": "integer"},
        "truncated": {"type": "boolean"},
    },
}


def label_to_json(label) -> dict:
    if isinstance(label, Tau):
        return {"type": "tau"}
    if isinstance(label, OutputLabel):
        return {
            "type": "output",
            "channel": label.channel,
            "values": [list(v) for v in sorted(label.values)],
            "qubits": list(label.qubits),
        }
    if isinstance(label, InputLabel):
        return {"type": "input", "channel": label.channel, "values": list(label.values)}
    if isinstance(label, ProbStep):
        return {"type": "prob", "prob": label.prob}
    raise TypeError(f"unknown label {label!r}")


def lts_to_json(lts: Lts) -> dict:
    states = []
    for node in lts.states:
        if node.kind == "p":
            states.append({"id": node.id, "kind": "p", "term": "<distribution>", "mixture": []})
            continue
        cfg = node.config
        mixture = []
        for c in cfg.components:
            mixture.append(
                {
                    "weight": c.weight,
                    "state": [[float(a.real), float(a.imag)] for a in c.state.amps],
                    "values": list(c.values),
                }
            )
        states.append(
            {
                "id": node.id,
                "kind": "n",
                "term": pretty_term(cfg.term),
                "mixture": mixture,
                "qubits": list(cfg.qubits),
                "owned": sorted(cfg.owned),
            }
        )
    transitions = [
        {"src": e.src, "label": label_to_json(e.label), "dst": e.dst} for e in lts.edges
    ]
    return {
        "states": states,
        "transitions": transitions,
        "initial": lts.initial,
        "truncated": lts.truncated,
    }


def lts_to_json_str(lts: Lts, indent: int | None = 2) -> str:
    return json.dumps(lts_to_json(lts), indent=indent)


def lts_to_dot(lts: Lts) -> str:
    lines = ["digraph lts {", "  rankdir=LR;", '  node [fontname="monospace"];']
    for node in lts.states:
        shape = "circle" if node.kind == "n" else "diamond"
        extra = ' peripheries=2' if node.id == lts.initial else ""
        lines.append(f'  s{node.id} [label="{node.id}" shape={shape}{extra}];')
    for e in lts.edges:
        text = str(e.label).replace('"', '\\"')
        lines.append(f'  s{e.src} -> s{e.dst} [label="{text}"];')
    lines.append("}")
    return "\n".join(lines)

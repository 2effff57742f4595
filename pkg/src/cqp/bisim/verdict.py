"""Equivalence verdicts with witnesses, and their JSON form."""

from __future__ import annotations

from dataclasses import dataclass, field

from cqp.bisim.partition import Partition
from cqp.qstate.state import DensityMatrix

VERDICT_SCHEMA = {
    "type": "object",
    "required": ["equivalent", "sigma_results", "caveats"],
    "properties": {
        "equivalent": {"type": "boolean"},
        "sigma_results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["input", "equivalent"],
                "properties": {
                    "input": {"type": "string"},
                    "equivalent": {"type": "boolean"},
                    "witness": {"type": "object"},
                },
            },
        },
        "caveats": {"type": "array", "items": {"type": "string"}},
    },
}


@dataclass(frozen=True)
class Witness:
    kind: str
    states: tuple[int, int]
    label: str = ""
    detail: str = ""
    rho_left: DensityMatrix | None = None
    rho_right: DensityMatrix | None = None
    mass_left: dict | None = None
    mass_right: dict | None = None

    def to_json(self) -> dict:
        out: dict = {
            "kind": self.kind,
            "states": list(self.states),
            "label": self.label,
            "detail": self.detail,
        }
        if self.rho_left is not None:
            out["rho_left"] = _matrix_json(self.rho_left)
        if self.rho_right is not None:
            out["rho_right"] = _matrix_json(self.rho_right)
        if self.mass_left is not None:
            out["mass_left"] = {str(k): v for k, v in self.mass_left.items()}
            out["mass_right"] = {str(k): v for k, v in (self.mass_right or {}).items()}
        return out

    def __str__(self) -> str:
        parts = [f"{self.kind} at states {self.states}"]
        if self.label:
            parts.append(f"label {self.label}")
        if self.detail:
            parts.append(self.detail)
        return "; ".join(parts)


def _matrix_json(rho: DensityMatrix) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in rho.entries]


def witness_from_failure(failure) -> Witness:
    return Witness(
        kind=failure.kind,
        states=(failure.s, failure.t),
        label=failure.label,
        detail=failure.detail,
        rho_left=failure.rho_left,
        rho_right=failure.rho_right,
        mass_left=failure.mass_left,
        mass_right=failure.mass_right,
    )


@dataclass
class SigmaResult:
    input: str
    equivalent: bool
    witness: Witness | None = None
    lts: object = None  # union Lts, for witness replay
    initial_pair: tuple[int, int] | None = None
    partition: Partition | None = None

    def to_json(self) -> dict:
        out = {"input": self.input, "equivalent": self.equivalent}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


@dataclass
class Verdict:
    equivalent: bool
    partition: Partition | None = None
    witness: Witness | None = None
    caveats: list[str] = field(default_factory=list)
    sigma_results: list[SigmaResult] = field(default_factory=list)

    def __post_init__(self):
        if not self.equivalent and self.witness is None:
            raise ValueError("an inequivalence verdict needs a witness")
        if self.equivalent and self.witness is not None:
            raise ValueError("an equivalence verdict cannot carry a witness")

    def to_json(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "sigma_results": [r.to_json() for r in self.sigma_results],
            "caveats": list(self.caveats),
        }

"""Bounded exhaustive exploration of configurations into a finite LTS.

States are canonical configurations (kind "n") or probability distributions
(kind "p"); a "p" state's only out-edges are its probabilistic steps, whose
probabilities sum to one. Exploration is breadth-first over every rule
applicable at every parallel position, so all interleavings are covered.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from cqp.errors import CqpSemanticsError
from cqp.lang.ast import (
    BitLit,
    ChanRef,
    ChannelType,
    Invoke,
    Program,
    QbitType,
    QubitRef,
)
from cqp.qstate.state import DensityMatrix, QuantumState
from cqp.semantics.config import (
    Component,
    Config,
    ProbConfig,
    canonicalize,
    config_key,
    normalize_procs,
    prob_key,
)
from cqp.semantics.labels import Label, OutputLabel, ProbStep
from cqp.semantics.policy import InputPolicy
from cqp.semantics.step import Semantics, Step

DEFAULT_MAX_STATES = 20000


@dataclass(frozen=True)
class StateNode:
    id: int
    kind: str  # "n" | "p"
    config: Config | None = None
    branches: tuple[tuple[float, tuple[int, ...], int], ...] | None = None  # p-states


@dataclass(frozen=True)
class Edge:
    src: int
    label: Label
    dst: int
    policy_choice: tuple[str, ...] = ()


@dataclass
class Lts:
    states: list[StateNode]
    edges: list[Edge]
    initial: int
    truncated: bool = False
    _out: dict[int, list[Edge]] = field(default_factory=dict, repr=False)

    def out_edges(self, sid: int) -> list[Edge]:
        if not self._out and self.edges:
            for e in self.edges:
                self._out.setdefault(e.src, []).append(e)
        return self._out.get(sid, [])

    def state(self, sid: int) -> StateNode:
        return self.states[sid]

    def kind(self, sid: int) -> str:
        return self.states[sid].kind

    def distribution(self, edge: Edge) -> list[tuple[float, tuple[int, ...], int]]:
        """Resolve the target of a labelled edge as a branch distribution."""
        node = self.states[edge.dst]
        if node.kind == "p":
            return list(node.branches)
        tag: tuple[int, ...] = ()
        if isinstance(edge.label, OutputLabel) and len(edge.label.values) == 1:
            tag = next(iter(edge.label.values))
        return [(1.0, tag, edge.dst)]


def initial_config(
    program: Program,
    entry: str,
    channel_args: dict[str, str] | None = None,
    *,
    bit_args: dict[str, int] | None = None,
    qubit_args: dict[str, str] | None = None,
    state: QuantumState | None = None,
    owned: frozenset[str] = frozenset(),
) -> tuple[Config, frozenset[str]]:
    """Instantiate an entry process; returns the configuration and its
    observable interface (the entry's channel parameters)."""
    try:
        d = program.definition(entry)
    except KeyError:
        raise CqpSemanticsError(f"unknown entry process {entry!r}") from None
    channel_args = dict(channel_args or {})
    bit_args = dict(bit_args or {})
    qubit_args = dict(qubit_args or {})
    args = []
    interface = []
    for pname, pty in d.params:
        if isinstance(pty, ChannelType):
            chan = channel_args.pop(pname, pname)
            args.append(ChanRef(chan))
            interface.append(chan)
        elif isinstance(pty, QbitType):
            if pname not in qubit_args:
                raise CqpSemanticsError(f"qubit parameter {pname!r} needs an argument")
            args.append(QubitRef(qubit_args.pop(pname)))
        else:
            if pname not in bit_args:
                raise CqpSemanticsError(f"bit parameter {pname!r} needs an argument")
            args.append(BitLit(bit_args.pop(pname)))
    leftovers = set(channel_args) | set(bit_args) | set(qubit_args)
    if leftovers:
        raise CqpSemanticsError(f"arguments {sorted(leftovers)} do not match parameters of {entry}")
    qstate = state if state is not None else QuantumState.empty()
    comps = (Component(1.0, qstate, ()),)
    procs, private = normalize_procs(program, [Invoke(entry, tuple(args))], frozenset())
    cfg = Config(comps, (), procs, frozenset(owned), private)
    return cfg, frozenset(interface)


def explore(
    program: Program,
    entry: str | None = None,
    policy: InputPolicy | None = None,
    *,
    initial: Config | None = None,
    interface: frozenset[str] | None = None,
    channel_args: dict[str, str] | None = None,
    bit_args: dict[str, int] | None = None,
    max_states: int = DEFAULT_MAX_STATES,
    open_system: bool = False,
    collapse_measurements: bool = False,
    validate: bool = False,
) -> Lts:
    """BFS over canonical configurations, complete up to `max_states`."""
    policy = policy or InputPolicy.tomo()
    if initial is None:
        if entry is None:
            raise CqpSemanticsError("explore needs an entry process or an initial configuration")
        initial, auto_interface = initial_config(
            program, entry, channel_args, bit_args=bit_args
        )
        interface = auto_interface if interface is None else interface
    if interface is None:
        raise CqpSemanticsError("an explicit initial configuration needs an interface set")

    sem = Semantics(program, interface, policy, open_system, collapse_measurements)
    states: list[StateNode] = []
    edges: list[Edge] = []
    seen: dict[tuple, int] = {}
    queue: list[int] = []
    truncated = False

    def intern_config(cfg: Config) -> int:
        canon = canonicalize(cfg, interface)
        if validate:
            canon.validate()
        key = ("n", config_key(canon))
        sid = seen.get(key)
        if sid is None:
            sid = len(states)
            seen[key] = sid
            states.append(StateNode(sid, "n", config=canon))
            queue.append(sid)
        return sid

    def intern_prob(pc: ProbConfig) -> int:
        branches = tuple(
            (p, tag, intern_config(cfg)) for p, tag, cfg in pc.branches
        )
        key = ("p", prob_key(branches))
        sid = seen.get(key)
        if sid is None:
            sid = len(states)
            seen[key] = sid
            states.append(StateNode(sid, "p", branches=branches))
            merged: dict[int, float] = {}
            for p, _, child in branches:
                merged[child] = merged.get(child, 0.0) + p
            for child, p in sorted(merged.items()):
                edges.append(Edge(sid, ProbStep(p), child))
        return sid

    intern_config(initial)
    cursor = 0
    edge_seen: set[tuple] = set()
    while cursor < len(queue):
        sid = queue[cursor]
        cursor += 1
        node = states[sid]
        if node.kind != "n":
            continue
        if len(states) > max_states:
            truncated = True
            break
        for step in sem.transitions(node.config):
            if isinstance(step.target, ProbConfig):
                dst = intern_prob(step.target)
            else:
                dst = intern_config(step.target)
            dedup = (sid, step.label, dst, step.policy_choice)
            if dedup not in edge_seen:
                edge_seen.add(dedup)
                edges.append(Edge(sid, step.label, dst, step.policy_choice))

    return Lts(states=states, edges=edges, initial=0, truncated=truncated)


def input_choice_tags(lts: Lts) -> dict[int, tuple[str, ...]]:
    """Map each state to the environment input choices on its history.

    Raises if a state is reachable under two different choice histories
    (cannot happen when policy states are pairwise distinct).
    """
    tags: dict[int, tuple[str, ...]] = {lts.initial: ()}
    work = [lts.initial]
    while work:
        sid = work.pop()
        for e in lts.out_edges(sid):
            t = tags[sid] + e.policy_choice
            if e.dst in tags:
                if tags[e.dst] != t:
                    raise CqpSemanticsError(
                        f"state {e.dst} reachable under different input choices"
                    )
                continue
            tags[e.dst] = t
            work.append(e.dst)
    return tags


def final_output_density(
    lts: Lts, channel: str, tol: float = 1e-9
) -> list[tuple[tuple[str, ...], DensityMatrix]]:
    """Density of the single qubit each run emits on `channel`, per input choice.

    Every maximal path must emit exactly one single-qubit output on the
    channel; the density is the mixture density of the sent qubit at the
    emitting configuration.
    """
    if lts.truncated:
        raise CqpSemanticsError("exploration was truncated; densities would be partial")

    def is_final_output(e: Edge) -> bool:
        return isinstance(e.label, OutputLabel) and e.label.channel == channel

    # Completeness: no terminal state reachable before the output.
    reach_no_out = {lts.initial}
    work = [lts.initial]
    while work:
        sid = work.pop()
        outs = lts.out_edges(sid)
        if not outs:
            raise CqpSemanticsError(f"a maximal path never outputs on {channel!r}")
        for e in outs:
            if is_final_output(e):
                continue
            if e.dst not in reach_no_out:
                reach_no_out.add(e.dst)
                work.append(e.dst)

    # Uniqueness: no second output reachable after the first.
    post = set()
    for sid in reach_no_out:
        for e in lts.out_edges(sid):
            if is_final_output(e):
                post.add(e.dst)
    seen_post = set(post)
    work = list(post)
    while work:
        sid = work.pop()
        for e in lts.out_edges(sid):
            if is_final_output(e):
                raise CqpSemanticsError(f"a path outputs twice on {channel!r}")
            if e.dst not in seen_post:
                seen_post.add(e.dst)
                work.append(e.dst)

    tags = input_choice_tags(lts)
    grouped: dict[tuple[str, ...], DensityMatrix] = {}
    for sid in sorted(reach_no_out):
        for e in lts.out_edges(sid):
            if not is_final_output(e):
                continue
            if len(e.label.qubits) != 1:
                raise CqpSemanticsError(f"output on {channel!r} is not a single qubit")
            cfg = lts.state(sid).config
            rho = cfg.density(e.label.qubits)
            tag = tags[sid]
            if tag in grouped:
                if not grouped[tag].close_to(rho, tol):
                    raise CqpSemanticsError(
                        f"interleavings disagree on the output density for input {tag}"
                    )
            else:
                grouped[tag] = rho
    return sorted(grouped.items())

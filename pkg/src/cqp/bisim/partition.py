"""Partitions of LTS states, the probabilistic transition function mu, and
weak tau-closure."""

from __future__ import annotations

from dataclasses import dataclass

from cqp.errors import CqpSemanticsError
from cqp.semantics.explore import Lts
from cqp.semantics.labels import ProbStep, Tau


@dataclass(frozen=True)
class Partition:
    blocks: tuple[frozenset[int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for b in self.blocks:
            if seen & b:
                raise CqpSemanticsError("partition blocks overlap")
            seen |= b

    def block_of(self) -> dict[int, int]:
        out = {}
        for i, b in enumerate(self.blocks):
            for s in b:
                out[s] = i
        return out

    def same_block(self, s: int, t: int) -> bool:
        for b in self.blocks:
            if s in b:
                return t in b
        return False


def mu(s: int, t: int, lts: Lts) -> float:
    """pi if s steps to t probabilistically; 1 if s = t and s is
    nondeterministic; 0 otherwise."""
    if lts.kind(s) == "p":
        total = 0.0
        for e in lts.out_edges(s):
            if isinstance(e.label, ProbStep) and e.dst == t:
                total += e.label.prob
        return total
    return 1.0 if s == t else 0.0


def mu_mass(s: int, block: frozenset[int], lts: Lts) -> float:
    """Total probabilistic mass from s into a class."""
    if lts.kind(s) == "p":
        return sum(
            e.label.prob
            for e in lts.out_edges(s)
            if isinstance(e.label, ProbStep) and e.dst in block
        )
    return 1.0 if s in block else 0.0


def weak_closure(lts: Lts, s: int) -> frozenset[int]:
    """States reachable from s by zero or more tau transitions, restricted to
    nondeterministic targets."""
    if lts.kind(s) != "n":
        raise CqpSemanticsError("weak closure is defined on nondeterministic states")
    out = {s}
    work = [s]
    while work:
        cur = work.pop()
        for e in lts.out_edges(cur):
            if isinstance(e.label, Tau) and lts.kind(e.dst) == "n" and e.dst not in out:
                out.add(e.dst)
                work.append(e.dst)
    return frozenset(out)


def all_weak_closures(lts: Lts) -> dict[int, frozenset[int]]:
    return {
        node.id: weak_closure(lts, node.id)
        for node in lts.states
        if node.kind == "n"
    }


def merge_lts(a: Lts, b: Lts) -> tuple[Lts, int]:
    """Disjoint union; returns the union and the id offset of b's states."""
    from dataclasses import replace

    offset = len(a.states)
    states = list(a.states)
    for node in b.states:
        branches = None
        if node.branches is not None:
            branches = tuple((p, tag, child + offset) for p, tag, child in node.branches)
        states.append(replace(node, id=node.id + offset, branches=branches))
    edges = list(a.edges) + [
        replace(e, src=e.src + offset, dst=e.dst + offset) for e in b.edges
    ]
    return (
        Lts(states=states, edges=edges, initial=a.initial, truncated=a.truncated or b.truncated),
        offset,
    )

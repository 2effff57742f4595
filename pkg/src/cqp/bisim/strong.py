"""Strong bisimilarity: every edge, tau and probabilistic steps included,
must be matched exactly into equal classes. Classic signature refinement."""

from __future__ import annotations

from cqp.bisim.partition import Partition
from cqp.bisim.verdict import Verdict, Witness
from cqp.semantics.explore import Lts


def _signature(lts: Lts, sid: int, block_of: dict[int, int]) -> frozenset:
    return frozenset(
        (e.label.match_key(), block_of[e.dst]) for e in lts.out_edges(sid)
    )


def coarsest_strong(lts: Lts) -> Partition:
    ids = [n.id for n in lts.states]
    blocks: list[frozenset[int]] = [frozenset(ids)]
    while True:
        block_of = {}
        for i, b in enumerate(blocks):
            for sid in b:
                block_of[sid] = i
        new_blocks: list[frozenset[int]] = []
        for b in blocks:
            groups: dict[frozenset, list[int]] = {}
            for sid in b:
                groups.setdefault(_signature(lts, sid, block_of), []).append(sid)
            new_blocks.extend(frozenset(g) for g in groups.values())
        if len(new_blocks) == len(blocks):
            return Partition(tuple(blocks))
        blocks = new_blocks


def check_strong_bisim(lts: Lts, s: int, t: int) -> Verdict:
    partition = coarsest_strong(lts)
    if partition.same_block(s, t):
        return Verdict(equivalent=True, partition=partition)
    block_of = partition.block_of()
    sig_s = _signature(lts, s, block_of)
    sig_t = _signature(lts, t, block_of)
    diff = sig_s ^ sig_t
    if diff:
        key, cls = sorted(diff, key=str)[0]
        detail = f"transition {key} into class {cls} is available on one side only"
    else:
        detail = "states separated through derivative classes"
    return Verdict(
        equivalent=False,
        partition=partition,
        witness=Witness("strong-mismatch", (s, t), detail=detail),
    )

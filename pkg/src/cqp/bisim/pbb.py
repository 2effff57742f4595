"""Probabilistic branching bisimilarity by partition refinement.

The coarsest equivalence is computed by whole-pass refinement: starting from
one block, a pass derives from every state's direct transitions the
"requirements" they impose (tau into another class; output with a channel,
value set and per-branch probability/environment-density/class profile;
input with a channel, values and target class), splits blocks by who can
weakly respond, and splits by probabilistic class-mass signatures. Passes
repeat until nothing changes; the result is verified to be a stable
fixpoint. Responses search the full weak tau-closure with the class
constraints of the written conditions, so no stuttering shortcut is assumed.

Environment densities are compared entrywise within a tolerance; for block
splitting they are keyed on a grid of the same width (the models this ships
with produce dyadic values far from any boundary).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from cqp.errors import CqpSemanticsError
from cqp.qstate.state import DensityMatrix
from cqp.semantics.explore import Lts
from cqp.semantics.labels import InputLabel, OutputLabel, ProbStep, Tau
from cqp.bisim.partition import Partition, all_weak_closures


@dataclass(frozen=True)
class Failure:
    """Why a pair of states is not related; `concrete` failures carry data an
    observer could exhibit (a label, matrices, probabilities), while a
    target-class failure points at the derivative pair to chase."""

    kind: str
    s: int
    t: int
    label: str = ""
    detail: str = ""
    rho_left: DensityMatrix | None = None
    rho_right: DensityMatrix | None = None
    mass_left: dict | None = None
    mass_right: dict | None = None
    next_pair: tuple[int, int] | None = None

    @property
    def concrete(self) -> bool:
        return self.kind != "target-class"


class PbbAnalysis:
    def __init__(self, lts: Lts, tol: float = 1e-9):
        self.lts = lts
        self.tol = tol
        self.closure = all_weak_closures(lts)
        self.n_states = [n.id for n in lts.states if n.kind == "n"]
        self.p_states = [n.id for n in lts.states if n.kind == "p"]
        self._rho: dict[int, DensityMatrix] = {}
        self._rho_key: dict[int, bytes] = {}
        # Partition-independent edge descriptors per nondeterministic state.
        self.desc: dict[int, list[tuple]] = {}
        for sid in self.n_states:
            ds = []
            for e in lts.out_edges(sid):
                if isinstance(e.label, Tau):
                    ds.append(("tau", e.dst))
                elif isinstance(e.label, OutputLabel):
                    branches = tuple(
                        (tag, self._prob_key(p), self.rho_key(child), child)
                        for p, tag, child in sorted(
                            lts.distribution(e), key=lambda b: b[1]
                        )
                    )
                    vkey = tuple(sorted(e.label.values))
                    ds.append(("out", e.label.channel, vkey, branches))
                elif isinstance(e.label, InputLabel):
                    ds.append(("in",) + e.label.match_key()[1:] + (e.dst,))
            self.desc[sid] = ds
        # Probabilistic mass per child state.
        self.mass: dict[int, dict[int, float]] = {}
        for sid in self.p_states:
            m: dict[int, float] = {}
            for e in lts.out_edges(sid):
                if isinstance(e.label, ProbStep):
                    m[e.dst] = m.get(e.dst, 0.0) + e.label.prob
            self.mass[sid] = m

    def _prob_key(self, p: float) -> int:
        return int(round(p / self.tol))

    def rho_env(self, sid: int) -> DensityMatrix:
        if sid not in self._rho:
            self._rho[sid] = self.lts.state(sid).config.rho_env()
        return self._rho[sid]

    def rho_key(self, sid: int) -> bytes:
        if sid not in self._rho_key:
            import numpy as np

            rho = self.rho_env(sid)
            v = np.round(rho.entries.reshape(-1).view(np.float64) / self.tol) + 0.0
            self._rho_key[sid] = (
                bytes([len(rho.qubits)]) + v.astype(np.int64).tobytes()
            )
        return self._rho_key[sid]

    # -- refinement ---------------------------------------------------------

    def requirement(self, d: tuple, block_of: dict[int, int], own_block: int):
        if d[0] == "tau":
            tgt = block_of[d[1]]
            return None if tgt == own_block else ("tau", tgt)
        if d[0] == "out":
            branches = tuple(
                (tag, pk, rk, block_of[child]) for tag, pk, rk, child in d[3]
            )
            return ("out", d[1], d[2], branches)
        if d[0] == "in":
            return ("in", d[1], d[2], block_of[d[3]])
        raise AssertionError(d)

    def responds_directly(self, t2: int, req: tuple, block_of: dict[int, int]) -> bool:
        for d in self.desc[t2]:
            if self.requirement(d, block_of, -1) == req:
                return True
            if req[0] == "tau" and d[0] == "tau" and block_of[d[1]] == req[1]:
                return True
        return False

    def mass_signature(self, sid: int, block_of: dict[int, int]):
        if self.lts.kind(sid) == "p":
            agg: dict[int, float] = {}
            for child, p in self.mass[sid].items():
                b = block_of[child]
                agg[b] = agg.get(b, 0.0) + p
            return tuple(sorted((b, self._prob_key(p)) for b, p in agg.items()))
        return ((block_of[sid], self._prob_key(1.0)),)

    def refine_pass(self, blocks: list[frozenset[int]]) -> tuple[list[frozenset[int]], bool]:
        block_of = {}
        for i, b in enumerate(blocks):
            for sid in b:
                block_of[sid] = i
        out: list[frozenset[int]] = []
        changed = False
        for bid, block in enumerate(blocks):
            # Condition IV: split by probabilistic class-mass signature.
            sig_groups: dict[tuple, list[int]] = {}
            for sid in block:
                sig_groups.setdefault(self.mass_signature(sid, block_of), []).append(sid)
            pieces = [frozenset(g) for g in sig_groups.values()]
            # Conditions I-III: split by weak respondability to requirements.
            stable = False
            while not stable:
                stable = True
                next_pieces: list[frozenset[int]] = []
                for piece in pieces:
                    if len(piece) == 1:
                        next_pieces.append(piece)
                        continue
                    reqs = []
                    seen = set()
                    for sid in piece:
                        if self.lts.kind(sid) != "n":
                            continue
                        for d in self.desc[sid]:
                            r = self.requirement(d, block_of, bid)
                            if r is not None and r not in seen:
                                seen.add(r)
                                reqs.append(r)
                    split_done = False
                    for r in reqs:
                        can = frozenset(
                            sid
                            for sid in piece
                            if self.lts.kind(sid) == "n"
                            and any(
                                block_of[t2] == bid
                                and self.responds_directly(t2, r, block_of)
                                for t2 in self.closure[sid]
                            )
                        )
                        if can and can != piece:
                            next_pieces.append(can)
                            next_pieces.append(piece - can)
                            split_done = True
                            stable = False
                            break
                    if not split_done:
                        next_pieces.append(piece)
                pieces = next_pieces
            if len(pieces) > 1:
                changed = True
            out.extend(pieces)
        return out, changed

    def coarsest_partition(self) -> Partition:
        blocks = [frozenset(n.id for n in self.lts.states)]
        while True:
            blocks, changed = self.refine_pass(blocks)
            if not changed:
                break
        final, changed = self.refine_pass(blocks)
        if changed:
            raise CqpSemanticsError("refinement fixpoint is not stable")
        return Partition(tuple(blocks))

    # -- literal conditions (verification and witnesses) --------------------

    def _candidates(self, t: int):
        return self.closure[t] if self.lts.kind(t) == "n" else frozenset()

    def check_pair(
        self, s: int, t: int, block_of: dict[int, int], relaxed: bool = False
    ) -> Failure | None:
        """First violated condition for the ordered pair, by the written
        definitions (full weak closure, tolerance comparisons). With
        `relaxed`, the anchoring requirement (s, t') related is dropped when
        nothing satisfies it, so that witness search can follow derivatives
        of pairs that refinement already separated."""
        lts = self.lts
        if lts.kind(s) == "p":
            left = self.mass_signature(s, block_of)
            right = self.mass_signature(t, block_of)
            if not self._mass_close(s, t, block_of):
                return Failure(
                    "mu-mass-mismatch",
                    s,
                    t,
                    detail="probabilistic class masses differ",
                    mass_left=dict(left),
                    mass_right=dict(right),
                )
            return None
        best: Failure | None = None
        for d in self.desc[s]:
            fail = self._respond(s, t, d, block_of, relaxed)
            if fail is not None:
                if fail.concrete:
                    return fail
                best = best or fail
        if best is not None:
            return best
        if lts.kind(t) == "p" and not self._mass_close(t, s, block_of):
            left = self.mass_signature(s, block_of)
            right = self.mass_signature(t, block_of)
            return Failure(
                "mu-mass-mismatch",
                s,
                t,
                detail="probabilistic class masses differ",
                mass_left=dict(left),
                mass_right=dict(right),
            )
        return None

    def _mass_close(self, s: int, t: int, block_of: dict[int, int]) -> bool:
        from cqp.bisim.partition import mu_mass

        blocks: dict[int, set[int]] = {}
        for sid, b in block_of.items():
            blocks.setdefault(b, set()).add(sid)
        for members in blocks.values():
            fm = frozenset(members)
            if abs(mu_mass(s, fm, self.lts) - mu_mass(t, fm, self.lts)) > self.tol:
                return False
        return True

    def _respond(
        self, s: int, t: int, d: tuple, block_of: dict[int, int], relaxed: bool = False
    ) -> Failure | None:
        anchored = [t2 for t2 in self._candidates(t) if block_of[t2] == block_of[s]]
        if relaxed and not anchored:
            anchored = list(self._candidates(t))
        if d[0] == "tau":
            dst_block = block_of[d[1]]
            for t2 in anchored:
                if block_of[t2] == dst_block:
                    return None
                for e in self.desc[t2]:
                    if e[0] == "tau" and block_of[e[1]] == dst_block:
                        return None
            return Failure(
                "target-class",
                s,
                t,
                label="tau",
                detail="no weak tau response into the derivative's class",
                next_pair=(d[1], self._best_tau_target(anchored or [t], dst_block)),
            )
        if d[0] == "in":
            _, chan, vkey, dst = d
            dst_block = block_of[dst]
            fallback: tuple[int, int] | None = None
            for t2 in anchored:
                for e in self.desc[t2]:
                    if e[0] == "in" and e[1] == chan and e[2] == vkey:
                        if block_of[e[3]] == dst_block:
                            return None
                        fallback = (dst, e[3])
            if fallback is not None:
                return Failure(
                    "target-class",
                    s,
                    t,
                    label=f"{chan}?",
                    detail="input matched but derivatives are not related",
                    next_pair=fallback,
                )
            return Failure(
                "unmatched-input",
                s,
                t,
                label=f"{chan}?{vkey}",
                detail=f"no weak response with an input on {chan!r} carrying the same values",
            )
        # output
        _, chan, vkey, branches = d
        best: Failure | None = None
        for t2 in anchored:
            for e in self.desc[t2]:
                if e[0] != "out" or e[1] != chan:
                    continue
                if e[2] != vkey:
                    best = best or Failure(
                        "value-set-mismatch",
                        s,
                        t,
                        label=f"{chan}!",
                        detail=f"value sets differ: {e[2]} vs {vkey}",
                    )
                    continue
                fail = self._match_branches(s, t, chan, branches, e[3], block_of)
                if fail is None:
                    return None
                best = self._prefer(best, fail)
        return best or Failure(
            "unmatched-output",
            s,
            t,
            label=f"{chan}!{vkey}",
            detail=f"no weak response with an output on {chan!r}",
        )

    def _best_tau_target(self, anchored, dst_block: int) -> int:
        for t2 in anchored:
            for e in self.desc.get(t2, []):
                if e[0] == "tau":
                    return e[1]
        return anchored[0]

    def _match_branches(
        self, s, t, chan, left: tuple, right: tuple, block_of: dict[int, int]
    ) -> Failure | None:
        by_tag = {tag: (pk, rk, child) for tag, pk, rk, child in right}
        for tag, pk, rk, child in left:
            if tag not in by_tag:
                return Failure(
                    "branch-prob-mismatch",
                    s,
                    t,
                    label=f"{chan}!",
                    detail=f"no branch for value {tag}",
                )
            pk2, rk2, child2 = by_tag[tag]
            p1 = pk * self.tol
            p2 = pk2 * self.tol
            if abs(p1 - p2) > self.tol:
                return Failure(
                    "branch-prob-mismatch",
                    s,
                    t,
                    label=f"{chan}!",
                    detail=f"branch {tag}: probability {p1:.9g} vs {p2:.9g}",
                )
            rho1 = self.rho_env(child)
            rho2 = self.rho_env(child2)
            if not rho1.close_to(rho2, self.tol):
                return Failure(
                    "rho-mismatch",
                    s,
                    t,
                    label=f"{chan}!",
                    detail=f"branch {tag}: environment densities differ",
                    rho_left=rho1,
                    rho_right=rho2,
                )
            if block_of[child] != block_of[child2]:
                return Failure(
                    "target-class",
                    s,
                    t,
                    label=f"{chan}!",
                    detail="output branches are not related",
                    next_pair=(child, child2),
                )
        return None

    @staticmethod
    def _prefer(a: Failure | None, b: Failure) -> Failure:
        rank = {
            "rho-mismatch": 0,
            "branch-prob-mismatch": 1,
            "value-set-mismatch": 2,
            "mu-mass-mismatch": 3,
            "unmatched-output": 4,
            "unmatched-input": 4,
            "target-class": 5,
        }
        if a is None or rank[b.kind] < rank[a.kind]:
            return b
        return a

    # -- witnesses -----------------------------------------------------------

    def find_witness(self, s0: int, t0: int, partition: Partition) -> Failure:
        block_of = partition.block_of()
        memo: set[tuple[int, int]] = set()
        queue = [(s0, t0)]
        fallback: Failure | None = None
        while queue:
            s, t = queue.pop(0)
            if (s, t) in memo:
                continue
            memo.add((s, t))
            for a, b in ((s, t), (t, s)):
                fail = self.check_pair(a, b, block_of, relaxed=True)
                if fail is None:
                    continue
                if fail.concrete:
                    return fail
                fallback = fallback or fail
                if fail.next_pair is not None:
                    queue.append(fail.next_pair)
        return fallback or Failure(
            "class-separation",
            s0,
            t0,
            detail="states fall into different classes of the coarsest bisimulation",
        )


def coarsest_pbb(lts: Lts, tol: float = 1e-9) -> tuple[Partition, PbbAnalysis]:
    analysis = PbbAnalysis(lts, tol)
    return analysis.coarsest_partition(), analysis


def check_pbb(lts: Lts, s: int, t: int, tol: float = 1e-9):
    """Coarsest probabilistic branching bisimulation on `lts`; verdict for
    the pair (s, t)."""
    from cqp.bisim.verdict import Verdict, witness_from_failure

    partition, analysis = coarsest_pbb(lts, tol)
    if partition.same_block(s, t):
        return Verdict(equivalent=True, partition=partition, witness=None, caveats=[])
    failure = analysis.find_witness(s, t, partition)
    return Verdict(
        equivalent=False,
        partition=partition,
        witness=witness_from_failure(failure),
        caveats=[],
    )

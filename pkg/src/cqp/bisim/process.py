"""Process-level equivalence: per-input-state checking, substitution closure,
and the context regression that exercises the congruence property."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable

from cqp.bisim.partition import merge_lts
from cqp.bisim.pbb import coarsest_pbb
from cqp.bisim.verdict import SigmaResult, Verdict, witness_from_failure
from cqp.errors import CqpSemanticsError, CqpTypeError
from cqp.lang import pretty_program, typecheck
from cqp.lang.ast import BitType, ChannelType, Program, QbitType
from cqp.lang.typecheck import load_program
from cqp.semantics.config import Config
from cqp.semantics.explore import DEFAULT_MAX_STATES, explore
from cqp.semantics.policy import InputPolicy

FINITE_POLICY_CAVEAT = (
    "equivalence was checked for the finite set of environment input states "
    "named in the policy, as a numeric proxy for quantification over all "
    "ambient quantum states"
)


def _param_split(program: Program, entry: str):
    d = program.definition(entry)
    chans = [(n, t) for n, t in d.params if isinstance(t, ChannelType)]
    bits = [n for n, t in d.params if isinstance(t, BitType)]
    qubits = [n for n, t in d.params if isinstance(t, QbitType)]
    return chans, bits, qubits


def _precheck(program: Program, p_entry: str, q_entry: str):
    issues = typecheck(program)
    if issues:
        raise CqpTypeError("; ".join(str(i) for i in issues))
    p_chans, p_bits, p_qubits = _param_split(program, p_entry)
    q_chans, q_bits, q_qubits = _param_split(program, q_entry)
    if p_qubits or q_qubits:
        raise CqpSemanticsError(
            "entries with free qubit parameters are not supported by process-level checks"
        )
    if p_chans != q_chans:
        raise CqpSemanticsError(
            f"interface mismatch: {p_entry} has {p_chans}, {q_entry} has {q_chans}"
        )
    if sorted(p_bits) != sorted(q_bits):
        raise CqpSemanticsError(
            f"bit parameters differ: {p_entry} has {p_bits}, {q_entry} has {q_bits}"
        )
    return p_bits


def check_process_equiv(
    program: Program,
    p_entry: str,
    q_entry: str,
    policy: InputPolicy | None = None,
    tol: float = 1e-9,
    *,
    bit_args: dict[str, int] | None = None,
    open_system: bool = False,
    collapse_measurements: bool = False,
    max_states: int = DEFAULT_MAX_STATES,
) -> Verdict:
    """Explore both entries from each policy input state and compare with
    probabilistic branching bisimilarity on the disjoint union."""
    policy = policy or InputPolicy.tomo()
    bits = _precheck(program, p_entry, q_entry)
    if bits and not bit_args:
        raise CqpSemanticsError(
            f"entries have bit parameters {bits}; supply bit_args or use check_full_equiv"
        )
    sigma_results: list[SigmaResult] = []
    partition = None
    for single in policy.singletons():
        kwargs = dict(
            policy=single,
            bit_args=bit_args,
            open_system=open_system,
            collapse_measurements=collapse_measurements,
            max_states=max_states,
        )
        lts_p = explore(program, p_entry, **kwargs)
        lts_q = explore(program, q_entry, **kwargs)
        if lts_p.truncated or lts_q.truncated:
            raise CqpSemanticsError("exploration truncated; raise max_states")
        union, offset = merge_lts(lts_p, lts_q)
        pair = (lts_p.initial, lts_q.initial + offset)
        part, analysis = coarsest_pbb(union, tol)
        partition = part
        name = single.qubit_states[0].name
        if part.same_block(*pair):
            sigma_results.append(
                SigmaResult(name, True, lts=union, initial_pair=pair, partition=part)
            )
        else:
            failure = analysis.find_witness(*pair, part)
            sigma_results.append(
                SigmaResult(
                    name,
                    False,
                    witness=witness_from_failure(failure),
                    lts=union,
                    initial_pair=pair,
                    partition=part,
                )
            )
    caveats = [FINITE_POLICY_CAVEAT]
    if collapse_measurements:
        caveats.append("checked under the collapsing debug semantics")
    equivalent = all(r.equivalent for r in sigma_results)
    witness = None
    if not equivalent:
        first_bad = next(r for r in sigma_results if not r.equivalent)
        witness = first_bad.witness
        partition = first_bad.partition
    return Verdict(
        equivalent=equivalent,
        partition=partition,
        witness=witness,
        caveats=caveats,
        sigma_results=sigma_results,
    )


def check_config_equiv(
    program: Program,
    left: tuple[Config, frozenset[str]],
    right: tuple[Config, frozenset[str]],
    policy: InputPolicy | None = None,
    tol: float = 1e-9,
    *,
    open_system: bool = False,
    collapse_measurements: bool = False,
    max_states: int = DEFAULT_MAX_STATES,
) -> Verdict:
    """Bisimilarity of two explicitly-built initial configurations."""
    policy = policy or InputPolicy.tomo()
    cfg_l, iface_l = left
    cfg_r, iface_r = right
    kwargs = dict(
        policy=policy,
        open_system=open_system,
        collapse_measurements=collapse_measurements,
        max_states=max_states,
    )
    lts_l = explore(program, initial=cfg_l, interface=iface_l, **kwargs)
    lts_r = explore(program, initial=cfg_r, interface=iface_r, **kwargs)
    union, offset = merge_lts(lts_l, lts_r)
    pair = (lts_l.initial, lts_r.initial + offset)
    part, analysis = coarsest_pbb(union, tol)
    caveats = [FINITE_POLICY_CAVEAT]
    if collapse_measurements:
        caveats.append("checked under the collapsing debug semantics")
    result = SigmaResult("configurations", part.same_block(*pair), lts=union,
                         initial_pair=pair, partition=part)
    if result.equivalent:
        return Verdict(True, partition=part, caveats=caveats, sigma_results=[result])
    failure = analysis.find_witness(*pair, part)
    result.witness = witness_from_failure(failure)
    return Verdict(
        False,
        partition=part,
        witness=result.witness,
        caveats=caveats,
        sigma_results=[result],
    )


def check_full_equiv(
    program: Program,
    p_entry: str,
    q_entry: str,
    policy: InputPolicy | None = None,
    tol: float = 1e-9,
    **kwargs,
) -> Verdict:
    """Closure under substitutions: enumerate every bit assignment for the
    entries' shared bit parameters; closed entries reduce to a single check."""
    bits = _precheck(program, p_entry, q_entry)
    if not bits:
        return check_process_equiv(program, p_entry, q_entry, policy, tol, **kwargs)
    sigma_results = []
    caveats = [FINITE_POLICY_CAVEAT]
    witness = None
    partition = None
    equivalent = True
    for assignment in product((0, 1), repeat=len(bits)):
        kappa = dict(zip(bits, assignment))
        verdict = check_process_equiv(
            program, p_entry, q_entry, policy, tol, bit_args=kappa, **kwargs
        )
        tag = ",".join(f"{k}={v}" for k, v in kappa.items())
        for r in verdict.sigma_results:
            r.input = f"{tag}; {r.input}"
            sigma_results.append(r)
        if not verdict.equivalent and equivalent:
            equivalent = False
            witness = verdict.witness
            partition = verdict.partition
        elif partition is None:
            partition = verdict.partition
    return Verdict(
        equivalent=equivalent,
        partition=partition,
        witness=witness,
        caveats=caveats,
        sigma_results=sigma_results,
    )


# -- contexts ----------------------------------------------------------------


@dataclass(frozen=True)
class ContextSpec:
    """A process context C[.] packaged as a source-level builder.

    `wrap(entry)` returns definitions to append and the new entry name; the
    hole is filled by invoking `entry`. Contexts apply to entries with the
    interface (a:^[Qbit], d:^[Qbit]).
    """

    name: str
    wrap: Callable[[str], tuple[str, str]]


def default_contexts() -> list[ContextSpec]:
    return [
        ContextSpec(
            "input-prefix",
            lambda e: (
                f"process CtxIn{e}(e:^[bit], a:^[Qbit], d:^[Qbit]) = e?[b:bit].{e}(a,d)",
                f"CtxIn{e}",
            ),
        ),
        ContextSpec(
            "deaf-parallel",
            lambda e: (
                f"process CtxDeafAux{e}(e:^[bit]) = e?[b:bit].0\n"
                f"process CtxDeaf{e}(a:^[Qbit], d:^[Qbit], e:^[bit]) = {e}(a,d) || CtxDeafAux{e}(e)",
                f"CtxDeaf{e}",
            ),
        ),
        ContextSpec(
            "private-chatter",
            lambda e: (
                f"process CtxChat{e}(a:^[Qbit], d:^[Qbit]) = (new m)(m![0].0 || m?[b:bit].{e}(a,d))",
                f"CtxChat{e}",
            ),
        ),
        ContextSpec(
            "qubit-emitter",
            lambda e: (
                f"process CtxEmitAux{e}(g:^[Qbit]) = (qbit w) {{w *= H}}.g![w].0\n"
                f"process CtxEmit{e}(a:^[Qbit], d:^[Qbit], g:^[Qbit]) = {e}(a,d) || CtxEmitAux{e}(g)",
                f"CtxEmit{e}",
            ),
        ),
        ContextSpec(
            "relay-chain",
            lambda e: (
                f"process CtxRelayAux{e}(d:^[Qbit], e:^[Qbit]) = d?[x:Qbit].e![x].0\n"
                f"process CtxRelay{e}(a:^[Qbit], e:^[Qbit]) = (new d)({e}(a,d) || CtxRelayAux{e}(d,e))",
                f"CtxRelay{e}",
            ),
        ),
        ContextSpec(
            "channel-clash",
            lambda e: (
                f"process CtxBad{e}(a:^[bit], d:^[Qbit]) = a![0].0 || {e}(a,d)",
                f"CtxBad{e}",
            ),
        ),
    ]


@dataclass
class ContextResult:
    context: str
    skipped: bool
    note: str = ""
    verdict: Verdict | None = None


def context_regression(
    program: Program,
    p_entry: str,
    q_entry: str,
    contexts: list[ContextSpec] | None = None,
    policy: InputPolicy | None = None,
    tol: float = 1e-9,
    **kwargs,
) -> list[ContextResult]:
    """Check C[P] against C[Q] for each sampled context; contexts that do not
    type around an entry are skipped, mirroring the typability side
    condition of the congruence property."""
    contexts = contexts if contexts is not None else default_contexts()
    base_src = pretty_program(program)
    gates = {g.name: g for g in program.gates}
    results = []
    for spec in contexts:
        try:
            defs_p, entry_p = spec.wrap(p_entry)
            defs_q, entry_q = spec.wrap(q_entry)
            wrapped = load_program(base_src + "\n" + defs_p + "\n" + defs_q, gates)
        except CqpTypeError as exc:
            results.append(ContextResult(spec.name, skipped=True, note=str(exc)))
            continue
        verdict = check_process_equiv(wrapped, entry_p, entry_q, policy, tol, **kwargs)
        results.append(ContextResult(spec.name, skipped=False, verdict=verdict))
    return results

"""Configurations: pure, mixed and probabilistic states of the semantics.

A `Config` is the mixed form: weighted components sharing one process
skeleton, differing only in quantum states and the values bound to the
mixture placeholders. A pure configuration is the trivial case (one
component, no placeholders). A `ProbConfig` is a probability distribution
over configs, resolved by probabilistic transitions.

Reserved name spaces (invisible to user programs):
  #qNN  qubit handles in the global state
  #cNN  restricted channel handles
  #xNN  mixture placeholders
  #bNN  canonically renamed bound names
  #mN / #rN  scratch names used during normalization

Canonical form: invocations unfolded, restrictions hoisted, parallel
components flattened/sorted, Nil dropped, constant placeholders inlined,
unused placeholders and channels dropped, all reserved names renumbered
along a content-determined traversal, per-component global phase fixed,
equal components merged, components sorted. Two configurations reached
along different interleavings of the same behaviour produce identical
canonical forms, which is what keeps the explored state space finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from cqp.errors import CqpSemanticsError
from cqp.lang.ast import (
    BIT,
    Apply,
    BareMeasure,
    BitLit,
    ChanRef,
    Expr,
    Input,
    Invoke,
    Measure,
    NewChannel,
    Nil,
    Not,
    And,
    Output,
    Parallel,
    PowGate,
    ProcessTerm,
    Program,
    QbitAlloc,
    QubitRef,
    UnitaryExpr,
    Var,
    free_names,
    pretty_term,
    substitute,
)
from cqp.qstate.state import (
    DensityMatrix,
    QuantumState,
    mixture_density,
    phase_canonical,
    reindex,
)

WEIGHT_TOL = 1e-9
_AMP_KEY_SCALE = 1e10
_WEIGHT_KEY_SCALE = 1e10


@dataclass(frozen=True)
class Component:
    weight: float
    state: QuantumState
    values: tuple[int, ...]


@dataclass(frozen=True)
class Config:
    components: tuple[Component, ...]
    placeholders: tuple[str, ...]
    procs: tuple[ProcessTerm, ...]
    owned: frozenset[str]
    private: frozenset[str]

    @property
    def is_pure(self) -> bool:
        return len(self.components) == 1 and not self.placeholders

    @property
    def qubits(self) -> tuple[str, ...]:
        return self.components[0].state.qubits

    @property
    def term(self) -> ProcessTerm:
        """The parallel composition of the process skeleton."""
        if not self.procs:
            return Nil()
        t = self.procs[0]
        for p in self.procs[1:]:
            t = Parallel(t, p)
        return t

    def env_qubits(self) -> tuple[str, ...]:
        """Qubits of the global state not owned by the process (sorted)."""
        return tuple(sorted(set(self.qubits) - self.owned))

    def rho_env(self) -> DensityMatrix:
        """Reduced density matrix of the environment qubits."""
        return mixture_density(
            [(c.weight, c.state) for c in self.components], self.env_qubits()
        )

    def density(self, keep) -> DensityMatrix:
        return mixture_density([(c.weight, c.state) for c in self.components], keep)

    def component_env(self, comp: Component) -> dict[str, int]:
        return dict(zip(self.placeholders, comp.values))

    def validate(self, tol: float = WEIGHT_TOL) -> None:
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > tol:
            raise CqpSemanticsError(f"mixture weights sum to {total}")
        register = self.components[0].state.qubits
        for c in self.components:
            if c.state.qubits != register:
                raise CqpSemanticsError("mixture components disagree on the register")
            if len(c.values) != len(self.placeholders):
                raise CqpSemanticsError("component value vector does not match placeholders")
        if not self.owned <= set(register):
            raise CqpSemanticsError("owned set mentions qubits outside the state")
        for proc in self.procs:
            names = free_names(proc)
            if not names.qubits <= self.owned:
                raise CqpSemanticsError(
                    f"process references unowned qubit(s) {sorted(names.qubits - self.owned)}"
                )
            stray = names.variables - set(self.placeholders)
            if stray:
                raise CqpSemanticsError(f"unbound variables {sorted(stray)} in skeleton")

    def describe(self) -> str:
        lines = [f"term: {pretty_term(self.term)}"]
        lines.append(f"owned: {{{','.join(sorted(self.owned))}}}")
        if self.placeholders:
            lines.append(f"placeholders: {','.join(self.placeholders)}")
        for c in self.components:
            ket = format_ket(c.state)
            vals = f"  <{','.join(map(str, c.values))}>" if c.values else ""
            lines.append(f"  {c.weight:.6g}  {ket}{vals}")
        return "\n".join(lines)


@dataclass(frozen=True)
class ProbConfig:
    """Probability distribution over configurations (all non-probabilistic)."""

    branches: tuple[tuple[float, tuple[int, ...], Config], ...]  # (prob, tag, config)

    def __post_init__(self):
        if len(self.branches) < 2:
            raise CqpSemanticsError("distributions with a single branch are collapsed")
        total = sum(p for p, _, _ in self.branches)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise CqpSemanticsError(f"branch probabilities sum to {total}")
        if any(p >= 1.0 - 1e-15 for p, _, _ in self.branches):
            raise CqpSemanticsError("every branch probability must be < 1")


def format_ket(state: QuantumState, tol: float = 1e-9) -> str:
    parts = []
    n = state.n
    for idx, a in enumerate(state.amps):
        if abs(a) <= tol:
            continue
        bits = format(idx, f"0{n}b") if n else ""
        if abs(a.imag) <= tol:
            coeff = f"{a.real:.4g}"
        else:
            coeff = f"({a.real:.4g}{a.imag:+.4g}i)"
        parts.append(f"{coeff}|{bits}>")
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# Structural normalization: unfold invocations, hoist restrictions, desugar
# bare measurements, flatten parallel, drop Nil.


def _rename_binders_apart(t: ProcessTerm, avoid: set[str], counter: list[int]) -> ProcessTerm:
    """Alpha-rename binders whose names collide with `avoid`."""

    def fresh(name: str) -> str:
        counter[0] += 1
        return f"#r{counter[0]}"

    if isinstance(t, Nil):
        return t
    if isinstance(t, (Output, Apply, BareMeasure)):
        return replace(t, cont=_rename_binders_apart(t.cont, avoid, counter))
    if isinstance(t, Input):
        sub = {}
        binders = []
        for b, ty in t.binders:
            if b in avoid:
                nb = fresh(b)
                sub[b] = Var(nb)
                binders.append((nb, ty))
            else:
                binders.append((b, ty))
        cont = substitute(t.cont, sub) if sub else t.cont
        return Input(t.channel, tuple(binders), _rename_binders_apart(cont, avoid, counter), t.pos)
    if isinstance(t, (QbitAlloc, NewChannel)):
        sub = {}
        names = []
        for b in t.names:
            if b in avoid:
                nb = fresh(b)
                sub[b] = Var(nb) if isinstance(t, QbitAlloc) else ChanRef(nb)
                names.append(nb)
            else:
                names.append(b)
        cont = substitute(t.cont, sub) if sub else t.cont
        node = QbitAlloc if isinstance(t, QbitAlloc) else NewChannel
        return node(tuple(names), _rename_binders_apart(cont, avoid, counter), t.pos)
    if isinstance(t, Parallel):
        return Parallel(
            _rename_binders_apart(t.left, avoid, counter),
            _rename_binders_apart(t.right, avoid, counter),
            t.pos,
        )
    if isinstance(t, Invoke):
        return t
    raise TypeError(f"unknown term {t!r}")


class _Normalizer:
    def __init__(self, program: Program, chan_start: int):
        self.program = program
        self.chan_counter = chan_start
        self.new_private: list[str] = []
        self.rename_counter = [0]

    def fresh_channel(self) -> str:
        name = f"#c{self.chan_counter:02d}"
        self.chan_counter += 1
        self.new_private.append(name)
        return name

    def normalize(self, t: ProcessTerm, out: list[ProcessTerm]) -> None:
        if isinstance(t, Nil):
            return
        if isinstance(t, Parallel):
            self.normalize(t.left, out)
            self.normalize(t.right, out)
            return
        if isinstance(t, NewChannel):
            sub = {name: ChanRef(self.fresh_channel()) for name in t.names}
            self.normalize(substitute(t.cont, sub), out)
            return
        if isinstance(t, Invoke):
            d = self.program.definition(t.name)
            if len(d.params) != len(t.args):
                raise CqpSemanticsError(f"{t.name} arity mismatch")
            avoid = set()
            for a in t.args:
                names = free_names(Output(d.name, (a,), Nil()))
                avoid |= names.variables | names.qubits
                if isinstance(a, ChanRef):
                    avoid.add(a.name)
            body = _rename_binders_apart(d.body, avoid, self.rename_counter)
            sub = {p: a for (p, _), a in zip(d.params, t.args)}
            self.normalize(substitute(body, sub), out)
            return
        if isinstance(t, BareMeasure):
            chan = self.fresh_channel()
            binders = tuple((f"#m{i}", BIT) for i in range(len(t.qubits)))
            out.append(Output(chan, (Measure(t.qubits),), t.cont, t.pos))
            out.append(Input(chan, binders, Nil(), t.pos))
            return
        # prefix-headed sequential process
        out.append(t)


def normalize_procs(
    program: Program, terms, private: frozenset[str]
) -> tuple[tuple[ProcessTerm, ...], frozenset[str]]:
    """Returns prefix-headed parallel processes and the extended private set."""
    norm = _Normalizer(program, chan_start=len(private))
    out: list[ProcessTerm] = []
    for t in terms:
        norm.normalize(t, out)
    return tuple(out), private | frozenset(norm.new_private)


# ---------------------------------------------------------------------------
# Canonicalization


class _CanonNamer:
    """Assigns canonical names in traversal order, with scoping for binders."""

    def __init__(self, interface: frozenset[str]):
        self.interface = interface
        self.qubit_map: dict[str, str] = {}
        self.chan_map: dict[str, str] = {}
        self.ph_map: dict[str, str] = {}
        self.bound_counter = 0

    def qubit(self, name: str) -> str:
        if name not in self.qubit_map:
            self.qubit_map[name] = f"#q{len(self.qubit_map):02d}"
        return self.qubit_map[name]

    def chan(self, name: str) -> str:
        if name in self.interface:
            return name
        if name not in self.chan_map:
            self.chan_map[name] = f"#c{len(self.chan_map):02d}"
        return self.chan_map[name]

    def placeholder(self, name: str) -> str:
        if name not in self.ph_map:
            self.ph_map[name] = f"#x{len(self.ph_map):02d}"
        return self.ph_map[name]

    def fresh_bound(self) -> str:
        name = f"#b{self.bound_counter:02d}"
        self.bound_counter += 1
        return name

    # -- term rewriting

    def expr(self, e: Expr, bound: dict[str, str]) -> Expr:
        if isinstance(e, Var):
            if e.name in bound:
                return Var(bound[e.name])
            return Var(self.placeholder(e.name))
        if isinstance(e, BitLit):
            return e
        if isinstance(e, QubitRef):
            return QubitRef(self.qubit(e.name))
        if isinstance(e, ChanRef):
            return ChanRef(self.chan(e.name))
        if isinstance(e, Measure):
            return Measure(tuple(self.expr(q, bound) for q in e.qubits))
        if isinstance(e, Not):
            return Not(self.expr(e.operand, bound))
        if isinstance(e, And):
            return And(self.expr(e.left, bound), self.expr(e.right, bound))
        raise TypeError(f"unknown expression {e!r}")

    def unitary(self, u: UnitaryExpr, bound: dict[str, str]) -> UnitaryExpr:
        if isinstance(u, PowGate):
            return PowGate(self.unitary(u.base, bound), self.expr(u.exponent, bound))
        return u

    def term(self, t: ProcessTerm, bound: dict[str, str]) -> ProcessTerm:
        if isinstance(t, Nil):
            return Nil()
        if isinstance(t, Output):
            chan = bound.get(t.channel) or self.chan(t.channel)
            items = tuple(self.expr(e, bound) for e in t.items)
            return Output(chan, items, self.term(t.cont, bound))
        if isinstance(t, Input):
            chan = bound.get(t.channel) or self.chan(t.channel)
            inner = dict(bound)
            binders = []
            for b, ty in t.binders:
                nb = self.fresh_bound()
                inner[b] = nb
                binders.append((nb, ty))
            return Input(chan, tuple(binders), self.term(t.cont, inner))
        if isinstance(t, Apply):
            qs = tuple(self.expr(q, bound) for q in t.qubits)
            return Apply(qs, self.unitary(t.gate, bound), self.term(t.cont, bound))
        if isinstance(t, BareMeasure):
            qs = tuple(self.expr(q, bound) for q in t.qubits)
            return BareMeasure(qs, self.term(t.cont, bound))
        if isinstance(t, QbitAlloc):
            inner = dict(bound)
            names = []
            for b in t.names:
                nb = self.fresh_bound()
                inner[b] = nb
                names.append(nb)
            return QbitAlloc(tuple(names), self.term(t.cont, inner))
        if isinstance(t, NewChannel):
            inner = dict(bound)
            names = []
            for b in t.names:
                nb = self.fresh_bound()
                inner[b] = nb
                names.append(nb)
            return NewChannel(tuple(names), self.term(t.cont, inner))
        if isinstance(t, Parallel):
            return Parallel(self.term(t.left, bound), self.term(t.right, bound))
        if isinstance(t, Invoke):
            return Invoke(t.name, tuple(self.expr(a, bound) for a in t.args))
        raise TypeError(f"unknown term {t!r}")


def _erased_key(proc: ProcessTerm, interface: frozenset[str]) -> str:
    """Ordering key: the proc printed with local first-occurrence numbering."""
    namer = _CanonNamer(interface)
    return pretty_term(namer.term(proc, {}))


def _amps_key(state: QuantumState) -> bytes:
    v = np.round(state.amps.view(np.float64) * _AMP_KEY_SCALE)
    return (v + 0.0).astype(np.int64).tobytes()  # +0.0 folds -0.0 into 0.0


def _weight_key(w: float) -> int:
    return int(round(w * _WEIGHT_KEY_SCALE))


def canonicalize(config: Config, interface: frozenset[str]) -> Config:
    """Idempotent canonical form; see the module docstring."""
    placeholders = list(config.placeholders)
    procs = list(config.procs)
    components = list(config.components)

    # Inline placeholders that are constant across components, then drop
    # placeholder columns no longer referenced by the skeleton.
    if placeholders:
        sub = {}
        for pos, name in enumerate(placeholders):
            vals = {c.values[pos] for c in components}
            if len(vals) == 1:
                sub[name] = BitLit(vals.pop())
        if sub:
            procs = [substitute(p, sub) for p in procs]
        referenced = set()
        for p in procs:
            referenced |= free_names(p).variables
        keep = [i for i, name in enumerate(placeholders) if name in referenced]
        placeholders = [placeholders[i] for i in keep]
        components = [
            Component(c.weight, c.state, tuple(c.values[i] for i in keep))
            for c in components
        ]

    # Drop restricted channels that no longer occur.
    used_channels = frozenset().union(*(free_names(p).channels for p in procs)) if procs else frozenset()
    private = config.private & used_channels

    # Sort parallel components by a name-erased print, then rename along the
    # sorted traversal.
    procs.sort(key=lambda p: (_erased_key(p, interface), pretty_term(p)))
    namer = _CanonNamer(interface)
    procs = [namer.term(p, {}) for p in procs]

    # Reorder placeholder columns to canonical order (first occurrence in the
    # sorted traversal); the content ordering below must see canonical values.
    ph_canon = sorted(placeholders, key=lambda p: namer.ph_map[p])
    perm = [placeholders.index(p) for p in ph_canon]
    placeholders = [namer.ph_map[p] for p in ph_canon]
    components = [
        Component(c.weight, c.state, tuple(c.values[i] for i in perm))
        for c in components
    ]

    # Order unreferenced qubits by content, then extend the rename map.
    register = components[0].state.qubits
    unreferenced = [q for q in register if q not in namer.qubit_map]
    _order_by_content(unreferenced, components, namer)
    qubit_order_old = sorted(namer.qubit_map, key=lambda q: namer.qubit_map[q])

    new_components = []
    for c in components:
        state = reindex(c.state, qubit_order_old)
        state = QuantumState(
            tuple(namer.qubit_map[q] for q in qubit_order_old), state.amps
        )
        state = phase_canonical(state)
        new_components.append(Component(c.weight, state, c.values))

    # Merge equal components, sort, renormalize.
    merged: dict[tuple, Component] = {}
    order: list[tuple] = []
    for c in new_components:
        key = (c.values, _amps_key(c.state))
        if key in merged:
            prev = merged[key]
            merged[key] = Component(prev.weight + c.weight, prev.state, prev.values)
        else:
            merged[key] = c
            order.append(key)
    total = sum(c.weight for c in merged.values())
    comps = [
        Component(c.weight / total, c.state, c.values)
        for key, c in sorted(merged.items(), key=lambda kv: kv[0])
    ]

    owned = frozenset(namer.qubit_map[q] for q in config.owned)
    return Config(
        components=tuple(comps),
        placeholders=tuple(placeholders),
        procs=tuple(procs),
        owned=owned,
        private=frozenset(namer.chan_map[c] for c in private),
    )


def _order_by_content(
    unreferenced: list[str],
    components: list[Component],
    namer: _CanonNamer,
) -> None:
    """Greedy, content-determined order for qubits the skeleton never names.

    Candidates are keyed by their single-qubit reduced density per component
    group (groups = components bucketed by placeholder values), refined by
    pairwise densities with already-placed qubits. Candidates whose keys
    fully tie are behaviourally interchangeable in all models of interest;
    remaining ties fall back to the current handle, which at worst keeps two
    interleavings apart (sound, never wrong).
    """
    if not unreferenced:
        return
    from cqp.qstate.kernels import reduced_density as _rd

    groups: dict[tuple, list[Component]] = {}
    for c in components:
        groups.setdefault(c.values, []).append(c)
    group_list = [groups[k] for k in sorted(groups)]

    def single_key(q: str) -> tuple:
        out = []
        for group in group_list:
            entries = []
            for c in group:
                rho = _rd(c.state.amps, c.state.n, (c.state.axis(q),))
                v = (np.round(rho.reshape(-1).view(np.float64) * _AMP_KEY_SCALE) + 0.0)
                entries.append((_weight_key(c.weight), v.astype(np.int64).tobytes()))
            out.append(tuple(sorted(entries)))
        return tuple(out)

    def pair_key(q: str, placed_name: str) -> tuple:
        out = []
        for group in group_list:
            entries = []
            for c in group:
                axes = (c.state.axis(placed_name), c.state.axis(q))
                rho = _rd(c.state.amps, c.state.n, axes)
                v = (np.round(rho.reshape(-1).view(np.float64) * _AMP_KEY_SCALE) + 0.0)
                entries.append(v.astype(np.int64).tobytes())
            out.append(tuple(sorted(entries)))
        return tuple(out)

    placed = sorted(namer.qubit_map, key=lambda q: namer.qubit_map[q])
    remaining = list(unreferenced)
    while remaining:
        keyed = [
            (single_key(q), tuple(pair_key(q, p) for p in placed), q) for q in remaining
        ]
        keyed.sort()
        chosen = keyed[0][2]
        namer.qubit(chosen)
        placed.append(chosen)
        remaining.remove(chosen)


def config_key(config: Config) -> tuple:
    """Hashable identity of a canonical configuration."""
    comp_keys = tuple(
        (_weight_key(c.weight), c.values, _amps_key(c.state)) for c in config.components
    )
    return (
        tuple(pretty_term(p) for p in config.procs),
        config.placeholders,
        tuple(sorted(config.owned)),
        tuple(sorted(config.private)),
        config.qubits,
        comp_keys,
    )


def prob_key(branches: tuple[tuple[float, tuple[int, ...], tuple], ...]) -> tuple:
    """Hashable identity of a probabilistic state; branch entries carry the
    child state key in place of the config."""
    return tuple(sorted((_weight_key(p), tag, child) for p, tag, child in branches))

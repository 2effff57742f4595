"""One-step derivatives of configurations.

Rule summary, for a configuration whose parallel processes are scanned in
every position (full interleaving):

  * qubit allocation        -> tau, fresh |0> qubits joined to every component
  * unitary action          -> tau, gate applied per component (conditional
                               exponents evaluated in the component's values)
  * measurement in an output payload -> tau to a mixed configuration; inside
                               an existing mixture weights multiply and the
                               placeholder list extends
  * internal synchronization -> tau; values (including placeholders) flow
                               into the receiver without collapsing the mixture
  * output on an interface channel -> labelled transition carrying the set of
                               distinct classical value vectors; the target is
                               a probability distribution when the mixture
                               disagrees on the values, collapsed when it agrees
  * input on an interface channel -> one labelled derivative per environment
                               choice: each bit value, each policy qubit state
                               (joined fresh), and each existing environment
                               qubit (ownership handover)

With `collapse_measurements=True` measurement instead branches immediately
into a probability distribution (the naive semantics, kept as a regression
mode for what mixed configurations exist to fix).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from cqp.errors import CqpSemanticsError
from cqp.lang.ast import (
    And,
    Apply,
    BitLit,
    Expr,
    Input,
    Measure,
    Nil,
    Not,
    Output,
    ProcessTerm,
    Program,
    QbitAlloc,
    QbitType,
    QubitRef,
    Var,
)
from cqp.qstate.state import (
    QuantumState,
    apply_gate,
    extend_with_fresh,
    extend_with_state,
    measure,
)
from cqp.semantics.config import Component, Config, ProbConfig, normalize_procs
from cqp.semantics.labels import TAU, InputLabel, Label, OutputLabel
from cqp.semantics.policy import InputPolicy


@dataclass(frozen=True)
class Step:
    label: Label
    target: Config | ProbConfig
    policy_choice: tuple[str, ...] = ()


def eval_bit(e: Expr, env: dict[str, int]) -> int:
    if isinstance(e, BitLit):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise CqpSemanticsError(f"unbound value {e.name!r} in evaluation") from None
    if isinstance(e, Not):
        return 1 - eval_bit(e.operand, env)
    if isinstance(e, And):
        return eval_bit(e.left, env) & eval_bit(e.right, env)
    raise CqpSemanticsError(f"cannot evaluate {e} as a bit")


def _find_measure(e: Expr):
    """Leftmost Measure subexpression, or None."""
    if isinstance(e, Measure):
        return e
    if isinstance(e, Not):
        return _find_measure(e.operand)
    if isinstance(e, And):
        return _find_measure(e.left) or _find_measure(e.right)
    return None


def _replace_first_measure(e: Expr, replacement: Expr) -> tuple[Expr, bool]:
    if isinstance(e, Measure):
        return replacement, True
    if isinstance(e, Not):
        inner, done = _replace_first_measure(e.operand, replacement)
        return (Not(inner), done) if done else (e, False)
    if isinstance(e, And):
        left, done = _replace_first_measure(e.left, replacement)
        if done:
            return And(left, e.right), True
        right, done = _replace_first_measure(e.right, replacement)
        return (And(e.left, right), done) if done else (e, False)
    return e, False


class Semantics:
    def __init__(
        self,
        program: Program,
        interface: frozenset[str],
        policy: InputPolicy,
        open_system: bool = False,
        collapse_measurements: bool = False,
    ):
        self.program = program
        self.interface = interface
        self.policy = policy
        self.open_system = open_system
        self.collapse_measurements = collapse_measurements

    # -- helpers

    def _splice(self, s: Config, updates: dict[int, ProcessTerm], **changes) -> Config:
        """Replace processes at the given indices and re-normalize."""
        parts: list[ProcessTerm] = []
        for i, p in enumerate(s.procs):
            parts.append(updates.get(i, p))
        procs, private = normalize_procs(self.program, parts, changes.pop("private", s.private))
        return Config(
            components=changes.pop("components", s.components),
            placeholders=changes.pop("placeholders", s.placeholders),
            procs=procs,
            owned=changes.pop("owned", s.owned),
            private=private,
        )

    def _fresh_qubits(self, s: Config, count: int) -> list[str]:
        n = len(s.qubits)
        return [f"#q{n + j:02d}" for j in range(count)]

    def _fresh_placeholders(self, s: Config, count: int) -> list[str]:
        k = len(s.placeholders)
        return [f"#x{k + j:02d}" for j in range(count)]

    # -- transition enumeration

    def transitions(self, s: Config) -> list[Step]:
        steps: list[Step] = []
        for i, proc in enumerate(s.procs):
            if isinstance(proc, QbitAlloc):
                steps.append(self._alloc(s, i, proc))
            elif isinstance(proc, Apply):
                steps.append(self._gate(s, i, proc))
            elif isinstance(proc, Output):
                steps.extend(self._output(s, i, proc))
            elif isinstance(proc, Input):
                if proc.channel in self.interface and proc.channel not in s.private:
                    steps.extend(self._env_input(s, i, proc))
                # internal inputs fire from the matching output's side
            else:
                raise CqpSemanticsError(f"unexpected process head {proc!r}")
        return steps

    def _alloc(self, s: Config, i: int, proc: QbitAlloc) -> Step:
        handles = self._fresh_qubits(s, len(proc.names))
        comps = tuple(
            Component(c.weight, extend_with_fresh(c.state, handles), c.values)
            for c in s.components
        )
        sub = {name: QubitRef(h) for name, h in zip(proc.names, handles)}
        from cqp.lang.ast import substitute

        target = self._splice(
            s,
            {i: substitute(proc.cont, sub)},
            components=comps,
            owned=s.owned | frozenset(handles),
        )
        return Step(TAU, target)

    def _gate(self, s: Config, i: int, proc: Apply) -> Step:
        targets = []
        for q in proc.qubits:
            if not isinstance(q, QubitRef):
                raise CqpSemanticsError(f"gate target {q} is not a qubit handle")
            targets.append(q.name)
        comps = []
        for c in s.components:
            env = s.component_env(c)
            state = apply_gate(c.state, proc.gate, targets, lambda e: eval_bit(e, env))
            comps.append(Component(c.weight, state, c.values))
        target = self._splice(s, {i: proc.cont}, components=tuple(comps))
        return Step(TAU, target)

    def _output(self, s: Config, i: int, proc: Output) -> list[Step]:
        for item in proc.items:
            if _find_measure(item) is not None:
                return [self._measure_step(s, i, proc)]
        chan = proc.channel
        steps: list[Step] = []
        internal = chan in s.private
        if internal or self.open_system:
            for j, other in enumerate(s.procs):
                if j != i and isinstance(other, Input) and other.channel == chan:
                    steps.append(self._sync(s, i, proc, j, other))
        if not internal:
            steps.append(self._emit(s, i, proc))
        return steps

    def _measure_step(self, s: Config, i: int, proc: Output) -> Step:
        items = list(proc.items)
        for idx, item in enumerate(items):
            node = _find_measure(item)
            if node is not None:
                break
        else:  # pragma: no cover - guarded by caller
            raise AssertionError
        k = len(node.qubits)
        targets = []
        for q in node.qubits:
            if not isinstance(q, QubitRef):
                raise CqpSemanticsError(f"measurement target {q} is not a qubit handle")
            targets.append(q.name)
        names = self._fresh_placeholders(s, k)
        if isinstance(item, Measure):
            items[idx:idx + 1] = [Var(p) for p in names]
        else:
            if k != 1:
                raise CqpSemanticsError("a joint measurement cannot appear under bit operators")
            new_item, done = _replace_first_measure(item, Var(names[0]))
            assert done
            items[idx] = new_item
        new_output = Output(proc.channel, tuple(items), proc.cont, proc.pos)

        expanded: list[tuple[tuple[int, ...], Component]] = []
        for c in s.components:
            for branch in measure(c.state, targets):
                expanded.append(
                    (
                        branch.outcome,
                        Component(
                            c.weight * branch.weight,
                            branch.post_state,
                            c.values + branch.outcome,
                        ),
                    )
                )

        if not self.collapse_measurements:
            target = self._splice(
                s,
                {i: new_output},
                components=tuple(comp for _, comp in expanded),
                placeholders=s.placeholders + tuple(names),
            )
            return Step(TAU, target)

        # Naive semantics: branch now, grouped by outcome.
        groups: dict[tuple[int, ...], list[Component]] = {}
        for outcome, comp in expanded:
            groups.setdefault(outcome, []).append(comp)
        branches = []
        for outcome in sorted(groups):
            comps = groups[outcome]
            p = sum(c.weight for c in comps)
            renorm = tuple(Component(c.weight / p, c.state, c.values) for c in comps)
            cfg = self._splice(
                s,
                {i: new_output},
                components=renorm,
                placeholders=s.placeholders + tuple(names),
            )
            branches.append((p, outcome, cfg))
        if len(branches) == 1:
            return Step(TAU, branches[0][2])
        return Step(TAU, ProbConfig(tuple(branches)))

    def _sync(self, s: Config, i: int, out: Output, j: int, inp: Input) -> Step:
        if len(out.items) != len(inp.binders):
            raise CqpSemanticsError(
                f"message arity mismatch on channel {out.channel!r}"
            )
        sub: dict[str, Expr] = {}
        extra_names: list[str] = []
        extra_cols: list[list[int]] = []
        for (binder, _), item in zip(inp.binders, out.items):
            if isinstance(item, (QubitRef, BitLit, Var)):
                sub[binder] = item
            else:
                # compound classical expression: its per-component value
                # becomes a fresh placeholder
                name = self._fresh_placeholders(s, len(extra_names) + 1)[-1]
                extra_names.append(name)
                extra_cols.append(
                    [eval_bit(item, s.component_env(c)) for c in s.components]
                )
                sub[binder] = Var(name)
        comps = s.components
        if extra_names:
            comps = tuple(
                Component(
                    c.weight,
                    c.state,
                    c.values + tuple(col[ci] for col in extra_cols),
                )
                for ci, c in enumerate(s.components)
            )
        from cqp.lang.ast import substitute

        target = self._splice(
            s,
            {i: out.cont, j: substitute(inp.cont, sub)},
            components=comps,
            placeholders=s.placeholders + tuple(extra_names),
        )
        return Step(TAU, target)

    def _emit(self, s: Config, i: int, out: Output) -> Step:
        sent: list[str] = []
        classical: list[Expr] = []
        for item in out.items:
            if isinstance(item, QubitRef):
                sent.append(item.name)
            else:
                classical.append(item)
        groups: dict[tuple[int, ...], list[Component]] = {}
        for c in s.components:
            env = s.component_env(c)
            vals = tuple(eval_bit(e, env) for e in classical)
            groups.setdefault(vals, []).append(c)
        label = OutputLabel(out.channel, frozenset(groups), tuple(sent))
        owned = s.owned - frozenset(sent)
        branches = []
        for vals in sorted(groups):
            comps = groups[vals]
            p = sum(c.weight for c in comps)
            renorm = tuple(Component(c.weight / p, c.state, c.values) for c in comps)
            cfg = self._splice(s, {i: out.cont}, components=renorm, owned=owned)
            branches.append((p, vals, cfg))
        if len(branches) == 1:
            return Step(label, branches[0][2])
        return Step(label, ProbConfig(tuple(branches)))

    def _env_input(self, s: Config, i: int, inp: Input) -> list[Step]:
        env_qubits = s.env_qubits()
        choices_per_binder = []
        for binder, ty in inp.binders:
            if isinstance(ty, QbitType):
                opts = [("env", q) for q in env_qubits]
                opts += [("fresh", ps) for ps in self.policy.qubit_states]
                choices_per_binder.append(opts)
            else:
                choices_per_binder.append([("bit", v) for v in self.policy.bit_values])
        steps = []
        for combo in product(*choices_per_binder):
            env_used = [q for kind, q in combo if kind == "env"]
            if len(set(env_used)) != len(env_used):
                continue
            sub: dict[str, Expr] = {}
            label_values: list[object] = []
            tags: list[str] = []
            comps = list(s.components)
            owned = set(s.owned)
            fresh_count = 0
            for (binder, _), (kind, choice) in zip(inp.binders, combo):
                if kind == "bit":
                    sub[binder] = BitLit(choice)
                    label_values.append(choice)
                    tags.append(f"{binder}={choice}")
                elif kind == "env":
                    sub[binder] = QubitRef(choice)
                    label_values.append(choice)
                    owned.add(choice)
                    tags.append(f"env:{choice}")
                else:  # fresh policy state
                    handle = self._fresh_qubits(s, fresh_count + 1)[-1]
                    fresh_count += 1
                    comps = [
                        Component(
                            c.weight,
                            extend_with_state(c.state, handle, choice.vector()),
                            c.values,
                        )
                        for c in comps
                    ]
                    sub[binder] = QubitRef(handle)
                    label_values.append(handle)
                    owned.add(handle)
                    tags.append(choice.name)
            from cqp.lang.ast import substitute

            target = self._splice(
                s,
                {i: substitute(inp.cont, sub)},
                components=tuple(comps),
                owned=frozenset(owned),
            )
            steps.append(
                Step(InputLabel(inp.channel, tuple(label_values)), target, tuple(tags))
            )
        return steps

"""Execution engine: spiking-vector enumeration, step formulas, traces.

Vectors are plain int tuples; matrices are IntMatrix.  A SimState is the
complete carry state entering a step: configuration, per-rule remaining
delay (dst), per-neuron open/closed status (st, derived from dst), and
per-rule queued production (standard mode only).

Two delay semantics are provided, selected by `mode`:

  "standard"    A rule fired at time t with delay d consumes at t; its
                neuron is closed during (t, t+d] and reopens at t+d+1;
                the production is delivered at t+d to targets open at
                that step (lost to closed targets) and the rule's
                indicator bit is set at t+d.  The firing neuron can
                still receive at t itself.

  "paper-trace" A delayed rule consumes at firing time and closes its
                neuron for d steps, recorded immediately at the firing
                step (deferred by one step when firing at k = 0); the
                delayed production is never delivered and the rule's
                indicator bit is never set.  This mode exists to
                reproduce reference computations whose tables follow
                exactly this bookkeeping.

In both modes the recorded status of step k gates deliveries at step k,
and rule selection at step k uses the carry status entering k (a neuron
closing at k in paper-trace mode may still have been selected at k).
For delay-free systems the two modes coincide with the plain formula
C(k+1) = C(k) + Sp(k) . M.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, replace

from .matrices import (
    IntMatrix,
    augmented_matrix,
    consumption_matrix,
    hadamard,
    production_matrix,
    spiking_matrix,
    vec_add,
    vec_sub,
)
from .model import SNPSystem

__all__ = [
    "SimState",
    "StepRecord",
    "Trace",
    "TreeNode",
    "TraceTree",
    "initial_state",
    "status_from_dst",
    "rule_status",
    "enumerate_spiking_vectors",
    "is_valid_spiking_vector",
    "net_gain",
    "step_no_delay",
    "step_with_delay_v1",
    "step_with_delay_v2",
    "update_delay_state",
    "operational_step",
    "formula_step",
    "run_trace",
    "achievable_first_intervals",
    "check_step_identities",
    "StepIdentityEntry",
    "IdentityReport",
    "FormulaComparison",
    "formula_comparison_report",
]

MODES = ("standard", "paper-trace")


@dataclass(frozen=True)
class SimState:
    """Carry state entering step k."""

    k: int
    config: tuple[int, ...]
    dst: tuple[int, ...]  # remaining closed steps per rule
    st: tuple[int, ...]  # open (1) / closed (0) per neuron
    pending: tuple[tuple[int, int] | None, ...]  # (release step, amount) per rule


def status_from_dst(sys: SNPSystem, dst: tuple[int, ...]) -> tuple[int, ...]:
    """A neuron is open iff none of its rules is mid-delay."""
    st = [1] * sys.neuron_count
    for i, left in enumerate(dst):
        if left > 0:
            st[sys.rules[i].owner] = 0
    return tuple(st)


def rule_status(sys: SNPSystem, st: tuple[int, ...]) -> tuple[int, ...]:
    """Per-rule openness of the owner neuron."""
    return tuple(st[r.owner] for r in sys.rules)


def initial_state(sys: SNPSystem) -> SimState:
    n = sys.rule_count
    return SimState(
        k=0,
        config=sys.initial,
        dst=(0,) * n,
        st=(1,) * sys.neuron_count,
        pending=(None,) * n,
    )


# --- spiking vectors ---------------------------------------------------------


def enumerate_spiking_vectors(
    sys: SNPSystem, C: tuple[int, ...], St: tuple[int, ...]
) -> list[tuple[int, ...]]:
    """All valid spiking vectors for configuration C under status St.

    Every open neuron with at least one applicable rule chooses exactly
    one; closed neurons and neurons with nothing applicable contribute
    no bits.  Empty list iff no neuron can fire (halting configuration
    when additionally St is all-ones and nothing is queued).  Vectors
    are ordered by their support tuple (ascending rule indices), so the
    head of the list picks the lowest-indexed rule in every neuron.
    """
    n = sys.rule_count
    choices: list[tuple[int, ...]] = []
    for j in range(sys.neuron_count):
        if not St[j]:
            continue
        applicable = tuple(
            i for i in sys.rules_of[j] if sys.rules[i].applicable(C[j])
        )
        if applicable:
            choices.append(applicable)
    if not choices:
        return []
    out = []
    for combo in itertools.product(*choices):
        v = [0] * n
        for i in combo:
            v[i] = 1
        out.append(tuple(v))
    out.sort(key=lambda v: tuple(i for i, b in enumerate(v) if b))
    return out


def is_valid_spiking_vector(
    sys: SNPSystem,
    C: tuple[int, ...],
    St: tuple[int, ...],
    Sp: tuple[int, ...],
) -> bool:
    """Membership test for enumerate_spiking_vectors without materializing it."""
    if len(Sp) != sys.rule_count or any(b not in (0, 1) for b in Sp):
        return False
    fired_any = False
    for j in range(sys.neuron_count):
        chosen = [i for i in sys.rules_of[j] if Sp[i]]
        applicable = [
            i for i in sys.rules_of[j] if sys.rules[i].applicable(C[j])
        ]
        if not St[j]:
            if chosen:
                return False
            continue
        if applicable:
            # an open neuron that can fire must fire exactly one rule
            if len(chosen) != 1 or chosen[0] not in applicable:
                return False
            fired_any = True
        elif chosen:
            return False
    return fired_any


# --- step formulas -----------------------------------------------------------


def net_gain(Sp: tuple[int, ...], M: IntMatrix) -> tuple[int, ...]:
    return M.vecmat(Sp)


def step_no_delay(
    C: tuple[int, ...], Sp: tuple[int, ...], M: IntMatrix
) -> tuple[int, ...]:
    nxt = vec_add(C, M.vecmat(Sp))
    if any(x < 0 for x in nxt):
        raise ValueError(
            f"negative spike count {nxt}: spiking vector {Sp} was not valid at {C}"
        )
    return nxt


def step_with_delay_v1(
    C: tuple[int, ...],
    Sp: tuple[int, ...],
    Iv: tuple[int, ...],
    St: tuple[int, ...],
    PM: IntMatrix,
    CM: IntMatrix,
) -> tuple[int, ...]:
    """C + St (*) (Iv . PM) - Sp . CM, (*) elementwise; gains gated by
    the receiving neuron's open status at this step."""
    gv = PM.vecmat(Iv)
    lv = CM.vecmat(Sp)
    nxt = vec_sub(vec_add(C, hadamard(St, gv)), lv)
    if any(x < 0 for x in nxt):
        raise ValueError(
            f"negative spike count {nxt}: step context C={C} Sp={Sp} Iv={Iv} St={St}"
        )
    return nxt


def step_with_delay_v2(
    C: tuple[int, ...],
    Iv: tuple[int, ...],
    St_next: tuple[int, ...],
    M: IntMatrix,
) -> tuple[int, ...]:
    """St(k+1) (*) (C + Iv . M); the next-step status masks everything."""
    return hadamard(St_next, vec_add(C, M.vecmat(Iv)))


# --- delay bookkeeping -------------------------------------------------------


def _check_mode(mode: str):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")


def _recorded_dst(
    sys: SNPSystem, state: SimState, Sp: tuple[int, ...], mode: str
) -> tuple[int, ...]:
    """DSt as recorded at step k (gates deliveries at this step)."""
    if mode == "standard":
        return state.dst
    rec = []
    for i, r in enumerate(sys.rules):
        if Sp[i] and r.d > 0 and state.k > 0:
            rec.append(r.d)  # closure shows up at the firing step itself
        else:
            rec.append(state.dst[i])
    return tuple(rec)


def _carry_dst(
    sys: SNPSystem, state: SimState, Sp: tuple[int, ...], mode: str
) -> tuple[int, ...]:
    """DSt carried into step k+1."""
    nxt = []
    for i, r in enumerate(sys.rules):
        if Sp[i] and r.d > 0:
            if mode == "standard" or state.k == 0:
                nxt.append(r.d)
            else:
                nxt.append(r.d - 1)  # already counted once at the firing step
        else:
            nxt.append(max(state.dst[i] - 1, 0))
    return tuple(nxt)


def _released_now(state: SimState) -> tuple[int, ...]:
    """Rules whose queued production is due at this step (standard mode)."""
    return tuple(
        i
        for i, q in enumerate(state.pending)
        if q is not None and q[0] == state.k
    )


def _indicator(
    sys: SNPSystem, state: SimState, Sp: tuple[int, ...], mode: str
) -> tuple[int, ...]:
    """Rules producing at step k: immediate firings, plus due releases in
    standard mode; a delayed rule never produces in paper-trace mode."""
    iv = [1 if Sp[i] and sys.rules[i].d == 0 else 0 for i in range(sys.rule_count)]
    if mode == "standard":
        for i in _released_now(state):
            iv[i] = 1
    return tuple(iv)


def update_delay_state(
    sys: SNPSystem, state: SimState, Sp: tuple[int, ...], mode: str = "standard"
) -> SimState:
    """Advance the delay bookkeeping one step (configuration untouched).

    Newly fired delayed rules take on their full delay (standard mode
    queues their production for step k + d); everything else decrements
    toward 0.  The returned state's st is derived from the new dst.
    """
    _check_mode(mode)
    carry = _carry_dst(sys, state, Sp, mode)
    pending = list(state.pending)
    if mode == "standard":
        for i in _released_now(state):
            pending[i] = None
        for i, r in enumerate(sys.rules):
            if Sp[i] and r.d > 0:
                pending[i] = (state.k + r.d, r.p)
    return SimState(
        k=state.k + 1,
        config=state.config,
        dst=carry,
        st=status_from_dst(sys, carry),
        pending=tuple(pending),
    )


# --- operational oracle ------------------------------------------------------


def operational_step(
    sys: SNPSystem, state: SimState, Sp: tuple[int, ...], mode: str = "standard"
) -> SimState:
    """Next state by direct simulation: per-neuron consumption, per-synapse
    delivery to open receivers, no matrix algebra.  Independent of the
    formula-based stepping on purpose."""
    _check_mode(mode)
    spikes = list(state.config)
    # consumption happens at firing time in both modes
    for i, r in enumerate(sys.rules):
        if Sp[i]:
            spikes[r.owner] -= r.c
            if spikes[r.owner] < 0:
                raise ValueError(f"rule {i} consumed more than present at {state.config}")
    st_now = status_from_dst(sys, _recorded_dst(sys, state, Sp, mode))
    for i in _producing_rules(sys, state, Sp, mode):
        r = sys.rules[i]
        for tgt in sys.targets_of[r.owner]:
            if st_now[tgt]:  # closed neurons reject spikes
                spikes[tgt] += r.p
    nxt = update_delay_state(sys, state, Sp, mode)
    return replace(nxt, config=tuple(spikes))


def _producing_rules(sys, state, Sp, mode) -> list[int]:
    return [i for i, b in enumerate(_indicator(sys, state, Sp, mode)) if b]


# --- traces ------------------------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    """One time point; the action fields describe the step k -> k+1 and
    are all-zero on the terminal record."""

    k: int
    C: tuple[int, ...]
    Sp: tuple[int, ...]
    Iv: tuple[int, ...]
    St: tuple[int, ...]  # recorded status at k
    DSt: tuple[int, ...]  # recorded delay status at k
    NG: tuple[int, ...]
    emitted: int

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "C": list(self.C),
            "Sp": list(self.Sp),
            "Iv": list(self.Iv),
            "St": list(self.St),
            "DSt": list(self.DSt),
            "NG": list(self.NG),
            "emitted": self.emitted,
        }


@dataclass(frozen=True)
class Trace:
    mode: str
    policy: str
    records: tuple[StepRecord, ...]
    final_state: SimState
    halted: bool

    @property
    def configs(self) -> tuple[tuple[int, ...], ...]:
        return tuple(r.C for r in self.records)

    @property
    def spike_train(self) -> str:
        return "".join(
            str(r.emitted) if r.emitted < 10 else f"[{r.emitted}]"
            for r in self.records[:-1]
        )

    @property
    def emission_steps(self) -> tuple[int, ...]:
        return tuple(r.k for r in self.records if r.emitted > 0)

    @property
    def first_interval(self) -> int | None:
        steps = self.emission_steps
        if len(steps) < 2:
            return None
        return steps[1] - steps[0]

    def to_json_lines(self) -> str:
        return "\n".join(json.dumps(r.to_json_dict()) for r in self.records)


class _EnvColumn:
    """Per-rule environment emission amounts (0 when no out neuron)."""

    def __init__(self, sys: SNPSystem):
        if sys.out_neuron is None:
            self.col = (0,) * sys.rule_count
        else:
            self.col = augmented_matrix(sys).column(sys.neuron_count)

    def emitted(self, Iv: tuple[int, ...]) -> int:
        return sum(e * b for e, b in zip(self.col, Iv))


def _make_record(
    sys: SNPSystem,
    state: SimState,
    Sp: tuple[int, ...],
    mode: str,
    env: _EnvColumn,
    matrices,
) -> tuple[StepRecord, SimState]:
    """Execute one step with the formula-based semantics and record it."""
    M, PM, CM = matrices
    rec_dst = _recorded_dst(sys, state, Sp, mode)
    st_rec = status_from_dst(sys, rec_dst)
    iv = _indicator(sys, state, Sp, mode)
    if sys.has_delays:
        c_next = step_with_delay_v1(state.config, Sp, iv, st_rec, PM, CM)
    else:
        c_next = step_no_delay(state.config, Sp, M)
    record = StepRecord(
        k=state.k,
        C=state.config,
        Sp=Sp,
        Iv=iv,
        St=st_rec,
        DSt=rec_dst,
        NG=vec_sub(c_next, state.config),
        emitted=env.emitted(iv),
    )
    nxt = replace(update_delay_state(sys, state, Sp, mode), config=c_next)
    return record, nxt


def formula_step(
    sys: SNPSystem, state: SimState, Sp: tuple[int, ...], mode: str = "standard"
) -> tuple[StepRecord, SimState]:
    """One formula-based step (record + next state) for external callers;
    run_trace uses the same machinery with the matrices built once."""
    _check_mode(mode)
    env = _EnvColumn(sys)
    mats = (spiking_matrix(sys), production_matrix(sys), consumption_matrix(sys))
    return _make_record(sys, state, Sp, mode, env, mats)


def _terminal_record(sys: SNPSystem, state: SimState) -> StepRecord:
    zero_n = (0,) * sys.rule_count
    zero_m = (0,) * sys.neuron_count
    return StepRecord(
        k=state.k,
        C=state.config,
        Sp=zero_n,
        Iv=zero_n,
        St=state.st,
        DSt=state.dst,
        NG=zero_m,
        emitted=0,
    )


def _is_halted(sys: SNPSystem, state: SimState, mode: str) -> bool:
    if any(b == 0 for b in state.st):
        return False
    if mode == "standard" and any(q is not None for q in state.pending):
        return False
    return not enumerate_spiking_vectors(sys, state.config, state.st)


def run_trace(
    sys: SNPSystem,
    steps: int,
    policy: str = "first",
    mode: str = "standard",
    seed: int | None = None,
):
    """Simulate up to `steps` steps.  Policies: "first" picks the
    lowest-indexed rule per neuron, "random" needs a seed, "exhaustive"
    returns the full bounded TraceTree instead of a single Trace.

    The trace has one record per time point 0..K (K <= steps); the last
    record carries no action.  Steps with no fireable neuron but closed
    neurons or queued productions still advance time (idle steps)."""
    _check_mode(mode)
    if policy == "exhaustive":
        return _run_tree(sys, steps, mode)
    if policy == "random":
        if seed is None:
            raise ValueError("policy 'random' needs a seed")
        rng = random.Random(seed)
    elif policy != "first":
        raise ValueError(f"unknown policy {policy!r}")

    env = _EnvColumn(sys)
    mats = (spiking_matrix(sys), production_matrix(sys), consumption_matrix(sys))
    state = initial_state(sys)
    records: list[StepRecord] = []
    halted = False
    for _ in range(steps):
        if _is_halted(sys, state, mode):
            halted = True
            break
        candidates = enumerate_spiking_vectors(sys, state.config, state.st)
        if candidates:
            sp = candidates[0] if policy == "first" else rng.choice(candidates)
        else:
            sp = (0,) * sys.rule_count  # idle: delays keep counting down
        record, state = _make_record(sys, state, sp, mode, env, mats)
        records.append(record)
    if not halted:
        halted = _is_halted(sys, state, mode)
    records.append(_terminal_record(sys, state))
    return Trace(
        mode=mode,
        policy=policy,
        records=tuple(records),
        final_state=state,
        halted=halted,
    )


@dataclass(frozen=True)
class TreeNode:
    state: SimState
    halted: bool
    children: tuple[tuple[StepRecord, "TreeNode"], ...]


@dataclass(frozen=True)
class TraceTree:
    mode: str
    root: TreeNode
    depth: int

    def paths(self):
        """Yield every root-to-leaf record sequence."""

        def walk(node, prefix):
            if not node.children:
                yield prefix, node
                return
            for record, child in node.children:
                yield from walk(child, prefix + [record])

        yield from walk(self.root, [])

    def leaf_count(self) -> int:
        return sum(1 for _ in self.paths())


def _run_tree(sys: SNPSystem, depth: int, mode: str) -> TraceTree:
    env = _EnvColumn(sys)
    mats = (spiking_matrix(sys), production_matrix(sys), consumption_matrix(sys))

    def expand(state: SimState, left: int) -> TreeNode:
        if left == 0:
            return TreeNode(state, _is_halted(sys, state, mode), ())
        if _is_halted(sys, state, mode):
            return TreeNode(state, True, ())
        candidates = enumerate_spiking_vectors(sys, state.config, state.st)
        if not candidates:
            candidates = [(0,) * sys.rule_count]  # idle
        children = []
        for sp in candidates:
            record, nxt = _make_record(sys, state, sp, mode, env, mats)
            children.append((record, expand(nxt, left - 1)))
        return TreeNode(state, False, tuple(children))

    return TraceTree(mode=mode, root=expand(initial_state(sys), depth), depth=depth)


def achievable_first_intervals(
    sys: SNPSystem, depth: int, mode: str = "standard"
) -> set[int]:
    """Intervals between the first two emissions over every computation
    path of length <= depth."""
    tree = run_trace(sys, depth, policy="exhaustive", mode=mode)
    out: set[int] = set()
    for records, _leaf in tree.paths():
        emission_steps = [r.k for r in records if r.emitted > 0]
        if len(emission_steps) >= 2:
            out.add(emission_steps[1] - emission_steps[0])
    return out


# --- cross-formula checks ----------------------------------------------------


@dataclass(frozen=True)
class StepIdentityEntry:
    Sp: tuple[int, ...]
    Iv: tuple[int, ...]
    St: tuple[int, ...]
    RSt: tuple[int, ...]
    lhs: tuple[int, ...]  # St (*) (Iv . M)
    rhs: tuple[int, ...]  # (RSt (*) Iv) . M
    rst_identity_holds: bool
    v1_config: tuple[int, ...]
    v2_config: tuple[int, ...]
    oracle_config: tuple[int, ...]
    v1_eq_v2: bool
    v1_eq_oracle: bool


@dataclass(frozen=True)
class IdentityReport:
    k: int
    entries: tuple[StepIdentityEntry, ...]

    @property
    def all_agree(self) -> bool:
        return all(
            e.rst_identity_holds and e.v1_eq_v2 and e.v1_eq_oracle
            for e in self.entries
        )


def check_step_identities(
    sys: SNPSystem,
    state: SimState,
    mode: str = "standard",
    st_next: tuple[int, ...] | None = None,
) -> IdentityReport:
    """For every valid spiking vector at `state`, compare the one-step
    results of the v1 and v2 formulas and the operational oracle, and
    evaluate both sides of the owner-vs-receiver status identity
    St (*) (Iv . M) = (RSt (*) Iv) . M.  Everything is reported, nothing
    asserted: the identity genuinely fails on states where a closed
    neuron's column and an open producer's row meet.

    v2 needs the status at k+1.  Self-contained calls use the carry
    status implied by each candidate; a caller replaying a recorded
    trace can pass the status the trace actually recorded at k+1 via
    `st_next` (the two differ when the next step itself fires a delayed
    rule and closures are recorded at firing time)."""
    M = spiking_matrix(sys)
    PM = production_matrix(sys)
    CM = consumption_matrix(sys)
    entries = []
    for sp in enumerate_spiking_vectors(sys, state.config, state.st):
        rec_dst = _recorded_dst(sys, state, sp, mode)
        st_rec = status_from_dst(sys, rec_dst)
        iv = _indicator(sys, state, sp, mode)
        rst = rule_status(sys, st_rec)
        lhs = hadamard(st_rec, M.vecmat(iv))
        rhs = M.vecmat(hadamard(rst, iv))
        v1 = step_with_delay_v1(state.config, sp, iv, st_rec, PM, CM)
        nxt = update_delay_state(sys, state, sp, mode)
        v2 = step_with_delay_v2(
            state.config, iv, nxt.st if st_next is None else st_next, M
        )
        oracle = operational_step(sys, state, sp, mode).config
        entries.append(
            StepIdentityEntry(
                Sp=sp,
                Iv=iv,
                St=st_rec,
                RSt=rst,
                lhs=lhs,
                rhs=rhs,
                rst_identity_holds=lhs == rhs,
                v1_config=v1,
                v2_config=v2,
                oracle_config=oracle,
                v1_eq_v2=v1 == v2,
                v1_eq_oracle=v1 == oracle,
            )
        )
    return IdentityReport(k=state.k, entries=tuple(entries))


@dataclass(frozen=True)
class FormulaComparison:
    """One executed step of a trace, re-derived through each formula."""

    k: int
    actual_next: tuple[int, ...]
    v2_carry: tuple[int, ...]  # St(k+1) = carry status entering k+1
    v2_recorded: tuple[int, ...]  # St(k+1) = status recorded at k+1
    v2_carry_agrees: bool
    v2_recorded_agrees: bool


def formula_comparison_report(
    sys: SNPSystem, trace: Trace
) -> tuple[FormulaComparison, ...]:
    """Re-evaluate the masked one-step formula along a recorded trace,
    under both readings of "status at k+1".  The readings split exactly
    at steps whose successor fires a delayed rule; the report states the
    split instead of leaning on either side."""
    M = spiking_matrix(sys)
    out = []
    records = trace.records
    for k in range(len(records) - 1):
        rec, nxt = records[k], records[k + 1]
        # _carry_dst only reads state.dst for rules that did not fire,
        # where the recorded DSt equals the carry in both modes
        synth = SimState(
            k=rec.k,
            config=rec.C,
            dst=rec.DSt,
            st=rec.St,
            pending=(None,) * sys.rule_count,
        )
        carry_st = status_from_dst(
            sys, _carry_dst(sys, synth, rec.Sp, trace.mode)
        )
        v2c = step_with_delay_v2(rec.C, rec.Iv, carry_st, M)
        v2r = step_with_delay_v2(rec.C, rec.Iv, nxt.St, M)
        out.append(
            FormulaComparison(
                k=rec.k,
                actual_next=nxt.C,
                v2_carry=v2c,
                v2_recorded=v2r,
                v2_carry_agrees=v2c == nxt.C,
                v2_recorded_agrees=v2r == nxt.C,
            )
        )
    return tuple(out)

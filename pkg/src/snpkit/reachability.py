"""Reachability of configurations by sum-vector decomposition.

A target C is k-reachable iff C - C(0) = s . M for some s that splits
into k valid spiking vectors applied in sequence.  The pipeline:

  1. solve the integer linear system s . M = C - C(0) exactly (rational
     row reduction; free variables enumerated up to the bound
     sum(s) <= k_max * m, which any k_max-step path must satisfy);
  2. try to decompose each candidate s, smallest first, by a
     breadth-first search over residuals (full backtracking: the
     residual determines the configuration, so visited residuals prune
     the search and BFS depth gives the fewest steps for that s);
  3. cross-checkable against bfs_oracle, a direct breadth-first
     exploration of the computuation tree that ignores the algebra.

Delay-free systems only: with delays the per-step gain depends on
open/closed status, so C - C(0) = s . M no longer characterizes paths.
For delayed systems this module offers verify_delay_closed_form, which
replays a recorded trace against the status-masked closed-form sum and
reports where the two sides agree (they provably split at steps whose
production is lost to a closure that no later mask cancels).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .engine import (
    Trace,
    enumerate_spiking_vectors,
    rule_status,
    step_no_delay,
)
from .matrices import IntMatrix, hadamard, spiking_matrix, vec_sub
from .model import SNPSystem

__all__ = [
    "SolutionFamily",
    "solve_family",
    "sum_vector_solutions",
    "TrialRow",
    "CandidateFailure",
    "ReachabilityCertificate",
    "decompose_sum_vector",
    "is_reachable",
    "reach_between",
    "bfs_oracle",
    "reachable_set",
    "ClosedFormEntry",
    "ClosedFormReport",
    "verify_delay_closed_form",
]


# --- linear algebra over exact numbers ----------------------------------------


def _rref_parametrize(M: IntMatrix, delta: tuple[int, ...]):
    """Row-reduce the equations s . M = delta over Q.

    Returns (pivots, free, exprs) where exprs[c] for a pivot column c is
    (const, {free_col: coef}) meaning s_c = const - sum(coef * s_f), or
    None when the system is inconsistent."""
    n, m = M.rows, M.cols
    # equation j:  sum_i s_i * M[i][j] = delta[j]
    aug = [
        [Fraction(M.data[i][j]) for i in range(n)] + [Fraction(delta[j])]
        for j in range(m)
    ]
    pivots: dict[int, int] = {}  # unknown column -> equation row
    row = 0
    for col in range(n):
        piv = next((r for r in range(row, m) if aug[r][col] != 0), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        lead = aug[row][col]
        aug[row] = [x / lead for x in aug[row]]
        for r in range(m):
            if r != row and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[row])]
        pivots[col] = row
        row += 1
    for r in range(row, m):
        if aug[r][n] != 0:
            return None  # 0 = nonzero: no solutions at all
    free = [c for c in range(n) if c not in pivots]
    exprs = {}
    for col, r in pivots.items():
        exprs[col] = (aug[r][n], {f: aug[r][f] for f in free if aug[r][f] != 0})
    return pivots, free, exprs


def _integer_left_kernel(M: IntMatrix) -> tuple[tuple[int, ...], ...]:
    """Basis of { v in Z^n : v . M = 0 } by integer row reduction of M
    while tracking the unimodular transform."""
    n, m = M.rows, M.cols
    a = [list(row) for row in M.data]
    u = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    row = 0
    for col in range(m):
        while True:
            live = [i for i in range(row, n) if a[i][col] != 0]
            if not live:
                break
            if len(live) == 1:
                i = live[0]
                a[row], a[i] = a[i], a[row]
                u[row], u[i] = u[i], u[row]
                row += 1
                break
            live.sort(key=lambda i: abs(a[i][col]))
            base, other = live[0], live[1]
            q = a[other][col] // a[base][col]
            a[other] = [x - q * y for x, y in zip(a[other], a[base])]
            u[other] = [x - q * y for x, y in zip(u[other], u[base])]
    return tuple(tuple(u[i]) for i in range(row, n))


@dataclass(frozen=True)
class SolutionFamily:
    """All rational solutions of s . M = delta, plus the integer lattice
    directions, bounded for enumeration."""

    delta: tuple[int, ...]
    particular: tuple[Fraction, ...] | None  # None: system inconsistent
    kernel_basis: tuple[tuple[int, ...], ...]
    bound: int  # max allowed sum(s)

    @property
    def consistent(self) -> bool:
        return self.particular is not None


def solve_family(M: IntMatrix, delta: tuple[int, ...], bound: int) -> SolutionFamily:
    parts = _rref_parametrize(M, delta)
    kernel = _integer_left_kernel(M)
    if parts is None:
        return SolutionFamily(delta, None, kernel, bound)
    pivots, free, exprs = parts
    particular = [Fraction(0)] * M.rows
    for col, (const, _coefs) in exprs.items():
        particular[col] = const
    return SolutionFamily(delta, tuple(particular), kernel, bound)


def _enumerate_nonneg(M: IntMatrix, delta: tuple[int, ...], bound: int):
    """All nonnegative integer s with s . M = delta and sum(s) <= bound.

    Any such s has every free coordinate <= bound, so depth-first search
    over free assignments with a running-sum cutoff is complete."""
    parts = _rref_parametrize(M, delta)
    if parts is None:
        return []
    pivots, free, exprs = parts
    out = []

    def emit(assignment: dict[int, int], free_sum: int):
        s = [0] * M.rows
        total = free_sum
        for col, val in assignment.items():
            s[col] = val
        for col, (const, coefs) in exprs.items():
            v = const - sum(c * assignment[f] for f, c in coefs.items())
            if v.denominator != 1 or v < 0:
                return
            s[col] = int(v)
            total += s[col]
            if total > bound:
                return
        out.append(tuple(s))

    def walk(idx: int, assignment: dict[int, int], free_sum: int):
        if idx == len(free):
            emit(assignment, free_sum)
            return
        col = free[idx]
        for v in range(bound - free_sum + 1):
            assignment[col] = v
            walk(idx + 1, assignment, free_sum + v)
        del assignment[col]

    walk(0, {}, 0)
    return out


def sum_vector_solutions(
    M: IntMatrix,
    C0: tuple[int, ...],
    C_target: tuple[int, ...],
    k_max: int,
) -> list[tuple[int, ...]]:
    """Candidate sum vectors for reaching C_target in <= k_max steps,
    deduplicated and sorted by (sum, lexicographic)."""
    if len(C0) != M.cols or len(C_target) != M.cols:
        raise ValueError("configuration length does not match matrix columns")
    delta = vec_sub(C_target, C0)
    bound = k_max * M.cols
    found = sorted(set(_enumerate_nonneg(M, delta, bound)), key=lambda s: (sum(s), s))
    return found


# --- decomposition into valid spiking vectors ----------------------------------


@dataclass(frozen=True)
class TrialRow:
    """One row of the illustrative decomposition table."""

    step: int
    residual: tuple[int, ...]  # after subtracting Sp (may show a negative)
    Sp: tuple[int, ...] | None
    config: tuple[int, ...]  # configuration after the step (or at failure)
    note: str | None

    def to_json_dict(self) -> dict:
        return {
            "step": self.step,
            "residual": list(self.residual),
            "Sp": None if self.Sp is None else list(self.Sp),
            "config": list(self.config),
            "note": self.note,
        }


@dataclass(frozen=True)
class CandidateFailure:
    s_bar: tuple[int, ...]
    reason: str
    table: tuple[TrialRow, ...]

    def to_json_dict(self) -> dict:
        return {
            "s_bar": list(self.s_bar),
            "reason": self.reason,
            "table": [row.to_json_dict() for row in self.table],
        }


@dataclass(frozen=True)
class ReachabilityCertificate:
    verdict: str  # "reachable" | "not-reachable-within-bounds" | "invalid-target"
    k: int | None = None
    configs: tuple[tuple[int, ...], ...] | None = None
    spiking_vectors: tuple[tuple[int, ...], ...] | None = None
    s_bar: tuple[int, ...] | None = None
    failures: tuple[CandidateFailure, ...] = ()
    candidates_tried: int = 0

    @property
    def reachable(self) -> bool:
        return self.verdict == "reachable"

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "k": self.k,
            "configs": None
            if self.configs is None
            else [list(c) for c in self.configs],
            "spiking_vectors": None
            if self.spiking_vectors is None
            else [list(s) for s in self.spiking_vectors],
            "s_bar": None if self.s_bar is None else list(self.s_bar),
            "candidates_tried": self.candidates_tried,
            "failures": [f.to_json_dict() for f in self.failures],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def _greedy_table(
    sys: SNPSystem, M: IntMatrix, C0: tuple[int, ...], s_bar: tuple[int, ...]
) -> tuple[tuple[TrialRow, ...], str]:
    """Single-path walk recording why this candidate gets stuck: prefer
    any choice that keeps the residual nonnegative, otherwise show the
    first violating subtraction."""
    ones = (1,) * sys.neuron_count
    residual = s_bar
    config = C0
    rows: list[TrialRow] = []
    step = 0
    while any(residual):
        cands = enumerate_spiking_vectors(sys, config, ones)
        usable = [
            sp for sp in cands if all(b <= r for b, r in zip(sp, residual))
        ]
        if usable:
            sp = usable[0]
            residual = vec_sub(residual, sp)
            config = step_no_delay(config, sp, M)
            rows.append(TrialRow(step, residual, sp, config, None))
            step += 1
            continue
        if not cands:
            reason = "not a valid spiking vector"
            rows.append(TrialRow(step, residual, None, config, reason))
        elif all(x in (0, 1) for x in residual):
            # the leftover is itself one spiking vector's worth, but it
            # cannot fire at this configuration
            reason = "not a valid spiking vector"
            rows.append(TrialRow(step, residual, None, config, reason))
        else:
            reason = "not a valid sum vector"
            trial = cands[0]
            rows.append(
                TrialRow(step, vec_sub(residual, trial), trial, config, reason)
            )
        return tuple(rows), reason
    return tuple(rows), "exhausted"


def decompose_sum_vector(
    sys: SNPSystem, C0: tuple[int, ...], s_bar: tuple[int, ...]
) -> ReachabilityCertificate:
    """Split s_bar into the fewest valid spiking vectors applied from C0.

    Breadth-first search over residuals; the configuration is always
    C0 + (s_bar - residual) . M, so the residual alone is the state.
    Full backtracking: all spiking-vector choices are explored, not just
    the narrative single path (which is still reported on failure)."""
    if len(s_bar) != sys.rule_count:
        raise ValueError("sum vector length does not match rule count")
    if any(x < 0 for x in s_bar):
        raise ValueError("sum vector entries must be nonnegative")
    M = spiking_matrix(sys)
    ones = (1,) * sys.neuron_count

    def config_of(residual: tuple[int, ...]) -> tuple[int, ...]:
        used = vec_sub(s_bar, residual)
        return tuple(c + d for c, d in zip(C0, M.vecmat(used)))

    start = tuple(s_bar)
    parent: dict[tuple[int, ...], tuple[tuple[int, ...], tuple[int, ...]] | None]
    parent = {start: None}
    frontier = [start]
    zero = (0,) * sys.rule_count
    while frontier:
        nxt: list[tuple[int, ...]] = []
        for residual in frontier:
            if residual == zero:
                # walk back to the start to recover the sequence
                seq: list[tuple[int, ...]] = []
                cur = residual
                while parent[cur] is not None:
                    prev, sp = parent[cur]
                    seq.append(sp)
                    cur = prev
                seq.reverse()
                configs = [tuple(C0)]
                for sp in seq:
                    configs.append(step_no_delay(configs[-1], sp, M))
                return ReachabilityCertificate(
                    verdict="reachable",
                    k=len(seq),
                    configs=tuple(configs),
                    spiking_vectors=tuple(seq),
                    s_bar=start,
                    candidates_tried=1,
                )
            config = config_of(residual)
            for sp in enumerate_spiking_vectors(sys, config, ones):
                if not all(b <= r for b, r in zip(sp, residual)):
                    continue
                child = vec_sub(residual, sp)
                if child not in parent:
                    parent[child] = (residual, sp)
                    nxt.append(child)
        frontier = nxt
    table, reason = _greedy_table(sys, M, C0, s_bar)
    return ReachabilityCertificate(
        verdict="not-reachable-within-bounds",
        failures=(CandidateFailure(start, reason, table),),
        candidates_tried=1,
    )


# --- end-to-end decision ---------------------------------------------------------


def reach_between(
    sys: SNPSystem,
    C_from: tuple[int, ...],
    C_to: tuple[int, ...],
    v_max: int,
) -> ReachabilityCertificate:
    """Decide whether C_to is reachable from C_from within v_max steps.

    Candidates are tried smallest-sum first; once a witness with k steps
    is found, any untried candidate with sum(s) > (k-1)*m cannot do
    better (each step fires at most m rules), so the iteration stops
    with the smallest witnessed k."""
    if sys.has_delays:
        raise ValueError(
            "reachability by sum vectors needs a delay-free system; "
            "use verify_delay_closed_form on recorded traces instead"
        )
    m = sys.neuron_count
    if len(C_to) != m or len(C_from) != m:
        raise ValueError("configuration length does not match neuron count")
    if any(x < 0 for x in C_to):
        return ReachabilityCertificate(verdict="invalid-target")
    M = spiking_matrix(sys)
    candidates = sum_vector_solutions(M, C_from, C_to, v_max)
    failures: list[CandidateFailure] = []
    best: ReachabilityCertificate | None = None
    tried = 0
    for s_bar in candidates:
        if best is not None and sum(s_bar) > (best.k - 1) * m:
            break
        tried += 1
        cert = decompose_sum_vector(sys, C_from, s_bar)
        if cert.reachable and cert.k <= v_max:
            if best is None or cert.k < best.k:
                best = cert
        elif cert.reachable:
            # splits, but its shortest split needs more steps than allowed
            failures.append(CandidateFailure(tuple(s_bar), "bound exhausted", ()))
        else:
            failures.extend(cert.failures)
    if best is not None:
        return ReachabilityCertificate(
            verdict="reachable",
            k=best.k,
            configs=best.configs,
            spiking_vectors=best.spiking_vectors,
            s_bar=best.s_bar,
            failures=tuple(failures),
            candidates_tried=tried,
        )
    return ReachabilityCertificate(
        verdict="not-reachable-within-bounds",
        failures=tuple(failures),
        candidates_tried=tried,
    )


def is_reachable(
    sys: SNPSystem, C_target: tuple[int, ...], k_max: int
) -> ReachabilityCertificate:
    """Reachability from the initial configuration; see reach_between."""
    return reach_between(sys, sys.initial, C_target, k_max)


# --- independent ground truth ------------------------------------------------------


def reachable_set(
    sys: SNPSystem, k_max: int, C_from: tuple[int, ...] | None = None
) -> dict[tuple[int, ...], int]:
    """Every configuration reachable within k_max steps, mapped to its
    breadth-first (= smallest) step count."""
    if sys.has_delays:
        raise ValueError("breadth-first reachability needs a delay-free system")
    ones = (1,) * sys.neuron_count
    M = spiking_matrix(sys)
    start = tuple(sys.initial if C_from is None else C_from)
    depth = {start: 0}
    frontier = [start]
    for level in range(1, k_max + 1):
        nxt = []
        for config in frontier:
            for sp in enumerate_spiking_vectors(sys, config, ones):
                child = step_no_delay(config, sp, M)
                if child not in depth:
                    depth[child] = level
                    nxt.append(child)
        frontier = nxt
    return depth


def bfs_oracle(
    sys: SNPSystem,
    C_target: tuple[int, ...],
    k_max: int,
    C_from: tuple[int, ...] | None = None,
) -> tuple[bool, int | None]:
    """(reachable within k_max, smallest k) by plain search; no algebra."""
    depth = reachable_set(sys, k_max, C_from)
    k = depth.get(tuple(C_target))
    return (k is not None), k


# --- closed form along delayed traces ------------------------------------------------


@dataclass(frozen=True)
class ClosedFormEntry:
    prefix: int  # uses records 0..prefix, predicts C(prefix+1)
    predicted: tuple[int, ...]
    actual: tuple[int, ...]
    agrees: bool


@dataclass(frozen=True)
class ClosedFormReport:
    entries: tuple[ClosedFormEntry, ...]

    @property
    def all_agree(self) -> bool:
        return all(e.agrees for e in self.entries)

    @property
    def first_failure(self) -> int | None:
        return next((e.prefix for e in self.entries if not e.agrees), None)


def verify_delay_closed_form(sys: SNPSystem, trace: Trace) -> ClosedFormReport:
    """Evaluate, for every prefix of the trace, the status-masked sum

        C(k+1) =? (St(1) (*) ... (*) St(k+1)) (*) C(0)
                  + sum_j (St(j+2) (*) ... (*) St(k+1))
                          (*) ((RSt(j+1) (*) Iv(j)) . M)

    against the recorded C(k+1).  Per-entry agreement is reported, never
    asserted: a production lost to a closed receiver at step j is only
    cancelled if some later status mask covers that neuron, so prefixes
    whose last steps lose spikes genuinely disagree.  On a delay-free
    trace every status is open and the sum collapses to the telescoped
    C(0) + (sum Sp) . M, which always agrees."""
    M = spiking_matrix(sys)
    records = trace.records
    m = sys.neuron_count
    entries = []
    for k in range(len(records) - 1):
        # suffix[j] = St(j) (*) ... (*) St(k+1), as a running product
        suffix = [(1,) * m] * (k + 3)
        for j in range(k + 1, 0, -1):
            suffix[j] = hadamard(suffix[j + 1], records[j].St)
        total = hadamard(suffix[1], records[0].C)
        for j in range(k + 1):
            producing = hadamard(
                rule_status(sys, records[j + 1].St), records[j].Iv
            )
            total = tuple(
                t + mask * g
                for t, mask, g in zip(total, suffix[j + 2], M.vecmat(producing))
            )
        actual = records[k + 1].C
        entries.append(
            ClosedFormEntry(
                prefix=k,
                predicted=total,
                actual=actual,
                agrees=total == actual,
            )
        )
    return ClosedFormReport(tuple(entries))

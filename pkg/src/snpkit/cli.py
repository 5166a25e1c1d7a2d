"""Command-line front end.

Subcommands map one-to-one onto the library: validate (semantic checks),
matrices (the five matrix forms), simulate (trace or bounded tree),
analyze (structural report), reach (configuration reachability).

Exit codes: 0 success / target reachable; 1 validation errors found /
target not reachable; 2 usage errors, unreadable or malformed input.
Output is byte-deterministic for identical invocations (random policy
requires an explicit seed for exactly this reason).
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from dataclasses import dataclass

from .engine import Trace, TraceTree, achievable_first_intervals, run_trace
from .matrices import (
    IntMatrix,
    augmented_matrix,
    consumption_matrix,
    production_matrix,
    spiking_matrix,
    struc_matrix,
    structural_report,
)
from .model import SNPSystem, SystemParseError, parse_system, validate
from .reachability import ReachabilityCertificate, is_reachable, reach_between

__all__ = ["CliConfig", "main"]

FORMATS = ("text", "json")
MODES = ("standard", "paper-trace")
POLICIES = ("first", "random", "exhaustive")


class UsageError(Exception):
    pass


class ValidationFailure(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    """Validated flag set for one invocation."""

    subcommand: str
    path: str
    fmt: str = "text"
    mode: str = "standard"
    policy: str = "first"
    seed: int | None = None
    steps: int = 10
    k_max: int = 4
    v_max: int | None = None
    target: tuple[int, ...] | None = None
    from_config: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.fmt not in FORMATS:
            raise UsageError(f"format must be one of {FORMATS}")
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}")
        if self.policy not in POLICIES:
            raise UsageError(f"policy must be one of {POLICIES}")
        if self.policy == "random" and self.seed is None:
            raise UsageError("policy 'random' requires --seed")
        if self.policy != "random" and self.seed is not None:
            raise UsageError("--seed only makes sense with --policy random")
        for label, value in (("steps", self.steps), ("kmax", self.k_max)):
            if value < 0:
                raise UsageError(f"--{label} must be nonnegative")
        if self.v_max is not None and self.v_max < 0:
            raise UsageError("--vmax must be nonnegative")


def _config_flag(text: str, flag: str) -> tuple[int, ...]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part.lstrip("+").isdigit():
            raise UsageError(
                f"--{flag} wants comma-separated nonnegative integers, got {text!r}"
            )
        out.append(int(part))
    return tuple(out)


def _load(path: str) -> SNPSystem:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    sys = parse_system(text)  # SystemParseError carries the line number
    return sys


def _require_valid(sys: SNPSystem, path: str):
    report = validate(sys)
    if not report.ok:
        for e in report.entries:
            print(f"{path}: {e.severity} {e.code} at {e.location}: {e.message}",
                  file=_sys.stderr)
        raise ValidationFailure(path)


def _emit_json(blob) -> None:
    print(json.dumps(blob, indent=2, sort_keys=True))


# --- subcommands ---------------------------------------------------------------


def cmd_validate(cfg: CliConfig) -> int:
    sys = _load(cfg.path)
    report = validate(sys)
    if cfg.fmt == "json":
        _emit_json(
            {
                "ok": report.ok,
                "problems": [
                    {
                        "severity": e.severity,
                        "code": e.code,
                        "location": e.location,
                        "message": e.message,
                    }
                    for e in report.entries
                ],
            }
        )
    else:
        if report.ok:
            print(f"{cfg.path}: ok "
                  f"({sys.neuron_count} neurons, {sys.rule_count} rules)")
        for e in report.entries:
            print(f"{cfg.path}: {e.severity} {e.code} at {e.location}: {e.message}")
    return 0 if report.ok else 1


def _matrix_blocks(sys: SNPSystem) -> list[tuple[str, IntMatrix | None]]:
    return [
        ("M", spiking_matrix(sys)),
        ("augmented", augmented_matrix(sys) if sys.out_neuron is not None else None),
        ("PM", production_matrix(sys)),
        ("CM", consumption_matrix(sys)),
        ("struc", struc_matrix(sys)),
    ]


def cmd_matrices(cfg: CliConfig) -> int:
    sys = _load(cfg.path)
    _require_valid(sys, cfg.path)
    blocks = _matrix_blocks(sys)
    if cfg.fmt == "json":
        _emit_json(
            {name: (mat.to_json_dict() if mat else None) for name, mat in blocks}
        )
    else:
        for name, mat in blocks:
            if mat is None:
                print(f"{name}: (no out neuron)")
            else:
                print(f"{name}:")
                print(mat.to_text())
            print()
    return 0


def _print_trace_text(trace: Trace) -> None:
    for r in trace.records:
        print(
            f"k={r.k} C={r.C} Sp={r.Sp} Iv={r.Iv} "
            f"St={r.St} DSt={r.DSt} NG={r.NG} emitted={r.emitted}"
        )
    print(f"halted: {str(trace.halted).lower()}")
    print(f"spike train: {trace.spike_train or '(none)'}")
    if trace.first_interval is not None:
        print(f"first interval: {trace.first_interval}")


def _tree_summary(sys: SNPSystem, tree: TraceTree, cfg: CliConfig):
    finals = sorted({leaf.state.config for _records, leaf in tree.paths()})
    intervals = sorted(achievable_first_intervals(sys, cfg.steps, cfg.mode))
    return {
        "depth": tree.depth,
        "paths": tree.leaf_count(),
        "final_configs": [list(c) for c in finals],
        "first_intervals": intervals,
    }


def cmd_simulate(cfg: CliConfig) -> int:
    sys = _load(cfg.path)
    _require_valid(sys, cfg.path)
    result = run_trace(
        sys, cfg.steps, policy=cfg.policy, mode=cfg.mode, seed=cfg.seed
    )
    if cfg.policy == "exhaustive":
        summary = _tree_summary(sys, result, cfg)
        if cfg.fmt == "json":
            _emit_json(summary)
        else:
            print(f"paths to depth {summary['depth']}: {summary['paths']}")
            print(
                "final configs: "
                + " ".join(str(tuple(c)) for c in summary["final_configs"])
            )
            print(
                "achievable first intervals: "
                + (
                    ", ".join(str(i) for i in summary["first_intervals"])
                    or "(none)"
                )
            )
        return 0
    if cfg.fmt == "json":
        print(result.to_json_lines())
    else:
        _print_trace_text(result)
    return 0


def cmd_analyze(cfg: CliConfig) -> int:
    sys = _load(cfg.path)
    _require_valid(sys, cfg.path)
    rep = structural_report(sys)
    if cfg.fmt == "json":
        _emit_json(
            {
                "row_negative_counts": list(rep.row_negative_counts),
                "col_negative_counts": list(rep.col_negative_counts),
                "inferred_output_neurons": list(rep.inferred_output_neurons),
                "out_degree": list(rep.out_degree),
                "struc_rank": rep.struc_rank,
                "rank_cycle_hint": rep.rank_cycle_hint,
                "dfs_has_cycle": rep.dfs_has_cycle,
            }
        )
    else:
        print(f"row negative counts: {rep.row_negative_counts}")
        print(f"col negative counts: {rep.col_negative_counts}")
        print(f"inferred output neurons: {rep.inferred_output_neurons}")
        print(f"out degree: {rep.out_degree}")
        print(f"struc rank: {rep.struc_rank} of {sys.neuron_count}")
        print(f"rank cycle hint: {str(rep.rank_cycle_hint).lower()}")
        print(f"dfs has cycle: {str(rep.dfs_has_cycle).lower()}")
    return 0


def _print_certificate_text(cert: ReachabilityCertificate) -> None:
    print(f"verdict: {cert.verdict}")
    if cert.reachable:
        print(f"k: {cert.k}")
        print(f"sum vector: {cert.s_bar}")
        for i, sp in enumerate(cert.spiking_vectors):
            print(f"  step {i}: Sp={sp} -> C={cert.configs[i + 1]}")
        if not cert.spiking_vectors:
            print(f"  already at C={cert.configs[0]}")
        return
    print(f"candidates tried: {cert.candidates_tried}")
    for failure in cert.failures:
        print(f"candidate {failure.s_bar}: {failure.reason}")
        for row in failure.table:
            sp = "-" if row.Sp is None else str(row.Sp)
            note = f"  # {row.note}" if row.note else ""
            print(
                f"  i={row.step} Sp={sp} residual={row.residual} "
                f"C={row.config}{note}"
            )


def cmd_reach(cfg: CliConfig) -> int:
    sys = _load(cfg.path)
    _require_valid(sys, cfg.path)
    if len(cfg.target) != sys.neuron_count:
        raise UsageError(
            f"--target has {len(cfg.target)} entries, system has "
            f"{sys.neuron_count} neurons"
        )
    try:
        if cfg.from_config is not None:
            if len(cfg.from_config) != sys.neuron_count:
                raise UsageError(
                    f"--from has {len(cfg.from_config)} entries, system has "
                    f"{sys.neuron_count} neurons"
                )
            bound = cfg.v_max if cfg.v_max is not None else cfg.k_max
            cert = reach_between(sys, cfg.from_config, cfg.target, bound)
        else:
            cert = is_reachable(sys, cfg.target, cfg.k_max)
    except ValueError as exc:
        # delayed systems have no sum-vector characterization
        raise UsageError(str(exc)) from exc
    if cfg.fmt == "json":
        _emit_json(cert.to_json_dict())
    else:
        _print_certificate_text(cert)
    if cert.reachable:
        return 0
    # negative targets never get this far (the flag parser rejects them),
    # but keep the mapping total: a malformed target is a usage error
    return 2 if cert.verdict == "invalid-target" else 1


# --- argument plumbing -----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snpkit",
        description="Simulate and analyze spiking neural P systems "
        "via their matrix representation.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("path", help="system file")
        p.add_argument(
            "--format", choices=FORMATS, default="text", help="output format"
        )
        return p

    add("validate", "check semantic constraints")
    add("matrices", "print the matrix forms")
    p = add("simulate", "run the system and print the trace")
    p.add_argument("--steps", type=int, default=10, help="step budget")
    p.add_argument("--policy", choices=POLICIES, default="first")
    p.add_argument("--mode", choices=MODES, default="standard")
    p.add_argument("--seed", type=int, help="rng seed (random policy)")
    add("analyze", "structural report from the matrix forms")
    p = add("reach", "decide whether a configuration is reachable")
    p.add_argument("--target", required=True, help="comma-separated spike counts")
    p.add_argument("--kmax", type=int, default=4, help="step bound")
    p.add_argument(
        "--from",
        dest="from_config",
        help="start configuration (defaults to the initial one)",
    )
    p.add_argument(
        "--vmax", type=int, help="step bound when --from is given (default --kmax)"
    )
    return parser


def _config_from_args(ns: argparse.Namespace) -> CliConfig:
    kwargs = {
        "subcommand": ns.subcommand,
        "path": ns.path,
        "fmt": ns.format,
    }
    if ns.subcommand == "simulate":
        kwargs.update(
            mode=ns.mode, policy=ns.policy, seed=ns.seed, steps=ns.steps
        )
    if ns.subcommand == "reach":
        kwargs.update(k_max=ns.kmax, v_max=ns.vmax)
        kwargs["target"] = _config_flag(ns.target, "target")
        if ns.from_config is not None:
            kwargs["from_config"] = _config_flag(ns.from_config, "from")
    return CliConfig(**kwargs)


_COMMANDS = {
    "validate": cmd_validate,
    "matrices": cmd_matrices,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "reach": cmd_reach,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = _config_from_args(ns)
        return _COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"snpkit: error: {exc}", file=_sys.stderr)
        return 2
    except SystemParseError as exc:
        print(f"snpkit: error: {ns.path}: {exc}", file=_sys.stderr)
        return 2
    except ValidationFailure:
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

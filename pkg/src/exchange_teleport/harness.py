"""Experiment runner and command-line front end.

Every exact probability in a report comes from an outcome tree built by
:mod:`protocols`; Monte Carlo counts are compared against it with per-group
z-scores.  Trials draw from independent streams keyed by ``(seed, trial)``,
so reports depend only on the configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .exchange import ExchangeCouplings, r_gate, rotation
from .observables import trial_rng
from .protocols import (
    Applied,
    CorrectionMode,
    DriverPolicy,
    ProtocolTree,
    TrialCapExceeded,
    dgb_branches,
    dgb_z_rotation,
    enumerate_protocol_tree,
    gate_teleport_fig1,
    gate_teleport_trial_tree,
    leaf_target,
    state_teleport,
    state_teleport_branches,
    summarize_tree,
    teleport_rotation,
    transcript_from_leaf,
)
from .qstate import StateVector, check_unitary, extract_qubit, fidelity, random_state
from .universality import euler_synthesize, parse_target, sequence_residual

DEFAULT_TRIALS = 100_000
DEFAULT_SEED = 42
DEFAULT_TOLERANCE = 1e-10
Z_LIMIT = 4.0
# Exact trees for the multi-cycle driver are expanded this deep; later
# cycles are pooled into one tail group.
EXACT_DEPTH = 8
# Stated figure for measurements per cycle, kept for comparison.
STATED_MEASUREMENTS_PER_CYCLE = 1.0

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_STAT_FAIL = 2
EXIT_RESIDUAL = 3

PROTOCOLS = ("rz", "rx", "dgb", "teleport", "gate-teleport")


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    axis: str = "z"
    phi: float = 0.0
    phi_z0: float = 0.0
    trials: int = DEFAULT_TRIALS
    max_cycles: int = 1
    seed: int = DEFAULT_SEED
    tolerance: float = DEFAULT_TOLERANCE
    correction_mode: str = "repeat"
    unitary: str = "H"
    target: str = "H"
    cycles: int = 1
    preparation: str = "0"
    out: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        if self.trials < 1:
            raise UsageError("trials must be at least 1")
        if not 0 <= self.seed < 1 << 64:
            raise UsageError("seed must be an unsigned 64-bit integer")
        if not self.tolerance > 0:
            raise UsageError("tolerance must be positive")
        if self.axis not in ("x", "z"):
            raise UsageError("axis must be x or z")
        if self.correction_mode not in ("repeat", "zz"):
            raise UsageError("correction must be 'repeat' or 'zz'")
        if self.max_cycles < 1:
            raise UsageError("max-cycles must be at least 1")
        if self.out and not self.out.endswith((".json", ".csv")):
            raise UsageError("output file must end in .json or .csv")
        return self


@dataclass
class BranchStat:
    group: str
    count: int
    observed: float
    exact: float
    z_score: float
    status: str


@dataclass
class Report:
    config: dict[str, Any]
    kind: str
    branches: list[BranchStat] = field(default_factory=list)
    checks: dict[str, Any] = field(default_factory=dict)
    success_rate: Optional[float] = None
    mean_cycles: Optional[float] = None
    mean_measurements: Optional[float] = None
    fidelity_min: Optional[float] = None
    fidelity_mean: Optional[float] = None
    exact: dict[str, Any] = field(default_factory=dict)
    sequence: Optional[dict[str, Any]] = None
    residual: Optional[float] = None
    notes: list[str] = field(default_factory=list)
    passed: bool = True
    exit_status: int = EXIT_OK
    wall_clock_seconds: float = 0.0

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


# ---------------------------------------------------------------------------
# Statistics helpers.


def z_score(count: int, trials: int, p: float) -> float:
    """Binomial z-score of ``count`` successes in ``trials`` against ``p``."""
    expected = trials * p
    var = trials * p * (1 - p)
    if var <= 0:
        return 0.0 if count == expected else math.inf
    return (count - expected) / math.sqrt(var)


def mean_z(sample_mean: float, exact_mean: float, exact_var: float, n: int) -> float:
    if exact_var <= 0:
        return 0.0 if sample_mean == exact_mean else math.inf
    return (sample_mean - exact_mean) / math.sqrt(exact_var / n)


def _status(z: float) -> str:
    return "PASS" if abs(z) <= Z_LIMIT else "FAIL"


def branch_table(counts: Counter, exact: dict[str, float], trials: int) -> list[BranchStat]:
    rows = []
    for group in sorted(set(exact) | set(counts)):
        c = counts.get(group, 0)
        p = exact.get(group, 0.0)
        z = z_score(c, trials, p)
        rows.append(BranchStat(group, c, c / trials, p, z, _status(z)))
    return rows


def _fidelity_stats(values: list[float]) -> tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    return float(min(values)), float(np.mean(values))


def _experiment_state(seed: int) -> StateVector:
    return random_state(1, trial_rng(seed))


# ---------------------------------------------------------------------------
# R_z / R_x driver.


def _group_key(cycle: int, kind: str, applied: Applied) -> str:
    return f"c{cycle}:{kind}:{applied.value}"


def _tail_key(depth: int) -> str:
    return f"c>{depth}"


def _driver_exact(psi: StateVector, cfg: ExperimentConfig, policy: DriverPolicy) -> dict[str, Any]:
    """Exact group masses and moments of the driver, read off the outcome tree.

    The tree is expanded to ``min(max_cycles, EXACT_DEPTH)`` cycles.  If the
    policy allows more, the erred leaves of the last level are pooled as the
    tail group, and the reach probabilities of later cycles are continued
    with the ratio observed between the last two levels.
    """
    zz = policy.correction_mode is CorrectionMode.ZZ_PULSE
    depth = 1 if zz else min(policy.max_cycles, EXACT_DEPTH)
    root = enumerate_protocol_tree(cfg.axis, cfg.phi_z0, depth, psi, preparation="branch",
                                   correction_mode=policy.correction_mode, couplings=policy.couplings)
    open_tail = not zz and policy.max_cycles > depth
    groups: dict[str, float] = {}
    reach = [0.0] * (depth + 2)        # reach[k] = P(cycle k is started)
    meas_in = [0.0] * (depth + 1)      # mass-weighted measurements made in cycle k
    for leaf in root.leaves():
        p = leaf.probability
        applied = leaf.tag["applied"]
        for k in range(1, leaf.cycle + 1):
            reach[k] += p
        pending = open_tail and applied is Applied.R_DAGGER and leaf.cycle == depth
        if pending:
            reach[depth + 1] += p
            key = _tail_key(depth)
        else:
            key = _group_key(leaf.cycle, leaf.tag["kind"], applied)
        groups[key] = groups.get(key, 0.0) + p
        # Cumulative measurement count at the end of each cycle on the path.
        node, prev = leaf, 0
        path_meas: dict[int, int] = {}
        while node is not None:
            path_meas.setdefault(node.cycle, node.measurements)
            node = node.parent
        for k in sorted(path_meas):
            meas_in[k] += p * (path_meas[k] - prev)
            prev = path_meas[k]

    cycles = policy.max_cycles if open_tail else depth
    reach_full = reach[1:depth + 1]
    if open_tail:
        ratio = reach[depth + 1] / reach[depth] if reach[depth] > 0 else 0.0
        r = reach[depth + 1]
        for _ in range(depth + 1, cycles + 1):
            reach_full.append(r)
            r *= ratio
        p_fail = r
    else:
        p_fail = sum(v for k, v in groups.items() if k.endswith(Applied.R_DAGGER.value))
    per_cycle = [meas_in[k] / reach[k] for k in range(1, depth + 1)]
    per_cycle += [per_cycle[-1]] * (len(reach_full) - depth)
    mean_c = sum(reach_full)
    second_c = sum((2 * k - 1) * pr for k, pr in enumerate(reach_full, start=1))
    mean_m = sum(pr * m for pr, m in zip(reach_full, per_cycle))
    summary = summarize_tree(root)
    return {
        "groups": groups,
        "tree_depth": depth,
        "success_probability": 1.0 - p_fail,
        "mean_cycles": mean_c,
        "var_cycles": second_c - mean_c ** 2,
        "mean_measurements": mean_m,
        "measurements_per_cycle": per_cycle[0],
        "tree_total_mass": summary.total_mass,
    }


def _run_driver(cfg: ExperimentConfig, report: Report) -> None:
    axis = "z" if cfg.command == "rz" else "x"
    cfg.axis = axis
    mode = CorrectionMode.ZZ_PULSE if cfg.correction_mode == "zz" else CorrectionMode.REPEAT_FLIPPED
    try:
        policy = DriverPolicy(cfg.max_cycles, mode, axis, ExchangeCouplings(1.0, 0.0))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    psi = _experiment_state(cfg.seed)
    exact = _driver_exact(psi, cfg, policy)
    depth = exact["tree_depth"]
    tree = ProtocolTree(psi, axis, cfg.phi_z0, policy.max_cycles, policy.correction_mode, policy.couplings)
    targets = {d: StateVector(r_gate(axis, d) @ psi.amps) for d in (False, True)}
    counts: Counter = Counter()
    successes = cycles_sum = meas_sum = 0
    fids = []
    for t in range(cfg.trials):
        res = teleport_rotation(psi, axis, policy, trial_rng(cfg.seed, t), cfg.phi_z0, tree=tree)
        tr = res.transcript
        if policy.max_cycles > depth and res.cycles > depth:
            counts[_tail_key(depth)] += 1
        else:
            counts[_group_key(res.cycles, tr.terminals[-1], tr.applied)] += 1
        successes += res.success
        cycles_sum += res.cycles
        meas_sum += res.measurements
        if res.success:
            fids.append(fidelity(res.state, targets[False]))
    n = cfg.trials
    report.branches = branch_table(counts, exact["groups"], n)
    report.success_rate = successes / n
    report.mean_cycles = cycles_sum / n
    report.mean_measurements = meas_sum / n
    report.fidelity_min, report.fidelity_mean = _fidelity_stats(fids)
    p = exact["success_probability"]
    z_s = z_score(successes, n, p)
    z_c = mean_z(report.mean_cycles, exact["mean_cycles"], exact["var_cycles"], n)
    report.checks.update(
        success_z=z_s,
        success_status=_status(z_s),
        mean_cycles_z=z_c,
        mean_cycles_status=_status(z_c),
    )
    report.exact = {k: v for k, v in exact.items() if k != "groups"}
    report.exact["cycles_limit"] = 1.0 / _cycle_success(psi, axis, cfg.phi_z0)
    report.notes.append(f"input state amplitudes {psi.amps.tolist()!r}")


def _cycle_success(psi: StateVector, axis: str, phi_z0: float) -> float:
    return summarize_tree(enumerate_protocol_tree(axis, phi_z0, 1, psi, preparation="branch")).success_mass


# ---------------------------------------------------------------------------
# dGB, state teleportation and gate teleportation.


def _run_dgb(cfg: ExperimentConfig, report: Report) -> None:
    psi = _experiment_state(cfg.seed)
    target = StateVector(rotation("z", cfg.phi / 2) @ psi.amps)
    exact = {rec.record.outcome: rec.record.probability for _, rec in dgb_branches(psi, cfg.phi)}
    counts: Counter = Counter()
    fids = []
    for t in range(cfg.trials):
        out, tr = dgb_z_rotation(psi, cfg.phi, trial_rng(cfg.seed, t))
        counts[tr.record.outcome] += 1
        fids.append(fidelity(out, target))
    report.branches = branch_table(counts, exact, cfg.trials)
    report.success_rate = 1.0
    report.fidelity_min, report.fidelity_mean = _fidelity_stats(fids)
    report.exact = {"branch_probabilities": exact}


def _run_teleport(cfg: ExperimentConfig, report: Report) -> None:
    psi = _experiment_state(cfg.seed)
    exact = {r.record.outcome: r.record.probability for r in state_teleport_branches(psi)}
    counts: Counter = Counter()
    fids = []
    for t in range(cfg.trials):
        res = state_teleport(psi, trial_rng(cfg.seed, t))
        counts[res.record.outcome] += 1
        fids.append(fidelity(res.state, psi))
    report.branches = branch_table(counts, exact, cfg.trials)
    report.success_rate = 1.0
    report.fidelity_min, report.fidelity_mean = _fidelity_stats(fids)
    report.exact = {"branch_probabilities": exact}


def _load_unitary(spec: str) -> tuple[np.ndarray, str]:
    try:
        u, name = parse_target(spec)
        return check_unitary(u), name
    except (OSError, ValueError) as exc:
        raise UsageError(f"bad unitary {spec!r}: {exc}") from None


def _run_gate_teleport(cfg: ExperimentConfig, report: Report) -> None:
    u, name = _load_unitary(cfg.unitary)
    psi = _experiment_state(cfg.seed)
    target = StateVector(u @ psi.amps)
    root = gate_teleport_trial_tree(psi, u)
    p = sum(leaf.probability for leaf in root.leaves() if leaf.tag["success"])
    attempts = successes = 0
    hist: Counter = Counter()
    fids = []
    for t in range(cfg.trials):
        try:
            res = gate_teleport_fig1(psi, u, trial_rng(cfg.seed, t))
        except TrialCapExceeded as exc:
            report.notes.append(f"run {t}: {exc}")
            continue
        attempts += res.trials
        successes += 1
        hist[res.trials] += 1
        fids.append(fidelity(res.state, target))
    n = cfg.trials
    # Trial-count groups: exact masses follow from the per-attempt success mass.
    cap = 1
    while (1 - p) ** cap * n >= 5 and cap < 100:
        cap += 1
    exact = {f"t{k:02d}": (1 - p) ** (k - 1) * p for k in range(1, cap + 1)}
    exact[f"t>{cap:02d}"] = (1 - p) ** cap
    counts: Counter = Counter()
    for k, c in hist.items():
        counts[f"t{k:02d}" if k <= cap else f"t>{cap:02d}"] += c
    report.branches = branch_table(counts, exact, n)
    report.success_rate = successes / n
    report.mean_cycles = attempts / max(successes, 1)
    report.fidelity_min, report.fidelity_mean = _fidelity_stats(fids)
    z_p = z_score(successes, attempts, p)
    z_m = mean_z(report.mean_cycles, 1 / p, (1 - p) / p ** 2, max(successes, 1))
    report.checks.update(
        per_trial_success_frequency=successes / max(attempts, 1),
        per_trial_success_z=z_p,
        per_trial_success_status=_status(z_p),
        mean_trials_z=z_m,
        mean_trials_status=_status(z_m),
    )
    report.exact = {"per_trial_success": p, "mean_trials": 1 / p, "unitary": name}


def run_protocol_experiment(cfg: ExperimentConfig) -> Report:
    cfg.validate()
    start = time.perf_counter()
    report = Report(config=asdict(cfg), kind=cfg.command)
    runner = {
        "rz": _run_driver,
        "rx": _run_driver,
        "dgb": _run_dgb,
        "teleport": _run_teleport,
        "gate-teleport": _run_gate_teleport,
    }.get(cfg.command)
    if runner is None:
        raise UsageError(f"unknown protocol {cfg.command!r}")
    runner(cfg, report)
    report.config = asdict(cfg)
    statuses = [b.status for b in report.branches]
    statuses += [v for k, v in report.checks.items() if k.endswith("_status")]
    report.passed = all(s == "PASS" for s in statuses)
    report.exit_status = EXIT_OK if report.passed else EXIT_STAT_FAIL
    report.wall_clock_seconds = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# Exact tree and compiler reports.


def run_tree_report(cfg: ExperimentConfig) -> Report:
    cfg.validate()
    start = time.perf_counter()
    report = Report(config=asdict(cfg), kind="tree")
    psi = _experiment_state(cfg.seed)
    try:
        root = enumerate_protocol_tree(cfg.axis, cfg.phi_z0, cfg.cycles, psi, preparation=cfg.preparation)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    summary = summarize_tree(root)
    leaves = list(root.leaves())
    fids = []
    path_ok = True
    for leaf in leaves:
        tr = transcript_from_leaf(leaf, cfg.axis)
        out = extract_qubit(leaf.state, leaf.tag["output_qubit"])
        fids.append(fidelity(out, leaf_target(psi, leaf, cfg.axis)))
        if len(tr.records) != leaf.measurements:
            path_ok = False
    groups: dict[str, float] = {}
    for leaf in leaves:
        key = _group_key(leaf.cycle, leaf.tag["kind"], leaf.tag["applied"])
        groups[key] = groups.get(key, 0.0) + leaf.probability
    report.branches = [BranchStat(k, 0, 0.0, v, 0.0, "PASS") for k, v in sorted(groups.items())]
    report.success_rate = summary.success_mass
    report.mean_cycles = summary.expected_cycles
    report.mean_measurements = summary.expected_measurements
    report.fidelity_min, report.fidelity_mean = _fidelity_stats(fids)
    first = summarize_tree(enumerate_protocol_tree(cfg.axis, cfg.phi_z0, 1, psi, preparation=cfg.preparation))
    report.exact = {
        "success_mass": summary.success_mass,
        "erred_mass": summary.erred_mass,
        "expected_cycles_capped": summary.expected_cycles,
        "expected_cycles_limit": 1.0 / first.success_mass,
        "expected_measurements": summary.expected_measurements,
        "measurements_per_cycle": first.expected_measurements,
        "stated_measurements_per_cycle": STATED_MEASUREMENTS_PER_CYCLE,
        "leaf_count": summary.leaf_count,
        "leaf_masses": [leaf.probability for leaf in leaves],
    }
    report.notes.append(
        f"measurements per cycle by tree enumeration: {first.expected_measurements!r}; "
        f"stated value {STATED_MEASUREMENTS_PER_CYCLE!r}; discrepancy {first.expected_measurements - STATED_MEASUREMENTS_PER_CYCLE:+.4f} "
        "(every measurement on every path is counted here)"
    )
    mass_ok = abs(summary.total_mass - 1.0) <= cfg.tolerance
    fid_ok = min(fids) >= 1 - cfg.tolerance
    report.checks.update(
        total_mass=summary.total_mass,
        total_mass_status="PASS" if mass_ok else "FAIL",
        path_counts_status="PASS" if path_ok else "FAIL",
        leaf_fidelity_status="PASS" if fid_ok else "FAIL",
    )
    report.passed = mass_ok and path_ok and fid_ok
    report.exit_status = EXIT_OK if report.passed else EXIT_RESIDUAL
    report.wall_clock_seconds = time.perf_counter() - start
    return report


def run_compile_report(cfg: ExperimentConfig) -> Report:
    cfg.validate()
    start = time.perf_counter()
    report = Report(config=asdict(cfg), kind="compile")
    u, name = _load_unitary(cfg.target)
    if u.shape != (2, 2):
        raise UsageError("compile targets must be single-qubit unitaries")
    syn = euler_synthesize(u)
    seq = syn.sequence.with_target(name)
    residual = sequence_residual(seq, u)
    report.sequence = seq.as_dict()
    report.residual = residual
    report.exact = {
        "alpha": syn.angles.alpha,
        "beta": syn.angles.beta,
        "gamma": syn.angles.gamma,
        "elided": list(syn.elided),
    }
    if syn.elided:
        report.notes.append(f"zero-angle factors elided: {', '.join(syn.elided)}")
    report.passed = residual <= cfg.tolerance
    report.checks.update(step_count=seq.step_count, residual_status="PASS" if report.passed else "FAIL")
    report.exit_status = EXIT_OK if report.passed else EXIT_RESIDUAL
    report.wall_clock_seconds = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# Output.


def format_report(report: Report) -> str:
    lines = [f"== {report.kind} =="]
    cfg = report.config
    lines.append("config: " + ", ".join(f"{k}={v}" for k, v in cfg.items() if v is not None))
    if report.branches and report.kind == "tree":
        lines.append(f"{'group':<28} {'exact':>10}")
        lines.extend(f"{b.group:<28} {b.exact:>10.6f}" for b in report.branches)
    elif report.branches:
        lines.append(f"{'group':<28} {'count':>8} {'observed':>10} {'exact':>10} {'z':>8}  status")
        for b in report.branches:
            lines.append(f"{b.group:<28} {b.count:>8d} {b.observed:>10.6f} {b.exact:>10.6f} {b.z_score:>8.3f}  {b.status}")
    for label in ("success_rate", "mean_cycles", "mean_measurements", "fidelity_min", "fidelity_mean", "residual"):
        value = getattr(report, label)
        if value is not None:
            lines.append(f"{label}: {value:.12g}")
    if report.sequence is not None:
        lines.append(f"step_count: {report.sequence['step_count']}")
    for k, v in report.exact.items():
        if k == "leaf_masses":
            continue
        lines.append(f"exact.{k}: {v}")
    for k, v in report.checks.items():
        lines.append(f"check.{k}: {v}")
    lines.extend(f"note: {n}" for n in report.notes)
    lines.append(f"result: {'PASS' if report.passed else 'FAIL'} (exit {report.exit_status})")
    return "\n".join(lines)


def report_json(report: Report) -> str:
    return json.dumps(report.as_dict(), indent=2, sort_keys=True, default=str)


def write_report(report: Report, path: str) -> None:
    if path.endswith(".json"):
        with open(path, "w") as fh:
            fh.write(report_json(report) + "\n")
    elif path.endswith(".csv"):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if report.sequence is not None:
                writer.writerow(["index", "kind", "qubits", "axis", "dagger", "phi_perp", "phi_z"])
                for k, step in enumerate(report.sequence["steps"]):
                    writer.writerow([k, step["kind"], " ".join(map(str, step["qubits"])), step.get("axis", ""),
                                     step.get("dagger", ""), step.get("phi_perp", ""), step.get("phi_z", "")])
            else:
                writer.writerow(["group", "count", "observed", "exact", "z_score", "status"])
                for b in report.branches:
                    writer.writerow([b.group, b.count, repr(b.observed), repr(b.exact), repr(b.z_score), b.status])
    else:
        raise UsageError("output file must end in .json or .csv")


# ---------------------------------------------------------------------------
# CLI.


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exchange-teleport", description="Measurement-driven exchange gate experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, trials=True):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        if trials:
            p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
        p.add_argument("--out", default=None, help="write the report to a .json or .csv file")

    for name in ("rz", "rx"):
        p = sub.add_parser(name, help=f"teleport R_{name[1]} with repeated cycles")
        common(p)
        p.add_argument("--max-cycles", type=int, default=1)
        p.add_argument("--phi-z0", type=float, default=0.0)
        p.add_argument("--correction", choices=("repeat", "zz"), default="repeat")
    p = sub.add_parser("dgb", help="phase-qubit Z rotation with a measured ancilla")
    common(p)
    p.add_argument("--phi", type=float, default=0.7)
    p = sub.add_parser("teleport", help="plain state teleportation")
    common(p)
    p = sub.add_parser("gate-teleport", help="gate teleportation with recursive corrections")
    common(p)
    p.add_argument("--unitary", default="H", help="gate name, rz:ANGLE style rotation, or matrix file")
    p = sub.add_parser("tree", help="exact outcome-tree report")
    common(p, trials=False)
    p.add_argument("--axis", choices=("x", "z"), default="z")
    p.add_argument("--cycles", type=int, default=1)
    p.add_argument("--phi-z0", type=float, default=0.0)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p = sub.add_parser("compile", help="compile a single-qubit gate into elementary steps")
    p.add_argument("--target", default="H", help="gate name, rz:ANGLE style rotation, or matrix file")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--out", default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(command=args.command)
    mapping = {"correction": "correction_mode"}
    for key, value in vars(args).items():
        if key == "command":
            continue
        setattr(cfg, mapping.get(key, key), value)
    return cfg


def run(cfg: ExperimentConfig) -> Report:
    if cfg.command in PROTOCOLS:
        return run_protocol_experiment(cfg)
    if cfg.command == "tree":
        return run_tree_report(cfg)
    if cfg.command == "compile":
        return run_compile_report(cfg)
    raise UsageError(f"unknown command {cfg.command!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        report = run(cfg)
        print(format_report(report))
        if cfg.out:
            write_report(report, cfg.out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())

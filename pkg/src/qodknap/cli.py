"""Command-line front end.

    qodknap solve --instance inst.txt [--method dp|exhaustive|truncated --epsilon E]
    qodknap simulate --instance inst.txt [--device dev.txt --seed S --dump-stages F]
    qodknap feasibility --device dev.txt [--instance inst.txt]
    qodknap cost --instance inst.txt [--device dev.txt --epsilon E|auto --inputs M]
    qodknap compare --instance inst.txt [--device dev.txt --epsilon E|auto --inputs M]

Exit status: 0 on success, 1 when ``--strict`` is set and warnings were
raised, 2 on any error (one diagnostic line on stderr).
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .cost import CostAssumptions, compare, cost_report, deterministic_time, qod_time
from .formats import parse_device, parse_instance, structured, text
from .knapsack import (
    KnapsackInstance,
    Variant,
    exhaustive_oracle,
    solve,
    solve_variant3_approx,
)
from .optics import REFERENCE_DEVICE, DeviceParameters, feasibility_check, reference_report
from .simulator import simulate

COMMANDS = ("solve", "simulate", "feasibility", "cost", "compare")
METHODS = ("dp", "exhaustive", "truncated", "qod")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    method: str | None = None
    instance_paths: list[str] = field(default_factory=list)
    device_path: str | None = None
    epsilon: str | None = None
    seed: int = 0
    output_format: str = "text"
    strict: bool = False
    dump_stages: str | None = None
    inputs: int = 1
    jobs: int = 1

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.method is None:
            self.method = {"solve": "dp", "simulate": "qod"}.get(self.command)
        if self.method is not None and self.method not in METHODS:
            raise UsageError(f"unknown method {self.method!r}")
        if self.method == "qod" and self.command not in ("simulate", "compare"):
            raise UsageError("method qod only applies to simulate and compare")
        if self.command == "simulate" and self.method != "qod":
            raise UsageError("simulate only supports method qod")
        if self.command == "solve" and self.method == "qod":
            raise UsageError("use the simulate command for method qod")
        if self.epsilon is not None:
            if not (self.method == "truncated" or self.command in ("cost", "compare")):
                raise UsageError("--epsilon requires --method truncated or a cost command")
            if self.epsilon != "auto":
                try:
                    eps = Fraction(self.epsilon)
                except ValueError:
                    raise UsageError(f"bad epsilon {self.epsilon!r}") from None
                if not 0 < eps < 1:
                    raise UsageError("epsilon must lie in (0, 1)")
        if self.method == "truncated" and self.epsilon in (None, "auto"):
            raise UsageError("method truncated needs a numeric --epsilon")
        if self.command != "feasibility" and not self.instance_paths:
            raise UsageError(f"{self.command} needs --instance")
        if self.command == "feasibility" and not (self.instance_paths or self.device_path):
            raise UsageError("feasibility needs --device or --instance")
        if self.output_format not in ("text", "structured"):
            raise UsageError(f"unknown format {self.output_format!r}")
        if self.inputs < 0:
            raise UsageError("--inputs must be non-negative")


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _device_for(cfg: RunConfig, inst: KnapsackInstance | None) -> DeviceParameters:
    source = _read(cfg.device_path) if cfg.device_path else ""
    return parse_device(source, inst)


def _solve_record(cfg: RunConfig, inst: KnapsackInstance) -> dict:
    if cfg.method == "dp":
        res = solve(inst)
    elif cfg.method == "exhaustive":
        res = exhaustive_oracle(inst)
    else:
        if inst.variant is not Variant.OPTIMIZATION:
            raise UsageError("method truncated applies to variant 3 only")
        res = solve_variant3_approx(inst, Fraction(cfg.epsilon))
    return {
        "variant": inst.variant,
        "method": res.method,
        "decision": res.decision,
        "optimum": res.optimum,
        "witness": list(res.witness) if res.witness is not None else None,
        "truncation": res.truncation,
        "warnings": [],
    }


def _simulate_one(args) -> dict:
    cfg, inst, seed, dev = args
    dump = open(cfg.dump_stages, "w") if cfg.dump_stages else None
    try:
        res = simulate(inst, dev, seed=seed, dump=dump)
    finally:
        if dump is not None:
            dump.close()
    return {
        "variant": inst.variant,
        "method": "qod",
        "seed": seed,
        "decision": res.decision,
        "optimum": res.optimum,
        "detected_offsets": [list(c) for c in res.detected_offsets],
        "beam_count_history": res.beam_count_history,
        "kappa": dev.kappa,
        "R_M": dev.R_M,
        "d_b": dev.d_b,
        "n_gates": dev.n_gates,
        "warnings": res.warnings,
    }


def _feasibility_record(dev: DeviceParameters, max_sum: int) -> dict:
    same_as_reference = (dev.R_M, dev.kappa, dev.d_b, dev.lambda_) == (
        REFERENCE_DEVICE.R_M, REFERENCE_DEVICE.kappa, REFERENCE_DEVICE.d_b, REFERENCE_DEVICE.lambda_)
    rep = reference_report(dev, max_sum) if same_as_reference else feasibility_check(dev, max_sum)
    return {
        "alpha": rep.alpha,
        "d_final": rep.d_final,
        "kappa": dev.kappa,
        "kappa_min": rep.kappa_min,
        "kappa_min_closed_form": rep.kappa_min_closed_form,
        "R_M_min": rep.R_M_min,
        "bound_ratio": str(rep.bound_ratio),
        "B_plus_max": rep.B_plus_max,
        "max_sum": rep.max_sum,
        "feasible": rep.feasible,
        "violations": rep.violations,
        "notes": rep.notes,
        "warnings": ["geometry infeasible: " + ", ".join(rep.violations)] if rep.violations else [],
    }


def _extent(inst: KnapsackInstance) -> int:
    """Largest sum the device has to represent."""
    if inst.variant is Variant.EXACT_SUM:
        return inst.target_K
    if inst.variant is Variant.INTERVAL_SUM:
        return inst.bound_hi
    return max(inst.bound_hi, sum(inst.w))


def _cost_records(cfg: RunConfig, inst: KnapsackInstance, dev: DeviceParameters) -> tuple:
    assum = CostAssumptions(M=cfg.inputs, T_atom=dev.T_atom)
    eps = None
    if cfg.epsilon == "auto":
        eps = (dev.kappa / 2) / dev.R_M
    elif cfg.epsilon is not None:
        eps = float(Fraction(cfg.epsilon))
    if eps is not None and inst.variant is not Variant.OPTIMIZATION:
        raise UsageError("approximation costs apply to variant 3 only")
    n, K = inst.n, _extent(inst)
    q, d = cost_report(inst.variant, n, K, cfg.inputs, assum, approx_eps=eps,
                       delta_p=dev.delta_p, kappa=dev.kappa)
    return q, d, eps, assum


def _report_fields(rep, prefix: str) -> dict:
    return {
        f"{prefix}_CI": rep.CI,
        f"{prefix}_CE": rep.CE,
        f"{prefix}_CE_per_input": rep.CE_per_input,
        f"{prefix}_time_total": rep.time_total,
        f"{prefix}_time_preprocessing": rep.time_preprocessing,
        f"{prefix}_formula_trace": [f"{t.quantity}: {t.formula} = {t.value!r}" for t in rep.formula_trace],
    }


def _cost_record(cfg: RunConfig, inst: KnapsackInstance, dev: DeviceParameters) -> dict:
    q, d, eps, assum = _cost_records(cfg, inst, dev)
    rec = {"variant": inst.variant, "n": inst.n, "K": _extent(inst), "M": cfg.inputs, "epsilon": eps}
    rec.update(_report_fields(q, "qod"))
    rec.update(_report_fields(d, "det"))
    rec["notes"] = q.notes
    rec["warnings"] = []
    return rec


def _compare_record(cfg: RunConfig, inst: KnapsackInstance, dev: DeviceParameters) -> dict:
    q, d, eps, assum = _cost_records(cfg, inst, dev)
    cmp = compare(q, d)
    n = inst.n
    rec = {
        "variant": inst.variant,
        "n": n,
        "K": _extent(inst),
        "M": cfg.inputs,
        "epsilon": eps,
        "time_qod": q.time_total,
        "time_det": d.time_total,
        "time_ratio": cmp.time_ratio,
        "energy_qod": q.CE,
        "energy_det": d.CE,
        "energy_ratio": cmp.energy_ratio,
        "crossover_M": cmp.crossover_M,
        "energy_time_qod": cmp.energy_time_qod,
        "energy_time_det": cmp.energy_time_det,
        "flight_time_qod": qod_time(n, dev.L, dev.R_M, assum, cfg.inputs),
        "dp_time_det": deterministic_time(n, _extent(inst), assum),
        "notes": d.notes,
        "warnings": [],
    }
    return rec


def _records(cfg: RunConfig) -> list[dict]:
    instances = [parse_instance(_read(p)) for p in cfg.instance_paths]
    if cfg.command == "feasibility":
        inst = instances[0] if instances else None
        dev = _device_for(cfg, inst)
        return [_feasibility_record(dev, _extent(inst) if inst else 0)]
    if cfg.command == "solve":
        return [_solve_record(cfg, inst) for inst in instances]
    if cfg.command == "simulate":
        if cfg.dump_stages and len(instances) > 1:
            raise UsageError("--dump-stages takes a single instance")
        jobs = [(cfg, inst, cfg.seed + i, _device_for(cfg, inst)) for i, inst in enumerate(instances)]
        if cfg.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(cfg.jobs) as pool:
                return list(pool.map(_simulate_one, jobs))
        return [_simulate_one(j) for j in jobs]
    builder = _cost_record if cfg.command == "cost" else _compare_record
    return [builder(cfg, inst, _device_for(cfg, inst)) for inst in instances]


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute ``cfg``; returns (exit status, report text)."""
    cfg.validate()
    records = _records(cfg)
    out = []
    for rec in records:
        rec = {"tool": "qodknap", "version": __version__, "command": cfg.command, **rec}
        out.append(structured(rec) + "\n" if cfg.output_format == "structured" else text(rec))
    status = 0
    if cfg.strict and any(rec["warnings"] for rec in records):
        status = 1
    sep = "" if cfg.output_format == "structured" else "\n"
    return status, sep.join(out)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qodknap", description="Optical knapsack DP simulator and cost model")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--instance", action="append", default=[], metavar="PATH",
                   help="instance file (repeat for batch runs)")
    p.add_argument("--device", metavar="PATH", help="device file; auto-sized when omitted")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--epsilon", help="relative precision, or 'auto' for (kappa/2)/R_M")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.add_argument("--strict", action="store_true", help="exit 1 when warnings are raised")
    p.add_argument("--dump-stages", metavar="PATH", help="write every stage's beams to PATH")
    p.add_argument("--inputs", type=int, default=1, metavar="M", help="number of repeated inputs")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for batch simulation")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"qodknap: error: {exc}", file=sys.stderr)
        return 2
    cfg = RunConfig(
        command=args.command,
        method=args.method,
        instance_paths=args.instance,
        device_path=args.device,
        epsilon=args.epsilon,
        seed=args.seed,
        output_format=args.format,
        strict=args.strict,
        dump_stages=args.dump_stages,
        inputs=args.inputs,
        jobs=args.jobs,
    )
    try:
        status, report = run(cfg)
    except (ValueError, OSError, RuntimeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"qodknap: error: {msg}", file=sys.stderr)
        return 2
    sys.stdout.write(report)
    return status


if __name__ == "__main__":
    sys.exit(main())

"""Exit criteria for the toolkit, one test per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""
import json
import math
import random
import tempfile
import time
from dataclasses import replace

import numpy as np

from qodknap.cli import RunConfig, run
from qodknap.cost import CostAssumptions, cost_report, deterministic_time, qod_time
from qodknap.formats import format_instance, parse_instance
from qodknap.knapsack import (
    KnapsackInstance,
    Variant,
    exhaustive_oracle,
    solve,
    solve_variant3_approx,
    subsum_stages,
)
from qodknap.optics import (
    BEAM_SEPARATION,
    REFERENCE_DEVICE,
    feasibility_check,
    reference_report,
    size_device,
)
from qodknap.simulator import BeamEnsemble, apply_gate, auto_device, propagate, simulate

from conftest import random_instance

REFERENCE_DEVICE_TEXT = "lambda=5e-7\nd_b=2e-3\nL=0.3333333333333333\nn_gates=30\nR_M=10\nkappa=5e-3\n"


def test_criterion_1_oracle_equivalence(criterion):
    rng = random.Random(1)
    start = time.perf_counter()
    mismatches = 0
    trials = 0
    for variant in Variant:
        for _ in range(1000):
            inst = random_instance(rng, variant, n_max=15, v_max=50)
            dp, ref = solve(inst), exhaustive_oracle(inst)
            trials += 1
            if (dp.decision, dp.optimum) != (ref.decision, ref.optimum) or not dp.check_witness(inst):
                mismatches += 1
    elapsed = time.perf_counter() - start
    criterion(1, "DP solvers match exhaustive oracle", mismatches == 0 and elapsed < 60,
              f"{trials} instances, {mismatches} mismatches, {elapsed:.1f}s")


def test_criterion_2_optical_dp_equivalence(criterion):
    rng = random.Random(2)
    start = time.perf_counter()
    mismatches = 0
    trials = 0
    for variant in Variant:
        for _ in range(500):
            inst = random_instance(rng, variant, n_max=12, v_max=50)
            dev = auto_device(inst)
            assert dev.phase_jitter == 0
            res, ref = simulate(inst, dev, seed=trials), solve(inst)
            trials += 1
            if (res.decision, res.optimum) != (ref.decision, ref.optimum):
                mismatches += 1
    elapsed = time.perf_counter() - start
    criterion(2, "simulated device matches DP", mismatches == 0 and elapsed < 300,
              f"{trials} instances, {mismatches} mismatches, {elapsed:.1f}s")


def test_criterion_3_truncation_bound(criterion):
    rng = random.Random(3)
    worst = 0.0
    violations = 0
    trials = 0
    for eps in (0.1, 0.25, 0.5):
        done = 0
        while done < 500:
            n = rng.randint(1, 12)
            c = [rng.randint(0, 50) for _ in range(n)]
            # wide cost range so truncation actually removes digits
            w = [rng.randint(0, rng.choice((50, 1000, 100000))) for _ in range(n)]
            inst = KnapsackInstance.optimization(c, w, rng.randint(1, sum(c) + 2))
            r_opt = exhaustive_oracle(inst).optimum
            if r_opt == 0:
                continue
            res = solve_variant3_approx(inst, eps)
            rel = (r_opt - res.optimum) / r_opt
            worst = max(worst, rel / eps)
            if not rel < eps or not res.check_witness(inst):
                violations += 1
            done += 1
            trials += 1
    criterion(3, "truncation relative error below epsilon", violations == 0,
              f"{trials} instances, worst error/eps = {worst:.3f}")


def test_criterion_4_reference_geometry(criterion):
    dev = REFERENCE_DEVICE
    assert dev.n_gates * dev.L == 10.0
    rep = reference_report(dev)
    alpha_ok = abs(rep.alpha - 3.0e-4) <= 1e-5
    kappa_ok = rep.kappa_min_closed_form == 2 * dev.d_b and dev.kappa >= rep.d_final
    bound_ok = rep.bound_ratio == 2000 and rep.B_plus_max == 1999
    _, out = _run_feasibility()
    note_ok = bool(rep.notes) and "200" in rep.notes[0] and "notes: R_M/kappa = 2000" in out
    criterion(4, "reference device geometry", alpha_ok and kappa_ok and bound_ok and note_ok,
              f"alpha={rep.alpha:.4g}, kappa_min(2 d_b)={rep.kappa_min_closed_form:g}, "
              f"d_final={rep.d_final:.6g}, R_M/kappa={rep.bound_ratio}")


def _run_feasibility():
    with tempfile.NamedTemporaryFile("w", suffix=".dev", delete=False) as fh:
        fh.write(REFERENCE_DEVICE_TEXT)
    return run(RunConfig("feasibility", device_path=fh.name))


def test_criterion_5_timing(criterion):
    assum = CostAssumptions(V=1e10, M=1)
    t_det = deterministic_time(30, 200, assum)
    t_q = qod_time(REFERENCE_DEVICE.n_gates, REFERENCE_DEVICE.L, REFERENCE_DEVICE.R_M, assum, 1)
    ok = 3e-7 <= t_det <= 2e-6 and 1e-7 <= t_q <= 2e-6
    criterion(5, "timing reproduction", ok, f"T_det={t_det:.3g}s, T_q={t_q:.3g}s")


def test_criterion_6_acceleration(criterion, tmp_path):
    items = " ".join(str(i) for i in range(1, 31))
    inst = tmp_path / "scenario.txt"
    inst.write_text(f"variant 3\nc {items}\nw {items}\nbudget 200\n")
    dev = tmp_path / "reference.dev"
    dev.write_text(REFERENCE_DEVICE_TEXT)
    _, out = run(RunConfig("compare", instance_paths=[str(inst)], device_path=str(dev), epsilon="auto",
                           output_format="structured"))
    rec = json.loads(out)
    ratio = rec["time_ratio"]
    ok = abs(rec["epsilon"] - 2.5e-4) < 1e-12 and 1e5 <= ratio <= 1e7
    criterion(6, "acceleration on the high-precision scenario", ok,
              f"eps={rec['epsilon']:g}, T_det={rec['time_det']:.3g}s, T_q={rec['time_qod']:.3g}s, ratio={ratio:.3g}")


def test_criterion_7_invariants(criterion):
    rng = random.Random(7)
    failures = []

    # saturation bound after every gate, with jitter
    dev = replace(size_device(10, 300, 5e-7, 1.0), gain=3.0, I_sat=0.7, phase_jitter=0.6)
    gen = np.random.default_rng(7)
    for _ in range(100):
        ens = BeamEnsemble.source(dev)
        for _ in range(10):
            ens = apply_gate(ens, rng.randint(0, 10), 0, dev, rng=gen)
            if ens.intensity.max() > dev.I_sat * (1 + 1e-12):
                failures.append("saturation")

    # merged beam count equals the capped subsum set
    for _ in range(200):
        inst = random_instance(rng, Variant.EXACT_SUM, n_max=12)
        dev = size_device(12, rng.randint(0, 400), 5e-7, 1.0)
        history = []
        propagate(inst, dev, history=history)
        stages = list(subsum_stages(inst.c, dev.lattice_limit()))[1:]
        if [len(s) for s in stages] != history or any(h > 2 ** (j + 1) for j, h in enumerate(history)):
            failures.append("beam count")

    # monotone feasibility
    for _ in range(200):
        max_sum = rng.randint(0, 3000)
        grow = rng.uniform(1, 10)
        a = set(feasibility_check(REFERENCE_DEVICE, max_sum).violations)
        b = set(feasibility_check(replace(REFERENCE_DEVICE, R_M=REFERENCE_DEVICE.R_M * grow), max_sum).violations)
        small = replace(REFERENCE_DEVICE, kappa=REFERENCE_DEVICE.d_final * rng.uniform(0.01, 0.999))
        if not b <= a or BEAM_SEPARATION not in feasibility_check(small, max_sum).violations:
            failures.append("feasibility monotone")

    # linearity in M
    base = CostAssumptions()
    for _ in range(200):
        n, bound, M = rng.randint(1, 100), rng.randint(0, 10**5), rng.randint(0, 1000)
        if not math.isclose(deterministic_time(n, bound, replace(base, M=M)), M * deterministic_time(n, bound, base),
                            rel_tol=1e-12, abs_tol=0):
            failures.append("linear det")
        if not math.isclose(qod_time(n, 0.5, 10.0, base, M), M * qod_time(n, 0.5, 10.0, base, 1),
                            rel_tol=1e-12, abs_tol=0):
            failures.append("linear qod")
        q, d = cost_report(Variant.INTERVAL_SUM, n, bound, M, base)
        if any(e.recompute() != e.value for e in q.formula_trace + d.formula_trace):
            failures.append("trace")

    # parse/emit round trip
    for variant in Variant:
        for _ in range(100):
            inst = random_instance(rng, variant)
            if parse_instance(format_instance(inst)) != inst:
                failures.append("round trip")

    # determinism
    for _ in range(30):
        inst = random_instance(rng, Variant.OPTIMIZATION, n_max=8)
        dev = replace(auto_device(inst), phase_jitter=0.4)
        if simulate(inst, dev, seed=5) != simulate(inst, dev, seed=5):
            failures.append("determinism")

    criterion(7, "invariant suite", not failures,
              "all properties hold" if not failures else f"failed: {sorted(set(failures))}")

import itertools
import random

import pytest

from qodknap.knapsack import KnapsackInstance, Variant


def brute(inst: KnapsackInstance):
    """Plain itertools enumeration: (decision, optimum) for any variant."""
    best = None
    found = False
    for bits in itertools.product((0, 1), repeat=inst.n):
        s = sum(ci for ci, b in zip(inst.c, bits) if b)
        if inst.variant is Variant.EXACT_SUM:
            found |= s == inst.target_K
        elif inst.variant is Variant.INTERVAL_SUM:
            found |= inst.bound_lo < s < inst.bound_hi
        elif s < inst.bound_hi:
            v = sum(wi for wi, b in zip(inst.w, bits) if b)
            best = v if best is None else max(best, v)
    if inst.variant is Variant.OPTIMIZATION:
        return None, (best or 0)
    return found, None


def brute_subset_sums(c):
    return {sum(s) for r in range(len(c) + 1) for s in itertools.combinations(c, r)}


def random_instance(rng: random.Random, variant: Variant, n_max: int = 15, v_max: int = 50,
                    n_min: int = 0) -> KnapsackInstance:
    n = rng.randint(n_min, n_max)
    c = [rng.randint(0, v_max) for _ in range(n)]
    total = sum(c)
    if variant is Variant.EXACT_SUM:
        return KnapsackInstance.exact_sum(c, rng.randint(0, total + 2))
    if variant is Variant.INTERVAL_SUM:
        lo = rng.randint(0, total + 1)
        return KnapsackInstance.interval_sum(c, lo, lo + rng.randint(1, max(2, total // 3)))
    w = [rng.randint(0, v_max) for _ in range(n)]
    return KnapsackInstance.optimization(c, w, rng.randint(0, total + 2))


@pytest.fixture
def rng():
    return random.Random(20240611)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    def record(number: int, title: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

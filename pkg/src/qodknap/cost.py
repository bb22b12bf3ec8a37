"""Implementation, energy and time estimates for the optical device and for a
sequential processor running the same dynamic program.

The asymptotic estimates are evaluated with every hidden constant set to 1
(overridable through ``CostAssumptions.big_o``).  Each reported number is
produced by a named formula from ``FORMULAS`` and logged, together with its
inputs, in the report's ``formula_trace``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .knapsack import Variant

C_LIGHT = 3e8


@dataclass(frozen=True)
class CostAssumptions:
    V: float = 1e10  # deterministic operations per second
    M: int = 1  # repeated inputs
    c_light: float = C_LIGHT
    C1: float | None = None  # seconds per unit of path length; defaults to 1/c_light
    C2: float = 1e-6  # preprocessing seconds per unit of implementation cost
    T_atom: float = 1e-8
    unit_energy: float = 1.0
    big_o: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.C1 is None:
            object.__setattr__(self, "C1", 1.0 / self.c_light)
        for name in ("V", "c_light", "C1", "C2", "T_atom", "unit_energy"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.M < 0:
            raise ValueError("M must be non-negative")

    def k(self, name: str) -> float:
        return self.big_o.get(name, 1.0)


def deterministic_time(n: int, bound: int, assum: CostAssumptions) -> float:
    """Sequential DP time ``M * n * bound / V``."""
    return assum.M * n * bound / assum.V


def qod_time(n: int, L: float, R_M: float, assum: CostAssumptions, M: int | None = None) -> float:
    """Flight time through the cascade plus amplifier dwell, per input times ``M``.

    ``L`` is the spacing between gates, so the optical path is ``n * L``.
    """
    if M is None:
        M = assum.M
    return M * ((n * L + R_M) / assum.c_light + n * assum.T_atom)


# id -> function of keyword inputs; every entry is evaluated exactly as listed.
FORMULAS: dict[str, Callable[..., float]] = {
    "CI_quant=k*K*n": lambda k, K, n: k * K * n,
    "CI_quant=k*K^2*n": lambda k, K, n: k * K**2 * n,
    "CE_quant=k*K*n*(n+K)*M*e": lambda k, K, n, M, e: k * K * n * (n + K) * M * e,
    "CE_quant=k*K^2*n*(n+K)*M*e": lambda k, K, n, M, e: k * K**2 * n * (n + K) * M * e,
    "Time_quant=k*C1*(n+K)*M": lambda k, C1, n, K, M: k * C1 * (n + K) * M,
    "T_pre=C2*CI": lambda C2, CI: C2 * CI,
    "CE_det=k*K*n*M*e": lambda k, K, n, M, e: k * K * n * M * e,
    "Time_det=k*K*n*M/V": lambda k, K, n, M, V: k * K * n * M / V,
    "Kp=delta_p/(eps*kappa)": lambda delta_p, eps, kappa: delta_p / (eps * kappa),
    "CE_det_appr=k*n^4*M*e/eps": lambda k, n, M, e, eps: k * n**4 * M * e / eps,
    "Time_det_appr=k*n^4*M/(V*eps)": lambda k, n, M, V, eps: k * n**4 * M / (V * eps),
    "zero": lambda: 0.0,
}


@dataclass(frozen=True)
class TraceEntry:
    quantity: str
    formula: str
    inputs: dict[str, float]
    value: float

    def recompute(self) -> float:
        return FORMULAS[self.formula](**self.inputs)


@dataclass
class CostReport:
    machine: str  # "QOD" or "Deterministic"
    problem: Variant
    M: int
    CI: float
    CE: float
    time_total: float
    time_preprocessing: float
    formula_trace: list[TraceEntry] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def CE_per_input(self) -> float:
        return self.CE / self.M if self.M else 0.0

    @property
    def time_per_input(self) -> float:
        return self.time_total / self.M if self.M else 0.0

    @property
    def energy_time_product(self) -> float:
        return self.CE * self.time_total


class _Tracer:
    def __init__(self):
        self.trace: list[TraceEntry] = []

    def __call__(self, quantity: str, formula: str, **inputs) -> float:
        value = FORMULAS[formula](**inputs)
        self.trace.append(TraceEntry(quantity, formula, dict(inputs), value))
        return value


def cost_report(variant: Variant | int, n: int, K: int, M: int, assum: CostAssumptions,
                approx_eps: float | None = None, delta_p: float = 1e-7,
                kappa: float = 5e-3) -> tuple[CostReport, CostReport]:
    """Return ``(qod, deterministic)`` cost reports.

    With ``approx_eps`` (optimization variant only) the mirror extent is set by
    the readout resolution ``delta_p / (eps * kappa)`` instead of ``K``.
    """
    variant = Variant(variant)
    if n < 0 or K < 0 or M < 0:
        raise ValueError("n, K and M must be non-negative")
    if approx_eps is not None:
        if not 0 < approx_eps < 1:
            raise ValueError("approx_eps must lie in (0, 1)")
        if variant is not Variant.OPTIMIZATION:
            raise ValueError("approximation costs apply to the optimization variant only")
    e = assum.unit_energy
    q = _Tracer()
    d = _Tracer()
    notes = ["all asymptotic constants = 1 unless overridden in big_o"]

    if approx_eps is not None:
        size = q("K_eff", "Kp=delta_p/(eps*kappa)", delta_p=delta_p, eps=approx_eps, kappa=kappa)
        notes.append("effective extent K replaced by delta_p/(eps*kappa)")
    else:
        size = K
    area = "K^2" if variant is Variant.OPTIMIZATION else "K"
    CI = q("CI", f"CI_quant=k*{area}*n", k=assum.k("CI"), K=size, n=n)
    CE = q("CE", f"CE_quant=k*{area}*n*(n+K)*M*e", k=assum.k("CE"), K=size, n=n, M=M, e=e)
    T = q("Time", "Time_quant=k*C1*(n+K)*M", k=assum.k("Time"), C1=assum.C1, n=n, K=size, M=M)
    T_pre = q("T_pre", "T_pre=C2*CI", C2=assum.C2, CI=CI)
    qod = CostReport("QOD", variant, M, CI, CE, T, T_pre, q.trace, list(notes))

    if approx_eps is not None:
        CE_d = d("CE", "CE_det_appr=k*n^4*M*e/eps", k=assum.k("CE_det"), n=n, M=M, e=e, eps=approx_eps)
        T_d = d("Time", "Time_det_appr=k*n^4*M/(V*eps)", k=assum.k("Time_det"), n=n, M=M,
                V=assum.V, eps=approx_eps)
        notes_d = notes + ["approximate DP time taken as n^4/(V*eps) per input"]
    else:
        CE_d = d("CE", "CE_det=k*K*n*M*e", k=assum.k("CE_det"), K=K, n=n, M=M, e=e)
        T_d = d("Time", "Time_det=k*K*n*M/V", k=assum.k("Time_det"), K=K, n=n, M=M, V=assum.V)
        notes_d = list(notes)
    d("CI", "zero")
    d("T_pre", "zero")
    det = CostReport("Deterministic", variant, M, 0.0, CE_d, T_d, 0.0, d.trace, notes_d)
    return qod, det


@dataclass
class Comparison:
    problem: Variant
    time_ratio: float
    energy_ratio: float
    crossover_M: int | None
    energy_time_qod: float
    energy_time_det: float


def _ratio(num: float, den: float) -> float:
    if den == 0:
        return 1.0 if num == 0 else math.inf
    return num / den


def compare(qod: CostReport, det: CostReport) -> Comparison:
    """Deterministic-to-optical ratios; values above 1 favour the optical device."""
    if qod.problem != det.problem:
        raise ValueError("reports describe different problems")
    tq, td = qod.time_per_input, det.time_per_input
    pre = qod.time_preprocessing - det.time_preprocessing
    if td > tq:
        # smallest M with pre + M*tq < M*td
        crossover = max(1, math.floor(pre / (td - tq)) + 1) if pre > 0 else 1
    else:
        crossover = None
    return Comparison(
        problem=qod.problem,
        time_ratio=_ratio(det.time_total, qod.time_total),
        energy_ratio=_ratio(det.CE, qod.CE),
        crossover_M=crossover,
        energy_time_qod=qod.energy_time_product,
        energy_time_det=det.energy_time_product,
    )

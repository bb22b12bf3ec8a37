"""Gaussian-beam geometry of the splitter cascade: divergence, broadening and
the constraints that keep shifted beams separable and on the mirrors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

DEFAULT_DELTA_P = 1e-7
DEFAULT_T_ATOM = 1e-8
DEFAULT_GAIN = 2.0
DEFAULT_I_SAT = 1.0
DEFAULT_LAMBDA = 5e-7
DEFAULT_PATH_LENGTH = 10.0  # total n*L in meters used when auto-sizing

# violation identifiers
BEAM_SEPARATION = "beam separation"
MIRROR_SIZE = "mirror size"
BOUND_RANGE = "bound range"
WINDOW_FIT = "window fit"


class DeviceError(ValueError):
    pass


def exact(x: float | int) -> Fraction:
    """Exact rational value of a float as written (``5e-3`` -> 1/200)."""
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


@dataclass(frozen=True)
class DeviceParameters:
    lambda_: float
    d_b: float
    L: float
    n_gates: int
    R_M: float
    kappa: float
    delta_p: float = DEFAULT_DELTA_P
    I_sat: float = DEFAULT_I_SAT
    gain: float = DEFAULT_GAIN
    T_atom: float = DEFAULT_T_ATOM
    phase_jitter: float = 0.0

    def __post_init__(self):
        for name in ("lambda_", "d_b", "L", "R_M", "kappa", "delta_p", "I_sat", "T_atom"):
            v = getattr(self, name)
            if not v > 0 or math.isnan(v):
                raise DeviceError(f"{name.rstrip('_')} must be positive")
        if int(self.n_gates) != self.n_gates or self.n_gates < 1:
            raise DeviceError("n_gates must be a positive integer")
        if not self.gain >= 1:
            raise DeviceError("gain must be >= 1")
        if not self.phase_jitter >= 0:
            raise DeviceError("phase_jitter must be >= 0")

    @property
    def alpha(self) -> float:
        return divergence(self.lambda_, self.d_b)

    @property
    def d_final(self) -> float:
        return final_diameter(self.n_gates, self.L, self.alpha, self.d_b)

    def scaled(self, s: float) -> "DeviceParameters":
        """Same device with every length multiplied by ``s``."""
        return replace(
            self,
            lambda_=self.lambda_ * s,
            d_b=self.d_b * s,
            L=self.L * s,
            R_M=self.R_M * s,
            kappa=self.kappa * s,
            delta_p=self.delta_p * s,
        )

    def lattice_limit(self) -> int:
        """Largest integer offset ``k`` whose beam still fits: k*kappa + d_final <= R_M."""
        room = exact(self.R_M) - exact(self.d_final)
        if room < 0:
            return -1
        return math.floor(room / exact(self.kappa))


@dataclass
class GeometryReport:
    alpha: float
    d_final: float
    kappa_min: float
    kappa_min_closed_form: float
    R_M_min: float
    bound_ratio: Fraction
    B_plus_max: int
    max_sum: int
    violations: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise DeviceError(f"{k} must be positive")


def divergence(lambda_: float, d_b: float) -> float:
    _positive(wavelength=lambda_, d_b=d_b)
    return 1.2 * lambda_ / d_b


def final_diameter(n: int, L: float, alpha: float, d_b: float) -> float:
    """Beam diameter after ``n`` gates spaced ``L`` apart."""
    _positive(n=n, L=L, d_b=d_b)
    if alpha < 0 or alpha >= math.pi / 2:
        raise DeviceError("alpha must lie in [0, pi/2)")
    return n * L * math.sin(alpha) + d_b


def optimal_beam_diameter(n: int, L: float, lambda_: float) -> float:
    """Source diameter balancing diffraction spread against the initial size.

    Uses sqrt(n L lambda); the exact minimiser with the 1.2 divergence factor is
    sqrt(1.2 n L lambda), about 10% larger.
    """
    _positive(n=n, L=L, wavelength=lambda_)
    return math.sqrt(n * L * lambda_)


def largest_integer_below(x: Fraction) -> int:
    return math.ceil(x) - 1


def feasibility_check(dev: DeviceParameters, max_sum: int) -> GeometryReport:
    if max_sum < 0:
        raise DeviceError("max_sum must be non-negative")
    alpha = dev.alpha
    d_final = dev.d_final
    n = dev.n_gates
    ratio = exact(dev.R_M) / exact(dev.kappa)
    violations = []
    if dev.kappa < d_final:
        violations.append(BEAM_SEPARATION)
    if not dev.R_M > dev.kappa * n + dev.d_b:
        violations.append(MIRROR_SIZE)
    if not max_sum < ratio:
        violations.append(BOUND_RANGE)
    if max_sum > dev.lattice_limit():
        violations.append(WINDOW_FIT)
    return GeometryReport(
        alpha=alpha,
        d_final=d_final,
        kappa_min=d_final,
        kappa_min_closed_form=2 * dev.d_b,
        R_M_min=max(dev.kappa * n + dev.d_b, dev.kappa * max_sum + d_final),
        bound_ratio=ratio,
        B_plus_max=largest_integer_below(ratio),
        max_sum=max_sum,
        violations=violations,
    )


def size_device(n: int, max_sum: int, lambda_: float = DEFAULT_LAMBDA, L: float | None = None,
                **overrides) -> DeviceParameters:
    """Smallest device that resolves ``n`` gates and sums up to ``max_sum``.

    ``L`` defaults to spreading a 10 m optical path over the gates.
    """
    n = max(int(n), 1)
    if L is None:
        L = DEFAULT_PATH_LENGTH / n
    d_b = optimal_beam_diameter(n, L, lambda_)
    d_final = final_diameter(n, L, divergence(lambda_, d_b), d_b)
    # 2*d_b undershoots d_final once the 1.2 factor is kept
    kappa = max(2 * d_b, d_final)
    R_M = kappa * (max(n, max_sum) + 1) + d_final
    dev = DeviceParameters(lambda_=lambda_, d_b=d_b, L=L, n_gates=n, R_M=R_M, kappa=kappa, **overrides)
    # float rounding can shave the last lattice site
    while dev.lattice_limit() < max(n, max_sum):
        dev = replace(dev, R_M=dev.R_M + kappa)
    return dev


# Reference device: a 10 m optical path folded over 30 gates with 10 m mirrors.
REFERENCE_DEVICE = DeviceParameters(
    lambda_=5e-7, d_b=2e-3, L=10 / 30, n_gates=30, R_M=10.0, kappa=5e-3,
)
# Bound commonly quoted for the reference device; R_M/kappa gives ten times more.
QUOTED_REFERENCE_BOUND = 200


def reference_report(dev: DeviceParameters = REFERENCE_DEVICE, max_sum: int = QUOTED_REFERENCE_BOUND) -> GeometryReport:
    """Geometry report for the reference device, flagging the quoted bound."""
    rep = feasibility_check(dev, max_sum)
    if rep.bound_ratio != QUOTED_REFERENCE_BOUND:
        rep.notes.append(
            f"R_M/kappa = {float(rep.bound_ratio):g}, so sums up to {rep.B_plus_max} fit; "
            f"the quoted limit B+ < {QUOTED_REFERENCE_BOUND} does not follow from R_M/kappa "
            f"(factor {float(rep.bound_ratio / QUOTED_REFERENCE_BOUND):g})"
        )
    return rep

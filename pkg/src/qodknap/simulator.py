"""Stage-by-stage simulation of the splitter/plate/amplifier cascade.

Beams live on an integer lattice: a beam at key ``(z, y)`` is centred
``z * kappa`` meters up and ``y * kappa`` meters across.  Meters only enter at
the CCD.  The field of each beam is a complex amplitude; intensity is its
squared modulus.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TextIO

import numpy as np

from .knapsack import InstanceError, KnapsackInstance, Variant
from .optics import (
    DeviceParameters,
    exact,
    feasibility_check,
    size_device,
)

DEFAULT_MAX_KEYS = 10**7
THRESHOLD_FRACTION = 0.01


class BeamExplosionError(RuntimeError):
    """Too many distinct beams for the in-memory ensemble."""


@dataclass(frozen=True)
class Beam:
    z_units: int
    y_units: int
    amplitude: float
    width: float
    phase: float

    @property
    def intensity(self) -> float:
        return self.amplitude**2


@dataclass
class BeamEnsemble:
    stage: int
    z: np.ndarray
    y: np.ndarray
    field: np.ndarray  # complex
    width: float
    lost: int = 0  # beams that left the mirrors so far

    @classmethod
    def source(cls, dev: DeviceParameters, amplitude: float = 1.0) -> "BeamEnsemble":
        return cls(
            stage=0,
            z=np.zeros(1, dtype=np.int64),
            y=np.zeros(1, dtype=np.int64),
            field=np.array([amplitude], dtype=complex),
            width=dev.d_b,
        )

    @classmethod
    def from_beams(cls, beams, stage: int = 0, width: float = 0.0) -> "BeamEnsemble":
        """Build an ensemble from ``(z, y, amplitude, phase)`` tuples."""
        beams = list(beams)
        z = np.array([b[0] for b in beams], dtype=np.int64)
        y = np.array([b[1] for b in beams], dtype=np.int64)
        f = np.array([b[2] * np.exp(1j * b[3]) for b in beams], dtype=complex)
        return cls(stage=stage, z=z, y=y, field=f, width=width)

    def __len__(self) -> int:
        return int(self.z.size)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.field) ** 2

    @property
    def keys(self) -> set[tuple[int, int]]:
        return set(zip(self.z.tolist(), self.y.tolist()))

    @property
    def beams(self) -> dict[tuple[int, int], Beam]:
        out = {}
        for z, y, f in zip(self.z.tolist(), self.y.tolist(), self.field.tolist()):
            out[(z, y)] = Beam(z, y, abs(f), self.width, math.atan2(f.imag, f.real))
        return out

    def dump(self, fh: TextIO):
        order = np.lexsort((self.y, self.z))
        for i in order:
            f = self.field[i]
            fh.write(
                f"{self.stage} {int(self.z[i])} {int(self.y[i])} "
                f"{abs(f) ** 2:.12g} {self.width:.12g} {math.atan2(f.imag, f.real):.12g}\n"
            )


def apply_gate(ens: BeamEnsemble, c_shift: int, w_shift: int, dev: DeviceParameters,
               rng: np.random.Generator | None = None, limit: int | None = None,
               max_keys: int = DEFAULT_MAX_KEYS) -> BeamEnsemble:
    """Split every beam, shift one copy, recombine coincident beams, amplify.

    Coincident beams combine as (sum of fields) / sqrt(count), which keeps the
    total intensity bounded by the incoming one and cancels beams that arrive
    in antiphase.  Beams with a lattice offset beyond ``limit`` miss the
    mirrors and are discarded.
    """
    if ens.stage >= dev.n_gates:
        raise ValueError(f"stage {ens.stage} already at gate count {dev.n_gates}")
    if c_shift < 0 or w_shift < 0:
        raise ValueError("shifts must be non-negative")
    half = ens.field / math.sqrt(2.0)
    z = np.concatenate([ens.z, ens.z + c_shift])
    y = np.concatenate([ens.y, ens.y + w_shift])
    f = np.concatenate([half, half])
    if dev.phase_jitter > 0:
        if rng is None:
            raise ValueError("phase jitter requires a seeded generator")
        f = f * np.exp(1j * rng.normal(0.0, dev.phase_jitter, size=f.size))
    lost = 0
    if limit is not None:
        keep = (z <= limit) & (y <= limit)
        lost = int(f.size - keep.sum())
        z, y, f = z[keep], y[keep], f[keep]

    if z.size:
        span = int(y.max()) + 1
        code = z * span + y
        uniq, inverse, counts = np.unique(code, return_inverse=True, return_counts=True)
        if uniq.size > max_keys:
            raise BeamExplosionError(f"{uniq.size} distinct beams exceed cap {max_keys}")
        merged = np.zeros(uniq.size, dtype=complex)
        np.add.at(merged, inverse, f)
        merged /= np.sqrt(counts)
        z, y = uniq // span, uniq % span
    else:
        merged = f

    # amplifier: intensity -> min(gain * I, I_sat)
    inten = np.abs(merged) ** 2
    target = np.minimum(dev.gain * inten, dev.I_sat)
    scale = np.ones_like(inten)
    nz = inten > 0
    scale[nz] = np.sqrt(target[nz] / inten[nz])
    merged = merged * scale

    return BeamEnsemble(
        stage=ens.stage + 1,
        z=z.astype(np.int64),
        y=y.astype(np.int64),
        field=merged,
        width=ens.width + dev.L * math.sin(dev.alpha),
        lost=ens.lost + lost,
    )


def gate_shifts(inst: KnapsackInstance) -> list[tuple[int, int]]:
    w = inst.w if inst.variant is Variant.OPTIMIZATION else (0,) * inst.n
    return list(zip(inst.c, w))


def propagate(inst: KnapsackInstance, dev: DeviceParameters, seed: int = 0,
              history: list | None = None, dump: TextIO | None = None,
              max_keys: int = DEFAULT_MAX_KEYS) -> BeamEnsemble:
    """Send the source beam through one gate per item.

    ``history`` (if given) receives the merged-beam count after every stage.
    """
    rng = np.random.default_rng(seed)
    gates = max(dev.n_gates, inst.n)
    if gates != dev.n_gates:
        dev = replace(dev, n_gates=gates)
    limit = dev.lattice_limit()
    ens = BeamEnsemble.source(dev)
    if dump is not None:
        ens.dump(dump)
    for c_shift, w_shift in gate_shifts(inst):
        ens = apply_gate(ens, c_shift, w_shift, dev, rng=rng, limit=limit, max_keys=max_keys)
        if history is not None:
            history.append(len(ens))
        if dump is not None:
            ens.dump(dump)
    return ens


@dataclass
class CcdReading:
    pixel_size: float
    intensity: dict[tuple[int, ...], float]
    threshold: float
    two_d: bool
    unresolved: list[tuple[tuple[int, int], tuple[int, int]]] = field(default_factory=list)

    def centers(self) -> list[tuple[float, ...]]:
        """Pixel centres (meters) of every lit pixel, sorted by pixel index."""
        return [tuple((i + 0.5) * self.pixel_size for i in idx) for idx in sorted(self.intensity)]


def _unresolved_pairs(keys: list[tuple[int, int]], spacing: float, kappa: float,
                      cap: int = 1000) -> list:
    """Lattice pairs closer than ``spacing`` meters (at most ``cap`` reported)."""
    if kappa >= spacing:
        return []
    reach = spacing / kappa
    r = min(math.ceil(reach), 64)
    present = set(keys)
    offsets = [
        (dz, dy)
        for dz in range(0, r + 1)
        for dy in range(-r, r + 1)
        if (dz, dy) > (0, 0) and math.hypot(dz, dy) < reach
    ]
    pairs = []
    for k in sorted(present):
        for dz, dy in offsets:
            other = (k[0] + dz, k[1] + dy)
            if other in present:
                pairs.append((k, other))
                if len(pairs) >= cap:
                    return pairs
    return pairs


def ccd_read(ens: BeamEnsemble, dev: DeviceParameters, two_d: bool = False,
             threshold: float | None = None, photons: int | None = None,
             rng: np.random.Generator | None = None) -> CcdReading:
    """Bin beam intensities into CCD pixels.

    ``photons`` switches on shot noise: the detected intensity in a pixel is a
    Poisson photon count scaled back to intensity units.
    """
    if threshold is None:
        threshold = dev.I_sat * THRESHOLD_FRACTION
    ratio = exact(dev.kappa) / exact(dev.delta_p)
    num, den = ratio.numerator, ratio.denominator
    inten = ens.intensity
    if photons is not None:
        if rng is None:
            raise ValueError("shot noise requires a seeded generator")
        total = inten.sum()
        if total > 0:
            inten = rng.poisson(inten / total * photons) * (total / photons)
    pixels: dict[tuple[int, ...], float] = {}
    lit_keys = []
    for z, y, I in zip(ens.z.tolist(), ens.y.tolist(), inten.tolist()):
        if I < threshold:
            continue
        iz = z * num // den
        idx = (iz, y * num // den) if two_d else (iz,)
        pixels[idx] = pixels.get(idx, 0.0) + I
        lit_keys.append((z, y))
    unresolved = _unresolved_pairs(lit_keys, dev.d_final, dev.kappa) if lit_keys else []
    return CcdReading(dev.delta_p, pixels, threshold, two_d, unresolved)


@dataclass
class DetectionWindow:
    y_min: float | None = None
    y_max: float | None = None
    z_budget: float | None = None

    @classmethod
    def for_instance(cls, inst: KnapsackInstance, dev: DeviceParameters) -> "DetectionWindow":
        k = dev.kappa
        if inst.variant is Variant.EXACT_SUM:
            return cls(y_min=k * inst.target_K - k / 2, y_max=k * inst.target_K + k / 2)
        if inst.variant is Variant.INTERVAL_SUM:
            return cls(y_min=k * inst.bound_lo, y_max=k * inst.bound_hi)
        return cls(z_budget=k * inst.bound_hi - dev.delta_p)


@dataclass
class SimulationResult:
    variant: Variant
    decision: bool | None = None
    optimum: int | None = None
    detected_offsets: list[tuple[float, ...]] = field(default_factory=list)
    beam_count_history: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def snap(offset: float, kappa: float) -> float:
    """Round a measured centre to the nearest lattice site (precision kappa/2)."""
    return kappa * round(offset / kappa)


def read_optimum(centers: list[tuple[float, float]], kappa: float, z_budget: float) -> int:
    """Largest y offset (in lattice units) among centres inside the z budget."""
    best = 0
    for zc, yc in centers:
        if snap(zc, kappa) < z_budget:
            best = max(best, round(yc / kappa))
    return best


def decide(reading: CcdReading, inst: KnapsackInstance, dev: DeviceParameters) -> SimulationResult:
    want_2d = inst.variant is Variant.OPTIMIZATION
    if reading.two_d != want_2d:
        raise InstanceError("CCD reading dimensionality does not match the variant")
    win = DetectionWindow.for_instance(inst, dev)
    centers = reading.centers()
    res = SimulationResult(inst.variant, detected_offsets=centers)
    if want_2d:
        res.optimum = read_optimum(centers, dev.kappa, win.z_budget)
    else:
        res.decision = any(win.y_min < snap(c[0], dev.kappa) < win.y_max for c in centers)
    return res


def required_span(inst: KnapsackInstance) -> int:
    """Largest lattice offset any beam of this instance can reach."""
    span = max(inst.cap, sum(inst.c))
    if inst.variant is Variant.OPTIMIZATION:
        span = max(span, sum(inst.w))
    return span


def auto_device(inst: KnapsackInstance, **overrides) -> DeviceParameters:
    """Ideal device large enough that no beam of ``inst`` leaves the mirrors."""
    return size_device(inst.n, required_span(inst), **overrides)


def simulate(inst: KnapsackInstance, dev: DeviceParameters, seed: int = 0,
             dump: TextIO | None = None, max_keys: int = DEFAULT_MAX_KEYS) -> SimulationResult:
    """Propagate, read the CCD and decide; warnings record anything unphysical."""
    warnings = []
    if dev.n_gates < inst.n:
        warnings.append(f"gate count mismatch: device has {dev.n_gates}, instance needs {inst.n}")
    needed = inst.cap
    if inst.variant is Variant.OPTIMIZATION:
        needed = max(needed, sum(inst.w))
    geo = feasibility_check(dev, needed)
    if not geo.feasible:
        warnings.append("geometry infeasible: " + ", ".join(geo.violations))
    history: list[int] = []
    ens = propagate(inst, dev, seed, history=history, dump=dump, max_keys=max_keys)
    reading = ccd_read(ens, dev, two_d=inst.variant is Variant.OPTIMIZATION)
    res = decide(reading, inst, dev)
    res.beam_count_history = history
    if ens.lost:
        warnings.append(f"{ens.lost} beam passages missed the mirrors")
    dark = int((ens.intensity < reading.threshold).sum())
    if dark:
        warnings.append(f"interference loss: {dark} beams below detection threshold")
    if reading.unresolved:
        warnings.append(f"unresolved beams: {len(reading.unresolved)} pairs closer than d_final")
    res.warnings = warnings + res.warnings
    return res

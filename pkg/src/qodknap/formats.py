"""Text formats for instances and devices, and flat report records."""
from __future__ import annotations

import json
import math
from dataclasses import fields

from .knapsack import InstanceError, KnapsackInstance, Variant
from .optics import DeviceError, DeviceParameters

DEVICE_KEYS = {
    "lambda": "lambda_",
    "d_b": "d_b",
    "L": "L",
    "n_gates": "n_gates",
    "R_M": "R_M",
    "kappa": "kappa",
    "delta_p": "delta_p",
    "T_atom": "T_atom",
    "gain": "gain",
    "I_sat": "I_sat",
    "phase_jitter": "phase_jitter",
}
GEOMETRY_KEYS = ("lambda", "d_b", "L", "n_gates", "R_M", "kappa")


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def _ints(tokens: list[str], lineno: int) -> list[int]:
    out = []
    for tok in tokens:
        try:
            v = int(tok)
        except ValueError:
            raise ParseError(f"not an integer: {tok!r}", lineno) from None
        if v < 0:
            raise ParseError(f"negative integer: {v}", lineno)
        out.append(v)
    return out


_ARITY = {"variant": 1, "target": 1, "budget": 1, "bounds": 2}


def parse_instance(source: str) -> KnapsackInstance:
    """Parse ``variant``/``c``/``w``/``target``/``bounds``/``budget`` lines."""
    seen: dict[str, list[int]] = {}
    for lineno, raw in enumerate(source.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *rest = line.split()
        if key not in ("variant", "c", "w", "target", "bounds", "budget"):
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in seen:
            raise ParseError(f"duplicate key {key!r}", lineno)
        vals = _ints(rest, lineno)
        if key in _ARITY and len(vals) != _ARITY[key]:
            raise ParseError(f"{key} takes {_ARITY[key]} value(s), got {len(vals)}", lineno)
        seen[key] = vals
    if "variant" not in seen:
        raise ParseError("missing 'variant'")
    if seen["variant"][0] not in (1, 2, 3):
        raise ParseError(f"unknown variant {seen['variant'][0]}")
    variant = Variant(seen["variant"][0])
    c = seen.get("c", [])
    lo = hi = None
    if "bounds" in seen:
        lo, hi = seen["bounds"]
        if lo >= hi:
            raise InstanceError("bounds not increasing")
    if "budget" in seen:
        hi = seen["budget"][0]
    if "bounds" in seen and "budget" in seen:
        raise InstanceError("give either bounds or budget, not both")
    return KnapsackInstance(
        variant,
        tuple(c),
        w=tuple(seen["w"]) if "w" in seen else None,
        target_K=seen["target"][0] if "target" in seen else None,
        bound_lo=lo,
        bound_hi=hi,
    )


def format_instance(inst: KnapsackInstance) -> str:
    lines = [f"variant {int(inst.variant)}", " ".join(["c", *map(str, inst.c)])]
    if inst.variant is Variant.EXACT_SUM:
        lines.append(f"target {inst.target_K}")
    elif inst.variant is Variant.INTERVAL_SUM:
        lines.append(f"bounds {inst.bound_lo} {inst.bound_hi}")
    else:
        lines.append(" ".join(["w", *map(str, inst.w)]))
        lines.append(f"budget {inst.bound_hi}")
    return "\n".join(lines) + "\n"


def parse_device_values(source: str) -> dict[str, float]:
    """Raw ``key=value`` pairs (file keys, SI units)."""
    out: dict[str, float] = {}
    for lineno, raw in enumerate(source.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected key=value", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in DEVICE_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        try:
            num = float(val)
        except ValueError:
            raise ParseError(f"not a number: {val!r}", lineno) from None
        if not math.isfinite(num) and not (key == "I_sat" and num == math.inf):
            raise ParseError(f"{key} must be finite", lineno)
        if key == "n_gates":
            if num != int(num):
                raise ParseError("n_gates must be an integer", lineno)
            num = int(num)
        if num < 0 or (num == 0 and key != "phase_jitter"):
            raise ParseError(f"{key} must be positive", lineno)
        out[key] = num
    return out


def parse_device(source: str, instance: KnapsackInstance | None = None) -> DeviceParameters:
    """Parse a device file; omitted geometry is auto-sized from ``instance``."""
    vals = parse_device_values(source)
    kwargs = {DEVICE_KEYS[k]: v for k, v in vals.items()}
    missing = [k for k in GEOMETRY_KEYS if k not in vals]
    if missing:
        if instance is None:
            raise DeviceError("missing device keys: " + ", ".join(missing))
        from .simulator import auto_device

        sized = auto_device(instance)
        for k in missing:
            kwargs[DEVICE_KEYS[k]] = getattr(sized, DEVICE_KEYS[k])
    return DeviceParameters(**kwargs)


def format_device(dev: DeviceParameters) -> str:
    inv = {v: k for k, v in DEVICE_KEYS.items()}
    return "".join(f"{inv[f.name]}={getattr(dev, f.name)!r}\n" for f in fields(dev))


def _plain(v):
    if isinstance(v, Variant):
        return int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if hasattr(v, "numerator") and not isinstance(v, (int, bool)):
        return float(v)
    return v


def structured(record: dict) -> str:
    """Flat JSON object; keys keep insertion order."""
    return json.dumps({k: _plain(v) for k, v in record.items()}, separators=(", ", ": "))


def text(record: dict) -> str:
    lines = []
    for k, v in record.items():
        v = _plain(v)
        if isinstance(v, list):
            v = " ".join(json.dumps(x) if not isinstance(x, str) else x for x in v) if v else "-"
        elif v is None:
            v = "-"
        elif isinstance(v, bool):
            v = "YES" if v else "NO"
        lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"

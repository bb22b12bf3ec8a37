"""Exact and approximate solvers for the three boolean knapsack variants.

Items are indexed from 0.  Every solver returns the lexicographically
smallest witness (as a sorted index tuple) among all valid ones, so the DP
solvers and the brute-force oracle agree on witnesses as well as answers.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

INT64_MAX = 2**63 - 1
DEFAULT_ORACLE_LIMIT = 24


class Variant(enum.IntEnum):
    EXACT_SUM = 1
    INTERVAL_SUM = 2
    OPTIMIZATION = 3


class InstanceError(ValueError):
    """Malformed or inconsistent knapsack instance."""


@dataclass(frozen=True)
class KnapsackInstance:
    variant: Variant
    c: tuple[int, ...]
    w: tuple[int, ...] | None = None
    target_K: int | None = None
    bound_lo: int | None = None
    bound_hi: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "c", tuple(int(x) for x in self.c))
        if self.w is not None:
            object.__setattr__(self, "w", tuple(int(x) for x in self.w))
        self._validate()

    def _validate(self):
        v = self.variant
        if any(x < 0 for x in self.c):
            raise InstanceError("weights c must be non-negative")
        if sum(self.c) > INT64_MAX:
            raise InstanceError("sum of c overflows 64-bit range")
        present = {
            "w": self.w is not None,
            "target": self.target_K is not None,
            "bound_lo": self.bound_lo is not None,
            "bound_hi": self.bound_hi is not None,
        }
        required = {
            Variant.EXACT_SUM: {"target"},
            Variant.INTERVAL_SUM: {"bound_lo", "bound_hi"},
            Variant.OPTIMIZATION: {"w", "bound_hi"},
        }[v]
        for name, has in present.items():
            if has and name not in required:
                raise InstanceError(f"field {name!r} not allowed for variant {int(v)}")
            if not has and name in required:
                raise InstanceError(f"field {name!r} required for variant {int(v)}")
        for name in ("target_K", "bound_lo", "bound_hi"):
            val = getattr(self, name)
            if val is not None and val < 0:
                raise InstanceError(f"{name} must be non-negative")
        if v is Variant.INTERVAL_SUM and self.bound_lo >= self.bound_hi:
            raise InstanceError("bounds not increasing")
        if v is Variant.OPTIMIZATION:
            if len(self.w) != len(self.c):
                raise InstanceError("c and w differ in length")
            if any(x < 0 for x in self.w):
                raise InstanceError("costs w must be non-negative")
            if sum(self.w) > INT64_MAX:
                raise InstanceError("sum of w overflows 64-bit range")

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def cap(self) -> int:
        """Largest weight sum that can matter for the answer."""
        if self.variant is Variant.EXACT_SUM:
            return self.target_K
        # strict upper bound for both interval and optimization variants
        return max(self.bound_hi - 1, 0)

    def normalized(self) -> tuple["KnapsackInstance", tuple[int, ...]]:
        """Drop items that can never take part in a valid subset.

        Returns the reduced instance and the original indices of the kept items.
        """
        cap = self.cap
        if self.variant is Variant.OPTIMIZATION and self.bound_hi == 0:
            keep: tuple[int, ...] = ()
        else:
            keep = tuple(i for i, ci in enumerate(self.c) if ci <= cap)
        c = tuple(self.c[i] for i in keep)
        w = tuple(self.w[i] for i in keep) if self.w is not None else None
        return replace(self, c=c, w=w), keep

    @classmethod
    def exact_sum(cls, c: Iterable[int], K: int) -> "KnapsackInstance":
        return cls(Variant.EXACT_SUM, tuple(c), target_K=K)

    @classmethod
    def interval_sum(cls, c: Iterable[int], lo: int, hi: int) -> "KnapsackInstance":
        return cls(Variant.INTERVAL_SUM, tuple(c), bound_lo=lo, bound_hi=hi)

    @classmethod
    def optimization(cls, c: Iterable[int], w: Iterable[int], B_plus: int) -> "KnapsackInstance":
        return cls(Variant.OPTIMIZATION, tuple(c), w=tuple(w), bound_hi=B_plus)


@dataclass(frozen=True)
class SubsumSet:
    cap: int
    members: frozenset[int]

    def __contains__(self, x: int) -> bool:
        return x in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))


@dataclass(frozen=True)
class SolveResult:
    variant: Variant
    decision: bool | None = None
    optimum: int | None = None
    witness: tuple[int, ...] | None = None
    method: str = "dp"
    truncation: int | None = None

    def check_witness(self, inst: KnapsackInstance) -> bool:
        """Re-evaluate the witness against the instance."""
        if self.witness is None:
            return True
        if len(set(self.witness)) != len(self.witness):
            return False
        if any(not 0 <= i < inst.n for i in self.witness):
            return False
        s = sum(inst.c[i] for i in self.witness)
        if inst.variant is Variant.EXACT_SUM:
            return self.decision is True and s == inst.target_K
        if inst.variant is Variant.INTERVAL_SUM:
            return self.decision is True and inst.bound_lo < s < inst.bound_hi
        if s >= inst.bound_hi:
            return False
        value = sum(inst.w[i] for i in self.witness)
        return value == self.optimum


def _bitset_members(bits: int) -> frozenset[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return frozenset(out)


def _check_inputs(c: Sequence[int], cap: int):
    if cap < 0:
        raise InstanceError("cap must be non-negative")
    if any(x < 0 for x in c):
        raise InstanceError("weights c must be non-negative")


def subsum_stages(c: Sequence[int], cap: int) -> Iterator[SubsumSet]:
    """Yield the capped subsum sets for every prefix of ``c``, starting with {0}."""
    _check_inputs(c, cap)
    mask = (1 << (cap + 1)) - 1
    bits = 1
    yield SubsumSet(cap, frozenset({0}))
    for ci in c:
        bits = (bits | (bits << ci)) & mask
        yield SubsumSet(cap, _bitset_members(bits))


def dp_reachable_sums(c: Sequence[int], cap: int) -> SubsumSet:
    """All subset sums of ``c`` lying in ``{0, ..., cap}``."""
    _check_inputs(c, cap)
    mask = (1 << (cap + 1)) - 1
    bits = 1
    for ci in c:
        bits = (bits | (bits << ci)) & mask
    return SubsumSet(cap, _bitset_members(bits))


def _suffix_bitsets(c: Sequence[int], cap: int) -> list[int]:
    # suf[i] = subset sums (<= cap) of c[i:]
    mask = (1 << (cap + 1)) - 1
    suf = [0] * (len(c) + 1)
    suf[len(c)] = 1
    for i in range(len(c) - 1, -1, -1):
        suf[i] = (suf[i + 1] | (suf[i + 1] << c[i])) & mask
    return suf


def _lex_smallest_hitting(c: Sequence[int], targets: int, cap: int) -> tuple[int, ...] | None:
    """Lexicographically smallest index set whose sum lies in the ``targets`` bitset."""
    suf = _suffix_bitsets(c, cap)
    remaining = targets & suf[0]
    if not remaining:
        return None
    chosen: list[int] = []
    start = 0
    while not remaining & 1:
        for j in range(start, len(c)):
            nxt = (remaining >> c[j]) & suf[j + 1]
            if nxt:
                chosen.append(j)
                remaining = nxt
                start = j + 1
                break
        else:  # pragma: no cover - guarded by remaining & suf[start]
            raise AssertionError("backtracking lost the target")
    return tuple(chosen)


def _require(inst: KnapsackInstance, variant: Variant):
    if inst.variant is not variant:
        raise InstanceError(f"expected variant {int(variant)}, got {int(inst.variant)}")


def solve_variant1(inst: KnapsackInstance) -> SolveResult:
    _require(inst, Variant.EXACT_SUM)
    K = inst.target_K
    witness = _lex_smallest_hitting(inst.c, 1 << K, K)
    return SolveResult(Variant.EXACT_SUM, decision=witness is not None, witness=witness)


def solve_variant2(inst: KnapsackInstance) -> SolveResult:
    _require(inst, Variant.INTERVAL_SUM)
    lo, hi = inst.bound_lo, inst.bound_hi
    if lo >= hi:
        raise InstanceError("bounds not increasing")
    if hi - lo < 2:
        return SolveResult(Variant.INTERVAL_SUM, decision=False)
    cap = hi - 1
    # bits lo+1 .. hi-1
    targets = ((1 << (hi - lo - 1)) - 1) << (lo + 1)
    witness = _lex_smallest_hitting(inst.c, targets, cap)
    return SolveResult(Variant.INTERVAL_SUM, decision=witness is not None, witness=witness)


def _optimize_by_weight(c: Sequence[int], w: Sequence[int], cap: int) -> tuple[int, tuple[int, ...]]:
    n = len(c)
    # best[i][k] = max cost from items i.. with weight <= k
    best = np.zeros((n + 1, cap + 1), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        row = best[i + 1].copy()
        if c[i] <= cap:
            cand = best[i + 1, : cap + 1 - c[i]] + w[i]
            np.maximum(row[c[i]:], cand, out=row[c[i]:])
        best[i] = row
    opt = int(best[0, cap])
    chosen: list[int] = []
    need, room, start = opt, cap, 0
    while need > 0:
        for j in range(start, n):
            if c[j] <= room and w[j] <= need and w[j] + best[j + 1, room - c[j]] >= need:
                chosen.append(j)
                need -= w[j]
                room -= c[j]
                start = j + 1
                break
        else:  # pragma: no cover
            raise AssertionError("backtracking lost the optimum")
    return opt, tuple(chosen)


def _optimize_by_cost(c: Sequence[int], w: Sequence[int], cap: int) -> tuple[int, tuple[int, ...]]:
    n = len(c)
    total = sum(w)
    inf = np.iinfo(np.int64).max
    # least[i][p] = min weight from items i.. reaching cost exactly p
    least = np.full((n + 1, total + 1), inf, dtype=np.int64)
    least[n, 0] = 0
    for i in range(n - 1, -1, -1):
        row = least[i + 1].copy()
        prev = least[i + 1, : total + 1 - w[i]]
        cand = np.where(prev == inf, inf, prev + c[i])
        np.minimum(row[w[i]:], cand, out=row[w[i]:])
        least[i] = row
    feasible = np.nonzero(least[0] <= cap)[0]
    opt = int(feasible.max())
    chosen: list[int] = []
    need, room, start = opt, cap, 0
    while need > 0:
        for j in range(start, n):
            if w[j] <= need and c[j] <= room and least[j + 1, need - w[j]] <= room - c[j]:
                chosen.append(j)
                need -= w[j]
                room -= c[j]
                start = j + 1
                break
        else:  # pragma: no cover
            raise AssertionError("backtracking lost the optimum")
    return opt, tuple(chosen)


def _optimize(c: Sequence[int], w: Sequence[int], B_plus: int) -> tuple[int, tuple[int, ...] | None]:
    if B_plus <= 0:
        # not even the empty set satisfies sum < 0
        return 0, None
    cap = B_plus - 1
    # table size O(n * min(B+, sum w))
    if sum(w) < cap:
        return _optimize_by_cost(c, w, cap)
    return _optimize_by_weight(c, w, cap)


def solve_variant3_exact(inst: KnapsackInstance) -> SolveResult:
    _require(inst, Variant.OPTIMIZATION)
    if len(inst.w) != len(inst.c):
        raise InstanceError("c and w differ in length")
    opt, witness = _optimize(inst.c, inst.w, inst.bound_hi)
    return SolveResult(Variant.OPTIMIZATION, optimum=opt, witness=witness)


def solve(inst: KnapsackInstance) -> SolveResult:
    """Dispatch to the exact DP solver for the instance's variant."""
    return {
        Variant.EXACT_SUM: solve_variant1,
        Variant.INTERVAL_SUM: solve_variant2,
        Variant.OPTIMIZATION: solve_variant3_exact,
    }[inst.variant](inst)


def _all_sums(values: Sequence[int]) -> np.ndarray:
    # bit i of the array index <=> item i selected
    sums = np.zeros(1, dtype=np.int64)
    for v in values:
        sums = np.concatenate([sums, sums + v])
    return sums


def _lex_smallest_mask(masks: np.ndarray, n: int) -> tuple[int, ...]:
    chosen: list[int] = []
    cands = masks
    below = 0  # bits already decided
    while True:
        if np.any(cands == (cands & below)):
            return tuple(chosen)
        for j in range(chosen[-1] + 1 if chosen else 0, n):
            free = (1 << j) - 1 & ~below
            sel = cands[((cands & free) == 0) & ((cands >> j) & 1 == 1)]
            if sel.size:
                chosen.append(j)
                cands = sel
                below |= (1 << (j + 1)) - 1
                break
        else:  # pragma: no cover
            raise AssertionError("no candidate left")


def exhaustive_oracle(inst: KnapsackInstance, limit: int = DEFAULT_ORACLE_LIMIT) -> SolveResult:
    """Brute force over all 2^n assignments."""
    n = inst.n
    if n > limit:
        raise InstanceError(f"n={n} exceeds exhaustive limit {limit}")
    sums = _all_sums(inst.c)
    masks = np.arange(sums.size, dtype=np.int64)
    v = inst.variant
    if v is Variant.EXACT_SUM:
        ok = sums == inst.target_K
    elif v is Variant.INTERVAL_SUM:
        ok = (sums > inst.bound_lo) & (sums < inst.bound_hi)
    else:
        costs = _all_sums(inst.w)
        feasible = sums < inst.bound_hi
        if not feasible.any():
            return SolveResult(v, optimum=0, witness=None, method="exhaustive")
        opt = int(costs[feasible].max())
        ok = feasible & (costs == opt)
        witness = _lex_smallest_mask(masks[ok], n)
        return SolveResult(v, optimum=opt, witness=witness, method="exhaustive")
    if not ok.any():
        return SolveResult(v, decision=False, method="exhaustive")
    return SolveResult(v, decision=True, witness=_lex_smallest_mask(masks[ok], n), method="exhaustive")


def truncate_instance(inst: KnapsackInstance, t: int, truncate_weights: bool = False) -> KnapsackInstance:
    """Drop the lowest ``t`` binary digits of every cost.

    With ``truncate_weights`` the weights ``c`` and the bound are truncated too;
    the bound is rounded up so every originally feasible subset stays feasible
    in the truncated instance, but truncated answers may then be infeasible.
    """
    _require(inst, Variant.OPTIMIZATION)
    if t < 0:
        raise InstanceError("t must be non-negative")
    w = tuple(x >> t for x in inst.w)
    if not truncate_weights:
        return replace(inst, w=w)
    c = tuple(x >> t for x in inst.c)
    hi = -((-inst.bound_hi) >> t)
    return replace(inst, c=c, w=w, bound_hi=hi)


def choose_truncation(n: int, w_max: int, epsilon: Fraction) -> int:
    """Largest t >= 0 with n * 2**t <= epsilon * w_max (0 if none)."""
    t = 0
    while n * 2 ** (t + 1) <= epsilon * w_max:
        t += 1
    return t


def solve_variant3_approx(inst: KnapsackInstance, epsilon: float | Fraction | str) -> SolveResult:
    """Cost-truncation approximation with relative error below ``epsilon``.

    Items too heavy to fit on their own are discarded first, which makes the
    largest remaining cost a lower bound on the optimum.
    """
    _require(inst, Variant.OPTIMIZATION)
    eps = Fraction(epsilon) if not isinstance(epsilon, float) else Fraction(repr(epsilon))
    if not 0 < eps < 1:
        raise InstanceError("epsilon must lie in (0, 1)")
    reduced, keep = inst.normalized()
    w_max = max(reduced.w, default=0)
    if w_max == 0:
        raise InstanceError("largest feasible cost is 0; relative error undefined")
    t = choose_truncation(reduced.n, w_max, eps)
    coarse = truncate_instance(reduced, t)
    _, local = _optimize(coarse.c, coarse.w, coarse.bound_hi)
    witness = tuple(keep[i] for i in local)
    value = sum(inst.w[i] for i in witness)
    return SolveResult(Variant.OPTIMIZATION, optimum=value, witness=witness, method="truncated", truncation=t)

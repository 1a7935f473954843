"""Set-function value oracles with query accounting.

A problem instance bundles the joint objective f(S, y), submodular in the
subset argument and concave in the continuous one, with its constraint set,
Lipschitz/bound constants, and a thread-safe query counter.  Subsets travel
as bitmasks (the canonical form, fast to enumerate) or as any iterable of
0-based element indices.

Every logical value-oracle query bumps the counter by exactly one, whether
it arrives through `evaluate`, the unchecked fast path, or a batched chain
evaluation.  Nothing queries the oracle silently.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional

import numpy as np

MEMBERSHIP_TOL = 1e-12


class DomainError(ValueError):
    """An argument fell outside the instance's declared domain."""


class EnumerationCapError(ValueError):
    """A brute-force routine was asked to enumerate past its cap."""


def as_mask(S, n: int) -> int:
    """Canonicalize a subset (bitmask or iterable of indices) to a bitmask."""
    if isinstance(S, (int, np.integer)):
        mask = int(S)
        if mask < 0 or mask >> n:
            raise DomainError(f"mask {mask} out of range for ground set of size {n}")
        return mask
    mask = 0
    for i in S:
        i = int(i)
        if i < 0 or i >= n:
            raise DomainError(f"element {i} out of range for ground set of size {n}")
        mask |= 1 << i
    return mask


def mask_to_indices(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def charvec(S, n: int) -> np.ndarray:
    """0/1 indicator vector of S over a ground set of n elements."""
    mask = as_mask(S, n)
    v = np.zeros(n, dtype=np.int64)
    for i in range(n):
        if (mask >> i) & 1:
            v[i] = 1
    return v


def set_from_charvec(v) -> frozenset:
    """Inverse of `charvec`; rejects vectors that are not exactly 0/1."""
    v = np.asarray(v)
    if not np.isin(v, (0, 1)).all():
        raise DomainError("characteristic vector must have entries in {0, 1}")
    return frozenset(int(i) for i in np.nonzero(v)[0])


class QueryCounter:
    """Thread-safe tally of value-oracle calls."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0

    def add(self, k: int = 1) -> None:
        with self._lock:
            self._count += k

    @property
    def count(self) -> int:
        return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0

    def __repr__(self):
        return f"QueryCounter({self._count})"


@dataclass(frozen=True)
class ProblemConstants:
    """Regularity constants of the joint objective on its feasible product set.

    `subgradient_bound` is the operative Lipschitz constant for the subset
    block: the chain subgradients of the extension are bounded both by the
    declared `lipschitz_x` and by four times the uniform value bound, so the
    smaller of the two is always used.
    """

    lipschitz_x: float
    lipschitz_y: float
    value_bound: float
    diameter_y: float

    def __post_init__(self):
        for name in ("lipschitz_x", "lipschitz_y", "value_bound", "diameter_y"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")

    @property
    def subgradient_bound(self) -> float:
        return min(self.lipschitz_x, 4.0 * self.value_bound)

    def updated(self, **changes) -> "ProblemConstants":
        return replace(self, **changes)


@dataclass
class SetFunctionInstance:
    """Joint objective f(S, y) exposed through a value oracle.

    Fields beyond the oracle are capability hooks: a batched evaluator along
    nested chains (`chain_oracle`), an affine-in-y decomposition
    (`affine_y`), an analytic inner maximizer for nonnegative mixtures of
    set values (`mixture_argmax_y`), and known saddle data when the problem
    has one.  All hooks are optional; generic fallbacks exist everywhere.

    The oracle itself must be deterministic and safe to call concurrently.
    """

    n: int
    m: int
    oracle: Callable[[int, np.ndarray], float]
    constraint: Any
    constants: ProblemConstants
    name: str = ""
    chain_oracle: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    affine_y: Optional[Callable[[int], tuple[float, np.ndarray]]] = None
    mixture_argmax_y: Optional[Callable[[list[int], np.ndarray], np.ndarray]] = None
    # Finite set of y points that always contains an inner maximizer of any
    # nonnegative mixture of set values (e.g. box corners for affine
    # objectives); enables exact vectorized gap evaluation.
    inner_max_candidates: Optional[list[np.ndarray]] = None
    # Batched oracle over many y points at once: (mask, Y[rows]) -> values.
    oracle_vectorized: Optional[Callable[[int, np.ndarray], np.ndarray]] = None
    saddle: Optional[tuple[int, np.ndarray]] = None
    saddle_value: Optional[float] = None
    extension_saddle: Optional[tuple[np.ndarray, np.ndarray]] = None
    info: dict = field(default_factory=dict)
    counter: QueryCounter = field(default_factory=QueryCounter)

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("ground set must be nonempty")
        if self.m <= 0:
            raise ValueError("continuous block must have positive dimension")

    def check_y(self, y: np.ndarray) -> None:
        if not self.constraint.contains(y, MEMBERSHIP_TOL):
            raise DomainError(f"point {y!r} is not feasible for {self.name or 'instance'}")

    def evaluate(self, S, y, check_domain: bool = True) -> float:
        """f(S, y).  Counts one query; validates S and y unless told not to."""
        mask = as_mask(S, self.n)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if check_domain:
            if y.shape != (self.m,):
                raise DomainError(f"expected y of dimension {self.m}, got shape {y.shape}")
            self.check_y(y)
        self.counter.add(1)
        return float(self.oracle(mask, y))

    def evaluate_mask(self, mask: int, y: np.ndarray) -> float:
        """Trusted fast path: no validation, still counted."""
        self.counter.add(1)
        return float(self.oracle(mask, y))

    def chain_values(self, perm: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Values along the nested levels {}, {perm[0]}, {perm[0], perm[1]}, ...

        Returns n+1 values and counts n+1 queries.  Uses the instance's
        batched evaluator when present (cut functions update incrementally
        along a chain), otherwise falls back to one oracle call per level.
        """
        if self.chain_oracle is not None:
            vals = np.asarray(self.chain_oracle(perm, y), dtype=float)
            self.counter.add(self.n + 1)
            return vals
        vals = np.empty(self.n + 1)
        mask = 0
        vals[0] = self.oracle(mask, y)
        for k, e in enumerate(perm):
            mask |= 1 << int(e)
            vals[k + 1] = self.oracle(mask, y)
        self.counter.add(self.n + 1)
        return vals

    def value_table(self, y: np.ndarray) -> np.ndarray:
        """All 2**n values at a fixed y, indexed by bitmask.  Counts 2**n."""
        size = 1 << self.n
        table = np.empty(size)
        for mask in range(size):
            table[mask] = self.oracle(mask, y)
        self.counter.add(size)
        return table


def check_submodular_at(fn: SetFunctionInstance, y, cap: int = 12, tol: float = 1e-9):
    """Exhaustively test f(S)+f(T) >= f(S&T)+f(S|T) at a fixed y.

    Returns (True, None) on success, else (False, (S, T)) with the first
    violating pair in ascending bitmask order.  Quadratic in 2**n, hence the
    cap.
    """
    if fn.n > cap:
        raise EnumerationCapError(f"n={fn.n} exceeds the submodularity check cap {cap}")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    fn.check_y(y)
    table = fn.value_table(y)
    size = table.size
    all_t = np.arange(size)
    for s in range(size):
        inter = s & all_t
        union = s | all_t
        bad = table[s] + table < table[inter] + table[union] - tol
        if bad.any():
            t = int(np.argmax(bad))
            return False, (frozenset(mask_to_indices(s)), frozenset(mask_to_indices(t)))
    return True, None


def estimate_constants(
    fn: SetFunctionInstance,
    samples: int,
    seed: int = 0,
    lipschitz_x: float | None = None,
    lipschitz_y: float | None = None,
    value_bound: float | None = None,
) -> ProblemConstants:
    """Empirical fallback for the regularity constants.

    Samples extension values, chain subgradients, and difference quotients in
    y over the feasible product set.  The results are lower estimates of the
    true constants; explicitly supplied values override the corresponding
    estimates.  Never called implicitly: schedules built from silently
    estimated constants would not be reproducible claims.
    """
    from . import lovasz
    from .rng import Stream

    if samples < 1:
        raise ValueError("need at least one sample")
    stream = Stream.from_seed(seed, "estimate-constants")
    lo, hi = fn.constraint.bounds()
    span = hi - lo
    max_val = 0.0
    max_gx = 0.0
    max_qy = 0.0
    for i in range(samples):
        sub = stream.substream(i)
        x = sub.uniforms(fn.n)
        y = fn.constraint.project(lo + span * sub.uniforms(fn.m))
        val, g, _, _ = lovasz.value_and_subgradient(fn, x, y, check_domain=False)
        max_val = max(max_val, abs(val))
        max_gx = max(max_gx, float(np.linalg.norm(g)))
        y2 = fn.constraint.project(lo + span * sub.uniforms(fn.m))
        gap = float(np.linalg.norm(y2 - y))
        if gap > 1e-9:
            val2 = lovasz.lovasz_value(fn, x, y2, check_domain=False)
            max_qy = max(max_qy, abs(val2 - val) / gap)
    return ProblemConstants(
        lipschitz_x=max_gx if lipschitz_x is None else lipschitz_x,
        lipschitz_y=max_qy if lipschitz_y is None else lipschitz_y,
        value_bound=max_val if value_bound is None else value_bound,
        diameter_y=fn.constraint.diameter(),
    )

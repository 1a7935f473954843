"""Continuous extension machinery for submodular set functions.

Sorting a point of the unit cube induces a maximal nested family of level
sets; the extension value at the point is the expectation of the set
function under uniform threshold rounding, and the marginals along the
chain form a subgradient.  One evaluation point therefore costs exactly
n+1 value-oracle queries (the empty level carries weight 1 - max(x) and
cannot be skipped), and the subgradient shares those same queries.

Ties between coordinates are broken by ascending original index, so the
chain, and with it every downstream trace, is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .setfn import DomainError, SetFunctionInstance

BOX_TOL = 1e-12


@dataclass(frozen=True)
class ChainDecomposition:
    """Sorted view of a cube point.

    `perm` lists element ids by decreasing coordinate (ties by ascending
    id); level k of the chain is the first k entries of `perm`.  `weights`
    has n+1 entries: 1 - x_max for the empty level, consecutive sorted
    differences in between, and x_min for the full set.  They are
    nonnegative, sum to one, and reconstruct x as a combination of level
    indicators.
    """

    perm: np.ndarray
    sorted_values: np.ndarray
    weights: np.ndarray
    n: int

    def level_mask(self, k: int) -> int:
        mask = 0
        for e in self.perm[:k]:
            mask |= 1 << int(e)
        return mask

    def level_masks(self) -> list[int]:
        masks = [0]
        mask = 0
        for e in self.perm:
            mask |= 1 << int(e)
            masks.append(mask)
        return masks

    def reconstruct(self) -> np.ndarray:
        x = np.zeros(self.n)
        for k, w in enumerate(self.weights):
            if k:
                x[self.perm[:k]] += w
        return x


_PERM_ONE = np.zeros(1, dtype=np.intp)


def decompose(x) -> ChainDecomposition:
    """Tie-broken maximal chain of a point of [0,1]^n."""
    if not (isinstance(x, np.ndarray) and x.dtype == np.float64 and x.ndim == 1):
        x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a nonempty 1-d point")
    n = x.size
    if n == 1:
        v = x[0]
        if v < -BOX_TOL or v > 1.0 + BOX_TOL:
            raise DomainError("point leaves the unit cube")
        v = min(max(v, 0.0), 1.0)
        return ChainDecomposition(
            perm=_PERM_ONE,
            sorted_values=np.array([v]),
            weights=np.array([1.0 - v, v]),
            n=1,
        )
    lo, hi = x.min(), x.max()
    if lo < -BOX_TOL or hi > 1.0 + BOX_TOL:
        raise DomainError("point leaves the unit cube")
    if lo < 0.0 or hi > 1.0:
        x = np.clip(x, 0.0, 1.0)
    perm = np.argsort(-x, kind="stable")
    sv = x[perm]
    w = np.empty(n + 1)
    w[0] = 1.0 - sv[0]
    w[1:n] = sv[: n - 1] - sv[1:]
    w[n] = sv[n - 1]
    return ChainDecomposition(perm=perm, sorted_values=sv, weights=w, n=n)


def lovasz_value(fn: SetFunctionInstance, x, y, check_domain: bool = True) -> float:
    """Extension value at (x, y) in exactly n+1 oracle queries.

    At a vertex the weights are exactly 0/1, so the value equals the set
    value with no rounding error.
    """
    d = decompose(x)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if check_domain:
        fn.check_y(y)
    vals = fn.chain_values(d.perm, y)
    return float(np.dot(d.weights, vals))


def value_and_subgradient(fn: SetFunctionInstance, x, y, check_domain: bool = True):
    """(value, subgradient, chain, chain values) sharing one set of queries.

    The subgradient entry of element `perm[r]` is the marginal between
    consecutive chain levels r and r+1.  Costs n+1 queries total for both
    outputs; the wasteful alternative of separate calls would double that.
    """
    d = decompose(x)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if check_domain:
        fn.check_y(y)
    vals = fn.chain_values(d.perm, y)
    g = np.empty(d.n)
    g[d.perm] = vals[1:] - vals[:-1]
    return float(np.dot(d.weights, vals)), g, d, vals


def lovasz_subgradient(fn: SetFunctionInstance, x, y, check_domain: bool = True) -> np.ndarray:
    return value_and_subgradient(fn, x, y, check_domain)[1]


def expected_rounded_value(fn: SetFunctionInstance, x, y, check_domain: bool = True) -> float:
    """E over a uniform threshold of the rounded set value, integrated exactly.

    Splits [0, 1] at the distinct coordinates of x; the rounded set is
    constant on each piece.  Independent of `lovasz_value` on purpose: the
    two must agree to 1e-12 and this one serves as the test oracle.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if (x < -BOX_TOL).any() or (x > 1.0 + BOX_TOL).any():
        raise DomainError("point leaves the unit cube")
    x = np.clip(x, 0.0, 1.0)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if check_domain:
        fn.check_y(y)
    levels = np.unique(x)[::-1]
    total = 0.0
    if levels[0] < 1.0:
        total += (1.0 - levels[0]) * fn.evaluate_mask(0, y)
    for j, d in enumerate(levels):
        nxt = levels[j + 1] if j + 1 < levels.size else 0.0
        if d == nxt:
            continue
        mask = 0
        for i in np.nonzero(x >= d)[0]:
            mask |= 1 << int(i)
        total += (d - nxt) * fn.evaluate_mask(mask, y)
    return total


def round_threshold(x, tau: float) -> int:
    """Strict super-level set {i : x_i > tau} as a bitmask."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mask = 0
    for i in np.nonzero(x > tau)[0]:
        mask |= 1 << int(i)
    return mask


def extension_evaluator(fn: SetFunctionInstance):
    """Extension as a plain (x, y) -> value callable, domain checks off.

    The smoothing oracle probes y off the feasible set; built-in objectives
    are defined by their formulas on all of R^m, so no projection happens
    here.
    """

    def fnL(x, y):
        return lovasz_value(fn, x, y, check_domain=False)

    return fnL


def pinned_extension(fn: SetFunctionInstance, chain: ChainDecomposition):
    """Extension restricted to a fixed chain: y -> value, n+1 queries each."""

    def fnL_y(y):
        return float(np.dot(chain.weights, fn.chain_values(chain.perm, y)))

    return fnL_y

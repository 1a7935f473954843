"""Constraint sets: exact Euclidean projections, membership, diameters.

Four compact convex families cover everything the solver needs: axis-aligned
boxes, Euclidean balls, budget-capped unit cubes ("capped simplex": 0 <= y <= 1
with sum(y) <= budget), and Cartesian products of those.  Products project
blockwise since the squared distance separates over factors.
"""

from __future__ import annotations

import math

import numpy as np


def _as_point(p, dim: int) -> np.ndarray:
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.shape != (dim,):
        raise ValueError(f"expected point of dimension {dim}, got shape {p.shape}")
    if not np.isfinite(p).all():
        raise ValueError("point has non-finite coordinates")
    return p


class Box:
    def __init__(self, lower, upper):
        self.lower = np.atleast_1d(np.asarray(lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValueError("lower/upper must be 1-d arrays of equal length")
        if not (np.isfinite(self.lower).all() and np.isfinite(self.upper).all()):
            raise ValueError("box bounds must be finite")
        if (self.lower > self.upper).any():
            raise ValueError("box has empty coordinate range")
        self.dim = self.lower.size

    def project(self, p) -> np.ndarray:
        return np.clip(_as_point(p, self.dim), self.lower, self.upper)

    def project_raw(self, p: np.ndarray) -> np.ndarray:
        return np.clip(p, self.lower, self.upper)

    def contains(self, p, tol: float = 1e-12) -> bool:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.shape != (self.dim,):
            return False
        return bool((p >= self.lower - tol).all() and (p <= self.upper + tol).all())

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def farthest_distance(self, p) -> float:
        p = _as_point(p, self.dim)
        worst = np.maximum(np.abs(p - self.lower), np.abs(self.upper - p))
        return float(np.linalg.norm(worst))

    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def bounds(self):
        return self.lower.copy(), self.upper.copy()

    def __repr__(self):
        return f"Box(dim={self.dim})"


class Ball:
    def __init__(self, center, radius):
        self.c = np.atleast_1d(np.asarray(center, dtype=float))
        self.r = float(radius)
        if self.r <= 0:
            raise ValueError("ball radius must be positive")
        if not np.isfinite(self.c).all():
            raise ValueError("ball center must be finite")
        self.dim = self.c.size

    def project(self, p) -> np.ndarray:
        return self.project_raw(_as_point(p, self.dim))

    def project_raw(self, p: np.ndarray) -> np.ndarray:
        d = p - self.c
        norm = float(np.linalg.norm(d))
        if norm <= self.r:
            return p
        return self.c + d * (self.r / norm)

    def contains(self, p, tol: float = 1e-12) -> bool:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.shape != (self.dim,):
            return False
        return float(np.linalg.norm(p - self.c)) <= self.r + tol

    def diameter(self) -> float:
        return 2.0 * self.r

    def farthest_distance(self, p) -> float:
        p = _as_point(p, self.dim)
        return float(np.linalg.norm(p - self.c)) + self.r

    def center(self) -> np.ndarray:
        return self.c.copy()

    def bounds(self):
        return self.c - self.r, self.c + self.r

    def __repr__(self):
        return f"Ball(dim={self.dim}, r={self.r})"


class CappedSimplex:
    """{y in [0,1]^m : sum(y) <= budget}."""

    def __init__(self, m: int, budget: float):
        if m <= 0:
            raise ValueError("dimension must be positive")
        if budget < 0:
            raise ValueError("budget must be nonnegative")
        self.dim = int(m)
        self.budget = float(budget)

    def project(self, p) -> np.ndarray:
        return self.project_raw(_as_point(p, self.dim))

    def project_raw(self, p: np.ndarray) -> np.ndarray:
        y = np.clip(p, 0.0, 1.0)
        if y.sum() <= self.budget:
            return y
        # Bisect the budget multiplier; sum(clip(p - t, 0, 1)) is
        # nonincreasing in t and crosses the budget inside [0, max(p)].
        lo, hi = 0.0, float(p.max())
        for _ in range(100):
            t = 0.5 * (lo + hi)
            if np.clip(p - t, 0.0, 1.0).sum() > self.budget:
                lo = t
            else:
                hi = t
            if hi - lo <= 1e-12:
                break
        return np.clip(p - 0.5 * (lo + hi), 0.0, 1.0)

    def contains(self, p, tol: float = 1e-12) -> bool:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.shape != (self.dim,):
            return False
        box_ok = bool((p >= -tol).all() and (p <= 1.0 + tol).all())
        return box_ok and float(p.sum()) <= self.budget + tol

    def diameter(self) -> float:
        m, a = self.dim, min(self.budget, float(self.dim))
        if a >= m:
            return math.sqrt(m)
        b = int(math.floor(a))
        f = a - b
        # Two farthest vertices have b ones each plus at most one fractional
        # coordinate; overlap of the supports is forced once 2b + extras
        # exceed m.  Enumerate how many fractional coordinates are usable.
        best = 0.0
        for extras in range(0, 3):
            if b + extras > m:
                continue
            overlap = max(0, 2 * b + extras - m)
            best = max(best, 2.0 * (b - overlap) + extras * f * f)
        return math.sqrt(best)

    def farthest_distance(self, p) -> float:
        p = _as_point(p, self.dim)
        a = min(self.budget, float(self.dim))
        b = int(math.floor(a))
        f = a - b
        d2 = float(np.dot(p, p))
        # Raising a coordinate to 1 changes its contribution by 1 - 2p_i;
        # sorting ascending spends the integer budget on the best gains
        # first, then tries the fractional remainder on the next coordinate.
        order = np.argsort(p, kind="stable")
        used = 0
        pos = 0
        while used < b and pos < self.dim:
            gain = 1.0 - 2.0 * p[order[pos]]
            if gain <= 0:
                break
            d2 += gain
            used += 1
            pos += 1
        if f > 0 and pos < self.dim:
            gain = f * f - 2.0 * f * p[order[pos]]
            if gain > 0:
                d2 += gain
        return math.sqrt(max(d2, 0.0))

    def center(self) -> np.ndarray:
        return self.project(np.full(self.dim, 0.5))

    def bounds(self):
        hi = min(1.0, self.budget)
        return np.zeros(self.dim), np.full(self.dim, hi)

    def __repr__(self):
        return f"CappedSimplex(m={self.dim}, budget={self.budget})"


class Product:
    def __init__(self, parts):
        self.parts = list(parts)
        if not self.parts:
            raise ValueError("product of zero sets")
        self.dim = sum(p.dim for p in self.parts)
        self._slices = []
        start = 0
        for part in self.parts:
            self._slices.append(slice(start, start + part.dim))
            start += part.dim

    def project(self, p) -> np.ndarray:
        return self.project_raw(_as_point(p, self.dim))

    def project_raw(self, p: np.ndarray) -> np.ndarray:
        out = np.empty(self.dim)
        for part, sl in zip(self.parts, self._slices):
            out[sl] = part.project_raw(p[sl])
        return out

    def contains(self, p, tol: float = 1e-12) -> bool:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.shape != (self.dim,):
            return False
        return all(part.contains(p[sl], tol) for part, sl in zip(self.parts, self._slices))

    def diameter(self) -> float:
        return math.sqrt(sum(part.diameter() ** 2 for part in self.parts))

    def farthest_distance(self, p) -> float:
        p = _as_point(p, self.dim)
        return math.sqrt(
            sum(part.farthest_distance(p[sl]) ** 2 for part, sl in zip(self.parts, self._slices))
        )

    def center(self) -> np.ndarray:
        return np.concatenate([part.center() for part in self.parts])

    def bounds(self):
        los, his = zip(*(part.bounds() for part in self.parts))
        return np.concatenate(los), np.concatenate(his)

    def __repr__(self):
        return f"Product({self.parts!r})"


def unit_box(n: int) -> Box:
    return Box(np.zeros(n), np.ones(n))


def unit_interval() -> Box:
    return Box([0.0], [1.0])

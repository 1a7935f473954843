"""Brute-force ground truth for everything the solver claims.

Set minimization by full enumeration, inner maximization over the concave
block by analytic rule, budget greedy, or dense grid, and from those the
duality gaps (set and extension flavors), restricted gaps against known
saddles, saddle-existence reports, online gap accounting, and path lengths.

These routines are intentionally independent of the solver's fast paths;
they are the oracles the test suites trust.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import lovasz
from .geometry import Box, CappedSimplex
from .setfn import EnumerationCapError, SetFunctionInstance, mask_to_indices

BRUTE_CAP = 20
GRID_STEP_DEFAULT = 1e-3


@dataclass
class GapReport:
    """Container for gap quantities; unset fields stay None.

    `restricted_gap` is None (not approximated) when the instance has no
    registered saddle.  Online runs fill the cumulative fields; the
    `inner_method` flag records how inner maximizations were solved.
    """

    duality_gap: float | None = None
    restricted_gap: float | None = None
    dtau_gap: float | None = None
    dual_gap_steps: list = field(default_factory=list)
    dual_gap_total: float | None = None
    dual_gap_L_steps: list = field(default_factory=list)
    dual_gap_L_total: float | None = None
    rd_gap_steps: list | None = None
    rd_gap_total: float | None = None
    path_length_comparator: float | None = None
    path_length_saddles: float | None = None
    inner_method: str = ""


class NoInnerMethodError(ValueError):
    """No applicable way to maximize over the concave block."""


def brute_min_sets(fn: SetFunctionInstance, y, cap: int = BRUTE_CAP) -> tuple[int, float]:
    """Exact min over all 2**n subsets at fixed y; ties to the smallest mask."""
    if fn.n > cap:
        raise EnumerationCapError(f"n={fn.n} exceeds the enumeration cap {cap}")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    best_mask, best_val = 0, fn.evaluate_mask(0, y)
    for mask in range(1, 1 << fn.n):
        v = fn.evaluate_mask(mask, y)
        if v < best_val:
            best_mask, best_val = mask, v
    return best_mask, best_val


def _mixture_for(fn: SetFunctionInstance, S=None, x=None):
    """(masks, weights) so the inner objective is sum_k w_k f(S_k, y)."""
    if (S is None) == (x is None):
        raise ValueError("provide exactly one of S or x")
    if S is not None:
        from .setfn import as_mask

        return [as_mask(S, fn.n)], np.array([1.0])
    d = lovasz.decompose(x)
    return d.level_masks(), d.weights


def _grid_points(constraint, m: int, step: float) -> np.ndarray:
    lo, hi = constraint.bounds()
    axes = []
    for j in range(m):
        count = max(2, int(round((hi[j] - lo[j]) / step)) + 1) if hi[j] > lo[j] else 1
        axes.append(np.linspace(lo[j], hi[j], count))
    pts = np.array(list(itertools.product(*axes)))
    keep = [constraint.contains(p, 1e-9) for p in pts]
    return pts[np.asarray(keep, dtype=bool)]


def _greedy_budget_max(coef: np.ndarray, budget: float) -> np.ndarray:
    """argmax of coef . y over the capped unit cube: fill best coordinates.

    Sorts coefficients descending, sets whole units while budget allows,
    then the fractional remainder; never spends on nonpositive coefficients.
    """
    y = np.zeros(coef.size)
    remaining = budget
    for j in np.argsort(-coef, kind="stable"):
        if remaining <= 0 or coef[j] <= 0:
            break
        take = min(1.0, remaining)
        y[j] = take
        remaining -= take
    return y


def inner_max_y(
    fn: SetFunctionInstance,
    S=None,
    x=None,
    method: str = "auto",
    grid_step: float = GRID_STEP_DEFAULT,
) -> tuple[np.ndarray, float]:
    """Maximize f(S, y), or the extension at x, over the feasible y.

    Methods: "analytic" (instance-registered argmax of nonnegative
    mixtures), "greedy-budget" (affine objectives over a capped cube),
    "grid" (dense scan, small m only), or "auto" to pick the first
    applicable in that order.
    """
    masks, weights = _mixture_for(fn, S=S, x=x)

    def value_at(y: np.ndarray) -> float:
        return float(sum(w * fn.evaluate_mask(mask, y) for mask, w in zip(masks, weights)))

    if method == "auto":
        if fn.mixture_argmax_y is not None:
            method = "analytic"
        elif fn.affine_y is not None and isinstance(fn.constraint, CappedSimplex):
            method = "greedy-budget"
        elif fn.affine_y is not None and isinstance(fn.constraint, Box):
            method = "affine-box"
        elif fn.inner_max_candidates is not None:
            method = "candidates"
        elif fn.m <= 3:
            method = "grid"
        else:
            raise NoInnerMethodError(
                f"no inner maximization method applies to {fn.name or 'instance'} (m={fn.m})"
            )

    if method == "analytic":
        if fn.mixture_argmax_y is None:
            raise NoInnerMethodError("instance has no analytic inner maximizer")
        y_star = np.asarray(fn.mixture_argmax_y(masks, weights), dtype=float)
        return y_star, value_at(y_star)

    if method == "greedy-budget":
        if fn.affine_y is None or not isinstance(fn.constraint, CappedSimplex):
            raise NoInnerMethodError("greedy-budget needs an affine objective on a capped cube")
        coef = np.zeros(fn.m)
        for mask, w in zip(masks, weights):
            _, c = fn.affine_y(mask)
            coef += w * c
        y_star = _greedy_budget_max(coef, fn.constraint.budget)
        return y_star, value_at(y_star)

    if method == "affine-box":
        coef = np.zeros(fn.m)
        for mask, w in zip(masks, weights):
            _, c = fn.affine_y(mask)
            coef += w * c
        lo, hi = fn.constraint.bounds()
        mid = 0.5 * (lo + hi)
        y_star = np.where(coef > 0, hi, np.where(coef < 0, lo, mid))
        return y_star, value_at(y_star)

    if method == "candidates":
        if fn.inner_max_candidates is None:
            raise NoInnerMethodError("instance declares no inner maximizer candidates")
        best_y, best_v = None, -np.inf
        for c in fn.inner_max_candidates:
            v = value_at(np.asarray(c, dtype=float))
            if v > best_v:
                best_y, best_v = np.asarray(c, dtype=float), v
        return best_y, best_v

    if method == "grid":
        if fn.m > 3:
            raise NoInnerMethodError("grid inner maximization is limited to m <= 3")
        pts = _grid_points(fn.constraint, fn.m, grid_step)
        best_y, best_v = None, -np.inf
        for p in pts:
            v = value_at(p)
            if v > best_v:
                best_y, best_v = p, v
        return np.asarray(best_y), best_v

    raise NoInnerMethodError(f"unknown method {method!r}")


def duality_gap(fn: SetFunctionInstance, S, y, method: str = "auto",
                grid_step: float = GRID_STEP_DEFAULT) -> float:
    """max_y f(S, y) - min_T f(T, y-bar) at the queried pair."""
    _, phi_hi = inner_max_y(fn, S=S, method=method, grid_step=grid_step)
    _, phi_lo = brute_min_sets(fn, y)
    return phi_hi - phi_lo


def duality_gap_L(fn: SetFunctionInstance, x, y, method: str = "auto",
                  grid_step: float = GRID_STEP_DEFAULT) -> float:
    """Extension duality gap; the inner set minimum doubles as the cube minimum."""
    _, phi_hi = inner_max_y(fn, x=x, method=method, grid_step=grid_step)
    _, phi_lo = brute_min_sets(fn, y)
    return phi_hi - phi_lo


def dtau_gap(fn: SetFunctionInstance, y, S=None, x=None, method: str = "auto",
             grid_step: float = GRID_STEP_DEFAULT) -> float:
    """Rounded-iterate gap: expectation over thresholds equals the extension.

    Given x, the expected rounded value is the extension at x, so no
    sampling is involved; given a set, it reduces to the plain duality gap.
    """
    if (S is None) == (x is None):
        raise ValueError("provide exactly one of S or x")
    if S is not None:
        return duality_gap(fn, S, y, method=method, grid_step=grid_step)
    return duality_gap_L(fn, x, y, method=method, grid_step=grid_step)


def restricted_gap(fn: SetFunctionInstance, S, y) -> float | None:
    """f(S, y*) - f(S*, y) against the registered saddle; None without one."""
    if fn.saddle is None:
        return None
    s_star, y_star = fn.saddle
    y = np.atleast_1d(np.asarray(y, dtype=float))
    from .setfn import as_mask

    mask = as_mask(S, fn.n)
    return fn.evaluate_mask(mask, y_star) - fn.evaluate_mask(s_star, y)


def restricted_gap_L(fn: SetFunctionInstance, x, y) -> float | None:
    """Extension flavor against the registered extension saddle."""
    if fn.extension_saddle is None:
        return None
    x_star, y_star = fn.extension_saddle
    a = lovasz.lovasz_value(fn, x, y_star, check_domain=False)
    b = lovasz.lovasz_value(fn, x_star, y, check_domain=False)
    return a - b


def make_gap_oracle(fn: SetFunctionInstance, cap_n: int = 14,
                    grid_step: float = GRID_STEP_DEFAULT):
    """Per-iterate gap closure for the solver trace, or None when infeasible.

    Returns a callable (x, y, rounded_mask) -> (duality gap at the rounded
    set, restricted gap or None, extension gap).  The two duality flavors
    share one set enumeration.  Instances that declare inner-maximizer
    candidates get a precompiled closure: the candidate value tables are
    tabulated once, after which each call costs one enumeration pass.
    """
    if fn.n > cap_n:
        return None
    try:
        inner_max_y(fn, S=0, method="auto", grid_step=grid_step)
    except NoInnerMethodError:
        return None

    size = 1 << fn.n
    oracle = fn.oracle
    counter = fn.counter
    saddle = fn.saddle

    if fn.inner_max_candidates is not None:
        cand_tables = []
        for c in fn.inner_max_candidates:
            c = np.asarray(c, dtype=float)
            cand_tables.append(np.array([oracle(mask, c) for mask in range(size)]))
        counter.add(size * len(cand_tables))
        cand_tables = np.stack(cand_tables)          # (num_candidates, 2**n)
        hi_set_table = cand_tables.max(axis=0)       # exact per-mask maxima
        y_star_saddle = saddle[1] if saddle is not None else None

        def gap_fn(x, y, rounded_mask):
            vals = np.array([oracle(mask, y) for mask in range(size)])
            counter.add(size)
            phi_lo = float(vals.min())
            hi_set = float(hi_set_table[rounded_mask])
            chain = lovasz.decompose(x)
            level = np.array(chain.level_masks())
            hi_ext = float((cand_tables[:, level] @ chain.weights).max())
            r = None
            if saddle is not None:
                r = fn.evaluate_mask(rounded_mask, y_star_saddle) - fn.evaluate_mask(saddle[0], y)
            return hi_set - phi_lo, r, hi_ext - phi_lo

        return gap_fn

    def gap_fn(x, y, rounded_mask):
        _, phi_lo = brute_min_sets(fn, y)
        _, hi_set = inner_max_y(fn, S=rounded_mask, grid_step=grid_step)
        _, hi_ext = inner_max_y(fn, x=x, grid_step=grid_step)
        r = restricted_gap(fn, rounded_mask, y)
        return hi_set - phi_lo, r, hi_ext - phi_lo

    return gap_fn


def path_length(points) -> float:
    """Total movement of a sequence: sum of consecutive Euclidean distances."""
    pts = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points]
    if not pts:
        raise ValueError("path length of an empty sequence is undefined")
    total = 0.0
    for prev, cur in zip(pts, pts[1:]):
        total += float(np.linalg.norm(cur - prev))
    return total


def online_gaps(
    fns,
    xs_hat,
    ys_hat,
    sets_hat=None,
    method: str = "auto",
    grid_step: float = GRID_STEP_DEFAULT,
) -> GapReport:
    """Cumulative online gaps over a recorded trajectory.

    Per step: the extension duality gap at (x-hat, y-hat), the set-flavor
    gap at the rounded set when given, the restricted gap when every frame
    has a registered saddle, and the path lengths of the per-step inner
    argmin/argmax comparators and of the saddle sequence.
    """
    fns = list(fns)
    report = GapReport(inner_method=method)
    comparators = []
    saddle_path = []
    rd_steps = []
    have_saddles = all(f.saddle is not None for f in fns)
    for k, fn in enumerate(fns):
        x = np.atleast_1d(np.asarray(xs_hat[k], dtype=float))
        y = np.atleast_1d(np.asarray(ys_hat[k], dtype=float))
        min_mask, phi_lo = brute_min_sets(fn, y)
        y_arg, hi_ext = inner_max_y(fn, x=x, method=method, grid_step=grid_step)
        report.dual_gap_L_steps.append(hi_ext - phi_lo)
        if sets_hat is not None:
            _, hi_set = inner_max_y(fn, S=sets_hat[k], method=method, grid_step=grid_step)
            report.dual_gap_steps.append(hi_set - phi_lo)
        from .problems import charvec_float

        comparators.append(np.concatenate([charvec_float(min_mask, fn.n), y_arg]))
        if have_saddles:
            s_star, y_star = fn.saddle
            rd_steps.append(fn.evaluate_mask(
                sets_hat[k] if sets_hat is not None else lovasz.round_threshold(x, 0.5), y_star
            ) - fn.evaluate_mask(s_star, y))
            saddle_path.append(np.concatenate([charvec_float(s_star, fn.n), y_star]))
    report.dual_gap_L_total = float(np.sum(report.dual_gap_L_steps))
    if report.dual_gap_steps:
        report.dual_gap_total = float(np.sum(report.dual_gap_steps))
    if have_saddles:
        report.rd_gap_steps = rd_steps
        report.rd_gap_total = float(np.sum(rd_steps))
        report.path_length_saddles = path_length(saddle_path)
    else:
        report.rd_gap_steps = None
        report.rd_gap_total = None
    report.path_length_comparator = path_length(comparators)
    return report


@dataclass
class SaddleReport:
    max_min: float
    min_max: float
    gap: float
    saddle_exists: bool
    argmin_set: frozenset
    argmax_y: np.ndarray
    vertex_minimizer: bool | None
    grid_step: float
    x_grid_step: float | None


def brute_saddle_check(
    fn: SetFunctionInstance,
    grid_step: float = GRID_STEP_DEFAULT,
    tol: float = 1e-3,
    n_cap: int = 12,
    m_cap: int = 2,
    x_grid_step: float | None = None,
    vertex_scan: bool = True,
) -> SaddleReport:
    """Grid-certified saddle existence check.

    Tabulates f over all subsets and a dense y-grid, reports the max-min and
    min-max with the witnessing arguments, whether the two coincide within
    `tol`, and (for n <= 3) whether the grid minimizer of the worst-case
    extension value is attained at a vertex within `tol`.  The stronger
    sufficient condition (the worst-case profile being itself an extension
    of some submodular function) is not decidable from value queries and is
    deliberately not checked.
    """
    if fn.n > n_cap:
        raise EnumerationCapError(f"n={fn.n} exceeds the saddle check cap {n_cap}")
    if fn.m > m_cap:
        raise EnumerationCapError(f"m={fn.m} exceeds the saddle check cap {m_cap}")
    pts = _grid_points(fn.constraint, fn.m, grid_step)
    size = 1 << fn.n
    table = np.empty((size, len(pts)))
    for mask in range(size):
        for j, p in enumerate(pts):
            table[mask, j] = fn.evaluate_mask(mask, p)
    col_min = table.min(axis=0)
    max_min = float(col_min.max())
    argmax_y = pts[int(col_min.argmax())]
    row_max = table.max(axis=1)
    min_max = float(row_max.min())
    argmin_set = frozenset(mask_to_indices(int(row_max.argmin())))

    vertex_minimizer = None
    if vertex_scan and fn.n <= 3:
        step = x_grid_step if x_grid_step is not None else 1.0 / 16
        axes = [np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)] * fn.n
        worst_min = np.inf
        vertex_best = np.inf
        for xs in itertools.product(*axes):
            x = np.array(xs)
            d = lovasz.decompose(x)
            vals_grid = d.weights @ table[np.array(d.level_masks())]
            worst = float(vals_grid.max())
            worst_min = min(worst_min, worst)
            if np.isin(x, (0.0, 1.0)).all():
                vertex_best = min(vertex_best, worst)
        vertex_minimizer = bool(vertex_best <= worst_min + tol)

    gap = min_max - max_min
    return SaddleReport(
        max_min=max_min,
        min_max=min_max,
        gap=gap,
        saddle_exists=bool(abs(gap) <= tol),
        argmin_set=argmin_set,
        argmax_y=argmax_y,
        vertex_minimizer=vertex_minimizer,
        grid_step=grid_step,
        x_grid_step=x_grid_step,
    )


def extension_min_on_grid(fn: SetFunctionInstance, y, points_per_axis: int = 5,
                          cap: int = BRUTE_CAP) -> tuple[np.ndarray, float]:
    """Minimize the extension over a cube grid that includes all vertices.

    Tabulates the 2**n set values once, then evaluates the extension on the
    grid by sorting each point.  Used to cross-check that the continuous
    minimum never undercuts the best set.
    """
    if fn.n > cap:
        raise EnumerationCapError(f"n={fn.n} exceeds the enumeration cap {cap}")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    table = fn.value_table(y)
    axes = [np.linspace(0.0, 1.0, points_per_axis)] * fn.n
    best_x, best_v = None, np.inf
    for xs in itertools.product(*axes):
        x = np.array(xs)
        d = lovasz.decompose(x)
        v = float(d.weights @ table[np.array(d.level_masks())])
        if v < best_v:
            best_x, best_v = x, v
    return best_x, best_v


def best_rounding(fn: SetFunctionInstance, x, y) -> tuple[int, float]:
    """Cheapest chain level of x at fixed y; never worse than the extension."""
    d = lovasz.decompose(x)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    vals = fn.chain_values(d.perm, y)
    k = int(np.argmin(vals))
    return d.level_mask(k), float(vals[k])

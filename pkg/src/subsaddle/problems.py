"""Built-in problem instances and random test generators.

The two single-element toys are the workhorses of the test suite: both have
closed-form extensions, one has no pure saddle over sets while its extension
saddles at (1/2, 1/2), the other saddles at the empty set.  The random
generators produce certified submodular-concave instances with exactly
computed regularity constants, which the property suites rely on.
"""

from __future__ import annotations

import numpy as np

from .geometry import Box, unit_interval
from .setfn import ProblemConstants, SetFunctionInstance, as_mask


def _affine_box_argmax(constraint: Box):
    """argmax over a box of sum_k w_k (base_k + coef_k . y): coordinate rule.

    Zero slope picks the midpoint, which keeps the choice deterministic and
    symmetric.
    """

    def argmax(masks, weights, affine_y):
        coef = None
        for mask, w in zip(masks, weights):
            _, c = affine_y(mask)
            coef = w * c if coef is None else coef + w * c
        lo, hi = constraint.bounds()
        mid = 0.5 * (lo + hi)
        return np.where(coef > 0, hi, np.where(coef < 0, lo, mid))

    return argmax


def make_example_b1() -> SetFunctionInstance:
    """Single-element toy without a pure saddle over sets.

    f(empty, y) = 1 - y and f({0}, y) = y on y in [0, 1].  The min-max over
    sets is 1 while the max-min is 1/2; the extension 2xy - x - y + 1
    saddles at x = y = 1/2 with value 1/2.
    """
    constraint = unit_interval()

    def oracle(mask: int, y: np.ndarray) -> float:
        v = float(y[0])
        return v if mask & 1 else 1.0 - v

    def affine_y(mask: int):
        if mask & 1:
            return 0.0, np.array([1.0])
        return 1.0, np.array([-1.0])

    box_rule = _affine_box_argmax(constraint)

    def oracle_vectorized(mask: int, Y: np.ndarray) -> np.ndarray:
        v = Y[:, 0]
        return v.copy() if mask & 1 else 1.0 - v

    fn = SetFunctionInstance(
        n=1,
        m=1,
        oracle=oracle,
        constraint=constraint,
        constants=ProblemConstants(
            lipschitz_x=1.0, lipschitz_y=1.0, value_bound=1.0, diameter_y=1.0
        ),
        name="example-b1",
        affine_y=affine_y,
        mixture_argmax_y=lambda masks, weights: box_rule(masks, weights, affine_y),
        inner_max_candidates=[np.array([0.0]), np.array([1.0])],
        oracle_vectorized=oracle_vectorized,
        saddle=None,
        saddle_value=None,
        extension_saddle=(np.array([0.5]), np.array([0.5])),
    )
    return fn


def make_example_b2() -> SetFunctionInstance:
    """Single-element toy with a saddle at the empty set.

    f(empty, y) = 0.4 - (y - 0.5)^2 and f({0}, y) = 1 on y in [0, 1]; the
    saddle sits at (empty, 0.5) with value 0.4.  The extension is
    0.4 + 0.6 x + (x - 1)(y - 0.5)^2, minimized at the vertex x = 0.
    """
    constraint = unit_interval()

    def oracle(mask: int, y: np.ndarray) -> float:
        if mask & 1:
            return 1.0
        v = float(y[0])
        return 0.4 - (v - 0.5) ** 2

    def mixture_argmax(masks, weights):
        # Only the empty level depends on y, through a concave bump peaked
        # at 0.5; any nonnegative mixture is maximized there.
        return np.array([0.5])

    def oracle_vectorized(mask: int, Y: np.ndarray) -> np.ndarray:
        if mask & 1:
            return np.ones(Y.shape[0])
        return 0.4 - (Y[:, 0] - 0.5) ** 2

    fn = SetFunctionInstance(
        n=1,
        m=1,
        oracle=oracle,
        constraint=constraint,
        constants=ProblemConstants(
            lipschitz_x=0.85, lipschitz_y=1.0, value_bound=1.0, diameter_y=1.0
        ),
        name="example-b2",
        mixture_argmax_y=mixture_argmax,
        inner_max_candidates=[np.array([0.5])],
        oracle_vectorized=oracle_vectorized,
        saddle=(0, np.array([0.5])),
        saddle_value=0.4,
        extension_saddle=(np.array([0.0]), np.array([0.5])),
    )
    return fn


def make_shifted_b1(offset: float) -> SetFunctionInstance:
    """The first toy with its y-axis shifted: saddle path tracking fodder.

    f(empty, y) = 1 - (y - offset), f({0}, y) = y - offset.  The extension
    saddle moves to (1/2, 1/2 + offset), which must stay feasible.
    """
    if not -0.5 <= offset <= 0.5:
        raise ValueError("offset must keep the saddle inside [0, 1]")
    constraint = unit_interval()

    def oracle(mask: int, y: np.ndarray) -> float:
        v = float(y[0]) - offset
        return v if mask & 1 else 1.0 - v

    def affine_y(mask: int):
        if mask & 1:
            return -offset, np.array([1.0])
        return 1.0 + offset, np.array([-1.0])

    box_rule = _affine_box_argmax(constraint)

    def oracle_vectorized(mask: int, Y: np.ndarray) -> np.ndarray:
        v = Y[:, 0] - offset
        return v if mask & 1 else 1.0 - v

    return SetFunctionInstance(
        n=1,
        m=1,
        oracle=oracle,
        constraint=constraint,
        constants=ProblemConstants(
            lipschitz_x=1.0, lipschitz_y=1.0, value_bound=1.5, diameter_y=1.0
        ),
        name=f"example-b1-shifted({offset:+.4f})",
        affine_y=affine_y,
        mixture_argmax_y=lambda masks, weights: box_rule(masks, weights, affine_y),
        inner_max_candidates=[np.array([0.0]), np.array([1.0])],
        oracle_vectorized=oracle_vectorized,
        extension_saddle=(np.array([0.5]), np.array([0.5 + offset])),
    )


def table_instance(
    n: int,
    m: int,
    base,
    coef=None,
    constraint=None,
    constants: ProblemConstants | None = None,
    name: str = "table",
) -> SetFunctionInstance:
    """Instance from an explicit 2**n table, affine in y.

    f(S, y) = base[S] + coef[S] . y.  Constants are computed exactly from
    the table when not supplied.  No submodularity is implied; planted
    violations are a feature for the verification suites.
    """
    size = 1 << n
    base_arr = np.empty(size)
    if isinstance(base, dict):
        for k, v in base.items():
            base_arr[int(k)] = float(v)
    else:
        base_arr[:] = np.asarray(base, dtype=float)
    if coef is None:
        coef_arr = np.zeros((size, m))
    elif isinstance(coef, dict):
        coef_arr = np.zeros((size, m))
        for k, v in coef.items():
            coef_arr[int(k)] = np.asarray(v, dtype=float)
    else:
        coef_arr = np.asarray(coef, dtype=float).reshape(size, m)
    constraint = constraint if constraint is not None else Box(np.zeros(m), np.ones(m))

    def oracle(mask: int, y: np.ndarray) -> float:
        return float(base_arr[mask] + coef_arr[mask] @ y)

    def affine_y(mask: int):
        return float(base_arr[mask]), coef_arr[mask].copy()

    if constants is None:
        lo, hi = constraint.bounds()
        # Per-set extrema of an affine function over the bounding box.
        hi_vals = base_arr + np.where(coef_arr > 0, coef_arr * hi, coef_arr * lo).sum(axis=1)
        lo_vals = base_arr + np.where(coef_arr > 0, coef_arr * lo, coef_arr * hi).sum(axis=1)
        value_bound = float(np.max(np.abs(np.concatenate([hi_vals, lo_vals]))))
        marg = np.zeros(n)
        for i in range(n):
            bit = 1 << i
            for mask in range(size):
                if mask & bit:
                    continue
                db = abs(base_arr[mask | bit] - base_arr[mask])
                dc = np.abs(coef_arr[mask | bit] - coef_arr[mask])
                reach = float(np.maximum(np.abs(lo), np.abs(hi)) @ dc)
                marg[i] = max(marg[i], db + reach)
        constants = ProblemConstants(
            lipschitz_x=float(np.linalg.norm(marg)),
            lipschitz_y=float(np.max(np.linalg.norm(coef_arr, axis=1))),
            value_bound=value_bound,
            diameter_y=constraint.diameter(),
        )

    box_rule = _affine_box_argmax(constraint) if isinstance(constraint, Box) else None

    return SetFunctionInstance(
        n=n,
        m=m,
        oracle=oracle,
        constraint=constraint,
        constants=constants,
        name=name,
        affine_y=affine_y,
        mixture_argmax_y=(
            (lambda masks, weights: box_rule(masks, weights, affine_y)) if box_rule else None
        ),
    )


def modular_instance(weights, m: int = 1, coef_scale: float = 0.0) -> SetFunctionInstance:
    """f(S, y) = sum_{i in S} w_i + coef_scale * |S| * sum(y); always submodular."""
    w = np.asarray(weights, dtype=float)
    n = w.size
    constraint = Box(np.zeros(m), np.ones(m))

    def oracle(mask: int, y: np.ndarray) -> float:
        total = 0.0
        count = 0
        mm = mask
        i = 0
        while mm:
            if mm & 1:
                total += w[i]
                count += 1
            mm >>= 1
            i += 1
        return float(total + coef_scale * count * y.sum())

    def affine_y(mask: int):
        total = sum(w[i] for i in range(n) if (mask >> i) & 1)
        count = bin(mask).count("1")
        return float(total), np.full(m, coef_scale * count)

    box_rule = _affine_box_argmax(constraint)
    return SetFunctionInstance(
        n=n,
        m=m,
        oracle=oracle,
        constraint=constraint,
        constants=ProblemConstants(
            lipschitz_x=float(np.linalg.norm(np.abs(w) + abs(coef_scale) * m)),
            lipschitz_y=abs(coef_scale) * n * np.sqrt(m),
            value_bound=float(np.abs(w).sum() + abs(coef_scale) * n * m),
            diameter_y=constraint.diameter(),
        ),
        name="modular",
        affine_y=affine_y,
        mixture_argmax_y=lambda masks, weights_: box_rule(masks, weights_, affine_y),
    )


def random_submodular_instance(stream, n: int, m: int = 1) -> SetFunctionInstance:
    """Certified submodular-concave instance with exact constants.

    f(S, y) = g(|S|) + cut(S) + modular(S) + (sum_{i in S} b_i)(c . y)
              - q * ||y - y0||^2
    with g concave in the cardinality (sorted decreasing increments), a
    random graph cut, and y ranging over the unit box.  Each part is
    submodular for every fixed y and concave in y, so the whole is too.
    """
    inc = np.sort(stream.uniforms(n) * 2.0 - 1.0)[::-1]
    card = np.concatenate([[0.0], np.cumsum(inc)])
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if stream.uniform() < 0.4:
                edges.append((i, j, 0.1 + 0.9 * stream.uniform()))
    a = stream.uniforms(n) * 2.0 - 1.0
    b = stream.uniforms(n) * 2.0 - 1.0
    c = stream.uniforms(m) * 2.0 - 1.0
    q = stream.uniform()
    y0 = stream.uniforms(m)
    constraint = Box(np.zeros(m), np.ones(m))

    def parts(mask: int):
        members = [(mask >> i) & 1 for i in range(n)]
        k = sum(members)
        cut = sum(wt for (i, j, wt) in edges if members[i] != members[j])
        amod = sum(a[i] for i in range(n) if members[i])
        bmod = sum(b[i] for i in range(n) if members[i])
        return card[k] + cut + amod, bmod

    size = 1 << n
    base_tab = np.empty(size)
    bsum_tab = np.empty(size)
    for mask in range(size):
        base_tab[mask], bsum_tab[mask] = parts(mask)

    def oracle(mask: int, y: np.ndarray) -> float:
        d = y - y0
        return float(base_tab[mask] + bsum_tab[mask] * (c @ y) - q * (d @ d))

    # Exact per-set extrema over the box: the quadratic is separable, so each
    # coordinate maximizes a concave parabola in closed form and minimizes at
    # an endpoint.
    max_abs = 0.0
    for mask in range(size):
        hi_val = base_tab[mask]
        lo_val = base_tab[mask]
        for j in range(m):
            lin = bsum_tab[mask] * c[j]

            def val(t):
                return lin * t - q * (t - y0[j]) ** 2

            cands = [val(0.0), val(1.0)]
            if q > 0:
                t_star = y0[j] + lin / (2.0 * q)
                if 0.0 < t_star < 1.0:
                    cands.append(val(t_star))
            hi_val += max(cands)
            lo_val += min(val(0.0), val(1.0))
        max_abs = max(max_abs, abs(hi_val), abs(lo_val))

    reach = float(np.abs(c).sum())  # max |c . y| over the unit box
    marg = np.zeros(n)
    dg = np.abs(np.diff(card))
    deg = np.zeros(n)
    for i, j, wt in edges:
        deg[i] += wt
        deg[j] += wt
    for i in range(n):
        marg[i] = dg.max(initial=0.0) + deg[i] + abs(a[i]) + abs(b[i]) * reach
    lipschitz_y = float(np.abs(bsum_tab).max() * np.linalg.norm(c) + 2.0 * q * np.sqrt(m))

    def mixture_argmax(masks, weights):
        bbar = sum(w * bsum_tab[mask] for mask, w in zip(masks, weights))
        y_star = np.empty(m)
        for j in range(m):
            lin = bbar * c[j]
            if q > 0:
                y_star[j] = min(1.0, max(0.0, y0[j] + lin / (2.0 * q)))
            else:
                y_star[j] = 1.0 if lin > 0 else (0.0 if lin < 0 else 0.5)
        return y_star

    return SetFunctionInstance(
        n=n,
        m=m,
        oracle=oracle,
        constraint=constraint,
        constants=ProblemConstants(
            lipschitz_x=float(np.linalg.norm(marg)),
            lipschitz_y=lipschitz_y,
            value_bound=max_abs,
            diameter_y=constraint.diameter(),
        ),
        name="random-submodular",
        mixture_argmax_y=mixture_argmax,
    )


def separable_instance(stream, n: int, m: int = 1) -> SetFunctionInstance:
    """f(S, y) = modular(S) + concave(y): always has a saddle.

    The saddle is (set of negative-weight elements, clipped peak of the
    quadratic), registered on the instance for restricted-gap tests.
    """
    w = stream.uniforms(n) * 2.0 - 1.0
    q = 0.2 + stream.uniform()
    y0 = stream.uniforms(m)
    constraint = Box(np.zeros(m), np.ones(m))

    def oracle(mask: int, y: np.ndarray) -> float:
        d = y - y0
        tot = sum(w[i] for i in range(n) if (mask >> i) & 1)
        return float(tot - q * (d @ d))

    s_star = as_mask([i for i in range(n) if w[i] < 0], n)
    y_star = np.clip(y0, 0.0, 1.0)
    value = oracle(s_star, y_star)

    def mixture_argmax(masks, weights):
        return y_star.copy()

    marg = np.abs(w)
    return SetFunctionInstance(
        n=n,
        m=m,
        oracle=oracle,
        constraint=constraint,
        constants=ProblemConstants(
            lipschitz_x=float(np.linalg.norm(marg)),
            lipschitz_y=float(2.0 * q * np.sqrt(m)),
            value_bound=float(np.abs(w).sum() + q * m),
            diameter_y=constraint.diameter(),
        ),
        name="separable",
        mixture_argmax_y=mixture_argmax,
        saddle=(s_star, y_star),
        saddle_value=value,
        extension_saddle=(charvec_float(s_star, n), y_star),
    )


def charvec_float(mask: int, n: int) -> np.ndarray:
    x = np.zeros(n)
    for i in range(n):
        if (mask >> i) & 1:
            x[i] = 1.0
    return x

"""Projected extragradient loop driven entirely by value-oracle queries.

Each iteration assembles the joint field G(z) = [subgradient in x;
-smoothed-gradient estimate in y], takes a probe step, re-assembles the
field at the probe point, and takes the actual step, projecting onto
[0,1]^n x Y after both.  Iterations run for k = 0..horizon inclusive, so a
horizon of zero still produces the first probe iterate.

Query accounting is exact: one field assembly costs (t+1)(n+1) set-function
queries with the forward or backward scheme (t fresh extension points plus
one shared between the subgradient and the oracle's base value) and
(2t+1)(n+1) with the central scheme.  Gap-oracle queries made while
recording the trace are tallied separately.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import lovasz
from .geometry import Product, unit_box
from .rng import Stream
from .setfn import DomainError, SetFunctionInstance
from .smoothing import OracleConfig

FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class JointState:
    """Iterate z = (x, y) with x in the unit cube and y feasible."""

    x: np.ndarray
    y: np.ndarray

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


@dataclass(frozen=True)
class SolverConfig:
    """Step sizes, oracle settings, and budget for one run.

    `horizon` follows the loop convention k = 0..horizon, so horizon+1
    iterations execute.  Step sizes may be scalars or per-iteration arrays.
    """

    h1: float | np.ndarray
    h2: float | np.ndarray
    oracle: OracleConfig
    horizon: int
    record_every: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("h1", "h2"):
            h = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if (h <= 0).any():
                raise ValueError(f"{name} must be strictly positive")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")


def _step_size(h, k: int) -> float:
    if np.isscalar(h) or getattr(h, "ndim", 0) == 0:
        return float(h)
    return float(h[k])


@dataclass
class IterateRecord:
    k: int
    z: np.ndarray
    z_hat: np.ndarray
    f_hat: float
    g_hat_norm: float
    tau: float
    tau_hat: float
    rounded: int
    rounded_hat: int
    gap_D: float | None
    gap_R: float | None
    gap_Dtau: float | None
    queries: int
    gap_queries: int
    wall_ms: float


@dataclass
class Trace:
    records: list[IterateRecord]
    z_final: np.ndarray
    iterations: int
    total_queries: int
    gap_queries: int

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]


@dataclass
class SolveResult:
    trace: Trace
    best: IterateRecord
    best_index: int
    split: int = 0  # boundary between the x and y blocks of a joint vector

    @property
    def best_x(self) -> np.ndarray:
        return self.best.z_hat[: self.split]

    @property
    def best_y(self) -> np.ndarray:
        return self.best.z_hat[self.split:]


def joint_set(fn: SetFunctionInstance) -> Product:
    return Product([unit_box(fn.n), fn.constraint])


def default_start(fn: SetFunctionInstance) -> np.ndarray:
    """Cube midpoint for x, feasible center for y: minimizes the worst-case
    starting radius without assuming anything about the instance."""
    return np.concatenate([np.full(fn.n, 0.5), fn.constraint.center()])


def as_joint_vector(z0, fn: SetFunctionInstance) -> np.ndarray:
    if isinstance(z0, JointState):
        return z0.z.astype(float)
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (fn.n + fn.m,):
        raise DomainError(f"start point must have dimension {fn.n + fn.m}")
    return z0.copy()


def assemble_field(fn: SetFunctionInstance, z: np.ndarray, oracle: OracleConfig,
                   stream: Stream) -> tuple[np.ndarray, float]:
    """G(z) and the extension value at z, sharing the chain queries.

    The x-block is the chain subgradient; the y-block is the negated batch
    estimate.  With the forward and backward schemes the estimate's base
    value reuses the subgradient's chain evaluation, so one assembly costs
    (t+1)(n+1) queries; the central scheme costs (2t+1)(n+1).
    """
    n = fn.n
    x, y = z[:n], z[n:]
    value, gx, chain, _ = lovasz.value_and_subgradient(fn, x, y, check_domain=False)
    perm, weights = chain.perm, chain.weights
    chain_values = fn.chain_values
    mu, scheme, t = oracle.mu, oracle.scheme, oracle.samples
    m = y.size
    out = np.empty(n + m)
    out[:n] = gx
    acc = np.zeros(m)
    for i in range(t):
        u = stream.substream(i).normals(m)
        if scheme == "forward":
            diff = float(np.dot(weights, chain_values(perm, y + mu * u))) - value
        elif scheme == "backward":
            diff = value - float(np.dot(weights, chain_values(perm, y - mu * u)))
        else:
            diff = 0.5 * (
                float(np.dot(weights, chain_values(perm, y + mu * u)))
                - float(np.dot(weights, chain_values(perm, y - mu * u)))
            )
        acc += (diff / mu) * u
    out[n:] = acc / (-t)
    return out, value


def extragradient_step(fn, z, k, config: SolverConfig, stream: Stream, zset):
    """One probe-and-update cycle; both outputs are feasible.

    Exactly two field assemblies, each on a fresh direction substream.
    """
    h1 = _step_size(config.h1, k)
    h2 = _step_size(config.h2, k)
    g0, f0 = assemble_field(fn, z, config.oracle, stream.substream("probe"))
    z_hat = zset.project_raw(z - h1 * g0)
    g1, f1 = assemble_field(fn, z_hat, config.oracle, stream.substream("update"))
    z_next = zset.project_raw(z - h2 * g1)
    return z_hat, z_next, f0, f1, float(np.linalg.norm(g1))


def derive_hyperparameters(
    fn: SetFunctionInstance,
    epsilon: float,
    z0=None,
    samples: int = 1,
    scheme: str = "forward",
    record_every: int = 1,
    seed: int = 0,
) -> SolverConfig:
    """Schedule guaranteeing an expected average extension gap below epsilon.

    With S = L^2 + Ly^2 (m+4)^2 for L the subgradient bound and Ly the
    y-Lipschitz constant, the smoothing width is epsilon / (2 Ly sqrt(m)),
    the horizon is ceil(4 (r+1)^2 S / epsilon^2 - 1) clamped at zero for r
    the largest feasible distance from the start, and the step sizes are
    1/sqrt((horizon+1) S) and r/sqrt((horizon+1) S).  The guarantee is
    stated for single-sample batches; larger `samples` only reduces
    variance.
    """
    if not epsilon > 0:
        raise ValueError("target accuracy must be positive")
    c = fn.constants
    m = fn.m
    strength = c.subgradient_bound**2 + c.lipschitz_y**2 * (m + 4) ** 2
    if strength <= 0:
        raise ValueError("degenerate constants: nothing to optimize")
    zset = joint_set(fn)
    z0 = default_start(fn) if z0 is None else as_joint_vector(z0, fn)
    radius = zset.farthest_distance(z0)
    horizon = max(0, int(np.ceil(4.0 * (radius + 1.0) ** 2 * strength / epsilon**2 - 1.0)))
    mu = epsilon / (2.0 * c.lipschitz_y * np.sqrt(m)) if c.lipschitz_y > 0 else epsilon
    scale = 1.0 / np.sqrt((horizon + 1.0) * strength)
    return SolverConfig(
        h1=scale,
        h2=radius * scale if radius > 0 else scale,
        oracle=OracleConfig(mu=mu, samples=samples, scheme=scheme),
        horizon=horizon,
        record_every=record_every,
        seed=seed,
    )


def solve_offline(
    fn: SetFunctionInstance,
    config: SolverConfig,
    z0=None,
    gap_fn: Optional[Callable] = None,
) -> SolveResult:
    """Run the full loop and return the trace plus the best recorded iterate.

    `gap_fn(x, y, rounded_mask) -> (D, R, Dtau)` is evaluated at recorded
    iterates when supplied; its oracle usage is tallied separately from the
    solver's own budget.  The best iterate minimizes the recorded extension
    gap when gaps were computed, otherwise the recorded field norm (a
    stationarity surrogate that needs no extra queries).
    """
    n, m = fn.n, fn.m
    zset = joint_set(fn)
    z = default_start(fn) if z0 is None else as_joint_vector(z0, fn)
    if not zset.contains(z, FEASIBILITY_TOL):
        raise DomainError("start point is infeasible")
    solver_stream = Stream.from_seed(config.seed, "solver")
    tau_root = Stream.from_seed(config.seed, "tau")
    records: list[IterateRecord] = []
    gap_queries = 0
    queries_at_start = fn.counter.count
    t0 = time.perf_counter()
    for k in range(config.horizon + 1):
        z_hat, z_next, _, f_hat, g_norm = extragradient_step(
            fn, z, k, config, solver_stream.substream("iter", k), zset
        )
        if k % config.record_every == 0 or k == config.horizon:
            ts = tau_root.substream(k)
            tau, tau_hat = ts.uniform(), ts.uniform()
            rounded = lovasz.round_threshold(z[:n], tau)
            rounded_hat = lovasz.round_threshold(z_hat[:n], tau_hat)
            gD = gR = gDt = None
            if gap_fn is not None:
                before = fn.counter.count
                gD, gR, gDt = gap_fn(z_hat[:n], z_hat[n:], rounded_hat)
                gap_queries += fn.counter.count - before
            records.append(
                IterateRecord(
                    k=k,
                    z=z.copy(),
                    z_hat=z_hat,
                    f_hat=f_hat,
                    g_hat_norm=g_norm,
                    tau=tau,
                    tau_hat=tau_hat,
                    rounded=rounded,
                    rounded_hat=rounded_hat,
                    gap_D=gD,
                    gap_R=gR,
                    gap_Dtau=gDt,
                    queries=fn.counter.count - queries_at_start,
                    gap_queries=gap_queries,
                    wall_ms=(time.perf_counter() - t0) * 1e3,
                )
            )
        z = z_next
    trace = Trace(
        records=records,
        z_final=z,
        iterations=config.horizon + 1,
        total_queries=fn.counter.count - queries_at_start,
        gap_queries=gap_queries,
    )
    best_index = _select_best(records)
    return SolveResult(trace=trace, best=records[best_index], best_index=best_index, split=n)


def _select_best(records: list[IterateRecord]) -> int:
    has_gaps = any(r.gap_Dtau is not None for r in records)
    best, best_key = 0, np.inf
    for i, r in enumerate(records):
        key = r.gap_Dtau if has_gaps else r.g_hat_norm
        if key is not None and key < best_key:
            best, best_key = i, key
    return best


@dataclass
class OnlineRecord:
    k: int
    z: np.ndarray
    z_hat: np.ndarray
    f_hat: float
    g_hat_norm: float
    tau: float
    tau_hat: float
    rounded: int
    rounded_hat: int
    gap_Dtau: float | None
    queries: int
    wall_ms: float


@dataclass
class OnlineResult:
    records: list[OnlineRecord]
    z_final: np.ndarray
    cumulative_gap_L: list[float]
    comparator_points: list[np.ndarray]
    comparator_path_length: float | None
    total_queries: int
    gap_queries: int


def solve_online(
    frames,
    config: SolverConfig,
    z0=None,
    gap_fn_factory: Optional[Callable] = None,
    comparator: Optional[Callable] = None,
    steps_per_frame: int = 1,
) -> OnlineResult:
    """One (or a few) extragradient updates per incoming objective.

    `frames` yields instances sharing the same dimensions and constraint
    set; with a constant stream and `steps_per_frame=1` the iterates match
    `solve_offline` exactly (same seed, same substream layout).
    `gap_fn_factory(fn_k)` may supply a per-frame gap closure; `comparator`
    maps the frame index to a reference point whose path length is
    accumulated.
    """
    if steps_per_frame < 1:
        raise ValueError("need at least one step per frame")
    solver_stream = Stream.from_seed(config.seed, "solver")
    tau_root = Stream.from_seed(config.seed, "tau")
    records: list[OnlineRecord] = []
    cumulative = []
    running = 0.0
    comparator_points = []
    z = None
    zset = None
    total_queries = 0
    gap_queries = 0
    t0 = time.perf_counter()
    step_index = 0
    for k, fn in enumerate(frames):
        if z is None:
            zset = joint_set(fn)
            z = default_start(fn) if z0 is None else as_joint_vector(z0, fn)
            if not zset.contains(z, FEASIBILITY_TOL):
                raise DomainError("start point is infeasible")
        queries_before = fn.counter.count
        z_hat = z
        f_hat = np.nan
        g_norm = np.nan
        for _ in range(steps_per_frame):
            z_hat, z_next, _, f_hat, g_norm = extragradient_step(
                fn, z, step_index, config,
                solver_stream.substream("iter", step_index), zset,
            )
            z = z_next
            step_index += 1
        ts = tau_root.substream(k)
        tau, tau_hat = ts.uniform(), ts.uniform()
        n = fn.n
        rounded = lovasz.round_threshold(z[:n], tau)
        rounded_hat = lovasz.round_threshold(z_hat[:n], tau_hat)
        gDt = None
        if gap_fn_factory is not None:
            gfn = gap_fn_factory(fn)
            if gfn is not None:
                before = fn.counter.count
                _, _, gDt = gfn(z_hat[:n], z_hat[n:], rounded_hat)
                gap_queries += fn.counter.count - before
                running += gDt
        cumulative.append(running)
        if comparator is not None:
            comparator_points.append(np.atleast_1d(np.asarray(comparator(k), dtype=float)))
        total_queries += fn.counter.count - queries_before
        records.append(
            OnlineRecord(
                k=k,
                z=z.copy(),
                z_hat=z_hat,
                f_hat=f_hat,
                g_hat_norm=g_norm,
                tau=tau,
                tau_hat=tau_hat,
                rounded=rounded,
                rounded_hat=rounded_hat,
                gap_Dtau=gDt,
                queries=total_queries,
                wall_ms=(time.perf_counter() - t0) * 1e3,
            )
        )
    from .verify import path_length

    return OnlineResult(
        records=records,
        z_final=z,
        cumulative_gap_L=cumulative,
        comparator_points=comparator_points,
        comparator_path_length=path_length(comparator_points) if comparator_points else None,
        total_queries=total_queries,
        gap_queries=gap_queries,
    )


def queries_per_assembly(n: int, oracle: OracleConfig) -> int:
    """Documented exact cost of one field assembly."""
    if oracle.scheme == "central":
        return (2 * oracle.samples + 1) * (n + 1)
    return (oracle.samples + 1) * (n + 1)


def expected_query_total(n: int, oracle: OracleConfig, iterations: int) -> int:
    """Solver-side budget for a run: two assemblies per iteration."""
    return 2 * iterations * queries_per_assembly(n, oracle)

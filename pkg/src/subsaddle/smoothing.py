"""Two-point Gaussian gradient estimators for the concave block.

The estimator probes the extension along random directions u ~ N(0, I):
forward differences (f(y + mu*u) - f(y)) / mu * u by default, with central
and backward variants.  Averaging a batch of independent directions reduces
variance; the base value f(y) is computed once and shared across a
forward/backward batch, so a batch of t samples costs t+1 extension
evaluations rather than 2t.

For streams of slowly changing objectives there is a cross-step variant
that reuses a value of the previous objective; it saves one evaluation per
update at the price of an extra variance term 2*m*V^2/mu^2 when consecutive
objectives differ by at most V pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import Stream

SCHEMES = ("forward", "central", "backward")


@dataclass(frozen=True)
class OracleConfig:
    mu: float
    samples: int = 1
    scheme: str = "forward"
    seed: int = 0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("smoothing parameter must be strictly positive")
        if self.samples < 1:
            raise ValueError("need at least one sample per batch")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")


def gaussian_direction(stream: Stream, m: int) -> np.ndarray:
    return stream.normals(m)


def oracle_once(fnL, x, y, u, mu: float, scheme: str = "forward", base: float | None = None) -> np.ndarray:
    """Single two-point estimate of the y-gradient of the smoothed extension.

    `fnL` is an extension evaluator (x, y) -> value.  `base` lets callers
    share an already computed f(x, y) across a batch (forward/backward
    schemes only).
    """
    if not mu > 0:
        raise ValueError("smoothing parameter must be strictly positive")
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    if scheme == "forward":
        if base is None:
            base = fnL(x, y)
        diff = (fnL(x, y + mu * u) - base) / mu
    elif scheme == "central":
        diff = (fnL(x, y + mu * u) - fnL(x, y - mu * u)) / (2.0 * mu)
    elif scheme == "backward":
        if base is None:
            base = fnL(x, y)
        diff = (base - fnL(x, y - mu * u)) / mu
    else:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    return diff * u


def oracle_batch(fnL, x, y, config: OracleConfig, stream: Stream | None = None,
                 base: float | None = None) -> np.ndarray:
    """Mean of `config.samples` independent estimates, deterministic per stream.

    Directions come from per-sample substreams, so the batch can be
    evaluated in any order while the reduction stays fixed (ascending
    sample index).
    """
    y = np.asarray(y, dtype=float)
    m = y.size
    if stream is None:
        stream = Stream.from_seed(config.seed, "oracle")
    if config.scheme in ("forward", "backward") and base is None:
        base = fnL(x, y)
    acc = np.zeros(m)
    for i in range(config.samples):
        u = stream.substream(i).normals(m)
        acc += oracle_once(fnL, x, y, u, config.mu, config.scheme, base=base)
    return acc / config.samples


def online_oracle(fnL_now, fnL_next, x, y, u, mu: float, cross_step: bool = False) -> np.ndarray:
    """Per-round estimator for a stream of objectives.

    Default: plain forward difference through the current objective
    (`fnL_next` unused), which needs both evaluations to happen before the
    objective changes.  With `cross_step=True` the base value is taken from
    the altered objective instead, so only three fresh evaluations per
    change are needed; the estimate stays unbiased for the current smoothed
    gradient but picks up extra second moment 2*m*V^2/mu^2 where V bounds
    |f_now - f_next| pointwise.
    """
    if not mu > 0:
        raise ValueError("smoothing parameter must be strictly positive")
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    if not cross_step:
        return oracle_once(fnL_now, x, y, u, mu, "forward")
    return (fnL_now(x, y + mu * u) - fnL_next(x, y)) / mu * u

"""Adversarial seeded graph-cut segmentation on pixel grids.

An image becomes a 4-neighbor graph whose edge weights decay with intensity
difference and pixel distance; segmenting means choosing the pixel subset
that minimizes the cut plus a seed-consistency penalty, while an adversary
reweights the trust placed in each seed under a total budget.  The induced
set function is a cut plus a modular term, hence submodular for every fixed
trust vector.

Also here: synthetic two-region images and moving-shape frame streams for
experiments, standard overlap metrics, and binary PGM reading/writing (the
on-disk format for images and masks).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .geometry import CappedSimplex
from .rng import Stream
from .setfn import ProblemConstants, SetFunctionInstance

# Experiment defaults at the reference resolution of 50x50 pixels.  Step
# sizes scale with 1/sqrt(pixels) when the image size changes; the other
# parameters are resolution-independent.
REFERENCE_PIXELS = 2500
OFFLINE_DEFAULTS = dict(lam=5.0, h=1e-3, mu=1e-5, samples=20)
ONLINE_DEFAULTS = dict(lam=10.0, h=3e-2, mu=1e-3, samples=10, rho=25.0)
SIGMA_INTENSITY = 20.0
SIGMA_DISTANCE = 1.0
FOREGROUND_LEVEL = 200
BACKGROUND_LEVEL = 60
NOISE_LEVEL_DEFAULT = 10.0


def scaled_step(base_step: float, pixels: int, base_pixels: int = REFERENCE_PIXELS) -> float:
    """Step size rescaled to a different image size (proportional to 1/sqrt(n))."""
    return base_step * math.sqrt(base_pixels / pixels)


def edge_weight(intensity_a, intensity_b, pos_a, pos_b,
                sigma_intensity: float = SIGMA_INTENSITY,
                sigma_distance: float = SIGMA_DISTANCE) -> float:
    """Similarity weight in (0, 1]: Gaussian in intensity gap and distance."""
    if sigma_intensity <= 0 or sigma_distance <= 0:
        raise ValueError("similarity scales must be positive")
    di = float(intensity_a) - float(intensity_b)
    pa = np.asarray(pos_a, dtype=float)
    pb = np.asarray(pos_b, dtype=float)
    d2 = float(np.sum((pa - pb) ** 2))
    return math.exp(-di * di / (2.0 * sigma_intensity**2) - d2 / (2.0 * sigma_distance**2))


def grid_edges(width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """4-neighbor edge list over row-major pixel indices."""
    idx = np.arange(width * height).reshape(height, width)
    right = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])
    down = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()])
    ea = np.concatenate([right[0], down[0]])
    eb = np.concatenate([right[1], down[1]])
    return ea, eb


def make_segmentation(
    image: np.ndarray,
    seeds,
    labels,
    lam: float = OFFLINE_DEFAULTS["lam"],
    rho: float = 8.0,
    sigma_intensity: float = SIGMA_INTENSITY,
    sigma_distance: float = SIGMA_DISTANCE,
) -> SetFunctionInstance:
    """Min-max segmentation objective as a value-oracle instance.

    f(A, y) = cut(A) + lam * sum_s y_s |1_A(s) - label_s| over subsets of
    pixels and trust vectors y in the budget-capped cube.  Seeds are flat
    row-major pixel indices with binary labels (1 = foreground).

    Cut evaluation is an O(edges) scan per query; chains of nested sets are
    evaluated incrementally (one cumulative pass for all n+1 levels), and
    the per-chain cut profile is cached so a batch of probes at the same x
    pays for it once.
    """
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("image must be 2-d")
    height, width = image.shape
    n = width * height
    seeds = np.asarray(seeds, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if seeds.ndim != 1 or seeds.size == 0:
        raise ValueError("need at least one seed")
    if len(set(seeds.tolist())) != seeds.size:
        raise ValueError("seeds must be distinct")
    if (seeds < 0).any() or (seeds >= n).any():
        raise ValueError("seed index out of range")
    if not np.isin(labels, (0, 1)).all() or labels.shape != seeds.shape:
        raise ValueError("labels must be 0/1, one per seed")
    if lam <= 0:
        raise ValueError("seed penalty weight must be positive")
    if rho < 0:
        raise ValueError("adversary budget must be nonnegative")

    m = seeds.size
    ea, eb = grid_edges(width, height)
    flat = image.ravel()
    rows, cols = np.divmod(np.arange(n), width)
    di = flat[ea] - flat[eb]
    d2 = (rows[ea] - rows[eb]) ** 2 + (cols[ea] - cols[eb]) ** 2
    weights = np.exp(-di**2 / (2.0 * sigma_intensity**2) - d2 / (2.0 * sigma_distance**2))

    labels_f = labels.astype(float)
    constraint = CappedSimplex(m, rho)

    def members_of(mask: int) -> np.ndarray:
        raw = np.frombuffer(mask.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[:n].astype(bool)

    def cut_of(inside: np.ndarray) -> float:
        return float(weights[inside[ea] != inside[eb]].sum())

    def oracle(mask: int, y: np.ndarray) -> float:
        inside = members_of(mask)
        viol = np.abs(inside[seeds].astype(float) - labels_f)
        return cut_of(inside) + lam * float(y @ viol)

    # One-entry cache: a batch of probes at the same relaxation point shares
    # the chain, so the cut profile is computed once per chain.
    cache: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}

    def chain_oracle(perm: np.ndarray, y: np.ndarray) -> np.ndarray:
        key = perm.tobytes()
        hit = cache.get(key)
        if hit is None:
            ranks = np.empty(n, dtype=np.int64)
            ranks[perm] = np.arange(n)
            lo = np.minimum(ranks[ea], ranks[eb])
            hi = np.maximum(ranks[ea], ranks[eb])
            # Edge (a, b) crosses level k exactly for lo < k <= hi.
            diff = np.zeros(n + 2)
            np.add.at(diff, lo + 1, weights)
            np.add.at(diff, hi + 1, -weights)
            cuts = np.cumsum(diff)[: n + 1]
            cache.clear()
            cache[key] = hit = (cuts, ranks)
        cuts, ranks = hit
        # Seed s flips its penalty coefficient once it enters the chain.
        pen = np.zeros(n + 1)
        contrib = y * (1.0 - 2.0 * labels_f)
        np.add.at(pen, ranks[seeds] + 1, contrib)
        pen = np.cumsum(pen) + float(y @ labels_f)
        return cuts + lam * pen

    def affine_y(mask: int):
        inside = members_of(mask)
        viol = np.abs(inside[seeds].astype(float) - labels_f)
        return cut_of(inside), lam * viol

    degree = np.zeros(n)
    np.add.at(degree, ea, weights)
    np.add.at(degree, eb, weights)
    per_element = degree.copy()
    per_element[seeds] += lam
    total_weight = float(weights.sum())
    constants = ProblemConstants(
        lipschitz_x=float(np.linalg.norm(per_element)),
        lipschitz_y=lam * math.sqrt(m),
        value_bound=total_weight + lam * min(rho, float(m)),
        diameter_y=constraint.diameter(),
    )
    return SetFunctionInstance(
        n=n,
        m=m,
        oracle=oracle,
        constraint=constraint,
        constants=constants,
        name=f"segmentation-{width}x{height}",
        chain_oracle=chain_oracle,
        affine_y=affine_y,
        info=dict(
            width=width,
            height=height,
            seeds=seeds.tolist(),
            labels=labels.tolist(),
            lam=lam,
            rho=rho,
            sigma_intensity=sigma_intensity,
            sigma_distance=sigma_distance,
        ),
    )


@dataclass(frozen=True)
class ShapeSpec:
    """Foreground region: a disk or an axis-aligned-ish rotated rectangle."""

    kind: str = "disk"
    cx: float = 0.5
    cy: float = 0.5
    radius: float = 0.28          # disk radius, fraction of min(width, height)
    half_w: float = 0.25          # rect half-extents, fractions
    half_h: float = 0.18
    angle: float = 0.0            # rect rotation, radians

    def mask(self, width: int, height: int) -> np.ndarray:
        rows, cols = np.mgrid[0:height, 0:width]
        cx = self.cx * width
        cy = self.cy * height
        if self.kind == "disk":
            r = self.radius * min(width, height)
            return (rows - cy) ** 2 + (cols - cx) ** 2 <= r * r
        if self.kind == "rect":
            ca, sa = math.cos(self.angle), math.sin(self.angle)
            dx = cols - cx
            dy = rows - cy
            u = ca * dx + sa * dy
            v = -sa * dx + ca * dy
            return (np.abs(u) <= self.half_w * width) & (np.abs(v) <= self.half_h * height)
        raise ValueError(f"unknown shape kind {self.kind!r}")

    def shifted(self, dx_frac: float, dy_frac: float, dangle: float = 0.0) -> "ShapeSpec":
        return ShapeSpec(
            kind=self.kind,
            cx=self.cx + dx_frac,
            cy=self.cy + dy_frac,
            radius=self.radius,
            half_w=self.half_w,
            half_h=self.half_h,
            angle=self.angle + dangle,
        )

    def in_frame(self, width: int, height: int) -> bool:
        cx = self.cx * width
        cy = self.cy * height
        if self.kind == "disk":
            r = self.radius * min(width, height)
            return r <= cx <= width - r and r <= cy <= height - r
        reach = math.hypot(self.half_w * width, self.half_h * height)
        return reach <= cx <= width - reach and reach <= cy <= height - reach


@dataclass
class SynthImage:
    image: np.ndarray       # uint8 intensities
    truth: np.ndarray       # bool foreground mask
    seeds: np.ndarray       # flat pixel indices
    labels: np.ndarray      # 0/1 per seed


def synth_image(
    width: int,
    height: int,
    shape: ShapeSpec | None = None,
    noise: float = NOISE_LEVEL_DEFAULT,
    seeds_per_class: tuple[int, int] = (8, 8),
    seed: int = 0,
    foreground: int = FOREGROUND_LEVEL,
    background: int = BACKGROUND_LEVEL,
) -> SynthImage:
    """Noisy two-region grayscale image with seeds sampled inside each region."""
    shape = shape or ShapeSpec()
    truth = shape.mask(width, height)
    fg_pool = np.nonzero(truth.ravel())[0]
    bg_pool = np.nonzero(~truth.ravel())[0]
    n_fg, n_bg = seeds_per_class
    if n_fg > fg_pool.size or n_bg > bg_pool.size:
        raise ValueError("region too small for the requested number of seeds")
    stream = Stream.from_seed(seed, "synth-image")
    base = np.where(truth, float(foreground), float(background))
    noisy = base + noise * stream.substream("noise").normals(width * height).reshape(
        height, width
    )
    image = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)
    seed_stream = stream.substream("seeds")
    fg_seeds = seed_stream.sample_without_replacement(n_fg, fg_pool.tolist())
    bg_seeds = seed_stream.sample_without_replacement(n_bg, bg_pool.tolist())
    seeds = np.array(fg_seeds + bg_seeds, dtype=int)
    labels = np.array([1] * n_fg + [0] * n_bg, dtype=int)
    return SynthImage(image=image, truth=truth, seeds=seeds, labels=labels)


@dataclass
class SynthFrame:
    k: int
    image: np.ndarray
    truth: np.ndarray
    seeds: np.ndarray
    labels: np.ndarray


@dataclass
class FrameStream:
    """Deterministic stream of moving-shape frames at a fixed resolution."""

    width: int
    height: int
    frames: int
    base_shape: ShapeSpec
    motion: tuple[float, float, float]   # (dx, dy) pixels/frame, rotation rad/frame
    noise: float
    seeds_per_class: tuple[int, int]
    seed: int
    fps: float = 60.0

    def __post_init__(self):
        for k in (0, self.frames - 1):
            if not self.shape_at(k).in_frame(self.width, self.height):
                raise ValueError(f"shape leaves the frame at index {k}")

    def shape_at(self, k: int) -> ShapeSpec:
        dx, dy, da = self.motion
        return self.base_shape.shifted(
            k * dx / self.width, k * dy / self.height, k * da
        )

    def frame(self, k: int) -> SynthFrame:
        snap = synth_image(
            self.width,
            self.height,
            shape=self.shape_at(k),
            noise=self.noise,
            seeds_per_class=self.seeds_per_class,
            seed=Stream.from_seed(self.seed, "stream", k).next_u64(),
        )
        return SynthFrame(k=k, image=snap.image, truth=snap.truth,
                          seeds=snap.seeds, labels=snap.labels)

    def __iter__(self) -> Iterator[SynthFrame]:
        for k in range(self.frames):
            yield self.frame(k)

    def manifest(self) -> dict:
        return dict(
            width=self.width,
            height=self.height,
            frames=self.frames,
            fps=self.fps,
            noise=self.noise,
            seeds_per_class=list(self.seeds_per_class),
            motion=list(self.motion),
            seed=self.seed,
            shape=vars(self.base_shape) | {},
        )


def synth_stream(
    width: int,
    height: int,
    frames: int,
    shape: ShapeSpec | None = None,
    motion: tuple[float, float, float] = (0.0, 0.0, 0.0),
    noise: float = NOISE_LEVEL_DEFAULT,
    seeds_per_class: tuple[int, int] = (8, 8),
    seed: int = 0,
    fps: float = 60.0,
) -> FrameStream:
    return FrameStream(
        width=width,
        height=height,
        frames=frames,
        base_shape=shape or ShapeSpec(),
        motion=motion,
        noise=noise,
        seeds_per_class=seeds_per_class,
        seed=seed,
        fps=fps,
    )


@dataclass(frozen=True)
class Metrics:
    iou: float
    precision: float
    recall: float
    f1: float


def segmentation_metrics(predicted: np.ndarray, truth: np.ndarray) -> Metrics:
    """Confusion-matrix overlap scores; an empty union counts as perfect."""
    predicted = np.asarray(predicted, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if predicted.shape != truth.shape:
        raise ValueError("mask shapes differ")
    tp = float(np.logical_and(predicted, truth).sum())
    fp = float(np.logical_and(predicted, ~truth).sum())
    fn = float(np.logical_and(~predicted, truth).sum())
    union = tp + fp + fn
    iou = 1.0 if union == 0 else tp / union
    precision = 1.0 if tp + fp == 0 and fn == 0 else (tp / (tp + fp) if tp + fp else 0.0)
    recall = 1.0 if tp + fn == 0 and fp == 0 else (tp / (tp + fn) if tp + fn else 0.0)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return Metrics(iou=iou, precision=precision, recall=recall, f1=f1)


def mask_from_x(x: np.ndarray, width: int, height: int, tau: float = 0.5) -> np.ndarray:
    """Deterministic mask for metric reporting: threshold the relaxation at tau."""
    return (np.asarray(x, dtype=float) > tau).reshape(height, width)


def write_pgm(path, image: np.ndarray, comment: str | None = None) -> None:
    """Binary PGM (P5, maxval 255)."""
    image = np.asarray(image)
    if image.dtype != np.uint8:
        if image.dtype == bool:
            image = np.where(image, 255, 0).astype(np.uint8)
        else:
            image = np.clip(np.rint(image), 0, 255).astype(np.uint8)
    h, w = image.shape
    header = f"P5\n{w} {h}\n255\n"
    if comment:
        header = f"P5\n# {comment}\n{w} {h}\n255\n"
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(image.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(b"P5"):
        raise ValueError("only binary PGM (P5) is supported")
    # Header: magic, width, height, maxval; comments start with '#'.
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = tokens
    if maxval != 255:
        raise ValueError("expected maxval 255")
    pixels = np.frombuffer(data[pos : pos + w * h], dtype=np.uint8)
    if pixels.size != w * h:
        raise ValueError("truncated PGM payload")
    return pixels.reshape(h, w).copy()


def write_stream_manifest(path, stream: FrameStream, frame_files: list[str],
                          frame_seeds: Optional[list] = None,
                          truth_files: Optional[list[str]] = None) -> None:
    """Manifest for an on-disk stream: dimensions, fps, files, per-frame seeds."""
    payload = stream.manifest()
    payload["frame_files"] = frame_files
    if truth_files is not None:
        payload["truth_files"] = truth_files
    if frame_seeds is not None:
        payload["frames"] = stream.frames
        payload["frame_seeds"] = frame_seeds
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


@dataclass
class DiskFrame:
    k: int
    image: np.ndarray
    truth: Optional[np.ndarray]
    seeds: np.ndarray
    labels: np.ndarray


def read_stream_dir(directory) -> tuple[list[DiskFrame], dict]:
    """Load a numbered-PGM frame directory through its JSON manifest."""
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    frames = []
    truth_files = manifest.get("truth_files")
    for k, name in enumerate(manifest["frame_files"]):
        image = read_pgm(directory / name)
        truth = None
        if truth_files is not None:
            truth = read_pgm(directory / truth_files[k]) > 127
        entry = manifest["frame_seeds"][k]
        frames.append(
            DiskFrame(
                k=k,
                image=image,
                truth=truth,
                seeds=np.asarray(entry["seeds"], dtype=int),
                labels=np.asarray(entry["labels"], dtype=int),
            )
        )
    return frames, manifest

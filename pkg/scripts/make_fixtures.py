#!/usr/bin/env python3
"""Regenerate the committed test fixtures (run once, outputs are frozen).

Produces the 16x16 two-region image used by the desk-scale segmentation
tests and a 30-frame moving-disk stream, both fully determined by their
seeds.  If the generators ever drift, the golden tests catch it.
"""

from pathlib import Path

from subsaddle import ShapeSpec, synth_image, synth_stream, write_pgm
from subsaddle.segmentation import write_stream_manifest

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    snap = synth_image(16, 16, noise=10.0, seeds_per_class=(8, 8), seed=7)
    write_pgm(FIXTURES / "seg16_seed7.pgm", snap.image)
    write_pgm(FIXTURES / "seg16_seed7_truth.pgm", snap.truth)
    (FIXTURES / "seg16_seed7_seeds.json").write_text(
        "{\n"
        f'  "seeds": {snap.seeds.tolist()},\n'
        f'  "labels": {snap.labels.tolist()}\n'
        "}\n"
    )

    stream = synth_stream(
        16, 16, frames=30, motion=(0.15, 0.05, 0.0),
        shape=ShapeSpec(cx=0.4, cy=0.45, radius=0.22),
        noise=8.0, seeds_per_class=(6, 6), seed=11,
    )
    out = FIXTURES / "stream16"
    out.mkdir(exist_ok=True)
    files = []
    truths = []
    per_frame = []
    for frame in stream:
        name = f"frame_{frame.k:04d}.pgm"
        truth_name = f"truth_{frame.k:04d}.pgm"
        write_pgm(out / name, frame.image)
        write_pgm(out / truth_name, frame.truth)
        files.append(name)
        truths.append(truth_name)
        per_frame.append({"seeds": frame.seeds.tolist(), "labels": frame.labels.tolist()})
    write_stream_manifest(out / "manifest.json", stream, files,
                          frame_seeds=per_frame, truth_files=truths)
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Record the perspective-render throughput baseline for this machine.

Writes benchmarks/baseline.json; tests/test_benchmark.py gates future
runs at +/-20% of the recorded median.
"""

import json
import math
import statistics
import time
from pathlib import Path

import numpy as np

from panotour.geometry import Dimensions
from panotour.projection import EquirectImage, ViewParams, render_perspective

RUNS = 9
SOURCE = Dimensions(4096, 2048)
OUTPUT = Dimensions(1024, 768)


def measure() -> list[float]:
    rng = np.random.default_rng(0)
    pixels = rng.integers(0, 256, (SOURCE.height, SOURCE.width, 3), dtype=np.uint8)
    img = EquirectImage(SOURCE, pixels)
    view = ViewParams(0.7, -0.2, math.radians(90.0), OUTPUT)
    render_perspective(img, view)  # warmup
    times = []
    for _ in range(RUNS):
        t0 = time.perf_counter()
        render_perspective(img, view)
        times.append(time.perf_counter() - t0)
    return times


def main() -> None:
    times = measure()
    median = statistics.median(times)
    doc = {
        "source": f"{SOURCE.width}x{SOURCE.height}",
        "output": f"{OUTPUT.width}x{OUTPUT.height}",
        "runs": RUNS,
        "median_seconds": median,
        "megapixels_per_second": OUTPUT.width * OUTPUT.height / median / 1e6,
    }
    out = Path(__file__).resolve().parent.parent / "benchmarks" / "baseline.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"recorded {median:.4f}s median ({doc['megapixels_per_second']:.2f} MP/s) -> {out}")


if __name__ == "__main__":
    main()

"""Fronthaul quantizer behavior: cells, distortion curve, optimal steps.

Run:  python demos/demo_quantizer.py
"""

import numpy as np

from sdris.quantizer import build_quantizer, optimal_step_size, quantize


def show_layout():
    print("=== 4-level quantizer, unit step ===")
    q = build_quantizer(4, 1.0)
    print(f"  labels     {q.labels.tolist()}")
    print(f"  thresholds {q.thresholds.tolist()}  (half-open cells)")
    for x in (0.3 - 1.2j, 1.0 + 0.0j, -0.5 + 0.49j):
        print(f"  Q({x}) = {quantize(x, q)}")


def optimal_steps():
    print("\n=== Distortion-optimal steps for a unit Gaussian ===")
    for levels in (2, 4, 8, 16):
        step = optimal_step_size(levels, 1.0)
        print(f"  L={levels:3d}: step {step:.4f}, outer label {step * (levels - 1) / 2:.3f}")


def empirical_distortion():
    print("\n=== Monte-Carlo distortion at the optimum vs perturbed steps ===")
    rng = np.random.default_rng(0)
    x = rng.standard_normal(200_000)
    levels = 4
    opt = optimal_step_size(levels, 1.0)
    for scale in (0.8, 0.95, 1.0, 1.05, 1.25):
        q = build_quantizer(levels, scale * opt)
        labels = q.labels[np.searchsorted(q.thresholds, x, side="right")]
        mse = np.mean((x - labels) ** 2)
        marker = "  <- optimal" if scale == 1.0 else ""
        print(f"  step {scale * opt:.4f} ({scale:4.2f}x): E[(X-Q(X))^2] = {mse:.5f}{marker}")


if __name__ == "__main__":
    show_layout()
    optimal_steps()
    empirical_distortion()

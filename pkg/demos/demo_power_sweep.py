"""Mini Monte-Carlo power sweep through the experiment harness.

Equivalent to `sdris sweep --config configs/desk.yaml` at reduced trial
count, printing the per-method mean sum rates instead of writing CSV.

Run:  python demos/demo_power_sweep.py
"""

import numpy as np

from sdris.experiments import config_from_dict, run_power_sweep

CONFIG = {
    "scene": {"bs_antennas": 4, "ris_horizontal": 4, "ris_vertical": 4, "users": 2},
    "engine": {"eta": 2},
    "quantizer": {"levels": 4},
    "codebook": {"mode": "discrete", "bits": 2},
    "sweep": {
        "powers_dbm": [10.0, 20.0, 30.0],
        "trials": 10,
        "methods": ["sesd", "coordinate_descent", "nearest_point"],
        "seed": 3,
    },
}


def main():
    cfg = config_from_dict(CONFIG)
    rows = run_power_sweep(cfg, log=print)
    print(f"\nmean sum rate over {cfg.trials} paired trials (b=2 RIS, L=4 fronthaul):")
    print(f"{'p [dBm]':>8s} " + " ".join(f"{m:>19s}" for m in cfg.methods))
    for p in cfg.powers_dbm:
        means = []
        for m in cfg.methods:
            rates = [r.sum_rate for r in rows if r.method == m and r.p_dbm == p]
            means.append(np.mean(rates))
        print(f"{p:8.0f} " + " ".join(f"{v:19.3f}" for v in means))
    floor = sum(r.power_floor for r in rows)
    print(f"\nall {len(rows)} rows feasible; power-floor flags: {floor}")


if __name__ == "__main__":
    main()

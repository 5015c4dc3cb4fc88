#!/usr/bin/env python3
"""Writes data/unifap_synthetic.json, a synthetic 64-bus campus microgrid.

Unit and PEV parameters are those of the published campus study. The
network, demand and availability profiles are synthetic and shaped so that
the three study cases separate.
"""
import json
import random
import sys
from pathlib import Path

T = 24
rng = random.Random(20240607)

# Total campus demand, MW, hours 1..24.
TOTAL_DEMAND = [
    0.90, 0.86, 0.84, 0.82, 0.84, 0.90, 1.00, 1.15, 1.30, 1.40, 1.45, 1.40,
    1.40, 1.50, 1.55, 1.55, 1.50, 1.55, 1.60, 1.90, 1.60, 1.45, 1.20, 1.00,
]
# Solar availability, equal to 1 only in period 14.
AVAILABILITY = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.05, 0.15, 0.30, 0.50, 0.70, 0.85,
    0.95, 1.00, 0.90, 0.70, 0.45, 0.20, 0.05, 0.0, 0.0, 0.0, 0.0, 0.0,
]


def r(x, d=6):
    return round(x, d)


def main(out):
    buses = [{"id": f"b{i}", "is_slack": i == 1} for i in range(1, 65)]
    lines = []
    for i in range(2, 65):
        lines.append({
            "id": f"l{i - 1}",
            "from_bus": f"b{i // 2}",
            "to_bus": f"b{i}",
            "reactance": r(0.01 + 0.002 * (i % 7), 4),
            "capacity": [2.5] * T,
        })

    weights = [rng.uniform(0.5, 1.5) for _ in range(32)]
    total_w = sum(weights)
    consumers = []
    for j, w in enumerate(weights):
        share = w / total_w
        consumers.append({
            "id": f"d{j + 1}",
            "bus": f"b{33 + j}",
            "demand": [r(share * d) for d in TOTAL_DEMAND],
        })
    # Make the per-period sums match the profile exactly.
    for t in range(T):
        drift = r(TOTAL_DEMAND[t] - sum(c["demand"][t] for c in consumers))
        consumers[0]["demand"][t] = r(consumers[0]["demand"][t] + drift)

    conventional = []
    for g, bus in zip(range(1, 4), ["b1", "b8", "b20"]):
        conventional.append({
            "id": f"G{g}", "bus": bus, "cost": 505.0,
            "p_max": 0.60, "p_min": 0.12, "p0": 0.30, "u0": True,
            "su_cost": 909.0, "sd_cost": 9.09,
            "ramp_up": 0.15, "ramp_down": 0.15,
            "min_up": 2, "min_down": 2,
            "init_must_run": 0, "init_must_stop": 0,
            "droop": 2.0,
        })
    renewable = [
        {"id": "G4", "bus": "b12", "cost": 0.0, "p_max": 0.554, "availability": AVAILABILITY},
        {"id": "G5", "bus": "b30", "cost": 0.0, "p_max": 0.720, "availability": AVAILABILITY},
    ]

    charge_points = ["b40", "b45", "b50", "b55", "b60", "b64"]
    groups = [
        # id, e_max, per-vehicle MW, vehicles per point, window, e0, ef
        ("V1", 0.052, 0.0066, 4, (8, 19), 0.020, 0.040),
        ("V2", 0.066, 0.0077, 5, (14, 23), 0.030, 0.045),
        ("V3", 0.324, 0.0500, 1, (17, 24), 0.150, 0.200),
    ]
    pev_groups = []
    for gid, e_max, p_max, count, (ws, we), e0, ef in groups:
        pev_groups.append({
            "id": gid,
            "vehicles": {b: count for b in charge_points},
            "e_max": e_max, "e_min": r(e_max / 10, 5),
            "e_initial": e0, "e_final": ef,
            "p_max": p_max, "efficiency": 0.9,
            "window_start": ws, "window_end": we,
            "droop": 10.0,
            "capacity_offer": 50.0, "deployment_offer": 300.0,
        })

    contingencies = [{"id": f"k{g}", "outaged_units": [f"G{g}"]} for g in range(1, 6)]

    instance = {
        "format_version": "1.0",
        "system": {
            "currency": "BRL",
            "c_unserved": 10000.0,
            "c_spill": 10.0,
            "c_freq": 1.0,
            "delta_f_max": 1.0,
            "d_pr": 0.25,
            "n_periods": T,
            "period_length": 1.0,
        },
        "buses": buses,
        "lines": lines,
        "conventional_units": conventional,
        "renewable_units": renewable,
        "consumers": consumers,
        "pev_groups": pev_groups,
        "contingencies": contingencies,
    }
    Path(out).write_text(json.dumps(instance, indent=2) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/unifap_synthetic.json")

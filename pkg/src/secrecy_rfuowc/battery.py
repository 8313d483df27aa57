"""Seeded test battery of scenarios and the invented mEGG test vectors.

The vectors labelled ``test-vector-*`` are made-up but valid parameter sets,
not measured water-condition values.  ``battery.json`` in the package data is
the frozen output of :func:`generate_battery` and is what the checks load.
"""
from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .params import MeggParams, RfLinkParams, SystemConfig, db_to_linear

TEST_VECTORS: dict[str, dict[str, float]] = {
    "test-vector-A": {"omega": 0.21, "lam": 0.33, "a": 1.43, "b": 1.98, "c": 0.47},
    "test-vector-B": {"omega": 0.5, "lam": 0.3, "a": 1.5, "b": 1.2, "c": 0.9},
    "test-vector-C": {"omega": 0.35, "lam": 0.8, "a": 2.0, "b": 0.9, "c": 1.0},
    "test-vector-D": {"omega": 0.7, "lam": 0.6, "a": 0.8, "b": 1.6, "c": 1.3},
}

BATTERY_SEED = 20240611
BATTERY_SIZE = 20
# the finite eta-mu sums lose ~log10 of their condition number in digits;
# N*mu <= 6 keeps every term-wise assembly far above its rounding floor
MAX_ORDER = 6
# every fourth entry is drawn so that the ascending eavesdropper series applies
SERIES2_EVERY = 4


def megg_from_vector(label: str, detection="HD", avg_snr_d: float = 1.0) -> MeggParams:
    return MeggParams(detection=detection, avg_snr_d=avg_snr_d, label=label, **TEST_VECTORS[label])


def _draw_link(g: np.random.Generator, snr_db_range):
    while True:
        mu = int(g.integers(1, 4))
        n = int(g.integers(1, 4))
        if mu * n <= MAX_ORDER:
            break
    eta = round(float(g.uniform(1.5, 3.0)), 3)
    snr_db = round(float(g.uniform(*snr_db_range)), 2)
    return {"eta": eta, "mu": mu, "n_antennas": n, "avg_snr_db": snr_db}


def generate_battery(seed: int = BATTERY_SEED, size: int = BATTERY_SIZE) -> list[dict]:
    """Battery records as plain dicts (SNRs in dB)."""
    g = np.random.default_rng(seed)
    labels = sorted(TEST_VECTORS)
    out = []
    for k in range(size):
        sr = _draw_link(g, (0.0, 12.0))
        if k % SERIES2_EVERY == 0:
            se = _draw_link(g, (8.0, 14.0))
            se["mu"], se["n_antennas"] = 1, 1
        else:
            se = _draw_link(g, (-5.0, 10.0))
        rec = {
            "name": f"battery-{k:02d}",
            "sr": sr,
            "se": se,
            "rd": {
                "preset": labels[k % 4],
                "detection": "HD" if (k // 4) % 2 == 0 else "IMDD",
                "avg_snr_db": round(float(g.uniform(8.0, 25.0)), 2),
            },
            "n_s": int(g.integers(1, 4)),
            "target_rate_bits": round(float(g.uniform(0.0, 0.5)), 3),
        }
        out.append(rec)
    return out


def record_to_config(rec: dict) -> SystemConfig:
    def link(d):
        return RfLinkParams(d["eta"], d["mu"], d["n_antennas"], db_to_linear(d["avg_snr_db"]))

    rd = rec["rd"]
    megg = megg_from_vector(rd["preset"], rd["detection"], db_to_linear(rd["avg_snr_db"]))
    return SystemConfig(link(rec["sr"]), link(rec["se"]), megg, rec["n_s"], rec["target_rate_bits"])


def load_battery_records() -> list[dict]:
    text = resources.files("secrecy_rfuowc").joinpath("data/battery.json").read_text()
    return json.loads(text)["configs"]


def load_battery() -> list[SystemConfig]:
    return [record_to_config(r) for r in load_battery_records()]


def battery_json(seed: int = BATTERY_SEED) -> str:
    payload = {"seed": seed, "test_vectors": TEST_VECTORS, "configs": generate_battery(seed)}
    return json.dumps(payload, indent=2) + "\n"

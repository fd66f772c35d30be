"""Regenerate src/fixdeg/data/profile_suite.json (deterministic)."""

import json
from pathlib import Path

import numpy as np


def power_tail(n, low=4, frac_low=0.7, expo=3.0):
    top = max(8, round(n ** 0.5))
    w = {d: d ** -expo for d in range(low + 1, top + 1)}
    rest = n - round(frac_low * n)
    tot = sum(w.values())
    counts = {d: int(rest * x / tot) for d, x in w.items()}
    counts[top] = max(counts[top], 1)
    counts[low] = n - sum(counts.values())
    return even(counts, low)


def staircase(n, low=4, frac_low=0.7):
    """One vertex at each degree above the low class."""
    a = round(frac_low * n)
    counts = {low: a}
    for i in range(n - a):
        counts[low + 1 + i] = 1
    return even(counts, low)


def even(counts, low):
    if sum(d * c for d, c in counts.items()) % 2:
        counts[low] -= 1
        counts[low + 1] = counts.get(low + 1, 0) + 1
    return {d: c for d, c in counts.items() if c}


def random_profile(rng):
    delta = int(rng.integers(2, 7))
    n = int(rng.integers(50, 400))
    support = sorted({delta, *rng.integers(delta + 1, delta + 25, size=int(rng.integers(1, 6))).tolist()})
    w = rng.dirichlet(np.ones(len(support)))
    counts = {d: int(round(x * n)) for d, x in zip(support, w)}
    counts[delta] = max(counts[delta], 1)
    return even(counts, delta)


def main():
    entries = []

    def add(name, kind, counts, eps, alpha=None):
        entries.append({"name": name, "kind": kind, "eps": eps, "alpha": alpha,
                        "counts": {str(d): c for d, c in sorted(counts.items())}})

    add("two_point_4_7", "admissible", {4: 50, 7: 50}, 1.5, 0.15)
    add("three_point_4_6_10", "admissible", {4: 60, 6: 30, 10: 10}, 0.5)
    add("cubic_plus_5", "admissible", {3: 80, 5: 20}, 0.3)
    add("mixed_5_6_9", "admissible", {5: 40, 6: 30, 9: 30}, 1.0)
    add("few_hubs", "admissible", {4: 90, 40: 10}, 1.0)
    add("low_delta_2", "admissible", {2: 50, 3: 30, 8: 20}, 1.0)
    add("roundtrip_4_8", "admissible", {4: 120, 8: 80}, 0.5)
    add("half_4_7_n160", "admissible", {4: 80, 7: 80}, 1.0)
    add("light_spread", "admissible", {4: 500, **{d: 12 for d in range(5, 41)}}, 1.0)
    # every d p_d below alpha n, so the bracketing pair is used
    add("bracket_spread_4", "admissible", {4: 500, **{d: 1 for d in range(5, 61)}}, 2.0, 0.24)
    add("bracket_spread_3", "admissible", {3: 300, **{d: 1 for d in range(4, 51)}}, 2.0, 0.24)
    rng = np.random.default_rng(20241015)
    while sum(e["name"].startswith("random_") for e in entries) < 40:
        counts = random_profile(rng)
        n = sum(counts.values())
        delta = min(counts)
        avg = sum(d * c for d, c in counts.items()) / n
        eps = round(float(rng.uniform(0.2, 1.0)) * (avg - delta), 3)
        if eps <= 0.05:
            continue
        add(f"random_{len(entries):02d}", "admissible", counts, eps)
    for expo in (2.5, 3.0):
        for n in (1000, 2000, 5000):
            for eps in (0.5, 1.0):
                add(f"power_tail_{expo}_{n}_{eps}", "unbounded", power_tail(n, expo=expo), eps)
    for n in (100, 200, 400, 800):
        for eps in (1.0, 2.0):
            add(f"staircase_{n}_{eps}", "unbounded", staircase(n), eps)
    out = Path(__file__).resolve().parents[1] / "src" / "fixdeg" / "data" / "profile_suite.json"
    out.write_text(json.dumps({"profiles": entries}, indent=1) + "\n")
    print(out, len(entries))


if __name__ == "__main__":
    main()

"""Freezes reference values for the statistics fixtures.

Run offline; the output is committed as tests/fixtures/eval/reference_stats.json.
"""
import json
import sys

import numpy as np
from scipy import stats


def datasets():
    rng = np.random.default_rng(20240611)
    out = {
        "progression_20": [float(1 + 0.5 * i) for i in range(20)],
        "skewed_10": [1, 1, 1, 2, 2, 3, 5, 9, 20, 55],
        "normal_5": [round(float(v), 4) for v in rng.normal(70, 8, 5)],
        "normal_10": [round(float(v), 4) for v in rng.normal(70, 8, 10)],
        "normal_20": [round(float(v), 4) for v in rng.normal(70, 8, 20)],
        "normal_50": [round(float(v), 4) for v in rng.normal(70, 8, 50)],
        "exponential_20": [round(float(v), 4) for v in rng.exponential(3.0, 20)],
        "lognormal_50": [round(float(v), 4) for v in rng.lognormal(0.0, 1.0, 50)],
        "uniform_10": [round(float(v), 4) for v in rng.uniform(0, 1, 10)],
        "bimodal_50": [round(float(v), 4) for v in np.concatenate([rng.normal(0, 1, 25), rng.normal(6, 1, 25)])],
        "small_3": [1.0, 2.0, 4.0],
        "small_4": [2.0, 3.0, 3.5, 9.0],
    }
    return out


def main():
    sw = []
    for name, xs in datasets().items():
        r = stats.shapiro(xs)
        sw.append({"name": name, "sample": xs, "W": float(r.statistic), "p": float(r.pvalue)})
    mw = []
    cases = [
        ("tied_scores", [3, 4, 4, 5, 6, 6, 6, 7, 8, 9], [1, 2, 2, 3, 3, 4, 5, 5, 6, 7]),
        ("large_distinct", [float(i) + 0.5 for i in range(0, 24, 2)], [float(i) for i in range(1, 20, 2)]),
        ("grades", [0.9, 0.8, 0.8, 0.7, 1.0, 0.6, 0.9, 0.9], [0.5, 0.6, 0.7, 0.7, 0.4, 0.8, 0.6, 0.5, 0.3]),
    ]
    for name, a, b in cases:
        for alt in ("two-sided", "greater", "less"):
            r = stats.mannwhitneyu(a, b, alternative=alt, method="asymptotic", use_continuity=True)
            mw.append({"name": name, "a": a, "b": b, "alternative": alt.replace("-", "_"),
                       "U": float(r.statistic), "p": float(r.pvalue)})
    json.dump({"shapiro_wilk": sw, "mann_whitney_normal": mw}, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()

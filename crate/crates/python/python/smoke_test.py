"""Smoke test for the pybisym extension.

Build and run from the repository root:

    cargo build -p bisym-python --release --features extension-module
    cp target/release/libpybisym.so crates/python/python/pybisym.so
    python3 crates/python/python/smoke_test.py
"""

import math
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))

import pybisym  # noqa: E402


def check(name, cond):
    print(f"{'ok' if cond else 'FAIL'}: {name}")
    return cond


def main():
    results = []

    b = pybisym.bounds("alpha", 1, "1")
    results.append(check("bounds at alpha=1", math.isclose(b["a_m1"], math.sqrt(2)) and b["a_2m1_exact"] == "5"))
    b = pybisym.bounds("beta", 2, 0.5, lam="1/2")
    results.append(check("beta bounds are positive", b["a_m1"] > 0 and b["a_2m1"] > 0))

    inv = pybisym.invert(1, ["1", "1", "1"])
    results.append(check("invert geometric tail", inv["closed_form"] == ["-1", "1", "-1"] and inv["agree"]))

    g = pybisym.revert([0, 1, 0.5, 0.25])
    results.append(check("float reversion", abs(g[2] + 0.5) < 1e-12 and abs(g[3] - 0.25) < 1e-12))

    ok = pybisym.membership("geometric", "beta", "2/5", angles=180)
    bad = pybisym.membership("geometric", "beta", "3/5", angles=180)
    results.append(check("membership verdicts", ok["verdict"] == "pass" and bad["verdict"] == "fail"))

    # single atom at 1 and its reflection: p_m = 2, p_2m = 2, q_m = -2, q_2m = 2
    s = pybisym.solve("beta", "1/2", 2, 2, -2, 2)
    results.append(check("solve single atom", abs(s["a_m1"] - 1) < 1e-12 and s["within_bounds"]))

    r = pybisym.search("alpha", 1, m=1, samples=500, seed=3)
    results.append(check("search stays within bounds", r["ratio_a_m1"] <= 1 + 1e-10))

    c = pybisym.climb("alpha", "1/2", m=2, iterations=100, seed=1)
    results.append(check("climb reaches the ceiling", c["ratio_to_ceiling"] <= 1 + 1e-10))

    suites = pybisym.selftest(quick=True)
    results.append(check("quick selftest", all(s["passed"] for s in suites)))

    results.append(check("cli usage error", pybisym.run_cli(["bounds", "--alpha", "0"]) == 2))

    try:
        pybisym.bounds("gamma", 1, 1)
        results.append(check("unknown kind raises", False))
    except ValueError:
        results.append(check("unknown kind raises", True))

    if not all(results):
        sys.exit(1)
    print("all smoke checks passed")


if __name__ == "__main__":
    main()

"""Smoke test for the qaco_py extension.

Build and run from the repo root:

    cargo build --release -p qaco-py --features extension-module
    cp target/release/libqaco_py.so python/qaco_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

import qaco_py

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
ULYSSES16 = os.path.join(ROOT, "data", "tsplib", "ulysses16.tsp")


def check(cond, what):
    if not cond:
        print(f"FAIL {what}")
        sys.exit(1)
    print(f"ok   {what}")


def main():
    inst = qaco_py.Instance.from_file(ULYSSES16)
    check(len(inst) == 16 and inst.edge_weight_type == "GEO", "load ulysses16")
    check(qaco_py.Instance.parse(inst.to_tsplib()).coords == inst.coords, "tsplib round trip")

    rnd = qaco_py.Instance.random(24, seed=3, bound=100.0)
    check(rnd.dimension == 24, "random instance")

    square = qaco_py.Instance("square", [(0, 0), (0, 1), (1, 1), (1, 0)])
    check(square.tour_length([0, 2, 1, 3], metric="paper") > square.tour_length([0, 1, 2, 3], metric="paper"),
          "crossing tour is longer")

    r = qaco_py.aco_solve(rnd, seed=1, iterations=200)
    check(qaco_py.validate_tour(r["tour"], 24), "aco tour valid")
    check(math.isclose(rnd.tour_length(r["tour"]), r["length"]), "aco length matches")

    r = qaco_py.qaco_solve(square, [0, 1, 2, 3], seed=2, metric="paper")
    check(math.isclose(r["length"], 4.0), "qaco solves the unit square")

    r = qaco_py.qaco_solve(square, [0, 1, 2, 3], seed=2, noise="bitflip", rate=0.05, metric="paper")
    check(sorted(r["tour"]) == [0, 1, 2, 3], "noisy qaco tour valid")

    for leaf in ("qaco", "aco", "brute_force"):
        r = qaco_py.solve_hybrid(inst, seed=0, leaf_solver=leaf)
        check(qaco_py.validate_tour(r["tour"], 16) and r["length"] >= 6859, f"hybrid with {leaf} leaves")

    km = qaco_py.kmeans([(0, 0), (0, 1), (10, 10), (10, 11)], 2, seed=0)
    check(km["labels"][0] == km["labels"][1] != km["labels"][2] == km["labels"][3], "kmeans splits two blobs")

    layers = [
        {"gates": [("ry", 1, 0.01), ("cz", 3, 0.03)], "m": 4},
        {"gates": [("measure", 5, 0.002)]},
    ]
    s = qaco_py.estimate_circuit_error(layers)["s"]
    check(abs(s - 0.10531291298839014) < 1e-12, "circuit error estimate")

    try:
        qaco_py.solve_hybrid(inst, leaf_solver="tabu")
    except ValueError:
        check(True, "bad leaf solver raises ValueError")
    else:
        check(False, "bad leaf solver raises ValueError")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Writes small diagram fixture pairs and their brute-force distances.

Run once; the CSVs and expected.json are committed next to each other.
"""
import itertools
import json
import math
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "distance"


def linf(a, b):
    if math.isinf(a[1]) or math.isinf(b[1]):
        if math.isinf(a[1]) != math.isinf(b[1]):
            return math.inf
        return abs(a[0] - b[0])
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def diag(a):
    return math.inf if math.isinf(a[1]) else (a[1] - a[0]) / 2


def brute(A, B, p):
    best_b, best_w = math.inf, math.inf
    for k in range(min(len(A), len(B)) + 1):
        for ia in itertools.combinations(range(len(A)), k):
            for ib in itertools.permutations(range(len(B)), k):
                costs = [linf(A[i], B[j]) for i, j in zip(ia, ib)]
                costs += [diag(A[i]) for i in range(len(A)) if i not in ia]
                costs += [diag(B[j]) for j in range(len(B)) if j not in ib]
                if not costs:
                    costs = [0.0]
                best_b = min(best_b, max(costs))
                best_w = min(best_w, sum(c ** p for c in costs) ** (1 / p))
    return best_b, best_w


def write(path, pts):
    with open(path, "w") as f:
        f.write("dim,birth,death\n")
        for d, b, e in sorted(pts):
            f.write(f"{d},{b!r},{'inf' if math.isinf(e) else repr(e)}\n")


def main():
    rng = random.Random(20240601)
    cases = []
    for i in range(6):
        A, B = [], []
        for dim in (0, 1):
            ess = 1 if dim == 0 else 0
            for D in (A, B):
                for _ in range(ess):
                    D.append((dim, round(rng.uniform(0, 0.5), 3), math.inf))
                for _ in range(rng.randint(0, 4)):
                    b = round(rng.uniform(0, 2), 3)
                    D.append((dim, b, round(b + rng.uniform(0.05, 1.5), 3)))
        name = f"pair{i + 1}"
        write(OUT / f"{name}_a.csv", A)
        write(OUT / f"{name}_b.csv", B)
        entry = {"a": f"{name}_a.csv", "b": f"{name}_b.csv", "dims": {}}
        for dim in (0, 1, 2):
            a = [(b, e) for d, b, e in A if d == dim]
            b_ = [(b, e) for d, b, e in B if d == dim]
            db, w1 = brute(a, b_, 1)
            _, w2 = brute(a, b_, 2)
            entry["dims"][str(dim)] = {"bottleneck": db, "w1": w1, "w2": w2}
        cases.append(entry)
    with open(OUT / "expected.json", "w") as f:
        json.dump({"cases": cases}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()

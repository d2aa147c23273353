#!/usr/bin/env python3
# Copyright 2026 The rapls Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the small example datasets shipped in this directory.

Twenty subjects, curves on 30 points of [0, 1], one scalar covariate.
toy_table.txt has a Gaussian outcome, toy_counts.txt a Poisson one.
"""

import math
import pathlib
import random

N, G, TERMS = 20, 30, 8
HERE = pathlib.Path(__file__).resolve().parent


def poisson(rng, mean):
    # Knuth's product method; means here are small.
    limit, k, prod = math.exp(-mean), 0, rng.random()
    while prod > limit:
        k += 1
        prod *= rng.random()
    return k


def main():
    rng = random.Random(20240611)
    t = [j / (G - 1) for j in range(G)]
    w = [(0.5 if j in (0, G - 1) else 1.0) / (G - 1) for j in range(G)]
    b = [math.sin(2 * math.pi * s) + 0.5 * s for s in t]
    curves, table, counts = [], [], []
    for _ in range(N):
        xi = [rng.gauss(0, 1) / math.sqrt(k) for k in range(1, TERMS + 1)]
        x = [sum(c * math.sqrt(2) * math.cos((k + 1) * math.pi * s) for k, c in enumerate(xi)) for s in t]
        z = rng.gauss(0, 1)
        lin = sum(wj * xj * bj for wj, xj, bj in zip(w, x, b))
        curves.append(x)
        table.append((0.3 + lin + z + 0.5 * rng.gauss(0, 1), z))
        counts.append((poisson(rng, math.exp(0.5 + 0.5 * lin + 0.3 * z)), z))
    fmt = lambda v: repr(float(v))
    with open(HERE / "toy_curves.txt", "w") as f:
        f.write(f"grid: 0 1 {G}\n")
        for x in curves:
            f.write(" ".join(fmt(v) for v in x) + "\n")
    with open(HERE / "toy_table.txt", "w") as f:
        f.write("y z1\n")
        for y, z in table:
            f.write(f"{fmt(y)} {fmt(z)}\n")
    with open(HERE / "toy_counts.txt", "w") as f:
        f.write("y z1\n")
        for y, z in counts:
            f.write(f"{y} {fmt(z)}\n")


if __name__ == "__main__":
    main()

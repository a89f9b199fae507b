# Copyright 2026 The ScaleCom Simulator Authors. All Rights Reserved.
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
# =============================================================================

"""Independent oracles for frozen expected values used by the C++ tests.

Run with `python3 tests/oracles/compute_oracles.py`; every value printed here
is pasted verbatim into the corresponding unit or acceptance test.
"""
from fractions import Fraction as F

import mpmath as mp

mp.mp.dps = 50


def beta_range(g):
    g = mp.mpf(g)
    s = mp.sqrt(1 - g * g)
    return (1 + g - s) / (2 * (1 + g)), (1 + g + s) / (2 * (1 + g))


def c_eps(b, g):
    b, g = mp.mpf(b), mp.mpf(g)
    return (1 - (1 + g) * (b - 1) ** 2) / ((1 + g) * b * b) - 1


def lam(b, g, e):
    b, g, e = mp.mpf(b), mp.mpf(g), mp.mpf(e)
    return (1 + e) * (1 + g) * b * b + (1 + g) * (1 - b) ** 2


def theorem1(G, L, s, gap, g, b, e, n, T):
    G, L, s, gap, n, T = map(mp.mpf, (G, L, s, gap, n, T))
    l = lam(b, g, e)
    lead = gap * s / (2 * mp.sqrt(n * T)) + 2 * L * s / mp.sqrt(n * T)
    resid = (3 * n * n / (s * s * T) * (1 + mp.mpf(g)) * L * L * G * G
             * (1 + 1 / mp.mpf(e)) * (G * G + s * s / n) * l / (1 - l))
    return lead, resid, lead + resid


def algorithm1_trace():
    """Hand trace of cyclic local top-1 with n=2, p=3 over two steps."""
    alpha, beta = F(1, 2), F(1, 2)
    theta = [F(0)] * 3
    mem = [[F(0)] * 3 for _ in range(2)]
    grads = [
        [[F(1), F(-2), F(1, 2)], [F(1, 2), F(1), F(-3)]],
        [[F(-1), F(1, 2), F(2)], [F(2), F(0), F(1)]],
    ]
    out = []
    for t in range(2):
        leader = t % 2
        ef = [[mem[i][j] + grads[t][i][j] for j in range(3)] for i in range(2)]
        # top-1 by magnitude, lowest index on ties
        idx = max(range(3), key=lambda j: (abs(ef[leader][j]), -j))
        g = [[ef[i][j] if j == idx else F(0) for j in range(3)] for i in range(2)]
        mean = [(g[0][j] + g[1][j]) / 2 for j in range(3)]
        for i in range(2):
            mem[i] = [(1 - beta) * mem[i][j] + beta * (mem[i][j] + grads[t][i][j] - g[i][j])
                      for j in range(3)]
        theta = [theta[j] - alpha * mean[j] for j in range(3)]
        out.append((t, leader, idx, list(theta), [list(m) for m in mem]))
    return out


def spearman_textbook(x, y):
    n = len(x)
    rx = {v: i + 1 for i, v in enumerate(sorted(x))}
    ry = {v: i + 1 for i, v in enumerate(sorted(y))}
    d2 = sum((rx[a] - ry[b]) ** 2 for a, b in zip(x, y))
    return 1 - F(6 * d2, n * (n * n - 1))


if __name__ == "__main__":
    lo, hi = beta_range("0.5")
    print("beta_range(0.5) =", mp.nstr(lo, 20), mp.nstr(hi, 20))
    ce = c_eps("0.3", "0.36")
    eps = min(mp.mpf(1), ce / 2)
    print("C_eps(0.3,0.36) =", mp.nstr(ce, 20), "eps =", mp.nstr(eps, 20))
    print("lambda =", mp.nstr(lam("0.3", "0.36", eps), 20))
    lead, resid, total = theorem1(1, 1, 1, 1, "0.36", "0.3", eps, 8, 10000)
    print("theorem1 lead =", mp.nstr(lead, 20), "resid =", mp.nstr(resid, 20),
          "total =", mp.nstr(total, 20))
    for rec in algorithm1_trace():
        t, leader, idx, theta, mem = rec
        print("t", t, "leader", leader, "index", idx,
              "theta", [str(v) for v in theta], "mem", [[str(v) for v in m] for m in mem])
    print("spearman([1..5],[1,3,2,5,4]) =", spearman_textbook([1, 2, 3, 4, 5], [1, 3, 2, 5, 4]))
    # ResNet50-like calibration: efficiency e such that b=8 comm fraction hits 56%.
    P, fl, peak, bw, bv = 25.5e6, 8e9, 100e12, 32e9, 2
    comm = 2 * P * bv / bw
    for b in (8, 32):
        print("b", b, "comm_s", comm, "compute_s/eff", b * fl / peak)

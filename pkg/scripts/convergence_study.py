"""Convergence tables for the numerical building blocks.

    python3 scripts/convergence_study.py

1. strict residual of the mild solution against the difference step h;
2. midpoint Riemann-Stieltjes error of int_0^1 s dT(s) against the mesh, m = -1;
3. semivariation of the rotation group against the truncation N.
"""

import math

import numpy as np

from cmaxreg import integration as integ
from cmaxreg.integration import OperatorPath
from cmaxreg.operators import DiagonalGenerator
from cmaxreg.regularity import MildSolution, convergence_order, probe_battery, strict_residual
from cmaxreg.semigroups import Semigroup
from cmaxreg.semivariation import sv_estimate


def strict_table():
    N = 16
    A = DiagonalGenerator.linear(N)
    T = Semigroup(A)
    x0 = 1.0 / np.arange(1, N + 1) ** 2
    hs = [1e-1, 1e-2, 1e-3, 1e-4]
    print("strict residual, m_n = -n, N = 16, x0 = 1/n^2, t = 0.5")
    print(f"{'probe':>12} " + " ".join(f"{h:>10.0e}" for h in hs) + "   order")
    for f in probe_battery(T, None, 1.0)[:12:3]:
        u = MildSolution(T, x0, f, 1e-13)
        res = [strict_residual(u, A, 0.5, h).max for h in hs]
        print(f"{f.label:>12} " + " ".join(f"{v:10.2e}" for v in res)
              + f"   {convergence_order(hs[1:], res[1:]):.3f}")


def stieltjes_table():
    T = Semigroup(DiagonalGenerator.from_list([-1.0]))
    path = OperatorPath.forward(T, 0, 1)
    f = integ.ramp([1.0], 0, 1)
    exact = 2.0 / math.e - 1.0
    print("\nmidpoint Riemann-Stieltjes sums of int_0^1 s dT(s), m = -1")
    for cells in (1, 4, 16, 64):
        d = integ.Partition.uniform(0, 1, cells)
        mids = 0.5 * (d.points[1:] + d.points[:-1])
        approx = integ.rs_sum(f, path, d, mids)
        print(f"  cells={cells:4d}  error={abs(float(np.real(approx[0])) - exact):.2e}")


def rotation_table():
    print("\nsemivariation of t -> e^{i n t} on [0, 1]")
    for N in (8, 16, 32, 64):
        path = OperatorPath.forward(Semigroup(DiagonalGenerator.rotation(N, 1.0)), 0, 1)
        est = sv_estimate(path)
        print(f"  N={N:3d}  SV>={est.value:8.4f}  SV/N={est.value / N:.4f}  converged={est.converged}")


if __name__ == "__main__":
    strict_table()
    stieltjes_table()
    rotation_table()

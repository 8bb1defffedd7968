"""Quick structural checks run by ``stokes-darcy selftest`` (a few seconds)."""
from __future__ import annotations

import numpy as np

from .assembly import Discretization
from .mesh import build_coupled_mesh
from .mms import get_case
from .timestepper import SchemeConfig, g_energy, run_transient


def _checks():
    mesh = build_coupled_mesh(4)
    yield "mesh counts", (mesh.fluid.n_vertices == 25 and mesh.fluid.n_triangles == 32
                          and len(mesh.interface_pairs) == 4)

    disc = Discretization.build(4)
    ops = disc.ops
    yield "fluid mass sums to area", abs(ops.M_f.sum() - 2.0) < 1e-12
    skew = ops.C_fp + ops.C_pf.T
    yield "interface coupling is skew", skew.count_nonzero() == 0 or abs(skew).max() == 0.0

    rng = np.random.default_rng(1)
    n = ops.S_mass.shape[0]
    worst = 0.0
    for _ in range(20):
        a, b, c = rng.standard_normal((3, n))
        S = ops.S_mass
        ip = lambda x, y: float(x @ (S @ y))
        lhs = ip(1.5 * c - 2 * b + 0.5 * a, c)
        d = c - 2 * b + a
        rhs = 0.5 * (g_energy(b, c, S) - g_energy(a, b, S)) + 0.25 * ip(d, d)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    yield "G-norm identity", worst < 1e-11

    res = run_transient(get_case("example1"), disc, SchemeConfig(dt=0.125), 0.5)
    yield "transient run finite", all(np.isfinite(r.e_u) for r in res.series)
    yield "discrete divergence-free", res.max_div_residual < 1e-9


def run(report=print) -> bool:
    ok = True
    for name, passed in _checks():
        report(f"{'PASS' if passed else 'FAIL'} {name}")
        ok &= bool(passed)
    return ok

"""Acceptance criteria 1-9 at their stated tolerances.

Each criterion records one ``C<k> PASS|FAIL`` line, printed in the pytest
terminal summary (or directly when this file is run as a script).
"""
import time

import numpy as np
import pytest

from stokes_darcy import linsolve
from stokes_darcy.assembly import Discretization
from stokes_darcy.harness import run_convergence, run_longtime
from stokes_darcy.mms import CASES, get_case
from stokes_darcy.timestepper import (AMB2, BDF2, BoundaryData, SchemeConfig,
                                      bdf2_step, build_step_operators, initialize, run_transient,
                                      solve_steady)

RESULTS = {}

REFERENCE_ERRORS = {
    BDF2: {16: (5.76e-5, 8.26e-5, 1.15e-2), 32: (9.53e-6, 2.06e-5, 2.97e-3),
           64: (2.35e-6, 4.85e-6, 7.73e-4)},
    AMB2: {16: (3.43e-3, 1.11e-4, 4.11e-2)},
}
REFERENCE_RAVG = {BDF2: (2.20, 2.04, 1.97), AMB2: (1.98, 2.01, 1.97)}
RATE_BAND = (1.6, 2.8)
RAVG_TOL = 0.35
ABS_FACTOR = 3.0
SWEEP_BUDGET_S = 180.0
STEP_BUDGET_S = 0.050


def record(cid, ok, detail):
    line = f"{cid} {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS[cid] = line
    print(line)
    return ok


def _fmt(v):
    return "(" + ", ".join(f"{x:.3g}" for x in v) + ")"


@pytest.fixture(scope="module")
def example1_sweep():
    out = {}
    t0 = time.perf_counter()
    for scheme in (BDF2, AMB2):
        out[scheme] = run_convergence("example1", scheme, [1 / 16, 1 / 32, 1 / 64], theta=1, T=1)
    return out, time.perf_counter() - t0


def test_c1_example1_temporal_rates(example1_sweep):
    reports, elapsed = example1_sweep
    ok = elapsed <= SWEEP_BUDGET_S
    notes = [f"sweep {elapsed:.1f}s"]
    for scheme, rep in reports.items():
        rates = rep.rates
        ok &= bool(np.all((rates >= RATE_BAND[0]) & (rates <= RATE_BAND[1])))
        ok &= bool(np.all(np.abs(np.array(rep.r_avg) - REFERENCE_RAVG[scheme]) <= RAVG_TOL))
        for lv in rep.levels:
            ref = REFERENCE_ERRORS[scheme].get(lv.n)
            if ref:
                ratio = np.array(lv.errors) / np.array(ref)
                ok &= bool(np.all((ratio >= 1 / ABS_FACTOR) & (ratio <= ABS_FACTOR)))
        notes.append(f"{scheme} r_avg={_fmt(rep.r_avg)} min/max rate={rates.min():.2f}/{rates.max():.2f}")
    assert record("C1", ok, "Example 1 temporal rates: " + "; ".join(notes))


def test_c2_spatial_superconvergence():
    rep = run_convergence("example1", BDF2, [1 / 8, 1 / 16, 1 / 32], theta=2, T=1)
    r = rep.rates
    ok = bool(np.all(r[:, :2] >= 3.0) and np.all((r[:, 2] >= 1.6) & (r[:, 2] <= 2.4)))
    assert record("C2", ok, f"Example 1 dt=h^2 rates phi,u,p: {r.round(2).tolist()}")


def test_c3_steady_case():
    rep = run_convergence("example2", BDF2, [1 / 16, 1 / 32, 1 / 64], theta=1, T=1)
    r = rep.rates
    ok = bool(np.all(r[:, :2] >= 3.0) and np.all((r[:, 2] >= 1.6) & (r[:, 2] <= 2.6)))
    assert record("C3", ok, f"Example 2 rates phi,u,p: {r.round(2).tolist()}")


def test_c4_example3_rates():
    ok = True
    notes = []
    for scheme in (BDF2, AMB2):
        r = run_convergence("example3", scheme, [1 / 16, 1 / 32, 1 / 64], theta=1, T=1).rates
        ok &= bool(np.all((r >= RATE_BAND[0]) & (r <= RATE_BAND[1])))
        notes.append(f"{scheme} {r.round(2).tolist()}")
    assert record("C4", ok, "Example 3 rates: " + "; ".join(notes))


def _log_slope(t, e):
    mask = t >= 5
    return np.polyfit(t[mask], np.log(e[mask]), 1)[0]


def test_c5_longtime_boundedness():
    ok = True
    notes = []
    fields = ("e_phi", "e_u", "e_p")
    for scheme in (BDF2, AMB2):
        means = []
        for dt in (1 / 64, 1 / 128):
            res = run_longtime("example3", scheme, 1 / 32, dt, 25.0)
            ok &= res.aborted_step is None
            t = np.array([r.t for r in res.series])
            for f in fields:
                e = np.array([getattr(r, f) for r in res.series])
                ok &= bool(np.all(np.isfinite(e)))
                early, late = e[(t > 0) & (t <= 5)].max(), e[t >= 5].max()
                ok &= bool(late <= 2 * early)
                if dt == 1 / 64:
                    ok &= bool(_log_slope(t, e) <= 1e-3)
            means.append(np.array([np.mean([getattr(r, f) for r in res.series]) for f in fields]))
        ratio = means[0] / means[1]
        ok &= bool(ratio[0] >= 3 and ratio[1] >= 3 and ratio[2] >= 1.5)
        notes.append(f"{scheme} mean-error ratios {_fmt(ratio)}")
    assert record("C5", ok, "Example 3 to T=25: " + "; ".join(notes))


def test_c6_unconditional_stability():
    ok = True
    notes = []
    disc = Discretization.build(16)
    for scheme in (BDF2, AMB2):
        res = run_transient(get_case(3), disc, SchemeConfig(scheme=scheme, dt=1.0), 200.0)
        s = np.array([r.s_norm for r in res.series])
        ok &= bool(len(s) == 200 and np.all(np.isfinite(s)))
        notes.append(f"{scheme} max S-norm {s.max():.3g}")
    assert record("C6", ok, "dt=1, 200 steps: " + "; ".join(notes))


def test_c7_steady_exponential_convergence():
    disc = Discretization.build(32)
    case = get_case("example2")
    steady = solve_steady(disc, case)
    res = run_transient(case, disc, SchemeConfig(dt=0.1), 50.0, init="zero", reference=steady)
    e = np.array([r.e_phi for r in res.series])
    steps = np.array([r.step for r in res.series])
    below = steps[e < 1e-8]
    reaches = len(below) > 0 and below[0] <= 500
    # judge monotone decay from step 5 until the 1e-8 target is met; beyond that
    # the error sits at solver round-off and fluctuates
    end = below[0] if len(below) else steps[-1]
    window = (steps >= 5) & (steps <= end)
    tail, tail_steps = e[window], steps[window]
    rises = np.flatnonzero(np.diff(tail) > 0)
    monotone = len(rises) == 0
    detail = (f"below 1e-8 at step {below[0] if len(below) else None}; "
              f"{len(rises)} increases between step 5 and step {end}"
              + (f" (first at step {tail_steps[rises[0]]}->{tail_steps[rises[0] + 1]}: {tail[rises[0]]:.3g} -> {tail[rises[0] + 1]:.3g})"
                 if len(rises) else ""))
    assert record("C7", reaches and monotone, "steady convergence: " + detail)


def test_c8_structural_suite():
    import test_assembly
    import test_mms
    import test_timestepper

    disc = Discretization.build(8)
    checks = {}
    try:
        test_timestepper.test_gnorm_identity_random(disc)
        checks["G identity"] = True
    except AssertionError:
        checks["G identity"] = False
    for name, fn in [
        ("skew", lambda: test_assembly.test_interface_block_exactly_skew(disc)),
        ("coercivity", test_assembly.test_coercivity),
        ("div every step", lambda: [test_timestepper.test_divergence_every_step(disc, s)
                                    for s in (BDF2, AMB2)]),
        ("MMS vs FD", lambda: [test_mms.test_forcing_vs_fd(n) or test_mms.test_derivatives_vs_fd(n)
                               for n in sorted(CASES)]),
        ("surrogate", lambda: [test_timestepper.test_scalar_surrogate_second_order(s)
                               for s in (BDF2, AMB2)]),
    ]:
        try:
            fn()
            checks[name] = True
        except AssertionError:
            checks[name] = False
    ok = all(checks.values())
    assert record("C8", ok, "structural: " + ", ".join(f"{k}={'ok' if v else 'FAIL'}"
                                                        for k, v in checks.items()))


def test_c9_performance(example1_sweep):
    _, sweep = example1_sweep
    disc = Discretization.build(64)
    case = get_case(1)
    cfg = SchemeConfig(dt=1 / 64)
    before = linsolve.factorization_count
    ops = build_step_operators(disc, cfg)
    loads = disc.load_assembler(case)
    bc = BoundaryData(disc, case)
    l0, l1 = initialize(case, disc, cfg)
    times = []
    for k in range(2, 12):
        t0 = time.perf_counter()
        new = bdf2_step(ops, l1, l0, loads, bc, k)
        times.append(time.perf_counter() - t0)
        l0, l1 = l1, new
    step = float(np.median(times))
    once = linsolve.factorization_count - before == 2
    ok = step <= STEP_BUDGET_S and sweep <= SWEEP_BUDGET_S and once
    assert record("C9", ok, f"step {1e3 * step:.1f} ms at h=1/64 (median of 10); "
                            f"C1 sweep {sweep:.1f}s; factorizations per run: "
                            f"{linsolve.factorization_count - before}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))

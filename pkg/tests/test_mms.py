import numpy as np
import pytest

from stokes_darcy.mms import (CASES, exact_eval, forcing_eval, get_case, interface_residuals)
from stokes_darcy.params import PhysicalParams


def d1(f, s, h=1e-3):
    # 4th-order central first derivative
    return (-f(s + 2 * h) + 8 * f(s + h) - 8 * f(s - h) + f(s - 2 * h)) / (12 * h)


def d2(f, s, h=1e-3):
    return (-f(s + 2 * h) + 16 * f(s + h) - 30 * f(s) + 16 * f(s - h) - f(s - 2 * h)) / (12 * h * h)


def fd_fluid_forcing(case, x, y, t, prm, h=1e-3):
    out = []
    for c in range(2):
        u = lambda xx, yy, tt: case.velocity(xx, yy, tt)[c]
        ut = d1(lambda s: u(x, y, s), t, h)
        lap = d2(lambda s: u(s, y, t), x, h) + d2(lambda s: u(x, s, t), y, h)
        dp = d1(lambda s: case.pressure(s, y, t), x, h) if c == 0 else \
            d1(lambda s: case.pressure(x, s, t), y, h)
        out.append(ut - prm.nu * lap + dp)
    return out


def fd_porous_forcing(case, x, y, t, prm, h=1e-3):
    K = prm.K_matrix
    phi = case.head
    hxx = d2(lambda s: phi(s, y, t), x, h)
    hyy = d2(lambda s: phi(x, s, t), y, h)
    hxy = d1(lambda s: d1(lambda r: phi(r, s, t), x, h), y, h)
    ht = d1(lambda s: phi(x, y, s), t, h)
    return prm.S * ht - (K[0, 0] * hxx + (K[0, 1] + K[1, 0]) * hxy + K[1, 1] * hyy)


def _samples(rng, n, y0):
    return rng.uniform(0.05, 0.95, n), y0 + rng.uniform(0.05, 0.95, n), rng.uniform(0.1, 2.0, n)


@pytest.mark.parametrize("name", sorted(CASES))
def test_derivatives_vs_fd(name):
    case = get_case(name)
    rng = np.random.default_rng(11)
    for domain, y0 in (("fluid", 1.0), ("porous", 0.0)):
        for x, y, t in zip(*_samples(rng, 50, y0)):
            g = case.velocity_grad(x, y, t)
            fd = [d1(lambda s: case.velocity(s, y, t)[0], x), d1(lambda s: case.velocity(x, s, t)[0], y),
                  d1(lambda s: case.velocity(s, y, t)[1], x), d1(lambda s: case.velocity(x, s, t)[1], y)]
            assert np.allclose(g, fd, atol=1e-7)
            ut = case.velocity_dt(x, y, t)
            assert np.allclose(ut, [d1(lambda s: case.velocity(x, y, s)[c], t) for c in (0, 1)],
                               atol=1e-7)
            px, py = case.pressure_grad(x, y, t)
            assert abs(px - d1(lambda s: case.pressure(s, y, t), x)) < 1e-7
            assert abs(py - d1(lambda s: case.pressure(x, s, t), y)) < 1e-7
            hx, hy = case.head_grad(x, y, t)
            assert abs(hx - d1(lambda s: case.head(s, y, t), x)) < 1e-7
            assert abs(hy - d1(lambda s: case.head(x, s, t), y)) < 1e-7
            assert abs(case.head_dt(x, y, t) - d1(lambda s: case.head(x, y, s), t)) < 1e-7


@pytest.mark.parametrize("name", sorted(CASES))
def test_forcing_vs_fd(name):
    case = get_case(name)
    prm = PhysicalParams(nu=0.7, g=1.3, S=0.9, K=np.array([[1.0, 0.1], [0.1, 0.5]]), alpha_bj=1.2)
    rng = np.random.default_rng(12)
    for x, y, t in zip(*_samples(rng, 50, 1.0)):
        assert np.allclose(case.fluid_forcing(x, y, t, prm),
                           fd_fluid_forcing(case, x, y, t, prm), atol=1e-7)
    for x, y, t in zip(*_samples(rng, 50, 0.0)):
        assert abs(case.porous_forcing(x, y, t, prm) - fd_porous_forcing(case, x, y, t, prm)) < 1e-7


def test_spot_forcing_values():
    prm = PhysicalParams()
    c1 = get_case("example1")
    assert abs(forcing_eval(c1, (0.5, 0.5), 0.0)
               - fd_porous_forcing(c1, 0.5, 0.5, 0.0, prm, h=1e-4)) < 1e-7
    c3 = get_case("example3")
    assert np.allclose(forcing_eval(c3, (0.5, 1.5), 0.25),
                       fd_fluid_forcing(c3, 0.5, 1.5, 0.25, prm), atol=1e-7)
    with pytest.raises(ValueError):
        forcing_eval(c1, (0.5, 1.0), 0.0)


def test_example1_values():
    u, _, _ = exact_eval("example1", (0.0, 1.0), 0.0)
    assert np.allclose(u, (1.0, 2.0), atol=1e-15)
    _, _, phi = exact_eval("example1", (0.0, 0.0), 0.0)
    assert phi == 0.0


def test_example1_divergence_free():
    c = get_case(1)
    rng = np.random.default_rng(2)
    x, y, t = rng.uniform(0, 1, 50), rng.uniform(1, 2, 50), rng.uniform(0, 3, 50)
    g11, _, _, g22 = c.velocity_grad(x, y, t)
    assert np.max(np.abs(g11 + g22)) < 1e-12


def test_example2_steady():
    c = get_case(2)
    for pt in [(0.3, 1.4), (0.6, 0.2)]:
        assert exact_eval(c, pt, 0.4) == exact_eval(c, pt, 1.4)
    f1, f2 = c.velocity_dt(0.3, 1.4, 0.0)
    assert f1 == 0 and f2 == 0


def test_example1_satisfies_interface_conditions():
    x = np.linspace(0, 1, 21)
    for t in (0.0, 0.7):
        mass, tang, norm = interface_residuals("example1", x, t)
        assert np.max(np.abs(mass)) < 1e-12
        assert np.max(np.abs(tang)) < 1e-12
        assert np.max(np.abs(norm)) < 1e-12


def test_mass_residual_fd():
    c = get_case(1)
    prm = PhysicalParams()
    x, t = 0.5, 0.0
    u2 = c.velocity(x, 1.0, t)[1]
    dphi_dy = d1(lambda s: c.head(x, s, t), 1.0)
    # u.n_f with n_f = (0,-1), K grad(phi).n_f
    fd = -u2 - dphi_dy
    assert abs(interface_residuals(c, np.array([x]), t, prm)[0][0] - fd) < 1e-8


@pytest.mark.parametrize("name", sorted(CASES))
def test_residuals_continuous(name):
    x = np.linspace(0, 1, 101)
    for comp in interface_residuals(name, x, 0.3):
        assert np.all(np.isfinite(comp))
        # a jump shows up as a second difference comparable to the first difference
        first = np.abs(np.diff(comp))
        second = np.abs(np.diff(comp, 2))
        assert second.max() <= 1e-6 + 0.05 * first.max()


def test_get_case():
    assert get_case("1").name == "example1"
    with pytest.raises(ValueError):
        get_case("nope")

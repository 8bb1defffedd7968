"""Closed-form test solutions and the data they induce.

Every case supplies the exact fields together with the derivatives needed to
build forcing terms and interface defects.  Derivatives are written out by
hand; ``tests/test_mms.py`` checks each of them against finite differences.

Forcing follows the gradient-form momentum operator::

    f_fluid  = du/dt - nu * lap(u) + grad(p)
    f_porous = S * dphi/dt - div(K grad(phi))

Interface defects use the matching pseudo-traction ``nu * grad(u) n - p n``.
"""
from __future__ import annotations

import numpy as np

from .params import PhysicalParams

PI = np.pi

# fluid outward normal and tangent on y = 1
N_FLUID = (0.0, -1.0)
TAU = (1.0, 0.0)


class ManufacturedCase:
    name = "base"
    steady = False
    default_params = PhysicalParams()

    # --- closed forms supplied by subclasses -------------------------------
    def velocity(self, x, y, t):
        raise NotImplementedError

    def velocity_dt(self, x, y, t):
        raise NotImplementedError

    def velocity_grad(self, x, y, t):
        """Returns (du1/dx, du1/dy, du2/dx, du2/dy)."""
        raise NotImplementedError

    def velocity_laplacian(self, x, y, t):
        raise NotImplementedError

    def pressure(self, x, y, t):
        raise NotImplementedError

    def pressure_grad(self, x, y, t):
        raise NotImplementedError

    def head(self, x, y, t):
        raise NotImplementedError

    def head_dt(self, x, y, t):
        raise NotImplementedError

    def head_grad(self, x, y, t):
        raise NotImplementedError

    def head_hessian(self, x, y, t):
        """Returns (phi_xx, phi_xy, phi_yy)."""
        raise NotImplementedError

    # --- derived data -------------------------------------------------------
    def fluid_forcing(self, x, y, t, params: PhysicalParams):
        ut1, ut2 = self.velocity_dt(x, y, t)
        l1, l2 = self.velocity_laplacian(x, y, t)
        px, py = self.pressure_grad(x, y, t)
        return ut1 - params.nu * l1 + px, ut2 - params.nu * l2 + py

    def porous_forcing(self, x, y, t, params: PhysicalParams):
        K = params.K_matrix
        hxx, hxy, hyy = self.head_hessian(x, y, t)
        div_flux = K[0, 0] * hxx + (K[0, 1] + K[1, 0]) * hxy + K[1, 1] * hyy
        return params.S * self.head_dt(x, y, t) - div_flux

    def interface_residuals(self, x, t, params: PhysicalParams):
        """Defects (mass, tangential, normal) of the three interface conditions on y=1."""
        x = np.asarray(x, dtype=float)
        y = np.ones_like(x)
        nx, ny = N_FLUID
        tx, ty = TAU
        u1, u2 = self.velocity(x, y, t)
        g11, g12, g21, g22 = self.velocity_grad(x, y, t)
        p = self.pressure(x, y, t)
        phi = self.head(x, y, t)
        hx, hy = self.head_grad(x, y, t)
        K = params.K_matrix

        un = u1 * nx + u2 * ny
        flux_n = (K[0, 0] * hx + K[0, 1] * hy) * nx + (K[1, 0] * hx + K[1, 1] * hy) * ny
        mass = un + flux_n

        s1 = params.nu * (g11 * nx + g12 * ny) - p * nx
        s2 = params.nu * (g21 * nx + g22 * ny) - p * ny
        tangential = -(s1 * tx + s2 * ty) - params.alpha_bj * (u1 * tx + u2 * ty)
        normal = -(s1 * nx + s2 * ny) - params.g * phi
        return mass, tangential, normal

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def _A(x):
    return 2.0 - PI * np.sin(PI * x)


def _dA(x):
    return -PI**2 * np.cos(PI * x)


def _d2A(x):
    return PI**3 * np.sin(PI * x)


class Example1(ManufacturedCase):
    """Polynomial/trigonometric solution modulated by cos(t)."""

    name = "example1"

    def velocity(self, x, y, t):
        c = np.cos(t)
        return (x**2 * (y - 1) ** 2 + y) * c, (-2 / 3 * x * (y - 1) ** 3 + _A(x)) * c

    def velocity_dt(self, x, y, t):
        u1, u2 = self.velocity(x, y, 0.0)
        return -np.sin(t) * u1, -np.sin(t) * u2

    def velocity_grad(self, x, y, t):
        c = np.cos(t)
        return (
            2 * x * (y - 1) ** 2 * c,
            (2 * x**2 * (y - 1) + 1) * c,
            (-2 / 3 * (y - 1) ** 3 + _dA(x)) * c,
            -2 * x * (y - 1) ** 2 * c,
        )

    def velocity_laplacian(self, x, y, t):
        c = np.cos(t)
        return (2 * (y - 1) ** 2 + 2 * x**2) * c, (_d2A(x) - 4 * x * (y - 1)) * c

    def pressure(self, x, y, t):
        return _A(x) * np.sin(PI * y / 2) * np.cos(t)

    def pressure_grad(self, x, y, t):
        c = np.cos(t)
        return _dA(x) * np.sin(PI * y / 2) * c, _A(x) * (PI / 2) * np.cos(PI * y / 2) * c

    @staticmethod
    def _B(y):
        return 1 - y - np.cos(PI * y), -1 + PI * np.sin(PI * y), PI**2 * np.cos(PI * y)

    def head(self, x, y, t):
        return _A(x) * self._B(y)[0] * np.cos(t)

    def head_dt(self, x, y, t):
        return -_A(x) * self._B(y)[0] * np.sin(t)

    def head_grad(self, x, y, t):
        B, dB, _ = self._B(y)
        c = np.cos(t)
        return _dA(x) * B * c, _A(x) * dB * c

    def head_hessian(self, x, y, t):
        B, dB, d2B = self._B(y)
        c = np.cos(t)
        return _d2A(x) * B * c, _dA(x) * dB * c, _A(x) * d2B * c


class Example2(ManufacturedCase):
    """Time-independent solution with zero pressure and a harmonic head."""

    name = "example2"
    steady = True

    def velocity(self, x, y, t):
        x = np.asarray(x, dtype=float)
        return (
            np.sin(2 * PI * y) * np.cos(x) / PI,
            (2 + np.sin(PI * y) ** 2 / PI**2) * np.sin(x),
        )

    def velocity_dt(self, x, y, t):
        z = np.zeros(np.broadcast(x, y).shape)
        return z, z

    def velocity_grad(self, x, y, t):
        return (
            -np.sin(2 * PI * y) * np.sin(x) / PI,
            2 * np.cos(2 * PI * y) * np.cos(x),
            (2 + np.sin(PI * y) ** 2 / PI**2) * np.cos(x),
            np.sin(2 * PI * y) * np.sin(x) / PI,
        )

    def velocity_laplacian(self, x, y, t):
        s2 = np.sin(2 * PI * y)
        return (
            -s2 * np.cos(x) / PI - 4 * PI * s2 * np.cos(x),
            -(2 + np.sin(PI * y) ** 2 / PI**2) * np.sin(x) + 2 * np.cos(2 * PI * y) * np.sin(x),
        )

    def pressure(self, x, y, t):
        return np.zeros(np.broadcast(x, y).shape)

    def pressure_grad(self, x, y, t):
        z = np.zeros(np.broadcast(x, y).shape)
        return z, z

    def head(self, x, y, t):
        return (np.exp(-y) - np.exp(y)) * np.sin(x)

    def head_dt(self, x, y, t):
        return np.zeros(np.broadcast(x, y).shape)

    def head_grad(self, x, y, t):
        return (np.exp(-y) - np.exp(y)) * np.cos(x), -(np.exp(-y) + np.exp(y)) * np.sin(x)

    def head_hessian(self, x, y, t):
        d = (np.exp(-y) - np.exp(y))
        return -d * np.sin(x), -(np.exp(-y) + np.exp(y)) * np.cos(x), d * np.sin(x)


class Example3(ManufacturedCase):
    """Solution modulated by the periodic factor 2 + cos(2 pi t); used for long runs."""

    name = "example3"

    @staticmethod
    def _c(t):
        return 2 + np.cos(2 * PI * t), -2 * PI * np.sin(2 * PI * t)

    def _u0(self, x, y):
        return x**2 * y**2 + np.exp(-y), -2 / 3 * x * y**3 + _A(x)

    def velocity(self, x, y, t):
        c, _ = self._c(t)
        a, b = self._u0(x, y)
        return a * c, b * c

    def velocity_dt(self, x, y, t):
        _, dc = self._c(t)
        a, b = self._u0(x, y)
        return a * dc, b * dc

    def velocity_grad(self, x, y, t):
        c, _ = self._c(t)
        return (
            2 * x * y**2 * c,
            (2 * x**2 * y - np.exp(-y)) * c,
            (-2 / 3 * y**3 + _dA(x)) * c,
            -2 * x * y**2 * c,
        )

    def velocity_laplacian(self, x, y, t):
        c, _ = self._c(t)
        return (2 * y**2 + 2 * x**2 + np.exp(-y)) * c, (_d2A(x) - 4 * x * y) * c

    def pressure(self, x, y, t):
        return -_A(x) * np.cos(2 * PI * y) * self._c(t)[0]

    def pressure_grad(self, x, y, t):
        c, _ = self._c(t)
        return -_dA(x) * np.cos(2 * PI * y) * c, 2 * PI * _A(x) * np.sin(2 * PI * y) * c

    @staticmethod
    def _B(y):
        s = PI * (1 - y)
        return -y + np.cos(s), -1 + PI * np.sin(s), -PI**2 * np.cos(s)

    def head(self, x, y, t):
        return _A(x) * self._B(y)[0] * self._c(t)[0]

    def head_dt(self, x, y, t):
        return _A(x) * self._B(y)[0] * self._c(t)[1]

    def head_grad(self, x, y, t):
        B, dB, _ = self._B(y)
        c, _ = self._c(t)
        return _dA(x) * B * c, _A(x) * dB * c

    def head_hessian(self, x, y, t):
        B, dB, d2B = self._B(y)
        c, _ = self._c(t)
        return _d2A(x) * B * c, _dA(x) * dB * c, _A(x) * d2B * c


CASES = {cls.name: cls for cls in (Example1, Example2, Example3)}


def get_case(name) -> ManufacturedCase:
    if isinstance(name, ManufacturedCase):
        return name
    key = str(name).lower().replace("_", "").replace("-", "")
    if key in ("1", "2", "3"):
        key = "example" + key
    try:
        return CASES[key]()
    except KeyError:
        raise ValueError(f"unknown case {name!r}; choose from {sorted(CASES)}") from None


def exact_eval(case, point, t):
    """Exact (u, p, phi) at ``point``; formulas are evaluated regardless of subdomain."""
    case = get_case(case)
    x, y = point
    u = case.velocity(x, y, t)
    return (float(u[0]), float(u[1])), float(case.pressure(x, y, t)), float(case.head(x, y, t))


def forcing_eval(case, point, t, params=None, domain=None):
    """Fluid forcing (2-tuple) for points above the interface, porous forcing below."""
    case = get_case(case)
    params = params or case.default_params
    x, y = point
    if domain is None:
        if y == 1.0:
            raise ValueError("point on the interface: pass domain='fluid' or 'porous'")
        domain = "fluid" if y > 1.0 else "porous"
    if domain == "fluid":
        f1, f2 = case.fluid_forcing(x, y, t, params)
        return float(f1), float(f2)
    return float(case.porous_forcing(x, y, t, params))


def interface_residuals(case, x, t, params=None):
    case = get_case(case)
    return case.interface_residuals(x, t, params or case.default_params)

"""Shear profiles U(z) with derivatives and inflection-point structure.

Supported kinds:

- ``poiseuille``:  U = 1 - z^2 on the channel [-1, 1]
- ``exponential``: U = 1 - exp(-z) on the half line
- ``tanh``:        U = tanh(z - z0) + tanh(z0) on the half line (U(0) = 0)
- ``kolmogorov``:  U = cos(z) on the torus [0, 2*pi)
- ``blasius``:     U = f'(eta) from the similarity equation, via shooting
- ``custom``:      cubic-spline interpolation of a sampled (z, U) table

Profiles are immutable after construction and safe to share across sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import ConfigurationError, NonconvergenceError, UnsupportedProfileError

CHANNEL = "channel"
HALF_LINE = "half_line"
TORUS = "torus"

_KINDS = ("poiseuille", "exponential", "tanh", "blasius", "kolmogorov", "custom")


@dataclass(frozen=True)
class ShearProfile:
    """A base flow U(z) with first and second derivatives and domain metadata."""

    kind: str
    domain: str
    U: Callable[[np.ndarray], np.ndarray]
    dU: Callable[[np.ndarray], np.ndarray]
    d2U: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    lower_accuracy: bool = False

    def z_range(self, z_max: float = 20.0) -> tuple[float, float]:
        """Physical scan interval for this profile's domain."""
        if self.domain == CHANNEL:
            return (-1.0, 1.0)
        if self.domain == TORUS:
            return (0.0, 2.0 * np.pi)
        return (0.0, z_max)


def _vec(f):
    def g(z):
        z = np.asarray(z, dtype=float)
        return f(z)

    return g


def make_profile(kind: str, **params) -> ShearProfile:
    """Build a named shear profile; U, U', U'' are mutually consistent."""
    if kind not in _KINDS:
        raise UnsupportedProfileError(f"unknown profile kind {kind!r}; expected one of {_KINDS}")

    if kind == "poiseuille":
        return ShearProfile(
            kind,
            CHANNEL,
            _vec(lambda z: 1.0 - z**2),
            _vec(lambda z: -2.0 * z),
            _vec(lambda z: -2.0 * np.ones_like(z)),
        )

    if kind == "exponential":
        return ShearProfile(
            kind,
            HALF_LINE,
            _vec(lambda z: 1.0 - np.exp(-z)),
            _vec(lambda z: np.exp(-z)),
            _vec(lambda z: -np.exp(-z)),
        )

    if kind == "tanh":
        if "z0" not in params:
            raise ConfigurationError("tanh profile requires parameter z0")
        z0 = float(params["z0"])
        shift = np.tanh(z0)

        def sech2(w):
            # clip before cosh: beyond |w|=30 the value is below 1e-26 anyway
            return 1.0 / np.cosh(np.clip(w, -30.0, 30.0)) ** 2

        return ShearProfile(
            kind,
            HALF_LINE,
            _vec(lambda z: np.tanh(z - z0) + shift),
            _vec(lambda z: sech2(z - z0)),
            _vec(lambda z: -2.0 * np.tanh(z - z0) * sech2(z - z0)),
            params={"z0": z0},
        )

    if kind == "kolmogorov":
        return ShearProfile(
            kind,
            TORUS,
            _vec(np.cos),
            _vec(lambda z: -np.sin(z)),
            _vec(lambda z: -np.cos(z)),
        )

    if kind == "blasius":
        return blasius_solve(tolerance=float(params.get("tolerance", 1e-8)))

    # custom table
    if "table" in params:
        table = np.asarray(params["table"], dtype=float)
        if table.ndim != 2 or table.shape[1] != 2:
            raise ConfigurationError("custom table must be a (n, 2) array of (z, U)")
        z_tab, u_tab = table[:, 0], table[:, 1]
    elif "z" in params and "U" in params:
        z_tab = np.asarray(params["z"], dtype=float)
        u_tab = np.asarray(params["U"], dtype=float)
    else:
        raise ConfigurationError("custom profile requires a (z, U) table")
    domain = params.get("domain", HALF_LINE)
    return _spline_profile("custom", domain, z_tab, u_tab)


def _spline_profile(kind, domain, z_tab, u_tab, extra_params=None, d2_exact=None):
    order = np.argsort(z_tab)
    z_tab, u_tab = z_tab[order], u_tab[order]
    spl = CubicSpline(z_tab, u_tab)
    d1 = spl.derivative(1)
    d2 = spl.derivative(2)
    z_lo, z_hi = z_tab[0], z_tab[-1]
    u_hi = u_tab[-1]

    def U(z):
        z = np.asarray(z, dtype=float)
        # hold the far-field value beyond the table
        return np.where(z >= z_hi, u_hi, spl(np.clip(z, z_lo, z_hi)))

    def dU(z):
        z = np.asarray(z, dtype=float)
        return np.where(z >= z_hi, 0.0, d1(np.clip(z, z_lo, z_hi)))

    d2_fun = d2_exact if d2_exact is not None else d2

    def d2Uf(z):
        z = np.asarray(z, dtype=float)
        return np.where(z >= z_hi, 0.0, d2_fun(np.clip(z, z_lo, z_hi)))

    return ShearProfile(
        kind,
        domain,
        U,
        dU,
        d2Uf,
        params=dict(extra_params or {}),
        lower_accuracy=(d2_exact is None),
    )


def _blasius_rhs(eta, f):
    # f = (f, f', f'');  f''' = -f f'' / 2
    return [f[1], f[2], -0.5 * f[0] * f[2]]


def _blasius_shoot(fpp0: float, eta_max: float):
    sol = solve_ivp(
        _blasius_rhs,
        (0.0, eta_max),
        [0.0, 0.0, fpp0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-13,
        dense_output=True,
    )
    return sol


def blasius_solve(tolerance: float = 1e-8, eta_max: float = 15.0) -> ShearProfile:
    """Blasius profile U = f'(eta) from f''' + f f''/2 = 0 via shooting on f''(0).

    Bisection on f''(0) with a high-order ODE integrator; converged when
    |f'(eta_max) - 1| < tolerance.
    """
    if tolerance <= 0:
        raise ConfigurationError("tolerance must be positive")

    def miss(fpp0):
        return _blasius_shoot(fpp0, eta_max).y[1][-1] - 1.0

    lo, hi = 0.1, 1.0
    m_lo, m_hi = miss(lo), miss(hi)
    if m_lo * m_hi > 0:
        raise NonconvergenceError(f"shooting bracket failed: miss({lo})={m_lo}, miss({hi})={m_hi}")
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        m = miss(mid)
        if abs(m) < tolerance and hi - lo < 1e-12:
            break
        if m_lo * m <= 0:
            hi, m_hi = mid, m
        else:
            lo, m_lo = mid, m
    fpp0 = 0.5 * (lo + hi)
    sol = _blasius_shoot(fpp0, eta_max)
    if abs(sol.y[1][-1] - 1.0) >= tolerance:
        raise NonconvergenceError(
            f"|f'(eta_max)-1|={abs(sol.y[1][-1]-1.0):.3e} above tolerance; bracket [{lo}, {hi}]"
        )

    eta = np.linspace(0.0, eta_max, 3001)
    f, fp, fpp = sol.sol(eta)
    spl_fp = CubicSpline(eta, fp)     # U
    spl_fpp = CubicSpline(eta, fpp)   # U'
    spl_f = CubicSpline(eta, f)

    def U(z):
        z = np.asarray(z, dtype=float)
        return np.where(z >= eta_max, 1.0, spl_fp(np.clip(z, 0.0, eta_max)))

    def dU(z):
        # f'' > 0 everywhere; clamp sub-roundoff spline wiggle in the far field
        z = np.asarray(z, dtype=float)
        return np.where(z >= eta_max, 0.0, np.maximum(spl_fpp(np.clip(z, 0.0, eta_max)), 0.0))

    def d2U(z):
        # U'' = f''' = -f f''/2, exactly from the similarity equation
        z = np.asarray(z, dtype=float)
        zc = np.clip(z, 0.0, eta_max)
        return np.where(z >= eta_max, 0.0, -0.5 * spl_f(zc) * spl_fpp(zc))

    return ShearProfile(
        "blasius",
        HALF_LINE,
        U,
        dU,
        d2U,
        params={"fpp0": fpp0, "eta_max": eta_max, "tolerance": tolerance},
    )


def inflection_points(
    profile: ShearProfile,
    z_max: float = 20.0,
    n_scan: int = 2000,
    refine_tol: float = 1e-10,
) -> list[float]:
    """All z where U'' changes sign, refined by bisection.

    An empty list means the necessary inviscid-instability condition fails.
    """
    z_lo, z_hi = profile.z_range(z_max)
    z = np.linspace(z_lo, z_hi, n_scan)
    w = profile.d2U(z)
    roots: list[float] = []
    for i in range(len(z) - 1):
        if w[i] == 0.0 and (i == 0 or w[i - 1] * (w[i + 1] if i + 1 < len(w) else 0) < 0):
            roots.append(z[i])
        elif w[i] * w[i + 1] < 0:
            roots.append(brentq(lambda s: float(profile.d2U(s)), z[i], z[i + 1], xtol=refine_tol))
    # dedupe near-coincident roots
    out: list[float] = []
    for r in roots:
        if not out or abs(r - out[-1]) > 10 * refine_tol:
            out.append(float(r))
    return out

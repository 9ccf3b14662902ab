"""Nonlinear-instability constructions at desk scale.

Four related objects are built here, all organised around power series in a
small amplitude epsilon whose terms grow like e^{n lambda t}:

- ``ode_bootstrap``: the approximate solution phi_app = sum phi_i of a
  quadratic ODE  phi' = A phi + Q(phi, phi)  started on an unstable
  eigenvector, with measured iteration constants, an amplitude-floor escape
  time, and the truncation residual.
- ``riccati_exact``: the closed-form solution of the scalar model
  phi' = eps phi + alpha phi^2, including its blow-up time (alpha > 0) and
  saturation limit (alpha < 0).
- ``hopf_series`` / ``hopf_majorant``: the instability series of the scalar
  conservation-type equation  u_t + u u_z = alpha u  built by an exact Fourier
  recurrence, together with a truncated generator-function majorant
  G_N(t, z) = sum_k Gen(u_k)(z) t^{k-1} verified to satisfy the differential
  inequality  alpha dG/dt - G dG/dz <= 0  and traced along characteristics.
- ``euler_series``: the truncated instability series of the 2D Euler
  equations about a periodic shear flow (Kolmogorov type), with each term
  obtained from a block-diagonal Fourier-Galerkin solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from numpy.polynomial import legendre
from scipy.integrate import solve_ivp

from .errors import (
    ConfigurationError,
    InputError,
    NonconvergenceError,
    NotUnstableError,
    QuadratureError,
    ResonanceError,
    WindowError,
)
from .profiles import TORUS, ShearProfile
from .resolvent import default_contour_for, semigroup_apply

__all__ = [
    "BootstrapResult",
    "HopfSeries",
    "RiccatiValue",
    "duhamel_term",
    "euler_series",
    "hopf_majorant",
    "hopf_series",
    "ode_bootstrap",
    "riccati_exact",
]


# ----------------------------------------------------------------------------
# ODE bootstrap
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class BootstrapResult:
    """Approximate solution of phi' = A phi + Q(phi, phi) as a power series.

    ``terms[i]`` holds phi_{i+1} sampled on ``t_grid`` (shape (nt, d));
    ``C[i]`` is the measured constant in |phi_{i+1}| <= C eps^{i+1}
    e^{(i+1) Re(lambda) t}.  ``T1 = -log(eps)/Re(lambda) - sigma`` is the
    escape time predicted by the series, ``sigma0 = e^{-sigma}/2`` the
    amplitude floor it guarantees, and ``escape_time`` the observed first
    crossing of that floor by |phi_app|.
    """

    epsilon: float
    growth_rate: complex
    t_grid: np.ndarray
    terms: tuple[np.ndarray, ...]
    C: tuple[float, ...]
    sigma: float
    sigma0: float
    T1: float
    approx: np.ndarray
    residual: np.ndarray
    residual_slope: float
    escape_time: float
    energy_constant: float

    @property
    def order(self) -> int:
        return len(self.terms)


def duhamel_term(
    A: np.ndarray,
    forcing: Callable[[float], np.ndarray],
    t: float,
    tol: float = 1e-10,
    contour=None,
    max_nodes: int = 512,
) -> np.ndarray:
    """Evaluate int_0^t e^{A(t-tau)} forcing(tau) dtau.

    Gauss-Legendre nodes on [0, t] are doubled until two successive values
    agree to ``tol``; the propagator is evaluated by resolvent contour
    quadrature (``semigroup_apply``).
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if t == 0.0:
        return np.zeros(A.shape[0], dtype=complex)
    if contour is None:
        contour = default_contour_for(A)
    n, prev = 8, None
    while n <= max_nodes:
        x, w = legendre.leggauss(n)
        tau = 0.5 * t * (x + 1.0)
        wt = 0.5 * t * w
        val = sum(
            wi * semigroup_apply(A, forcing(ti), t - ti, contour=contour)
            for ti, wi in zip(tau, wt)
        )
        if prev is not None and np.max(np.abs(val - prev)) <= tol * (1.0 + np.max(np.abs(val))):
            return val
        prev, n = val, 2 * n
    raise QuadratureError("Duhamel quadrature did not converge to tol=%g" % tol)


def ode_bootstrap(
    A: np.ndarray,
    Q: Callable[[np.ndarray, np.ndarray], np.ndarray],
    v0: np.ndarray,
    growth_rate: complex,
    epsilon: float,
    N: int,
    t_grid,
    rtol: float = 1e-12,
) -> BootstrapResult:
    """Build the order-N approximate solution started on an unstable mode.

    phi_1 = eps v0 e^{lambda t} and, for 2 <= i <= N,
    phi_i(t) = sum_{j+k=i} int_0^t e^{A(t-tau)} Q(phi_j, phi_k)(tau) dtau.
    The integrals are accumulated by integrating the equivalent triangular
    linear system  phi_i' = A phi_i + sum_{j+k=i} Q(phi_j, phi_k)  at tight
    tolerance; the rescaling psi_i = phi_i eps^{-i} removes the amplitude so
    a single integration serves every epsilon.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    v0 = np.atleast_1d(np.asarray(v0, dtype=complex))
    lam = complex(growth_rate)
    d = v0.size
    if A.shape != (d, d):
        raise InputError("A and v0 have incompatible shapes")
    if not (epsilon > 0):
        raise InputError("epsilon must be positive")
    if N < 2:
        raise ConfigurationError("order N must be at least 2")
    if lam.real <= 0:
        raise InputError("the growth rate must have positive real part")
    scale = np.max(np.abs(v0))
    if scale == 0:
        raise InputError("v0 must be nonzero")
    v0 = v0 / scale
    pair_res = np.max(np.abs(A @ v0 - lam * v0))
    if pair_res > 1e-10:
        raise InputError(
            "eigenpair residual %.3e exceeds 1e-10; (v0, growth_rate) is not "
            "an eigenpair of A" % pair_res
        )
    # energy growth constant: the largest eigenvalue of the symmetric part
    mu = float(np.max(np.linalg.eigvalsh(0.5 * (A + A.conj().T))))
    if 2 * (N + 1) * lam.real <= mu:
        raise ConfigurationError(
            "order N too small: need 2(N+1) Re(lambda) > energy constant %.3g" % mu
        )
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2 or np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
        raise InputError("t_grid must be increasing and nonnegative")
    t_max = float(t_grid[-1])

    def psi1(t):
        return v0 * np.exp(lam * t)

    n_extra = N - 1  # orders 2..N are integrated

    def unpack(y):
        return [y[i * d:(i + 1) * d] for i in range(n_extra)]

    def rhs(t, y):
        psis = [psi1(t)] + unpack(y)
        out = np.empty(n_extra * d, dtype=complex)
        for i in range(2, N + 1):
            f = A @ psis[i - 1]
            for j in range(1, i):
                f = f + np.asarray(Q(psis[j - 1], psis[i - j - 1]), dtype=complex)
            out[(i - 2) * d:(i - 1) * d] = f
        return out

    sol = solve_ivp(
        rhs,
        (0.0, t_max),
        np.zeros(n_extra * d, dtype=complex),
        method="DOP853",
        rtol=rtol,
        atol=1e-12,
        dense_output=True,
    )
    if not sol.success:
        raise NonconvergenceError("bootstrap term integration failed: " + sol.message)

    def psi_at(t):
        """psi_1..psi_N at a single time t, as a list of length-d arrays."""
        return [psi1(t)] + unpack(sol.sol(t))

    nt = t_grid.size
    psi_terms = [np.empty((nt, d), dtype=complex) for _ in range(N)]
    for a, t in enumerate(t_grid):
        for i, p in enumerate(psi_at(t)):
            psi_terms[i][a] = p

    # measured iteration constants (in psi scale they are epsilon-free)
    decay = np.exp(-lam.real * t_grid)
    C = tuple(
        float(np.max(np.max(np.abs(psi_terms[i]), axis=1) * decay ** (i + 1)))
        for i in range(N)
    )

    # smallest sigma with sum_{i>=2} C_i e^{-i sigma} <= e^{-sigma}/2
    sig_grid = np.linspace(0.0, 60.0, 6001)
    margin = sum(C[i] * np.exp(-(i) * sig_grid) for i in range(1, N))  # e^{sigma}*LHS
    ok = margin <= 0.5
    if not np.any(ok):
        raise NonconvergenceError("no sigma satisfies the amplitude-floor condition")
    sigma = float(sig_grid[np.argmax(ok)])
    sigma0 = 0.5 * np.exp(-sigma)
    T1 = -np.log(epsilon) / lam.real - sigma

    eps_pow = epsilon ** np.arange(1, N + 1)
    terms = tuple(eps_pow[i] * psi_terms[i] for i in range(N))
    approx = np.sum(np.stack(terms), axis=0)

    # truncation residual: the dropped quadratic interactions with j+k > N
    residual = np.empty(nt)
    for a, t in enumerate(t_grid):
        psis = psi_at(t)
        r = np.zeros(d, dtype=complex)
        for j in range(1, N + 1):
            for k in range(max(1, N + 1 - j), N + 1):
                r = r + eps_pow[j - 1] * eps_pow[k - 1] * np.asarray(
                    Q(psis[j - 1], psis[k - 1]), dtype=complex
                )
        residual[a] = np.max(np.abs(r))

    amp = np.max(np.abs(approx), axis=1)
    window = (amp <= 0.1) & (residual > 0)
    if np.any(window):
        # the asymptotic order-(N+1) growth sets in once the residual is
        # within a few decades of its window maximum; earlier samples mix
        # lower exponentials and would bias the fitted slope
        window &= residual >= 1e-3 * np.max(residual[window])
    if np.count_nonzero(window) >= 5:
        slope = float(np.polyfit(t_grid[window], np.log(residual[window]), 1)[0])
    else:
        slope = float("nan")

    # observed escape time: first crossing of the amplitude floor sigma0
    def amp_at(t):
        return float(np.max(np.abs(np.sum(
            [eps_pow[i] * p for i, p in enumerate(psi_at(t))], axis=0))))

    escape = float("nan")
    ts = np.linspace(0.0, t_max, 4001)
    vals = np.array([amp_at(t) for t in ts])
    above = vals >= sigma0
    if above[0]:
        escape = 0.0
    elif np.any(above):
        b = int(np.argmax(above))
        lo, hi = ts[b - 1], ts[b]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if amp_at(mid) >= sigma0:
                hi = mid
            else:
                lo = mid
        escape = 0.5 * (lo + hi)

    return BootstrapResult(
        epsilon=float(epsilon),
        growth_rate=lam,
        t_grid=t_grid,
        terms=terms,
        C=C,
        sigma=sigma,
        sigma0=float(sigma0),
        T1=float(T1),
        approx=approx,
        residual=residual,
        residual_slope=slope,
        escape_time=escape,
        energy_constant=mu,
    )


# ----------------------------------------------------------------------------
# Riccati scalar model
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class RiccatiValue:
    """Value of the scalar model phi' = eps phi + alpha phi^2 at one time.

    ``blown_up`` marks evaluation at or past the blow-up time; ``t_star`` is
    that time when alpha > 0, ``limit`` the t -> infinity saturation value
    when alpha < 0.
    """

    value: float
    blown_up: bool
    t_star: float | None
    limit: float | None


def _riccati_formula(epsilon, alpha, phi0, t):
    """Closed-form solution; accepts complex t (for derivative checks).

    For growing arguments the expression is rearranged with e^{-eps t} so
    that saturation at large t does not overflow."""
    if epsilon * np.real(t) > 0:
        em = np.exp(-epsilon * t)
        return epsilon * phi0 / ((epsilon + alpha * phi0) * em - alpha * phi0)
    e = np.exp(epsilon * t)
    return epsilon * phi0 * e / (epsilon - alpha * phi0 * (e - 1.0))


def riccati_exact(epsilon: float, alpha: float, phi0: float, t: float) -> RiccatiValue:
    """Exact solution phi(t) = eps phi0 e^{eps t} / (eps - alpha phi0 (e^{eps t}-1))."""
    if not (phi0 > 0):
        raise InputError("phi0 must be positive")
    if epsilon == 0:
        raise InputError("epsilon must be nonzero")
    t_star = None
    limit = None
    if alpha > 0:
        t_star = np.log1p(epsilon / (alpha * phi0)) / epsilon
        if t >= t_star:
            return RiccatiValue(float("inf"), True, float(t_star), None)
    elif alpha < 0:
        limit = -epsilon / alpha
    if alpha == 0:
        value = phi0 * np.exp(epsilon * t)
    else:
        value = _riccati_formula(epsilon, alpha, phi0, t)
    return RiccatiValue(
        float(value),
        False,
        None if t_star is None else float(t_star),
        None if limit is None else float(limit),
    )


# ----------------------------------------------------------------------------
# Hopf toy model: exact Fourier recurrence and generator majorant
# ----------------------------------------------------------------------------

def _fourier_deriv(c: dict[int, complex]) -> dict[int, complex]:
    return {m: 1j * m * v for m, v in c.items() if m != 0}


def _fourier_conv(a: dict[int, complex], b: dict[int, complex]) -> dict[int, complex]:
    out: dict[int, complex] = {}
    for m1, v1 in a.items():
        for m2, v2 in b.items():
            out[m1 + m2] = out.get(m1 + m2, 0.0) + v1 * v2
    return out


def _fourier_eval(c: dict[int, complex], z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    out = np.zeros(z.shape, dtype=complex)
    for m, v in c.items():
        out += v * np.exp(1j * m * z)
    return out


_Z_GRID = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)


@dataclass
class HopfSeries:
    """Instability series u(t, z) = sum_n e^{n alpha t} u_n(z) of
    u_t + u u_z = alpha u, with u_n a trigonometric polynomial stored as a
    Fourier-coefficient dict.  Majorant fields are filled by
    ``hopf_majorant``: ``majorant[k][m] = sup |d^m u_k| for m <= N-k`` (the
    truncated generator table), ``M0 = Gen(u_1)(eta0)``, and ``phi_t`` the
    ramp 1 - 3 M0 t / (alpha eta0)."""

    alpha: float
    terms: tuple[dict[int, complex], ...]
    majorant: list[np.ndarray] | None = field(default=None)
    M0: float | None = field(default=None)
    eta0: float | None = field(default=None)
    phi_t: Callable[[float], float] | None = field(default=None)

    @property
    def order(self) -> int:
        return len(self.terms)

    def evaluate(self, n: int, z) -> np.ndarray:
        """u_n at points z (real part; the series of a real u_1 is real)."""
        return _fourier_eval(self.terms[n - 1], z).real

    def sup_norm(self, n: int) -> float:
        return float(np.max(np.abs(_fourier_eval(self.terms[n - 1], _Z_GRID))))

    def sup_ratio(self, n_min: int = 5) -> float:
        """Bound R on successive sup-norm ratios; the series converges for
        e^{alpha t} < 1/R."""
        norms = [self.sup_norm(n) for n in range(1, self.order + 1)]
        ratios = [
            norms[n] / norms[n - 1]
            for n in range(n_min, self.order)
            if norms[n - 1] > 0
        ]
        if not ratios:
            raise InputError("not enough nonzero terms for a ratio estimate")
        return float(max(ratios))

    def recurrence_residual(self, n: int) -> float:
        """sup |(n-1) alpha u_n + sum_k u_k d_z u_{n-k}| from exact coefficients."""
        acc = {m: (n - 1) * self.alpha * v for m, v in self.terms[n - 1].items()}
        for k in range(1, n):
            for m, v in _fourier_conv(
                self.terms[k - 1], _fourier_deriv(self.terms[n - k - 1])
            ).items():
                acc[m] = acc.get(m, 0.0) + v
        return float(sum(abs(v) for v in acc.values()))

    def partial_sum(self, t: float, z, N: int | None = None) -> np.ndarray:
        N = self.order if N is None else N
        z = np.asarray(z, dtype=float)
        out = np.zeros(z.shape, dtype=complex)
        for n in range(1, N + 1):
            out += np.exp(n * self.alpha * t) * _fourier_eval(self.terms[n - 1], z)
        return out.real

    def residual_sup(self, t: float, N: int | None = None) -> float:
        """sup_z of the defect of the order-N partial sum in u_t + u u_z = alpha u.

        Only dropped interactions j + k > N survive, so the defect is
        sum_{j,k<=N, j+k>N} e^{(j+k) alpha t} u_j d_z u_k.
        """
        N = self.order if N is None else N
        acc: dict[int, complex] = {}
        for j in range(1, N + 1):
            for k in range(max(1, N + 1 - j), N + 1):
                w = np.exp((j + k) * self.alpha * t)
                for m, v in _fourier_conv(
                    self.terms[j - 1], _fourier_deriv(self.terms[k - 1])
                ).items():
                    acc[m] = acc.get(m, 0.0) + w * v
        return float(np.max(np.abs(_fourier_eval(acc, _Z_GRID))))


def hopf_series(u1: Mapping[int, complex], alpha: float, N: int) -> HopfSeries:
    """Solve (n-1) alpha u_n = - sum_{1<=k<=n-1} u_k d_z u_{n-k} exactly.

    ``u1`` maps Fourier mode numbers to coefficients (cos z is
    {1: 0.5, -1: 0.5}).  The arithmetic is exact on trigonometric
    polynomials; mode support grows linearly with n.
    """
    if not (alpha > 0):
        raise ConfigurationError("alpha must be positive")
    if N < 1:
        raise ConfigurationError("N must be at least 1")
    first = {int(m): complex(v) for m, v in dict(u1).items() if v != 0}
    terms = [first]
    for n in range(2, N + 1):
        acc: dict[int, complex] = {}
        for k in range(1, n):
            for m, v in _fourier_conv(
                terms[k - 1], _fourier_deriv(terms[n - k - 1])
            ).items():
                acc[m] = acc.get(m, 0.0) + v
        terms.append({m: -v / ((n - 1) * alpha) for m, v in acc.items() if v != 0})
    return HopfSeries(alpha=float(alpha), terms=tuple(terms))


def _poly_eval(coef: np.ndarray, z) -> np.ndarray:
    """Evaluate sum_m coef[m] z^m / m!."""
    z = np.asarray(z, dtype=float)
    out = np.zeros(z.shape)
    fac = 1.0
    for m, c in enumerate(coef):
        if m > 0:
            fac *= m
        out = out + c * z**m / fac
    return out


def hopf_majorant(
    series: HopfSeries,
    eta0: float,
    t_max: float,
    n_characteristics: int = 20,
    n_steps: int = 400,
    grid_shape: tuple[int, int] = (33, 33),
    tol: float = 1e-10,
) -> dict:
    """Build and verify the truncated generator majorant of a Hopf series.

    G_N(t, z) = sum_{k<=N} Gen_{N-k}(u_k)(z) t^{k-1}, where Gen_M(u)(z) =
    sum_{m<=M} sup|d^m u| z^m/m!.  All sup norms are maxima over one shared
    z-grid, which makes the differential inequality
    alpha dG/dt - G dG/dz <= 0 hold exactly (to rounding) whenever the
    recurrence residuals vanish.  The report also traces K_N = G_N(t,
    phi(t) X(t)) along characteristics of the ramped field and checks it is
    nonincreasing and bounded by M0 = Gen(u_1)(eta0) on the guaranteed
    window t <= alpha eta0 / (6 M0)."""
    if not (eta0 > 0) or not (t_max > 0):
        raise WindowError("eta0 and t_max must be positive")
    N = series.order
    alpha = series.alpha

    # shared-grid derivative sup norms: gens[k-1][m] = sup |d^m u_k|, m <= N-k
    gens: list[np.ndarray] = []
    for k in range(1, N + 1):
        c = series.terms[k - 1]
        row = np.empty(N - k + 1)
        for m in range(N - k + 1):
            dm = {mm: v * (1j * mm) ** m for mm, v in c.items()}
            row[m] = np.max(np.abs(_fourier_eval(dm, _Z_GRID))) if dm else 0.0
        gens.append(row)
    M0 = float(_poly_eval(gens[0], np.array(eta0)))
    if not np.isfinite(M0) or M0 <= 0:
        raise WindowError("Gen(u_1) is not finite and positive on [0, eta0]")

    def G(t, z):
        return sum(t ** (k - 1) * _poly_eval(gens[k - 1], z) for k in range(1, N + 1))

    def G_t(t, z):
        return sum(
            (k - 1) * t ** (k - 2) * _poly_eval(gens[k - 1], z)
            for k in range(2, N + 1)
        )

    def G_z(t, z):
        return sum(
            t ** (k - 1) * _poly_eval(gens[k - 1][1:], z) for k in range(1, N + 1)
        )

    tg = np.linspace(0.0, t_max, grid_shape[0])
    zg = np.linspace(0.0, eta0, grid_shape[1])
    T, Z = np.meshgrid(tg, zg, indexing="ij")
    res = alpha * G_t(T, Z) - G(T, Z) * G_z(T, Z)
    gate = tol * (1.0 + np.abs(G(T, Z) * G_z(T, Z)))
    max_residual = float(np.max(res))
    residual_ok = bool(np.all(res <= gate))

    # ramp and guaranteed window
    T_ramp = alpha * eta0 / (6.0 * M0)

    def phi(t):
        return 1.0 - 3.0 * M0 * t / (alpha * eta0)

    dphi = -3.0 * M0 / (alpha * eta0)
    T_c = min(t_max, T_ramp)
    phi_min = phi(T_c)
    phi_ok = bool(phi_min >= 0.5 - 1e-12)

    # characteristics of the ramped field H(t, z) = G(t, phi(t) z):
    # dX/dt = -H/(alpha phi) - X phi'/phi keeps K = H(t, X) nonincreasing.
    def xdot(t, x):
        p = phi(t)
        return -G(t, p * x) / (alpha * p) - x * dphi / p

    dt = T_c / n_steps
    z0s = np.linspace(eta0 / n_characteristics, eta0, n_characteristics)
    K_max_increase = 0.0
    K_max = 0.0
    paths = []
    for z0 in z0s:
        x = float(z0)
        t = 0.0
        K_prev = float(G(0.0, phi(0.0) * x))
        K_max = max(K_max, K_prev)
        path = [(t, x, K_prev)]
        for _ in range(n_steps):
            k1 = xdot(t, x)
            k2 = xdot(t + 0.5 * dt, x + 0.5 * dt * k1)
            k3 = xdot(t + 0.5 * dt, x + 0.5 * dt * k2)
            k4 = xdot(t + dt, x + dt * k3)
            x = x + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            t = t + dt
            if x < 0.0:
                break  # the characteristic has left the window through z = 0
            K = float(G(t, phi(t) * x))
            K_max_increase = max(K_max_increase, K - K_prev)
            K_max = max(K_max, K)
            K_prev = K
            path.append((t, x, K))
        paths.append(np.array(path))

    K_monotone_ok = bool(K_max_increase <= tol * (1.0 + M0))
    K_bound_ok = bool(K_max <= M0 * (1.0 + 1e-12) + tol)

    series.majorant = gens
    series.M0 = M0
    series.eta0 = float(eta0)
    series.phi_t = phi

    return {
        "order": N,
        "M0": M0,
        "eta0": float(eta0),
        "T_ramp": float(T_ramp),
        "max_residual": max_residual,
        "residual_ok": residual_ok,
        "phi_min": float(phi_min),
        "phi_ok": phi_ok,
        "K_max": float(K_max),
        "K_max_increase": float(K_max_increase),
        "K_monotone_ok": K_monotone_ok,
        "K_bound_ok": K_bound_ok,
        "characteristics": paths,
    }


# ----------------------------------------------------------------------------
# Truncated Euler instability series (Fourier-Galerkin)
# ----------------------------------------------------------------------------

def _toeplitz_conv(coef_hat: np.ndarray, m_list: np.ndarray) -> np.ndarray:
    """Matrix of multiplication by a periodic function on Fourier modes m_list.

    coef_hat are fft coefficients (index = mode, modulo length); mode
    differences beyond the Nyquist range carry no coefficient and stay 0."""
    n = len(coef_hat)
    M = np.zeros((m_list.size, m_list.size), dtype=complex)
    for a, ma in enumerate(m_list):
        for b, mb in enumerate(m_list):
            diff = ma - mb
            if -(n // 2) < diff < n // 2:
                M[a, b] = coef_hat[diff % n]
    return M


def _shear_block(U_hat, Upp_hat, kx: float, m_list: np.ndarray) -> np.ndarray:
    """Fourier-Galerkin block of the vorticity linearization at x-wavenumber kx.

    L w = U d_x w + v d_y Omega_s with Omega_s = -U', v = d_x psi and
    Delta psi = w, which reduces to  L = i kx (C_U + C_{U''} D),
    D = diag(1/(kx^2 + m^2))."""
    D = np.diag(1.0 / (kx**2 + m_list.astype(float) ** 2))
    return 1j * kx * (_toeplitz_conv(U_hat, m_list) + _toeplitz_conv(Upp_hat, m_list) @ D)


def _unstable_eig(U_hat, Upp_hat, kx: float, m_list: np.ndarray):
    """Most unstable temporal eigenvalue of d_t w = -L w on the given modes."""
    L = _shear_block(U_hat, Upp_hat, kx, m_list)
    vals, vecs = np.linalg.eig(-L)
    i = int(np.argmax(vals.real))
    return vals[i], vecs[:, i]


def euler_series(
    profile: ShearProfile,
    N: int = 4,
    modes: int = 16,
    kx0: float = 0.5,
) -> dict:
    """Truncated instability series of 2D Euler about a periodic shear flow.

    The base flow (U(y), 0) lives on the torus [0, 2 pi / kx0) x [0, 2 pi).
    The x-wavenumber-kx0 unstable eigenvalue alpha of the vorticity
    linearization is found by a Fourier-Galerkin eigensolve (with a
    doubled-truncation re-solve as oracle); omega_1 is the real part of the
    unstable mode and higher terms solve
        (alpha n + L) omega_n = sum_{j+k=n} Q(u_j, omega_k),
    with u_j recovered from omega_j by the Biot-Savart law and
    Q(u, w) = -(u . grad) w evaluated pseudo-spectrally with 2/3 dealiasing.
    """
    if profile.domain != TORUS:
        raise ConfigurationError("euler_series needs a periodic (torus) profile")
    if N < 1 or modes < 8:
        raise ConfigurationError("need N >= 1 and modes >= 8")
    Ng = int(modes)
    y = 2.0 * np.pi * np.arange(Ng) / Ng
    U_hat = np.fft.fft(profile.U(y)) / Ng
    Upp_hat = np.fft.fft(profile.d2U(y)) / Ng

    # unstable eigenvalue on the grid's symmetric y-mode set (the Nyquist
    # mode is excluded so the conjugate partner of the eigenvector is
    # representable), with a doubled mode range as the truncation oracle
    m_sym = np.arange(-(Ng // 2 - 1), Ng // 2)
    alpha1, vec = _unstable_eig(U_hat, Upp_hat, kx0, m_sym)
    alpha2, _ = _unstable_eig(U_hat, Upp_hat, kx0, np.arange(-(Ng - 2), Ng - 1))
    if alpha1.real <= 1e-8:
        raise NotUnstableError(
            "no unstable eigenvalue at x-wavenumber %.3g (max growth %.3e)"
            % (kx0, alpha1.real)
        )
    alpha = complex(alpha1)
    alpha_gap = abs(alpha1 - alpha2)

    # spectral machinery on the Ng x Ng grid (axis 0 = x, axis 1 = y)
    px = np.fft.fftfreq(Ng, d=1.0 / Ng).astype(int)
    my = np.fft.fftfreq(Ng, d=1.0 / Ng).astype(int)
    KX = kx0 * px[:, None] * np.ones((1, Ng))
    KY = np.ones((Ng, 1)) * my[None, :].astype(float)
    K2 = KX**2 + KY**2
    K2[0, 0] = 1.0  # the zero mode of psi is irrelevant (set to 0 below)
    cutoff = Ng // 3
    dealias = (np.abs(px)[:, None] <= cutoff) & (np.abs(my)[None, :] <= cutoff)

    def velocity(w_hat):
        """Biot-Savart: u = (-psi_y, psi_x) with Delta psi = w."""
        psi = -w_hat / K2
        psi[0, 0] = 0.0
        return -1j * KY * psi, 1j * KX * psi

    def Q(wu_hat, w_hat):
        """Q(u, w) = -(u . grad) w for u derived from vorticity wu_hat."""
        ux, uy = velocity(wu_hat)
        fields = [np.fft.ifft2(h * dealias) for h in
                  (ux, uy, 1j * KX * w_hat, 1j * KY * w_hat)]
        out = -np.fft.fft2(fields[0] * fields[2] + fields[1] * fields[3])
        return out * dealias

    # omega_1: embed the p = +1 eigenvector and its conjugate, then take
    # the real field and normalise its sup to 1
    w1 = np.zeros((Ng, Ng), dtype=complex)
    for c, m in zip(vec, m_sym):
        w1[1, m % Ng] = c
        w1[(-1) % Ng, (-m) % Ng] = np.conj(c)
    field1 = np.fft.ifft2(w1).real
    w1 = np.fft.fft2(field1 / np.max(np.abs(field1)))

    # eigen-equation residual of the real mode, measured in the Galerkin
    # truncation in which it was computed (both x-wavenumber blocks)
    slots = m_sym % Ng
    eig_residual = 0.0
    for p, kx in ((1, kx0), (Ng - 1, -kx0)):
        Lp = _shear_block(U_hat, Upp_hat, kx, m_sym)
        row = w1[p, slots]
        eig_residual = max(
            eig_residual, float(np.max(np.abs(alpha * row + Lp @ row)))
        )
    eig_residual /= float(np.max(np.abs(w1)))

    # per-x-wavenumber dense blocks for the shifted solves
    blocks = {}
    for p in px:
        kx = kx0 * p
        if kx == 0.0:
            blocks[p] = np.zeros((Ng, Ng), dtype=complex)
        else:
            blocks[p] = _shear_block(U_hat, Upp_hat, kx, my)

    omega = [w1]
    h1_ratios = []
    for n in range(2, N + 1):
        rhs_hat = np.zeros((Ng, Ng), dtype=complex)
        for j in range(1, n):
            rhs_hat += Q(omega[j - 1], omega[n - j - 1])
        w_hat = np.zeros((Ng, Ng), dtype=complex)
        lam = alpha * n
        for a, p in enumerate(px):
            M = lam * np.eye(Ng) + blocks[p]
            sv_min = np.min(np.linalg.svd(M, compute_uv=False))
            if sv_min < 1e-10 * np.linalg.norm(M, np.inf):
                raise ResonanceError(
                    "shifted operator singular at order n=%d, x-wavenumber %g"
                    % (n, kx0 * p)
                )
            w_hat[a] = np.linalg.solve(M, rhs_hat[a])
        omega.append(w_hat)
        nrm_f = np.linalg.norm(rhs_hat)
        h1_ratios.append(
            float(np.linalg.norm(w_hat) * abs(lam) / nrm_f) if nrm_f > 0 else 0.0
        )

    sup_norms = [float(np.max(np.abs(np.fft.ifft2(w).real))) for w in omega]
    coeff_l1 = [float(np.sum(np.abs(w)) / Ng**2) for w in omega]

    # partial-sum stabilisation at the amplitude e^{Re(alpha) t} = 0.01
    t_check = np.log(0.01) / alpha.real

    def partial(K):
        acc = np.zeros((Ng, Ng), dtype=complex)
        for n in range(1, K + 1):
            acc += np.exp(n * alpha * t_check) * omega[n - 1]
        return np.fft.ifft2(acc).real

    partial_change = float("nan")
    if N >= 4:
        s3, s4 = partial(3), partial(4)
        partial_change = float(np.max(np.abs(s4 - s3)) / np.max(np.abs(s3)))

    return {
        "alpha_eig": alpha,
        "alpha_gap": float(alpha_gap),
        "kx0": float(kx0),
        "modes": Ng,
        "omega_hat": omega,
        "sup_norms": sup_norms,
        "coeff_l1": coeff_l1,
        "h1_ratios": h1_ratios,
        "eigen_residual": eig_residual,
        "partial_sum_change": partial_change,
        "t_check": float(t_check),
    }

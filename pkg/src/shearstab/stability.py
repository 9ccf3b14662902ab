"""Rayleigh and Orr-Sommerfeld eigenproblems and marginal-stability branches.

Both problems are posed as generalized pencils A phi = c B phi with the
boundary rows written into A (and zeroed in B), so the near-singular mass
side is never inverted.  Spurious continuous-spectrum modes are filtered by
an operator-scaled residual gate plus a Chebyshev-tail smoothness check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.fft import dct

from .errors import (
    ConfigurationError,
    CriticalLayerError,
    InputError,
    NumericalError,
    WindowError,
)
from .profiles import ShearProfile
from .spectral import SpectralDiscretization, bc_rows, build_grid

RESIDUAL_GATE = 1e-6
TAIL_GATE = 1e-3

BRANCH_LOWER = "lower"
BRANCH_UPPER = "upper"


@dataclass(frozen=True)
class EigenSolution:
    """Accepted discrete eigenpairs of a stability pencil at one (alpha, Re)."""

    alpha: float
    viscosity_or_Re: float
    eigenvalues: tuple          # phase speeds c, sorted by Im(c) descending
    modes: np.ndarray           # columns phi, unit max-norm, aligned with eigenvalues
    residuals: tuple            # operator-scaled pencil residuals per pair
    n_rejected: int = 0         # raw eigenvalues dropped by the filters

    def max_growth(self) -> float:
        """Largest Im(c) over accepted modes (-inf when none survive)."""
        if not self.eigenvalues:
            return -np.inf
        return max(c.imag for c in self.eigenvalues)


@dataclass
class NeutralBranch:
    """One side of the marginal-stability curve alpha(Re)."""

    points: list                # (Re, alpha), sorted ascending in Re
    side: str                   # "lower" or "upper"
    fit: dict | None = None     # log-log slope/intercept metadata, set by fit_exponents
    subcritical_Re: list = field(default_factory=list)


def _profile_diagonals(profile: ShearProfile, grid: SpectralDiscretization):
    y = grid.nodes
    finite = np.isfinite(y)
    yf = np.where(finite, y, 0.0)
    U = np.where(finite, profile.U(yf), profile.U(np.array(1e12)))
    d2U = np.where(finite, profile.d2U(yf), 0.0)
    return U, d2U


def _cheb_tail_fraction(phi: np.ndarray) -> float:
    """Fraction of Chebyshev-coefficient mass in the top third of the spectrum."""
    N = len(phi) - 1

    def coeffs(v):
        a = dct(v, type=1) / N
        a[0] /= 2.0
        a[-1] /= 2.0
        return a

    a = coeffs(np.ascontiguousarray(phi.real)) + 1j * coeffs(np.ascontiguousarray(phi.imag))
    mag = np.abs(a)
    total = mag.sum()
    if total == 0:
        return 1.0
    return float(mag[2 * N // 3:].sum() / total)


def _refine_eigenpair(A, B, c, phi, scale, iters=2):
    """Rayleigh-quotient inverse iteration on the pencil.

    QZ backward error grows with ||A|| and pollutes eigenvalues of large
    ill-conditioned pencils; a couple of shift-invert steps with a two-sided
    Rayleigh quotient restores them to the accuracy of the matrix entries.
    Falls back to the input pair when a solve degenerates or the update
    jumps away from the starting eigenvalue.
    """
    c0 = c
    for _ in range(iters):
        K = A - c * B
        try:
            lu = scipy.linalg.lu_factor(K)
            x = scipy.linalg.lu_solve(lu, B @ phi)
            v = x / np.linalg.norm(x)
            w = scipy.linalg.lu_solve(
                scipy.linalg.lu_factor(K.conj().T), B.conj().T @ v
            )
        except (scipy.linalg.LinAlgError, ValueError, FloatingPointError):
            break
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(w)):
            break
        den = w.conj() @ (B @ v)
        if abs(den) == 0.0:
            break
        c_new = (w.conj() @ (A @ v)) / den
        if not np.isfinite(c_new) or abs(c_new - c0) > 1e-2 * (1.0 + abs(c0)):
            break
        c, phi = complex(c_new), v
    return c, phi


def _solve_pencil(A, B, alpha, param, scale):
    try:
        cs, V = scipy.linalg.eig(A, B)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(
            f"generalized eigensolver failed at alpha={alpha}, parameter={param}; "
            f"cond(A)~{np.linalg.cond(A):.2e}"
        ) from exc
    accepted = []
    n_rejected = 0
    for k in range(len(cs)):
        c = cs[k]
        if not np.isfinite(c):
            continue  # boundary-row artifacts, not physical rejections
        phi = V[:, k]
        nrm = np.linalg.norm(phi)
        res = np.linalg.norm(A @ phi - c * (B @ phi)) / (nrm * (scale + abs(c)))
        if res > RESIDUAL_GATE or _cheb_tail_fraction(phi) > TAIL_GATE:
            n_rejected += 1
            continue
        accepted.append((c, phi, res))
    accepted.sort(key=lambda t: -t[0].imag)
    # polish the leading (least damped) modes, the ones callers consume
    for k in range(min(3, len(accepted))):
        c, phi, res = accepted[k]
        c2, phi2 = _refine_eigenpair(A, B, c, phi, scale)
        res2 = np.linalg.norm(A @ phi2 - c2 * (B @ phi2)) / (
            np.linalg.norm(phi2) * (scale + abs(c2))
        )
        if res2 <= res:
            accepted[k] = (c2, phi2, res2)
    accepted.sort(key=lambda t: -t[0].imag)
    accepted = [(c, phi / phi[np.argmax(np.abs(phi))], res)
                for c, phi, res in accepted]
    eigenvalues = tuple(complex(c) for c, _, _ in accepted)
    modes = (np.stack([p for _, p, _ in accepted], axis=1)
             if accepted else np.zeros((A.shape[0], 0), dtype=complex))
    residuals = tuple(float(r) for _, _, r in accepted)
    return eigenvalues, modes, residuals, n_rejected


def _install_bc(A, B, grid, bc):
    # constraint rows are scaled up to the operator magnitude: the QZ backward
    # error is relative to ||A||, so small rows would be satisfied only loosely
    scale = np.linalg.norm(A, np.inf)
    for i, row in bc_rows(grid, bc):
        A[i, :] = row * (scale / np.linalg.norm(row))
        B[i, :] = 0.0
    return A, B


def rayleigh_spectrum(profile: ShearProfile, alpha: float, grid: SpectralDiscretization) -> EigenSolution:
    """Discrete spectrum of (U - c)(D2 - alpha^2) phi = U'' phi.

    Dirichlet/decay conditions at both ends.  Continuous-spectrum artifacts
    (rough modes with c inside range(U)) are rejected by the smoothness gate.
    """
    if alpha <= 0:
        raise ConfigurationError("alpha must be positive")
    if grid.domain != profile.domain:
        raise ConfigurationError(
            f"grid domain {grid.domain!r} does not match profile domain {profile.domain!r}"
        )
    U, d2U = _profile_diagonals(profile, grid)
    M = grid.D2 - alpha**2 * np.eye(grid.n_nodes)
    A = (U[:, None] * M - np.diag(d2U)).astype(complex)
    B = M.astype(complex)
    _install_bc(A, B, grid, "dirichlet")
    scale = np.linalg.norm(A, np.inf) / max(np.linalg.norm(B, np.inf), 1.0)
    eigenvalues, modes, residuals, nrej = _solve_pencil(A, B, alpha, "inviscid", scale)
    return EigenSolution(alpha, np.inf, eigenvalues, modes, residuals, nrej)


def rayleigh_resolvent(
    profile: ShearProfile,
    alpha: float,
    c: complex,
    source,
    grid: SpectralDiscretization,
) -> np.ndarray:
    """Solve (U - c)(D2 - alpha^2) phi - U'' phi = source with Dirichlet ends.

    ``source`` may be a callable of z or an array on the grid nodes.
    Raises a critical-layer error when c comes within 1e-8 of U at a node.
    """
    if alpha <= 0:
        raise ConfigurationError("alpha must be positive")
    U, d2U = _profile_diagonals(profile, grid)
    finite = grid.finite_mask()
    gap = np.min(np.abs(U[finite] - c))
    if gap < 1e-8:
        raise CriticalLayerError(
            f"|U(z) - c| = {gap:.3e} at a collocation node: critical-layer degeneracy"
        )
    M = grid.D2 - alpha**2 * np.eye(grid.n_nodes)
    L = ((U - c)[:, None] * M - np.diag(d2U)).astype(complex)
    if callable(source):
        rhs = np.where(finite, np.asarray(source(np.where(finite, grid.nodes, 0.0)), dtype=complex), 0.0)
    else:
        rhs = np.asarray(source, dtype=complex).copy()
    for i, row in bc_rows(grid, "dirichlet"):
        L[i, :] = row
        rhs[i] = 0.0
    return np.linalg.solve(L, rhs)


def os_spectrum(
    profile: ShearProfile,
    alpha: float,
    Re: float,
    grid: SpectralDiscretization,
) -> EigenSolution:
    """Viscous spectrum of (U - c)(D2 - a^2) phi - U'' phi = eps (D2 - a^2)^2 phi.

    eps = nu / (i alpha) with nu = 1/Re; clamped/decay boundary conditions.
    Warns when N is below the critical-layer resolution guidance 4 Re^{1/4}.
    """
    if alpha <= 0 or Re <= 0:
        raise ConfigurationError("alpha and Re must be positive")
    if grid.domain != profile.domain:
        raise ConfigurationError(
            f"grid domain {grid.domain!r} does not match profile domain {profile.domain!r}"
        )
    n_guide = 4.0 * Re**0.25
    if grid.N < n_guide:
        warnings.warn(
            f"N={grid.N} below resolution guidance {n_guide:.0f} at Re={Re:.3g}",
            stacklevel=2,
        )
    eps = 1.0 / (1j * alpha * Re)
    U, d2U = _profile_diagonals(profile, grid)
    ident = np.eye(grid.n_nodes)
    M = grid.D2 - alpha**2 * ident
    biharm = grid.D4 - 2.0 * alpha**2 * grid.D2 + alpha**4 * ident
    A = (U[:, None] * M - np.diag(d2U) - eps * biharm).astype(complex)
    B = M.astype(complex)
    _install_bc(A, B, grid, "clamped")
    scale = np.linalg.norm(A, np.inf) / max(np.linalg.norm(B, np.inf), 1.0)
    eigenvalues, modes, residuals, nrej = _solve_pencil(A, B, alpha, Re, scale)
    return EigenSolution(alpha, float(Re), eigenvalues, modes, residuals, nrej)


def _default_grid(profile: ShearProfile, Re: float, N: int | None, map_scale: float):
    if N is None:
        N = max(128, 2 * int(np.ceil(2.0 * Re**0.25)))
    return build_grid(N, profile.domain, map_scale=map_scale)


def max_growth_rate(profile, alpha, Re, grid) -> float:
    """max Im(c) of the viscous spectrum; -1 when no mode passes the filters."""
    sol = os_spectrum(profile, alpha, Re, grid)
    g = sol.max_growth()
    return g if np.isfinite(g) else -1.0


def neutral_curve(
    profile: ShearProfile,
    Re_list,
    alpha_window,
    N: int | None = None,
    map_scale: float = 2.0,
    n_scan: int = 16,
    alpha_tol: float = 1e-4,
) -> tuple[NeutralBranch, NeutralBranch]:
    """Lower/upper marginal branches alpha(Re) by bisection on max Im(c).

    Each Re in ``Re_list`` is scanned over ``alpha_window``; when an unstable
    band is found its edges are bisected to ``alpha_tol``.  Re values with no
    unstable alpha are recorded on the branches as below criticality.
    """
    Re_list = [float(r) for r in Re_list]
    if sorted(Re_list) != Re_list:
        raise ConfigurationError("Re_list must be sorted ascending")
    a_lo, a_hi = float(alpha_window[0]), float(alpha_window[1])
    if not (0 < a_lo < a_hi):
        raise ConfigurationError("alpha window must be positive and increasing")

    lower = NeutralBranch([], BRANCH_LOWER)
    upper = NeutralBranch([], BRANCH_UPPER)

    for Re in Re_list:
        grid = _default_grid(profile, Re, N, map_scale)
        alphas = np.linspace(a_lo, a_hi, n_scan)
        g = np.array([max_growth_rate(profile, a, Re, grid) for a in alphas])
        if np.all(g <= 0):
            lower.subcritical_Re.append(Re)
            upper.subcritical_Re.append(Re)
            continue
        if g[0] > 0 or g[-1] > 0:
            raise WindowError(
                f"unstable band touches the alpha window edge at Re={Re:.6g}; "
                f"scan trace: {list(zip(alphas.tolist(), g.tolist()))}"
            )
        kpos = np.flatnonzero(g > 0)
        lo_bracket = (alphas[kpos[0] - 1], alphas[kpos[0]])
        up_bracket = (alphas[kpos[-1]], alphas[kpos[-1] + 1])

        def bisect(a, b, rising):
            while b - a > alpha_tol:
                m = 0.5 * (a + b)
                gm = max_growth_rate(profile, m, Re, grid)
                if (gm > 0) == rising:
                    b = m
                else:
                    a = m
            return 0.5 * (a + b)

        lower.points.append((Re, bisect(*lo_bracket, rising=True)))
        upper.points.append((Re, bisect(*up_bracket, rising=False)))
    return lower, upper


def fit_exponents(branch: NeutralBranch, Re_window) -> tuple[float, float, float]:
    """Least-squares slope/intercept of log alpha vs log Re inside a window.

    Stores the fit metadata on the branch and returns (slope, intercept, r2).
    """
    r_lo, r_hi = float(Re_window[0]), float(Re_window[1])
    pts = [(re, a) for re, a in branch.points if r_lo <= re <= r_hi]
    if len(pts) < 4:
        raise InputError(
            f"need at least 4 branch points inside Re window [{r_lo:g}, {r_hi:g}], got {len(pts)}"
        )
    x = np.log(np.array([re for re, _ in pts]))
    y = np.log(np.array([a for _, a in pts]))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid**2) / ss_tot) if ss_tot > 0 else 1.0
    branch.fit = {
        "slope": float(slope),
        "intercept": float(intercept),
        "r2": r2,
        "Re_window": (r_lo, r_hi),
    }
    return float(slope), float(intercept), r2

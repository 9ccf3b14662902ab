import numpy as np
import pytest

from shearstab.errors import ConfigurationError, CriticalLayerError, InputError, WindowError
from shearstab.profiles import CHANNEL, HALF_LINE, ShearProfile, make_profile
from shearstab.spectral import build_grid
from shearstab.stability import (
    NeutralBranch,
    fit_exponents,
    neutral_curve,
    os_spectrum,
    rayleigh_resolvent,
    rayleigh_spectrum,
)


@pytest.fixture(scope="module")
def half_grid():
    return build_grid(128, HALF_LINE, map_scale=4.0)


@pytest.fixture(scope="module")
def half_grid_fine():
    return build_grid(256, HALF_LINE, map_scale=4.0)


class TestRayleighSpectrum:
    def test_exponential_stable(self, half_grid):
        # no inflection point: every accepted mode is neutral or damped
        sol = rayleigh_spectrum(make_profile("exponential"), 1.0, half_grid)
        assert all(c.imag <= 1e-6 for c in sol.eigenvalues)

    def test_tanh_unstable_mode(self):
        p = make_profile("tanh", z0=1.0)
        sol = rayleigh_spectrum(p, 0.5, build_grid(192, HALF_LINE, map_scale=4.0))
        unstable = [c for c in sol.eigenvalues if c.imag > 1e-6]
        assert len(unstable) == 1
        # oracle: doubled resolution reproduces the eigenvalue
        sol2 = rayleigh_spectrum(p, 0.5, build_grid(384, HALF_LINE, map_scale=4.0))
        unstable2 = [c for c in sol2.eigenvalues if c.imag > 1e-6]
        assert len(unstable2) == 1
        assert abs(unstable[0] - unstable2[0]) < 1e-6

    def test_tanh_short_wave_stable(self, half_grid, half_grid_fine):
        p = make_profile("tanh", z0=1.0)
        for g in (half_grid, half_grid_fine):
            sol = rayleigh_spectrum(p, 20.0, g)
            assert all(c.imag <= 1e-6 for c in sol.eigenvalues)

    def test_residual_gate(self, half_grid):
        sol = rayleigh_spectrum(make_profile("tanh", z0=1.0), 0.5, half_grid)
        assert all(r <= 1e-6 for r in sol.residuals)

    def test_bad_alpha(self, half_grid):
        with pytest.raises(ConfigurationError):
            rayleigh_spectrum(make_profile("exponential"), -1.0, half_grid)

    def test_domain_mismatch(self, half_grid):
        with pytest.raises(ConfigurationError):
            rayleigh_spectrum(make_profile("poiseuille"), 1.0, half_grid)


def _uniform_profile():
    """U == 1, U'' == 0 on the half line (for manufactured resolvent solves)."""
    return ShearProfile(
        "custom",
        HALF_LINE,
        lambda z: np.ones_like(np.asarray(z, dtype=float)),
        lambda z: np.zeros_like(np.asarray(z, dtype=float)),
        lambda z: np.zeros_like(np.asarray(z, dtype=float)),
    )


class TestRayleighResolvent:
    def test_manufactured_solution(self, half_grid):
        # (U - c) == 1: the equation reads (D2 - 1) phi = -2 e^{-z}, phi = z e^{-z}
        p = _uniform_profile()
        phi = rayleigh_resolvent(p, 1.0, 0.0, lambda z: -2.0 * np.exp(-z), half_grid)
        y = half_grid.nodes
        exact = np.where(np.isfinite(y), y * np.exp(-np.where(np.isfinite(y), y, 0.0)), 0.0)
        exact[0] = 0.0
        assert np.max(np.abs(phi - exact)) < 1e-8
        assert abs(phi[-1]) < 1e-12  # phi(0) = 0

    def test_linearity(self, half_grid):
        p = _uniform_profile()
        src = lambda z: -2.0 * np.exp(-z)
        phi1 = rayleigh_resolvent(p, 1.0, 0.0, src, half_grid)
        phi2 = rayleigh_resolvent(p, 1.0, 0.0, lambda z: 2.0 * src(z), half_grid)
        assert np.max(np.abs(phi2 - 2.0 * phi1)) < 1e-12

    def test_critical_layer_error(self, half_grid):
        p = make_profile("exponential")
        z0 = half_grid.nodes[half_grid.N // 2]
        with pytest.raises(CriticalLayerError):
            rayleigh_resolvent(p, 1.0, complex(p.U(z0)), lambda z: np.exp(-z), half_grid)

    def test_conjugation(self, half_grid):
        # real profile: conjugating (c, source) conjugates the response
        p = make_profile("exponential")
        c = 1.5 + 0.2j
        src = lambda z: np.exp(-z) * (1.0 + 0.5j)
        phi = rayleigh_resolvent(p, 1.0, c, src, half_grid)
        phic = rayleigh_resolvent(p, 1.0, np.conj(c), lambda z: np.conj(src(z)), half_grid)
        assert np.max(np.abs(phic - np.conj(phi))) < 1e-10


@pytest.fixture(scope="module")
def chan():
    return build_grid(128, CHANNEL)


class TestOrrSommerfeld:
    def test_poiseuille_benchmark(self, chan):
        p = make_profile("poiseuille")
        sol = os_spectrum(p, 1.0, 1e4, chan)
        c0 = sol.eigenvalues[0]
        assert c0.real == pytest.approx(0.2375, abs=2e-3)
        assert c0.imag == pytest.approx(0.0037, abs=2e-3)
        # oracle: doubled resolution agrees to 1e-5
        sol2 = os_spectrum(p, 1.0, 1e4, build_grid(256, CHANNEL))
        assert abs(c0 - sol2.eigenvalues[0]) < 1e-5

    def test_low_Re_damped(self, chan):
        sol = os_spectrum(make_profile("poiseuille"), 1.0, 1.0, chan)
        assert all(c.imag < 0 for c in sol.eigenvalues)
        sol2 = os_spectrum(make_profile("poiseuille"), 1.0, 1.0, build_grid(256, CHANNEL))
        assert all(c.imag < 0 for c in sol2.eigenvalues)

    def test_clamped_modes(self, chan):
        sol = os_spectrum(make_profile("poiseuille"), 1.0, 1e4, chan)
        D1 = chan.D1
        for k in range(sol.modes.shape[1]):
            phi = sol.modes[:, k]
            dphi = D1 @ phi
            assert abs(phi[0]) + abs(dphi[0]) <= 1e-10
            assert abs(phi[-1]) + abs(dphi[-1]) <= 1e-10

    def test_resolution_warning(self):
        with pytest.warns(UserWarning, match="resolution guidance"):
            os_spectrum(make_profile("poiseuille"), 1.0, 1e8, build_grid(64, CHANNEL))

    def test_inviscid_limit_tanh(self, half_grid):
        # leading viscous eigenvalue approaches the inviscid one as Re grows
        p = make_profile("tanh", z0=1.0)
        c_ray = max(rayleigh_spectrum(p, 0.5, half_grid).eigenvalues, key=lambda c: c.imag)
        gaps = []
        for Re in (1e3, 1e4, 1e5):
            sol = os_spectrum(p, 0.5, Re, build_grid(192, HALF_LINE, map_scale=4.0))
            gaps.append(abs(sol.eigenvalues[0] - c_ray))
        assert gaps[1] / gaps[0] < 1.0
        assert gaps[2] / gaps[1] < 1.0


@pytest.fixture(scope="module")
def branches():
    p = make_profile("poiseuille")
    return neutral_curve(p, [4000, 6000, 8000, 10000], (0.6, 1.4), N=96)


class TestNeutralCurve:
    def test_first_supercritical(self, branches):
        lower, _ = branches
        assert lower.subcritical_Re, "expected a subcritical Re"
        first = min(re for re, _ in lower.points)
        assert max(lower.subcritical_Re) < first
        assert 5000 <= first <= 6500
        alpha_first = dict(lower.points)[first]
        assert alpha_first == pytest.approx(1.0, abs=0.15)

    def test_subcritical_at_4000(self, branches):
        lower, upper = branches
        assert 4000.0 in lower.subcritical_Re
        assert all(re != 4000.0 for re, _ in lower.points + upper.points)

    def test_band_ordering(self, branches):
        lower, upper = branches
        up = dict(upper.points)
        for re, a_low in lower.points:
            assert a_low < up[re]

    def test_sorted_in_Re(self, branches):
        for br in branches:
            res = [re for re, _ in br.points]
            assert res == sorted(res)

    def test_window_too_narrow(self):
        p = make_profile("poiseuille")
        with pytest.raises(WindowError):
            neutral_curve(p, [10000], (0.9, 1.05), N=96)

    def test_unsorted_Re_rejected(self):
        with pytest.raises(ConfigurationError):
            neutral_curve(make_profile("poiseuille"), [8000, 6000], (0.6, 1.4))


class TestFitExponents:
    def test_recovers_power_law(self):
        re = np.geomspace(1e4, 1e6, 8)
        br = NeutralBranch([(r, 3.0 * r ** (-1.0 / 7.0)) for r in re], "lower")
        slope, intercept, r2 = fit_exponents(br, (1e4, 1e6))
        assert slope == pytest.approx(-1.0 / 7.0, abs=1e-12)
        assert intercept == pytest.approx(np.log(3.0), abs=1e-12)
        assert r2 == pytest.approx(1.0, abs=1e-12)
        assert br.fit["slope"] == pytest.approx(slope)

    def test_insufficient_points(self):
        br = NeutralBranch([(1e4, 0.5), (2e4, 0.4), (4e4, 0.3)], "lower")
        with pytest.raises(InputError):
            fit_exponents(br, (1e3, 1e6))

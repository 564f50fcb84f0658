"""Conserved-quantity evaluators and trajectory scans."""

import numpy as np
import pytest

from conftest import band_limited
from shearwave import (
    DiffeoMap,
    EulerianState,
    Field,
    LagrangianState,
    ModelParams,
    SpectralGrid,
    casimir,
    constant_field,
    energy_a2,
    helmholtz_apply,
    lemma_invariant,
    mean_velocity,
    positivity_report,
    sobolev_norm_pair,
)
from shearwave.diagnostics import make_record, transported_density_invariant

TWO_PI = 2.0 * np.pi


class TestEnergy:
    def test_zero_state(self):
        g = SpectralGrid(32)
        z = constant_field(g, 0.0)
        assert energy_a2(z, z, 0.0, 1.0) == 0.0

    def test_pure_cosine(self):
        g = SpectralGrid(64)
        u = Field(g, np.cos(g.nodes))
        assert energy_a2(u, constant_field(g, 0.0), 0.0, 1.0) == pytest.approx(
            TWO_PI, abs=1e-12
        )

    def test_vorticity_offset_terms(self):
        # u = 0, rho = 1, alpha = 2, kappa = 1: the u-term integrates
        # (0 - 1)^2, the bare alpha term adds 2, the density term adds 2*pi
        g = SpectralGrid(32)
        e = energy_a2(constant_field(g, 0.0), constant_field(g, 1.0), 2.0, 1.0)
        assert e == pytest.approx(2.0 * TWO_PI + 2.0, abs=1e-12)

    def test_kappa_weighting(self):
        g = SpectralGrid(64)
        u = Field(g, np.cos(g.nodes))
        rho = constant_field(g, 1.0)
        assert energy_a2(u, rho, 0.0, 2.0) == pytest.approx(
            TWO_PI + 2.0 * TWO_PI, abs=1e-12
        )

    def test_nonnegative(self):
        rng = np.random.default_rng(401)
        g = SpectralGrid(64)
        for _ in range(10):
            u = band_limited(g, rng, 16, amplitude=2.0)
            rho = band_limited(g, rng, 16, amplitude=2.0)
            alpha = float(rng.uniform(-3, 3))
            assert energy_a2(u, rho, alpha, 0.7) >= 0.0


class TestCasimir:
    def test_a_two_is_plain_integral(self):
        g = SpectralGrid(32)
        assert casimir(constant_field(g, 1.0), 2.0) == pytest.approx(TWO_PI, abs=1e-12)

    def test_square_root_case(self):
        g = SpectralGrid(32)
        assert casimir(constant_field(g, 4.0), 3.0) == pytest.approx(
            2.0 * TWO_PI, abs=1e-12
        )

    def test_undefined_when_touching_zero(self):
        g = SpectralGrid(32)
        rho = Field(g, np.maximum(np.sin(g.nodes), 0.0))
        assert casimir(rho, 2.0) is None
        assert casimir(constant_field(g, 0.0), 3.0) is None

    def test_negative_exponent_branch(self):
        # a = 1.5 gives exponent 2
        g = SpectralGrid(32)
        assert casimir(constant_field(g, 3.0), 1.5) == pytest.approx(
            9.0 * TWO_PI, abs=1e-11
        )

    def test_rejects_a_equal_one(self):
        g = SpectralGrid(32)
        with pytest.raises(ValueError):
            casimir(constant_field(g, 1.0), 1.0)


class TestMeanVelocity:
    def test_constant(self):
        g = SpectralGrid(32)
        assert mean_velocity(constant_field(g, 0.25)) == pytest.approx(
            0.25 * TWO_PI, abs=1e-13
        )

    def test_oscillation_has_no_mean(self):
        g = SpectralGrid(64)
        assert abs(mean_velocity(Field(g, np.sin(3 * g.nodes)))) < 1e-12


class TestSobolevPair:
    def test_zero(self):
        g = SpectralGrid(32)
        z = constant_field(g, 0.0)
        assert sobolev_norm_pair(z, z, 0) == 0.0

    def test_cosine_l2(self):
        g = SpectralGrid(64)
        m = Field(g, np.cos(g.nodes))
        z = constant_field(g, 0.0)
        assert sobolev_norm_pair(m, z, 0) == pytest.approx(np.pi, abs=1e-12)

    def test_density_enters_one_order_higher(self):
        # with m = 0 and rho = cos x at k = 0 the quantity is the H^1
        # square of the cosine, which is 2*pi
        g = SpectralGrid(64)
        z = constant_field(g, 0.0)
        rho = Field(g, np.cos(g.nodes))
        assert sobolev_norm_pair(z, rho, 0) == pytest.approx(2.0 * np.pi, abs=1e-12)

    def test_monotone_in_order(self):
        rng = np.random.default_rng(411)
        g = SpectralGrid(128)
        m = band_limited(g, rng, 20)
        rho = band_limited(g, rng, 20)
        h0 = sobolev_norm_pair(m, rho, 0)
        h1 = sobolev_norm_pair(m, rho, 1)
        h2 = sobolev_norm_pair(m, rho, 2)
        assert h0 <= h1 <= h2


class TestLemmaInvariant:
    def test_identity_map_returns_density(self):
        rng = np.random.default_rng(421)
        g = SpectralGrid(64)
        sigma = band_limited(g, rng, 16)
        ls = LagrangianState(
            phi=DiffeoMap.identity(g),
            f=constant_field(g, 0.0),
            s=0.0,
            v=constant_field(g, 0.0),
            sigma=sigma,
            alpha=0.0,
        )
        out = lemma_invariant(ls, 2.0)
        assert np.max(np.abs(out.values - sigma.values)) < 1e-14

    def test_weight_exponent(self):
        # phi_x = 1 + 0.4 cos x, sigma = 1: the invariant is phi_x^(a-1)
        g = SpectralGrid(64)
        phi = DiffeoMap(Field(g, 0.4 * np.sin(g.nodes)))
        ls = LagrangianState(
            phi=phi,
            f=constant_field(g, 0.0),
            s=0.0,
            v=constant_field(g, 0.0),
            sigma=constant_field(g, 1.0),
            alpha=0.0,
        )
        out = lemma_invariant(ls, 3.0)
        want = (1.0 + 0.4 * np.cos(g.nodes)) ** 2
        assert np.max(np.abs(out.values - want)) < 1e-12

    def test_transported_form_matches_at_pulled_back_density(self):
        rng = np.random.default_rng(422)
        g = SpectralGrid(128)
        rho = band_limited(g, rng, 10)
        from conftest import safe_displacement

        phi = DiffeoMap(safe_displacement(g, rng, 5, slope=0.3))
        from shearwave import compose

        direct = transported_density_invariant(rho, phi, 2.5)
        pulled = compose(rho, phi)
        want = pulled.values * phi.deriv_values**1.5
        assert np.max(np.abs(direct.values - want)) < 1e-12


class TestPositivity:
    def _traj(self, g, mins):
        out = []
        for i, m in enumerate(mins):
            out.append((0.1 * i, constant_field(g, m)))
        return out

    def test_preserved(self):
        g = SpectralGrid(32)
        rep = positivity_report(self._traj(g, [1.0, 0.9, 0.5]))
        assert rep.applicable and rep.preserved
        assert rep.first_violation_t is None

    def test_violation_time(self):
        g = SpectralGrid(32)
        rep = positivity_report(self._traj(g, [1.0, 0.4, -0.1, 0.2]))
        assert rep.applicable and not rep.preserved
        assert rep.first_violation_t == pytest.approx(0.2)

    def test_initial_touch_counts_at_time_zero(self):
        g = SpectralGrid(32)
        rho0 = Field(g, np.maximum(np.sin(g.nodes), 0.0))
        rep = positivity_report([(0.0, rho0), (0.1, constant_field(g, 1.0))])
        assert rep.applicable and not rep.preserved
        assert rep.first_violation_t == pytest.approx(0.0)

    def test_identically_zero_is_not_applicable(self):
        g = SpectralGrid(32)
        rep = positivity_report(self._traj(g, [0.0, 0.0]))
        assert not rep.applicable

    def test_empty_trajectory_rejected(self):
        with pytest.raises(ValueError):
            positivity_report([])


class TestRecord:
    def test_fields_populated(self):
        rng = np.random.default_rng(431)
        g = SpectralGrid(64)
        u = band_limited(g, rng, 16, amplitude=0.5)
        rho = band_limited(g, rng, 16, amplitude=0.3) + constant_field(g, 1.0)
        st = EulerianState(m=helmholtz_apply(u), rho=rho, alpha=0.4)
        rec = make_record(0.7, st, ModelParams(a=2.0, alpha=0.4, kappa=1.0))
        assert rec.t == 0.7
        assert rec.energy_a2 > 0.0
        assert rec.casimir is not None
        assert rec.min_rho == pytest.approx(float(np.min(rho.values)))
        assert rec.max_ux > 0.0
        assert set(rec.h_norms) == {0, 1, 2}
        assert rec.lemma_deviation is None

    def test_casimir_skipped_for_signed_density(self):
        rng = np.random.default_rng(432)
        g = SpectralGrid(64)
        u = band_limited(g, rng, 16, amplitude=0.5)
        rho = Field(g, np.sin(g.nodes))
        st = EulerianState(m=helmholtz_apply(u), rho=rho, alpha=0.0)
        rec = make_record(0.0, st, ModelParams(a=2.0))
        assert rec.casimir is None

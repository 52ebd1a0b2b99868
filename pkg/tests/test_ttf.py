import math

import numpy as np
import pytest
from scipy.linalg import expm

from ckngb.chain import build_consolidated
from ckngb.errors import CapacityExceeded, ConfigError
from ckngb.sntf import DiscretePhaseType, mean_closed, sntf_distribution
from ckngb.system import BalanceCondition, SystemConfig
from ckngb.ttf import (
    CompoundPhaseType,
    ContinuousPhaseType,
    InterShockSpec,
    cdf_survival,
    compound_from_config,
    compound_ph,
    integrate_pdf,
    pdf,
    pdf_grid,
    ph_from_preset,
    ph_mean_scv,
    raw_moment,
    scv,
    validate_ph,
)
from goldens import COMPOUND_GENERATOR

BC3 = BalanceCondition.BC3


class TestPresets:
    def test_parameters(self):
        er = ph_from_preset("ER")
        assert er.alpha.tolist() == [1.0, 0.0]
        assert er.T.tolist() == [[-2.0, 2.0], [0.0, -2.0]]
        exp = ph_from_preset("EXP")
        assert exp.alpha.tolist() == [1.0]
        assert exp.T.tolist() == [[-1.0]]
        he = ph_from_preset("HE")
        assert he.alpha.tolist() == [0.5, 0.5]
        root2 = math.sqrt(2.0)
        assert he.T[0, 0] == pytest.approx(-2.0 / (2.0 - root2))
        assert he.T[1, 1] == pytest.approx(-2.0 / (2.0 + root2))

    def test_mean_and_scv(self):
        assert ph_mean_scv(ph_from_preset("ER")) == pytest.approx((1.0, 0.5), abs=1e-12)
        assert ph_mean_scv(ph_from_preset("EXP")) == pytest.approx((1.0, 1.0), abs=1e-12)
        assert ph_mean_scv(ph_from_preset("HE")) == pytest.approx((1.0, 2.0), abs=1e-12)

    def test_single_phase_rate(self):
        Y = ContinuousPhaseType(np.array([1.0]), np.array([[-3.5]]))
        mean, y_scv = ph_mean_scv(Y)
        assert mean == pytest.approx(1.0 / 3.5)
        assert y_scv == pytest.approx(1.0)

    def test_unknown_label(self):
        with pytest.raises(ConfigError):
            ph_from_preset("GAMMA")


class TestValidatePH:
    def test_accepts_presets(self):
        for label in ("ER", "EXP", "HE"):
            Y = ph_from_preset(label)
            validate_ph(Y.alpha, Y.T)

    @pytest.mark.parametrize(
        "alpha,T",
        [
            ([0.5, 0.4], [[-1.0, 0.0], [0.0, -1.0]]),  # alpha not normalized
            ([1.1, -0.1], [[-1.0, 0.0], [0.0, -1.0]]),  # negative entry
            ([1.0], [[1.0]]),  # nonnegative diagonal
            ([0.5, 0.5], [[-1.0, -0.5], [0.0, -1.0]]),  # negative off-diagonal
            ([0.5, 0.5], [[-1.0, 2.0], [0.0, -1.0]]),  # positive row sum
            ([0.5, 0.5], [[-1.0, 1.0], [1.0, -1.0]]),  # nothing can exit
        ],
    )
    def test_rejects_malformed(self, alpha, T):
        with pytest.raises(ConfigError):
            validate_ph(np.array(alpha, dtype=float), np.array(T, dtype=float))


class TestInterShockSpec:
    def test_exactly_one_source(self):
        with pytest.raises(ConfigError):
            InterShockSpec()
        with pytest.raises(ConfigError):
            InterShockSpec(preset="ER", custom=ph_from_preset("EXP"))

    def test_resolve(self):
        assert InterShockSpec(preset="HE").resolve().K == 2
        custom = ph_from_preset("EXP")
        assert InterShockSpec(custom=custom).resolve() is custom


class TestCompound:
    def test_reference_dimensions(self, reference_config):
        Z = compound_from_config(reference_config)
        assert Z.dim == 14
        expected_alpha = np.zeros(14)
        expected_alpha[0] = 1.0
        assert np.array_equal(Z.alpha, expected_alpha)

    def test_reference_generator(self, reference_config):
        Z = compound_from_config(reference_config)
        assert np.abs(Z.to_dense() - COMPOUND_GENERATOR).max() < 5e-4

    def test_generator_is_valid_subgenerator(self, reference_config):
        T = compound_from_config(reference_config).to_dense()
        off = T - np.diag(np.diag(T))
        assert (off >= 0).all()
        assert (np.diag(T) < 0).all()
        assert (T.sum(axis=1) <= 1e-12).all()

    def test_geometric_compound_of_exponentials_is_exponential(self):
        r = 0.6
        rate = 1.0 - r**2
        dist = sntf_distribution(SystemConfig(2, 2, r))
        Z = compound_ph(dist, ph_from_preset("EXP"))
        assert Z.to_dense() == pytest.approx(np.array([[-rate]]))
        for z in (0.0, 0.5, 2.0, 7.0):
            assert pdf(Z, z) == pytest.approx(rate * math.exp(-rate * z), rel=1e-10)
            assert cdf_survival(Z, z) == pytest.approx(math.exp(-rate * z), rel=1e-10)
        assert raw_moment(Z, 1) == pytest.approx(1.0 / rate, rel=1e-12)
        assert scv(Z) == pytest.approx(1.0, abs=1e-10)

    def test_dimension_cap(self, reference_config):
        dist = sntf_distribution(reference_config)
        with pytest.raises(CapacityExceeded):
            compound_ph(dist, ph_from_preset("ER"), max_dim=10)

    def test_dense_cap(self):
        fake = CompoundPhaseType(
            np.zeros(6000), np.zeros((3000, 3000)), np.zeros(3000), ph_from_preset("ER")
        )
        with pytest.raises(CapacityExceeded):
            fake.to_dense()

    def test_missing_shock_spec(self):
        with pytest.raises(ConfigError):
            compound_from_config(SystemConfig(4, 2, 0.7, BC3))


class TestDensity:
    def test_zero_at_origin_under_erlang(self, reference_config):
        Z = compound_from_config(reference_config)
        assert pdf(Z, 0.0) == 0.0

    def test_survival_boundary(self, reference_config):
        Z = compound_from_config(reference_config)
        assert cdf_survival(Z, 0.0) == 1.0
        assert cdf_survival(Z, 200.0) < 1e-10

    def test_matches_dense_expm(self, reference_config):
        Z = compound_from_config(reference_config)
        T = Z.to_dense()
        exit_vec = -T @ np.ones(14)
        for z in (0.3, 1.0, 2.5, 6.0):
            dense_pdf = float(Z.alpha @ expm(z * T) @ exit_vec)
            dense_surv = float(Z.alpha @ expm(z * T) @ np.ones(14))
            assert pdf(Z, z) == pytest.approx(dense_pdf, rel=1e-10, abs=1e-13)
            assert cdf_survival(Z, z) == pytest.approx(dense_surv, rel=1e-10, abs=1e-13)

    def test_grid_matches_single_point(self, reference_config):
        Z = compound_from_config(reference_config)
        zs = np.linspace(0.0, 8.0, 17)
        dens, surv = pdf_grid(Z, zs)
        for z, d, s in zip(zs, dens, surv):
            assert d == pytest.approx(pdf(Z, float(z)), rel=1e-10, abs=1e-14)
            assert s == pytest.approx(cdf_survival(Z, float(z)), rel=1e-10, abs=1e-14)

    def test_grid_rejects_descending(self, reference_config):
        Z = compound_from_config(reference_config)
        with pytest.raises(ValueError):
            pdf_grid(Z, np.array([1.0, 0.5]))

    def test_negative_time_rejected(self, reference_config):
        Z = compound_from_config(reference_config)
        with pytest.raises(ValueError):
            pdf(Z, -0.1)

    def test_normalization(self, reference_config):
        Z = compound_from_config(reference_config)
        assert integrate_pdf(Z) == pytest.approx(1.0, abs=1e-6)

    def test_survival_derivative_is_negative_density(self, reference_config):
        Z = compound_from_config(reference_config)
        h = 1e-4
        for z in np.linspace(0.2, 6.0, 20):
            slope = (cdf_survival(Z, z + h) - cdf_survival(Z, z - h)) / (2.0 * h)
            assert abs(-slope - pdf(Z, z)) < 1e-5


class TestMoments:
    def test_wald_identity(self, reference_config):
        dist = sntf_distribution(reference_config)
        for label in ("ER", "EXP", "HE"):
            Y = ph_from_preset(label)
            Z = compound_ph(dist, Y)
            mean_y, _ = ph_mean_scv(Y)
            assert raw_moment(Z, 1) == pytest.approx(
                mean_closed(dist) * mean_y, abs=1e-8
            )

    def test_against_dense_solves(self, reference_config):
        Z = compound_from_config(reference_config)
        T = Z.to_dense()
        x = np.ones(14)
        for p in (1, 2, 3):
            x = np.linalg.solve(-T, x)
            assert raw_moment(Z, p) == pytest.approx(
                math.factorial(p) * float(Z.alpha @ x), rel=1e-11
            )

    def test_sparse_chain_backend(self):
        config = SystemConfig(6, 2, 0.7, BC3)
        dense_dist = sntf_distribution(config)
        sparse_chain = build_consolidated(6, 2, BC3, 0.7, dense_limit=1)
        sparse_dist = DiscretePhaseType(dense_dist.alpha, sparse_chain)
        for label in ("ER", "HE"):
            Y = ph_from_preset(label)
            a = compound_ph(dense_dist, Y)
            b = compound_ph(sparse_dist, Y)
            assert raw_moment(b, 1) == pytest.approx(raw_moment(a, 1), rel=1e-12)
            assert raw_moment(b, 2) == pytest.approx(raw_moment(a, 2), rel=1e-12)
            for z in (0.5, 2.0):
                assert pdf(b, z) == pytest.approx(pdf(a, z), rel=1e-11)

    def test_moment_argument_validation(self, reference_config):
        Z = compound_from_config(reference_config)
        with pytest.raises(ValueError):
            raw_moment(Z, 0)

    def test_scv_positive_for_degenerate_shock_count(self):
        dist = sntf_distribution(SystemConfig(4, 4, 0.7))
        Z = compound_ph(dist, ph_from_preset("ER"))
        assert scv(Z) > 0.0


def test_density_peak_follows_base_distribution():
    # same system, smoother inter-shock law -> density peaks later
    dist = sntf_distribution(SystemConfig(12, 6, 0.9, BC3))
    zs = np.linspace(0.0, 12.0, 161)
    dens_er, _ = pdf_grid(compound_ph(dist, ph_from_preset("ER")), zs)
    dens_he, _ = pdf_grid(compound_ph(dist, ph_from_preset("HE")), zs)
    assert zs[np.argmax(dens_er)] > zs[np.argmax(dens_he)]

"""Dimensions, noise conventions and instance generation."""

import math

import numpy as np
import pytest

from amp_sublinear.errors import ParameterError, ResourceError
from amp_sublinear.linmodel import (
    MatrixNorm,
    ModelParams,
    derive_dims,
    generate_instance,
    snr_to_noise,
    trial_streams,
)
from amp_sublinear.prior import bernoulli_rademacher


def params(**kw):
    base = dict(n=300, alpha=0.9, delta=0.5, noise_var=snr_to_noise(5.0))
    base.update(kw)
    return ModelParams(**base)


class TestDeriveDims:
    def test_default_setup(self):
        # 300^0.9 = 169.59..., so m = round(84.797) and k = round(169.59)
        assert derive_dims(300, 0.9, 0.5) == (85, 170)

    def test_linear_regime(self):
        assert derive_dims(100, 1.0, 0.5) == (50, 100)

    def test_floor_guard(self):
        m, _ = derive_dims(4, 0.5, 0.25)
        assert m == 1

    def test_k_never_exceeds_n(self):
        assert derive_dims(10, 1.0, 3.0)[1] == 10


class TestSnr:
    @pytest.mark.parametrize("db, noise", [(0.0, 1.0), (10.0, 0.1), (5.0, 10**-0.5)])
    def test_values(self, db, noise):
        assert snr_to_noise(db) == pytest.approx(noise, rel=1e-15)

    def test_roundtrip(self):
        assert params(noise_var=snr_to_noise(7.5)).snr_db == pytest.approx(7.5, rel=1e-14)


class TestModelParams:
    def test_derived_fields(self):
        p = params()
        assert (p.m, p.k) == (85, 170)
        assert p.rho == pytest.approx(170 / 300)
        assert p.scale == pytest.approx(300**0.1)

    def test_explicit_k(self):
        assert params(k=10).k == 10

    @pytest.mark.parametrize("bad", [
        dict(alpha=0.0), dict(alpha=1.1), dict(delta=0.0), dict(noise_var=0.0),
        dict(noise_var=-1.0), dict(k=0), dict(k=301), dict(n=0),
    ])
    def test_validation(self, bad):
        with pytest.raises(ParameterError):
            params(**bad)

    def test_with_rederives_k(self):
        p = params().with_(alpha=0.5)
        assert p.k == round(300**0.5)
        assert p.m == round(0.5 * 300**0.5)

    def test_with_keeps_explicit_k(self):
        assert params().with_(alpha=0.5, k=7).k == 7

    def test_matrix_norm_from_string(self):
        assert params(matrix_norm="one_over_n").matrix_norm is MatrixNorm.ONE_OVER_N


class TestGenerateInstance:
    def setup_method(self):
        self.p = params()
        self.prior = bernoulli_rademacher(math.sqrt(self.p.noise_var), self.p.rho)

    def test_shapes(self):
        inst = generate_instance(self.p, trial_streams(0, 0), self.prior)
        assert inst.a_matrix.shape == (85, 300)
        assert inst.s.shape == (300,)
        assert inst.w.shape == inst.y.shape == (85,)

    def test_reconstruction_identity(self):
        for t in range(5):
            inst = generate_instance(self.p, trial_streams(1, t), self.prior)
            resid = inst.y - inst.a_matrix @ inst.s - math.sqrt(self.p.noise_var) * inst.w
            assert np.max(np.abs(resid)) <= 1e-12

    def test_deterministic(self):
        a = generate_instance(self.p, trial_streams(9, 3), self.prior)
        b = generate_instance(self.p, trial_streams(9, 3), self.prior)
        for f in ("a_matrix", "s", "w", "y"):
            np.testing.assert_array_equal(getattr(a, f), getattr(b, f))

    def test_trials_differ(self):
        a = generate_instance(self.p, trial_streams(9, 0), self.prior)
        b = generate_instance(self.p, trial_streams(9, 1), self.prior)
        assert not np.array_equal(a.a_matrix, b.a_matrix)

    def test_single_generator_accepted(self):
        inst = generate_instance(self.p, np.random.default_rng(0), self.prior)
        assert inst.a_matrix.shape == (85, 300)

    def test_read_only(self):
        inst = generate_instance(self.p, trial_streams(0, 0), self.prior)
        with pytest.raises(ValueError):
            inst.y[0] = 0.0

    @pytest.mark.parametrize("norm, target", [("one_over_m", "m"), ("one_over_n", "n")])
    def test_matrix_variance(self, norm, target):
        p = params(n=2000, matrix_norm=norm)
        inst = generate_instance(p, trial_streams(4, 0), self.prior)
        assert inst.a_matrix.size >= 10**5
        expected = 1.0 / getattr(p, target)
        assert abs(inst.a_matrix.var() / expected - 1.0) <= 0.05

    def test_noiseless_limit(self):
        p = params(noise_var=1e-30)
        inst = generate_instance(p, trial_streams(0, 0), self.prior)
        np.testing.assert_allclose(inst.y, inst.a_matrix @ inst.s, rtol=0, atol=1e-13)

    def test_memory_budget(self):
        with pytest.raises(ResourceError):
            generate_instance(self.p, trial_streams(0, 0), self.prior, max_entries=1000)

    def test_sparsity_concentrates(self):
        p = params(n=20000, alpha=0.5)
        prior = bernoulli_rademacher(1.0, p.rho)
        inst = generate_instance(p, trial_streams(2, 0), prior)
        frac = np.mean(inst.s != 0)
        assert abs(frac - p.rho) <= 3 * math.sqrt(p.rho * (1 - p.rho) / p.n)


class TestTrialStreams:
    def test_injective_over_trials_and_purposes(self):
        draws = set()
        for t in range(50):
            for g in trial_streams(123, t):
                draws.add(int(g.integers(2**63)))
        assert len(draws) == 150

    def test_master_seed_matters(self):
        a = trial_streams(0, 0)[0].standard_normal(4)
        b = trial_streams(1, 0)[0].standard_normal(4)
        assert not np.array_equal(a, b)

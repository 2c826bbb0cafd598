"""Exact posterior mean by enumeration."""

import math

import numpy as np
import pytest

from amp_sublinear.errors import ParameterError, ResourceError
from amp_sublinear.linmodel import ModelParams, ProblemInstance, generate_instance, trial_streams
from amp_sublinear.oracle import (
    EnumerationBudget,
    exact_mmse_mc,
    exact_posterior_mean,
    oracle_check,
)
from amp_sublinear.prior import DiscretePrior, bernoulli_rademacher
from amp_sublinear.se import mmse_scalar

THREE = DiscretePrior([-1.0, 0.0, 1.0], [0.25, 0.5, 0.25])


def small(n=6, noise=0.3, **kw):
    return ModelParams(n=n, alpha=0.9, delta=0.5, noise_var=noise, **kw)


class TestScalarReduction:
    def test_single_coordinate(self):
        p = ModelParams(n=1, alpha=1.0, delta=1.0, noise_var=0.4)
        prior = DiscretePrior([-1.0, 0.5, 2.0], [0.3, 0.3, 0.4])
        for t in range(20):
            inst = generate_instance(p, trial_streams(3, t), prior)
            a = inst.a_matrix[0, 0]
            expect = prior.posterior_mean(inst.y[0] / a, math.sqrt(0.4) / abs(a))
            assert exact_posterior_mean(inst, prior)[0] == pytest.approx(float(expect), rel=1e-12, abs=1e-14)

    def test_mmse_matches_scalar_channel(self):
        p = ModelParams(n=1, alpha=1.0, delta=1.0, noise_var=0.4)
        mse, se = exact_mmse_mc(p, THREE, 4000, rng=5)
        # average the scalar-channel MMSE over the same matrix draws
        taus = [math.sqrt(0.4) / abs(generate_instance(p, trial_streams(5, t), THREE).a_matrix[0, 0])
                for t in range(4000)]
        expect = np.mean([mmse_scalar(THREE, t) for t in taus])
        assert abs(mse - expect) <= 3 * se


class TestProperties:
    def test_no_information_limit(self):
        p = small(noise=1e12)
        prior = DiscretePrior([-1.0, 0.0, 2.0], [0.25, 0.5, 0.25])
        inst = generate_instance(p, trial_streams(0, 0), prior)
        np.testing.assert_allclose(exact_posterior_mean(inst, prior), prior.mean(), atol=1e-5)

    def test_symmetric_no_information(self):
        inst = generate_instance(small(noise=1e12), trial_streams(0, 1), THREE)
        np.testing.assert_allclose(exact_posterior_mean(inst, THREE), 0.0, atol=1e-5)

    def test_weights_normalised(self):
        p = small(n=8)
        for t in range(5):
            inst = generate_instance(p, trial_streams(2, t), THREE)
            _, total = exact_posterior_mean(inst, THREE, return_weight_sum=True)
            assert abs(total - 1.0) <= 1e-10

    def test_chunking_does_not_change_result(self):
        # 3^10 = 59049 configurations span two enumeration chunks
        p = small(n=10)
        inst = generate_instance(p, trial_streams(4, 0), THREE)
        est = exact_posterior_mean(inst, THREE)
        x = THREE.values[np.array(np.meshgrid(*[range(3)] * 10, indexing="ij")).reshape(10, -1).T]
        r = inst.y[None, :] - x @ inst.a_matrix.T
        logw = np.log(THREE.probs)[np.searchsorted(THREE.values, x)].sum(1) - 0.5 * (r * r).sum(1) / p.noise_var
        w = np.exp(logw - logw.max())
        np.testing.assert_allclose(est, (w @ x) / w.sum(), rtol=1e-12, atol=1e-15)

    def test_permutation_equivariance(self):
        p = small(n=7)
        inst = generate_instance(p, trial_streams(8, 0), THREE)
        perm = np.random.default_rng(1).permutation(7)
        permuted = ProblemInstance(inst.a_matrix[:, perm], inst.s[perm], inst.w, inst.y, inst.noise_var)
        np.testing.assert_allclose(exact_posterior_mean(permuted, THREE),
                                   exact_posterior_mean(inst, THREE)[perm], rtol=1e-12, atol=1e-15)

    def test_bounded_by_atoms(self):
        inst = generate_instance(small(), trial_streams(0, 0), THREE)
        est = exact_posterior_mean(inst, THREE)
        assert np.all(np.abs(est) <= 1.0)


class TestBudget:
    def test_exceeded(self):
        inst = generate_instance(small(n=8), trial_streams(0, 0), THREE)
        with pytest.raises(ResourceError):
            exact_posterior_mean(inst, THREE, EnumerationBudget(3**8 - 1))

    def test_default_allows_twelve_coordinates(self):
        assert EnumerationBudget().check(3, 12) == 3**12


class TestMmseMc:
    def test_zero_prior(self):
        assert exact_mmse_mc(small(), DiscretePrior([0.0], [1.0]), 5) == (0.0, 0.0)

    def test_zero_trials(self):
        with pytest.raises(ParameterError):
            exact_mmse_mc(small(), THREE, 0)

    def test_generator_seed(self):
        a = exact_mmse_mc(small(), THREE, 3, rng=np.random.default_rng(4))
        b = exact_mmse_mc(small(), THREE, 3, rng=np.random.default_rng(4))
        assert a == b


class TestOracleCheck:
    def test_report(self):
        p = small(n=6, noise=0.2)
        prior = bernoulli_rademacher(1.0, p.rho)
        out = oracle_check(p, prior, trials=40, seed=1)
        assert out["n"] == 6 and out["m"] == p.m and out["trials"] == 40
        assert out["max_weight_sum_deviation"] <= 1e-10
        assert out["dominance_ok"] and out["classical_dominance_ok"]
        assert out["exact_mmse"] <= out["amp_mse"] + 2 * math.hypot(out["stderr"], out["amp_stderr"])

    def test_zero_trials(self):
        with pytest.raises(ParameterError):
            oracle_check(small(), THREE, 0)

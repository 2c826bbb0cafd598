"""Independent reference computations used only by the tests."""

import math

import mpmath
import numpy as np

mpmath.mp.dps = 50


def atom_sum_posterior(values, probs, x, tau):
    """Posterior mean and variance by a direct 50-digit atom sum."""
    x, tau = mpmath.mpf(x), mpmath.mpf(tau)
    w = [mpmath.mpf(p) * mpmath.exp(-((x - mpmath.mpf(a)) ** 2) / (2 * tau**2))
         for a, p in zip(values, probs)]
    z = mpmath.fsum(w)
    a = [mpmath.mpf(v) for v in values]
    mean = mpmath.fsum(wi * ai for wi, ai in zip(w, a)) / z
    # pairwise form: no cancellation even when the posterior sits on one atom
    var = mpmath.fsum(w[i] * w[j] * (a[i] - a[j]) ** 2
                      for i in range(len(a)) for j in range(i + 1, len(a))) / z**2
    return float(mean), float(var)


def br_closed_form_mean(x, tau, rho, noise):
    """Posterior mean for 0 w.p. 1-rho, +-sqrt(noise) w.p. rho/2, written as printed."""
    sd = math.sqrt(noise)
    ep, em = math.exp(x * sd / tau**2), math.exp(-x * sd / tau**2)
    num = 0.5 * rho * sd * (ep - em)
    den = (1 - rho) * math.exp(noise / (2 * tau**2)) + 0.5 * rho * (ep + em)
    return num / den


def br_closed_form_deriv(x, tau, rho, noise):
    sd = math.sqrt(noise)
    ep, em = math.exp(x * sd / tau**2), math.exp(-x * sd / tau**2)
    c = math.exp(noise / (2 * tau**2))
    den = (1 - rho) * c + 0.5 * rho * (ep + em)
    first = (noise / (2 * tau**2)) * (1 - rho) * rho * c * (ep + em) / den**2
    second = rho**2 * (noise / tau**2) / den**2
    return first + second


def mc_mmse(values, probs, tau, samples, rng):
    """Monte-Carlo estimate of the scalar-channel MMSE with its standard error."""
    values, probs = np.asarray(values), np.asarray(probs)
    u = rng.choice(values, size=samples, p=probs)
    x = u + tau * rng.standard_normal(samples)
    logits = np.log(probs) - (x[:, None] - values) ** 2 / (2 * tau**2)
    logits -= logits.max(axis=1, keepdims=True)
    w = np.exp(logits)
    est = (w @ values) / w.sum(axis=1)
    err = (est - u) ** 2
    return err.mean(), err.std(ddof=1) / math.sqrt(samples)


def mc_mutual_information(values, probs, sigma, samples, rng):
    """MC over (S, W) of -log int P(x) exp(-((x-S)^2/2 - (x-S) W sigma) / sigma^2) dx."""
    values, probs = np.asarray(values), np.asarray(probs)
    s = rng.choice(values, size=samples, p=probs)
    w = rng.standard_normal(samples)
    d = values[None, :] - s[:, None]
    expo = -(0.5 * d**2 - d * w[:, None] * sigma) / sigma**2
    top = expo.max(axis=1, keepdims=True)
    val = -(np.log((probs * np.exp(expo - top)).sum(axis=1)) + top[:, 0])
    return val.mean(), val.std(ddof=1) / math.sqrt(samples)

"""O(n^2) reference implementations written straight from the definitions.

Slow on purpose. They materialise every pair ``i < j`` and form each
leave-one-out GMD from the pairs that avoid ``j``, sharing no code with
:mod:`seqgini.estimators` (no sorting, no order-statistic identities).
"""

import math

import numpy as np


def _values(xs):
    return np.asarray(list(map(float, xs)), dtype=np.float64)


def _pair_terms(a, kernel):
    i, j = np.triu_indices(a.size, k=1)
    return kernel(a[i], a[j])


def _abs_diff(a, b):
    return np.abs(a - b)


def _tau_kernel(a, b):
    return 0.5 * (a + b) * np.abs(a - b)


def gmd(xs):
    terms = _pair_terms(_values(xs), _abs_diff)
    return math.fsum(terms) / terms.size


def gini(xs):
    a = _values(xs)
    return gmd(a) / (2.0 * math.fsum(a) / a.size)


def tau_hat(xs):
    terms = _pair_terms(_values(xs), _tau_kernel)
    return math.fsum(terms) / terms.size


def variance(xs):
    a = _values(xs)
    mean = math.fsum(a) / a.size
    return math.fsum((a - mean) ** 2) / (a.size - 1)


def _pseudo_values(a):
    n = a.size
    diffs = np.abs(a[:, None] - a[None, :])
    pair_total = math.fsum(diffs[np.triu_indices(n, k=1)])
    full = pair_total / (n * (n - 1) / 2)
    w = []
    for j in range(n):
        # pairs avoiding j: all pairs minus the n - 1 pairs that contain j
        loo = (pair_total - math.fsum(diffs[j])) / ((n - 1) * (n - 2) / 2)
        w.append(n * full - (n - 2) * loo)
    return w


def s_w_squared(xs):
    """Variance of the jackknife pseudo-values of the GMD."""
    w = _pseudo_values(_values(xs))
    n = len(w)
    wbar = math.fsum(w) / n
    return math.fsum((v - wbar) ** 2 for v in w) / (n - 1)


def estimates(xs, clamp=True):
    """Every estimator at once, each computed a single time."""
    a = _values(xs)
    mean = math.fsum(a) / a.size
    out = dict(mean=mean, variance=variance(a), gmd=gmd(a), tau=tau_hat(a), sw2=s_w_squared(a))
    d = out["gmd"]
    out["gini"] = d / (2.0 * mean)
    v2 = (
        d**2 * out["variance"] / (4 * mean**4)
        - d / mean**3 * out["tau"]
        + d**2 / mean**2
        + out["sw2"] / (4 * mean**2)
    )
    out["v2"] = max(v2, 0.0) if clamp else v2
    return out


def v_squared(xs, clamp=True):
    return estimates(xs, clamp)["v2"]

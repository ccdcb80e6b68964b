"""Income distributions: seeded samplers and exact population parameters.

A family is registered with a scipy distribution factory (density, cdf,
mean, variance) and a numpy sampler. The dispersion parameters needed for
the asymptotic variance of the Gini index are integrated numerically from
the density, so a new family needs nothing beyond those two callables. A
family may also supply its partial mean ``int_0^x y f(y) dy`` in closed
form, which removes the inner integral.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy import integrate, stats

from .errors import NumericalIntegrationError, ValidationError

QUAD_EPSABS = 1e-8
QUAD_EPSREL = 1e-10
SAMPLER_CHUNK = 256


@dataclass(frozen=True)
class Family:
    name: str
    param_names: tuple[str, ...]
    distribution: Callable[..., object]
    sampler: Callable[..., np.ndarray]
    partial_mean: Callable[..., float] | None = None


FAMILIES: dict[str, Family] = {}


def register_family(name, param_names, distribution, sampler, partial_mean=None) -> Family:
    """Add a family.

    ``distribution(**params)`` must return a frozen scipy distribution on
    (0, inf); ``sampler(rng, size, **params)`` must draw from it. The
    optional ``partial_mean(x, **params)`` returns ``E(X; X <= x)``.
    """
    fam = Family(name, tuple(param_names), distribution, sampler, partial_mean)
    FAMILIES[name] = fam
    return fam


register_family(
    "exponential",
    ("rate",),
    lambda rate: stats.expon(scale=1.0 / rate),
    lambda rng, size, rate: rng.exponential(1.0 / rate, size),
    lambda x, rate: (1.0 - math.exp(-rate * x) * (1.0 + rate * x)) / rate,
)
register_family(
    "gamma",
    ("shape", "rate"),
    lambda shape, rate: stats.gamma(shape, scale=1.0 / rate),
    lambda rng, size, shape, rate: rng.gamma(shape, 1.0 / rate, size),
    lambda x, shape, rate: shape / rate * stats.gamma.cdf(x, shape + 1.0, scale=1.0 / rate),
)
# meanlog/sdlog are log-scale parameters
register_family(
    "lognormal",
    ("meanlog", "sdlog"),
    lambda meanlog, sdlog: stats.lognorm(sdlog, scale=math.exp(meanlog)),
    lambda rng, size, meanlog, sdlog: rng.lognormal(meanlog, sdlog, size),
    lambda x, meanlog, sdlog: math.exp(meanlog + 0.5 * sdlog**2)
    * stats.norm.cdf((math.log(x) - meanlog - sdlog**2) / sdlog),
)


@dataclass(frozen=True)
class PopulationModel:
    family: str
    params: tuple[tuple[str, float], ...]

    def __post_init__(self):
        fam = FAMILIES.get(self.family)
        if fam is None:
            raise ValidationError(
                f"unknown distribution {self.family!r}; choose from {sorted(FAMILIES)}"
            )
        names = tuple(k for k, _ in self.params)
        if sorted(names) != sorted(fam.param_names):
            raise ValidationError(
                f"{self.family} takes parameters {fam.param_names}, got {names}"
            )
        for k, v in self.params:
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"parameter {k}={v} must be a positive finite number")

    @classmethod
    def of(cls, family: str, **params: float) -> "PopulationModel":
        fam = FAMILIES.get(family)
        order = fam.param_names if fam else tuple(params)
        items = tuple((k, float(params[k])) for k in order if k in params)
        extra = tuple((k, float(v)) for k, v in params.items() if k not in order)
        return cls(family, items + extra)

    @property
    def kwargs(self) -> dict[str, float]:
        return dict(self.params)

    def distribution(self):
        return FAMILIES[self.family].distribution(**self.kwargs)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.asarray(FAMILIES[self.family].sampler(rng, size, **self.kwargs), dtype=np.float64)

    def __str__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.family}({args})"


STUDY_MODELS: Mapping[str, PopulationModel] = {
    "exponential": PopulationModel.of("exponential", rate=5.0),
    "gamma": PopulationModel.of("gamma", shape=2.649, rate=0.84),
    "lognormal": PopulationModel.of("lognormal", meanlog=2.185, sdlog=0.562),
}


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator from an int or a ``SeedSequence``."""
    return np.random.Generator(np.random.Philox(seed))


def draw(model: PopulationModel, rng: np.random.Generator) -> float:
    """One observation. Use :class:`SamplerSource` for streams."""
    return float(model.sample(rng, 1)[0])


class SamplerSource:
    """Observation stream backed by a model and a seeded generator.

    Draws are produced in fixed chunks of ``SAMPLER_CHUNK`` so the stream is
    a pure function of ``(model, seed)`` whatever the consumer's read sizes.
    """

    def __init__(self, model: PopulationModel, seed):
        self.model = model
        self._rng = make_rng(seed)
        self._buf = np.empty(0)
        self._pos = 0
        self.consumed = 0

    def peek(self, k: int) -> np.ndarray:
        while self._buf.size - self._pos < k:
            fresh = self.model.sample(self._rng, SAMPLER_CHUNK)
            self._buf = np.concatenate((self._buf[self._pos :], fresh))
            self._pos = 0
        return self._buf[self._pos : self._pos + k]

    def advance(self, k: int) -> None:
        self._pos += k
        self.consumed += k

    def __iter__(self):
        return self

    def __next__(self) -> float:
        x = float(self.peek(1)[0])
        self.advance(1)
        return x


@dataclass(frozen=True)
class PopulationParams:
    """Exact moments of an income distribution.

    ``sigma1_2`` is the variance of ``E(|X_1 - X_2| | X_1)``, ``tau`` is
    ``E(X_1 |X_1 - X_2|)``, ``xi2`` the asymptotic variance constant of the
    sample Gini index and ``gini`` the population Gini index.
    """

    mu: float
    sigma2: float
    delta: float
    sigma1_2: float
    tau: float
    xi2: float
    gini: float

    @staticmethod
    def assemble_xi2(mu, sigma2, delta, sigma1_2, tau) -> float:
        return (
            sigma1_2 / mu**2
            + delta**2 * sigma2 / (4 * mu**4)
            - (delta / mu**3) * (tau - mu * delta)
        )

    @classmethod
    def from_moments(cls, mu, sigma2, delta, sigma1_2, tau) -> "PopulationParams":
        return cls(
            mu=mu,
            sigma2=sigma2,
            delta=delta,
            sigma1_2=sigma1_2,
            tau=tau,
            xi2=cls.assemble_xi2(mu, sigma2, delta, sigma1_2, tau),
            gini=delta / (2 * mu),
        )

    def as_dict(self) -> dict[str, float]:
        return {
            "mu": self.mu,
            "sigma2": self.sigma2,
            "delta": self.delta,
            "sigma1_2": self.sigma1_2,
            "four_sigma1_2": 4 * self.sigma1_2,
            "tau": self.tau,
            "xi2": self.xi2,
            "gini": self.gini,
        }


def _quad(name, f, a, b):
    value, abserr, *rest = integrate.quad(
        f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=500, full_output=1
    )
    if len(rest) > 1:
        raise NumericalIntegrationError(name, rest[1])
    return value


def expected_abs_difference(dist, x, mu, partial_mean=None) -> float:
    """``E|x - Y|`` for ``Y`` drawn from ``dist``.

    Splitting at ``x`` gives ``x(2F(x) - 1) + mu - 2 * int_0^x y f(y) dy``.
    """
    if x <= 0:
        partial = 0.0
    elif partial_mean is not None:
        partial = partial_mean(x)
    else:
        partial = _quad(f"partial mean up to {x:g}", lambda y: y * dist.pdf(y), 0.0, x)
    return x * (2.0 * dist.cdf(x) - 1.0) + mu - 2.0 * partial


@functools.lru_cache(maxsize=64)
def population_params(model: PopulationModel, closed_form_partial_mean: bool = True) -> PopulationParams:
    """Exact parameters of ``model``.

    Mean and variance come from the distribution object; ``delta``, ``tau``
    and ``sigma1_2`` are adaptive quadratures of ``g(x) = E|x - Y|`` against
    the density. ``closed_form_partial_mean=False`` forces the inner integral
    inside ``g`` to be computed by quadrature as well.

    Raises:
        NumericalIntegrationError: a quadrature failed to converge.
    """
    dist = model.distribution()
    mu = float(dist.mean())
    sigma2 = float(dist.var())
    pm = FAMILIES[model.family].partial_mean if closed_form_partial_mean else None
    if pm is not None:
        kw = model.kwargs
        pm = functools.partial(pm, **kw)
    g = functools.lru_cache(maxsize=None)(lambda x: expected_abs_difference(dist, x, mu, pm))
    delta = _quad("E|X1 - X2|", lambda x: g(x) * dist.pdf(x), 0.0, np.inf)
    tau = _quad("E(X1 |X1 - X2|)", lambda x: x * g(x) * dist.pdf(x), 0.0, np.inf)
    g2 = _quad("E(g(X)^2)", lambda x: g(x) ** 2 * dist.pdf(x), 0.0, np.inf)
    params = PopulationParams.from_moments(mu, sigma2, delta, g2 - delta**2, tau)
    values = params.as_dict().values()
    if not all(math.isfinite(v) and v > 0 for v in values) or not 0 < params.gini < 1:
        raise NumericalIntegrationError(str(model), f"implausible parameters {params}")
    return params

# SPDX-FileCopyrightText: Copyright (c) 2024 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: LicenseRef-Apache2
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import functools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize, special, stats

from cpdetect.core.utils.random_utils import rng_stream


__all__: Sequence[str] = (
    "CopulaFamily",
    "CopulaSpec",
    "sample_copula",
    "debye",
    "kendall_tau_of_parameter",
    "spearman_of_parameter",
    "tau_to_parameter",
    "spearman_to_parameter",
)

logger = logging.getLogger(__name__)

_SPEARMAN_MC_DRAWS = 200_000
_SPEARMAN_MC_SEED = 12345


class CopulaFamily(str, Enum):
    """Exchangeable one-parameter copula families."""

    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    FRANK = "frank"
    NORMAL = "normal"
    STUDENT = "student"


@dataclass(frozen=True)
class CopulaSpec:
    """A d-dimensional exchangeable copula.

    ``parameter`` is theta for the Archimedean families and the common correlation for the Normal and Student
    families. ``df`` is only used by the Student family.
    """

    family: CopulaFamily
    d: int
    parameter: float
    df: Optional[float] = None

    def __post_init__(self):
        """Check the parameter against the family's admissible range."""
        family = CopulaFamily(self.family)
        object.__setattr__(self, "family", family)
        if self.d < 2:
            raise ValueError(f"A copula needs at least two components, got {self.d=}.")
        theta = float(self.parameter)
        if not math.isfinite(theta):
            raise ValueError(f"Copula parameter must be finite, got {self.parameter=}.")
        if family is CopulaFamily.CLAYTON and not theta > 0:
            raise ValueError(f"Clayton copulas need theta > 0, got {theta=}.")
        if family is CopulaFamily.GUMBEL and not theta >= 1:
            raise ValueError(f"Gumbel-Hougaard copulas need theta >= 1, got {theta=}.")
        if family is CopulaFamily.FRANK:
            if theta == 0:
                raise ValueError("Frank copulas need theta != 0.")
            if theta < 0 and self.d > 2:
                raise ValueError(f"Negative Frank parameters are only valid for d = 2, got {self.d=}.")
            if theta > 35:
                raise ValueError(f"Frank parameters above 35 cannot be sampled in double precision, got {theta=}.")
        if family in (CopulaFamily.NORMAL, CopulaFamily.STUDENT) and not -1 / (self.d - 1) < theta < 1:
            raise ValueError(
                f"An equicorrelation matrix in dimension {self.d} needs {-1 / (self.d - 1):.4g} < rho < 1, "
                f"got {theta}."
            )
        if family is CopulaFamily.STUDENT:
            if self.df is None or not self.df >= 1:
                raise ValueError(f"Student copulas need degrees of freedom df >= 1, got {self.df=}.")
        elif self.df is not None:
            raise ValueError(f"Only Student copulas take degrees of freedom, got df={self.df} for {family.value}.")
        object.__setattr__(self, "parameter", theta)

    @classmethod
    def from_tau(cls, family: CopulaFamily, d: int, tau: float, df: Optional[float] = None) -> "CopulaSpec":
        """The copula whose bivariate margins have Kendall's tau ``tau``."""
        return cls(family, d, tau_to_parameter(family, tau), df)

    @classmethod
    def from_spearman(cls, family: CopulaFamily, d: int, rho_s: float, df: Optional[float] = None) -> "CopulaSpec":
        """The copula whose bivariate margins have Spearman's rho ``rho_s``."""
        return cls(family, d, spearman_to_parameter(family, rho_s, df), df)

    @property
    def kendall_tau(self) -> float:
        """Kendall's tau of the bivariate margins."""
        return kendall_tau_of_parameter(self.family, self.parameter)


def _open_unit(u: np.ndarray) -> np.ndarray:
    return np.clip(u, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))


def _equicorrelation_factor(d: int, rho: float) -> np.ndarray:
    corr = np.full((d, d), rho)
    np.fill_diagonal(corr, 1.0)
    return np.linalg.cholesky(corr)


def _frank_conditional(count: int, theta: float, rng: np.random.Generator) -> np.ndarray:
    u = rng.uniform(size=count)
    w = rng.uniform(size=count)
    v = -np.log1p(w * np.expm1(-theta) / (w + (1.0 - w) * np.exp(-theta * u))) / theta
    return np.column_stack([u, v])


def sample_copula(spec: CopulaSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` i.i.d. rows from the copula.

    Archimedean families use the Marshall-Olkin frailty construction U_j = psi(E_j / V) with E_j standard
    exponential: Gamma(1/theta) frailties for Clayton, positive stable ones for Gumbel-Hougaard and logarithmic
    series ones for Frank. Negative Frank parameters (d = 2) are sampled by conditional inversion. Elliptical
    families transform equicorrelated normal (or Student) vectors by their marginal distribution function.

    Args:
        spec: the copula.
        count: number of rows.
        rng: random stream.

    Returns:
        A count x d matrix with entries in the open unit interval.
    """
    if count < 0:
        raise ValueError(f"Cannot draw a negative number of rows, got {count=}.")
    d, theta = spec.d, spec.parameter
    if spec.family is CopulaFamily.NORMAL:
        z = rng.standard_normal((count, d)) @ _equicorrelation_factor(d, theta).T
        return _open_unit(stats.norm.cdf(z))
    if spec.family is CopulaFamily.STUDENT:
        z = rng.standard_normal((count, d)) @ _equicorrelation_factor(d, theta).T
        w = rng.chisquare(spec.df, size=count)
        return _open_unit(stats.t.cdf(z / np.sqrt(w / spec.df)[:, None], spec.df))
    if spec.family is CopulaFamily.FRANK and theta < 0:
        return _open_unit(_frank_conditional(count, theta, rng))
    if spec.family is CopulaFamily.GUMBEL and theta == 1.0:
        return _open_unit(rng.uniform(size=(count, d)))

    e = rng.standard_exponential((count, d))
    if spec.family is CopulaFamily.CLAYTON:
        v = rng.gamma(1.0 / theta, size=count)
        u = (1.0 + e / v[:, None]) ** (-1.0 / theta)
    elif spec.family is CopulaFamily.GUMBEL:
        scale = math.cos(math.pi / (2.0 * theta)) ** theta
        v = stats.levy_stable.rvs(1.0 / theta, 1.0, loc=0.0, scale=scale, size=count, random_state=rng)
        u = np.exp(-((e / v[:, None]) ** (1.0 / theta)))
    else:
        p = -math.expm1(-theta)
        v = stats.logser.rvs(p, size=count, random_state=rng)
        u = -np.log1p(-p * np.exp(-e / v[:, None])) / theta
    return _open_unit(u)


def debye(theta: float, k: int = 1) -> float:
    """Debye function D_k(theta) = k / theta^k * int_0^theta t^k / (e^t - 1) dt."""
    if theta == 0:
        return 1.0
    value, _ = integrate.quad(lambda t: t**k / math.expm1(t), 0.0, theta)
    return k * value / theta**k


def _frank_tau(theta: float) -> float:
    return 1.0 - 4.0 / theta * (1.0 - debye(theta, 1))


def _frank_spearman(theta: float) -> float:
    return 1.0 - 12.0 / theta * (debye(theta, 1) - debye(theta, 2))


def kendall_tau_of_parameter(family: CopulaFamily, theta: float) -> float:
    """Population Kendall's tau of a bivariate margin."""
    family = CopulaFamily(family)
    if family is CopulaFamily.CLAYTON:
        return theta / (theta + 2.0)
    if family is CopulaFamily.GUMBEL:
        return 1.0 - 1.0 / theta
    if family is CopulaFamily.FRANK:
        return _frank_tau(theta)
    return 2.0 / math.pi * math.asin(theta)


@functools.cache
def _gauss_legendre_grid(order: int = 96):
    nodes, weights = special.roots_legendre(order)
    nodes = (nodes + 1.0) / 2.0
    weights = weights / 2.0
    return np.meshgrid(nodes, nodes, indexing="ij"), np.outer(weights, weights)


def _spearman_by_quadrature(family: CopulaFamily, theta: float) -> float:
    (u, v), weights = _gauss_legendre_grid()
    if family is CopulaFamily.CLAYTON:
        cdf = (u**-theta + v**-theta - 1.0) ** (-1.0 / theta)
    else:
        cdf = np.exp(-(((-np.log(u)) ** theta + (-np.log(v)) ** theta) ** (1.0 / theta)))
    return 12.0 * float(np.sum(weights * cdf)) - 3.0


def _spearman_by_simulation(spec: CopulaSpec) -> float:
    # the same stream for every parameter value, so the estimate is a step function of the parameter
    bivariate = CopulaSpec(spec.family, 2, spec.parameter, spec.df)
    draws = sample_copula(bivariate, _SPEARMAN_MC_DRAWS, rng_stream(_SPEARMAN_MC_SEED))
    return float(stats.spearmanr(draws[:, 0], draws[:, 1]).statistic)


def spearman_of_parameter(family: CopulaFamily, theta: float, df: Optional[float] = None) -> float:
    """Population Spearman's rho of a bivariate margin.

    Closed forms are used for the Normal and Frank families, Gauss-Legendre quadrature of the copula for Clayton
    and Gumbel-Hougaard, and a seeded Monte Carlo estimate for the Student family.
    """
    family = CopulaFamily(family)
    if family is CopulaFamily.NORMAL:
        return 6.0 / math.pi * math.asin(theta / 2.0)
    if family is CopulaFamily.FRANK:
        return _frank_spearman(theta)
    if family is CopulaFamily.STUDENT:
        return _spearman_by_simulation(CopulaSpec(family, 2, theta, df))
    if family is CopulaFamily.GUMBEL and theta == 1.0:
        return 0.0
    return _spearman_by_quadrature(family, theta)


def _check_dependence(family: CopulaFamily, value: float, name: str) -> None:
    if family in (CopulaFamily.CLAYTON, CopulaFamily.GUMBEL):
        lower_ok = value >= 0 if family is CopulaFamily.GUMBEL else value > 0
        if not (lower_ok and value < 1):
            raise ValueError(f"{family.value} copulas cover {name} in (0, 1) only, got {value}.")
    elif not -1 < value < 1:
        raise ValueError(f"{name} must lie in (-1, 1), got {value}.")
    if family is CopulaFamily.FRANK and value == 0:
        raise ValueError(f"A Frank copula cannot have {name} = 0.")


def _solve_frank(target, value: float) -> float:
    sign = 1.0 if value > 0 else -1.0
    hi = 1.0
    while target(sign * hi) * sign < abs(value) and hi < 35.0:
        hi *= 2.0
    return optimize.brentq(lambda theta: target(theta) - value, sign * 1e-8, sign * min(hi, 35.0), xtol=1e-12)


def tau_to_parameter(family: CopulaFamily, tau: float) -> float:
    """The copula parameter whose bivariate margins have Kendall's tau ``tau``."""
    family = CopulaFamily(family)
    _check_dependence(family, tau, "Kendall's tau")
    if family is CopulaFamily.CLAYTON:
        return 2.0 * tau / (1.0 - tau)
    if family is CopulaFamily.GUMBEL:
        return 1.0 / (1.0 - tau)
    if family is CopulaFamily.FRANK:
        return _solve_frank(_frank_tau, tau)
    return math.sin(math.pi * tau / 2.0)


@functools.lru_cache(maxsize=128)
def spearman_to_parameter(family: CopulaFamily, rho_s: float, df: Optional[float] = None) -> float:
    """The copula parameter whose bivariate margins have Spearman's rho ``rho_s``.

    The Student family is inverted numerically from a Monte Carlo estimate, to within about 0.005 in rho_s.
    """
    family = CopulaFamily(family)
    _check_dependence(family, rho_s, "Spearman's rho")
    if family is CopulaFamily.NORMAL:
        return 2.0 * math.sin(math.pi * rho_s / 6.0)
    if family is CopulaFamily.FRANK:
        return _solve_frank(_frank_spearman, rho_s)
    if family is CopulaFamily.STUDENT:
        guess = 2.0 * math.sin(math.pi * rho_s / 6.0)
        lo, hi = max(-0.999, guess - 0.25), min(0.999, guess + 0.25)
        theta = optimize.brentq(lambda r: spearman_of_parameter(family, r, df) - rho_s, lo, hi, xtol=1e-4)
        logger.info(f"Student copula (df={df}) with Spearman's rho {rho_s} has correlation {theta:.4f} (Monte Carlo).")
        return theta
    if family is CopulaFamily.GUMBEL and rho_s == 0:
        return 1.0
    lo, hi = (1e-6, 50.0) if family is CopulaFamily.CLAYTON else (1.0, 100.0)
    return optimize.brentq(lambda theta: spearman_of_parameter(family, theta) - rho_s, lo, hi, xtol=1e-10)

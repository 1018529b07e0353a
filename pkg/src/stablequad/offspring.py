"""Critical offspring laws with polynomial tails of index alpha in (1, 2).

The family is defined by the probability generating function

    phi(s) = s + c_phi * (1 - s)^alpha,       0 < c_phi <= 1/alpha,

which is critical (phi'(1) = 1) for every admissible ``c_phi`` and has

    pmf(0) = c_phi
    pmf(1) = 1 - c_phi * alpha
    pmf(k) = c_phi * (-1)^k * binom(alpha, k)          for k >= 2,

so that pmf(k+1) = pmf(k) * (k - alpha) / (k + 1) for k >= 2.  Partial
binomial sums give closed forms for the tail and for the first moment of
the tail, so normalization and criticality can be certified to full double
precision without truncation error:

    sum_{k >= x} pmf(k)   = -c_phi * G(x - alpha) / (G(1 - alpha) * G(x))
    sum_{k >= x} k pmf(k) =  c_phi * alpha * G(x - alpha) / (G(2 - alpha) * G(x - 1))

with G the gamma function.  The first of these behaves like c * x^(-alpha)
with tail constant c = c_phi / (alpha * G(-alpha)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .backend import kernels
from .errors import ConstructionError, ParameterError

DEFAULT_K_CUT = 2**16

_MASS_TOL = 1e-12
_MEAN_TOL = 1e-9


@dataclass(frozen=True)
class OffspringLaw:
    """Immutable critical offspring distribution with an alpha-stable tail.

    ``pmf_table`` holds exact probabilities for k = 0..k_cut; draws beyond
    the table use the product recurrence continued on demand, so sampling
    is exact in distribution with no truncation.
    """

    alpha: float
    c_phi: float
    k_cut: int
    c: float  # tail constant: x^alpha * P(X >= x) -> c
    pmf_table: np.ndarray = field(repr=False)
    cum_table: np.ndarray = field(repr=False)

    # -- probabilities -------------------------------------------------

    def pmf(self, k: int) -> float:
        """P(X = k); exact for any k, table-backed for k <= k_cut."""
        if k < 0:
            return 0.0
        if k <= self.k_cut:
            return float(self.pmf_table[k])
        # Gamma-ratio closed form of the same product recurrence.
        return self.c_phi * math.exp(math.lgamma(k - self.alpha) - math.lgamma(k + 1)) / math.gamma(-self.alpha)

    def tail_mass(self, x: int) -> float:
        """P(X >= x), in closed form."""
        if x <= 0:
            return 1.0
        if x == 1:
            return 1.0 - self.c_phi
        return -self.c_phi * math.exp(math.lgamma(x - self.alpha) - math.lgamma(x)) / math.gamma(1.0 - self.alpha)

    def tail_first_moment(self, x: int) -> float:
        """sum_{k >= x} k * pmf(k), in closed form (x >= 2)."""
        if x < 2:
            raise ParameterError("tail_first_moment requires x >= 2")
        return (
            self.c_phi
            * self.alpha
            * math.exp(math.lgamma(x - self.alpha) - math.lgamma(x - 1))
            / math.gamma(2.0 - self.alpha)
        )

    def mean(self) -> float:
        """Table mass-weighted mean plus the analytic tail remainder."""
        head = math.fsum(float(k * p) for k, p in enumerate(self.pmf_table))
        return head + self.tail_first_moment(self.k_cut + 1)

    # -- sampling ------------------------------------------------------

    def sample(self, rng: np.random.Generator, size: int | None = None):
        """Draw from the law by inversion; exact including the tail.

        With ``size=None`` returns a python int, else an int64 array.
        """
        if size is None:
            u = rng.random(1)
            return int(kernels.draw_offspring(self.cum_table, self.alpha, self.c_phi, u)[0])
        u = rng.random(size)
        return kernels.draw_offspring(self.cum_table, self.alpha, self.c_phi, u)


def build_offspring_law(alpha: float, c_phi: float | None = None, k_cut: int = DEFAULT_K_CUT) -> OffspringLaw:
    """Construct the law for tail index ``alpha``.

    ``c_phi`` defaults to 1/alpha, which zeroes pmf(1).  ``k_cut`` is the
    length of the exact table used for inversion sampling.
    """
    if not (1.0 < alpha < 2.0):
        raise ParameterError(f"alpha must lie in (1, 2), got {alpha}")
    if c_phi is None:
        c_phi = 1.0 / alpha
    if not (0.0 < c_phi <= 1.0 / alpha):
        raise ParameterError(f"c_phi must lie in (0, 1/alpha], got {c_phi}")
    if k_cut < 64:
        raise ParameterError(f"k_cut must be at least 64, got {k_cut}")

    pmf = np.zeros(k_cut + 1)
    pmf[0] = c_phi
    pmf[1] = 1.0 - c_phi * alpha
    pmf[2] = c_phi * alpha * (alpha - 1.0) / 2.0
    k = np.arange(2, k_cut, dtype=np.float64)
    pmf[3:] = pmf[2] * np.cumprod((k - alpha) / (k + 1.0))
    cum = np.cumsum(pmf)

    law = OffspringLaw(
        alpha=alpha,
        c_phi=c_phi,
        k_cut=k_cut,
        c=c_phi / (alpha * math.gamma(-alpha)),
        pmf_table=pmf,
        cum_table=cum,
    )

    mass = math.fsum(float(p) for p in pmf) + law.tail_mass(k_cut + 1)
    if abs(mass - 1.0) > _MASS_TOL:
        raise ConstructionError(f"pmf table normalization off by {mass - 1.0:.3e}")
    mean = law.mean()
    if abs(mean - 1.0) > _MEAN_TOL:
        raise ConstructionError(f"law is not critical: mean off by {mean - 1.0:.3e}")
    return law

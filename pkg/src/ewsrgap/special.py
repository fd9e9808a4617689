"""Special functions and quadrature backing the closed-form gap limits.

Euler's constant, harmonic numbers, the exponential integral E1 (and
its scaled generalizations), Gauss-Laguerre rules, and Gamma-variate
sampling. These are the only pieces of classical analysis the rest of
the package relies on, so they are kept together and tested against
independent identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from .errors import DomainError

# Largest argument for which exp(x) * scipy E_n(x) is formed directly;
# beyond it E_n(x) underflows toward subnormals and the scaled
# continued fraction takes over.
_SCALED_SPLIT = 600.0

# Machine epsilon for the Lentz iterations below.
_EPS = np.finfo(float).eps


def euler_gamma() -> float:
    """Euler-Mascheroni constant gamma = 0.57721566490153286...

    Returns
    -------
    float
        gamma to full double precision.
    """
    return float(np.euler_gamma)


def harmonic(M: int) -> float:
    """Harmonic number H_M = sum_{k=1}^{M} 1/k.

    Terms are accumulated smallest first (k = M down to 1), which keeps
    the rounding error of the running sum near one ulp of the result.
    Note that even so, ``harmonic(M) - harmonic(M-1)`` is generally not
    bitwise equal to ``1/M``: the difference of two correctly computed
    sums can deviate by up to about one ulp of H_M, which dwarfs the
    ulp of 1/M once M is large. Callers needing the exact increment
    should use 1/M directly.

    Parameters
    ----------
    M : int
        Number of terms, M >= 1.

    Returns
    -------
    float
        H_M.
    """
    if not isinstance(M, (int, np.integer)) or isinstance(M, bool):
        raise DomainError(f"harmonic expects an integer M >= 1, got {M!r}")
    if M < 1:
        raise DomainError(f"harmonic is defined for M >= 1, got M={M}")
    total = 0.0
    for k in range(int(M), 0, -1):
        total += 1.0 / k
    return total


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) = int_x^inf e^{-t}/t dt for x > 0.

    Power series for x <= 1, modified Lentz continued fraction for
    x > 1; relative accuracy is better than 1e-12 across the domain.

    Parameters
    ----------
    x : float
        Argument, strictly positive.

    Returns
    -------
    float
        E1(x).
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"exp_integral_e1 requires x > 0, got {x}")
    if x <= 1.0:
        # E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        total = -float(np.euler_gamma) - math.log(x)
        term = 1.0
        for k in range(1, 60):
            term *= -x / k
            contrib = -term / k
            total += contrib
            if abs(contrib) < _EPS * abs(total):
                break
        return total
    return math.exp(-x) * _e1_cf_scaled(x)


def _e1_cf_scaled(x: float) -> float:
    """e^x * E1(x) for x > 1 via the even-contracted continued fraction."""
    # K = (x+1) - 1^2/((x+3) - 2^2/((x+5) - ...)), E1 = e^{-x}/K.
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for j in range(1, 200):
        a = -float(j * j)
        b += 2.0
        d = b + a * d
        if abs(d) < tiny:
            d = tiny
        c = b + a / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _EPS:
            return f
    raise DomainError(f"continued fraction for E1 failed to converge at x={x}")


def _en_cf_scaled(n: int, x: float) -> float:
    """e^x * E_n(x) for large x via the generalized continued fraction."""
    # K = (x+n) - 1*n/((x+n+2) - 2(n+1)/((x+n+4) - ...)), E_n = e^{-x}/K.
    tiny = 1e-300
    b = x + n
    c = 1.0 / tiny
    d = 1.0 / b
    f = d
    for j in range(1, 300):
        a = -float(j * (n - 1 + j))
        b += 2.0
        d = b + a * d
        if abs(d) < tiny:
            d = tiny
        c = b + a / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _EPS:
            return f
    raise DomainError(f"continued fraction for E_{n} failed to converge at x={x}")


def expn_scaled(n: int, x: float) -> float:
    """e^x * E_n(x) for x > 0, stable for arbitrarily large x.

    For x <= 600 the product is formed directly (E_n stays normal
    there); above that the scaled continued fraction is used, so the
    result never over- or underflows even though e^x and E_n(x)
    individually would.

    Parameters
    ----------
    n : int
        Order, n >= 1.
    x : float
        Argument, strictly positive.

    Returns
    -------
    float
        e^x E_n(x).
    """
    if n < 1:
        raise DomainError(f"expn_scaled requires order n >= 1, got {n}")
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"expn_scaled requires x > 0, got {x}")
    if x <= _SCALED_SPLIT:
        if n == 1:
            base = exp_integral_e1(x)
        else:
            base = float(scipy.special.expn(n, x))
        return math.exp(x) * base
    return _en_cf_scaled(n, x)


@dataclass
class QuadratureRule:
    """Nodes and weights of a quadrature rule for weight e^{-x} on [0, inf).

    Invariants checked at construction: equal lengths, strictly
    positive weights, and total weight 1 within 1e-12 (the rule must
    integrate constants exactly).
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise DomainError("nodes and weights must be 1-d arrays of equal length")
        if np.any(self.weights <= 0.0):
            raise DomainError("quadrature weights must be strictly positive")
        total = float(np.sum(self.weights))
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"weights sum to {total!r}, expected 1 within 1e-12")

    def integrate(self, f) -> float:
        """Approximate int_0^inf f(x) e^{-x} dx."""
        return float(np.sum(self.weights * f(self.nodes)))


def gauss_laguerre(n: int) -> QuadratureRule:
    """Gauss-Laguerre rule with n points for weight e^{-x} on [0, inf).

    Integrates polynomials of degree <= 2n-1 exactly. For n above
    roughly 200 the smallest weights underflow double precision to
    exact zero; those node/weight pairs are dropped (they cannot
    contribute to any double-precision quadrature sum), so the
    returned rule may hold slightly fewer than n points while keeping
    every weight strictly positive.

    Parameters
    ----------
    n : int
        Point count, 1 <= n <= 256.

    Returns
    -------
    QuadratureRule
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise DomainError(f"gauss_laguerre expects an integer point count, got {n!r}")
    if n < 1 or n > 256:
        raise DomainError(f"gauss_laguerre supports 1 <= n <= 256, got {n}")
    nodes, weights = scipy.special.roots_laguerre(int(n))
    keep = weights > 0.0
    return QuadratureRule(nodes=nodes[keep], weights=weights[keep])


def sample_gamma(shape: float, rng: np.random.Generator) -> float:
    """One draw from Gamma(shape, scale=1).

    Parameters
    ----------
    shape : float
        Shape parameter, strictly positive. Gamma(m, 1) equals
        (1/2) chi^2 with 2m degrees of freedom.
    rng : numpy.random.Generator
        Caller-owned stream; this call advances it.

    Returns
    -------
    float
    """
    shape = float(shape)
    if not shape > 0.0:
        raise DomainError(f"sample_gamma requires shape > 0, got {shape}")
    return float(rng.standard_gamma(shape))

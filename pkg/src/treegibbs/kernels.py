"""Scalar kernels shared by the fixed-point solver and the extremality bounds.

Everything here is a pure function of its arguments:

* ``f_theta(theta, h) = arctanh(theta * tanh(h))`` -- the field recursion
  kernel of the nearest-neighbour Ising model on a tree, with
  ``theta = tanh(beta * J)``;
* ``k_beta`` -- the variation-distance kernel
  ``1/(exp(-2 b J) a + 1) - 1/(exp(2 b J) a + 1)``, maximised at ``a = 1``
  where it equals ``theta``;
* ``big_f(alpha, x) = (alpha + x) / (1 + alpha x)`` -- the Moebius map that
  conjugates ``f_theta`` to a rational map of ``exp(2 h)``:
  ``exp(2 f_theta(h)) = big_f(exp(2 h))`` when ``alpha = exp(-2 b J)``.

All functions accept floats or numpy arrays and preserve the input kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# arctanh is evaluated as 0.5*log((1+x)/(1-x)) and refuses inputs within
# this distance of the singularity instead of clamping: a value that close
# to +-1 means an upstream iteration diverged and should be surfaced.
ATANH_GUARD = 1e-15


def arctanh(x):
    """Inverse hyperbolic tangent, guarded against |x| >= 1 - 1e-15.

    Evaluated as sign(x) * 0.5 * log((1+|x|)/(1-|x|)) so that oddness holds
    bitwise, which downstream symmetry checks rely on.
    """
    if isinstance(x, np.ndarray):
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) >= 1.0 - ATANH_GUARD):
            raise ValueError("arctanh argument must be finite with |x| < 1 - 1e-15")
        mag = np.abs(x)
        return np.sign(x) * (0.5 * np.log((1.0 + mag) / (1.0 - mag)))
    x = float(x)
    if not math.isfinite(x) or abs(x) >= 1.0 - ATANH_GUARD:
        raise ValueError(f"arctanh argument out of domain: {x!r}")
    if x == 0.0:
        return 0.0
    mag = abs(x)
    return math.copysign(0.5 * math.log((1.0 + mag) / (1.0 - mag)), x)


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not math.isfinite(theta) or abs(theta) >= 1.0:
        raise ValueError(f"theta must lie in (-1, 1), got {theta!r}")
    return theta


def f_theta(theta: float, h):
    """Recursion kernel arctanh(theta * tanh(h)).

    Odd in both arguments, bounded by arctanh(|theta|), strictly increasing
    in ``h`` for ``theta > 0``.
    """
    theta = _check_theta(theta)
    if isinstance(h, np.ndarray):
        if not np.all(np.isfinite(h)):
            raise ValueError("field argument must be finite")
        return arctanh(theta * np.tanh(h))
    h = float(h)
    if not math.isfinite(h):
        raise ValueError(f"field argument must be finite, got {h!r}")
    return arctanh(theta * math.tanh(h))


def f_theta_prime(theta: float, h):
    """d/dh of ``f_theta``: theta * (1 - tanh(h)^2) / (1 - theta^2 tanh(h)^2).

    Equals ``theta`` at ``h = 0`` and lies in ``(0, theta]`` for
    ``theta > 0``.
    """
    theta = _check_theta(theta)
    if isinstance(h, np.ndarray):
        if not np.all(np.isfinite(h)):
            raise ValueError("field argument must be finite")
        t = np.tanh(h)
    else:
        h = float(h)
        if not math.isfinite(h):
            raise ValueError(f"field argument must be finite, got {h!r}")
        t = math.tanh(h)
    return theta * (1.0 - t * t) / (1.0 - theta * theta * t * t)


@dataclass(frozen=True)
class Coupling:
    """Interaction energy J, inverse temperature beta and theta = tanh(beta*J)."""

    J: float
    beta: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.J) and math.isfinite(self.beta)):
            raise ValueError("J and beta must be finite")
        if self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")
        if abs(self.theta) >= 1.0:
            raise ValueError(f"theta must lie in (-1, 1), got {self.theta!r}")
        expected = math.tanh(self.beta * self.J)
        scale = max(abs(expected), abs(self.theta), 1e-300)
        if abs(self.theta - expected) > 1e-14 * scale + 1e-300:
            raise ValueError(
                f"theta={self.theta!r} inconsistent with tanh(beta*J)={expected!r}"
            )

    @classmethod
    def from_interaction(cls, J: float, beta: float) -> "Coupling":
        return cls(J=float(J), beta=float(beta), theta=math.tanh(float(beta) * float(J)))

    @classmethod
    def from_theta(cls, theta: float, J: float | None = None) -> "Coupling":
        """Coupling with the given theta; J defaults to sign(theta) (0 -> J=0)."""
        theta = _check_theta(theta)
        if J is None:
            J = math.copysign(1.0, theta) if theta != 0.0 else 0.0
        J = float(J)
        if theta == 0.0:
            if J != 0.0:
                raise ValueError("theta = 0 requires J = 0")
            return cls(J=0.0, beta=1.0, theta=0.0)
        if J == 0.0 or (J > 0) != (theta > 0):
            raise ValueError(f"J={J!r} has the wrong sign for theta={theta!r}")
        beta = arctanh(theta) / J
        return cls(J=J, beta=beta, theta=theta)

    @property
    def beta_j(self) -> float:
        return self.beta * self.J


def k_beta(coupling: Coupling, a):
    """Variation-distance kernel 1/(e^{-2bJ} a + 1) - 1/(e^{2bJ} a + 1).

    Defined for a >= 0; increasing on [0, 1], decreasing on [1, inf),
    with maximum k_beta(1) = tanh(beta*J) = theta.
    """
    bj = coupling.beta_j
    if isinstance(a, np.ndarray):
        if np.any(a < 0.0):
            raise ValueError("k_beta argument must be non-negative")
        return 1.0 / (np.exp(-2.0 * bj) * a + 1.0) - 1.0 / (np.exp(2.0 * bj) * a + 1.0)
    a = float(a)
    if a < 0.0:
        raise ValueError(f"k_beta argument must be non-negative, got {a!r}")
    return 1.0 / (math.exp(-2.0 * bj) * a + 1.0) - 1.0 / (math.exp(2.0 * bj) * a + 1.0)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def big_f(alpha: float, x):
    """Moebius map F(x) = (alpha + x) / (1 + alpha x) on x >= 0.

    Strictly increasing, maps [0, inf) into [alpha, 1/alpha).
    """
    alpha = _check_alpha(alpha)
    if isinstance(x, np.ndarray):
        if np.any(x < 0.0):
            raise ValueError("big_f argument must be non-negative")
        return (alpha + x) / (1.0 + alpha * x)
    x = float(x)
    if x < 0.0:
        raise ValueError(f"big_f argument must be non-negative, got {x!r}")
    return (alpha + x) / (1.0 + alpha * x)


def big_f_prime(alpha: float, x):
    """d/dx of ``big_f``: (1 - alpha^2) / (1 + alpha x)^2."""
    alpha = _check_alpha(alpha)
    if isinstance(x, np.ndarray):
        if np.any(x < 0.0):
            raise ValueError("big_f_prime argument must be non-negative")
    else:
        x = float(x)
        if x < 0.0:
            raise ValueError(f"big_f_prime argument must be non-negative, got {x!r}")
    return (1.0 - alpha * alpha) / (1.0 + alpha * x) ** 2

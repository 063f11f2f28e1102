"""Bedload transport closures written as ``xi * q_b = eps * u * qb_tilde(|u|)``.

Two closures are provided, :class:`Grass` and :class:`MeyerPeterMuller`.
Both are immutable; parameters are validated once in ``__post_init__`` and
every evaluator afterwards is a total function of the flow speed.

All evaluators accept scalars or numpy arrays of speeds ``|u| >= 0``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace

import numpy as np

GRAVITY = 9.81

# Codes understood by the compiled kernels (see ``_kernels.lambda_b_tilde``).
GRASS_KIND = 0
MPM_KIND = 1

# |u| floor used where qb_tilde'(|u|)/|u| is needed at stagnation points.
SPEED_FLOOR = 1e-12


class SedimentLaw(ABC):
    """Common interface of the bedload closures."""

    gamma: float

    @property
    def xi(self) -> float:
        """Porosity factor ``1/(1-gamma)``."""
        return 1.0 / (1.0 - self.gamma)

    @property
    @abstractmethod
    def epsilon(self) -> float:
        """Time scaling parameter."""

    @abstractmethod
    def qb_tilde(self, speed):
        """Flux factor ``qb_tilde(|u|)``."""

    @abstractmethod
    def qb_tilde_prime(self, speed):
        """Analytic derivative of :meth:`qb_tilde` with respect to ``|u|``."""

    @abstractmethod
    def lambda_b_tilde(self, speed):
        """``qb_tilde + |u| qb_tilde'``, i.e. d(s qb_tilde(s))/ds."""

    @abstractmethod
    def critical_velocity(self) -> float:
        """Threshold speed below which no sediment moves."""

    @abstractmethod
    def velocity_degree(self) -> float:
        """Homogeneity degree ``k`` with ``qb_tilde(U s) = U**k qb_tilde*(s)``."""

    @abstractmethod
    def rescaled(self, velocity_scale: float, height_scale: float,
                 gravity_scale: float) -> "SedimentLaw":
        """Same closure expressed in nondimensional units."""

    @abstractmethod
    def kernel_params(self) -> tuple[int, float]:
        """``(kind, parameter)`` pair consumed by the compiled kernels."""

    def qb_tilde_prime_over_speed(self, speed):
        """``qb_tilde'(|u|)/|u|`` with ``|u|`` floored at ``SPEED_FLOOR``."""
        s = np.maximum(np.asarray(speed, dtype=float), SPEED_FLOOR)
        return self.qb_tilde_prime(s) / s

    def bedload(self, u):
        """Volumetric bedload discharge ``q_b`` for signed velocity ``u``."""
        u = np.asarray(u, dtype=float)
        return self.epsilon / self.xi * u * self.qb_tilde(np.abs(u))


def _check_gamma(gamma: float) -> None:
    if not (0.0 <= gamma < 1.0):
        raise ValueError(f"porosity gamma must lie in [0, 1), got {gamma}")


@dataclass(frozen=True)
class Grass(SedimentLaw):
    """Grass closure ``q_b = A_g u |u|^(m-1)``.

    ``A_g = 0`` is accepted and switches the bed off (``epsilon = 0``).
    """

    A_g: float = 0.001
    m: float = 3.0
    gamma: float = 0.4

    def __post_init__(self):
        if not (1.0 <= self.m <= 4.0):
            raise ValueError(f"Grass exponent m must lie in [1, 4], got {self.m}")
        if not (math.isfinite(self.A_g) and self.A_g >= 0.0):
            raise ValueError(f"A_g must be finite and non-negative, got {self.A_g}")
        _check_gamma(self.gamma)

    @property
    def epsilon(self) -> float:
        return self.xi * self.A_g

    def qb_tilde(self, speed):
        return np.power(np.asarray(speed, dtype=float), self.m - 1.0)

    def qb_tilde_prime(self, speed):
        s = np.asarray(speed, dtype=float)
        if self.m == 1.0:
            return np.zeros_like(s)
        return (self.m - 1.0) * np.power(s, self.m - 2.0)

    def lambda_b_tilde(self, speed):
        return self.m * np.power(np.asarray(speed, dtype=float), self.m - 1.0)

    def critical_velocity(self) -> float:
        return 0.0

    def velocity_degree(self) -> float:
        return self.m - 1.0

    def rescaled(self, velocity_scale, height_scale, gravity_scale):
        factor = velocity_scale ** self.velocity_degree() / height_scale
        return replace(self, A_g=self.A_g * factor)

    def kernel_params(self):
        return GRASS_KIND, float(self.m)


@dataclass(frozen=True)
class MeyerPeterMuller(SedimentLaw):
    """Meyer-Peter-Muller closure with Darcy-Weisbach bottom stress.

    Parameters are the density ratio ``s``, the median grain diameter ``d_s``
    (m), the Darcy-Weisbach coefficient ``f`` and the critical Shields
    parameter ``tau_cr_star``.  Use :meth:`from_critical_velocity` to build a
    law from ``(u_cr, epsilon)`` directly.
    """

    s: float = 2.65
    d_s: float = 0.001
    f: float = 0.1
    tau_cr_star: float = 0.047
    gamma: float = 0.4
    g: float = GRAVITY

    def __post_init__(self):
        if not self.s > 1.0:
            raise ValueError(f"density ratio s must exceed 1, got {self.s}")
        if not self.f > 0.0:
            raise ValueError(f"Darcy-Weisbach f must be positive, got {self.f}")
        if not self.d_s > 0.0:
            raise ValueError(f"grain diameter d_s must be positive, got {self.d_s}")
        if not self.tau_cr_star >= 0.0:
            raise ValueError("critical Shields parameter must be non-negative")
        if not self.g > 0.0:
            raise ValueError("gravity must be positive")
        _check_gamma(self.gamma)

    @classmethod
    def from_critical_velocity(cls, u_cr: float, epsilon: float, gamma: float = 0.4,
                               g: float = GRAVITY, s: float = 2.65,
                               tau_cr_star: float = 0.047) -> "MeyerPeterMuller":
        """Pick ``f`` and ``d_s`` so the law has the requested ``u_cr`` and ``epsilon``."""
        if u_cr < 0.0 or epsilon <= 0.0:
            raise ValueError("need u_cr >= 0 and epsilon > 0")
        xi = 1.0 / (1.0 - gamma)
        f = (8.0 * (epsilon * (s - 1.0) * g / xi) ** 2) ** (1.0 / 3.0)
        d_s = u_cr**2 * f / (8.0 * (s - 1.0) * g * tau_cr_star)
        if d_s == 0.0:
            # u_cr is zero or so small that the grain size underflows
            return cls(s=s, d_s=1e-3, f=f, tau_cr_star=0.0, gamma=gamma, g=g)
        return cls(s=s, d_s=d_s, f=f, tau_cr_star=tau_cr_star, gamma=gamma, g=g)

    @property
    def epsilon(self) -> float:
        return self.xi / ((self.s - 1.0) * self.g) * math.sqrt(self.f**3 / 8.0)

    def critical_velocity(self) -> float:
        return math.sqrt(8.0 * (self.s - 1.0) * self.g * self.d_s * self.tau_cr_star / self.f)

    def qb_tilde(self, speed):
        s = np.asarray(speed, dtype=float)
        excess = np.maximum(s * s - self.critical_velocity() ** 2, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(excess > 0.0, excess**1.5 / np.where(s > 0, s, 1.0), 0.0)
        return out

    def qb_tilde_prime(self, speed):
        s = np.asarray(speed, dtype=float)
        uc2 = self.critical_velocity() ** 2
        excess = np.maximum(s * s - uc2, 0.0)
        safe = np.where(s > 0, s, 1.0)
        # at s == u_cr the right-hand derivative (zero) is used
        return np.where(excess > 0.0, np.sqrt(excess) * (2.0 * s * s + uc2) / safe**2, 0.0)

    def lambda_b_tilde(self, speed):
        s = np.asarray(speed, dtype=float)
        excess = np.maximum(s * s - self.critical_velocity() ** 2, 0.0)
        return 3.0 * s * np.sqrt(excess)

    def velocity_degree(self) -> float:
        return 2.0

    def rescaled(self, velocity_scale, height_scale, gravity_scale):
        eps = self.epsilon * velocity_scale**2 / height_scale
        return MeyerPeterMuller.from_critical_velocity(
            self.critical_velocity() / velocity_scale, eps, gamma=self.gamma,
            g=self.g / gravity_scale, s=self.s,
            tau_cr_star=self.tau_cr_star if self.tau_cr_star > 0 else 0.047)

    def kernel_params(self):
        return MPM_KIND, float(self.critical_velocity())


def spread_angle_devriend(m: float) -> float:
    """Analytic star-pattern spread angle (degrees) for a Grass exponent ``m``."""
    return math.degrees(math.atan(3.0 * math.sqrt(3.0) * (m - 1.0) / (9.0 * m - 1.0)))

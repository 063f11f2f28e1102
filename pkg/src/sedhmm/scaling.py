"""Characteristic scales used to make the equations dimensionless.

Lengths along the channel scale with ``L``, depths and bed heights with
``H``, velocities with ``U``; time then scales with ``L/U`` and gravity with
``U**2/H``.  The sediment law is rescaled by its own velocity homogeneity
(see :meth:`~sedhmm.sediment.SedimentLaw.rescaled`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import FlowState, Grid
from .sediment import SedimentLaw


@dataclass(frozen=True)
class Scales:
    length: float = 1.0
    height: float = 1.0
    velocity: float = 1.0

    def __post_init__(self):
        if min(self.length, self.height, self.velocity) <= 0:
            raise ValueError("scales must be positive")

    @property
    def time(self) -> float:
        return self.length / self.velocity

    @property
    def gravity(self) -> float:
        return self.velocity**2 / self.height

    @property
    def discharge(self) -> float:
        return self.height * self.velocity

    @property
    def is_identity(self) -> bool:
        return self.length == self.height == self.velocity == 1.0

    def grid(self, grid: Grid) -> Grid:
        return grid.scaled(self.length)

    def unscale_grid(self, grid: Grid) -> Grid:
        return grid.scaled(1.0 / self.length)

    def state(self, state: FlowState) -> FlowState:
        return state.scaled(self.height, self.velocity)

    def unscale_state(self, state: FlowState) -> FlowState:
        return state.scaled(1.0 / self.height, 1.0 / self.velocity)

    def bed(self, bed) -> np.ndarray:
        return np.asarray(bed, dtype=float) / self.height

    def unscale_bed(self, bed) -> np.ndarray:
        return np.asarray(bed, dtype=float) * self.height

    def law(self, law: SedimentLaw) -> SedimentLaw:
        if self.is_identity:
            return law
        return law.rescaled(self.velocity, self.height, self.gravity)

    def g(self, g: float) -> float:
        return g / self.gravity

    def t(self, t: float) -> float:
        return t / self.time

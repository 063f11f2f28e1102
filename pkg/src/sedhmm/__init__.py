"""Multiscale riverbed evolution: steady shallow water sampled by a slow bed solver."""

from .driver import MacroConfig, RunRecord, SimConfig, run
from .grid import FlowState, Grid
from .hydro import Boundary, SteadyConfig, solve_steady
from .sediment import Grass, MeyerPeterMuller

__all__ = ["Boundary", "FlowState", "Grass", "Grid", "MacroConfig", "MeyerPeterMuller",
           "RunRecord", "SimConfig", "SteadyConfig", "run", "solve_steady"]

"""Competitive erosion on the cylinder graph and its sibling processes.

Modules
-------
cylinder   the graph Cyl_n, its diagonal augmentation and walk kernel
erosion    the two-colour chain, height function and good sets
regions    reachability regions, column profiles, outer boundary
potential  Green functions, exit laws, flows and the level-set predictor
idla       internal DLA on the half-infinite cylinder and couplings
sorting    the diffusive sorting chain
stats      drift, hitting times, occupancy and tail bounds
cli        command-line front end
"""
from .cylinder import Site, is_star_connected, neighbors, star_neighbors
from .erosion import (Coloring, GoodSetFlags, StepTrace, classify,
                      detect_blue_over_red_blocking, erosion_step, height,
                      make_initial, run_chain)
from .errors import ResourceLimitError, SolverError, WalkCapExceeded
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "Site", "neighbors", "star_neighbors", "is_star_connected",
    "Coloring", "StepTrace", "GoodSetFlags", "make_initial", "erosion_step",
    "height", "classify", "detect_blue_over_red_blocking", "run_chain",
    "RngStream", "WalkCapExceeded", "SolverError", "ResourceLimitError",
]

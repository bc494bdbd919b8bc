"""Exact solver, optimality prover and simulator for catch-the-random-walking-cat games."""
from .topology import Kind, Topology, build_topology, parse_topology, move_kernel, symmetries
from .strategy import (Strategy, parse_strategy, format_strategy, mirror_strategy, box_at,
                       sweep_strategy, twice_left_twice_right, preset)
from .evaluate import EvalResult, evaluate_strategy

__version__ = "0.1.0"

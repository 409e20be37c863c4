"""Fault containment in self-stabilizing graph algorithms: simulation and analysis."""

from .engine import Configuration, RoundTrace, random_config, run, step
from .errors import (
    CapacityError, ConfigError, ConstructionError, ContractError, DivergenceError,
    FaultContainError, ParameterError, StructuralError,
)
from .faults import (
    KEEP, BroadcastCorruption, ConflictSet, MemoryCorruption, legitimate_config, n_conf,
    worst_case_scenarios,
)
from .graph import Graph, GraphSpec, generate, independent_degree, max_independent_degree
from .markov import (
    AbsorbingChain, ChainSolution, containment_bound_memory, dominating_chain, expected_series,
    harmonic_bound, memory_chain, message_chain, solve_absorbing, variance_bound,
    variance_series,
)
from .protocols import A1, A2, A3, ACOL, BOTTOM, ColorState, Mis, get_protocol
from .rng import Streams

__version__ = "0.1.0"

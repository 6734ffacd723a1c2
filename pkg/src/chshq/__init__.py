"""Classical strategies for CHSH_q nonlocal games over prime fields."""

from .audit import AuditReport, audit, solutions_for_k
from .construction import (ConstructionParams, ConstructionReport, alice_rule, bob_rule, build_strategy,
                           derive_params)
from .game import DeterministicStrategy, EvaluationReport, evaluate, quantum_upper_bound, trivial_strategy
from .incidence import count_incidences, geometry_to_strategy, strategy_to_geometry
from .oracle import OracleResult, optimal_classical_value
from .prime_field import PrimeModulus, finv, icbrt, is_prime

__version__ = "0.1.0"

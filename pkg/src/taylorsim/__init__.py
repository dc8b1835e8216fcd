"""Corrected truncated-Taylor-series Hamiltonian simulation on dense matrices.

Typical use::

    from taylorsim import pauli_instance, ProblemInstance, simulate

    d = pauli_instance(1, [(0.5, "X"), (0.5, "Z")])
    U, report = simulate(ProblemInstance(d, t=1.0, epsilon=1e-8))
"""

from .correction import (
    CorrectionOperator,
    apply_correction,
    build_correction,
    circuit_level_correction,
    final_oaa,
    plan_instance,
    simulate,
)
from .costs import GateTally, baseline_uncorrected, tally
from .exceptions import (
    ConsistencyError,
    InstanceTooLargeError,
    InvalidInputError,
    ParseError,
    PlanInfeasibleError,
    TaylorSimError,
)
from .hamiltonian import (
    HamiltonianDecomposition,
    ProblemInstance,
    assemble,
    parse_instance,
    pauli_instance,
    random_pauli_instance,
    serialize_instance,
    strength,
    validate,
)
from .harness import bounds_table, sweep_epsilon, sweep_time, verify_circuit
from .lcu import (
    build_B,
    build_lcu,
    build_select_v,
    build_w_circ,
    oaa_step,
    pad_to_two,
    run_segments,
    v_oaa_matrix,
)
from .linalg import exact_evolution, materialize_series, operator_distance, spectral_norm
from .report import RunReport
from .series import (
    PowerSeries,
    SimulationPlan,
    choose_K,
    choose_Q,
    choose_r,
    exp_series,
    lemma_bounds_report,
    majorant,
    make_plan,
)

__version__ = "0.1.0"

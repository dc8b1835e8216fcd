"""Dense realisation of one LCU segment and its amplification.

The ancilla register is a flat index over LCU words (plus two padding words),
and operators act on ``ancilla (x) system`` with the ancilla index major, so
the flagged block ``<0|M|0>`` is the leading ``dim x dim`` sub-matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .costs import GateTally
from .exceptions import InstanceTooLargeError, InvalidInputError, PlanInfeasibleError
from .hamiltonian import HamiltonianDecomposition, assemble, validate
from .linalg import dagger, exact_evolution, materialize_series
from .series import SimulationPlan, exp_series, power, truncate, v_oaa_series

MAX_WORDS = 10**6
MAX_CIRCUIT_ANCILLA = 4096


@dataclass(frozen=True, eq=False)
class LCUExpansion:
    """``sum_j weights[j] * phases[j] * H_{words[j][0]} H_{words[j][1]} ...``."""

    weights: np.ndarray
    phases: np.ndarray
    words: tuple[tuple[int, ...], ...]
    padded: bool = False

    @property
    def s(self) -> float:
        return math.fsum(self.weights.tolist())

    @property
    def order(self) -> int:
        """Longest word length, i.e. controlled-H slots needed by select(V)."""
        return max((len(w) for w in self.words), default=0)

    def __len__(self):
        return len(self.words)


def word_count(L: int, orders) -> int:
    return sum(L**k for k in orders)


def lcu_from_coefficients(d: HamiltonianDecomposition, coeffs) -> LCUExpansion:
    """Expand ``sum_k c_k (-iH)^k`` over words of unitaries.

    Word ``(l_1..l_k)`` gets weight ``|c_k| alpha_{l_1}..alpha_{l_k}`` and
    phase ``(c_k/|c_k|) (-i)^k``; orders with ``c_k == 0`` are skipped.
    """
    coeffs = np.asarray(getattr(coeffs, "coeffs", coeffs), dtype=np.complex128)
    orders = [k for k, c in enumerate(coeffs) if c != 0]
    n = word_count(d.L, orders)
    if n > MAX_WORDS:
        raise InstanceTooLargeError(f"LCU would have {n} words (limit {MAX_WORDS})")
    alphas = np.asarray(d.alphas)
    weights, phases, words = [], [], []
    for k in orders:
        ck = coeffs[k]
        phase = ck / abs(ck) * (-1j) ** k
        for word in itertools.product(range(d.L), repeat=k):
            weights.append(abs(ck) * float(np.prod(alphas[list(word)])))
            phases.append(phase)
            words.append(word)
    return LCUExpansion(np.array(weights), np.array(phases, dtype=np.complex128), tuple(words))


def build_lcu(d: HamiltonianDecomposition, theta: float, K: int) -> LCUExpansion:
    """Words of the order-``K`` Taylor polynomial of ``exp(-iH theta)``."""
    if validate(d):
        raise InvalidInputError("invalid decomposition")
    if not theta > 0:
        raise InvalidInputError("theta must be positive")
    if K < 2:
        raise InvalidInputError("K must be at least 2")
    if word_count(d.L, range(K + 1)) > MAX_WORDS:
        raise InstanceTooLargeError(f"order {K} with L={d.L} exceeds {MAX_WORDS} words")
    return lcu_from_coefficients(d, exp_series(theta, K))


def pad_to_two(lcu: LCUExpansion) -> LCUExpansion:
    """Raise the total weight to exactly 2 with a cancelling +I / -I pair."""
    s = lcu.s
    if s > 2 + 1e-12:
        raise PlanInfeasibleError(f"LCU weight s={s:.6f} exceeds 2")
    extra = (2.0 - s) / 2
    if extra <= 0:
        return replace(lcu, padded=True)
    return LCUExpansion(
        np.concatenate([lcu.weights, [extra, extra]]),
        np.concatenate([lcu.phases, [1.0, -1.0]]).astype(np.complex128),
        lcu.words + ((), ()),
        padded=True,
    )


@dataclass(frozen=True, eq=False)
class CircuitOperator:
    """Dense unitary on ``ancilla (x) system``.

    ``controlled_h`` counts the controlled-H_l applications the operator
    costs under the gate model (one per select(V) slot).
    """

    ancilla_dim: int
    system_dim: int
    matrix: np.ndarray
    controlled_h: int = 0

    def flagged_block(self) -> np.ndarray:
        d = self.system_dim
        return self.matrix[:d, :d]

    def __matmul__(self, other: "CircuitOperator") -> "CircuitOperator":
        return CircuitOperator(self.ancilla_dim, self.system_dim, self.matrix @ other.matrix,
                               self.controlled_h + other.controlled_h)

    @property
    def H(self) -> "CircuitOperator":
        return CircuitOperator(self.ancilla_dim, self.system_dim, dagger(self.matrix),
                               self.controlled_h)


def flag_projector(ancilla_dim: int, system_dim: int) -> np.ndarray:
    P = np.zeros((ancilla_dim * system_dim,) * 2, dtype=np.complex128)
    P[:system_dim, :system_dim] = np.eye(system_dim)
    return P


def _householder_completion(v: np.ndarray) -> np.ndarray:
    """Unitary whose first column is the unit vector ``v`` (with ``v[0] >= 0``)."""
    n = v.size
    e0 = np.zeros(n, dtype=np.complex128)
    e0[0] = 1.0
    u = e0 - v
    nu = float(np.vdot(u, u).real)
    if nu < 1e-30:
        return np.eye(n, dtype=np.complex128)
    return np.eye(n, dtype=np.complex128) - 2.0 * np.outer(u, u.conj()) / nu


def build_B(lcu: LCUExpansion, system_dim: int = 1) -> CircuitOperator:
    """State preparation ``B|0> = sum_j sqrt(w_j / s) |j>`` (acting as ``B (x) I``)."""
    v = np.sqrt(lcu.weights / lcu.s).astype(np.complex128)
    B = _householder_completion(v)
    return CircuitOperator(len(lcu), system_dim, np.kron(B, np.eye(system_dim)))


def word_unitary(word, d: HamiltonianDecomposition) -> np.ndarray:
    U = np.eye(d.dim, dtype=np.complex128)
    for ell in word:
        U = U @ d.unitaries[ell]
    return U


def build_select_v(lcu: LCUExpansion, d: HamiltonianDecomposition) -> CircuitOperator:
    """Block-diagonal ``sum_j |j><j| (x) phase_j V_j``."""
    n, dim = len(lcu), d.dim
    M = np.zeros((n * dim, n * dim), dtype=np.complex128)
    cache: dict = {}
    for j, (phase, word) in enumerate(zip(lcu.phases, lcu.words)):
        if word not in cache:
            cache[word] = word_unitary(word, d)
        M[j * dim:(j + 1) * dim, j * dim:(j + 1) * dim] = phase * cache[word]
    return CircuitOperator(n, dim, M, controlled_h=lcu.order)


def build_w_circ(B: CircuitOperator, select_v: CircuitOperator) -> CircuitOperator:
    """``(B^dagger (x) I) select(V) (B (x) I)``; flagged block is ``LCU / s``."""
    if B.matrix.shape != select_v.matrix.shape:
        raise InvalidInputError("B and select(V) act on different spaces")
    M = dagger(B.matrix) @ select_v.matrix @ B.matrix
    return CircuitOperator(select_v.ancilla_dim, select_v.system_dim, M,
                           controlled_h=select_v.controlled_h)


def lcu_circuit(lcu: LCUExpansion, d: HamiltonianDecomposition) -> CircuitOperator:
    return build_w_circ(build_B(lcu, d.dim), build_select_v(lcu, d))


def oaa_step(w_circ: CircuitOperator) -> CircuitOperator:
    """One round of oblivious amplitude amplification, ``-W R W^dagger R W``.

    ``R = I - 2 |0><0| (x) I``.  With flagged block ``M = Vt/2`` the result's
    flagged block is ``3M - 4 M M^dagger M = Vt (3/2 - Vt^dagger Vt / 2)``.
    """
    W = w_circ.matrix
    R = np.eye(W.shape[0], dtype=np.complex128) - 2 * flag_projector(w_circ.ancilla_dim,
                                                                      w_circ.system_dim)
    M = -(W @ R @ dagger(W) @ R @ W)
    return CircuitOperator(w_circ.ancilla_dim, w_circ.system_dim, M,
                           controlled_h=3 * w_circ.controlled_h)


def v_oaa_matrix(Vt) -> np.ndarray:
    """``Vt (3/2 I - Vt^dagger Vt / 2)``."""
    Vt = np.asarray(Vt, dtype=np.complex128)
    return Vt @ (1.5 * np.eye(Vt.shape[0]) - 0.5 * dagger(Vt) @ Vt)


def segment_circuit(d: HamiltonianDecomposition, plan: SimulationPlan) -> CircuitOperator:
    """Padded LCU, its W circuit and one OAA round for a single segment."""
    lcu = pad_to_two(build_lcu(d, plan.theta, plan.K))
    if len(lcu) > MAX_CIRCUIT_ANCILLA:
        raise InstanceTooLargeError(
            f"circuit mode needs an ancilla of dimension {len(lcu)} (limit {MAX_CIRCUIT_ANCILLA})")
    return oaa_step(lcu_circuit(lcu, d))


def run_segments(d: HamiltonianDecomposition, plan: SimulationPlan,
                 mode: str = "operator") -> tuple[np.ndarray, GateTally]:
    """Return ``V_oaa^r`` and the controlled-H tally of the segment stage.

    ``operator`` mode raises the matrix formula to the r-th power.
    ``circuit`` mode builds the OAA circuit once and composes its flagged
    block r times, which is what fresh ancillas reset to ``|0>`` between
    segments amount to.
    """
    dim = d.dim
    if plan.t == 0:
        return np.eye(dim, dtype=np.complex128), GateTally.zero()
    if mode == "operator":
        H = assemble(d)
        Vt = materialize_series(truncate(exp_series(plan.theta, plan.K), plan.K), H)
        block = v_oaa_matrix(Vt)
        count = 3 * plan.K
    elif mode == "circuit":
        circuit = segment_circuit(d, plan)
        block = circuit.flagged_block().copy()
        count = circuit.controlled_h
    else:
        raise InvalidInputError(f"unknown mode {mode!r}")
    result = np.linalg.matrix_power(block, plan.r)
    return result, GateTally.from_stages(segment=plan.r * count, correction=0)


def run_segments_on_state(d: HamiltonianDecomposition, plan: SimulationPlan,
                          psi: np.ndarray) -> tuple[np.ndarray, list[float]]:
    """Push a state through r segment circuits with post-selected fresh ancillas.

    After each segment the ancilla is projected onto ``|0>`` and the system
    state renormalised.  Returns the final system state and the success
    probability of every segment.
    """
    circuit = segment_circuit(d, plan)
    n, dim = circuit.ancilla_dim, circuit.system_dim
    psi = np.asarray(psi, dtype=np.complex128)
    psi = psi / np.linalg.norm(psi)
    probs = []
    for _ in range(plan.r):
        full = np.zeros(n * dim, dtype=np.complex128)
        full[:dim] = psi
        out = circuit.matrix @ full
        flagged = out[:dim]
        p = float(np.vdot(flagged, flagged).real)
        probs.append(p)
        psi = flagged / math.sqrt(p)
    return psi, probs


def segment_operator_error(d: HamiltonianDecomposition, plan: SimulationPlan) -> float:
    """``||V_oaa - V||`` for one segment."""
    H = assemble(d)
    Vt = materialize_series(exp_series(plan.theta, plan.K), H)
    return float(np.linalg.norm(v_oaa_matrix(Vt) - exact_evolution(H, plan.theta), 2))


def v_oaa_power_series(plan: SimulationPlan):
    """Series of ``V_oaa^r`` capped at ``Q``."""
    Vt = truncate(exp_series(plan.theta, plan.Q), plan.K)
    return power(v_oaa_series(Vt), plan.r, plan.Q)

"""Sweeps over accuracy and time, and circuit-versus-operator verification."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .correction import (
    CIRCUIT_MAX_DIM,
    CIRCUIT_MAX_L,
    CIRCUIT_MAX_Q,
    FINAL_OAA_FACTOR,
    circuit_level_correction,
    plan_instance,
    simulate,
)
from .costs import baseline_uncorrected, tally
from .exceptions import InvalidInputError
from .hamiltonian import ProblemInstance, assemble
from .lcu import run_segments, run_segments_on_state, segment_circuit, v_oaa_matrix
from .linalg import exact_evolution, materialize_series, operator_distance
from .series import exp_series, lemma_bounds_report, make_plan

CSV_COLUMNS = ("T", "epsilon", "r", "K", "Q", "count_corrected", "count_uncorrected",
               "error_final")


@dataclass(frozen=True)
class SweepRow:
    T: float
    epsilon: float
    r: int
    K: int
    Q: int
    count_corrected: int
    count_uncorrected: int
    error_final: float

    @property
    def winner(self) -> str:
        if self.count_corrected < self.count_uncorrected:
            return "corrected"
        if self.count_corrected > self.count_uncorrected:
            return "uncorrected"
        return "tie"

    @property
    def within_bound(self) -> bool:
        return self.error_final <= FINAL_OAA_FACTOR * self.epsilon


def _row(args) -> SweepRow:
    p, mode = args
    _, report = simulate(p, mode=mode, strict=False)
    plan = report.plan
    base = baseline_uncorrected(plan["T"], p.epsilon)
    gates = tally(plan_instance(p)[0])
    return SweepRow(T=plan["T"], epsilon=p.epsilon, r=plan["r"], K=plan["K"], Q=plan["Q"],
                    count_corrected=gates.logical_total, count_uncorrected=base.count,
                    error_final=report.errors["final"])


def _run(instances, mode, workers):
    jobs = [(p, mode) for p in instances]
    if workers and workers > 1:
        # map() yields in submission order regardless of completion order
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_row, jobs))
    return [_row(job) for job in jobs]


def sweep_epsilon(instance: ProblemInstance, eps_list, mode="operator",
                  workers: int | None = None) -> list[SweepRow]:
    """One row per target accuracy; everything else held fixed."""
    return _run([replace(instance, epsilon=float(e)) for e in eps_list], mode, workers)


def sweep_time(instance: ProblemInstance, t_list, mode="operator",
               workers: int | None = None) -> list[SweepRow]:
    """One row per evolution time; accuracy targets held fixed."""
    return _run([replace(instance, t=float(t)) for t in t_list], mode, workers)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        d = asdict(row)
        writer.writerow([repr(d[c]) if isinstance(d[c], float) else d[c] for c in CSV_COLUMNS])
    return buf.getvalue()


def bounds_table(p: ProblemInstance) -> list[dict]:
    plan, series = plan_instance(p)
    return [c.as_dict() for c in lemma_bounds_report(plan, series)]


def verify_circuit(p: ProblemInstance, correction_Q: int | None = None, tol: float = 1e-10) -> dict:
    """Cross-check the dense circuits against the operator formulas.

    Compares the segment circuit's flagged block with the amplified
    polynomial, both run modes of the segment stage, the post-selected state
    evolution, the gate tallies, and a small-``Q`` correction circuit.
    """
    plan, _ = plan_instance(p)
    if plan.t == 0:
        raise InvalidInputError("circuit verification needs t > 0")
    d = p.decomposition
    H = assemble(d)

    circuit = segment_circuit(d, plan)
    Vt = materialize_series(exp_series(plan.theta, plan.K), H)
    oaa_formula = v_oaa_matrix(Vt)
    block = circuit.flagged_block()

    op, op_tally = run_segments(d, plan, "operator")
    circ, circ_tally = run_segments(d, plan, "circuit")

    rng = np.random.default_rng(0)
    psi = rng.normal(size=d.dim) + 1j * rng.normal(size=d.dim)
    psi /= np.linalg.norm(psi)
    final_state, probs = run_segments_on_state(d, plan, psi)
    expected = op @ psi
    expected /= np.linalg.norm(expected)
    overlap = abs(np.vdot(expected, final_state))

    # success probability of each segment predicted by the operator formula
    predicted, state = [], psi
    for _ in range(plan.r):
        out = oaa_formula @ state
        predicted.append(float(np.vdot(out, out).real))
        state = out / np.linalg.norm(out)

    Q = correction_Q if correction_Q is not None else min(CIRCUIT_MAX_Q, plan.K + 2)
    if Q > CIRCUIT_MAX_Q or d.L > CIRCUIT_MAX_L or d.dim > CIRCUIT_MAX_DIM:
        corr = {"skipped": f"needs Q<={CIRCUIT_MAX_Q}, L<={CIRCUIT_MAX_L}, dim<={CIRCUIT_MAX_DIM}",
                "pass": True}
    else:
        mini_plan, mini_series = make_plan(p.t, d.A, p.epsilon, p.delta, Q=Q)
        corr = circuit_level_correction(d, mini_plan, mini_series.a)

    result = {
        "r": plan.r,
        "K": plan.K,
        "ancilla_dim": circuit.ancilla_dim,
        "oaa_block_vs_formula": operator_distance(block, oaa_formula),
        "operator_vs_circuit": operator_distance(op, circ),
        "state_infidelity": max(0.0, float(1 - overlap)),
        "projection_residual": float(np.max(np.abs(np.subtract(probs, predicted)))),
        "segment_error": operator_distance(circ, exact_evolution(H, p.t)),
        "tally_operator": op_tally.logical_total,
        "tally_circuit": circ_tally.logical_total,
        "tally_analytic": 3 * plan.r * plan.K,
        "correction": corr,
    }
    result["pass"] = bool(
        result["oaa_block_vs_formula"] <= 1e-11
        and result["operator_vs_circuit"] <= tol
        and result["state_infidelity"] <= tol
        and result["projection_residual"] <= tol
        and result["tally_operator"] == result["tally_circuit"] == result["tally_analytic"]
        and corr["pass"]
    )
    return result

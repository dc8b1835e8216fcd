"""Hamiltonians written as positive combinations of unitaries.

A :class:`HamiltonianDecomposition` stores ``H = sum_l alpha_l H_l`` with
every ``alpha_l > 0`` and every ``H_l`` unitary.  A :class:`ProblemInstance`
adds the evolution time and the two accuracy targets.  Instances round-trip
through a small JSON document (see :func:`parse_instance`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .exceptions import InvalidInputError, ParseError
from .linalg import STRUCTURE_TOL, as_matrix, hermiticity_residual, unitarity_residual

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

DEFAULT_DELTA = 0.49


@dataclass(frozen=True)
class Violation:
    kind: str
    term: int | None
    residual: float

    def __str__(self):
        where = f"term {self.term}, " if self.term is not None else ""
        return f"{self.kind} ({where}residual {self.residual:.3e})"


@dataclass(frozen=True, eq=False)
class HamiltonianDecomposition:
    """``H = sum_l alphas[l] * unitaries[l]``.

    ``labels`` optionally records the Pauli word each term was built from so
    that :func:`serialize_instance` can write it back compactly.
    """

    alphas: tuple[float, ...]
    unitaries: tuple[np.ndarray, ...]
    labels: tuple[str | None, ...] = field(default=())

    def __post_init__(self):
        if len(self.alphas) != len(self.unitaries):
            raise InvalidInputError("alphas and unitaries differ in length")
        mats = tuple(as_matrix(U, f"term {i}") for i, U in enumerate(self.unitaries))
        if mats and any(M.shape != mats[0].shape for M in mats):
            raise InvalidInputError("terms have inconsistent dimensions")
        for M in mats:
            M.setflags(write=False)
        object.__setattr__(self, "unitaries", mats)
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.labels:
            object.__setattr__(self, "labels", (None,) * len(mats))

    @property
    def L(self) -> int:
        return len(self.alphas)

    @property
    def dim(self) -> int:
        return self.unitaries[0].shape[0] if self.unitaries else 0

    @property
    def A(self) -> float:
        return math.fsum(self.alphas)

    def __iter__(self):
        return iter(zip(self.alphas, self.unitaries))


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    decomposition: HamiltonianDecomposition
    t: float
    epsilon: float
    delta: float = DEFAULT_DELTA

    def violations(self) -> list[Violation]:
        found = validate(self.decomposition)
        if not (math.isfinite(self.t) and self.t >= 0):
            found.append(Violation("negative or non-finite time", None, float(self.t)))
        if not 0 < self.epsilon < 1:
            found.append(Violation("epsilon outside (0, 1)", None, float(self.epsilon)))
        if not 0 < self.delta < 0.5:
            found.append(Violation("delta outside (0, 1/2)", None, float(self.delta)))
        if not self.epsilon < self.delta:
            found.append(Violation("epsilon not below delta", None, self.epsilon - self.delta))
        return found


def validate(d: HamiltonianDecomposition, tol=STRUCTURE_TOL) -> list[Violation]:
    """Return every violated structural assumption; empty list means ok."""
    found = []
    if d.L < 1:
        return [Violation("no terms", None, 0.0)]
    for i, (alpha, U) in enumerate(d):
        if not (math.isfinite(alpha) and alpha > 0):
            found.append(Violation("nonpositive weight", i, alpha))
        res = unitarity_residual(U)
        if res > tol:
            found.append(Violation("non-unitary term", i, res))
    H = _sum_terms(d)
    res = hermiticity_residual(H)
    if res > tol * max(1.0, d.A):
        found.append(Violation("sum non-Hermitian", None, res))
    return found


def _sum_terms(d):
    H = np.zeros((d.dim, d.dim), dtype=np.complex128)
    for alpha, U in d:
        H = H + alpha * U
    return H


def assemble(d: HamiltonianDecomposition) -> np.ndarray:
    """Return the dense Hamiltonian ``sum_l alpha_l H_l``."""
    problems = validate(d)
    if problems:
        raise InvalidInputError("invalid decomposition: " + "; ".join(map(str, problems)))
    H = _sum_terms(d)
    # symmetrize away rounding so downstream Hermiticity checks are exact
    return 0.5 * (H + H.conj().T)


def strength(d: HamiltonianDecomposition, t: float) -> tuple[float, float]:
    """Return ``(A, T)`` with ``A = sum alpha`` and ``T = A t``."""
    A = d.A
    return A, A * float(t)


def pauli_matrix(word: str) -> np.ndarray:
    try:
        factors = [PAULI[ch] for ch in word]
    except KeyError as exc:
        raise ParseError(f"bad Pauli character {exc.args[0]!r} in {word!r}") from None
    return reduce(np.kron, factors)


def pauli_instance(n_qubits: int, terms) -> HamiltonianDecomposition:
    """Build a decomposition from ``[(weight, "XZ.."), ...]``."""
    if n_qubits < 1:
        raise ParseError("n_qubits must be >= 1")
    alphas, mats, labels = [], [], []
    for i, (weight, word) in enumerate(terms):
        word = word.upper()
        if len(word) != n_qubits:
            raise ParseError(f"word {word!r} has length {len(word)}, expected {n_qubits}",
                             f"terms/{i}/pauli")
        if not weight > 0:
            raise ParseError(f"weight must be positive, got {weight}", f"terms/{i}/alpha")
        alphas.append(float(weight))
        mats.append(pauli_matrix(word))
        labels.append(word)
    if not alphas:
        raise ParseError("at least one term is required", "terms")
    return HamiltonianDecomposition(tuple(alphas), tuple(mats), tuple(labels))


def random_pauli_instance(rng: np.random.Generator, n_qubits: int, n_terms: int,
                          total_weight: float = 1.0) -> HamiltonianDecomposition:
    """Random Pauli decomposition whose weights sum to ``total_weight``."""
    words = ["".join(rng.choice(list("IXYZ"), size=n_qubits)) for _ in range(n_terms)]
    w = rng.uniform(0.1, 1.0, size=n_terms)
    w = w * (total_weight / w.sum())
    return pauli_instance(n_qubits, list(zip(w.tolist(), words)))


# --- JSON documents -------------------------------------------------------

def _number(doc, key, path, default=None):
    if key not in doc:
        if default is not None:
            return default
        raise ParseError("missing required field", f"{path}{key}")
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {type(value).__name__}", f"{path}{key}")
    return float(value)


def _parse_matrix(raw, path):
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("matrix must be nested [[re, im], ...] lists", path) from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ParseError(f"matrix must have shape (dim, dim, 2), got {arr.shape}", path)
    return arr[..., 0] + 1j * arr[..., 1]


def instance_from_dict(doc) -> ProblemInstance:
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    terms = doc.get("terms")
    if not isinstance(terms, list) or not terms:
        raise ParseError("must be a non-empty list", "terms")
    n_qubits = doc.get("n_qubits")
    dim = doc.get("dim")
    alphas, mats, labels = [], [], []
    for i, term in enumerate(terms):
        path = f"terms/{i}/"
        if not isinstance(term, dict):
            raise ParseError("term must be an object", path.rstrip("/"))
        alpha = _number(term, "alpha", path)
        has_pauli, has_matrix = "pauli" in term, "matrix" in term
        if has_pauli == has_matrix:
            raise ParseError("exactly one of 'pauli' or 'matrix' is required", path.rstrip("/"))
        if has_pauli:
            word = term["pauli"]
            if not isinstance(word, str):
                raise ParseError("must be a string", path + "pauli")
            if n_qubits is None:
                n_qubits = len(word)
            if len(word) != n_qubits:
                raise ParseError(f"length {len(word)} != n_qubits {n_qubits}", path + "pauli")
            try:
                M = pauli_matrix(word.upper())
            except ParseError as exc:
                raise ParseError(str(exc), path + "pauli") from None
            labels.append(word.upper())
        else:
            M = _parse_matrix(term["matrix"], path + "matrix")
            labels.append(None)
        alphas.append(alpha)
        mats.append(M)
    shapes = {M.shape for M in mats}
    if len(shapes) != 1:
        raise ParseError(f"terms have inconsistent dimensions {sorted(shapes)}", "terms")
    if dim is not None and mats[0].shape[0] != dim:
        raise ParseError(f"matrix dimension {mats[0].shape[0]} != dim {dim}", "dim")
    decomposition = HamiltonianDecomposition(tuple(alphas), tuple(mats), tuple(labels))
    return ProblemInstance(
        decomposition,
        t=_number(doc, "t", ""),
        epsilon=_number(doc, "epsilon", ""),
        delta=_number(doc, "delta", "", DEFAULT_DELTA),
    )


def instance_to_dict(p: ProblemInstance) -> dict:
    d = p.decomposition
    doc: dict = {}
    if all(label is not None for label in d.labels):
        doc["n_qubits"] = len(d.labels[0])
    else:
        doc["dim"] = d.dim
    terms = []
    for alpha, U, label in zip(d.alphas, d.unitaries, d.labels):
        if label is not None:
            terms.append({"alpha": alpha, "pauli": label})
        else:
            terms.append({"alpha": alpha,
                          "matrix": np.stack([U.real, U.imag], axis=-1).tolist()})
    doc["terms"] = terms
    doc["t"] = p.t
    doc["epsilon"] = p.epsilon
    doc["delta"] = p.delta
    return doc


def parse_instance(text: str) -> ProblemInstance:
    """Parse a JSON instance document.

    Schema::

        {"n_qubits": int?, "dim": int?,
         "terms": [{"alpha": float, "pauli": "XZ"} | {"alpha": float, "matrix": [[[re, im], ...], ...]}],
         "t": float, "epsilon": float, "delta": float?}

    Structural problems (a non-unitary explicit matrix, say) are not raised
    here; call :meth:`ProblemInstance.violations` to surface them.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return instance_from_dict(doc)


def serialize_instance(p: ProblemInstance) -> str:
    return json.dumps(instance_to_dict(p), indent=2)

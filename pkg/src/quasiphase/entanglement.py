"""Entanglement quasiprobabilities of two-qubit states.

A state is written as a signed mixture of the 36 product projectors built from
the six Pauli eigenstates on each qubit. Nonnegative least squares is tried
first; if no nonnegative decomposition reproduces the state, the
minimum-norm signed solution of the linear system is returned instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

__all__ = [
    "LABELS",
    "EntQuasiTable",
    "pauli_states",
    "pauli_product_basis",
    "ent_quasiprob",
    "negativity_report",
    "singlet",
    "werner",
    "product_state",
]

LABELS = ("x+", "x-", "y+", "y-", "z+", "z-")
NNLS_RESIDUAL_TOL = 1e-8
NNLS_MAXITER = 10_000

_S2 = 1.0 / math.sqrt(2.0)
_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli_states() -> dict:
    """Eigenvectors of X, Y, Z keyed by ``LABELS``."""
    return {
        "x+": np.array([_S2, _S2], dtype=complex),
        "x-": np.array([_S2, -_S2], dtype=complex),
        "y+": np.array([_S2, 1j * _S2]),
        "y-": np.array([_S2, -1j * _S2]),
        "z+": np.array([1, 0], dtype=complex),
        "z-": np.array([0, 1], dtype=complex),
    }


def pauli_product_basis() -> np.ndarray:
    """Array of shape (6, 6, 4, 4): ``|a><a| (x) |b><b|`` indexed by label order."""
    vecs = pauli_states()
    proj = [np.outer(vecs[l], vecs[l].conj()) for l in LABELS]
    return np.array([[np.kron(pa, pb) for pb in proj] for pa in proj])


def _design_matrix() -> np.ndarray:
    """Real 17x36 system: 16 Pauli-product expectation values, then sum = 1."""
    basis = pauli_product_basis().reshape(36, 4, 4)
    rows = []
    for si in _PAULI:
        for sj in _PAULI:
            op = np.kron(si, sj)
            rows.append(np.einsum("kij,ji->k", basis, op).real)
    rows.append(np.ones(36))
    return np.array(rows)


def _rhs(rho: np.ndarray) -> np.ndarray:
    vals = [np.trace(rho @ np.kron(si, sj)).real for si in _PAULI for sj in _PAULI]
    return np.array(vals + [1.0])


def _check_state(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"two-qubit state must be 4x4, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("state is not Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise ValueError("state does not have unit trace")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -1e-10:
        raise ValueError("state is not positive semidefinite")
    return rho


@dataclass(frozen=True, eq=False)
class EntQuasiTable:
    values: np.ndarray
    residual: float
    method: str

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(6, 6)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def reconstruct(self) -> np.ndarray:
        return np.einsum("ab,abij->ij", self.values, pauli_product_basis())

    def __getitem__(self, key):
        a, b = key
        return self.values[LABELS.index(a), LABELS.index(b)]

    def as_records(self) -> list:
        return [
            {"a": a, "b": b, "value": float(self.values[i, j])}
            for i, a in enumerate(LABELS)
            for j, b in enumerate(LABELS)
        ]


def ent_quasiprob(rho, mode: str = "nnls_first") -> EntQuasiTable:
    """Decompose ``rho`` over the 36 Pauli product projectors.

    ``mode="nnls_first"`` returns a nonnegative table whenever one reproduces
    ``rho`` (residual <= 1e-8) and falls back to the minimum-norm solution
    otherwise; ``mode="min_norm"`` always returns the minimum-norm solution.
    """
    rho = _check_state(rho)
    a = _design_matrix()
    b = _rhs(rho)
    basis = pauli_product_basis()

    def resid(p):
        return float(np.linalg.norm(np.einsum("ab,abij->ij", p.reshape(6, 6), basis) - rho))

    if mode == "nnls_first":
        p, _ = nnls(a, b, maxiter=NNLS_MAXITER)
        r = resid(p)
        if r <= NNLS_RESIDUAL_TOL:
            return EntQuasiTable(p, r, "nnls")
    elif mode != "min_norm":
        raise ValueError(f"unknown mode {mode!r}")
    p = np.linalg.pinv(a, rcond=1e-12) @ b
    return EntQuasiTable(p, resid(p), "min_norm")


def negativity_report(table: EntQuasiTable, cell_tol: float = 1e-10):
    """``(total_negativity, negative_cells)`` for a table that represents its state."""
    if table.residual > NNLS_RESIDUAL_TOL:
        raise ValueError(
            f"table residual {table.residual:.3g} is too large to certify anything"
        )
    v = table.values
    total = float(np.sum(np.clip(-v, 0.0, None)))
    cells = [
        (LABELS[i], LABELS[j], float(v[i, j]))
        for i in range(6)
        for j in range(6)
        if v[i, j] < -cell_tol
    ]
    return total, cells


def singlet() -> np.ndarray:
    """``(|0,1> - |1,0>)/sqrt(2)`` as a density matrix."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2.0)
    return np.outer(psi, psi.conj())


def werner(p: float) -> np.ndarray:
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return p * singlet() + (1.0 - p) * np.eye(4) / 4.0


def product_state(a: str, b: str) -> np.ndarray:
    vecs = pauli_states()
    psi = np.kron(vecs[a], vecs[b])
    return np.outer(psi, psi.conj())

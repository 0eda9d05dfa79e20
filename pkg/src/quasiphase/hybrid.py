"""Hybrid quasiprobability matrices and multimode cat-state distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import DeltaTerm, HermiticityError, KernelSpec, regularized_delta
from .convolution import Axis, Grid2D, integrate
from .fock import coherent_fock, fidelity, overlap

__all__ = [
    "hybrid_matrix",
    "hybrid_matrix_grid",
    "min_eigenvalue",
    "min_eig_scan",
    "MultimodeStateP",
    "tripartite_state",
    "tripartite_stateP",
    "tripartite_P",
    "w_state",
    "w_fidelity_closed_form",
    "ghz_w_limits",
]

IMAG_TOL = 1e-10


def hybrid_matrix_grid(beta: complex, kernel: KernelSpec, alpha, coherences: bool = True) -> np.ndarray:
    """Regularized 2x2 matrix ``[[P_{b,b}, P_{b,-b}], [P_{-b,b}, P_{-b,-b}]]``.

    ``P_{x,y}`` is the distribution of ``|x><y|``. The result has shape
    ``alpha.shape + (2, 2)``. The upper off-diagonal is set to the conjugate
    of the lower one so the matrix is Hermitian sample by sample.
    """
    beta = complex(beta)
    alpha = np.asarray(alpha, dtype=complex)
    out = np.zeros(alpha.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = regularized_delta(DeltaTerm(beta, beta), kernel, alpha)
    out[..., 1, 1] = regularized_delta(DeltaTerm(-beta, -beta), kernel, alpha)
    if coherences:
        lower = np.asarray(regularized_delta(DeltaTerm(-beta, beta), kernel, alpha))
        out[..., 1, 0] = lower
        out[..., 0, 1] = np.conj(lower)
    return out


def hybrid_matrix(beta: complex, kernel: KernelSpec, alpha: complex) -> np.ndarray:
    return hybrid_matrix_grid(beta, kernel, complex(alpha))


def min_eigenvalue(m: np.ndarray) -> np.ndarray:
    """Smaller eigenvalue of Hermitian 2x2 matrices stacked on the leading axes."""
    a = m[..., 0, 0].real
    d = m[..., 1, 1].real
    b = m[..., 1, 0]
    return 0.5 * (a + d) - np.sqrt(0.25 * (a - d) ** 2 + np.abs(b) ** 2)


def min_eig_scan(beta: complex, kernel: KernelSpec, re_axis: Axis, im_axis: Axis, coherences: bool = True):
    """Grid point with the most negative eigenvalue of the hybrid matrix.

    Returns ``(alpha_star, lambda_min, grid)`` where ``grid`` holds the
    pointwise minimum eigenvalue.
    """
    alpha = Grid2D.alpha_mesh(re_axis, im_axis)
    lam = min_eigenvalue(hybrid_matrix_grid(beta, kernel, alpha, coherences))
    idx = np.unravel_index(np.argmin(lam), lam.shape)
    return complex(alpha[idx]), float(lam[idx]), Grid2D(re_axis, im_axis, lam)


@dataclass(frozen=True)
class MultimodeStateP:
    """Product-form GS function ``sum_j c_j prod_m P_{term_jm}(alpha_m)``."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((complex(c), tuple(ts)) for c, ts in self.terms)
        if not terms:
            raise ValueError("no terms")
        m = len(terms[0][1])
        if any(len(ts) != m for _, ts in terms):
            raise ValueError("every term needs one factor per mode")
        object.__setattr__(self, "terms", terms)

    @property
    def mode_count(self) -> int:
        return len(self.terms[0][1])

    @classmethod
    def from_superposition(cls, weights, amplitudes) -> "MultimodeStateP":
        """GS function of ``sum_k w_k |b_k1, ..., b_kM>`` (normalized here)."""
        weights = [complex(w) for w in weights]
        amplitudes = [tuple(complex(b) for b in amp) for amp in amplitudes]
        norm2 = 0j
        for wk, ak in zip(weights, amplitudes):
            for wq, aq in zip(weights, amplitudes):
                norm2 += wk * wq.conjugate() * np.prod([overlap(q, k) for k, q in zip(ak, aq)])
        scale = 1.0 / norm2.real
        terms = []
        for wk, ak in zip(weights, amplitudes):
            for wq, aq in zip(weights, amplitudes):
                factors = tuple(DeltaTerm(ket=k, bra=q) for k, q in zip(ak, aq))
                terms.append((scale * wk * wq.conjugate(), factors))
        return cls(tuple(terms))

    def trace(self) -> complex:
        return sum(c * np.prod([t.prefactor for t in ts]) for c, ts in self.terms)

    def without_coherences(self) -> "MultimodeStateP":
        return MultimodeStateP(
            tuple((c, ts) for c, ts in self.terms if all(t.diagonal for t in ts))
        )

    def evaluate(self, kernel: KernelSpec, alphas):
        """Value at ``alphas = (alpha_1, ..., alpha_M)``; arrays broadcast."""
        if len(alphas) != self.mode_count:
            raise ValueError(f"need {self.mode_count} phase-space arguments")
        alphas = [np.asarray(a, dtype=complex) for a in alphas]
        shape = np.broadcast(*alphas).shape
        total = np.zeros(shape, dtype=complex)
        scale = np.ones(shape)
        for c, ts in self.terms:
            v = c * np.ones(shape, dtype=complex)
            for t, a in zip(ts, alphas):
                v = v * regularized_delta(t, kernel, a)
            total = total + v
            scale = np.maximum(scale, np.abs(v))
        if np.any(np.abs(total.imag) > IMAG_TOL * scale):
            raise HermiticityError(f"imaginary residual {np.abs(total.imag).max():.3g}")
        out = total.real
        return out if out.ndim else float(out)

    def integrate(self, kernel: KernelSpec, re_axis: Axis, im_axis: Axis) -> float:
        """Integral over the product grid, computed term by term as a product of 2-D integrals."""
        alpha = Grid2D.alpha_mesh(re_axis, im_axis)
        total = 0j
        for c, ts in self.terms:
            v = c
            for t in ts:
                v *= integrate(Grid2D(re_axis, im_axis, np.asarray(regularized_delta(t, kernel, alpha))))
            total += v
        if abs(total.imag) > IMAG_TOL * max(1.0, abs(total)):
            raise HermiticityError(f"imaginary residual {total.imag:.3g} in integral")
        return total.real


def _tripartite_norm(beta: complex) -> float:
    return math.sqrt(2.0 * -math.expm1(-6.0 * abs(beta) ** 2))


def tripartite_state(beta: complex, cutoff: int) -> np.ndarray:
    """Three-mode tensor of ``(|b,b,b> - |-b,-b,-b>) / sqrt(2(1 - exp(-6|b|^2)))``."""
    beta = complex(beta)
    if beta == 0:
        raise ValueError("beta = 0 is singular; use w_state() for the limit")
    p = coherent_fock(beta, cutoff).amplitudes
    m = coherent_fock(-beta, cutoff).amplitudes
    psi = np.einsum("i,j,k->ijk", p, p, p) - np.einsum("i,j,k->ijk", m, m, m)
    return psi / _tripartite_norm(beta)


def w_state(cutoff: int) -> np.ndarray:
    """``(|1,0,0> + |0,1,0> + |0,0,1>) / sqrt(3)`` as a three-mode tensor."""
    if cutoff < 1:
        raise ValueError("W state needs cutoff >= 1")
    psi = np.zeros((cutoff + 1,) * 3, dtype=complex)
    psi[1, 0, 0] = psi[0, 1, 0] = psi[0, 0, 1] = 1.0 / math.sqrt(3.0)
    return psi


def w_fidelity_closed_form(beta: float) -> float:
    b2 = abs(beta) ** 2
    return 6.0 * b2 * math.exp(-3.0 * b2) / -math.expm1(-6.0 * b2)


def tripartite_stateP(beta: complex) -> MultimodeStateP:
    """GS function of the tripartite odd-cat state.

    The two cross terms carry a minus sign and the normalization uses
    ``exp(-6|beta|^2)``; both follow from expanding the projector.
    """
    beta = complex(beta)
    if beta == 0:
        raise ValueError("beta must be nonzero")
    c = 1.0 / _tripartite_norm(beta) ** 2
    b, mb = beta, -beta
    term = lambda k, q: tuple(DeltaTerm(ket=k, bra=q) for _ in range(3))  # noqa: E731
    return MultimodeStateP(
        (
            (c, term(b, b)),
            (-c, term(mb, b)),
            (-c, term(b, mb)),
            (c, term(mb, mb)),
        )
    )


def tripartite_P(beta: complex, kernel: KernelSpec, a1, a2, a3, coherences: bool = True):
    state = tripartite_stateP(beta)
    if not coherences:
        state = state.without_coherences()
    return state.evaluate(kernel, (a1, a2, a3))


def ghz_w_limits(beta_small: float, beta_large: float, cutoff: int = 20):
    """``(F_W, ghz_cross)``: W-state fidelity at small amplitude and the
    residual branch overlap ``|<-b|b>|^3`` at large amplitude."""
    if not 0 < beta_small <= beta_large:
        raise ValueError("need 0 < beta_small <= beta_large")
    f_w = fidelity(w_state(cutoff), tripartite_state(beta_small, cutoff))
    ghz_cross = abs(overlap(-beta_large, beta_large)) ** 3
    return f_w, ghz_cross

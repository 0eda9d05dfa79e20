"""Truncated Fock-space numerics.

States are stored as dense numpy arrays indexed by photon number
``n = 0..cutoff``. Everything here is deliberately brute force: these
routines are the reference against which the closed-form phase-space
expressions in the other modules are checked.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

__all__ = [
    "TruncationWarning",
    "FockVector",
    "DensityMatrix",
    "CoherentSuperposition",
    "auto_cutoff",
    "coherent_fock",
    "overlap",
    "superposition_density",
    "thermal_density",
    "spats_density",
    "husimi_fock",
    "displace",
    "phase_flip",
    "loss_channel",
    "fidelity",
    "annihilation",
]

#: truncation loss below which an automatically chosen cutoff is acceptable
TRUNCATION_TOL = 1e-10


class TruncationWarning(UserWarning):
    """Raised when a Fock cutoff visibly clips a state."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def auto_cutoff(mean_photons: float) -> int:
    """Cutoff keeping Poissonian tails of mean ``mean_photons`` below ~1e-10."""
    mu = max(float(mean_photons), 0.0)
    return int(math.ceil(mu + 8.0 * math.sqrt(mu + 1.0)))


@dataclass(frozen=True, eq=False)
class FockVector:
    """Pure single-mode state ``sum_n c_n |n>`` truncated at ``cutoff``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen(self.amplitudes))
        if self.amplitudes.ndim != 1 or self.amplitudes.size == 0:
            raise ValueError("amplitudes must be a non-empty 1-D sequence")

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size - 1

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    @property
    def truncation_loss(self) -> float:
        """``1 - sum |c_n|^2``; only meaningful for states normalized in the full space."""
        return float(1.0 - np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def sufficient(self) -> bool:
        return abs(self.truncation_loss) < TRUNCATION_TOL

    def density(self) -> "DensityMatrix":
        c = self.amplitudes
        return DensityMatrix(np.outer(c, c.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density operator in a truncated Fock basis."""

    entries: np.ndarray

    def __post_init__(self):
        e = _frozen(self.entries)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {e.shape}")
        object.__setattr__(self, "entries", e)

    @property
    def cutoff(self) -> int:
        return self.entries.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    @property
    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    @property
    def populations(self) -> np.ndarray:
        return self.entries.diagonal().real.copy()

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.entries @ op))

    def check(self, trace_tol: float = 1e-10) -> None:
        """Raise ``ValueError`` unless Hermitian, unit trace and positive."""
        if self.hermiticity_residual > 1e-12:
            raise ValueError(f"not Hermitian (residual {self.hermiticity_residual:.3g})")
        if abs(self.trace - 1.0) > trace_tol:
            raise ValueError(f"trace {self.trace:.12g} deviates from 1")
        if self.min_eigenvalue() < -1e-10:
            raise ValueError("negative eigenvalue")


def coherent_fock(beta: complex, cutoff: int) -> FockVector:
    """Fock expansion ``c_n = exp(-|beta|^2/2) beta^n / sqrt(n!)``."""
    beta = complex(beta)
    if not (math.isfinite(beta.real) and math.isfinite(beta.imag)):
        raise ValueError(f"non-finite coherent amplitude {beta!r}")
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    c = np.empty(cutoff + 1, dtype=complex)
    c[0] = math.exp(-0.5 * abs(beta) ** 2)
    for n in range(1, cutoff + 1):
        c[n] = c[n - 1] * beta / math.sqrt(n)
    return FockVector(c)


def overlap(beta: complex, beta_t: complex) -> complex:
    """Coherent-state overlap ``<beta|beta_t>``."""
    beta, beta_t = complex(beta), complex(beta_t)
    return complex(np.exp(-0.5 * abs(beta - beta_t) ** 2 + 1j * (beta.conjugate() * beta_t).imag))


@dataclass(frozen=True)
class CoherentSuperposition:
    """Pure state ``sum_k weight_k |amplitude_k>``.

    ``terms`` holds ``(weight, amplitude)`` pairs; amplitudes must be distinct.
    """

    terms: tuple

    def __post_init__(self):
        terms = tuple((complex(l), complex(b)) for l, b in self.terms)
        if not terms:
            raise ValueError("a coherent superposition needs at least one term")
        amps = [b for _, b in terms]
        for i in range(len(amps)):
            for j in range(i + 1, len(amps)):
                if amps[i] == amps[j]:
                    raise ValueError(f"repeated coherent amplitude {amps[i]!r}")
        object.__setattr__(self, "terms", terms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([l for l, _ in self.terms])

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([b for _, b in self.terms])

    def norm_squared(self) -> float:
        s = 0j
        for lk, bk in self.terms:
            for lq, bq in self.terms:
                s += lk * lq.conjugate() * overlap(bq, bk)
        return s.real

    @property
    def normalized(self) -> bool:
        return abs(self.norm_squared() - 1.0) < 1e-12

    def normalize(self) -> "CoherentSuperposition":
        scale = 1.0 / math.sqrt(self.norm_squared())
        return CoherentSuperposition(tuple((l * scale, b) for l, b in self.terms))

    def mean_photons_bound(self) -> float:
        return max(abs(b) ** 2 for _, b in self.terms)

    def fock(self, cutoff: int) -> FockVector:
        c = np.zeros(cutoff + 1, dtype=complex)
        for l, b in self.terms:
            c += l * coherent_fock(b, cutoff).amplitudes
        return FockVector(c)

    @classmethod
    def coherent(cls, beta: complex) -> "CoherentSuperposition":
        return cls(((1.0, beta),))

    @classmethod
    def cat(cls, beta: complex, parity: int = +1) -> "CoherentSuperposition":
        """Normalized ``|beta> + parity |-beta>`` (parity=+1 even, -1 odd)."""
        if beta == 0:
            raise ValueError("cat state needs beta != 0")
        return cls(((1.0, beta), (float(parity), -beta))).normalize()


def superposition_density(state: CoherentSuperposition, cutoff: int) -> DensityMatrix:
    if not state.normalized:
        raise ValueError("superposition is not normalized; call .normalize() first")
    return state.fock(cutoff).density()


def thermal_density(nbar: float, cutoff: int) -> DensityMatrix:
    if nbar < 0:
        raise ValueError("mean photon number must be >= 0")
    n = np.arange(cutoff + 1)
    if nbar == 0:
        p = (n == 0).astype(float)
    else:
        p = np.exp(n * math.log(nbar) - (n + 1) * math.log1p(nbar))
    return DensityMatrix(np.diag(p.astype(complex)))


def annihilation(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1).astype(complex)


def spats_density(nbar: float, cutoff: int) -> DensityMatrix:
    """Single-photon-added thermal state ``a^dag rho_th a / (1 + nbar)``."""
    if not nbar > 0:
        raise ValueError("SPATS needs nbar > 0")
    a = annihilation(cutoff + 1)
    rho_th = thermal_density(nbar, cutoff + 1).entries
    rho = (a.conj().T @ rho_th @ a) / (1.0 + nbar)
    # the photon-added top level came from outside the truncated thermal state
    return DensityMatrix(rho[: cutoff + 1, : cutoff + 1])


def husimi_fock(rho: DensityMatrix, alpha: complex) -> float:
    """``Q(alpha) = <alpha|rho|alpha> / pi`` by direct Fock contraction."""
    c = coherent_fock(alpha, rho.cutoff).amplitudes
    return float((c.conj() @ rho.entries @ c).real / math.pi)


def _displacement_operator(gamma: complex, dim: int) -> np.ndarray:
    a = annihilation(dim - 1)
    return expm(gamma * a.conj().T - np.conj(gamma) * a)


def displace(rho: DensityMatrix, gamma: complex, pad: int | None = None) -> DensityMatrix:
    """``D(gamma) rho D(gamma)^dag``.

    The generator is exponentiated in an enlarged space (``pad`` extra levels)
    and the result is cut back to the input cutoff; the trace lost in that cut
    is the truncation diagnostic.
    """
    gamma = complex(gamma)
    if gamma == 0:
        return rho
    if pad is None:
        g = abs(gamma)
        pad = 2 * int(math.ceil(g * g + 6 * g)) + 20
    dim = rho.dim
    big = np.zeros((dim + pad, dim + pad), dtype=complex)
    big[:dim, :dim] = rho.entries
    d = _displacement_operator(gamma, dim + pad)
    out = (d @ big @ d.conj().T)[:dim, :dim]
    loss = (rho.trace - np.trace(out)).real
    if loss > 1e-8:
        warnings.warn(
            f"displacement by {gamma} loses {loss:.3g} of the trace at cutoff {rho.cutoff}",
            TruncationWarning,
            stacklevel=2,
        )
    return DensityMatrix(out)


def phase_flip(rho: DensityMatrix) -> DensityMatrix:
    """Conjugate by the parity operator, i.e. ``a -> -a``."""
    s = (-1.0) ** np.arange(rho.dim)
    return DensityMatrix(s[:, None] * rho.entries * s[None, :])


def loss_channel(rho: DensityMatrix, tau: float) -> DensityMatrix:
    """Pure-loss channel with transmissivity ``tau``.

    Kraus operators ``E_k = sum_n sqrt(C(n,k) tau^(n-k) (1-tau)^k) |n-k><n|``.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {tau}")
    if tau == 1.0:
        return rho
    dim = rho.dim
    n = np.arange(dim)
    out = np.zeros_like(rho.entries)
    with np.errstate(divide="ignore"):
        log_t = math.log(tau) if tau > 0 else -np.inf
        log_r = math.log1p(-tau) if tau < 1 else -np.inf
    for k in range(dim):
        m = n[: dim - k]
        # log of C(m+k, k) tau^m (1-tau)^k, with 0^0 = 1
        logc = gammaln(m + k + 1) - gammaln(m + 1) - gammaln(k + 1)
        lt = np.zeros(m.shape) if tau == 0 else m * log_t
        if tau == 0:
            lt[1:] = -np.inf
        lr = 0.0 if k == 0 else k * log_r
        amp = np.exp(0.5 * (logc + lt + lr))
        out[: dim - k, : dim - k] += amp[:, None] * rho.entries[k:, k:] * amp[None, :]
    return DensityMatrix(out)


def _as_array(state) -> np.ndarray:
    if isinstance(state, FockVector):
        return state.amplitudes
    return np.asarray(state, dtype=complex)


def fidelity(psi, phi) -> float:
    """``|<psi|phi>|^2`` for single-mode vectors or multimode tensors of equal shape."""
    a, b = _as_array(psi), _as_array(phi)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(abs(np.vdot(a, b)) ** 2)

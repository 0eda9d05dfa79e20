"""Closed-form singular and regularized phase-space distributions.

An off-diagonal coherent dyad ``|ket><bra|`` has a Glauber-Sudarshan
function that is a Dirac delta at a *complex* support point. Convolving it
with an entire kernel amounts to evaluating that kernel at the complex
support, which is what :func:`regularized_delta` does.

Fourier convention used throughout: ``f_hat(kx, ky) = int f(x, y)
exp(-i (kx x + ky y)) dx dy`` with ``alpha = x + i y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import CoherentSuperposition, overlap

__all__ = [
    "DeltaTerm",
    "KernelSpec",
    "SmoothComponent",
    "StateP",
    "HermiticityError",
    "interference_term",
    "characteristic_fn",
    "sinc2_complex",
    "regularized_delta",
    "state_P_regularized",
    "s_param_state",
    "smooth_regularized",
    "thermal_P",
    "spats_P",
]

IMAG_TOL = 1e-10
# |ket - bra|^2 above which products are formed in log space
_LOG_SPACE_THRESHOLD = 100.0


class HermiticityError(ValueError):
    """A supposedly real distribution came out with an imaginary part."""


@dataclass(frozen=True)
class DeltaTerm:
    """Complex-delta representation of the dyad ``|ket><bra|``."""

    ket: complex
    bra: complex

    def __post_init__(self):
        object.__setattr__(self, "ket", complex(self.ket))
        object.__setattr__(self, "bra", complex(self.bra))

    @property
    def log_prefactor(self) -> complex:
        d = self.bra - self.ket
        return -0.5 * abs(d) ** 2 + 1j * (self.bra.conjugate() * self.ket).imag

    @property
    def prefactor(self) -> complex:
        return overlap(self.bra, self.ket)

    @property
    def support_re(self) -> complex:
        return 0.5 * (self.ket + self.bra.conjugate())

    @property
    def support_im(self) -> complex:
        return (self.ket - self.bra.conjugate()) / 2j

    @property
    def diagonal(self) -> bool:
        return self.ket == self.bra

    def conj(self) -> "DeltaTerm":
        return DeltaTerm(self.bra, self.ket)


def interference_term(ket: complex, bra: complex) -> DeltaTerm:
    return DeltaTerm(ket, bra)


@dataclass(frozen=True)
class KernelSpec:
    """Translation-invariant, normalized smoothing kernel.

    ``kind="sinc2"`` is the product of two 1-D ``(w/pi) sinc^2(w x)`` factors;
    ``kind="gaussian_s"`` is the s-parametrized Gaussian
    ``2/(pi(1-s)) exp(-2|alpha|^2/(1-s))`` (s=-1 Husimi, s=0 Wigner).
    """

    kind: str
    w: float | None = None
    s: float | None = None

    def __post_init__(self):
        if self.kind == "sinc2":
            if self.w is None or not self.w > 0:
                raise ValueError("sinc2 kernel needs width w > 0")
        elif self.kind == "gaussian_s":
            if self.s is None or not self.s < 1:
                raise ValueError("gaussian_s kernel needs s < 1")
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def sinc2(cls, w: float) -> "KernelSpec":
        return cls("sinc2", w=float(w))

    @classmethod
    def gaussian(cls, s: float) -> "KernelSpec":
        return cls("gaussian_s", s=float(s))

    @property
    def variance(self) -> float:
        """Gaussian width ``b``: the kernel is ``exp(-|alpha|^2/b)/(pi b)``."""
        if self.kind != "gaussian_s":
            raise ValueError("only Gaussian kernels have a variance")
        return 0.5 * (1.0 - self.s)

    def __call__(self, x, y):
        """Kernel value at real offsets ``(x, y)``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "sinc2":
            w = self.w
            return (w * w / math.pi**2) * (np.sinc(w * x / math.pi) * np.sinc(w * y / math.pi)) ** 2
        b = self.variance
        return np.exp(-(x * x + y * y) / b) / (math.pi * b)

    def transform(self, kx, ky):
        kx = np.asarray(kx, dtype=float)
        ky = np.asarray(ky, dtype=float)
        if self.kind == "sinc2":
            tri = lambda k: np.clip(1.0 - np.abs(k) / (2.0 * self.w), 0.0, None)  # noqa: E731
            return tri(kx) * tri(ky)
        return np.exp(-0.25 * self.variance * (kx * kx + ky * ky))

    def label(self) -> str:
        return f"sinc2:w={self.w}" if self.kind == "sinc2" else f"gaussian:s={self.s}"


def characteristic_fn(ket: complex, bra: complex, gamma: complex) -> complex:
    """Normally ordered characteristic function of ``|ket><bra|``."""
    gamma = complex(gamma)
    return overlap(bra, ket) * complex(
        np.exp(gamma * np.conj(bra) - np.conj(gamma) * ket)
    )


# (sin u / u)^2 = sum_k _SINC2_TAYLOR[k] u^(2k)
_SINC2_TAYLOR = (1.0, -1.0 / 3, 2.0 / 45, -1.0 / 315, 2.0 / 14175, -2.0 / 467775)


def sinc2_complex(u):
    """``(sin u / u)^2`` for complex ``u``, 1 at ``u = 0``."""
    u = np.asarray(u, dtype=complex)
    x, y = u.real, u.imag
    small = np.abs(u) < 1e-3
    safe = np.where(small, 1.0, u)
    xs, ys = safe.real, safe.imag
    num = np.sin(xs) * np.cosh(ys) + 1j * np.cos(xs) * np.sinh(ys)
    out = (num / safe) ** 2
    if np.any(small):
        u2 = (x + 1j * y) ** 2
        series = np.zeros_like(u2)
        for c in reversed(_SINC2_TAYLOR):
            series = series * u2 + c
        out = np.where(small, series, out)
    return out if out.ndim else complex(out)


def _log_sin(u):
    """Branch-agnostic ``log sin u``, stable for large ``|Im u|``."""
    u = np.asarray(u, dtype=complex)
    big = np.abs(u.imag) > 20.0
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.log(np.sin(np.where(big, 0.5, u)))
        up = -1j * u + np.log(0.5j) + np.log1p(-np.exp(2j * u))
        down = 1j * u + np.log(-0.5j) + np.log1p(-np.exp(-2j * u))
    asym = np.where(u.imag > 0, up, down)
    return np.where(big, asym, direct)


def _log_sinc2(u):
    u = np.asarray(u, dtype=complex)
    small = np.abs(u) < 1e-3
    with np.errstate(divide="ignore", invalid="ignore"):
        general = 2.0 * (_log_sin(u) - np.log(np.where(small, 1.0, u)))
        near0 = np.log(sinc2_complex(np.where(small, u, 0.0)))
    return np.where(small, near0, general)


def regularized_delta(term: DeltaTerm, kernel: KernelSpec, alpha):
    """Kernel-smoothed complex-delta term evaluated at ``alpha`` (array ok)."""
    alpha = np.asarray(alpha, dtype=complex)
    dx = alpha.real - term.support_re
    dy = alpha.imag - term.support_im
    if kernel.kind == "gaussian_s":
        if not kernel.s < 1:
            raise ValueError("s must be < 1")
        one_s = 1.0 - kernel.s
        expo = term.log_prefactor - 2.0 * (dx * dx + dy * dy) / one_s
        out = (2.0 / (math.pi * one_s)) * np.exp(expo)
    else:
        w = kernel.w
        norm = w * w / math.pi**2
        if abs(term.ket - term.bra) ** 2 > _LOG_SPACE_THRESHOLD:
            with np.errstate(over="ignore"):
                out = norm * np.exp(
                    term.log_prefactor + _log_sinc2(w * dx) + _log_sinc2(w * dy)
                )
        else:
            out = norm * term.prefactor * sinc2_complex(w * dx) * sinc2_complex(w * dy)
    out = np.asarray(out, dtype=complex)
    return out if out.ndim else complex(out)


def thermal_P(nbar: float, alpha):
    """Smooth Glauber-Sudarshan function of a thermal state."""
    if not nbar > 0:
        raise ValueError("thermal P needs nbar > 0")
    a2 = np.abs(np.asarray(alpha, dtype=complex)) ** 2
    out = np.exp(-a2 / nbar) / (math.pi * nbar)
    return out if np.ndim(out) else float(out)


def spats_P(nbar: float, alpha, eta: float = 1.0):
    """P function of the single-photon-added thermal state.

    ``[(1+nbar)|alpha|^2 - nbar] exp(-|alpha|^2/nbar) / (pi nbar^3)``.
    With ``eta < 1`` the state is first sent through a loss channel of that
    transmissivity, which rescales the phase space: ``P(alpha/sqrt(eta))/eta``.
    """
    if not nbar > 0:
        raise ValueError("SPATS needs nbar > 0")
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    a2 = np.abs(np.asarray(alpha, dtype=complex)) ** 2 / eta
    out = ((1.0 + nbar) * a2 - nbar) * np.exp(-a2 / nbar) / (math.pi * nbar**3 * eta)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class SmoothComponent:
    """Regular (non-delta) part of a GS function: ``weight * P_kind(nbar)``."""

    kind: str
    nbar: float
    weight: float = 1.0

    def __post_init__(self):
        if self.kind not in ("thermal", "spats"):
            raise ValueError(f"unknown smooth component {self.kind!r}")
        if not self.nbar > 0:
            raise ValueError("nbar must be > 0")

    def __call__(self, alpha):
        f = thermal_P if self.kind == "thermal" else spats_P
        return self.weight * f(self.nbar, alpha)


def _gl_nodes(n: int, a: float, b: float):
    x, wts = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * wts


def _tri_gauss_moment(w: float, nbar: float, x: np.ndarray, power: int) -> np.ndarray:
    """``(1/2pi) int tri(k) k^power exp(-nbar k^2/4) exp(i k x) dk`` (even integrand)."""
    n = int(max(96, 4 * w * (np.max(np.abs(x)) if x.size else 0.0) + 96))
    k, wk = _gl_nodes(n, 0.0, 2.0 * w)
    g = (1.0 - k / (2.0 * w)) * k**power * np.exp(-0.25 * nbar * k * k) * wk
    return (np.cos(np.multiply.outer(x, k)) @ g) / math.pi


def smooth_regularized(comp: SmoothComponent, kernel: KernelSpec, alpha):
    """Kernel-smoothed smooth component at ``alpha``."""
    alpha = np.asarray(alpha, dtype=complex)
    a = comp.nbar
    if kernel.kind == "gaussian_s":
        b = kernel.variance
        r2 = np.abs(alpha) ** 2
        g = np.exp(-r2 / (a + b)) / (math.pi * (a + b))
        if comp.kind == "thermal":
            out = g
        else:
            # posterior second moment of the Gaussian factor given alpha
            m2 = r2 * a * a / (a + b) ** 2 + a * b / (a + b)
            out = g * ((1.0 + a) * m2 - a) / (a * a)
    else:
        # band-limited kernel: integrate in the Fourier domain over [-2w, 2w]^2
        x = alpha.real.ravel()
        y = alpha.imag.ravel()
        w = kernel.w
        i0x, i0y = _tri_gauss_moment(w, a, x, 0), _tri_gauss_moment(w, a, y, 0)
        out = i0x * i0y
        if comp.kind == "spats":
            i2x, i2y = _tri_gauss_moment(w, a, x, 2), _tri_gauss_moment(w, a, y, 2)
            out = out - 0.25 * (1.0 + a) * (i2x * i0y + i0x * i2y)
        out = out.reshape(alpha.shape)
    out = comp.weight * np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class StateP:
    """GS function as a weighted sum of complex-delta terms plus smooth parts."""

    terms: tuple = ()
    smooth: tuple = ()

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((complex(c), t) for c, t in self.terms)
        )
        object.__setattr__(self, "smooth", tuple(self.smooth))

    @classmethod
    def from_superposition(cls, state: CoherentSuperposition) -> "StateP":
        terms = []
        for lk, bk in state.terms:
            for lq, bq in state.terms:
                terms.append((lk * lq.conjugate(), DeltaTerm(ket=bk, bra=bq)))
        return cls(tuple(terms))

    @classmethod
    def thermal(cls, nbar: float) -> "StateP":
        return cls(smooth=(SmoothComponent("thermal", nbar),))

    @classmethod
    def spats(cls, nbar: float) -> "StateP":
        return cls(smooth=(SmoothComponent("spats", nbar),))

    def trace(self) -> complex:
        return sum(c * t.prefactor for c, t in self.terms) + sum(
            s.weight for s in self.smooth
        )

    def hermitian_closed(self, tol: float = 1e-14) -> bool:
        for c, t in self.terms:
            partner = [
                c2 for c2, t2 in self.terms if t2.ket == t.bra and t2.bra == t.ket
            ]
            if not any(abs(c2 - c.conjugate()) <= tol * max(1.0, abs(c)) for c2 in partner):
                return False
        return True

    def without_coherences(self) -> "StateP":
        return StateP(tuple((c, t) for c, t in self.terms if t.diagonal), self.smooth)


def _state_value(state: StateP, kernel: KernelSpec, alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=complex)
    total = np.zeros(alpha.shape, dtype=complex)
    scale = np.ones(alpha.shape)
    for c, t in state.terms:
        v = c * regularized_delta(t, kernel, alpha)
        total = total + v
        scale = np.maximum(scale, np.abs(v))
    for comp in state.smooth:
        total = total + smooth_regularized(comp, kernel, alpha)
    resid = np.abs(total.imag)
    if np.any(resid > IMAG_TOL * scale):
        raise HermiticityError(
            f"imaginary residual {resid.max():.3g} exceeds {IMAG_TOL}; "
            "state is not Hermitian-closed"
        )
    return total.real


def state_P_regularized(state: StateP, kernel: KernelSpec, alpha):
    """Real regularized GS function of ``state`` at ``alpha`` (array ok)."""
    out = _state_value(state, kernel, alpha)
    return out if out.ndim else float(out)


def s_param_state(state: StateP, s: float, alpha):
    """s-parametrized distribution (s=-1 Husimi Q, s=0 Wigner)."""
    if not s < 1:
        raise ValueError("s must be < 1")
    return state_P_regularized(state, KernelSpec.gaussian(s), alpha)

"""Detector-agnostic phase-space functions from multiplexed on-off detection.

The signal is mixed with a local oscillator ``alpha`` on a beam splitter with
real amplitudes ``t`` (signal) and ``r`` (oscillator); one output is split
uniformly over ``N`` on-off detectors of efficiency ``eta``. ``G_z(alpha)`` is
the generating function ``E[z^clicks]``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from ._parallel import max_workers
from .analytic import SmoothComponent, StateP
from .fock import (
    CoherentSuperposition,
    DensityMatrix,
    displace,
    loss_channel,
    overlap,
    phase_flip,
)

__all__ = [
    "DetectionConfig",
    "ClassicalState",
    "NonclassicalStateError",
    "g_vac",
    "q_shift",
    "g_interference",
    "g_state",
    "g_thermal",
    "fock_click_oracle",
    "monte_carlo_g",
]

IMAG_TOL = 1e-10
MC_BLOCK = 1 << 16


class NonclassicalStateError(ValueError):
    """The state has no nonnegative P function to sample from."""


@dataclass(frozen=True)
class DetectionConfig:
    N: int = 2
    eta: float = 1.0
    t: float = 1 / math.sqrt(2)
    r: float | None = None
    z: complex = -1.0

    def __post_init__(self):
        if self.N < 1 or (self.N & (self.N - 1)):
            raise ValueError(f"N must be a power of two, got {self.N}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"quantum efficiency must lie in (0, 1], got {self.eta}")
        if isinstance(self.t, complex) or isinstance(self.r, complex):
            raise ValueError("beam-splitter amplitudes must be real")
        if self.r is None:
            if not 0 <= self.t < 1:
                raise ValueError("t must lie in [0, 1) when r is implied")
            object.__setattr__(self, "r", math.sqrt(1.0 - self.t * self.t))
        if abs(self.t**2 + self.r**2 - 1.0) > 1e-12:
            raise ValueError(f"t^2 + r^2 = {self.t**2 + self.r**2} != 1")
        if self.r == 0:
            raise ValueError("r = 0 leaves no local oscillator")

    @property
    def depth(self) -> int:
        return self.N.bit_length() - 1

    @property
    def ratio(self) -> float:
        return self.t / self.r

    def with_z(self, z) -> "DetectionConfig":
        return DetectionConfig(self.N, self.eta, self.t, self.r, z)


def _bracket_power(p, cfg: DetectionConfig):
    """``[p + z (1 - p)]^N`` where ``p`` is the no-click probability per detector."""
    return (p + cfg.z * (1.0 - p)) ** cfg.N


def g_vac(alpha, cfg: DetectionConfig):
    a2 = np.abs(np.asarray(alpha, dtype=complex)) ** 2
    out = _bracket_power(np.exp(-cfg.eta * cfg.r**2 * a2 / cfg.N), cfg)
    return out if np.ndim(out) else out.item()


def q_shift(alpha, bra: complex, ket: complex, cfg: DetectionConfig):
    """Complex squared distance of ``alpha`` from the support of ``|ket><bra|``."""
    alpha = np.asarray(alpha, dtype=complex)
    bra, ket = complex(bra), complex(ket)
    cr = cfg.ratio * 0.5 * (ket + bra.conjugate())
    ci = cfg.ratio * (ket - bra.conjugate()) / 2j
    out = (alpha.real - cr) ** 2 + (alpha.imag - ci) ** 2
    return out if out.ndim else complex(out)


def g_interference(alpha, bra: complex, ket: complex, cfg: DetectionConfig):
    q = np.asarray(q_shift(alpha, bra, ket, cfg))
    p = np.exp(-cfg.eta * cfg.r**2 * q / cfg.N)
    out = overlap(bra, ket) * _bracket_power(p, cfg)
    out = np.asarray(out, dtype=complex)
    return out if out.ndim else complex(out)


def g_state(state: CoherentSuperposition, alpha, cfg: DetectionConfig):
    """``G_z`` of a normalized coherent superposition, summed over all dyads."""
    if not state.normalized:
        raise ValueError("state must be normalized")
    alpha = np.asarray(alpha, dtype=complex)
    total = np.zeros(alpha.shape, dtype=complex)
    scale = np.ones(alpha.shape)
    for lk, bk in state.terms:
        for lq, bq in state.terms:
            v = lk * lq.conjugate() * np.asarray(g_interference(alpha, bq, bk, cfg))
            total = total + v
            scale = np.maximum(scale, np.abs(v))
    if np.isrealobj(cfg.z) or complex(cfg.z).imag == 0:
        resid = np.abs(total.imag)
        if np.any(resid > IMAG_TOL * scale):
            raise ValueError(f"imaginary residual {resid.max():.3g} in G_z")
        total = total.real
    return total if total.ndim else total.item()


def g_thermal(nbar: float, alpha, cfg: DetectionConfig):
    """``G_z`` of a thermal state, from the binomial expansion of the bracket."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    a2 = np.abs(np.asarray(alpha, dtype=complex)) ** 2
    s2 = cfg.ratio**2
    total = np.zeros(a2.shape, dtype=complex if np.iscomplexobj(cfg.z) else float)
    for k in range(cfg.N + 1):
        c = k * cfg.eta * cfg.r**2 / cfg.N
        d = 1.0 + c * s2 * nbar
        total = total + comb(cfg.N, k) * cfg.z ** (cfg.N - k) * (1 - cfg.z) ** k * np.exp(-c * a2 / d) / d
    return total if total.ndim else total.item()


def fock_click_oracle(rho: DensityMatrix, alpha: complex, cfg: DetectionConfig) -> float:
    """``G_z`` computed by brute force in the Fock basis.

    The detected mode is ``-t a_signal + r alpha``: parity flip, loss with
    transmissivity ``t^2``, displacement by ``r alpha``. For each number ``k``
    of detectors that are allowed to click, ``(1 - k eta/N)^n`` is the
    probability that the remaining ``N - k`` stay dark.
    """
    det = displace(loss_channel(phase_flip(rho), cfg.t**2), cfg.r * complex(alpha))
    pops = det.populations
    n = np.arange(pops.size)
    total = 0.0
    for k in range(cfg.N + 1):
        x = 1.0 - k * cfg.eta / cfg.N
        dark = float(np.sum(pops * x**n))
        total += comb(cfg.N, k, exact=True) * cfg.z ** (cfg.N - k) * (1 - cfg.z) ** k * dark
    return total


@dataclass(frozen=True)
class ClassicalState:
    """Mixture of coherent and thermal states: ``(weight, kind, parameter)`` triples."""

    components: tuple

    def __post_init__(self):
        comps = []
        for w, kind, par in self.components:
            if kind not in ("coherent", "thermal"):
                raise NonclassicalStateError(f"cannot sample component {kind!r}")
            if w < 0:
                raise NonclassicalStateError("negative mixture weight")
            if kind == "thermal" and par < 0:
                raise ValueError("thermal nbar must be >= 0")
            comps.append((float(w), kind, complex(par) if kind == "coherent" else float(par)))
        if not comps:
            raise ValueError("empty mixture")
        tot = sum(w for w, _, _ in comps)
        if abs(tot - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {tot}")
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def coherent(cls, beta: complex) -> "ClassicalState":
        return cls(((1.0, "coherent", beta),))

    @classmethod
    def thermal(cls, nbar: float) -> "ClassicalState":
        return cls(((1.0, "thermal", nbar),))

    @classmethod
    def coerce(cls, state) -> "ClassicalState":
        if isinstance(state, cls):
            return state
        if isinstance(state, CoherentSuperposition):
            if len(state.terms) != 1:
                raise NonclassicalStateError("superpositions of coherent states have no samplable P")
            (lam, beta), = state.terms
            if abs(abs(lam) - 1.0) > 1e-12:
                raise ValueError("coherent state is not normalized")
            return cls.coherent(beta)
        if isinstance(state, StateP):
            if state.terms and not all(t.diagonal for _, t in state.terms):
                raise NonclassicalStateError("state has off-diagonal coherences")
            comps = [(c.real, "coherent", t.ket) for c, t in state.terms]
            for sc in state.smooth:
                if sc.kind != "thermal":
                    raise NonclassicalStateError(f"{sc.kind} has a negative P function")
                comps.append((sc.weight, "thermal", sc.nbar))
            return cls(tuple(comps))
        if isinstance(state, SmoothComponent) and state.kind == "thermal":
            return cls.thermal(state.nbar)
        raise NonclassicalStateError(f"cannot sample a P function for {type(state).__name__}")

    def g(self, alpha, cfg: DetectionConfig):
        """Closed-form ``G_z`` of the mixture."""
        total = 0.0
        for w, kind, par in self.components:
            if kind == "coherent":
                total = total + w * np.asarray(g_vac(np.asarray(alpha) - cfg.ratio * par, cfg))
            else:
                total = total + w * np.asarray(g_thermal(par, alpha, cfg))
        return total if np.ndim(total) else np.asarray(total).item()


def _mc_block(state: ClassicalState, alpha: complex, cfg: DetectionConfig, n: int, seed: int, block: int):
    rng = np.random.Generator(np.random.Philox(seed).jumped(block))
    weights = np.array([w for w, _, _ in state.components])
    if len(weights) > 1:
        which = rng.choice(len(weights), size=n, p=weights)
    else:
        which = np.zeros(n, dtype=int)
    beta = np.zeros(n, dtype=complex)
    for i, (_, kind, par) in enumerate(state.components):
        sel = which == i
        m = int(sel.sum())
        if kind == "coherent":
            beta[sel] = par
        elif m:
            sd = math.sqrt(par / 2.0)
            beta[sel] = sd * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
    mean_flux = cfg.eta * np.abs(cfg.r * alpha - cfg.t * beta) ** 2 / cfg.N
    p_click = -np.expm1(-mean_flux)
    clicks = (rng.random((n, cfg.N)) < p_click[:, None]).sum(axis=1)
    vals = np.asarray(cfg.z) ** clicks
    return vals.sum(), (np.abs(vals) ** 2).sum()


def monte_carlo_g(state, alpha: complex, cfg: DetectionConfig, shots: int, seed: int):
    """Stochastic estimate of ``G_z(alpha)`` for a classical state.

    Returns ``(estimate, standard_error)``. Shots are drawn in fixed-size
    blocks; block ``b`` uses the Philox stream for ``seed`` jumped ``b`` times,
    and partial sums are reduced in block order, so the result is independent
    of the thread count.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    state = ClassicalState.coerce(state)
    alpha = complex(alpha)
    sizes = [MC_BLOCK] * (shots // MC_BLOCK)
    if shots % MC_BLOCK:
        sizes.append(shots % MC_BLOCK)
    jobs = [(state, alpha, cfg, n, seed, b) for b, n in enumerate(sizes)]
    workers = min(max_workers(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _mc_block(*j), jobs))
    else:
        parts = [_mc_block(*j) for j in jobs]
    s1 = 0.0
    s2 = 0.0
    for a, b in parts:
        s1 += a
        s2 += b
    mean = s1 / shots
    if shots > 1:
        var = max((s2 - shots * abs(mean) ** 2) / (shots - 1), 0.0)
        stderr = math.sqrt(var / shots)
    else:
        stderr = 0.0
    if np.ndim(mean) == 0 and complex(mean).imag == 0:
        mean = float(np.real(mean))
    return mean, stderr

"""Oracle-equivalence suite run by ``quasiphase validate``.

Each check pits a closed form against an independent route (Fock-space
contraction, Fourier-domain quadrature, Monte Carlo) and records the
discrepancy next to its tolerance. The numeric results are serialized into a
canonical payload so repeated runs can be compared byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .analytic import DeltaTerm, KernelSpec, StateP, regularized_delta, s_param_state
from .clicks import ClassicalState, DetectionConfig, fock_click_oracle, g_state, monte_carlo_g
from .convolution import Axis, Grid2D, convolve, deconvolve
from .entanglement import ent_quasiprob, negativity_report, singlet
from .fock import CoherentSuperposition, coherent_fock, husimi_fock, spats_density, superposition_density
from .hybrid import ghz_w_limits, min_eig_scan, tripartite_stateP, w_fidelity_closed_form

__all__ = ["Check", "delta_quadrature", "run_suite", "payload"]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: {self.value:.4g} (tol {self.tolerance:.3g}) {self.detail}".rstrip()


def delta_quadrature(term: DeltaTerm, w: float, alpha: complex, nodes: int = 160) -> complex:
    """sinc2-smoothed delta term by 2-D Gauss-Legendre quadrature in Fourier space.

    The kernel transform is a product of triangles supported on
    ``[-2w, 2w]^2``, so the inverse transform of ``K_hat * Phi`` is an integral
    of an entire function over a finite square. Each axis is split at the
    kink ``k = 0``.
    """
    x, wts = np.polynomial.legendre.leggauss(nodes)
    k = np.concatenate([w * (x - 1.0), w * (x + 1.0)])
    wk = np.concatenate([w * wts, w * wts])
    tri = 1.0 - np.abs(k) / (2.0 * w)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    weight = np.outer(wk * tri, wk * tri)
    dx = complex(alpha).real - term.support_re
    dy = complex(alpha).imag - term.support_im
    phase = np.exp(1j * (kx * dx + ky * dy))
    return term.prefactor * np.sum(weight * phase) / (2.0 * math.pi) ** 2


def _random_superposition(rng: np.random.Generator, terms: int = 3) -> CoherentSuperposition:
    lam = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    beta = rng.uniform(-1.4, 1.4, size=terms) + 1j * rng.uniform(-1.4, 1.4, size=terms)
    return CoherentSuperposition(tuple(zip(lam, beta))).normalize()


def _check(name, value, tol, passed=None, detail="") -> Check:
    value = float(value)
    if passed is None:
        passed = value <= tol
    return Check(name, value, tol, bool(passed), detail)


def run_suite(seed: int = 2019, mc_shots: int = 200_000) -> list:
    rng = np.random.default_rng(seed)
    checks = []

    # Fock pairing identity and Husimi oracle equivalence
    err_pair = err_q = 0.0
    for _ in range(4):
        state = _random_superposition(rng)
        rho = superposition_density(state, 60)
        sp = StateP.from_superposition(state)
        for _ in range(5):
            g = complex(*rng.uniform(-2, 2, 2))
            c = coherent_fock(g, 60).amplitudes
            tr = (c.conj() @ rho.entries @ c).real
            q = husimi_fock(rho, g)
            err_pair = max(err_pair, abs(tr - math.pi * q))
            err_q = max(err_q, abs(s_param_state(sp, -1.0, g) - q))
    checks.append(_check("pairing identity Tr(rho|g><g|) = pi Q", err_pair, 1e-10))
    checks.append(_check("s=-1 closed form vs Fock Husimi", err_q, 1e-10))

    # SPATS: Gaussian smoothing of the analytic P vs Fock Husimi
    rho = spats_density(1.0, 80)
    pts = np.linspace(-1.5, 1.5, 5)
    err = max(
        abs(s_param_state(StateP.spats(1.0), -1.0, complex(x, y)) - husimi_fock(rho, complex(x, y)))
        for x in pts
        for y in pts
    )
    checks.append(_check("SPATS smoothed P vs Fock Husimi", err, 1e-8))

    # regularized interference term vs Fourier quadrature
    term = DeltaTerm(ket=-1.0, bra=1.0)
    kern = KernelSpec.sinc2(3.0)
    err = max(
        abs(regularized_delta(term, kern, a) - delta_quadrature(term, 3.0, a))
        for a in (0, 0.4 + 0.3j, -1.1 + 0.8j, 2.0j)
    )
    checks.append(_check("sinc2 interference closed form vs quadrature", err, 1e-8))
    closed = math.exp(-2) * math.sinh(3) ** 2 / math.pi**2
    checks.append(_check("sinc2 interference at origin", abs(regularized_delta(term, kern, 0) - closed), 1e-9))

    # click detection: closed form vs Fock oracle vs Monte Carlo
    cfg = DetectionConfig(N=2, eta=0.5, t=1 / math.sqrt(2), z=-1.0)
    states = [
        CoherentSuperposition.coherent(0.0),
        CoherentSuperposition.coherent(0.6 - 0.3j),
        CoherentSuperposition.cat(1.0, +1),
        CoherentSuperposition.cat(0.8j, -1),
        CoherentSuperposition(((1.0, 1.0), (0.5j, -0.5 + 0.5j), (-0.3, 0.2j))).normalize(),
    ]
    alphas = [0, 0.7 + 0.2j, -0.5 + 1.1j, 1.3j, -1.0 - 0.4j]
    err = 0.0
    for st in states:
        rho = superposition_density(st, 80)
        for a in alphas:
            err = max(err, abs(g_state(st, a, cfg) - fock_click_oracle(rho, a, cfg)))
    checks.append(_check("G_z closed form vs Fock oracle (25 pairs)", err, 1e-8))

    err = max(
        abs(g_state(st, a, cfg.with_z(1.0)) - 1.0) for st in states for a in alphas
    )
    checks.append(_check("G_{z=1} = 1", err, 1e-12))

    for label, cs, a in (
        ("coherent", ClassicalState.coherent(1.0), 1 + 1j),
        ("thermal", ClassicalState.thermal(0.5), 1.0),
    ):
        est, se = monte_carlo_g(cs, a, cfg, mc_shots, seed)
        exact = cs.g(a, cfg)
        dev = abs(est - exact) / se
        checks.append(_check(f"Monte Carlo G_z {label} (sigmas)", dev, 3.0))

    cat = CoherentSuperposition.cat(1.0)
    cut = g_state(cat, 1j * np.linspace(-3, 3, 301), cfg)
    checks.append(_check("even cat Re(alpha)=0 cut minimum < 0", float(np.min(cut)), 0.0, float(np.min(cut)) < 0))

    # hybrid matrix
    ax = Axis.symmetric(4.0, 101)
    _, lam, _ = min_eig_scan(1.0, kern, ax, ax)
    checks.append(_check("hybrid lambda_min <= -1.37", lam, -1.37, lam <= -1.37))

    # tripartite state
    ax6 = Axis.symmetric(6.0, 121)
    mass = tripartite_stateP(1.0).integrate(KernelSpec.gaussian(-1.0), ax6, ax6)
    checks.append(_check("tripartite P integrates to 1", abs(mass - 1.0), 5e-3))
    f_w, cross = ghz_w_limits(0.1, 1.5)
    checks.append(_check("W fidelity vs closed form", abs(f_w - w_fidelity_closed_form(0.1)), 1e-9))
    checks.append(_check("GHZ cross overlap vs exp(-13.5)", abs(cross - math.exp(-13.5)), 1e-9))

    # entanglement quasiprobability
    table = ent_quasiprob(singlet())
    neg, cells = negativity_report(table)
    diag_neg = all(table.values[i, i] < 0 for i in range(6))
    checks.append(_check("singlet table residual", table.residual, 1e-10, table.residual < 1e-10 and diag_neg))
    checks.append(_check("singlet total negativity vs 4/3", abs(neg - 4.0 / 3.0), 1e-9))

    # convolution engine
    ax8 = Axis.symmetric(8.0, 256)
    gauss = lambda b: Grid2D.sample(ax8, ax8, lambda al: np.exp(-np.abs(al) ** 2 / b) / (math.pi * b))  # noqa: E731
    out = convolve(gauss(1.0), KernelSpec.gaussian(-1.0))
    checks.append(_check("Gaussian closure", np.max(np.abs(out.values - gauss(2.0).values)), 1e-6))
    back = deconvolve(out, KernelSpec.gaussian(-1.0), 1e-6)
    checks.append(_check("Gaussian deconvolution round trip", np.max(np.abs(back.values - gauss(1.0).values)), 1e-4))

    return checks


def payload(checks) -> bytes:
    """Canonical byte serialization of the numeric results."""
    doc = [[c.name, repr(c.value), c.passed] for c in checks]
    return json.dumps(doc, separators=(",", ":")).encode()

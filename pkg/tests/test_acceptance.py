"""Acceptance criteria 1-8, each at its stated tolerance and runtime budget.

Every criterion records one PASS/FAIL line, printed in the terminal summary
(see conftest.py). Running this file directly prints the same lines.
"""

import math
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from quasiphase import cli
from quasiphase.analytic import (
    DeltaTerm,
    KernelSpec,
    StateP,
    regularized_delta,
    s_param_state,
    spats_P,
)
from quasiphase.clicks import (
    ClassicalState,
    DetectionConfig,
    fock_click_oracle,
    g_interference,
    g_state,
    monte_carlo_g,
)
from quasiphase.convolution import Axis, Grid2D, convolve, deconvolve, integrate
from quasiphase.entanglement import LABELS, ent_quasiprob, negativity_report, product_state, singlet, werner
from quasiphase.fock import CoherentSuperposition, husimi_fock, spats_density, superposition_density
from quasiphase.hybrid import ghz_w_limits, min_eig_scan, tripartite_stateP, w_fidelity_closed_form

from oracles import fourier_oracle, thermal_click_quadrature

RESULTS = {}


class Criterion:
    """Collects sub-checks and the wall-clock time of one criterion."""

    def __init__(self, number, title, budget_s):
        self.number, self.title, self.budget = number, title, budget_s
        self.failures = []
        self.notes = []

    def check(self, ok, what):
        if not ok:
            self.failures.append(what)
        return ok

    def note(self, text):
        self.notes.append(text)

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        if exc_type is not None:
            self.failures.append(f"raised {exc_type.__name__}: {exc}")
        self.check(elapsed < self.budget, f"runtime {elapsed:.2f}s >= {self.budget}s")
        ok = not self.failures
        detail = "; ".join(self.failures if not ok else self.notes)
        RESULTS[self.number] = (
            f"[{'PASS' if ok else 'FAIL'}] criterion {self.number} ({self.title}, {elapsed:.2f}s): {detail}"
        )
        return False

    def verdict(self):
        assert not self.failures, RESULTS[self.number]


DET = DetectionConfig(N=2, eta=0.5, t=1 / math.sqrt(2), z=-1.0)
SINC3 = KernelSpec.sinc2(3.0)


def test_criterion_1_spats_negativity():
    with Criterion(1, "SPATS negativity", 5.0) as c:
        v0 = spats_P(1.0, 0)
        c.check(abs(v0 + 1 / math.pi) < 1e-12, f"P(0) = {v0!r}")
        root = brentq(lambda r: spats_P(1.0, r), 0.3, 1.0, xtol=1e-15, rtol=1e-15)
        c.check(abs(root - 1 / math.sqrt(2)) < 1e-10, f"zero crossing at {root!r}")
        ax = Axis.symmetric(6.0, 241)
        mass = integrate(Grid2D.sample(ax, ax, lambda a: spats_P(1.0, a)))
        c.check(abs(mass - 1) < 1e-6, f"grid mass {mass!r}")
        rho = spats_density(1.0, 80)
        pts = np.linspace(-1.5, 1.5, 5)
        err = max(
            abs(s_param_state(StateP.spats(1.0), -1.0, complex(x, y)) - husimi_fock(rho, complex(x, y)))
            for x in pts
            for y in pts
        )
        c.check(err < 1e-8, f"Q vs Fock Husimi {err:.3g}")
        c.note(f"P(0)+1/pi={v0 + 1 / math.pi:.2g}, root err={abs(root - 2 ** -0.5):.2g}, "
               f"mass err={abs(mass - 1):.2g}, Q err={err:.2g}")
    c.verdict()


def test_criterion_2_regularized_interference():
    with Criterion(2, "regularized interference", 30.0) as c:
        term = DeltaTerm(ket=-1, bra=1)
        v = regularized_delta(term, SINC3, 0)
        closed = math.exp(-2) * math.sinh(3) ** 2 / math.pi**2
        c.check(abs(v - closed) < 1e-9, f"alpha=0 value {v!r} vs {closed!r}")
        c.check(abs(closed - 1.3762) < 1e-4, f"closed form {closed!r}")
        quad = fourier_oracle(-1, 1, 3.0, 0)
        c.check(abs(v - quad) < 1e-8, f"quadrature {quad!r}")
        ax = Axis.symmetric(4.0, 201)
        a = Grid2D.alpha_mesh(ax, ax)
        worst = 0.0
        states = [
            CoherentSuperposition.cat(1.0, +1),
            CoherentSuperposition.cat(1.0, -1),
            CoherentSuperposition(((1.0, 1.0), (0.5j, -0.5 + 0.5j), (-0.3, 0.2j))).normalize(),
        ]
        for st in states:
            sp = StateP.from_superposition(st)
            total = sum(coef * regularized_delta(t, SINC3, a) for coef, t in sp.terms)
            worst = max(worst, float(np.max(np.abs(total.imag))))
        c.check(worst < 1e-10, f"imaginary residual {worst:.3g}")
        c.note(f"value={v:.6f}, |closed-quad|={abs(v - quad):.2g}, imag residual={worst:.2g}")
    c.verdict()


def test_criterion_3_click_triangle():
    with Criterion(3, "click-detection triangle", 120.0) as c:
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
                err = max(err, abs(g_state(st, a, DET) - fock_click_oracle(rho, a, DET)))
        c.check(err < 1e-8, f"closed form vs Fock oracle {err:.3g}")

        est, se = monte_carlo_g(ClassicalState.coherent(1.0), 1 + 1j, DET, 1_000_000, 2019)
        exact = g_interference(1 + 1j, 1.0, 1.0, DET).real
        dev_c = abs(est - exact) / se
        c.check(dev_c < 3, f"MC coherent {dev_c:.2f} sigma")
        est, se = monte_carlo_g(ClassicalState.thermal(0.5), 1.0, DET, 1_000_000, 2019)
        dev_t = abs(est - thermal_click_quadrature(0.5, 1.0, DET)) / se
        c.check(dev_t < 3, f"MC thermal {dev_t:.2f} sigma")

        x = np.linspace(-5, 5, 101)
        grid = x[None, :] + 1j * x[:, None]
        norm_err = max(float(np.max(np.abs(g_state(st, grid, DET.with_z(1.0)) - 1))) for st in states)
        c.check(norm_err < 1e-12, f"G_(z=1) deviation {norm_err:.3g}")

        cut = g_state(CoherentSuperposition.cat(1.0), 1j * np.linspace(-3, 3, 601), DET)
        c.check(cut.min() < 0, f"even cat cut minimum {cut.min():.4g}")

        lowest = np.inf
        for N in (2, 4):
            for z in (-1.0, -0.5, 0.5):
                cfg = DetectionConfig(N=N, eta=0.5, t=1 / math.sqrt(2), z=z)
                for beta in (0.0, 1.0, -0.7 + 1.3j):
                    lowest = min(lowest, float(np.min(g_state(CoherentSuperposition.coherent(beta), grid, cfg))))
                for nbar in (0.1, 0.5, 2.0):
                    lowest = min(lowest, float(np.min(ClassicalState.thermal(nbar).g(grid, cfg))))
        c.check(lowest >= -1e-10, f"classical minimum {lowest:.3g}")
        c.note(f"oracle err={err:.2g}, MC {dev_c:.2f}/{dev_t:.2f} sigma, cut min={cut.min():.4f}, "
               f"classical min={lowest:.2g}")
    c.verdict()


def test_criterion_4_hybrid_scan():
    with Criterion(4, "hybrid scan", 30.0) as c:
        ax = Axis.symmetric(4.0, 101)
        a_star, lam, _ = min_eig_scan(1.0, SINC3, ax, ax)
        c.check(lam <= -1.37, f"lambda_min {lam!r}")
        expected = math.sin(3) ** 2 / math.pi**2 - math.exp(-2) * math.sinh(3) ** 2 / math.pi**2
        c.check(lam <= expected + 1e-9, f"lambda_min above the alpha=0 sample {expected!r}")
        _, lam0, _ = min_eig_scan(1.0, SINC3, ax, ax, coherences=False)
        c.check(lam0 >= -1e-12, f"diagonal-only lambda_min {lam0!r}")
        c.note(f"lambda_min={lam:.5f} at {a_star}, diagonal-only={lam0:.2g}")
    c.verdict()


def test_criterion_5_tripartite():
    with Criterion(5, "tripartite", 60.0) as c:
        ax = Axis.symmetric(6.0, 121)
        mass = tripartite_stateP(1.0).integrate(KernelSpec.gaussian(-1.0), ax, ax)
        c.check(abs(mass - 1) < 5e-3, f"mass {mass!r}")
        f_w, cross = ghz_w_limits(0.1, 1.5)
        c.check(f_w > 0.999, f"F_W {f_w!r}")
        c.check(abs(f_w - w_fidelity_closed_form(0.1)) < 1e-9, "F_W vs closed form")
        c.check(cross < 2e-6, f"ghz_cross {cross!r}")
        c.check(abs(cross - math.exp(-6 * 1.5**2)) < 1e-9, "ghz_cross vs closed form")
        c.note(f"mass err={abs(mass - 1):.2g}, F_W={f_w:.6f}, ghz_cross={cross:.4g}")
    c.verdict()


def test_criterion_6_entanglement_quasiprobability():
    with Criterion(6, "entanglement quasiprobability", 5.0) as c:
        t = ent_quasiprob(singlet())
        c.check(t.residual < 1e-10, f"singlet residual {t.residual:.3g}")
        c.check(all(t[a, a] < 0 for a in LABELS), "a=b cells not all negative")
        c.check(abs(t.values.sum() - 1) < 1e-10, f"sum {t.values.sum()!r}")
        # analytic candidate: -2/9 same axis same sign, 5/18 same axis opposite sign, 1/36 across axes
        cand = np.array([[(1 - 9 * (a[0] == b[0]) * (1 if a[1] == b[1] else -1)) / 36 for b in LABELS] for a in LABELS])
        cross_err = float(np.max(np.abs(t.values - cand)))
        c.note(f"singlet residual={t.residual:.2g}, total negativity={negativity_report(t)[0]:.4f}, "
               f"min-norm vs analytic candidate {cross_err:.2g}")
        tw = ent_quasiprob(werner(0.2))
        c.check(tw.method == "nnls" and np.all(tw.values >= 0) and tw.residual < 1e-8, "Werner p=0.2 not NNLS-representable")
        for a, b in (("z+", "z+"), ("x+", "y-"), ("z-", "x-")):
            tp = ent_quasiprob(product_state(a, b))
            c.check(np.all(tp.values >= 0) and tp.residual < 1e-10, f"product {a}{b} table not nonnegative")
    c.verdict()


# Truncating the sinc2 kernel at radius 40 drops about 1/(pi w R) of its mass per
# axis, roughly 5.3e-3 in total, so the 5e-3 bound cannot hold on a resolved grid.
@pytest.mark.xfail(strict=True, reason="sinc2 tail beyond radius 40 exceeds 5e-3")
def test_criterion_7_convolution_engine():
    with Criterion(7, "convolution engine", 60.0) as c:
        ax8 = Axis.symmetric(8.0, 256)

        def gauss(b):
            return Grid2D.sample(ax8, ax8, lambda a: np.exp(-np.abs(a) ** 2 / b) / (math.pi * b))

        q = KernelSpec.gaussian(-1.0)
        out = convolve(gauss(1.0), q)
        closure = float(np.max(np.abs(out.values - gauss(2.0).values)))
        c.check(closure < 1e-6, f"Gaussian closure {closure:.3g}")
        back = deconvolve(out, q, 1e-6)
        trip = float(np.max(np.abs(back.values - gauss(1.0).values)))
        c.check(trip < 1e-4, f"round trip {trip:.3g}")
        # sinc2 kernel mass on a radius-40 grid; spacing 0.1 resolves the kernel
        ax40 = Axis.symmetric(40.0, 801)
        mass = integrate(Grid2D.sample(ax40, ax40, lambda a: SINC3(a.real, a.imag)))
        tail = 1 - (1 - 1 / (math.pi * 3.0 * 40.0)) ** 2
        c.check(abs(mass - 1) < 5e-3, f"sinc2 grid mass 1 - {1 - mass:.4g} (analytic tail ~{tail:.4g})")
        c.note(f"closure={closure:.2g}, round trip={trip:.2g}, sinc2 mass deficit={1 - mass:.4g}")
    c.verdict()


def test_criterion_8_determinism(capsys):
    with Criterion(8, "determinism", 60.0) as c:
        code = cli.main(["validate"])
        out = capsys.readouterr().out
        c.check(code == 0, f"validate exit code {code}")
        c.check("[PASS] determinism" in out, "payloads differ between runs")
        n_checks = sum(line.startswith("[PASS]") for line in out.splitlines())
        c.note(f"validate exit {code}, {n_checks} checks passed, payloads byte-identical")
    c.verdict()


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))

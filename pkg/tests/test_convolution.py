import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasiphase.analytic import DeltaTerm, KernelSpec, regularized_delta, thermal_P
from quasiphase.convolution import (
    Axis,
    Grid2D,
    UnsupportedKernelError,
    convolve,
    deconvolve,
    integrate,
)

AX8 = Axis.symmetric(8.0, 256)


def gaussian_grid(b, ax=AX8):
    return Grid2D.sample(ax, ax, lambda a: np.exp(-np.abs(a) ** 2 / b) / (math.pi * b))


# axes and grids ---------------------------------------------------------------


def test_axis_validation():
    with pytest.raises(ValueError):
        Axis(0.0, 1.0, 1)
    with pytest.raises(ValueError):
        Axis(1.0, -1.0, 10)
    ax = Axis(0.0, 1.0, 2)
    assert ax.spacing == 1.0
    assert np.array_equal(ax.points, [0.0, 1.0])


def test_grid_shape_and_immutability():
    ax = Axis(0.0, 1.0, 3)
    g = Grid2D(ax, Axis(0.0, 2.0, 5), np.zeros((5, 3)))
    assert g.cell_area == 0.5 * 0.5
    with pytest.raises(ValueError):
        g.values[0, 0] = 1
    with pytest.raises(ValueError):
        Grid2D(ax, ax, np.zeros((2, 3)))


def test_from_samples_rejects_nonuniform():
    with pytest.raises(ValueError):
        Grid2D.from_samples([0, 1, 3], [0, 1], np.zeros((2, 3)))
    g = Grid2D.from_samples([0, 0.5, 1.0], [0, 1], np.zeros((2, 3)))
    assert g.re_axis.spacing == 0.5


# integration ------------------------------------------------------------------


def test_integrate_constant():
    ax = Axis(0.0, 1.0, 2)
    assert integrate(Grid2D(ax, ax, np.ones((2, 2)))) == 1.0
    ax = Axis(0.0, 1.0, 11)
    assert abs(integrate(Grid2D(ax, ax, np.ones((11, 11)))) - 1.0) < 1e-15


def test_integrate_thermal():
    ax = Axis.symmetric(6.0, 256)
    mass = integrate(Grid2D.sample(ax, ax, lambda a: thermal_P(1.0, a)))
    assert abs(mass - 1) < 1e-6


def test_integrate_is_deterministic():
    rng = np.random.default_rng(0)
    ax = Axis.symmetric(3.0, 97)
    g = Grid2D(ax, ax, rng.normal(size=(97, 97)))
    assert integrate(g) == integrate(Grid2D(ax, ax, g.values.copy()))


# convolution ------------------------------------------------------------------


def test_gaussian_closure():
    out = convolve(gaussian_grid(1.0), KernelSpec.gaussian(-1.0))
    assert np.max(np.abs(out.values - gaussian_grid(2.0).values)) < 1e-6
    assert out.re_axis == AX8 and out.im_axis == AX8


def test_gaussian_closure_wigner_kernel():
    out = convolve(gaussian_grid(0.7), KernelSpec.gaussian(0.0))
    assert np.max(np.abs(out.values - gaussian_grid(1.2).values)) < 1e-6


def test_mass_preserved():
    f = gaussian_grid(1.3)
    out = convolve(f, KernelSpec.gaussian(-0.2))
    assert abs(integrate(out) - integrate(f)) < 1e-6


def test_spike_reproduces_kernel():
    ax = Axis.symmetric(4.0, 161)
    v = np.zeros((161, 161))
    v[80, 80] = 1.0 / ax.spacing**2
    spike = Grid2D(ax, ax, v)
    kern = KernelSpec.sinc2(3.0)
    out = convolve(spike, kern)
    ref = regularized_delta(DeltaTerm(0, 0), kern, spike.alpha)
    assert np.max(np.abs(out.values - ref)) < 1e-12


def test_diagonal_term_analytic_agreement():
    # a narrow Gaussian stand-in for the point mass at beta, convolved numerically
    beta = 0.5 - 0.25j
    eps = 0.02
    ax = Axis.symmetric(6.0, 601)
    f = Grid2D.sample(ax, ax, lambda a: np.exp(-np.abs(a - beta) ** 2 / eps) / (math.pi * eps))
    kern = KernelSpec.gaussian(-1.0)
    out = convolve(f, kern)
    # the closed form convolved with the same width is Gaussian of width b + eps
    b = kern.variance
    ref = np.exp(-np.abs(f.alpha - beta) ** 2 / (b + eps)) / (math.pi * (b + eps))
    inner = np.abs(f.alpha) < 4
    assert np.max(np.abs(out.values - ref)[inner]) < 1e-6
    # and the eps -> 0 limit is regularized_delta
    delta = regularized_delta(DeltaTerm(beta, beta), kern, f.alpha)
    assert np.max(np.abs(ref - delta)[inner]) < 0.05


def test_complex_input():
    f = gaussian_grid(1.0)
    g = f.with_values(f.values * (1 + 2j))
    out = convolve(g, KernelSpec.gaussian(-1.0))
    assert np.max(np.abs(out.values - (1 + 2j) * convolve(f, KernelSpec.gaussian(-1.0)).values)) < 1e-12


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    ax = Axis.symmetric(3.0, 48)
    f = Grid2D(ax, ax, rng.normal(size=(48, 48)))
    g = Grid2D(ax, ax, rng.normal(size=(48, 48)))
    for kern in (KernelSpec.sinc2(2.0), KernelSpec.gaussian(-1.0)):
        lhs = convolve(f.with_values(a * f.values + b * g.values), kern).values
        rhs = a * convolve(f, kern).values + b * convolve(g, kern).values
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_no_wraparound():
    # mass at one corner must not leak to the opposite corner
    ax = Axis.symmetric(4.0, 64)
    v = np.zeros((64, 64))
    v[0, 0] = 1.0
    out = convolve(Grid2D(ax, ax, v), KernelSpec.gaussian(-1.0)).values
    # a circular wrap would put kernel-sized mass there; only roundoff is allowed
    assert abs(out[-1, -1]) < 1e-15


# deconvolution ----------------------------------------------------------------


def test_gaussian_round_trip():
    f = gaussian_grid(1.0)
    k = KernelSpec.gaussian(-1.0)
    back = deconvolve(convolve(f, k), k, 1e-6)
    assert np.max(np.abs(back.values - f.values)) < 1e-4


def test_thermal_q_deconvolves_to_p():
    ax = AX8
    q = Grid2D.sample(ax, ax, lambda a: np.exp(-np.abs(a) ** 2 / 2.0) / (2.0 * math.pi))
    p = deconvolve(q, KernelSpec.gaussian(-1.0), 1e-6)
    ref = thermal_P(1.0, q.alpha)
    assert np.max(np.abs(p.values - ref)) < 1e-3


def test_cutoff_one_zeroes_everything():
    out = deconvolve(gaussian_grid(1.0), KernelSpec.gaussian(-1.0), 1.0)
    assert np.all(out.values == 0)


@pytest.mark.parametrize("eps", [0.0, -1e-3, 1.5])
def test_cutoff_range(eps):
    with pytest.raises(ValueError):
        deconvolve(gaussian_grid(1.0), KernelSpec.gaussian(-1.0), eps)


def test_sinc2_deconvolution_unsupported():
    with pytest.raises(UnsupportedKernelError):
        deconvolve(gaussian_grid(1.0), KernelSpec.sinc2(3.0), 1e-6)

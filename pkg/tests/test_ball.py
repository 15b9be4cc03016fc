"""Closed-form checks for the ball kernel, trace, and rejection sampler."""

import math

import numpy as np
import pytest
from scipy import stats as sps

from exitlaw import Ball
from exitlaw.ball import (KernelQuery, arc_probabilities, expected_exit_time,
                          gamma_half, kernel_normalization, poisson_kernel,
                          rejection_envelope, sample_exact, sample_exact_batch,
                          second_moment_identity_check, second_moment_quadrature,
                          sphere_surface_area, theoretical_mean, theoretical_trace)
from exitlaw.geometry import BoxDomain
from exitlaw.rng import RngStream


def unit_ball(d):
    return Ball(np.zeros(d), 1.0)


# ------------------------------------------------------------ closed forms

@pytest.mark.parametrize("d", range(1, 13))
def test_gamma_half_recurrence_matches_math_gamma(d):
    assert gamma_half(d) == pytest.approx(math.gamma(d / 2), rel=1e-14)


def test_surface_areas():
    assert sphere_surface_area(1, 1.0) == pytest.approx(2.0)           # two points
    assert sphere_surface_area(2, 1.0) == pytest.approx(2 * math.pi)   # circle
    assert sphere_surface_area(3, 1.0) == pytest.approx(4 * math.pi)   # sphere
    assert sphere_surface_area(3, 2.0) == pytest.approx(16 * math.pi)
    assert sphere_surface_area(4, 1.0) == pytest.approx(2 * math.pi ** 2)


def test_kernel_hand_values():
    # center start: uniform over the boundary, 1/S
    q = KernelQuery(unit_ball(2), np.zeros(2), np.array([1.0, 0.0]))
    assert poisson_kernel(q) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    q = KernelQuery(unit_ball(3), np.zeros(3), np.array([0.0, 0.0, 1.0]))
    assert poisson_kernel(q) == pytest.approx(1 / (4 * math.pi), rel=1e-14)
    # off-center: mass piles up on the near side
    q = KernelQuery(unit_ball(2), np.array([0.5, 0.0]), np.array([1.0, 0.0]))
    assert poisson_kernel(q) == pytest.approx(3 / (2 * math.pi), rel=1e-14)
    q = KernelQuery(unit_ball(2), np.array([0.5, 0.0]), np.array([-1.0, 0.0]))
    assert poisson_kernel(q) == pytest.approx(1 / (6 * math.pi), rel=1e-14)


def test_kernel_query_validation():
    b = unit_ball(2)
    with pytest.raises(ValueError):
        KernelQuery(b, np.array([1.0, 0.0]), np.array([1.0, 0.0]))   # x on boundary
    with pytest.raises(ValueError):
        KernelQuery(b, np.zeros(2), np.array([0.5, 0.0]))            # y interior
    with pytest.raises(ValueError):
        KernelQuery(b, np.zeros(2), np.array([1.0, 1.0]))            # y outside


@pytest.mark.parametrize("rho", [0.0, 0.25, 0.5, 0.9])
def test_normalization_d2_trapezoid(rho):
    b = unit_ball(2)
    norm = kernel_normalization(b, np.array([rho, 0.0]), 10_000)
    assert abs(norm - 1.0) <= 1e-6   # spectral convergence: actually ~1e-15


@pytest.mark.parametrize("rho", [0.0, 0.25, 0.5, 0.9])
def test_normalization_d1_exact(rho):
    b = unit_ball(1)
    assert abs(kernel_normalization(b, np.array([rho]), 2) - 1.0) <= 1e-12


@pytest.mark.parametrize("d", [3, 4])
def test_normalization_monte_carlo(d):
    b = unit_ball(d)
    x = np.zeros(d)
    x[0] = 0.5
    # SE of the surface-area-weighted kernel mean is ~5e-3 at this n;
    # 0.02 is ~4 SE (the tight 5e-3 budget belongs to the 1e6-sample runs)
    norm = kernel_normalization(b, x, 300_000, stream=RngStream(seed=0, stream_id=0))
    assert abs(norm - 1.0) <= 0.02
    # center start: the kernel is constant, so MC is exact at any n
    exact = kernel_normalization(b, np.zeros(d), 128, stream=RngStream(seed=0, stream_id=0))
    assert abs(exact - 1.0) <= 1e-12


def test_normalization_rejects_outside_point():
    with pytest.raises(ValueError):
        kernel_normalization(unit_ball(2), np.array([1.0, 0.0]), 100)


def test_theoretical_mean_and_trace():
    b = Ball(np.array([1.0, -2.0]), 2.0)
    th = np.array([1.5, -2.0])
    assert np.array_equal(theoretical_mean(b, th), th)
    assert theoretical_trace(b, th) == pytest.approx(4.0 - 0.25, abs=1e-15)
    box = BoxDomain((0.0, 0.0), (2.0, 1.0))
    assert np.array_equal(theoretical_mean(box, (0.4, 0.3)), (0.4, 0.3))
    with pytest.raises(ValueError):
        theoretical_mean(b, np.array([3.5, -2.0]))
    with pytest.raises(ValueError):
        theoretical_trace(b, np.array([3.0, -2.0]))


def test_trace_table_values():
    b = unit_ball(2)
    assert theoretical_trace(b, (0.2, 0.0)) == pytest.approx(0.96, abs=1e-15)
    assert theoretical_trace(b, (0.5, 0.0)) == pytest.approx(0.75, abs=1e-15)
    assert theoretical_trace(b, (0.8, 0.0)) == pytest.approx(0.36, abs=1e-15)


def test_trace_monotone_and_boundary_limit():
    b = unit_ball(3)
    rhos = np.linspace(0.0, 0.999, 40)
    traces = [theoretical_trace(b, np.r_[r, 0.0, 0.0]) for r in rhos]
    assert all(a > bb for a, bb in zip(traces, traces[1:]))
    # factored form stays accurate as rho -> r
    near = theoretical_trace(b, np.r_[1.0 - 1e-6, 0.0, 0.0])
    assert near == pytest.approx(2e-6 * (1 - 5e-7), rel=1e-9)
    assert near < 3e-6


def test_expected_exit_time_values():
    assert expected_exit_time(unit_ball(2), np.zeros(2)) == pytest.approx(0.5)
    b4 = unit_ball(4)
    assert expected_exit_time(b4, (0.5, 0, 0, 0)) == pytest.approx(0.1875)
    assert expected_exit_time(unit_ball(1), np.zeros(1)) == pytest.approx(1.0)


def test_quadrature_identity_matches_trace():
    b = unit_ball(2)
    for rho in (0.0, 0.25, 0.5, 0.9):
        th = np.array([rho, 0.0])
        assert abs(second_moment_quadrature(b, th)
                   - theoretical_trace(b, th)) <= 1e-8
    with pytest.raises(ValueError):
        second_moment_quadrature(unit_ball(3), np.zeros(3))


# ------------------------------------------------------- rejection sampler

def test_envelope_hand_values():
    assert rejection_envelope(unit_ball(2), (0.5, 0.0)) == pytest.approx(3.0)
    assert rejection_envelope(unit_ball(2), (0.0, 0.0)) == pytest.approx(1.0)
    assert rejection_envelope(unit_ball(4), (0.8, 0, 0, 0)) == pytest.approx(225.0)


def test_near_boundary_start_rejected_with_advice():
    b = unit_ball(2)
    with pytest.raises(ValueError, match="walk-on-spheres"):
        sample_exact_batch(b, (1.0 - 1e-12, 0.0), 0, np.arange(4, dtype=np.uint64))


def test_exact_points_on_boundary_and_deterministic():
    b = Ball(np.array([0.5, -1.0, 2.0]), 1.5)
    th = np.array([0.9, -1.0, 2.0])
    ids = np.arange(256, dtype=np.uint64)
    batch = sample_exact_batch(b, th, 5, ids)
    radii = np.linalg.norm(batch.points - b.center, axis=1)
    assert np.abs(radii - 1.5).max() <= 1e-9 * 1.5
    assert (batch.steps >= 1).all()
    again = sample_exact_batch(b, th, 5, ids)
    assert np.array_equal(batch.points, again.points)
    assert np.array_equal(batch.steps, again.steps)


def test_exact_scalar_matches_batch_row():
    b = unit_ball(2)
    th = np.array([0.5, 0.0])
    batch = sample_exact_batch(b, th, 9, np.arange(8, dtype=np.uint64))
    for i in range(8):
        s = RngStream(seed=9, stream_id=i)
        one = sample_exact(b, th, s)
        assert np.array_equal(one.exit_point, batch.points[i])
        assert one.steps == batch.steps[i]
        # the stream advanced exactly by what the sample consumed
        assert s._gcur == one.steps * 2 and s._ucur == one.steps


def test_acceptance_rate_matches_envelope():
    # steps are Geometric(1/M); mean steps estimates M
    b = unit_ball(2)
    th = np.array([0.5, 0.0])
    M = rejection_envelope(b, th)   # 3.0
    n = 20_000
    batch = sample_exact_batch(b, th, 21, np.arange(n, dtype=np.uint64))
    se = math.sqrt(M * (M - 1) / n)   # geometric sd / sqrt(n)
    assert abs(batch.steps.mean() - M) <= 4 * se


def test_exact_center_start_accepts_immediately():
    # at the center the kernel is uniform and M = 1: every proposal lands
    b = unit_ball(3)
    batch = sample_exact_batch(b, np.zeros(3), 3, np.arange(64, dtype=np.uint64))
    assert (batch.steps == 1).all()


def test_exact_sampler_goodness_of_fit():
    # 36-arc chi-square of 1e5 draws against the quadrature arc masses
    b = unit_ball(2)
    th = np.array([0.5, 0.0])
    n = 100_000
    batch = sample_exact_batch(b, th, 2, np.arange(n, dtype=np.uint64))
    ang = np.arctan2(batch.points[:, 1], batch.points[:, 0])
    counts = np.histogram(ang, bins=36, range=(-math.pi, math.pi))[0]
    # arc k of arc_probabilities starts at angle 0; histogram starts at -pi
    probs = arc_probabilities(b, th, 36)
    expect = n * np.roll(probs, 18)
    stat = ((counts - expect) ** 2 / expect).sum()
    assert stat < sps.chi2.ppf(0.999, 35)


def test_arc_probabilities_sum_and_symmetry():
    b = unit_ball(2)
    p = arc_probabilities(b, np.array([0.5, 0.0]), 36)
    assert p.sum() == pytest.approx(1.0, abs=1e-14)
    assert (p > 0).all()
    # symmetric about the x-axis: arc k reflects onto arc 35-k
    assert np.allclose(p, p[::-1], rtol=1e-10)
    # near side (angle ~0) beats far side (angle ~pi)
    assert p[0] > p[18]
    with pytest.raises(ValueError):
        arc_probabilities(b, np.array([1.5, 0.0]), 36)


def test_second_moment_identity_on_samples():
    b = unit_ball(2)
    th = np.array([0.5, 0.0])
    n = 50_000
    batch = sample_exact_batch(b, th, 4, np.arange(n, dtype=np.uint64))
    w = second_moment_identity_check(batch, th)
    # SE of mean |Y-theta|^2 at this n, measured once and rounded up
    assert abs(w - 0.75) <= 4 * 0.004

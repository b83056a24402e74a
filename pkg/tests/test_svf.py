import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from matpressure.ergodic import Bernoulli, Mixture, PeriodicOrbit
from matpressure.errors import InputError
from matpressure.matfam import MatrixFamily
from matpressure.pressure import pressure_bounds
from matpressure.svf import (affinity_dimension, exterior_identity_check, log_phi_from_logs, phi,
                             svf_energy, svf_pressure_bounds, svf_submultiplicativity_check)

from conftest import fam

LOG2 = np.log(2)
GOLDEN_DIM = np.log((1 + np.sqrt(5)) / 2) / LOG2


def invertible(d):
    return arrays(float, (d, d), elements=st.floats(-2, 2, allow_nan=False)).filter(
        lambda M: np.linalg.svd(M, compute_uv=False)[-1] > 1e-3)


def half_scalings(k):
    return fam(*[0.5 * np.eye(2)] * k)


@pytest.fixture
def anisotropic():
    return fam(np.diag([0.5, 0.25]), np.diag([0.25, 0.5]))


def test_phi_examples():
    assert phi(np.diag([3.0, 1.0]), 1.5).log_value == pytest.approx(np.log(3))
    assert phi(np.eye(3), 2.3).log_value == 0.0
    assert phi(np.diag([3.0, 2.0, 1.0]), 2).log_value == pytest.approx(np.log(6))
    assert phi(np.diag([3.0, 2.0]), 4).log_value == pytest.approx(2 * np.log(6))


def test_phi_singular_is_minus_inf():
    assert phi(np.diag([1.0, 0.0]), 1.5).log_value == -np.inf
    assert phi(np.diag([2.0, 0.0]), 1).log_value == pytest.approx(LOG2)
    with pytest.raises(InputError):
        phi(np.eye(2), -1)


@settings(max_examples=30, deadline=None)
@given(invertible(3))
def test_phi_consistent_at_d(M):
    sv = np.linalg.svd(M, compute_uv=False)
    below = np.sum(np.log(sv))  # the q < d formula evaluated at q = d
    assert phi(M, 3).log_value == pytest.approx(below, abs=1e-10)
    assert phi(M, 3 - 1e-12).log_value == pytest.approx(below, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(invertible(3))
def test_phi_piecewise_linear_in_q(M):
    grid = np.arange(0, 3 + 1e-9, 1 / 16)
    vals = np.array([phi(M, q).log_value for q in grid])
    slope = np.max(np.abs(np.log(np.linalg.svd(M, compute_uv=False))))
    assert np.all(np.abs(np.diff(vals)) <= slope / 16 + 1e-10)
    # linear between integers
    for k in range(3):
        seg = vals[16 * k:16 * (k + 1) + 1]
        assert np.allclose(np.diff(seg, 2), 0, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 1.0), invertible(3))
def test_phi_is_norm_power_below_one(q, M):
    assert phi(M, q).log_value == pytest.approx(q * np.log(np.linalg.norm(M, 2)), abs=1e-12)


def test_exterior_identity_examples():
    c = exterior_identity_check(np.diag([3.0, 2.0, 1.0]), 2)
    assert c.lhs == pytest.approx(np.log(6)) and c.gap < 1e-12
    M = np.random.default_rng(0).normal(size=(3, 3))
    assert exterior_identity_check(M, 1).gap == 0.0
    with pytest.raises(InputError):
        exterior_identity_check(M, 4)


@settings(max_examples=40, deadline=None)
@given(st.one_of(invertible(3), invertible(4)), st.integers(1, 3))
def test_exterior_identity(M, q):
    assert exterior_identity_check(M, q).gap <= 1e-9


def test_svf_pressure_conformal():
    for s in (0.3, 1.0, 1.7, 2.5):
        e = svf_pressure_bounds(half_scalings(2), s, 5)
        for _, v in e.per_depth_values:
            assert v == pytest.approx(LOG2 - s * LOG2, abs=1e-12)
        assert e.width == pytest.approx(0.0, abs=1e-12)


def test_svf_pressure_singleton():
    e = svf_pressure_bounds(fam(np.diag([0.5, 1 / 3])), 1.0, 3)
    assert e.upper == pytest.approx(-LOG2) and e.lower == pytest.approx(-LOG2)


def test_svf_pressure_three_halves():
    s = 1.585
    e = svf_pressure_bounds(half_scalings(3), s, 4)
    assert e.upper == pytest.approx(np.log(3) - s * LOG2, abs=1e-12)


def test_svf_pressure_closed_form(anisotropic):
    # P^phi(s) = log(2^-s + 4^-s) for 0 <= s <= 1
    for s in (0.25, 0.7, 1.0):
        e = svf_pressure_bounds(anisotropic, s, 10)
        assert e.contains(np.log(2.0 ** -s + 4.0 ** -s), slack=1e-12)


def test_svf_agrees_with_norm_pressure_below_one(shear_pair):
    for q in (0.3, 1.0):
        a = svf_pressure_bounds(shear_pair, q, 6)
        b = pressure_bounds(shear_pair, q, 6, psd=False)
        assert a.upper == pytest.approx(b.upper, abs=1e-10)


def test_svf_requires_invertible(trivial_pair):
    with pytest.raises(InputError):
        svf_pressure_bounds(trivial_pair, 1.0, 3)


@settings(max_examples=20, deadline=None)
@given(arrays(float, (2, 2, 2), elements=st.floats(-1, 1, allow_nan=False)).filter(
    lambda a: all(np.linalg.svd(M, compute_uv=False)[-1] > 1e-2 for M in a)),
    st.floats(0.0, 4.0))
def test_svf_bounds_ordered(mats, q):
    e = svf_pressure_bounds(MatrixFamily(mats), q, 6)
    assert e.lower <= e.upper


def test_svf_energy_examples(anisotropic):
    assert svf_energy(half_scalings(2), Bernoulli((0.5, 0.5)), 1.0, 6) == pytest.approx(-LOG2)
    assert svf_energy(fam(np.diag([0.5, 1 / 3])), PeriodicOrbit("1"), 2.0, 3) == pytest.approx(
        -np.log(6))


def test_svf_energy_brute_force(anisotropic):
    n = 10
    total = 0.0
    for w in itertools.product((0, 1), repeat=n):
        a = w.count(0)
        b = n - a
        total += 0.5 ** n * np.log(max(2.0 ** (-a - 2 * b), 2.0 ** (-2 * a - b)))
    got = svf_energy(anisotropic, Bernoulli((0.5, 0.5)), 1.0, n)
    assert got == pytest.approx(total / n, rel=1e-12)
    # the limit is -1.5 log 2; depth 10 sits above it
    assert got > -1.5 * LOG2


def test_svf_energy_mixture_is_affine(anisotropic):
    mu = Mixture((0.25, 0.75), (PeriodicOrbit("1"), PeriodicOrbit("12")))
    parts = [svf_energy(anisotropic, c, 1.5, 4) for c in mu.components]
    assert svf_energy(anisotropic, mu, 1.5, 4) == pytest.approx(0.25 * parts[0] + 0.75 * parts[1])


@pytest.mark.parametrize("mu", [Bernoulli((0.5, 0.5)), Bernoulli((0.2, 0.8)), PeriodicOrbit("12"),
                                Mixture((0.5, 0.5), (PeriodicOrbit("1"), Bernoulli((0.3, 0.7))))])
@pytest.mark.parametrize("q", [0.5, 1.0, 1.5, 2.5])
def test_svf_variational_inequality(anisotropic, mu, q):
    n = 8
    e = svf_pressure_bounds(anisotropic, q, n)
    energy = min(svf_energy(anisotropic, mu, q, m) for m in range(1, n + 1))
    assert energy + mu.entropy() <= e.upper + 1e-9


def test_affinity_conformal():
    r2 = affinity_dimension(half_scalings(2))
    assert r2.s_low <= 1.0 <= r2.s_high and r2.width <= 1e-6
    r3 = affinity_dimension(half_scalings(3))
    assert r3.s_low <= np.log(3) / LOG2 <= r3.s_high and r3.width <= 1e-6


def test_affinity_anisotropic_bracket(anisotropic):
    r = affinity_dimension(anisotropic, n_max=10)
    assert r.s_low <= GOLDEN_DIM <= r.s_high
    # the upper curve is strictly decreasing along the trace
    pts = sorted((s, up) for s, _, up in r.trace)
    assert all(b[1] < a[1] for a, b in zip(pts, pts[1:]))


def test_affinity_rejects_non_contractions():
    with pytest.raises(InputError):
        affinity_dimension(fam(np.diag([2.0, 0.5]), 0.5 * np.eye(2)))


def test_submultiplicativity(anisotropic):
    assert svf_submultiplicativity_check(anisotropic, 100, 7) <= 1e-12
    assert abs(svf_submultiplicativity_check(half_scalings(2), 50, 1)) <= 1e-12


def test_phi_zero_order():
    assert log_phi_from_logs(np.log([3.0, 2.0]), 0.0) == 0.0

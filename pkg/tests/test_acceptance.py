"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one line ``criterion N: PASS|FAIL (details)`` straight to
the terminal and then asserts.  Run alone with ``pytest tests/test_acceptance.py``
or as a script with ``python3 tests/test_acceptance.py``.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from matpressure.decomp import block_triangularize
from matpressure.ergodic import (Bernoulli, Mixture, PeriodicOrbit, block_lyapunov, lyapunov,
                                 variational_defect)
from matpressure.gibbs import (CylinderDistribution, cesaro_shift_average,
                               equilibrium_description, gibbs_ratio_stats,
                               pressure_derivative_check)
from matpressure.matfam import MatrixFamily
from matpressure.pressure import pressure_bounds, pressure_even_spectral, pressure_via_blocks
from matpressure.svf import (affinity_dimension, exterior_identity_check,
                             svf_submultiplicativity_check)
from matpressure.words import all_products

from conftest import fam

LOG2, LOG3 = np.log(2), np.log(3)
_report = None


def _emit(line):
    if _report is not None:
        with _report.disabled():
            print(line)
    else:
        print(line)


@pytest.fixture(autouse=True)
def _terminal(capsys):
    global _report
    _report = capsys
    yield
    _report = None


def verdict(n, checks, started):
    """checks: list of (label, ok).  Prints the criterion line and asserts."""
    elapsed = time.perf_counter() - started
    failed = [label for label, ok in checks if not ok]
    status = "PASS" if not failed else "FAIL"
    detail = "; ".join(label for label, _ in checks)
    _emit(f"criterion {n}: {status} ({detail}; {elapsed:.2f} s)")
    assert not failed, f"criterion {n} failed: {failed}"


def diag():
    return fam(np.diag([1.0, 2.0]), np.diag([3.0, 2.0]))


def shear_pair():
    return fam([[1, 1], [0, 1]], [[1, 0], [1, 1]])


def bernoulli_level(p, m):
    out = np.ones(1)
    for _ in range(m):
        out = np.multiply.outer(out, p).ravel()
    return CylinderDistribution(m, len(p), np.log(out))


def close(a, b, tol):
    return abs(a - b) <= tol


def test_criterion_1_reducible_lyapunov_values():
    t0 = time.perf_counter()
    F = diag()
    dec = block_triangularize(F)
    d1 = block_lyapunov(F, dec, PeriodicOrbit("1"), 4)
    d2 = block_lyapunov(F, dec, PeriodicOrbit("2"), 4)
    mix = block_lyapunov(F, dec, Mixture((0.5, 0.5), (PeriodicOrbit("1"), PeriodicOrbit("2"))), 4)
    tol = 1e-12
    checks = [
        (f"M(d1)={d1.value:.15g}", close(d1.value, LOG2, tol)),
        (f"A1(d1)={d1.block_values[1]:.3g}", close(d1.block_values[1], 0.0, tol)),
        ("A2(d1)=log2", close(d1.block_values[2], LOG2, tol)),
        ("M(d2)=log3", close(d2.value, LOG3, tol)),
        ("A1(d2)=log3", close(d2.block_values[1], LOG3, tol)),
        ("A2(d2)=log2", close(d2.block_values[2], LOG2, tol)),
        (f"M(mix)={mix.value:.15g}=log6/2", close(mix.value, 0.5 * np.log(6), tol)),
        ("M(mix)>max(log3/2,log2)", mix.value > max(0.5 * LOG3, LOG2)),
    ]
    checks.append(("runtime<1s", time.perf_counter() - t0 < 1.0))
    verdict(1, checks, t0)


def test_criterion_2_block_pressure_shadow():
    t0 = time.perf_counter()
    F = diag()
    dec = block_triangularize(F)
    exact = {0.5: np.log(2 * np.sqrt(2)), 1.0: np.log(4), 2.0: np.log(10)}
    checks = []
    for q, v in exact.items():
        b = pressure_via_blocks(F, dec, q, 14).estimate
        e = pressure_bounds(F, q, 14)
        checks.append((f"P({q}) blocks [{b.lower:.12g},{b.upper:.12g}]",
                       close(b.lower, v, 1e-12) and close(b.upper, v, 1e-12)))
        checks.append((f"direct n=14 [{e.lower:.5f},{e.upper:.5f}] width {e.width:.4f}",
                       e.contains(v) and e.width <= 0.15))
    checks.append(("runtime<30s", time.perf_counter() - t0 < 30))
    verdict(2, checks, t0)


def test_criterion_3_kink_and_equilibria():
    t0 = time.perf_counter()
    F = diag()
    dec = block_triangularize(F)
    e1 = equilibrium_description(F, dec, 1.0, 12)
    e2 = equilibrium_description(F, dec, 2.0, 12)
    tv1 = e1.extremal_states[1].total_variation(bernoulli_level([0.25, 0.75], 3)) if 1 in e1.extremal_states else 1
    tv2 = e1.extremal_states[2].total_variation(bernoulli_level([0.5, 0.5], 3)) if 2 in e1.extremal_states else 1
    full = cesaro_shift_average(F, 2.0, 12, 3)
    tv_full = full.total_variation(bernoulli_level([0.1, 0.9], 3))
    tv_blk = e2.extremal_states[1].total_variation(bernoulli_level([0.1, 0.9], 3))
    der = pressure_derivative_check(F, 1.0, 1e-3, 12, decomp=dec)
    target = 0.75 * LOG3 - LOG2
    checks = [
        (f"achievers(1)={e1.achiever_blocks}", e1.achiever_blocks == (1, 2)),
        (f"block states at q=1 TV {tv1:.1e},{tv2:.1e}", tv1 < 1e-10 and tv2 < 1e-10),
        (f"achievers(2)={e2.achiever_blocks}", e2.achiever_blocks == (1,)),
        (f"q=2 level-3 TV full {tv_full:.4f} block {tv_blk:.1e}", tv_full <= 0.05 and tv_blk <= 0.05),
        (f"kink {der.kink:.5f} vs {target:.5f}", close(der.kink, target, 5e-3)),
    ]
    verdict(3, checks, t0)


def test_criterion_4_gibbs_property():
    t0 = time.perf_counter()
    S = fam([[1.0]], [[3.0]])
    mu = cesaro_shift_average(S, 1.0, 10, 5)
    g = gibbs_ratio_stats(S, 1.0, mu, pressure_bounds(S, 1.0, 10))
    scalar_ok = close(g.ratio_min, 1.0, 1e-10) and close(g.ratio_max, 1.0, 1e-10)
    H = shear_pair()
    spreads = {}
    for m, n in ((6, 14), (8, 16)):
        mu = cesaro_shift_average(H, 1.0, n, m)
        gs = gibbs_ratio_stats(H, 1.0, mu, pressure_bounds(H, 1.0, n))
        spreads[m] = gs.spread
    ratio = spreads[8] / spreads[6]
    checks = [
        (f"scalar ratios in [{g.ratio_min:.15g},{g.ratio_max:.15g}]", scalar_ok),
        (f"shear spread m6 {spreads[6]:.4f} m8 {spreads[8]:.4f}",
         np.isfinite(spreads[8]) and 0.5 <= ratio <= 2.0),
    ]
    checks.append(("runtime<120s", time.perf_counter() - t0 < 120))
    verdict(4, checks, t0)


def test_criterion_5_triviality():
    t0 = time.perf_counter()
    F = fam([[0, 1], [0, 0]], [[0, 2], [0, 0]])
    dec = block_triangularize(F)
    prods = all_products(F.matrices, 2)
    checks = [(f"Λ={dec.lambda_}", dec.lambda_ == ()),
              (f"{len(prods)} length-2 products exactly zero", len(prods) == 4 and not np.any(prods))]
    for q in (1.0, 2.0):
        e = pressure_bounds(F, q, 6)
        b = pressure_via_blocks(F, dec, q, 6).estimate
        checks.append((f"P({q})={e.upper}", e.upper == e.lower == b.upper == -np.inf))
    verdict(5, checks, t0)


def test_criterion_6_decomposition_robustness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    base = np.zeros((2, 3, 3))
    base[:, 0, 0] = rng.normal(size=2)
    base[:, 0, 1:] = rng.normal(size=(2, 2))
    base[:, 1:, 1:] = rng.normal(size=(2, 2, 2))
    assert block_triangularize(MatrixFamily(base[:, 1:, 1:])).t == 1
    good, worst = 0, 0.0
    for _ in range(20):
        Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
        Q = Q * np.sign(np.diag(R))
        F = MatrixFamily(Q.T @ base @ Q)
        d = block_triangularize(F)
        good += sorted(d.block_sizes) == [1, 2] and len(d.lambda_) == 2
        worst = max(worst, d.reconstruction_residual(F))
    checks = [(f"recovered {good}/20", good >= 19), (f"max residual {worst:.1e}", worst <= 1e-8)]
    verdict(6, checks, t0)


def test_criterion_7_spectral_oracle():
    t0 = time.perf_counter()
    H = shear_pair()
    s = pressure_even_spectral(H, 1)
    e = pressure_bounds(H, 2.0, 14, "frobenius")
    checks = [(f"spectral {s:.13f} in [{e.lower:.13f},{e.upper:.7f}]", e.contains(s)),
              (f"width {e.width:.4f}", e.width <= 0.1)]
    verdict(7, checks, t0)


def test_criterion_8_single_matrix_gelfand():
    t0 = time.perf_counter()
    e = pressure_bounds(fam([[1, 1], [0, 1]]), 1.0, 128)
    checks = [(f"upper {e.upper:.5f}", e.upper <= 0.04),
              (f"periodic lower {e.lower_routes['periodic']}", e.lower_routes["periodic"] == 0.0),
              ("0 bracketed", e.contains(0.0))]
    verdict(8, checks, t0)


def test_criterion_9_svf_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    gap = 0.0
    count = 0
    for d in (3, 4):
        for _ in range(50):
            M = rng.normal(size=(d, d))
            for q in (1, 2, 3):
                gap = max(gap, exterior_identity_check(M, q).gap)
                count += 1
    fams = [fam(np.diag([0.5, 0.25]), np.diag([0.25, 0.5])), fam(*rng.normal(size=(3, 3, 3)))]
    viol = max(svf_submultiplicativity_check(F, 100, 7) for F in fams)
    t1 = time.perf_counter()
    r3 = affinity_dimension(fam(*[0.5 * np.eye(2)] * 3), tol=1e-6)
    t_aff = time.perf_counter() - t1
    r2 = affinity_dimension(fam(*[0.5 * np.eye(2)] * 2), tol=1e-6)
    s3 = np.log(3) / LOG2
    checks = [
        (f"exterior gap {gap:.1e} over {count}", gap <= 1e-9),
        (f"submultiplicativity {viol:.1e}", viol <= 1e-10),
        (f"three halves [{r3.s_low:.9f},{r3.s_high:.9f}]",
         r3.s_low <= s3 <= r3.s_high and abs(r3.midpoint - s3) <= 1e-6 and r3.width <= 1e-6),
        (f"affinity runtime {t_aff:.2f}s", t_aff < 10),
        (f"two halves [{r2.s_low:.9f},{r2.s_high:.9f}]",
         r2.s_low <= 1 <= r2.s_high and abs(r2.midpoint - 1) <= 1e-6),
    ]
    verdict(9, checks, t0)


def test_criterion_10_variational_inequality():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    families = {"diag": diag(), "shear": shear_pair(), "identity": fam(np.eye(2), np.eye(2)),
                "scalar13": fam([[1.0]], [[3.0]]), "random": fam(*rng.normal(size=(2, 3, 3)))}
    measures = [Bernoulli((0.5, 0.5)), Bernoulli((0.1, 0.9)), Bernoulli((0.25, 0.75)),
                PeriodicOrbit("1"), PeriodicOrbit("2"), PeriodicOrbit("12"), PeriodicOrbit("112"),
                Mixture((0.5, 0.5), (PeriodicOrbit("1"), PeriodicOrbit("2"))),
                Mixture((0.3, 0.7), (PeriodicOrbit("12"), Bernoulli((0.5, 0.5))))]
    worst, cases = np.inf, 0
    for F in families.values():
        for q in (0.5, 1.0, 2.0, 3.0):
            e = pressure_bounds(F, q, 10)
            for mu in measures:
                worst = min(worst, variational_defect(F, mu, q, e))
                cases += 1
    checks = [(f"min(upper - qM - h) = {worst:.3e} over {cases} cases", worst >= -1e-9)]
    verdict(10, checks, t0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

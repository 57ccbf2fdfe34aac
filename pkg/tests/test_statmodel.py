import numpy as np
import pytest

from qmc.channels import Isometry, dilation
from qmc.errors import RetractionFailure
from qmc.ergodic import analyze
from qmc.gauge import split, tangent_inner
from qmc.linalg import dag
from qmc.qubit_example import (
    closed_form_mean,
    closed_form_qfi_rate,
    fixture_s,
    golden_tangent,
    isometry,
    measurement,
)
from qmc.statmodel import (
    asymptotic_variance,
    component_overlap,
    finite_window_variance,
    joint_overlap,
    output_component_vectors,
    qfi_curve,
    qfi_finite,
    qfi_rate,
    retract,
    stationary_mean,
    weak_qlan_report,
)

import oracles


def _tangent(rng, iso):
    """A raw direction with hermitian v^dag a, the retraction's domain."""
    raw = rng.standard_normal(iso.v.shape) + 1j * rng.standard_normal(iso.v.shape)
    vh_a = dag(iso.v) @ raw
    return raw - iso.v @ (0.5 * (vh_a - dag(vh_a)))


def test_joint_overlap_against_tensor_oracle():
    rng = np.random.default_rng(20)
    for _ in range(4):
        i1 = Isometry(oracles.random_isometry(rng, 2, 2), 2, 2)
        i2 = Isometry(oracles.random_isometry(rng, 2, 2), 2, 2)
        phi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        phi /= np.linalg.norm(phi)
        for n in (1, 3, 5):
            fast = joint_overlap(i1, i2, phi, n)
            ref = oracles.overlap_oracle(i1, i2, phi, n)
            assert abs(fast - ref) < 1e-12


def test_retract_gives_isometry_through_given_velocity():
    rng = np.random.default_rng(21)
    iso = isometry("m1", 0.3)
    x = _tangent(rng, iso)
    t = 1e-5
    vt = retract(iso, x, t)
    assert np.linalg.norm(dag(vt.v) @ vt.v - np.eye(2)) < 1e-12
    # first order in t the retraction moves along i x, up to a gauge piece
    # generated by the non-hermitian part (absent here by construction)
    vel = (retract(iso, x, t).v - retract(iso, x, -t).v) / (2 * t)
    herm = 0.5 * (dag(iso.v) @ x + dag(x) @ iso.v)
    expected = 1j * (x - iso.v @ (dag(iso.v) @ x - herm))
    assert np.linalg.norm(vel - expected) < 1e-6


def test_retract_rejects_non_tangent():
    rng = np.random.default_rng(22)
    iso = isometry("m1", 0.3)
    raw = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    raw += iso.v @ np.array([[0, 1], [-1, 0]])  # guarantee a skew component
    with pytest.raises(RetractionFailure):
        retract(iso, raw, 0.05)


def test_qfi_matches_fidelity_differences():
    """Independent route: QFI from the curvature of the overlap with the
    retracted chain, against the closed-form finite-n assembly."""
    rng = np.random.default_rng(23)
    iso = isometry("m1", 0.3)
    a = _tangent(rng, iso)
    phi = np.array([1.0, 1.0]) / np.sqrt(2)
    n = 4
    eps = 1e-4
    f_plus = abs(joint_overlap(iso, retract(iso, a, eps), phi, n)) ** 2
    f_minus = abs(joint_overlap(iso, retract(iso, a, -eps), phi, n)) ** 2
    oracle = 2.0 * (2.0 - f_plus - f_minus) / eps**2
    fast = qfi_finite(iso, a, phi, n)
    assert abs(fast - oracle) < 1e-4 * max(1.0, abs(oracle))


def test_qfi_rate_closed_form_model1():
    profile = analyze(isometry("m1", 0.3))
    a, a_id = golden_tangent("m1")
    rate = qfi_rate(profile, split(profile, a).a_id)
    assert abs(rate - 14.697802197802197) < 1e-9
    assert abs(rate - closed_form_qfi_rate(0.3)) < 1e-9
    # the raw and identifiable representatives give the same rate
    assert abs(qfi_rate(profile, a) - rate) < 1e-9


def test_qfi_curve_rate_and_pure_phase():
    iso = isometry("m1", 0.3)
    profile = analyze(iso)
    a, _ = golden_tangent("m1")
    phi = np.linalg.eigh(profile.rho_ss)[1][:, -1]
    rate = qfi_rate(profile, a)
    # at even n the cyclic transient cancels exactly; at odd n it leaves a
    # fixed offset, so F_n/n approaches the rate like 1/n from one parity
    evens = [50, 100, 400]
    for n, fn in zip(evens, qfi_curve(iso, a, phi, evens)):
        assert abs(fn / n - rate) < 1e-10 * rate, n
    odds = [25, 101, 401]
    offsets = [(fn - rate * n) for n, fn in zip(odds, qfi_curve(iso, a, phi, odds))]
    assert abs(offsets[0] - offsets[-1]) < 0.05 * abs(offsets[0])
    assert abs(offsets[0]) > 1.0
    # a global phase direction carries no information at any n
    f0 = qfi_curve(iso, 1j * iso.v, phi, evens + odds)
    assert np.max(np.abs(f0)) < 1e-9


def test_stationary_mean_matches_closed_forms():
    grids = {
        "m1": np.linspace(0.26, 0.49, 25),
        "m2": np.linspace(-0.55, 0.55, 25),
        "m3": np.linspace(0.05, 1.5, 25),
    }
    for model, grid in grids.items():
        meas, q = measurement(model)
        for theta in grid:
            profile = analyze(isometry(model, float(theta)))
            mean = stationary_mean(profile, q)
            assert abs(mean - closed_form_mean(model, float(theta))) < 1e-10


def test_variance_details_at_swap_point():
    profile = analyze(fixture_s())
    det = asymptotic_variance(profile, np.diag([1.0, 0.0]), details=True)
    assert abs(det["sigma2"]) < 1e-12
    assert abs(det["c0"] - 0.25) < 1e-12
    assert abs(det["tail"] - (-0.125)) < 1e-12
    assert abs(det["resolvent_cond"] - 2.0) < 1e-9
    assert det["lags"] == []
    # the exact finite window variance vanishes at even n as well
    assert abs(finite_window_variance(profile, np.diag([1.0, 0.0]), 64)) < 1e-12


def test_variance_window_converges_model1():
    profile = analyze(isometry("m1", 0.35))
    q = np.diag([1.0, 0.0])
    sigma2 = asymptotic_variance(profile, q)
    assert abs(sigma2 - 0.17869687499999998) < 1e-12
    # the covariance tail sums exactly for this model: the window is flat
    assert abs(finite_window_variance(profile, q, 64) - sigma2) < 1e-12
    assert abs(finite_window_variance(profile, q, 256) - sigma2) < 1e-12
    # same story on the second model, whose variance is exactly rational
    p2 = analyze(isometry("m2", 0.3))
    meas2, q2 = measurement("m2")
    assert abs(asymptotic_variance(p2, q2) - 0.1843) < 1e-12
    assert abs(stationary_mean(p2, q2) - 0.2436798876404741) < 1e-12


def test_two_block_chain_frozen_statistics():
    iso = isometry("m3", 0.1)
    power = Isometry(dilation(iso, 2), 2, 4)
    profile = analyze(power)
    assert profile.is_irreducible and profile.period == 1
    meas, q = measurement("m3", block=2)
    mean = stationary_mean(profile, q)
    assert abs(mean - 0.01837778335278868) < 1e-12
    sigma2 = asymptotic_variance(profile, q)
    assert abs(sigma2 - 0.018008984189377405) < 1e-12
    # the window estimate converges to the same number from below
    w1024 = finite_window_variance(profile, q, 1024)
    assert abs(w1024 - sigma2) < 1e-5
    # the same observable read as an overlapping time average on the base
    # chain has its own (larger) CLT variance; keep the two pinned apart
    base = analyze(iso)
    sigma2_overlap = asymptotic_variance(base, q)
    assert abs(sigma2_overlap - 0.034530473601172035) < 1e-12
    assert abs(stationary_mean(base, q) - mean) < 1e-12
    w_base = finite_window_variance(base, q, 1024)
    assert abs(w_base - sigma2_overlap) < 1e-4


def test_component_overlap_against_vector_enumeration():
    """The O(n d^4) channel iteration must agree with explicitly enumerated
    k^n component vectors."""
    profile = analyze(fixture_s())
    _, a_id = golden_tangent("m2")
    x = 0.4 * a_id
    y = -0.25 * a_id
    n = 4
    vx = retract(profile.iso, x, 1.0 / np.sqrt(n))
    vy = retract(profile.iso, y, 1.0 / np.sqrt(n))
    vecs_x, basis = output_component_vectors(vx, profile, n)
    vecs_y, _ = output_component_vectors(vy, profile, n)
    for a in range(2):
        for b in range(2):
            fast = component_overlap(vx, vy, profile, a, b, 0, 0, n)
            ref = np.vdot(vecs_y[(a, 0, b, 0)], vecs_x[(a, 0, b, 0)])
            assert abs(fast - ref) < 1e-12


def test_weak_qlan_overlap_structure():
    profile = analyze(isometry("m1", 0.3))
    a, _ = golden_tangent("m1")
    x = split(profile, a).a_id
    x = x / np.sqrt(tangent_inner(profile, x, x).real)
    rep_same = weak_qlan_report(profile, x, x, 256)
    assert abs(rep_same["prediction"] - 1.0) < 1e-12
    assert rep_same["error"] < 5e-3
    rep = weak_qlan_report(profile, x, -x, 4096)
    # limit is a genuine gaussian overlap, strictly inside the unit disc
    assert abs(rep["prediction"]) < 1.0
    assert rep["error"] < 5e-3
    assert abs(rep["corrected"] - rep["prediction"]) == rep["error"]

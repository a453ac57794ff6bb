# tests/test_gmc_simulator.py
import math

import numpy as np
import pytest

from app.exact_formulas import ThreePointInput, dozz, dozz_limit_kappa, fateev_litvinov, liouville_reflection
from app.exceptions import (
    CoincidentPoints,
    DomainViolation,
    GammaPole,
    MomentViolation,
    SeibergWarning,
    WindowViolation,
)
from app.gmc_simulator import (
    build_point_set,
    cell_weights,
    check_toda_window,
    default_c_grid,
    expected_masses,
    extended_integrand,
    gmc_masses,
    green_kernel,
    integrand_rates,
    level_seed,
    liouville_exponents,
    mc_extended_liouville,
    mc_liouville_dozz,
    mc_three_point,
    radial_exponents,
    radial_mass_parts,
    radial_weights,
    reference_mass,
    refinement_trend,
    remainder_terms,
    sample_field,
)
from app.root_system import TodaParams, WeightVector

SMALL = (256,)
GAMMA_TILDE = 1.4
LIOUVILLE_Q = GAMMA_TILDE / 2.0 + 2.0 / GAMMA_TILDE


@pytest.fixture(scope="module")
def small_set():
    return build_point_set(0, 10.0, SMALL)


@pytest.fixture
def toda_input():
    """Insertions below 2/gamma in every direction with <s, omega_i> > 0: all Seiberg bounds hold."""
    alpha = WeightVector.from_omegas(4.8, 4.8)
    return ThreePointInput(alpha, 4.8, alpha, TodaParams(0.4))


def empty_input(gamma):
    zero = WeightVector(0.0, 0.0)
    return ThreePointInput(zero, 0.0, zero, TodaParams(gamma))


# --- kernel and point sets -----------------------------------------------------------------

def test_green_kernel_values():
    assert green_kernel(2.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert green_kernel(0.1, 0.3j) == pytest.approx(-math.log(abs(0.1 - 0.3j)))
    assert green_kernel(3.0 + 1.0j, -0.5) == pytest.approx(green_kernel(-0.5, 3.0 + 1.0j))
    with pytest.raises(CoincidentPoints):
        green_kernel(0.25, 0.25)


def test_point_set_structure(small_set):
    assert small_set.size <= SMALL[0]
    assert len(set(small_set.points.tolist())) == small_set.size
    assert np.all(small_set.eps > 0.0)
    assert np.all(small_set.eps <= small_set.cell_radius)
    assert sorted(small_set.central[small_set.central >= 0].tolist()) == [0, 1]
    assert small_set.tail_share.sum() == pytest.approx(1.0)


def test_point_set_validation():
    with pytest.raises(DomainViolation):
        build_point_set(3)
    with pytest.raises(DomainViolation):
        build_point_set(0, R=1.2)
    with pytest.raises(DomainViolation):
        build_point_set(0, points_per_level=(8192,))


def test_sphere_volume():
    # |x|_+^-4 integrates to 2 pi over the plane
    weights = cell_weights(build_point_set(0), (0.0, 0.0, 0.0))
    assert weights.sum() == pytest.approx(2.0 * math.pi, rel=1e-2)


def test_insertion_weights_integrate_the_density():
    # |x|^-1 inside the unit disc plus |x|^-4 outside: 2 pi + pi
    weights = cell_weights(build_point_set(0), (1.0, 1.0, 0.0))
    assert weights.sum() == pytest.approx(3.0 * math.pi, rel=1e-2)


def test_covariance_matrix(small_set):
    C = small_set.covariance
    np.testing.assert_allclose(C, C.T)
    x = small_set.points
    assert C[0, 1] == pytest.approx(green_kernel(x[0], x[1]))
    lp = np.log(np.maximum(np.abs(x), 1.0))
    np.testing.assert_allclose(np.diag(C), -np.log(small_set.eps) + 2.0 * lp)


def test_cholesky_reconstructs_covariance(small_set):
    L = small_set.cholesky
    np.testing.assert_allclose(L @ L.T, small_set.covariance, atol=1e-8)


# --- field samples -------------------------------------------------------------------------

def test_samples_are_reproducible(small_set):
    first = sample_field(small_set, 5, 3).values
    np.testing.assert_array_equal(first, sample_field(small_set, 5, 3).values)
    assert not np.array_equal(first, sample_field(small_set, 6, 3).values)


def test_samples_do_not_depend_on_thread_count(small_set, monkeypatch):
    monkeypatch.setattr("app.gmc_simulator.TODA_CFT_THREADS", 1)
    serial = sample_field(small_set, 11, 600).values
    monkeypatch.setattr("app.gmc_simulator.TODA_CFT_THREADS", 4)
    np.testing.assert_array_equal(serial, sample_field(small_set, 11, 600).values)


def test_empirical_covariance():
    ps = build_point_set(0, 10.0, (64,))
    n = 20000
    X = sample_field(ps, 1, n).values
    C = ps.covariance
    for component in (0, 1):
        empirical = np.cov(X[:, :, component], rowvar=False)
        stderr = np.sqrt((np.outer(np.diag(C), np.diag(C)) + C ** 2) / n)
        assert np.all(np.abs(empirical - C) <= 5.0 * stderr)
    cross = np.mean(X[:, 0, 0] * X[:, 0, 1])
    assert abs(cross) <= 5.0 * C[0, 0] / math.sqrt(n)


# --- GMC masses ----------------------------------------------------------------------------

def test_mass_expectation(small_set):
    inp = empty_input(0.5)
    rho1, rho2 = gmc_masses(sample_field(small_set, 2, 4000), small_set, inp)
    expected = expected_masses(small_set, inp)
    for rho, mean in zip((rho1, rho2), expected):
        assert np.all(rho > 0.0)
        assert abs(rho.mean() - mean) <= 4.0 * rho.std(ddof=1) / math.sqrt(rho.size)


def test_masses_are_anticorrelated(small_set):
    rho1, rho2 = gmc_masses(sample_field(small_set, 3, 2000), small_set, empty_input(0.8))
    assert np.corrcoef(np.log(rho1), np.log(rho2))[0, 1] < 0.0


def test_small_coupling_limit(small_set):
    rho1, rho2 = gmc_masses(sample_field(small_set, 4, 50), small_set, empty_input(1e-3))
    volume = cell_weights(small_set, (0.0, 0.0, 0.0)).sum()
    np.testing.assert_allclose(rho1, volume, rtol=1e-2)
    np.testing.assert_allclose(rho2, volume, rtol=1e-2)


# --- Toda estimator ------------------------------------------------------------------------

def test_toda_window(generic_input, toda_input):
    check_toda_window(toda_input)
    with pytest.raises(MomentViolation):
        check_toda_window(generic_input)
    on_pole = generic_input.with_kappa(dozz_limit_kappa(generic_input))
    with pytest.raises(GammaPole):
        check_toda_window(on_pole)


def test_toda_estimate_is_reproducible(small_set, toda_input):
    first = mc_three_point(toda_input, small_set, 300, 17)
    second = mc_three_point(toda_input, small_set, 300, 17)
    assert first.value == second.value
    assert first.n_samples == 300
    assert first.masses.shape == (300, 2)
    assert first.stderr > 0.0


def test_toda_mu_scaling_is_exact_per_sample(small_set, toda_input):
    lam = 2.5
    base = mc_three_point(toda_input, small_set, 300, 21)
    scaled = mc_three_point(toda_input.with_params(TodaParams(0.4, (lam, lam))), small_set, 300, 21)
    s1, s2 = toda_input.s_exponents
    np.testing.assert_allclose(scaled.log_samples - base.log_samples, -(s1 + s2) * math.log(lam), atol=1e-10)


def test_level_seeds_differ():
    assert level_seed(5, 0) != level_seed(5, 1)
    assert level_seed(5, 1) == level_seed(5, 1)


# --- Liouville estimators ------------------------------------------------------------------

def test_liouville_window():
    ps = None
    with pytest.raises(MomentViolation):
        mc_liouville_dozz(0.2, 0.2, 0.2, GAMMA_TILDE, 1.0, ps, 10, 0)


def test_liouville_estimate_is_reproducible(small_set):
    first = mc_liouville_dozz(1.2, 1.2, 1.2, GAMMA_TILDE, 1.0, small_set, 300, 8)
    second = mc_liouville_dozz(1.2, 1.2, 1.2, GAMMA_TILDE, 1.0, small_set, 300, 8)
    assert first.value == second.value
    assert first.kind == "liouville"


def test_remainder_activation():
    a = (2.05, 1.0, 0.5)
    terms = remainder_terms(a, GAMMA_TILDE, 1.0)
    assert [t.subset for t in terms] == [(), (0,)]
    s = sum(a) - 2.0 * LIOUVILLE_Q
    assert terms[0].exponent == pytest.approx(s)
    assert terms[1].exponent == pytest.approx(s + 2.0 * (LIOUVILLE_Q - a[0]))
    assert terms[1].coefficient == pytest.approx(liouville_reflection(a[0], GAMMA_TILDE, 1.0).value)
    left, right = integrand_rates(a, GAMMA_TILDE, terms)
    assert left == pytest.approx(s + GAMMA_TILDE)
    assert right == pytest.approx(-terms[1].exponent)


def test_no_remainder_for_positive_s():
    assert remainder_terms((1.5, 1.5, 1.5), GAMMA_TILDE, 1.0) == []


def test_activation_threshold_is_rejected():
    # s = 0 exactly: e^{sc} neither decays nor is subtracted
    with pytest.raises(WindowViolation):
        integrand_rates((LIOUVILLE_Q, LIOUVILLE_Q, 0.0), GAMMA_TILDE)


def test_radial_exponents():
    a = (2.05, 1.0, 0.5)
    kappa = radial_exponents(a, GAMMA_TILDE)
    assert kappa == pytest.approx(tuple(2.0 * (LIOUVILLE_Q - ak) / GAMMA_TILDE for ak in a))
    with pytest.raises(GammaPole):
        radial_exponents((2.0 / GAMMA_TILDE, 1.0, 1.0), GAMMA_TILDE)
    with pytest.raises(DomainViolation):
        radial_exponents((LIOUVILLE_Q, 1.0, 1.0), GAMMA_TILDE)


def test_radial_weights_reproduce_the_mean_weights(small_set):
    # gt a_k < 2: E[4 pi / (gt^2 G_k)] = 4 pi / (gt^2 (kappa_k - 1)) turns radial scales into mean weights
    a = (1.2, 1.2, 1.2)
    base, radial = radial_weights(small_set, a, GAMMA_TILDE)
    kappa = np.array(radial_exponents(a, GAMMA_TILDE))
    mean = base.sum() + (4.0 * math.pi / GAMMA_TILDE ** 2 * radial.sum(axis=1) / (kappa - 1.0)).sum()
    assert mean == pytest.approx(cell_weights(small_set, liouville_exponents(a, GAMMA_TILDE)).sum(), rel=1e-2)
    assert np.all(base[small_set.central >= 0] == 0.0)
    assert np.count_nonzero(radial[0]) == np.count_nonzero(radial[1]) == 1


def test_c_grid_envelopes():
    a = (2.05, 1.0, 0.5)
    rho_ref = 10.0
    left, right = integrand_rates(a, GAMMA_TILDE)
    grid = default_c_grid(a, GAMMA_TILDE, 1.0, rho_ref)
    assert math.exp(left * grid[0]) * (1.0 + rho_ref) <= 1.0001e-8
    assert math.exp(-right * grid[-1]) <= 1.0001e-8


@pytest.mark.parametrize("a", [(2.05, 1.0, 0.5), (1.2, 1.2, 1.2), (1.5, 1.5, 1.5)])
def test_extended_integrand_decays_at_both_ends(small_set, a):
    parts = radial_mass_parts(sample_field(small_set, 12, 64), small_set, a, GAMMA_TILDE)
    grid = default_c_grid(a, GAMMA_TILDE, 1.0, reference_mass(small_set, a, GAMMA_TILDE))
    values = extended_integrand(parts, grid, a, GAMMA_TILDE, 1.0)
    assert np.all(np.isfinite(values))
    peak = np.max(np.abs(values))
    assert np.max(np.abs(values[:, 0])) <= 1e-5 * peak
    assert np.max(np.abs(values[:, -1])) <= 1e-5 * peak


def test_extended_estimate_does_not_depend_on_the_grid_start(small_set):
    a = (2.05, 1.0, 0.5)
    grid = default_c_grid(a, GAMMA_TILDE, 1.0, reference_mass(small_set, a, GAMMA_TILDE))
    h = grid[1] - grid[0]
    extra = int(10.0 / h)
    wider = np.concatenate([grid[0] - h * np.arange(extra, 0, -1), grid])
    base = mc_extended_liouville(*a, GAMMA_TILDE, 1.0, small_set, 200, 5, c_grid=grid)
    moved = mc_extended_liouville(*a, GAMMA_TILDE, 1.0, small_set, 200, 5, c_grid=wider)
    assert np.isfinite(base.value)
    assert base.tail_bound < 1e-5
    assert abs(moved.value - base.value) <= 2.0 * base.tail_bound + 1e-12
    assert moved.tail_bound <= base.tail_bound


def test_extended_reports_reflection_ratios(small_set):
    run = mc_extended_liouville(2.05, 1.0, 0.5, GAMMA_TILDE, 1.0, small_set, 200, 7)
    ratios = run.diagnostics["reflection_ratio"]
    assert list(ratios) == ["a1"]
    assert 0.8 < ratios["a1"] < 1.25
    assert run.to_record()["reflection_ratio"] == ratios


def test_extended_window(small_set):
    with pytest.raises(WindowViolation):
        mc_extended_liouville(LIOUVILLE_Q + 0.1, 0.5, 0.5, GAMMA_TILDE, 1.0, small_set, 10, 0)
    with pytest.raises(WindowViolation):
        mc_extended_liouville(0.3, 0.3, 0.3, GAMMA_TILDE, 1.0, small_set, 10, 0)


def test_radial_plain_estimator_needs_the_seiberg_bound(small_set):
    with pytest.warns(SeibergWarning), pytest.raises(DomainViolation):
        mc_liouville_dozz(LIOUVILLE_Q + 0.05, 1.5, 1.5, GAMMA_TILDE, 1.0, small_set, 10, 0, radial=True)


def test_extended_matches_plain_estimator_in_plain_window(small_set):
    # same field and radial draws; the extended estimator averages the radial factors out
    a = (1.2, 1.2, 1.2)
    plain = mc_liouville_dozz(*a, GAMMA_TILDE, 1.0, small_set, 400, 31, radial=True)
    extended = mc_extended_liouville(*a, GAMMA_TILDE, 1.0, small_set, 400, 31)
    np.testing.assert_allclose(extended.masses, plain.masses)
    assert extended.diagnostics == {}
    assert abs(extended.value - plain.value) <= 5.0 * plain.stderr


# --- Toda estimator at gamma = 1.1 -----------------------------------------------------------

@pytest.fixture
def strong_toda_input():
    """Inside the moment window at gamma = 1.1; the insertion densities are not integrable there."""
    alpha = WeightVector.from_omegas(2.4, 2.4)
    return ThreePointInput(alpha, 2.4, alpha, TodaParams(1.1))


def test_strong_coupling_window(strong_toda_input):
    check_toda_window(strong_toda_input)
    s1, s2 = strong_toda_input.s_exponents
    assert s1 < 0.0 < s2


def test_strong_coupling_mu_scaling_is_exact_per_sample(small_set, strong_toda_input):
    lam = 1.7
    base = mc_three_point(strong_toda_input, small_set, 200, 41)
    scaled = mc_three_point(strong_toda_input.with_params(TodaParams(1.1, (lam, lam))), small_set, 200, 41)
    s1, s2 = strong_toda_input.s_exponents
    np.testing.assert_allclose(scaled.log_samples - base.log_samples, -(s1 + s2) * math.log(lam), atol=1e-10)
    np.testing.assert_array_equal(scaled.masses, base.masses)


# --- acceptance runs -----------------------------------------------------------------------

@pytest.mark.slow
def test_toda_estimate_converges_to_exact_formula(toda_input):
    exact = fateev_litvinov(toda_input).value
    runs = refinement_trend(toda_input, 20000, 2024)
    errors = [abs(run.value / exact - 1.0) for run in runs]
    assert errors[-1] <= 0.15 or errors[-1] < errors[0]


@pytest.mark.slow
def test_liouville_estimate_matches_dozz():
    a = tuple(c * LIOUVILLE_Q / 2.0 for c in (1.0, 1.0, 1.1))
    run = mc_liouville_dozz(*a, GAMMA_TILDE, 1.0, build_point_set(2), 20000, 2024)
    exact = dozz(*a, GAMMA_TILDE, 1.0).value
    assert abs(run.value / exact - 1.0) <= 0.10


@pytest.mark.slow
def test_strong_coupling_estimate_stabilizes_under_refinement(strong_toda_input):
    exact = fateev_litvinov(strong_toda_input).value
    runs = refinement_trend(strong_toda_input, 20000, 2026)
    errors = [abs(run.value / exact - 1.0) for run in runs]
    noise = 3.0 * runs[-1].stderr / abs(exact)
    assert errors[-1] <= 0.15 or errors[-1] <= errors[0] + noise


@pytest.mark.slow
def test_extended_estimate_matches_dozz_past_the_plain_window():
    a = (2.05, 1.0, 0.5)
    run = mc_extended_liouville(*a, GAMMA_TILDE, 1.0, build_point_set(2), 20000, 2024)
    exact = dozz(*a, GAMMA_TILDE, 1.0).value
    assert abs(run.value - exact) <= max(3.0 * run.stderr, 0.15 * abs(exact))

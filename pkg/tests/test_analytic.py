import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.stats import entropy as shannon

from mrlab.algebra import InclusionSpec, State, embed, random_state, restrict, tensor_split_pair
from mrlab.analytic import (
    DomainError,
    FilterSpec,
    GammaFamily,
    check_vanishing,
    filter_bounds,
    filter_operator,
    filter_operator_quadrature,
    filter_vector,
    filtering_entropy_curve,
    first_law_slope,
    gamma_abstract,
    gamma_boundary_cocycle,
    gamma_derivative_at_zero,
    gamma_top_state_check,
    gamma_vector,
    hirschman_check,
    hirschman_kernels,
    perturbation_family,
    xi_g,
    xi_gap,
    xi_tau_infimum,
    xi_vector,
)
from mrlab.measures import LpParams, entropy_difference, fidelity, lp_norm, relative_entropy
from mrlab.recovery import PreconditionError, QuadratureSpec, harmonic_density, petz_predual, recovery_report
from mrlab.standard_form import HSVector, cone_rep
from conftest import random_matrix, seeds

full_specs = st.sampled_from(["2x2", "2x3", "1x2,2x1"]).map(InclusionSpec.parse)


def strip_grid():
    xs = np.linspace(0, 0.5, 6)
    ys = np.linspace(-2, 2, 9)
    return (xs[:, None] + 1j * ys[None, :]).ravel()


# -- Γ -----------------------------------------------------------------------------------------


@given(full_specs, seeds)
def test_gamma_at_zero_is_cone_vector(spec, seed):
    rng = np.random.default_rng(seed)
    rank = int(rng.integers(1, spec.n + 1))
    rho, sigma = random_state(spec.n, rank=rank, seed=rng), random_state(spec.n, seed=rng)
    fam = GammaFamily(spec, rho, sigma)
    assert np.abs(gamma_vector(fam, 0).matrix - cone_rep(rho).matrix).max() <= 1e-12


@given(full_specs, seeds, st.floats(-3, 3))
def test_gamma_on_imaginary_axis_has_unit_norm(spec, seed, t):
    rng = np.random.default_rng(seed)
    fam = GammaFamily(spec, random_state(spec.n, seed=rng), random_state(spec.n, seed=rng))
    assert fam(1j * t).norm() == pytest.approx(1.0, abs=1e-12)


@given(full_specs, seeds)
def test_gamma_is_constant_for_split_pairs(spec, seed):
    rho, sigma = tensor_split_pair(spec, seed)
    fam = GammaFamily(spec, rho, sigma)
    vals = fam.values(strip_grid())
    assert np.abs(vals - rho.sqrt()[None]).max() <= 1e-10


@given(full_specs, seeds)
def test_gamma_closed_form_matches_abstract_composition(spec, seed):
    rng = np.random.default_rng(seed)
    fam = GammaFamily(spec, random_state(spec.n, seed=rng), random_state(spec.n, seed=rng))
    for z in (0.2 + 0.7j, 0.5 - 1.1j, 0.05j, -0.3 + 0.2j, 0.9):
        assert np.abs(gamma_abstract(fam, z).matrix - fam(z).matrix).max() <= 1e-10


@given(full_specs, seeds, st.floats(-3, 3))
def test_gamma_boundary_cocycle_form(spec, seed, t):
    rng = np.random.default_rng(seed)
    fam = GammaFamily(spec, random_state(spec.n, seed=rng), random_state(spec.n, seed=rng))
    assert np.abs(gamma_boundary_cocycle(fam, t).matrix - fam(1j * t).matrix).max() <= 1e-10


@given(full_specs, seeds)
def test_gamma_bounded_and_maximal_on_boundary(spec, seed):
    rng = np.random.default_rng(seed)
    rank = int(rng.integers(1, spec.n + 1))
    fam = GammaFamily(spec, random_state(spec.n, rank=rank, seed=rng), random_state(spec.n, seed=rng))
    xs = np.linspace(0, 0.5, 11)
    ys = np.linspace(-2, 2, 9)
    norms = np.linalg.norm(fam.values((xs[:, None] + 1j * ys[None, :]).ravel()), axis=(1, 2))
    norms = norms.reshape(xs.size, ys.size)
    assert norms.max() <= 1 + 1e-10
    assert norms[1:-1].max() <= max(norms[0].max(), norms[-1].max()) + 1e-10


def test_gamma_domain_for_rank_deficient_input(spec22):
    fam = GammaFamily(spec22, random_state(4, rank=2, seed=1), random_state(4, seed=2))
    with pytest.raises(DomainError):
        fam(0.6)
    with pytest.raises(DomainError):
        fam(-0.1)
    filtered = GammaFamily(spec22, random_state(4, rank=2, seed=1), random_state(4, seed=2), filtered=True)
    filtered(-0.2)
    full = GammaFamily(spec22, random_state(4, seed=1), random_state(4, seed=2))
    assert np.isfinite(full(0.8).matrix).all()


def test_gamma_of_non_cone_vector(spec22, rng):
    rho, sigma = random_state(4, seed=rng), random_state(4, seed=rng)
    u, _ = np.linalg.qr(random_matrix(4, rng))
    vec = HSVector(rho.sqrt() @ u)
    fam = GammaFamily(spec22, None, sigma, vector=vec)
    base = GammaFamily(spec22, rho, sigma)
    assert np.abs(fam(0).matrix - vec.matrix).max() <= 1e-12
    assert np.abs(fam(0.3 + 0.4j).matrix - base(0.3 + 0.4j).matrix @ u).max() <= 1e-11
    assert np.abs(gamma_abstract(fam, 0.3j).matrix - fam(0.3j).matrix).max() <= 1e-10


def test_top_state_identity_for_unit_observable(spec22):
    fam = GammaFamily(spec22, random_state(4, seed=3), random_state(4, seed=4))
    rep = gamma_top_state_check(fam, 0.4, samples=1)
    assert rep.max_abs_diff <= 1e-12


@given(full_specs, seeds, st.floats(-2, 2))
def test_top_state_equality_for_full_rank(spec, seed, t):
    rng = np.random.default_rng(seed)
    fam = GammaFamily(spec, random_state(spec.n, seed=rng), random_state(spec.n, seed=rng))
    assert gamma_top_state_check(fam, t).max_abs_diff <= 1e-10


def test_top_state_inequality_for_rank_deficient(spec22):
    fam = GammaFamily(spec22, random_state(4, rank=1, seed=5), random_state(4, seed=6))
    rep = gamma_top_state_check(fam, 0.25, samples=32)
    assert rep.ok
    assert rep.max_abs_diff > 1e-6


@given(st.sampled_from(["2x2", "2x3"]).map(InclusionSpec.parse), seeds, st.floats(-2, 2), st.booleans())
def test_top_norm_bounded_by_rotated_fidelity(spec, seed, t, full):
    rng = np.random.default_rng(seed)
    rank = spec.n if full else int(rng.integers(1, spec.n))
    rho, sigma = random_state(spec.n, rank=rank, seed=rng), random_state(spec.n, seed=rng)
    fam = GammaFamily(spec, rho, sigma)
    top = lp_norm(fam(0.5 + 1j * t), LpParams(1.0, rho))
    rec = petz_predual(spec, sigma, restrict(spec, rho).matrix, t)
    assert top <= fidelity(rho, State(rec, validate=False)) + 1e-9


def test_derivative_vanishes_for_equal_states(spec22):
    rho = random_state(4, seed=7)
    res = gamma_derivative_at_zero(GammaFamily(spec22, rho, rho))
    assert abs(res.value) <= 1e-8 and res.ok


def test_derivative_on_product_qubit_pair(spec22):
    rho = State(np.kron(np.diag([0.7, 0.3]), np.diag([0.6, 0.4])))
    sigma = State(np.eye(4) / 4)
    delta = np.log(2) - shannon([0.6, 0.4])
    assert entropy_difference(spec22, rho, sigma) == pytest.approx(delta, abs=1e-14)
    res = gamma_derivative_at_zero(GammaFamily(spec22, rho, sigma))
    assert res.value == pytest.approx(-2 * delta, abs=1e-6)
    assert res.ok


@pytest.mark.parametrize("seed", range(5))
def test_derivative_random_full_rank(spec22, seed):
    rng = np.random.default_rng(seed)
    fam = GammaFamily(spec22, random_state(4, seed=rng), random_state(4, seed=rng))
    res = gamma_derivative_at_zero(fam)
    assert res.residual <= 1e-6 and res.ok


def test_derivative_refuses_rank_deficient(spec22):
    fam = GammaFamily(spec22, random_state(4, rank=2, seed=1), random_state(4, seed=2))
    with pytest.raises(DomainError):
        gamma_derivative_at_zero(fam)


# -- Hirschman --------------------------------------------------------------------------------


@pytest.mark.parametrize("theta", [0.1, 0.25, 0.4])
def test_hirschman_kernels_normalized(theta):
    a = integrate.quad(lambda t: hirschman_kernels(theta, t)[0], -np.inf, np.inf, epsabs=1e-13, limit=400)[0]
    b = integrate.quad(lambda t: hirschman_kernels(theta, t)[1], -np.inf, np.inf, epsabs=1e-13, limit=400)[0]
    assert a == pytest.approx(1.0, abs=1e-10)
    assert b == pytest.approx(1.0, abs=1e-10)


def test_hirschman_kernels_match_formula_and_limit():
    t = np.linspace(-2, 2, 41)
    th = 0.15
    a, b = hirschman_kernels(th, t)
    ch, c = np.cosh(2 * np.pi * t), np.cos(2 * np.pi * th)
    assert np.allclose(a, np.sin(2 * np.pi * th) / ((1 - 2 * th) * (ch - c)), rtol=1e-13)
    assert np.allclose(b, np.sin(2 * np.pi * th) / (2 * th * (ch + c)), rtol=1e-13)
    assert np.abs(hirschman_kernels(1e-6, t)[1] - harmonic_density(t)).max() <= 1e-5
    a0, b0 = hirschman_kernels(0.25, 0.0)
    assert a0 == pytest.approx(2.0, abs=1e-15) and b0 == pytest.approx(2.0, abs=1e-15)
    assert np.isfinite(hirschman_kernels(0.2, 400.0)).all()


@pytest.mark.parametrize("theta", [0.0, 0.5, -0.1])
def test_hirschman_kernels_reject_endpoints(theta):
    with pytest.raises(ValueError):
        hirschman_kernels(theta, 0.0)


def test_hirschman_trivial_for_equal_states(spec22):
    rho = random_state(4, seed=9)
    rep = hirschman_check(GammaFamily(spec22, rho, rho), 0.25)
    assert abs(rep.lhs) <= 1e-12 and abs(rep.rhs) <= 1e-12
    assert np.allclose(rep.kernel_mass, (1, 1), atol=1e-12)


@pytest.mark.parametrize("p0,p1", [(1.0, 2.0), (2.0, 1.0), (1.5, 1.25)])
@pytest.mark.parametrize("seed", range(3))
def test_hirschman_gap_nonnegative(spec22, seed, p0, p1):
    rng = np.random.default_rng(seed)
    fam = GammaFamily(spec22, random_state(4, seed=rng), random_state(4, seed=rng))
    for theta in (0.1, 0.25, 0.4):
        assert hirschman_check(fam, theta, p0, p1).gap >= -1e-6


def test_hirschman_small_theta_reduces_to_strengthened_monotonicity(spec22):
    rho, sigma = random_state(4, seed=1), random_state(4, seed=2)
    fam = GammaFamily(spec22, rho, sigma)
    rep = recovery_report(spec22, rho, sigma, QuadratureSpec(321, scheme="trapezoid"))
    theta = 1e-4
    # ‖Γ(it)‖₂ = 1, so the right side is 2θ ∫β_θ ln F and β_θ → p; the narrow
    # α_θ peak multiplies ln 1 and need not be resolved
    t = np.linspace(-8, 8, 3201)
    h = hirschman_check(fam, theta, 2.0, 1.0, quad=(t, np.full(t.size, t[1] - t[0])))
    assert h.rhs / (2 * theta) == pytest.approx(rep.log_fidelity_integral, abs=1e-6)
    assert h.lhs / theta == pytest.approx(-rep.delta_s, abs=1e-3)
    assert -rep.delta_s <= 2 * rep.log_fidelity_integral


def test_hirschman_rejects_bad_exponents(spec22):
    fam = GammaFamily(spec22, random_state(4, seed=1), random_state(4, seed=2))
    with pytest.raises(ValueError):
        hirschman_check(fam, 0.2, 0.5, 1.0)


# -- first law -----------------------------------------------------------------------------


def test_first_law_constant_family():
    psi = cone_rep(random_state(3, seed=1))
    res = first_law_slope(psi, lambda lam: psi)
    assert np.abs(res.petz_slopes).max() <= 1e-9 and np.abs(res.lp_slopes).max() <= 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_first_law_linear_perturbation(seed):
    rng = np.random.default_rng(seed)
    psi = cone_rep(random_state(4, seed=rng))
    fam = perturbation_family(psi, random_matrix(4, rng))
    res = first_law_slope(psi, fam)
    assert res.monotone
    at = int(np.argmin(np.abs(res.lambdas - 1e-4)))
    assert max(abs(res.petz_slopes[at]), abs(res.lp_slopes[at])) <= 1e-2
    # O(λ) decay of the slopes
    assert res.final <= 1e-3 * max(abs(res.petz_slopes[0]), abs(res.lp_slopes[0])) * 10


def test_first_law_custom_schedule():
    rng = np.random.default_rng(3)
    psi = cone_rep(random_state(3, seed=rng))
    fam = perturbation_family(psi, random_matrix(3, rng))
    res = first_law_slope(psi, fam, exponent_schedule=(lambda lam: 0.9, lambda lam: 1 + lam))
    assert res.monotone
    with pytest.raises(ValueError):
        first_law_slope(psi, fam, exponent_schedule=(lambda lam: 1.0, lambda lam: 1.5))


def test_first_law_refuses_square_root_perturbation():
    rng = np.random.default_rng(4)
    psi = cone_rep(random_state(3, seed=rng))
    fam = perturbation_family(psi, random_matrix(3, rng), power=0.5)
    with pytest.raises(PreconditionError, match="does not vanish"):
        first_law_slope(psi, fam)
    with pytest.raises(PreconditionError):
        check_vanishing(psi, fam)


# -- filtering ------------------------------------------------------------------------------


def test_filter_spec_norm_ordering():
    for fam in ("gaussian", "compact_bump"):
        f = FilterSpec(fam, 1.0, 0.8)
        assert f.l1_norm >= f.sup_norm >= float(f.profile(0.0)) - 1e-15
        p = np.linspace(-3, 3, 61)
        assert np.all(f.profile(p) >= 0)
    with pytest.raises(ValueError):
        FilterSpec("box")
    with pytest.raises(ValueError):
        FilterSpec("gaussian", 0.0)


@pytest.mark.parametrize("family", ["gaussian", "compact_bump"])
def test_filter_time_profile_inverts_fourier_side(family):
    f = FilterSpec(family, 1.0)
    for p in (0.0, 0.3, 0.8):
        # f̃(p) = ∫ e^{-itp} f(t) dt; f is real and even
        val = 2 * integrate.quad(lambda t: f.time(t) * np.cos(t * p), 0, 400, limit=2000)[0]
        assert val == pytest.approx(float(f.profile(p)), abs=1e-7)


def test_gaussian_shifted_norm_closed_form():
    f = FilterSpec("gaussian", 3.0)
    s = 1.5
    g = lambda t: abs(np.exp(-0.5 * (t + 1j * s) ** 2)) / np.sqrt(2 * np.pi)
    val = integrate.quad(g, -np.inf, np.inf, epsabs=1e-13)[0]
    assert f.shifted_l1_norm() == pytest.approx(val, rel=1e-12)


def test_bump_l1_norm_against_oscillatory_quadrature():
    bump = lambda p: np.exp(1 - 1 / (1 - p * p)) if p < 1 else 0.0
    f = lambda t: integrate.quad(bump, 0, 1, weight="cos", wvar=t)[0] / np.pi

    def piece(a, b, h):
        ts = np.linspace(a, b, int(round((b - a) / h)) + 1)
        return integrate.trapezoid(np.abs([f(t) for t in ts]), ts)

    oracle = 2 * (piece(0, 30, 0.004) + piece(30, 300, 0.05))
    assert FilterSpec("compact_bump", 1.0).l1_norm == pytest.approx(oracle, abs=1e-6)
    assert FilterSpec("compact_bump", 1.0).l1_norm == pytest.approx(1.2286259955586, abs=1e-9)


def test_large_cutoff_gaussian_leaves_vector_unchanged():
    rho, sigma = random_state(4, seed=1), random_state(4, seed=2)
    vec, _ = filter_vector(rho, sigma, FilterSpec("gaussian", 1e6))
    assert np.linalg.norm(vec.matrix - rho.sqrt()) <= 1e-8


@pytest.mark.parametrize("family", ["gaussian", "compact_bump"])
def test_filtering_cone_vector_against_itself(family):
    rho = random_state(4, seed=3)
    filt = FilterSpec(family, 0.7, 0.9)
    vec, _ = filter_vector(rho, rho, filt)
    assert np.abs(vec.matrix - 0.9 * rho.sqrt()).max() <= 1e-13


@settings(max_examples=15)
@given(seeds, st.sampled_from([0.5, 1.0, 2.0, 4.0]), st.sampled_from(["gaussian", "compact_bump"]))
def test_filter_bounds(seed, P, family):
    rng = np.random.default_rng(seed)
    rho, sigma = random_state(4, seed=rng), random_state(4, seed=rng)
    filt = FilterSpec(family, P)
    b = filter_bounds(rho, sigma, filt)
    assert b.identity_residual <= 1e-12
    assert b.slack >= -1e-8
    vec, _ = filter_vector(rho, sigma, filt)
    assert vec.norm() <= filt.sup_norm + 1e-12


def test_filter_operator_by_cocycle_quadrature():
    rho, sigma = random_state(3, seed=4), random_state(3, seed=5)
    filt = FilterSpec("gaussian", 2.0)
    a = filter_operator(rho, sigma, filt)
    aq = filter_operator_quadrature(rho, sigma, filt)
    assert np.abs(a - aq).max() <= 1e-10
    with pytest.raises(ValueError):
        filter_operator_quadrature(rho, sigma, FilterSpec("compact_bump", 2.0))


def test_filter_normalization_retunes_scale():
    rho, sigma = random_state(4, seed=6), random_state(4, seed=7)
    vec, used = filter_vector(rho, sigma, FilterSpec("gaussian", 1.5), normalize=True)
    assert vec.norm() == pytest.approx(1.0, abs=1e-14)
    assert used.scale > 1.0


def test_filtering_curve_equal_states():
    rho = random_state(4, seed=8)
    curve = filtering_entropy_curve(rho, rho, "gaussian", (1.0, 10.0, 100.0))
    assert np.abs(curve.entropies).max() <= 1e-12


def test_gaussian_filtering_converges_on_qubit_pair():
    rho, sigma = random_state(4, seed=11), random_state(4, seed=12)
    curve = filtering_entropy_curve(rho, sigma, "gaussian", (1e1, 1e2, 1e3))
    assert abs(curve.final_offset) <= 1e-4
    assert curve.target == pytest.approx(relative_entropy(rho, sigma))


def test_compact_bump_offset_within_bound():
    rho, sigma = random_state(4, seed=13), random_state(4, seed=14)
    curve = filtering_entropy_curve(rho, sigma, "compact_bump", (1e2, 1e3, 1e4))
    upper = 2 * np.log(curve.l1_norm)
    # the finite-P offset approaches 0 from below (about -2e-7 at P = 1e4)
    assert -1e-6 <= curve.final_offset <= upper + 1e-6


# -- Ξ ----------------------------------------------------------------------------------------


def test_xi_at_zero_is_cone_vector(spec22):
    rho, sigma, tau = (random_state(4, seed=s) for s in (1, 2, 3))
    assert np.abs(xi_vector(spec22, rho, sigma, tau, 0).matrix - rho.sqrt()).max() <= 1e-13


def test_xi_with_tau_equal_rho(spec22):
    rho, sigma = random_state(4, seed=4), random_state(4, seed=5)
    th = 0.2
    rb, sb = restrict(spec22, rho), restrict(spec22, sigma)
    direct = embed(spec22, rb.power(th) @ sb.power(-th)) @ sigma.power(th) @ rho.power(0.5 - th)
    assert xi_vector(spec22, rho, sigma, rho, th).norm() == pytest.approx(np.linalg.norm(direct), rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_xi_tau_infimum_refines_toward_g(spec22, seed):
    rng = np.random.default_rng(seed)
    rho, sigma = random_state(4, seed=rng), random_state(4, seed=rng)
    mins = xi_tau_infimum(spec22, rho, sigma, 0.1, levels=7)
    g = xi_g(spec22, rho, sigma, 0.1)
    assert np.all(np.diff(mins) <= 0)
    assert mins[-1] >= g - 1e-6
    assert mins[-1] - g <= 1e-2 * (mins[0] - g) + 1e-6


def test_xi_gap_report(spec22):
    rho, sigma = random_state(4, seed=1), random_state(4, seed=2)
    rep = xi_gap(spec22, rho, sigma)
    assert np.all(np.isfinite(rep.residuals))
    assert rep.delta_s == pytest.approx(entropy_difference(spec22, rho, sigma))
    assert np.all(np.diff(np.abs(rep.residuals)) < 0)

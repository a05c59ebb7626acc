"""Model thermodynamics: closed forms, convexity, Legendre duality."""

import numpy as np
import pytest
from scipy import optimize

from mfspin import models as M
from mfspin.errors import BoundaryMagnetization, OutOfSimplex

RNG = np.random.default_rng(20240911)

ALL_MODELS = [M.potts(3), M.potts(10), M.cubic(2), M.cubic(4), M.nematic(3),
              M.nematic(5)]


# ---------------------------------------------------------------------------
# ModelSpec constants and magnetization intervals
# ---------------------------------------------------------------------------

def test_model_constants():
    p = M.potts(7)
    assert p.n == 6 and p.kappa == pytest.approx(6 / 7)
    assert p.omega_norm_sq == pytest.approx(7 / 6)
    c = M.cubic(4)
    assert c.n == 4 and c.kappa == 1.0 and c.omega_norm_sq == 1.0
    n = M.nematic(5)
    assert n.n == 10 and n.kappa == pytest.approx(4 / 5)
    assert n.omega_norm_sq == pytest.approx(5 / 4)


def test_delta_factor_formulas():
    assert M.potts(3).delta_factor == pytest.approx((3 - 1) ** 2 / (2 * 3))
    assert M.cubic(4).delta_factor == pytest.approx(4 / 2)
    assert M.nematic(6).delta_factor == pytest.approx((6 - 1) ** 2 / 4)


def test_magnetization_interval_checked():
    p = M.potts(4)
    lo, hi = p.m_bounds()
    assert lo == pytest.approx(-0.25) and hi == pytest.approx(0.75)
    with pytest.raises(OutOfSimplex):
        p.check_magnetization(hi + 1e-6)
    with pytest.raises(OutOfSimplex):
        M.nematic(4).check_magnetization(-0.5)
    assert M.cubic(3).check_magnetization(0.99) == 0.99


def test_bad_parameters_rejected():
    with pytest.raises(ValueError):
        M.potts(1)
    with pytest.raises(ValueError):
        M.nematic(2)
    with pytest.raises(ValueError):
        M.ModelSpec("heisenberg", 3)


# ---------------------------------------------------------------------------
# Potts closed forms
# ---------------------------------------------------------------------------

def test_potts_phi_symmetric_point():
    assert M.potts_phi(3, 2.73, 0.0) == pytest.approx(-2.73 / 6 - np.log(3), abs=1e-12)


def test_potts_phi_degenerate_at_transition():
    J = 4 * np.log(2)
    assert abs(M.potts_phi(3, J, 1 / 3) - M.potts_phi(3, J, 0.0)) < 1e-9


def test_potts_phi_matches_direct_simplex_evaluation():
    # q=10, J=4.5, m=0.7: occupations (0.8, 0.0222..., x9)
    q, J, m = 10, 4.5, 0.7
    x = np.array([1 / q + m] + [1 / q - m / (q - 1)] * (q - 1))
    assert x[0] == pytest.approx(0.8)
    direct = float(np.sum(-J / 2 * x ** 2 + x * np.log(x)))
    assert M.potts_phi(q, J, m) == pytest.approx(direct, abs=1e-12)


def test_potts_phi_out_of_simplex():
    with pytest.raises(OutOfSimplex):
        M.potts_phi(3, 1.0, 0.7)  # x_k = 1/3 - 0.35 < 0


def test_potts_g_prime_zero_at_origin():
    for q in (3, 5, 10):
        assert M.potts_g_prime(q, 0.0) == 0.0


def test_potts_g_prime_is_mjpotts_rhs():
    # rhs(m) = ((q-1)/q)(e^{Jqm/(q-1)}-1)/(e^{Jqm/(q-1)}+q-1)
    q, J = 3, 2.9
    for m in (0.05, 0.2, 0.5):
        t = np.exp(J * m * q / (q - 1))
        expect = (q - 1) / q * (t - 1) / (t + q - 1)
        assert M.potts_g_prime(q, J * m) == pytest.approx(expect, rel=1e-13)


def test_potts_g_prime_large_field_saturates():
    assert M.potts_g_prime(3, 500.0) == pytest.approx(2 / 3, abs=1e-12)
    assert M.potts_g_prime(3, -500.0) == pytest.approx(-1 / 3, abs=1e-12)


# ---------------------------------------------------------------------------
# cubic closed forms
# ---------------------------------------------------------------------------

def test_cubic_g_at_origin():
    # r=4: g(0) = -log 8 + log 4 = -log 2
    assert M.cubic_g(4, 0.0) == pytest.approx(-np.log(2), abs=1e-14)
    assert M.cubic_g_prime(4, 0.0) == 0.0


def test_cubic_g_prime_inflection():
    """g' switches convex->concave where (r-1)cosh h = (r-1)^2 - 2.

    The location is derived here by bisection on centered differences of g''
    (independent of the closed-form third derivative also exposed).
    """
    r = 4
    eps = 1e-5

    def g3_fd(h):
        return (M.cubic_g_second(r, h + eps) - M.cubic_g_second(r, h - eps)) / (2 * eps)

    assert g3_fd(1.0) > 0 and g3_fd(2.0) < 0
    h_star = optimize.brentq(g3_fd, 1.0, 2.0, xtol=1e-10)
    expect = np.arccosh(((r - 1) ** 2 - 2) / (r - 1))
    assert h_star == pytest.approx(expect, abs=1e-6)
    assert M.cubic_g_third(r, h_star) == pytest.approx(0.0, abs=1e-9)


def test_cubic_g_large_field_stable():
    assert M.cubic_g_prime(4, 200.0) == pytest.approx(1.0, abs=1e-12)
    assert M.cubic_g(4, 100.0) == pytest.approx(100.0 - np.log(16), abs=1e-10)


# ---------------------------------------------------------------------------
# Ising block
# ---------------------------------------------------------------------------

def test_ising_theta_symmetric_value():
    for J in (0.7, 3.3, 11.0):
        assert M.ising_theta(J, 0.0) == pytest.approx(-np.log(2), abs=1e-14)


def test_ising_theta_even_in_mu():
    for _ in range(10):
        J = 5 * RNG.random()
        mu = 2 * RNG.random() - 1
        assert M.ising_theta(J, mu) == pytest.approx(M.ising_theta(J, -mu), abs=1e-14)


def test_ising_theta_minimizer_is_tanh_fixed_point():
    J = 4.0
    rho = M.ising_rho(J)
    assert rho == pytest.approx(0.9575, abs=1e-4)
    assert rho == pytest.approx(np.tanh(J * rho / 2), abs=1e-12)
    # direct minimization of Theta agrees
    res = optimize.minimize_scalar(lambda mu: M.ising_theta(J, mu),
                                   bounds=(0, 1), method="bounded",
                                   options={"xatol": 1e-12})
    assert res.x == pytest.approx(rho, abs=1e-8)


def test_ising_rho_subcritical():
    assert M.ising_rho(2.0) == 0.0
    assert M.ising_rho(1.5) == 0.0
    rho = M.ising_rho(4.0)
    assert 4.0 * (1 - rho ** 2) < 2.0


# ---------------------------------------------------------------------------
# nematic quadrature g
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("N", [3, 4, 7])
def test_nematic_g_normalization(N):
    assert M.nematic_g(N, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert M.nematic_g_prime(N, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_nematic_large_field_asymptotics():
    # <x^2> = g'(h) + 1/N approaches 1 like O(1/h)
    h = 50.0
    x2 = M.nematic_g_prime(3, h) + 1 / 3
    assert 0.0 < 1.0 - x2 < 1.5 / h


def test_nematic_large_N_fixed_point():
    """lambda = g'(J N lambda) at J=3 approaches (1+sqrt(1-2/3))/2.

    The scaled cumulant limit g_inf(h) = max(0, h - 1/2 - log(2h)/2) makes
    the limiting stable solution (1+sqrt(1-2/J))/2; at N=1000 the finite-N
    value sits within 1e-3 of it.
    """
    N = 1000
    lam_limit = 0.5 * (1 + np.sqrt(1 - 2 / 3))
    lam = optimize.brentq(lambda l: M.nematic_g_prime(N, 3 * N * l) - l,
                          0.6, 0.95, xtol=1e-10)
    assert lam == pytest.approx(lam_limit, abs=2e-3)


def test_nematic_g_second_is_variance():
    # differentiation under the integral vs centered differences of g'
    N, h = 4, 1.7
    eps = 1e-5
    fd = (M.nematic_g_prime(N, h + eps) - M.nematic_g_prime(N, h - eps)) / (2 * eps)
    assert M.nematic_g_second(N, h) == pytest.approx(fd, abs=1e-8)


# ---------------------------------------------------------------------------
# convexity, duality, derivative consistency (all models)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("model", ALL_MODELS, ids=str)
def test_g_convexity_on_grid(model):
    hs = np.linspace(-6, 6, 41) if model.kind != "nematic" else np.linspace(-6, 6, 21)
    for h in hs:
        assert model.g_second(float(h)) >= 0.0


@pytest.mark.parametrize("model", ALL_MODELS, ids=str)
def test_derivative_consistency(model):
    eps = 1e-4
    n_pts = 20 if model.kind != "nematic" else 8
    hs = 4 * RNG.random(n_pts) - 2
    for h in hs:
        h = float(h)
        fd = (model.g(h + eps) - model.g(h - eps)) / (2 * eps)
        assert abs(model.g_prime(h) - fd) < 5e-7


@pytest.mark.parametrize("model", ALL_MODELS, ids=str)
def test_fenchel_duality_round_trip(model):
    """sup_m (s(m) + h m) = g(h), attained at m = g'(h)."""
    for h in (-1.3, 0.0, 0.8, 2.1):
        m_star = model.g_prime(h)
        s, _ = model.entropy(m_star)
        assert s + h * m_star == pytest.approx(model.g(h), abs=1e-8)
        # Fenchel inequality on a sample of interior points
        lo, hi = model.m_bounds()
        for m in np.linspace(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), 7):
            s_m, _ = model.entropy(float(m))
            assert s_m + h * m <= model.g(h) + 1e-10


def test_legendre_symmetric_point():
    for model in (M.potts(4), M.cubic(3), M.nematic(4)):
        s, h = model.entropy(0.0)
        assert h == pytest.approx(0.0, abs=1e-9)
        assert s == pytest.approx(model.g(0.0), abs=1e-12)


def test_legendre_round_trip_random_fields():
    model = M.cubic(4)
    for h0 in (-2.0, 0.4, 1.7, 3.0):
        m = model.g_prime(h0)
        s, h_star = M.legendre_entropy(model.g, model.g_prime, m)
        assert h_star == pytest.approx(h0, abs=1e-9)


def test_legendre_potts_matches_simplex_entropy():
    q, m = 3, 1 / 3
    s_num, h_num = M.legendre_entropy(lambda h: M.potts_g(q, h),
                                      lambda h: M.potts_g_prime(q, h), m)
    x = np.array([1 / q + m, 1 / q - m / (q - 1), 1 / q - m / (q - 1)])
    s_closed = (q - 1) / q * (-float(np.sum(x * np.log(x))) - np.log(q))
    assert s_num == pytest.approx(s_closed, abs=1e-8)


def test_legendre_boundary_magnetization():
    model = M.potts(3)
    with pytest.raises(BoundaryMagnetization):
        M.legendre_entropy(model.g, model.g_prime, 0.75)  # beyond (q-1)/q limit of g'


# ---------------------------------------------------------------------------
# scalar free energy
# ---------------------------------------------------------------------------

def test_scalar_phi_cubic_symmetric_value():
    # phi(0) = -s(0) = -g(0) = log 2 under the raw additive convention
    assert M.scalar_phi(M.cubic(4), 1.7, 0.0) == pytest.approx(np.log(2), abs=1e-12)


def test_scalar_phi_potts_affine_relation():
    """potts_phi = (q/(q-1)) scalar_phi - J/(2q) - log q, exactly."""
    q = 3
    model = M.potts(q)
    for J, m in ((1.1, 0.0), (2.9, 0.25), (4.0, -0.2), (2.0, 0.6)):
        lhs = M.potts_phi(q, J, m)
        rhs = q / (q - 1) * M.scalar_phi(model, J, m) - J / (2 * q) - np.log(q)
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_scalar_phi_nematic_entropy_maximal_at_zero():
    model = M.nematic(4)
    assert M.scalar_phi(model, 0.0, 0.3) > M.scalar_phi(model, 0.0, 0.0)


@pytest.mark.parametrize("model,J", [(M.potts(3), 2.9), (M.cubic(4), 3.9),
                                     (M.nematic(3), 7.0)], ids=str)
def test_stationarity_equivalence(model, J):
    """m solves m = g'(Jm) iff phi_J'(m) = 0 (checked by centered differences)."""
    from mfspin.solver import solve_branches
    eps = 1e-6
    for p in solve_branches(model, J, 300).points:
        lo, hi = model.m_bounds()
        if not (lo + 10 * eps < p.m < hi - 10 * eps):
            continue
        dphi = (M.scalar_phi(model, J, p.m + eps)
                - M.scalar_phi(model, J, p.m - eps)) / (2 * eps)
        assert abs(dphi) < 5e-6
    # a non-root has a visibly nonzero derivative
    m_off = 0.3 * (model.m_bounds()[1])
    if abs(model.g_prime(J * m_off) - m_off) > 1e-3:
        dphi = (M.scalar_phi(model, J, m_off + eps)
                - M.scalar_phi(model, J, m_off - eps)) / (2 * eps)
        assert abs(dphi) > 1e-4

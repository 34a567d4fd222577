import numpy as np
import pytest

from normsmooth import prox, smooth
from normsmooth.errors import InvalidArgument
from normsmooth.normal import ProblemHandle, eval_point, init_z0, merit, natural_residual


def test_identity_prox_normal_map_is_gradient(rng):
    obj = smooth.quadratic(Q=np.diag([1.0, 2.0, 3.0]), center=np.ones(3))
    p = ProblemHandle(obj, prox.zero(), 0.7)
    z = rng.standard_normal(3)
    pt = eval_point(p, z)
    np.testing.assert_allclose(pt.Fnor, obj.grad(z), atol=1e-15)


def test_stationary_scalar_point(scalar_problem):
    pt = eval_point(scalar_problem, np.array([3.0]))
    assert pt.x[0] == 2.0 and pt.Fnor[0] == 0.0 and pt.chi == 0.0
    assert natural_residual(scalar_problem, np.array([2.0]), 1.0) == 0.0


def test_scalar_arithmetic():
    p = ProblemHandle(smooth.quadratic(n=1), prox.l1(1.0), 1.0)
    pt = eval_point(p, np.array([2.0]))
    assert pt.x[0] == 1.0 and pt.Fnor[0] == 2.0 and pt.chi == 2.0
    assert merit(p, 1.0, pt) == 3.5
    assert merit(p, 0.0, pt) == pt.psi == 1.5


def test_fnor_consistent_with_fields(logistic_problem, rng):
    pt = eval_point(logistic_problem, rng.standard_normal(50))
    recomputed = pt.g + (pt.z - pt.x) / logistic_problem.lam
    assert np.array_equal(pt.Fnor, recomputed)


def test_natural_residual_without_regularizer(rng):
    obj = smooth.quadratic(n=4, center=rng.standard_normal(4))
    p = ProblemHandle(obj, prox.zero(), 1.0)
    x = rng.standard_normal(4)
    assert natural_residual(p, x, 0.25) == pytest.approx(0.25 * np.linalg.norm(obj.grad(x)), rel=1e-14)


def test_natural_residual_compositional(logistic_problem, rng):
    p = logistic_problem
    x = rng.standard_normal(50)
    ref = np.linalg.norm(x - p.prox.prox(x - p.smooth.grad(x), 1.0))
    assert natural_residual(p, x, 1.0) == ref


def test_round_trip_stationarity(rng):
    # build problems whose stationary point is known: pick x_bar, then set the
    # quadratic center so that -grad f(x_bar) is a subgradient of phi at x_bar
    for _ in range(20):
        n, lam, mu = 6, 0.8, 0.5
        x_bar = rng.standard_normal(n) * (rng.random(n) < 0.5)
        u = np.where(x_bar != 0, mu * np.sign(x_bar), rng.uniform(-mu, mu, n))
        p = ProblemHandle(smooth.quadratic(n=n, center=x_bar + u), prox.l1(mu), lam)
        z_bar = x_bar - lam * p.smooth.grad(x_bar)
        pt = eval_point(p, z_bar)
        assert pt.chi <= 1e-12
        assert natural_residual(p, pt.x, lam) <= 1e-12
        # off the stationary point both measures are positive
        z = z_bar + 0.3
        assert eval_point(p, z).chi > 1e-12
        assert natural_residual(p, p.prox.prox(z, lam), lam) > 1e-12


def test_fixed_point_identity(logistic_problem, rng):
    p = logistic_problem
    z = rng.standard_normal(50)
    pt = eval_point(p, z)
    np.testing.assert_allclose(pt.x - p.lam * pt.g + p.lam * pt.Fnor, z, atol=1e-12)


def test_init_z0_l1():
    obj = smooth.quadratic(n=2, center=-np.array([0.5, 3.0]))  # grad f(0) = [0.5, 3]
    p = ProblemHandle(obj, prox.l1(1.0), 1.0)
    z0 = init_z0(p, np.zeros(2))
    np.testing.assert_array_equal(z0, [-0.5, -1.0])
    assert np.array_equal(p.prox.prox(z0, 1.0), np.zeros(2))


def test_init_z0_fallback_for_identity_prox(rng):
    obj = smooth.quadratic(n=3, center=rng.standard_normal(3))
    p = ProblemHandle(obj, prox.zero(), 0.5)
    x0 = rng.standard_normal(3)
    z0, fallback = init_z0(p, x0, return_info=True)
    assert fallback
    np.testing.assert_array_equal(z0, x0 - 0.5 * obj.grad(x0))
    np.testing.assert_array_equal(eval_point(p, z0).Fnor, obj.grad(z0))


def test_init_z0_group_radial_projection():
    obj = smooth.quadratic(n=2, center=-np.array([3.0, 4.0]))
    p = ProblemHandle(obj, prox.group_l2(1.0, [[0, 1]]), 1.0)
    z0 = init_z0(p, np.zeros(2))
    np.testing.assert_allclose(z0, [-0.6, -0.8], rtol=1e-14)
    assert np.array_equal(p.prox.prox(z0, 1.0), np.zeros(2))
    # grid search over the prox preimage of 0 (the closed unit disc)
    r = np.linspace(0, 1, 401)[:, None]
    th = np.linspace(0, 2 * np.pi, 1441)[None, :]
    cand = np.stack([(r * np.cos(th)).ravel(), (r * np.sin(th)).ravel()], axis=1)
    vals = np.linalg.norm(np.array([3.0, 4.0]) + cand, axis=1)
    best = cand[np.argmin(vals)]
    assert np.linalg.norm(best - z0) <= 5e-3
    assert np.linalg.norm([3.0, 4.0] + z0) <= vals.min() + 1e-12


@pytest.mark.parametrize("op", [prox.l1(0.4), prox.box_l1(0.4),
                                prox.group_l2(0.4, [[0, 1, 2], [3, 4], [5]])])
def test_init_z0_preimage_exact_at_zero(op, rng):
    obj = smooth.quadratic(n=6, center=rng.standard_normal(6) * 3)
    p = ProblemHandle(obj, op, 1.5)
    z0 = init_z0(p, np.zeros(6))
    assert np.array_equal(op.prox(z0, 1.5), np.zeros(6))


@pytest.mark.parametrize("op", [prox.l1(0.4), prox.box_l1(0.4),
                                prox.group_l2(0.4, [[0, 1, 2], [3, 4], [5]])])
def test_init_z0_minimizes_over_preimage(op, rng):
    obj = smooth.quadratic(n=6, center=rng.standard_normal(6) * 3)
    p = ProblemHandle(obj, op, 1.5)
    x0 = np.array([0.0, 0.3, 0.0, 1.0, 0.6, 0.0])
    z0 = init_z0(p, x0)
    np.testing.assert_allclose(op.prox(z0, 1.5), x0, atol=1e-14)
    best = eval_point(p, z0).chi
    # random members of the preimage never do better
    for _ in range(200):
        z = op.preimage_projection(x0, z0 + rng.standard_normal(6), 1.5)
        assert eval_point(p, z).chi >= best - 1e-12


def test_init_z0_outside_domain():
    p = ProblemHandle(smooth.quadratic(n=2), prox.box_l1(0.1), 1.0)
    with pytest.raises(InvalidArgument):
        init_z0(p, np.array([1.5, 0.0]))

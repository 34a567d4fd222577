"""Dense stand-ins used across the test modules."""

import numpy as np

from normsmooth.newton_cg import NewtonOperator


class DenseHessian:
    def __init__(self, B):
        self.B = np.asarray(B, dtype=float)

    def apply(self, v):
        return self.B @ v


def dense_operator(B, prox_op, z, lam):
    return NewtonOperator(DenseHessian(B), prox_op, z, lam)


def dense_M(op):
    n = op.n
    D = op.prox.derivative_matrix(op.z, op.lam)
    return op.hess.B @ D + (np.eye(n) - D) / op.lam, D


def random_spd(rng, n, shift=0.5):
    G = rng.standard_normal((n, n))
    return G @ G.T / n + shift * np.eye(n)


def recovery_bound_holds(B, M, lam, q, Fnor, eps, slack=1e-8):
    """Check ||M s + F|| <= ||I - lam B|| eps for s = q - lam (M q + F)."""
    n = q.size
    s = q - lam * (M @ q + Fnor)
    lhs = np.linalg.norm(M @ s + Fnor)
    rhs = np.linalg.norm(np.eye(n) - lam * B, 2) * eps
    return lhs <= rhs * (1 + slack), lhs, rhs

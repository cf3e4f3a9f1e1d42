"""Logarithmic norms (matrix measures) of real square matrices.

mu[A] is the one-sided directional derivative of the induced operator norm
at the identity: lim_{h -> 0+} (|I + h A| - 1) / h.  Unlike a norm it can be
negative, and a negative value certifies exponential decay of |x(t)| for
x' = A x in the chosen vector norm.  Closed forms are used for the three
classical norms:

  one  : max over columns j of  a_jj + sum_{i != j} |a_ij|
  inf  : max over rows i of     a_ii + sum_{j != i} |a_ij|
  two  : largest eigenvalue of  (A + A^T) / 2

A weighted kind with transform P uses the norm |P x|_2 and reduces to the
two-norm of P A P^{-1}.  mu_limit_estimate evaluates the defining limit at a
small finite h and exists purely as a consistency check on the closed forms.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .linalg import NormKind, _as_square

ONE = NormKind("one")
TWO = NormKind("two")
INF = NormKind("inf")

#: the classical kinds by CLI name
NAMED = {"one": ONE, "two": TWO, "inf": INF}


def weighted(P) -> NormKind:
    """Norm kind |x| = |P x|_2 for a nonsingular transform P."""
    P = _as_square(P, "P")
    linalg._lu_factor(P)  # reject singular transforms up front
    return NormKind("weighted", P)


def lyapunov_weighted(A) -> NormKind:
    """Weight built from a Hurwitz matrix A.

    Solves A^T H + H A = -2 I and returns the kind with transform L^T where
    H = L L^T, so that |x|^2 = x^T H x.  In this norm mu[A] <= -1 / |H|_2,
    which is strictly negative; raises NotPositiveDefiniteError when A is
    not Hurwitz.
    """
    H = linalg.solve_lyapunov(A)
    return NormKind("weighted", linalg.cholesky(H).T)


def mu(M, kind: NormKind) -> float:
    """Logarithmic norm of M for the given vector norm kind."""
    A = _as_square(M)
    if kind.tag == "one":
        off = np.abs(A).sum(axis=0) - np.abs(np.diag(A))
        return float((np.diag(A) + off).max())
    if kind.tag == "inf":
        off = np.abs(A).sum(axis=1) - np.abs(np.diag(A))
        return float((np.diag(A) + off).max())
    if kind.tag == "two":
        w = linalg.sym_eigs(0.5 * (A + A.T))
        return float(w[-1])
    if kind.tag == "weighted":
        B = linalg.similarity_transform(kind.transform, A)
        w = linalg.sym_eigs(0.5 * (B + B.T))
        return float(w[-1])
    raise ValueError(f"unknown norm tag {kind.tag!r}")


def mu_weighted(M, P) -> float:
    """Logarithmic norm of M under |x| = |P x|_2, as mu_2 of P M P^{-1}."""
    B = linalg.similarity_transform(P, M)
    return float(linalg.sym_eigs(0.5 * (B + B.T))[-1])


def mu_limit_estimate(M, kind: NormKind, h: float = 1e-7) -> float:
    """Finite-h evaluation of (|I + h M| - 1) / h.

    Agrees with mu() to O(h) and is kept as an independent cross-check; do
    not use it on the certification path.
    """
    A = _as_square(M)
    if h <= 0.0:
        raise ValueError("h must be positive")
    eye = np.eye(A.shape[0])
    return (linalg.mat_norm(eye + h * A, kind) - 1.0) / h

"""Independent reference implementations used only by the tests.

Deliberately unrelated to the package's own numerics: the matrix
exponential is Taylor-with-scaling-and-squaring (no eigenvalue branches,
no scipy), quadrature is plain Gauss-Legendre, derivatives are central
differences.  Agreement between these and the package is the point of the
property tests, so nothing here may import from movingbed internals.
"""

import numpy as np
from numpy.polynomial.legendre import leggauss


def expm_taylor(A, tol=1e-22, max_terms=60):
    """Matrix exponential by scaling and squaring with a Taylor series."""
    A = np.asarray(A)
    norm = np.abs(A).sum(axis=1).max()   # infinity norm
    s = max(0, int(np.ceil(np.log2(norm / 0.5)))) if norm > 0.5 else 0
    B = A / (2.0 ** s)
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for k in range(1, max_terms + 1):
        term = term @ B / k
        out = out + term
        if np.abs(term).max() < tol * np.abs(out).max():
            break
    for _ in range(s):
        out = out @ out
    return out


_GL_X, _GL_W = leggauss(64)


def gl64(f, lo, hi):
    """64-node Gauss-Legendre integral of a (vectorized) scalar function."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return half * np.sum(_GL_W * f(mid + half * _GL_X))


def central_diff(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)

"""Shared test utilities: uniform tolerance rule and finite-difference oracles.

The finite-difference code here is intentionally independent of the package
internals; it only consumes plain float evaluations.
"""

import numpy as np


def rel_ok(lhs, rhs, tol, floor=1e-9):
    """The package-wide pass rule: |l - r| <= max(floor, tol(1 + max|.|))."""
    l = np.atleast_1d(np.asarray(lhs, dtype=float)).ravel()
    r = np.atleast_1d(np.asarray(rhs, dtype=float)).ravel()
    err = np.linalg.norm(l - r)
    denom = 1.0 + max(np.linalg.norm(l), np.linalg.norm(r))
    return err <= max(floor, tol * denom)


def max_rel(lhs, rhs):
    l = np.atleast_1d(np.asarray(lhs, dtype=float)).ravel()
    r = np.atleast_1d(np.asarray(rhs, dtype=float)).ravel()
    return np.linalg.norm(l - r) / (1.0 + max(np.linalg.norm(l), np.linalg.norm(r)))


def fd_grad(f, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return out


def fd_hess(f, x, h=1e-4):
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    out = np.zeros((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        out[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h * h)
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            out[i, j] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (
                4.0 * h * h
            )
            out[j, i] = out[i, j]
    return out


def fd_jacobian(f, x, h=1e-5):
    """Jacobian of a vector-valued function, columns indexed by coordinate."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    f0 = np.asarray(f(x))
    out = np.zeros(f0.shape + (n,))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out[..., i] = (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h)
    return out

"""Perron root of small nonnegative matrices by shifted power iteration."""

import numpy as np

from .errors import NumericError

RAYLEIGH_RTOL = 1e-13


def power_iteration(M, rtol=RAYLEIGH_RTOL, max_iter=1_000_000, x0=None, strict=True):
    """Perron root and right eigenvector of a nonnegative matrix.

    Works on a single ``(n, n)`` matrix or a stack ``(..., n, n)``. Each step
    multiplies by ``M + s I`` where ``s`` is the current root estimate; the
    shift leaves eigenvectors unchanged and removes the near-periodic
    ``-rho`` mode that birth-death weight matrices carry, which plain power
    iteration cannot separate from ``rho``.

    Convergence is declared when the Collatz-Wielandt bounds
    ``min (M x)_i / x_i <= rho <= max (M x)_i / x_i`` agree to ``rtol``. If the
    iterate loses support (entries below 1e-8, a reducible matrix) the bounds
    cannot close, and three consecutive estimates ``sum(M x) / sum(x)`` that
    agree to ``rtol`` end the iteration instead.

    Parameters
    ----------
    M : array_like
        Nonnegative matrix or stack of matrices, not identically zero.
    rtol : float
        Relative tolerance on successive root estimates.
    max_iter : int
        Iteration cap; exceeding it raises :class:`NumericError`.
    x0 : array_like, optional
        Positive starting vector(s); defaults to all ones.
    strict : bool
        If False, return a third array flagging which matrices converged
        instead of raising.

    Returns
    -------
    rho : float or ndarray
    x : ndarray
        Eigenvector(s), scaled so the largest entry is 1.
    """
    M = np.asarray(M, dtype=float)
    single = M.ndim == 2
    if single:
        M = M[None]
    if np.any(M < 0):
        raise NumericError("power iteration needs a nonnegative matrix")
    batch, n = M.shape[0], M.shape[-1]
    x = np.ones((batch, n)) if x0 is None else np.array(x0, dtype=float).reshape(batch, n)
    x /= x.max(axis=1, keepdims=True)

    y = np.einsum("bij,bj->bi", M, x)
    rho = y.sum(axis=1) / x.sum(axis=1)
    if np.any(rho <= 0):
        raise NumericError("matrix has no positive Perron root from this start")
    active = np.arange(batch)
    calm = np.zeros(batch, dtype=int)

    for _ in range(max_iter):
        if active.size == 0:
            break
        xa = y[active] + rho[active, None] * x[active]
        xa /= xa.max(axis=1, keepdims=True)
        ya = np.einsum("bij,bj->bi", M[active], xa)
        new = ya.sum(axis=1) / xa.sum(axis=1)
        # Collatz-Wielandt bracket; it only closes when x has full support
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = ya / xa
        gap = ratio.max(axis=1) - ratio.min(axis=1)
        reducible = xa.min(axis=1) < 1e-8
        small = np.abs(new - rho[active]) <= rtol * new
        calm[active] = np.where(small & reducible, calm[active] + 1, 0)
        x[active], y[active], rho[active] = xa, ya, new
        done = (gap <= rtol * new) | (calm[active] >= 3)
        active = active[~done]
    converged = np.ones(batch, dtype=bool)
    converged[active] = False
    if strict and active.size:
        raise NumericError(f"power iteration did not converge in {max_iter} steps")
    if not strict:
        return (rho, x, converged) if not single else (float(rho[0]), x[0], bool(converged[0]))
    if single:
        return float(rho[0]), x[0]
    return rho, x

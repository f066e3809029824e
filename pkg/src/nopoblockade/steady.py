"""Unique steady state of a Lindblad generator.

One population equation of ``L vec(rho) = 0`` is swapped for the trace
condition and the square system is factorized with SuperLU.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .liouvillian import superop_dim, trace_indices, unvec, vec

RESIDUAL_RTOL = 1e-10
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-8
_DENSE_KERNEL_LIMIT = 4096


class SteadyStateError(RuntimeError):
    pass


class DegenerateKernel(SteadyStateError):
    """The generator has more than one stationary state."""


class NonConvergence(SteadyStateError):
    """The linear solve and its refinement missed the residual tolerance."""


class UnphysicalState(SteadyStateError):
    """The solution violates a density-matrix invariant (e.g. a negative eigenvalue)."""


def generator_norm(L) -> float:
    """Largest absolute row sum of ``L``."""
    return float(abs(L).sum(axis=1).max())


def residual(L, rho: np.ndarray) -> float:
    """``max |L vec(rho)|``."""
    superop_dim(L)
    return float(np.abs(L @ vec(rho)).max())


def density_defects(rho: np.ndarray) -> dict:
    """Hermiticity, trace and positivity defects of ``rho``."""
    rho = np.asarray(rho)
    return {
        "hermiticity": float(np.abs(rho - rho.conj().T).max()),
        "trace": float(abs(np.trace(rho) - 1.0)),
        "min_eigenvalue": float(la.eigvalsh(0.5 * (rho + rho.conj().T))[0]),
    }


def check_density_matrix(rho: np.ndarray) -> dict:
    """Return :func:`density_defects`, raising ``UnphysicalState`` on violation."""
    d = density_defects(rho)
    if d["hermiticity"] > HERMITICITY_TOL:
        raise UnphysicalState(f"rho is not Hermitian (defect {d['hermiticity']:.3g})")
    if d["trace"] > TRACE_TOL:
        raise UnphysicalState(f"trace of rho is off by {d['trace']:.3g}")
    if d["min_eigenvalue"] < EIGENVALUE_FLOOR:
        raise UnphysicalState(
            f"rho has eigenvalue {d['min_eigenvalue']:.3g}; the truncation is "
            "probably too small"
        )
    return d


def _trace_replaced_system(L, trace_row: int):
    dim = superop_dim(L)
    if not 0 <= trace_row < dim:
        raise ValueError(f"trace_row must lie in [0, {dim})")
    row = trace_indices(dim)[trace_row]
    M = sp.lil_array(L)
    M[[row], :] = 0
    M[[row], trace_indices(dim)] = 1.0
    b = np.zeros(dim * dim, dtype=complex)
    b[row] = 1.0
    return sp.csc_array(M), b


def null_space_size(L, tol: float) -> int:
    """Number of eigenvalues of ``L`` with magnitude below ``tol`` (at most 3 are probed)."""
    n = L.shape[0]
    if n <= _DENSE_KERNEL_LIMIT:
        s = la.svdvals(L.toarray())
        return int(np.sum(s < tol))
    # shift slightly off zero so the factorization exists
    vals = spla.eigs(sp.csc_array(L), k=3, sigma=-1e-3 * tol, which="LM",
                     return_eigenvectors=False)
    return int(np.sum(np.abs(vals) < tol))


def steady_state(L, trace_row: int = 0, max_refinements: int = 3) -> np.ndarray:
    """Solve ``L vec(rho) = 0`` with ``trace(rho) = 1``.

    Parameters
    ----------
    L : sparse array, shape (D**2, D**2)
        Column-stacking generator.
    trace_row : int
        Basis state whose population equation is replaced by the trace
        condition. Any choice gives the same answer when the kernel is
        one-dimensional.
    max_refinements : int
        Iterative-refinement sweeps attempted when the direct solve misses
        the residual tolerance.

    Returns
    -------
    ndarray, shape (D, D)
        The stationary density matrix, not re-projected.

    Raises
    ------
    DegenerateKernel, NonConvergence, UnphysicalState
    """
    dim = superop_dim(L)
    tol = RESIDUAL_RTOL * generator_norm(L)
    M, b = _trace_replaced_system(L, trace_row)
    try:
        lu = spla.splu(M)
    except RuntimeError as exc:
        _diagnose(L, tol, f"factorization failed: {exc}")
    x = lu.solve(b)
    for _ in range(max_refinements):
        if not np.all(np.isfinite(x)):
            break
        if np.abs(L @ x).max() <= tol and abs(x[trace_indices(dim)].sum() - 1) <= TRACE_TOL:
            break
        x = x + lu.solve(b - M @ x)
    if not np.all(np.isfinite(x)) or np.abs(L @ x).max() > tol:
        _diagnose(L, tol, "residual above tolerance after refinement")
    rho = unvec(x, dim)
    check_density_matrix(rho)
    return rho


def _diagnose(L, tol, reason):
    if null_space_size(L, max(tol, 1e-12)) > 1:
        raise DegenerateKernel(f"generator has multiple stationary states ({reason})")
    raise NonConvergence(reason)

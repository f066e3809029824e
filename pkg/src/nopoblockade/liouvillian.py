"""Lindblad generator as a sparse superoperator.

Density matrices are vectorized by stacking columns, so that
``vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)``. Superoperators are plain
``scipy.sparse.csr_array`` objects of shape ``(D**2, D**2)``.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from . import fock
from .fock import HilbertSpace, adjoint, annihilation, canonical, compose
from .model import SystemParams, hamiltonian


class IntegrationError(RuntimeError):
    """Raised when the fixed-step integrator loses trace."""


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    if dim is None:
        dim = math.isqrt(v.size)
    return np.asarray(v).reshape(dim, dim, order="F")


def superop_dim(L) -> int:
    n = L.shape[0]
    dim = math.isqrt(n)
    if dim * dim != n or L.shape[0] != L.shape[1]:
        raise ValueError(f"{L.shape} is not the shape of a superoperator")
    return dim


def trace_indices(dim: int) -> np.ndarray:
    """Positions of the diagonal elements of ``rho`` inside ``vec(rho)``."""
    return np.arange(dim) * (dim + 1)


def left_multiply(A) -> sp.csr_array:
    """Superoperator of ``rho -> A @ rho``."""
    return canonical(sp.kron(sp.identity(A.shape[0], dtype=complex), A))


def right_multiply(B) -> sp.csr_array:
    """Superoperator of ``rho -> rho @ B``."""
    return canonical(sp.kron(sp.csr_array(B).T, sp.identity(B.shape[0], dtype=complex)))


def commutator_superop(H) -> sp.csr_array:
    """Superoperator of ``rho -> -i [H, rho]``."""
    return canonical(-1j * (left_multiply(H) - right_multiply(H)))


def dissipator(op, rate: float) -> sp.csr_array:
    """Superoperator of ``(rate/2) (2 A rho A^dag - A^dag A rho - rho A^dag A)``.

    With this normalization a freely decaying mode loses energy at ``rate``.
    """
    if not rate > 0:
        raise ValueError(f"decay rate must be > 0, got {rate!r}")
    A = sp.csr_array(op, dtype=complex)
    AdA = compose(adjoint(A), A)
    jump = sp.kron(A.conj(), A)
    return canonical(rate * jump - 0.5 * rate * (left_multiply(AdA) + right_multiply(AdA)))


def liouvillian(space: HilbertSpace, p: SystemParams) -> sp.csr_array:
    """Full generator: coherent part of the Hermitian Hamiltonian plus three loss channels."""
    L = commutator_superop(hamiltonian(space, p))
    for mode, rate in zip(fock.MODES, (p.kappa_a, p.kappa_b, p.kappa_c)):
        L = L + dissipator(annihilation(space, mode), rate)
    return canonical(L)


def apply(L, rho: np.ndarray) -> np.ndarray:
    """``unvec(L @ vec(rho))``."""
    dim = superop_dim(L)
    return unvec(L @ vec(rho), dim)


def evolve(L, rho0: np.ndarray, t_final: float, dt: float,
           max_trace_drift: float = 1e-6) -> np.ndarray:
    """Integrate ``d vec(rho)/dt = L vec(rho)`` with classical fixed-step RK4.

    The step is shrunk slightly so that an integer number of steps lands on
    ``t_final``. The result is Hermitized and trace-normalized once, at the end.

    Raises
    ------
    IntegrationError
        If the trace drifts by more than ``max_trace_drift`` per unit time,
        which signals an unstable step size.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    dim = superop_dim(L)
    rho0 = np.asarray(rho0, dtype=complex)
    if t_final == 0:
        return rho0.copy()

    n_steps = max(1, math.ceil(t_final / dt - 1e-9))
    h = t_final / n_steps
    diag = trace_indices(dim)
    y = vec(rho0).copy()
    tr0 = y[diag].sum()
    allowed = max_trace_drift * max(t_final, 1.0)
    for step in range(n_steps):
        k1 = L @ y
        k2 = L @ (y + 0.5 * h * k1)
        k3 = L @ (y + 0.5 * h * k2)
        k4 = L @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = abs(y[diag].sum() - tr0)
        if not np.isfinite(drift) or drift > allowed:
            raise IntegrationError(
                f"trace drift {drift:.3g} after {step + 1} steps of dt={h:.3g}; "
                "reduce the step size"
            )
    rho = unvec(y, dim)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real

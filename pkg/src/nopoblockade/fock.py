"""Truncated three-mode Fock space and sparse mode operators.

Basis kets ``|m, n, l>`` hold the photon numbers of modes a, b and c.
Flat indices are row-major with mode a slowest and mode c fastest::

    flat = m * (n_b_max + 1) * (n_c_max + 1) + n * (n_c_max + 1) + l

All operators are returned as ``scipy.sparse.csr_array`` in canonical form
(sorted indices, no duplicates, no stored zeros).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator

import numpy as np
import scipy.sparse as sp

MODES = ("a", "b", "c")


@dataclass(frozen=True)
class ModeCutoffs:
    """Inclusive photon-number cutoffs for modes a, b and c."""

    n_a_max: int = 3
    n_b_max: int = 4
    n_c_max: int = 4

    def __post_init__(self):
        for name, value in zip(MODES, self.as_tuple()):
            if int(value) != value or value < 1:
                raise ValueError(
                    f"cutoff for mode {name} must be an integer >= 1, got {value!r}"
                )

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_a_max, self.n_b_max, self.n_c_max)

    def incremented(self, step: int) -> "ModeCutoffs":
        return ModeCutoffs(*(n + step for n in self.as_tuple()))


@dataclass(frozen=True)
class HilbertSpace:
    cutoffs: ModeCutoffs

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(n + 1 for n in self.cutoffs.as_tuple())

    @property
    def dim(self) -> int:
        da, db, dc = self.dims
        return da * db * dc

    def index(self, m: int, n: int, l: int) -> int:
        """Flat index of the basis ket ``|m, n, l>``."""
        da, db, dc = self.dims
        if not (0 <= m < da and 0 <= n < db and 0 <= l < dc):
            raise IndexError(f"|{m},{n},{l}> lies outside the truncated space")
        return (m * db + n) * dc + l

    def label(self, flat: int) -> tuple[int, int, int]:
        """Inverse of :meth:`index`."""
        if not 0 <= flat < self.dim:
            raise IndexError(f"flat index {flat} out of range")
        _, db, dc = self.dims
        m, rest = divmod(flat, db * dc)
        n, l = divmod(rest, dc)
        return (m, n, l)

    def labels(self) -> Iterator[tuple[int, int, int]]:
        return product(*(range(d) for d in self.dims))

    def basis(self, m: int, n: int, l: int) -> np.ndarray:
        ket = np.zeros(self.dim, dtype=complex)
        ket[self.index(m, n, l)] = 1.0
        return ket

    def projector(self, m: int, n: int, l: int) -> np.ndarray:
        """Dense density matrix ``|m,n,l><m,n,l|``."""
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        i = self.index(m, n, l)
        rho[i, i] = 1.0
        return rho


def build_space(cutoffs: ModeCutoffs | tuple[int, int, int]) -> HilbertSpace:
    if not isinstance(cutoffs, ModeCutoffs):
        cutoffs = ModeCutoffs(*cutoffs)
    return HilbertSpace(cutoffs)


def canonical(op) -> sp.csr_array:
    """Return ``op`` as a complex CSR array with exact-zero entries removed."""
    out = sp.csr_array(op, dtype=complex, copy=True)
    out.sum_duplicates()
    out.eliminate_zeros()
    out.sort_indices()
    return out


def single_mode_lowering(n_max: int) -> sp.csr_array:
    """Lowering operator on ``{|0>, ..., |n_max>}``: ``<n-1|a|n> = sqrt(n)``."""
    return canonical(sp.diags_array(np.sqrt(np.arange(1, n_max + 1)), offsets=1))


def _mode_slot(mode: str) -> int:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return MODES.index(mode)


def annihilation(space: HilbertSpace, mode: str) -> sp.csr_array:
    """Lowering operator of ``mode`` embedded as ``X_a (x) 1 (x) 1`` etc."""
    slot = _mode_slot(mode)
    factors = [sp.identity(d, dtype=complex, format="csr") for d in space.dims]
    factors[slot] = single_mode_lowering(space.cutoffs.as_tuple()[slot])
    return canonical(sp.kron(sp.kron(factors[0], factors[1]), factors[2]))


def creation(space: HilbertSpace, mode: str) -> sp.csr_array:
    return adjoint(annihilation(space, mode))


def number(space: HilbertSpace, mode: str) -> sp.csr_array:
    """Photon-number operator of ``mode`` with exact integer diagonal."""
    slot = _mode_slot(mode)
    counts = np.array([lbl[slot] for lbl in space.labels()], dtype=complex)
    return canonical(sp.diags_array(counts))


def identity(space: HilbertSpace) -> sp.csr_array:
    return canonical(sp.identity(space.dim, dtype=complex))


def _check_dims(*ops):
    shapes = {op.shape for op in ops}
    if len(shapes) != 1:
        raise ValueError(f"operator dimension mismatch: {sorted(shapes)}")


def adjoint(op) -> sp.csr_array:
    return canonical(op.conj().T)


def compose(*ops) -> sp.csr_array:
    """Matrix product ``ops[0] @ ops[1] @ ...``."""
    _check_dims(*ops)
    out = ops[0]
    for op in ops[1:]:
        out = out @ op
    return canonical(out)


def add(*ops) -> sp.csr_array:
    _check_dims(*ops)
    out = ops[0]
    for op in ops[1:]:
        out = out + op
    return canonical(out)


def scale(op, factor: complex) -> sp.csr_array:
    return canonical(op * factor)


def commutator(x, y) -> sp.csr_array:
    return add(compose(x, y), scale(compose(y, x), -1))


def swap_bc_permutation(space: HilbertSpace) -> np.ndarray:
    """Index map ``|m,n,l> -> |m,l,n>``; needs equal cutoffs on modes b and c."""
    if space.cutoffs.n_b_max != space.cutoffs.n_c_max:
        raise ValueError("b <-> c exchange needs n_b_max == n_c_max")
    return np.array([space.index(m, l, n) for m, n, l in space.labels()])


def swap_bc_defect(rho: np.ndarray, space: HilbertSpace) -> float:
    """``max |rho - S rho S^dag|`` for the b <-> c exchange ``S``."""
    perm = swap_bc_permutation(space)
    rho = np.asarray(rho)
    return float(np.abs(rho - rho[np.ix_(perm, perm)]).max())

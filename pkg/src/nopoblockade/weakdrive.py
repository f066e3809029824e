"""Perturbative steady state of the damped, driven oscillator in the six-state truncation.

The unnormalized state ``|000> + c100|100> + c011|011> + c200|200> + c111|111> + c022|022>``
is stationary under the non-Hermitian Hamiltonian order by order in the drive:
first-order amplitudes are linear in ``E``, second-order ones quadratic.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import SystemParams

VALIDITY_RATIO = 0.1


class SingularHierarchy(np.linalg.LinAlgError):
    pass


class WeakDriveWarning(UserWarning):
    pass


@dataclass(frozen=True)
class WeakDriveAmplitudes:
    c000: complex
    c100: complex
    c011: complex
    c200: complex
    c111: complex
    c022: complex


def _solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    if np.linalg.cond(M) > 1 / np.finfo(float).eps:
        raise SingularHierarchy("amplitude equations are singular to working precision")
    return np.linalg.solve(M, rhs)


def solve_amplitudes(p: SystemParams) -> WeakDriveAmplitudes:
    """Stationary amplitudes with ``c000 = 1``."""
    if p.E > VALIDITY_RATIO * min(p.kappa_a, p.kappa_b, p.kappa_c):
        warnings.warn(f"E = {p.E} is not small against the decay rates; "
                      "the weak-drive expansion may be inaccurate",
                      WeakDriveWarning, stacklevel=2)
    da = complex(p.delta_a, -p.kappa_a / 2)
    dbc = complex(p.delta_b, -p.kappa_b / 2) + complex(p.delta_c, -p.kappa_c / 2)
    g, E = p.g, p.E
    r2 = math.sqrt(2)

    # rows: <100|, <011|
    first = np.array([[da, g],
                      [g, dbc]])
    c100, c011 = _solve(first, np.array([-E, 0.0], dtype=complex))

    # rows: <200|, <111|, <022|; drive terms feed from the first-order amplitudes
    second = np.array([[2 * da, r2 * g, 0],
                       [r2 * g, da + dbc, 2 * g],
                       [0, 2 * g, 2 * dbc]])
    source = -np.array([r2 * E * c100, E * c011, 0], dtype=complex)
    c200, c111, c022 = _solve(second, source)
    return WeakDriveAmplitudes(1.0 + 0j, complex(c100), complex(c011),
                               complex(c200), complex(c111), complex(c022))


def observables_from_amplitudes(amps: WeakDriveAmplitudes) -> tuple[float, float]:
    """``(n_D, g2_D)`` to leading order in the drive.

    ``D^2 |022> = 2 |000>`` supplies the factor 4 in ``g2_D``.
    """
    n_D = abs(amps.c011) ** 2
    if abs(amps.c011) <= 1e-150:
        raise ZeroDivisionError("first-order pair amplitude vanishes")
    return n_D, 4 * abs(amps.c022) ** 2 / n_D ** 2

"""Closed-form weak-drive results and dressed-state energies.

Complex detunings ``delta' = delta - i kappa / 2`` are formed on the fly.
Only the sums ``delta_b' + delta_c'`` enter the pair formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy.optimize import minimize_scalar

from .model import SystemParams

DENOMINATOR_GUARD = 1e-300
DEGENERACY_TOL = 1e-12


class DegenerateDenominator(ArithmeticError):
    """A closed-form expression was evaluated on its singular set."""


def _complex_detunings(p: SystemParams) -> tuple[complex, complex]:
    da = complex(p.delta_a, -p.kappa_a / 2)
    dbc = complex(p.delta_b + p.delta_c, -(p.kappa_b + p.kappa_c) / 2)
    return da, dbc


def _guard(value: complex, what: str) -> complex:
    if abs(value) < DENOMINATOR_GUARD:
        raise DegenerateDenominator(f"{what} vanishes")
    return value


def pair_resonance_denominator(p: SystemParams) -> complex:
    """``(delta_b' + delta_c') delta_a' - g**2``."""
    da, dbc = _complex_detunings(p)
    return dbc * da - p.g ** 2


def g2_pair_analytic(p: SystemParams) -> float:
    """Weak-drive zero-delay pair autocorrelation ``g2_D``."""
    da, dbc = _complex_detunings(p)
    three = _guard(da + dbc, "delta_a' + delta_b' + delta_c'")
    res = _guard(pair_resonance_denominator(p), "(delta_b' + delta_c') delta_a' - g^2")
    contrast = _guard(1 - p.g ** 2 * da / (three * res), "1 - g^2 delta_a' / (...)")
    return 4.0 / abs(contrast) ** 2


def pair_number_analytic(p: SystemParams) -> float:
    """Weak-drive mean pair number ``n_D``."""
    res = _guard(pair_resonance_denominator(p), "(delta_b' + delta_c') delta_a' - g^2")
    return (p.g * p.E) ** 2 / abs(res) ** 2


def optimal_delta(delta_a: float, g: float) -> float:
    """Subharmonic detuning on the resonance curve ``2 delta delta_a = g**2``."""
    if delta_a == 0:
        raise ValueError("delta_a must be nonzero on the optimal curve")
    return g * g / (2.0 * delta_a)


def resonance_condition_check(delta_a: float, delta: float, g: float) -> float:
    """``2 delta delta_a - g**2``; zero when the drive hits the one-pair doublet."""
    return 2.0 * delta * delta_a - g * g


def g2_on_optimal_curve(delta_a: float, g: float, kappa_a: float, kappa_D: float) -> float:
    """Pair autocorrelation on the resonance curve in the strong-coupling form.

    ``kappa_D`` is the total pair loss rate, ``kappa_b + kappa_c``; with that
    choice this agrees with :func:`g2_pair_analytic` as ``g / kappa_a`` grows.
    """
    if kappa_a <= 0 or kappa_D <= 0:
        raise ValueError("rates must be positive")
    da2, g2 = delta_a * delta_a, g * g
    num = 4 * (da2 + g2) ** 2 * (g2 * kappa_a + da2 * kappa_D) ** 2
    return num / (kappa_a ** 2 * g2 ** 4 + 4 * g2 ** 2 * da2 ** 3)


def optimal_delta_a(g: float, kappa_a: float, kappa: float) -> float:
    """Closed-form minimizer of :func:`g2_on_optimal_curve` for ``kappa_D = 2 kappa``.

    Exact in the limit ``g >> kappa_a``, where the ``kappa_a**2 g**8`` term
    of the denominator is negligible.
    """
    r = kappa_a / kappa
    return g * math.sqrt((r + 2 + math.sqrt(r * r + 28 * r + 4)) / 4)


def minimize_g2_on_optimal_curve(g: float, kappa_a: float, kappa_D: float,
                                 bounds: Optional[tuple[float, float]] = None,
                                 xatol: float = 1e-12) -> tuple[float, float]:
    """Numerical ``(delta_a, g2)`` minimizing :func:`g2_on_optimal_curve`.

    Default bracket is ``(g/2, 20 g)``.
    """
    lo, hi = bounds if bounds is not None else (g / 2, 20 * g)
    # scaled variable keeps xatol meaningful for any g
    res = minimize_scalar(lambda x: g2_on_optimal_curve(x * g, g, kappa_a, kappa_D),
                          bounds=(lo / g, hi / g), method="bounded",
                          options={"xatol": xatol})
    return float(res.x * g), float(res.fun)


@dataclass(frozen=True)
class DressedLevels:
    """Dressed energies of the undriven oscillator, measured from the vacuum ``|000>``.

    The two-pair energies exist only when ``omega_b + omega_c == omega_a``;
    otherwise they are ``None`` and ``two_manifold_available`` is false.
    """

    e1_plus: float
    e1_minus: float
    e2_plus: Optional[float] = None
    e2_zero: Optional[float] = None
    e2_minus: Optional[float] = None

    @property
    def two_manifold_available(self) -> bool:
        return self.e2_zero is not None


def dressed_energies(omega_a: float, omega_b: float, omega_c: float, g: float) -> DressedLevels:
    if g < 0:
        raise ValueError("g must be nonnegative")
    mean = (omega_a + omega_b + omega_c) / 2
    split = math.sqrt(4 * g * g + (omega_a - omega_b - omega_c) ** 2) / 2
    levels = dict(e1_plus=mean + split, e1_minus=mean - split)
    if abs(omega_b + omega_c - omega_a) <= DEGENERACY_TOL:
        root6g = math.sqrt(6) * g
        levels.update(e2_plus=2 * omega_a + root6g, e2_zero=2 * omega_a,
                      e2_minus=2 * omega_a - root6g)
    return DressedLevels(**levels)

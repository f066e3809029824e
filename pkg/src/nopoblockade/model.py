"""Driven three-mode parametric Hamiltonian in the frame rotating with the drive.

Units are arbitrary but shared; the CLI normalizes everything to ``kappa_a = 1``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

from . import fock
from .fock import HilbertSpace, add, adjoint, annihilation, compose, scale


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the driven oscillator.

    Parameters
    ----------
    delta_a, delta_b, delta_c : float
        Cavity detunings from the drive (``delta_a``) and from half the drive
        frequency (``delta_b``, ``delta_c``).
    g : float
        Three-wave-mixing coupling, real and nonnegative.
    E : float
        Drive amplitude on mode a, real and nonnegative.
    kappa_a, kappa_b, kappa_c : float
        Energy decay rates, strictly positive.
    """

    delta_a: float = 0.0
    delta_b: float = 0.0
    delta_c: float = 0.0
    g: float = 10.0
    E: float = 0.01
    kappa_a: float = 1.0
    kappa_b: float = 0.5
    kappa_c: float = 0.5

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        for name in ("kappa_a", "kappa_b", "kappa_c"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        if self.g < 0 or self.E < 0:
            raise ValueError("g and E must be nonnegative")

    @classmethod
    def on_optimal_curve(cls, delta_a, g=10.0, kappa=0.5, E=0.01, kappa_a=1.0):
        """Symmetric subharmonic modes with ``delta_b = delta_c = g**2 / (2 delta_a)``."""
        from .analytic import optimal_delta

        delta = optimal_delta(delta_a, g)
        return cls(delta_a=delta_a, delta_b=delta, delta_c=delta, g=g, E=E,
                   kappa_a=kappa_a, kappa_b=kappa, kappa_c=kappa)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def swapped_bc(self) -> "SystemParams":
        return replace(self, delta_b=self.delta_c, delta_c=self.delta_b,
                       kappa_b=self.kappa_c, kappa_c=self.kappa_b)

    def normalized(self) -> "SystemParams":
        """Every rate and detuning divided by ``kappa_a``."""
        k = self.kappa_a
        return SystemParams(**{name: value / k for name, value in asdict(self).items()})

    def as_dict(self) -> dict:
        return asdict(self)


def excitation_number(space: HilbertSpace):
    """``2 a^dag a + b^dag b + c^dag c``, conserved by the undriven Hamiltonian."""
    return add(scale(fock.number(space, "a"), 2),
               fock.number(space, "b"), fock.number(space, "c"))


def hamiltonian(space: HilbertSpace, p: SystemParams):
    a, b, c = (annihilation(space, m) for m in fock.MODES)
    ad, bd, cd = adjoint(a), adjoint(b), adjoint(c)
    down = compose(a, bd, cd)
    terms = [
        scale(fock.number(space, "a"), p.delta_a),
        scale(fock.number(space, "b"), p.delta_b),
        scale(fock.number(space, "c"), p.delta_c),
        scale(add(down, adjoint(down)), p.g),
        scale(add(ad, a), p.E),
    ]
    return add(*terms)


def non_hermitian_hamiltonian(space: HilbertSpace, p: SystemParams):
    """``H - (i/2) sum_x kappa_x x^dag x``."""
    loss = add(scale(fock.number(space, "a"), p.kappa_a),
               scale(fock.number(space, "b"), p.kappa_b),
               scale(fock.number(space, "c"), p.kappa_c))
    return add(hamiltonian(space, p), scale(loss, -0.5j))

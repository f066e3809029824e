"""Occupations and zero-delay correlation functions of a steady state."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from typing import Optional

import numpy as np

from . import fock
from .fock import HilbertSpace, adjoint, compose

UNDEFINED_OCCUPATION = 1e-18
IMAG_TOL = 1e-10

OCCUPATION_FIELDS = ("n_a", "n_b", "n_c", "n_D")
CORRELATION_FIELDS = ("g2_a", "g2_b", "g2_c", "g2_D", "g2_bc", "g2_ab", "g2_ac")
REPORT_FIELDS = OCCUPATION_FIELDS + CORRELATION_FIELDS


class ConsistencyError(RuntimeError):
    """An expectation value that must be real came out complex."""


@dataclass(frozen=True)
class CorrelationReport:
    """Observables at one parameter point.

    A field is ``None`` when it has no value; ``flags`` then says why:
    ``"undefined"`` (vanishing occupation in a ratio) or ``"unavailable"``
    (the engine does not compute it).
    """

    n_a: Optional[float] = None
    n_b: Optional[float] = None
    n_c: Optional[float] = None
    n_D: Optional[float] = None
    g2_a: Optional[float] = None
    g2_b: Optional[float] = None
    g2_c: Optional[float] = None
    g2_D: Optional[float] = None
    g2_bc: Optional[float] = None
    g2_ab: Optional[float] = None
    g2_ac: Optional[float] = None
    flags: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in REPORT_FIELDS:
            value = getattr(self, name)
            if value is None:
                self.flags.setdefault(name, "unavailable")
            elif not np.isfinite(value):
                raise ValueError(f"{name} must be finite or None, got {value!r}")

    def values(self) -> dict:
        return {name: getattr(self, name) for name in REPORT_FIELDS}

    def as_dict(self) -> dict:
        out = self.values()
        out["flags"] = dict(self.flags)
        return out

    @classmethod
    def from_values(cls, reasons: Optional[dict] = None, **values) -> "CorrelationReport":
        flags = {k: v for k, v in (reasons or {}).items() if values.get(k) is None}
        return cls(**values, flags=flags)


def _real(value: complex, what: str) -> float:
    if abs(value.imag) > IMAG_TOL * max(1.0, abs(value)):
        raise ConsistencyError(f"{what} has imaginary part {value.imag:.3g}")
    return float(value.real)


def expectation(rho: np.ndarray, op) -> complex:
    """``Tr(op @ rho)``."""
    rho = np.asarray(rho)
    if op.shape != rho.shape:
        raise ValueError(f"dimension mismatch: operator {op.shape}, rho {rho.shape}")
    return complex(op.multiply(rho.T).sum())


def pair_operator(space: HilbertSpace):
    """Pair annihilator ``b c``."""
    return compose(fock.annihilation(space, "b"), fock.annihilation(space, "c"))


def _ratio(num: float, *occupations: float) -> Optional[float]:
    if any(n < UNDEFINED_OCCUPATION for n in occupations):
        return None
    return num / float(np.prod(occupations))


def auto_g2(rho: np.ndarray, x) -> Optional[float]:
    """``<x^dag^2 x^2> / <x^dag x>^2``, or ``None`` when ``<x^dag x>`` vanishes."""
    xd = adjoint(x)
    n = _real(expectation(rho, compose(xd, x)), "<x^dag x>")
    num = _real(expectation(rho, compose(xd, xd, x, x)), "<x^dag^2 x^2>")
    return _ratio(num, n, n)


def cross_g2(rho: np.ndarray, x, y) -> Optional[float]:
    """``<x^dag x y^dag y> / (<x^dag x><y^dag y>)``, or ``None`` if either factor vanishes."""
    nx_op = compose(adjoint(x), x)
    ny_op = compose(adjoint(y), y)
    nx = _real(expectation(rho, nx_op), "<x^dag x>")
    ny = _real(expectation(rho, ny_op), "<y^dag y>")
    num = _real(expectation(rho, compose(nx_op, ny_op)), "<x^dag x y^dag y>")
    return _ratio(num, nx, ny)


@lru_cache(maxsize=8)
def _report_operators(space: HilbertSpace) -> dict:
    ops = {m: fock.annihilation(space, m) for m in fock.MODES}
    ops["D"] = pair_operator(space)
    num = {k: compose(adjoint(x), x) for k, x in ops.items()}
    pair2 = {k: compose(adjoint(x), adjoint(x), x, x) for k, x in ops.items()}
    cross = {xy: compose(num[xy[0]], num[xy[1]]) for xy in ("bc", "ab", "ac")}
    return {"num": num, "pair2": pair2, "cross": cross}


def report(rho: np.ndarray, space: HilbertSpace) -> CorrelationReport:
    """Every occupation and correlation for the steady state ``rho``."""
    ops = _report_operators(space)
    n = {k: _real(expectation(rho, op), f"n_{k}") for k, op in ops["num"].items()}
    values = {f"n_{k}": v for k, v in n.items()}
    for k, op in ops["pair2"].items():
        values[f"g2_{k}"] = _ratio(_real(expectation(rho, op), f"g2_{k}"), n[k], n[k])
    for xy, op in ops["cross"].items():
        values[f"g2_{xy}"] = _ratio(_real(expectation(rho, op), f"g2_{xy}"), n[xy[0]], n[xy[1]])
    reasons = {name: "undefined" for name in CORRELATION_FIELDS}
    return CorrelationReport.from_values(reasons, **values)

"""Photon-pair blockade in a driven nondegenerate optical parametric oscillator."""
__version__ = "0.1.0"

from .analytic import (DegenerateDenominator, DressedLevels, dressed_energies,
                       g2_on_optimal_curve, g2_pair_analytic, optimal_delta,
                       optimal_delta_a, pair_number_analytic, resonance_condition_check)
from .fock import HilbertSpace, ModeCutoffs, annihilation, build_space
from .liouvillian import dissipator, evolve, liouvillian
from .model import SystemParams, hamiltonian, non_hermitian_hamiltonian
from .observables import CorrelationReport, auto_g2, cross_g2, pair_operator, report
from .steady import DegenerateKernel, NonConvergence, residual, steady_state
from .weakdrive import observables_from_amplitudes, solve_amplitudes


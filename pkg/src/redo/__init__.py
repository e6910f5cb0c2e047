"""Rapid exponentiation using discrete operators.

Repeated propagators ``exp(-i w dt S)`` of a fixed Hermitian generator
with a bounded scalar coefficient are served from a one-time table of
precomputed unitaries indexed by the base-b digits of the coarse-grained
coefficient, turning each matrix exponential into at most a couple of
matrix multiplications.  The package bundles the table machinery, dense
baselines to check and race it against, a GRAPE pulse optimizer and a
driven-Ising-chain freezing simulator that both consume it, and a
benchmark CLI (``redo --help``).
"""

__version__ = "0.1.0"

from .freezing import (FreezeConfig, QSurface, bessel_j0, build_drive_table,
                       drive_coefficient, freezing_frequencies,
                       ising_hamiltonian, q_theory, simulate_q, sweep,
                       transverse_magnetization)
from .grape import (GrapeBenchmark, GrapeConfig, NumericalError,
                    OptimizationResult, benchmark_iteration, gradient,
                    init_controls, optimize, total_propagator)
from .linalg import (adjoint, expm_herm, expm_pade, expm_taylor,
                     expm_taylor_adaptive, frob_dist, gate_fidelity,
                     hermitian_defect, kron, matmul, state_fidelity, trace,
                     unitarity_defect)
from .seeding import derive_seed, rng
from .spins import (ControlSequence, DiracFrame, SpinSystem,
                    build_channel_tables, collective_op, control_hamiltonian,
                    dirac_x_operator, frame_operator, internal_hamiltonian,
                    phase_rotation, phase_rotation_diag, segment_propagator,
                    segment_propagator_exact, spin_op)
from .table import (CoarseGrainSpec, DigitVector, DiscreteOperatorTable,
                    assemble, build_table, coarse_grain_fidelity, cost_model,
                    decompose, decompose_batch, propagator_for)

__all__ = [name for name in dir() if not name.startswith("_")]

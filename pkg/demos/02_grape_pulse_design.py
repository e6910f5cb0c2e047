#!/usr/bin/env python3
"""Design a CNOT pulse with gradient ascent, then race the two backends.

The optimizer's inner loop evaluates one propagator per time segment per
iteration.  Serving those from a discrete-operator table instead of
exponentiating each segment's Hamiltonian leaves the optimization
trajectory unchanged (the drive amplitudes just snap to a 1 rad/s grid)
while cutting most of the per-iteration cost.
"""

import numpy as np

from redo import GrapeConfig, SpinSystem, benchmark_iteration, optimize

# -- a heteronuclear two-spin system: each spin has its own RF channel,
#    J coupling provides the entangling interaction
system = SpinSystem(
    2,
    offsets=[2 * np.pi * 100, -2 * np.pi * 80],      # rad/s
    j_couplings=np.array([[0.0, 1000.0], [1000.0, 0.0]]),  # Hz
    species=(1, 2),
)
cnot = np.eye(4, dtype=complex)
cnot[2:, 2:] = np.array([[0, 1], [1, 0]])

cfg = GrapeConfig(system=system, target=cnot, n_segments=100, dt=5e-6,
                  omega_max=4e4, seed=0, backend="redo",
                  max_iterations=5000, fidelity_goal=0.99)
result = optimize(cfg)
print(f"CNOT design: fidelity {result.final_fidelity:.4f} after "
      f"{len(result.iteration_seconds)} iterations ({result.stop_reason})")
print(f"matrix exponentials served from the table: "
      f"{result.exponentials_avoided}")
print(f"one-time table build: {result.table_build_seconds * 1e3:.1f} ms")

# -- same iterations through both backends, identical controls fed to each
bench = benchmark_iteration(cfg, n_iterations=25)
print(f"\nper-iteration medians over 25 identical iterations:")
print(f"  repeated Pade exponentials: {bench.t_pade * 1e3:.2f} ms")
print(f"  table products:             {bench.t_redo * 1e3:.2f} ms")
print(f"  speed-up x{bench.ratio:.2f}, fidelity traces agree to "
      f"{bench.max_trace_gap:.1e}")

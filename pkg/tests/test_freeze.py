import numpy as np
import pytest

from redo.freezing import (FreezeConfig, bessel_j0, build_drive_table,
                           drive_coefficient, freezing_frequencies,
                           ising_hamiltonian, q_theory, simulate_q, sweep)
from redo.seeding import derive_seed

H0 = 5 * np.pi


def series_j0(x, terms=30):
    """Truncated power series oracle sum (-1)^k (x/2)^(2k) / (k!)^2."""
    total = 0.0
    term = 1.0
    for k in range(terms):
        if k > 0:
            term *= -(x / 2) ** 2 / k ** 2
        total += term
    return total


def bisect_j0_root(lo, hi, tol=1e-12):
    """Bisection oracle for a root of the series J0."""
    flo = series_j0(lo)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if series_j0(mid) * flo > 0:
            lo = mid
            flo = series_j0(lo)
        else:
            hi = mid
    return (lo + hi) / 2


class TestIsingHamiltonian:
    def test_two_spin_entries(self):
        j = 3.0
        h = ising_hamiltonian(2, j)
        # aligned pairs at -J/2, anti-aligned at +J/2
        assert np.allclose(np.diag(h), [-j / 2, j / 2, j / 2, -j / 2], atol=0)
        assert np.allclose(h, np.diag(np.diag(h)), atol=0)

    def test_zero_coupling(self):
        assert np.array_equal(ising_hamiltonian(3, 0.0), np.zeros((8, 8)))

    def test_commutes_with_total_z(self):
        from redo.spins import spin_op

        h = ising_hamiltonian(3, 1.7)
        total_z = sum(spin_op(3, i, "z") for i in (1, 2, 3))
        assert np.linalg.norm(h @ total_z - total_z @ h) <= 1e-14

    def test_periodic_adds_wrap_bond(self):
        h_open = ising_hamiltonian(3, 1.0)
        h_ring = ising_hamiltonian(3, 1.0, periodic=True)
        assert not np.array_equal(h_open, h_ring)

    def test_single_spin_rejected(self):
        with pytest.raises(ValueError):
            ising_hamiltonian(1, 1.0)


class TestDriveCoefficient:
    def test_clean_drive_at_zero(self):
        assert drive_coefficient(0.0, 5.0, 0.0, 0.3) == 1.0

    def test_full_noise(self):
        assert drive_coefficient(1.2, 5.0, 1.0, -0.77) == -0.77

    def test_balanced_cancellation(self):
        assert drive_coefficient(0.0, 5.0, 0.5, -1.0) == 0.0

    def test_range_validation(self):
        with pytest.raises(ValueError):
            drive_coefficient(0.0, 5.0, 1.5, 0.0)
        with pytest.raises(ValueError):
            drive_coefficient(0.0, 5.0, 0.5, 2.0)


class TestBesselJ0:
    def test_at_zero(self):
        assert bessel_j0(0.0) == 1.0

    def test_at_one_vs_series(self):
        assert bessel_j0(1.0) == pytest.approx(0.7651976866, abs=1e-9)
        assert bessel_j0(1.0) == pytest.approx(series_j0(1.0), abs=1e-12)

    def test_first_root(self):
        root = bisect_j0_root(2.0, 3.0)
        assert root == pytest.approx(2.404826, abs=1e-6)
        assert abs(bessel_j0(2.404826)) <= 1e-6

    def test_against_series_small_args(self):
        for x in np.linspace(0.0, 8.0, 33):
            assert bessel_j0(x) == pytest.approx(series_j0(x, terms=40),
                                                 abs=1e-10)


class TestQTheory:
    def test_high_frequency_limit(self):
        assert q_theory(1e9, H0) == pytest.approx(0.5, abs=1e-8)

    def test_unity_at_first_root(self):
        root = bisect_j0_root(2.0, 3.0)
        assert q_theory(2 * H0 / root, H0) == pytest.approx(1.0, abs=1e-10)

    def test_quoted_frequency(self):
        # 2 h0 / 13.064 sits at the first Bessel root for h0 = 5 pi
        assert q_theory(13.064, H0) == pytest.approx(1.0, abs=1e-4)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            q_theory(0.0, H0)

    def test_freezing_frequencies(self):
        w = freezing_frequencies(H0, count=2)
        assert w[0] == pytest.approx(2 * H0 / 2.404826, rel=1e-6)
        assert w[1] == pytest.approx(2 * H0 / 5.520078, rel=1e-6)


def desk_config(**overrides):
    base = dict(omegas=[13.0], lambdas=[0.0], n_spins=3, h0=H0,
                j_coupling=H0 / 20, duration=20 * np.pi, n_time_points=400,
                seed=5)
    base.update(overrides)
    return FreezeConfig(**base)


class TestSimulateQ:
    def test_normalization_at_start(self):
        cfg = desk_config()
        _, series = simulate_q(13.0, 0.0, cfg, return_series=True)
        # the response starts at 1 by construction and stays bounded
        assert np.all(np.abs(series) <= 1 + 1e-9)

    def test_commuting_evolution_is_frozen(self):
        # J = 0 and lambda = 0: H commutes with the observable at all
        # times, so the response never moves
        cfg = desk_config(j_coupling=0.0)
        q, series = simulate_q(13.0, 0.0, cfg, return_series=True)
        assert abs(q - 1.0) <= 1e-10
        assert np.max(np.abs(series - 1.0)) <= 1e-10

    def test_backends_agree(self):
        cfg = desk_config(n_time_points=800)
        for lam in (0.0, 0.4):
            q_redo = simulate_q(9.0, lam, cfg, backend="redo", seed=77)
            q_pade = simulate_q(9.0, lam, cfg, backend="pade", seed=77)
            assert abs(q_redo - q_pade) <= 1e-3

    def test_trace_preserved(self):
        cfg = desk_config(n_time_points=300)
        table = build_drive_table(cfg)
        from redo.freezing import _CellSimulator
        from redo.seeding import rng

        sim = _CellSimulator(cfg, table)
        coeffs = sim.drive_values(7.0, 0.3, rng(3))
        u = sim.segment_unitaries(coeffs)
        rho = sim.m_op.copy()
        for s in range(coeffs.size):
            rho = u[s] @ rho @ u[s].conj().T
            assert abs(np.trace(rho)) <= 1e-10

    def test_accumulated_unitarity(self):
        from redo.linalg import unitarity_defect
        from redo.seeding import rng

        cfg = desk_config(n_time_points=2000)
        table = build_drive_table(cfg)
        from redo.freezing import _CellSimulator

        sim = _CellSimulator(cfg, table)
        coeffs = sim.drive_values(13.0, 0.25, rng(9))
        u = sim.segment_unitaries(coeffs)
        acc = np.eye(8, dtype=complex)
        for s in range(coeffs.size):
            acc = u[s] @ acc
        assert unitarity_defect(acc) <= 1e-8

    def test_freezing_peaks_near_bessel_roots(self):
        # reduced desk sweep; the acceptance suite runs the full grid
        omegas = np.linspace(4.8, 15.0, 35)
        cfg = desk_config(omegas=omegas, n_time_points=1500, backend="redo")
        surface = sweep(cfg)
        q = surface.q[:, 0]
        peaks = [omegas[i] for i in range(1, len(omegas) - 1)
                 if q[i] > q[i - 1] and q[i] >= q[i + 1]]
        grid_step = omegas[1] - omegas[0]
        for target in freezing_frequencies(H0, count=2):
            nearest = min(peaks, key=lambda p: abs(p - target))
            assert abs(nearest - target) <= 0.05 * target + grid_step


class TestSweep:
    def test_single_cell_matches_simulate_q(self):
        cfg = desk_config(omegas=[11.0], lambdas=[0.2])
        surface = sweep(cfg)
        table = build_drive_table(cfg)
        q = simulate_q(11.0, 0.2, cfg, table=table, seed=derive_seed(cfg.seed, 0, 0))
        assert surface.q[0, 0] == q

    def test_deterministic(self):
        cfg = desk_config(omegas=np.linspace(5, 15, 4),
                          lambdas=np.linspace(0, 1, 3), n_time_points=200)
        a = sweep(cfg)
        b = sweep(cfg)
        assert np.array_equal(a.q, b.q)

    def test_threaded_matches_serial(self):
        cfg = desk_config(omegas=np.linspace(5, 15, 4),
                          lambdas=np.linspace(0, 1, 3), n_time_points=200)
        serial = sweep(cfg, threads=1)
        threaded = sweep(cfg, threads=4)
        assert np.array_equal(serial.q, threaded.q)

    def test_noise_free_row_ignores_seed(self):
        cfg_a = desk_config(omegas=[9.0, 13.0], lambdas=[0.0],
                            n_time_points=300, seed=1)
        cfg_b = desk_config(omegas=[9.0, 13.0], lambdas=[0.0],
                            n_time_points=300, seed=999)
        assert np.array_equal(sweep(cfg_a).q, sweep(cfg_b).q)

    def test_lambda_zero_row_bitwise_reproducible(self):
        cfg = desk_config(omegas=[9.0], lambdas=[0.0, 0.5], n_time_points=300)
        surface = sweep(cfg)
        table = build_drive_table(cfg)
        lone = simulate_q(9.0, 0.0, cfg, table=table,
                          seed=derive_seed(cfg.seed, 0, 0))
        assert surface.q[0, 0] == lone

    def test_backend_equivalence_subgrid(self):
        base = dict(omegas=np.linspace(2, 24, 8), lambdas=np.linspace(0, 1, 3),
                    n_time_points=1000, seed=11)
        q = {}
        for backend in ("redo", "pade"):
            q[backend] = sweep(FreezeConfig(backend=backend, **base)).q
        assert np.max(np.abs(q["redo"] - q["pade"])) <= 1e-3

    def test_timing_fields(self):
        cfg = desk_config(omegas=[9.0, 11.0], lambdas=[0.1], n_time_points=200)
        surface = sweep(cfg)
        assert surface.total_seconds > 0
        assert surface.cell_seconds.shape == (2, 1)
        assert np.all(surface.cell_seconds > 0)
        assert surface.backend == "redo"


class TestConfigValidation:
    def test_lambda_range(self):
        with pytest.raises(ValueError):
            desk_config(lambdas=[1.5])

    def test_omega_positive(self):
        with pytest.raises(ValueError):
            desk_config(omegas=[0.0])

    def test_grain_spec_layout(self):
        cfg = desk_config()
        spec = cfg.grain_spec
        assert spec.base == 100 and (spec.low, spec.high) == (-2, -1)
        assert spec.epsilon == pytest.approx(1e-4)
        assert spec.signed

    def test_saturation_counted_at_unit_drive(self):
        # |c| = 1 rounds past the top grid value 0.9999 and clamps
        cfg = desk_config(n_time_points=100)
        table = build_drive_table(cfg)
        u = table.propagator_for(1.0)
        assert table.saturations == 1
        assert np.array_equal(np.asarray(u),
                              np.asarray(table.propagator_for(0.9999)))

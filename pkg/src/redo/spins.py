"""Spin-1/2 operators, NMR Hamiltonians and interaction-frame machinery.

Basis convention: spin 1 is the most significant Kronecker factor, so for
``n`` spins the computational basis index reads as the binary string
``m_1 m_2 ... m_n`` with 0 = up.  This ordering is fixed; all operators
and configuration loaders assume it.

Units: resonance offsets and drive amplitudes are angular frequencies
(rad/s); scalar (J) and dipolar (D) couplings are in Hz and enter the
internal Hamiltonian with explicit 2*pi factors.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .linalg import expm_herm, expm_pade, require_hermitian
from .table import build_table

_HALF_PAULI = {
    "x": 0.5 * np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": 0.5 * np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": 0.5 * np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
_I2 = np.eye(2, dtype=np.complex128)


def spin_op(n_spins: int, spin: int, axis: str) -> np.ndarray:
    """Angular-momentum component of one spin, e.g. I_{2x}.

    ``spin`` is 1-based; the result has dimension 2**n_spins.
    """
    if axis not in _HALF_PAULI:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    if not (1 <= spin <= n_spins):
        raise ValueError(f"spin index {spin} outside 1..{n_spins}")
    out = np.array([[1.0 + 0j]])
    for i in range(1, n_spins + 1):
        out = np.kron(out, _HALF_PAULI[axis] if i == spin else _I2)
    return out


@dataclass(eq=False)
class SpinSystem:
    """Static description of a coupled spin-1/2 system.

    ``offsets`` are per-spin resonance offsets (rad/s); ``j_couplings``
    and ``d_couplings`` are symmetric zero-diagonal matrices (Hz);
    ``species`` maps each spin to an RF channel label (spins sharing a
    label are driven together).
    """

    n_spins: int
    offsets: np.ndarray
    j_couplings: np.ndarray
    d_couplings: np.ndarray
    species: tuple

    def __init__(self, n_spins, offsets=None, j_couplings=None,
                 d_couplings=None, species=None):
        if n_spins < 1:
            raise ValueError("n_spins must be >= 1")
        self.n_spins = int(n_spins)
        self.offsets = _as_vector(offsets, self.n_spins, "offsets")
        self.j_couplings = _as_coupling(j_couplings, self.n_spins, "j_couplings")
        self.d_couplings = _as_coupling(d_couplings, self.n_spins, "d_couplings")
        if species is None:
            species = (1,) * self.n_spins
        species = tuple(int(s) for s in species)
        if len(species) != self.n_spins:
            raise ValueError("species must assign every spin to a channel")
        self.species = species

    @property
    def dim(self) -> int:
        return 2 ** self.n_spins

    @property
    def channels(self) -> tuple:
        """Channel labels, sorted; defines the channel axis everywhere."""
        return tuple(sorted(set(self.species)))

    def spins_of(self, channel) -> tuple:
        spins = tuple(i + 1 for i, s in enumerate(self.species) if s == channel)
        if not spins:
            raise ValueError(f"unknown channel {channel!r}")
        return spins

    @classmethod
    def from_dict(cls, cfg: dict) -> "SpinSystem":
        """Build from a configuration mapping.

        Expected keys: ``spins``, optional ``offsets`` (list, rad/s),
        optional ``j``/``d`` (upper-triangle row-major lists, Hz),
        optional ``species`` (channel label per spin).
        """
        n = int(cfg["spins"])
        return cls(
            n,
            offsets=cfg.get("offsets"),
            j_couplings=_from_upper(cfg.get("j"), n, "j"),
            d_couplings=_from_upper(cfg.get("d"), n, "d"),
            species=cfg.get("species"),
        )


def _as_vector(values, n, name):
    if values is None:
        return np.zeros(n)
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 1 and n > 1:
        v = np.full(n, float(v[0]))
    if v.size != n:
        raise ValueError(f"{name} must have one entry per spin")
    return v


def _as_coupling(values, n, name):
    if values is None:
        return np.zeros((n, n))
    m = np.asarray(values, dtype=np.float64)
    if m.shape != (n, n):
        raise ValueError(f"{name} must be an {n}x{n} matrix")
    if np.any(np.diag(m) != 0):
        raise ValueError(f"{name} must have a zero diagonal")
    if not np.allclose(m, m.T, atol=0, rtol=0):
        raise ValueError(f"{name} must be symmetric")
    return m


def _from_upper(values, n, name):
    if values is None:
        return None
    flat = list(values)
    expected = n * (n - 1) // 2
    if len(flat) != expected:
        raise ValueError(f"{name} upper triangle needs {expected} entries, got {len(flat)}")
    m = np.zeros((n, n))
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = float(flat[k])
            k += 1
    return m


def collective_op(system: SpinSystem, channel, axis: str) -> np.ndarray:
    """Collective spin operator of one channel, S_k = sum over its spins."""
    out = np.zeros((system.dim, system.dim), dtype=np.complex128)
    for spin in system.spins_of(channel):
        out += spin_op(system.n_spins, spin, axis)
    return out


def internal_hamiltonian(system: SpinSystem) -> np.ndarray:
    """Static Hamiltonian: offsets, scalar and dipolar couplings.

    H0 = -sum_i w_i I_iz + 2 pi sum_{i<j} J_ij I_i.I_j
         + 2 pi sum_{i<j} D_ij (3 I_iz I_jz - I_i.I_j)
    """
    n = system.n_spins
    d = system.dim
    h = np.zeros((d, d), dtype=np.complex128)
    iz = [spin_op(n, i, "z") for i in range(1, n + 1)]
    for i in range(n):
        if system.offsets[i] != 0.0:
            h -= system.offsets[i] * iz[i]
    need_xy = np.any(system.j_couplings) or np.any(system.d_couplings)
    if need_xy:
        ix = [spin_op(n, i, "x") for i in range(1, n + 1)]
        iy = [spin_op(n, i, "y") for i in range(1, n + 1)]
        for i in range(n):
            for j in range(i + 1, n):
                jij = system.j_couplings[i, j]
                dij = system.d_couplings[i, j]
                if jij == 0.0 and dij == 0.0:
                    continue
                dot = ix[i] @ ix[j] + iy[i] @ iy[j] + iz[i] @ iz[j]
                zz = iz[i] @ iz[j]
                h += 2 * np.pi * jij * dot
                h += 2 * np.pi * dij * (3 * zz - dot)
    return require_hermitian(h)


def frame_operator(system: SpinSystem, t: float) -> np.ndarray:
    """Interaction-frame unitary V(t) = exp(-i H0 t)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return expm_herm(-1j * t * internal_hamiltonian(system))


def dirac_x_operator(system: SpinSystem, channel, dt: float,
                     midpoint: bool = False) -> np.ndarray:
    """Collective X of a channel conjugated into the interaction frame.

    Returns V(t)^dag S_xk V(t) with t = dt (or dt/2 with ``midpoint``,
    for accuracy studies).  Hermitian with the same spectrum as S_xk.
    """
    if not (dt > 0):
        raise ValueError("dt must be positive")
    t = 0.5 * dt if midpoint else dt
    v = frame_operator(system, t)
    sx = collective_op(system, channel, "x")
    out = v.conj().T @ sx @ v
    return (out + out.conj().T) / 2


def z_diagonals(system: SpinSystem) -> np.ndarray:
    """Diagonals of the collective S_kz operators, one row per channel."""
    n = system.n_spins
    out = np.zeros((len(system.channels), system.dim))
    for k, ch in enumerate(system.channels):
        for spin in system.spins_of(ch):
            out[k] += np.real(np.diag(spin_op(n, spin, "z")))
    return out


def phase_rotation_diag(system: SpinSystem, phases) -> np.ndarray:
    """Diagonal of Z = exp(-i sum_k phi_k S_kz) as a vector.

    Every S_kz is diagonal in the computational basis, so Z is formed by
    scalar exponentiation of its diagonal -- never by a matrix exponential.
    ``phases`` is a sequence aligned with ``system.channels`` or a mapping
    from channel label to phase.
    """
    chans = system.channels
    if isinstance(phases, dict):
        vec = np.array([float(phases.get(ch, 0.0)) for ch in chans])
    else:
        vec = np.asarray(phases, dtype=np.float64).ravel()
        if vec.size != len(chans):
            raise ValueError(f"expected {len(chans)} phases, got {vec.size}")
    return np.exp(-1j * (vec @ z_diagonals(system)))


def phase_rotation(system: SpinSystem, phases) -> np.ndarray:
    """Z_n as a dense diagonal matrix."""
    return np.diag(phase_rotation_diag(system, phases))


def control_hamiltonian(system: SpinSystem, amplitudes, phases) -> np.ndarray:
    """One segment's drive Hamiltonian sum_k W_k (S_xk cos p_k + S_yk sin p_k)."""
    amplitudes = np.asarray(amplitudes, dtype=np.float64).ravel()
    phases = np.asarray(phases, dtype=np.float64).ravel()
    h = np.zeros((system.dim, system.dim), dtype=np.complex128)
    for k, ch in enumerate(system.channels):
        if amplitudes[k] == 0.0:
            continue
        sx = collective_op(system, ch, "x")
        sy = collective_op(system, ch, "y")
        h += amplitudes[k] * (np.cos(phases[k]) * sx + np.sin(phases[k]) * sy)
    return h


def segment_propagator_exact(system: SpinSystem, amplitudes, phases,
                             dt: float) -> np.ndarray:
    """Reference propagator exp(-i dt (H0 + Hn)) for one segment."""
    h = internal_hamiltonian(system) + control_hamiltonian(system, amplitudes, phases)
    return expm_pade(-1j * dt * h)


@dataclass
class ControlSequence:
    """Piecewise-constant drive: N segments x K channels of amplitude/phase."""

    dt: float
    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.atleast_2d(np.asarray(self.amplitudes, dtype=np.float64))
        self.phases = np.atleast_2d(np.asarray(self.phases, dtype=np.float64))
        if self.amplitudes.shape != self.phases.shape:
            raise ValueError("amplitude and phase arrays must share a shape")
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        if np.any(self.amplitudes < 0):
            raise ValueError("amplitudes must be non-negative")

    @property
    def n_segments(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_channels(self) -> int:
        return self.amplitudes.shape[1]

    def copy(self) -> "ControlSequence":
        return ControlSequence(self.dt, self.amplitudes.copy(), self.phases.copy())


class DiracFrame:
    """Precomputed machinery for factorized segment propagators.

    One segment's propagator is U_n = V(dt) Z_n (prod_k X_kn) Z_n^dag with
    X_kn = exp(-i W_kn dt S~_xk), where S~_xk is the channel's collective X
    in the interaction frame and Z_n the diagonal phase rotation.  The
    drive exponentials X_kn are the only part that depends on the
    amplitudes; they are evaluated either from a discrete-operator table
    or by direct matrix exponentiation, which is exactly the choice the
    ``backend`` switches select elsewhere in this package.
    """

    def __init__(self, system: SpinSystem, dt: float, midpoint: bool = False):
        if not (dt > 0):
            raise ValueError("dt must be positive")
        self.system = system
        self.dt = dt
        self.v = frame_operator(system, dt)
        self.channels = system.channels
        self.s_tilde = [dirac_x_operator(system, ch, dt, midpoint=midpoint)
                        for ch in self.channels]
        self.sx = np.stack([collective_op(system, ch, "x") for ch in self.channels])
        self.sy = np.stack([collective_op(system, ch, "y") for ch in self.channels])
        self.zdiag = z_diagonals(system)

    def check_tables(self, tables: dict):
        for k, ch in enumerate(self.channels):
            table = tables.get(ch)
            if table is None:
                raise ValueError(f"no operator table for channel {ch!r}")
            if table.dim != self.system.dim:
                raise ValueError("table dimension does not match the system")
            if np.max(np.abs(table.generator - self.s_tilde[k])) > 1e-9:
                raise ValueError(
                    f"table for channel {ch!r} was not built on its Dirac X operator"
                )

    def drive_exponentials(self, amplitudes: np.ndarray,
                           tables: dict | None = None) -> np.ndarray:
        """The per-segment product prod_k X_kn, shape (N, d, d)."""
        amps = np.atleast_2d(np.asarray(amplitudes, dtype=np.float64))
        n = amps.shape[0]
        x = None
        for k, ch in enumerate(self.channels):
            if tables is not None:
                xk = tables[ch].propagators_for(amps[:, k])
            else:
                xk = np.empty((n, self.system.dim, self.system.dim),
                              dtype=np.complex128)
                gen = self.s_tilde[k]
                for i in range(n):
                    xk[i] = expm_pade(-1j * amps[i, k] * self.dt * gen)
            x = xk if x is None else x @ xk
        return x

    def segment_propagators(self, amplitudes, phases,
                            tables: dict | None = None) -> np.ndarray:
        """All N segment propagators, shape (N, d, d)."""
        amps = np.atleast_2d(np.asarray(amplitudes, dtype=np.float64))
        phs = np.atleast_2d(np.asarray(phases, dtype=np.float64))
        x = self.drive_exponentials(amps, tables)
        zd = np.exp(-1j * (phs @ self.zdiag))
        sandwich = x * (zd[:, :, None] * zd[:, None, :].conj())
        return np.matmul(self.v, sandwich)

    def segment(self, amplitudes, phases, tables: dict | None = None) -> np.ndarray:
        return self.segment_propagators(
            np.atleast_2d(amplitudes), np.atleast_2d(phases), tables)[0]


def segment_propagator(system: SpinSystem, amplitudes, phases, tables: dict,
                       dt: float, midpoint: bool = False) -> np.ndarray:
    """One factorized segment propagator with table-served drive exponentials.

    Convenience wrapper that rebuilds the frame each call; loops should
    construct a :class:`DiracFrame` once and reuse it.
    """
    frame = DiracFrame(system, dt, midpoint=midpoint)
    frame.check_tables(tables)
    return frame.segment(amplitudes, phases, tables)


def build_channel_tables(system: SpinSystem, spec, dt: float | None = None,
                         midpoint: bool = False,
                         expm_backend="herm") -> tuple[dict, float]:
    """Build one discrete-operator table per channel on its Dirac X operator.

    Returns ``(tables, build_seconds)``; the build is a one-time cost and
    is always reported separately by the benchmarks.
    """
    t0 = time.perf_counter()
    tables = {}
    for ch in system.channels:
        gen = dirac_x_operator(system, ch, dt or spec.dt, midpoint=midpoint)
        tables[ch] = build_table(spec, gen, expm_backend=expm_backend)
    return tables, time.perf_counter() - t0

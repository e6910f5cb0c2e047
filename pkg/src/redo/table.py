"""Coarse-grained coefficient decomposition and precomputed operator tables.

The expensive step in propagating ``exp(-i w dt S)`` over many values of
the scalar coefficient ``w`` is the matrix exponential.  When ``w`` is
bounded and a precision ``eps`` is acceptable, ``w`` can be rounded to
the grid ``eps = b**l`` and written in base-``b`` digits::

    round(|w| / eps) = sum_{i=0..levels-1} c_i * b**i,   c_i in {0..b-1}

Each digit then selects one of ``(b-1) * levels`` unitaries

    u[j][c] = exp(-i c b**j dt S),   j = l..m,  c = 1..b-1,

computed once and stored, and the propagator for any ``w`` is the product
of at most ``levels`` table entries, i.e. at most ``m - l`` matrix
multiplications.  All entries share the generator ``S`` and therefore
commute, so the product equals ``exp(-i round(w) dt S)`` up to rounding.

Negative coefficients are served by the adjoint of the positive-value
product, which is exact and costs no extra storage.
"""

from __future__ import annotations

import hashlib
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, expm_pade, gate_fidelity, require_hermitian

_REL_TOL = 1e-12


@dataclass(frozen=True)
class CoarseGrainSpec:
    """Parameters of the digit grid.

    ``base`` is the digit radix, ``low``/``high`` the digit exponent range
    (grid step ``epsilon = base**low``, covered range up to
    ``base**(high+1)``), ``omega_max`` the largest coefficient magnitude
    the table must serve, ``dt`` the segment duration multiplying the
    generator, and ``signed`` whether negative coefficients are accepted.
    """

    base: int
    low: int
    high: int
    omega_max: float
    dt: float
    signed: bool = False
    epsilon: float = field(default=0.0)

    def __post_init__(self):
        if int(self.base) != self.base or self.base < 2:
            raise ValueError("base must be an integer >= 2")
        if int(self.low) != self.low or int(self.high) != self.high:
            raise ValueError("digit indices must be integers")
        if self.high < self.low:
            raise ValueError("high digit index must be >= low")
        if not (self.omega_max > 0):
            raise ValueError("omega_max must be positive")
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        step = float(self.base) ** self.low
        if self.epsilon == 0.0:
            object.__setattr__(self, "epsilon", step)
        elif abs(self.epsilon - step) > _REL_TOL * step:
            raise ValueError(
                f"epsilon={self.epsilon} is not base**low={step} within tolerance"
            )
        # Coverage: base**(high+1) must reach omega_max.  Equality is
        # allowed; magnitudes that round past the top grid value clamp
        # (see decompose).
        cover = float(self.base) ** (self.high + 1)
        if cover < self.omega_max * (1.0 - _REL_TOL):
            raise ValueError(
                f"base**(high+1)={cover} does not cover omega_max={self.omega_max}"
            )

    @classmethod
    def for_range(cls, base: int, epsilon: float, omega_max: float, dt: float,
                  signed: bool = False) -> "CoarseGrainSpec":
        """Derive the digit range from a precision and a coefficient bound."""
        if not (epsilon > 0):
            raise ValueError("epsilon must be positive")
        low = round(np.log(epsilon) / np.log(base))
        if abs(float(base) ** low - epsilon) > _REL_TOL * epsilon:
            raise ValueError(f"epsilon={epsilon} is not an integer power of base={base}")
        high = low
        while float(base) ** (high + 1) < omega_max * (1.0 - _REL_TOL):
            high += 1
        return cls(base=base, low=low, high=high, omega_max=omega_max,
                   dt=dt, signed=signed)

    @property
    def levels(self) -> int:
        return self.high - self.low + 1

    @property
    def grid_top(self) -> int:
        """Largest representable integer multiple of epsilon."""
        return self.base ** self.levels - 1

    def value_of(self, dv: "DigitVector") -> float:
        """Coefficient value a digit vector stands for."""
        q = 0
        for i, c in enumerate(dv.digits):
            q += c * self.base ** i
        return dv.sign * q * self.epsilon


@dataclass(frozen=True)
class DigitVector:
    """Sign and base-b digits of a coarse-grained coefficient.

    ``digits[i]`` is the digit at exponent ``low + i`` (least significant
    first).  ``saturated`` marks values that rounded past the top of the
    grid and were clamped to the all-(b-1) vector.
    """

    sign: int
    digits: tuple
    saturated: bool = False

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.digits)


def decompose(omega: float, spec: CoarseGrainSpec) -> DigitVector:
    """Round a coefficient to the grid and split it into base-b digits.

    Rounding is half-up on the quotient ``|omega| / epsilon``.  Raises for
    magnitudes beyond ``omega_max`` and for negative input when the spec
    is unsigned.
    """
    w = float(omega)
    if not np.isfinite(w):
        raise ValueError("non-finite coefficient")
    if w < 0 and not spec.signed:
        raise ValueError("negative coefficient but spec is unsigned")
    if abs(w) > spec.omega_max * (1.0 + _REL_TOL):
        raise ValueError(f"|omega|={abs(w)} exceeds covered range {spec.omega_max}")
    q = int(np.floor(abs(w) / spec.epsilon + 0.5))
    saturated = q > spec.grid_top
    if saturated:
        q = spec.grid_top
    sign = -1 if (w < 0 and q > 0) else 1
    b = spec.base
    digits = []
    for _ in range(spec.levels):
        digits.append(q % b)
        q //= b
    return DigitVector(sign=sign, digits=tuple(digits), saturated=saturated)


def decompose_batch(omegas: np.ndarray, spec: CoarseGrainSpec):
    """Vectorized decompose.

    Returns ``(signs, digits, saturated)`` with ``digits`` of shape
    ``(n, levels)``, least significant digit first.
    """
    w = np.asarray(omegas, dtype=np.float64)
    if not np.all(np.isfinite(w)):
        raise ValueError("non-finite coefficient")
    if not spec.signed and np.any(w < 0):
        raise ValueError("negative coefficient but spec is unsigned")
    if np.any(np.abs(w) > spec.omega_max * (1.0 + _REL_TOL)):
        raise ValueError("coefficient exceeds covered range")
    q = np.floor(np.abs(w) / spec.epsilon + 0.5).astype(np.int64)
    saturated = q > spec.grid_top
    q = np.minimum(q, spec.grid_top)
    signs = np.where((w < 0) & (q > 0), -1, 1).astype(np.int64)
    digits = np.empty((w.size, spec.levels), dtype=np.int64)
    for i in range(spec.levels):
        digits[:, i] = q % spec.base
        q //= spec.base
    return signs, digits, saturated


def cost_model(spec: CoarseGrainSpec):
    """(p, s): multiplications per propagator and stored operator count."""
    p = spec.high - spec.low
    s = (spec.base - 1) * spec.levels
    return p, s


class DiscreteOperatorTable:
    """The stored unitaries plus a memo cache of assembled products.

    ``ops[i, c]`` holds ``exp(-i c b**(low+i) dt S)`` for ``c >= 1``; the
    ``c = 0`` slot is the identity, kept only so vectorized gathers can
    index digits directly (it is not counted as a stored operator).

    The memo maps digit vectors to finished products; a repeated digit
    vector is served with zero matrix multiplications.  Lookups are
    lock-free (safe under the GIL); insertions take a lock, so concurrent
    ``assemble`` calls are safe and correctness never depends on a hit.
    Cached arrays are marked read-only.
    """

    def __init__(self, spec: CoarseGrainSpec, generator: np.ndarray,
                 ops: np.ndarray, memo_capacity: int | None = None):
        self.spec = spec
        self.generator = generator
        self._ops = ops
        self._memo = OrderedDict() if memo_capacity else {}
        self._memo_capacity = memo_capacity
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        self.matmuls = 0
        self.saturations = 0

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    @property
    def n_stored(self) -> int:
        """Number of stored non-identity operators, (b-1)(m-l+1)."""
        return (self.spec.base - 1) * self.spec.levels

    def operator(self, j: int, c: int) -> np.ndarray:
        """Stored unitary exp(-i c b**j dt S)."""
        spec = self.spec
        if not (spec.low <= j <= spec.high):
            raise ValueError(f"digit index {j} outside [{spec.low}, {spec.high}]")
        if not (1 <= c <= spec.base - 1):
            raise ValueError(f"digit value {c} outside [1, {spec.base - 1}]")
        return self._ops[j - spec.low, c]

    def reset_counters(self):
        self.hits = 0
        self.misses = 0
        self.matmuls = 0
        self.saturations = 0

    def _remember(self, key, value: np.ndarray) -> np.ndarray:
        value.flags.writeable = False
        self._memo[key] = value
        if self._memo_capacity and len(self._memo) > self._memo_capacity:
            self._memo.popitem(last=False)
        return value

    def assemble(self, dv: DigitVector) -> np.ndarray:
        """Product of the table entries selected by a digit vector.

        Identity factors are skipped; a negative sign returns the adjoint
        of the positive-sign product.  The result is cached; re-assembling
        the same digit vector performs no matrix multiplications.
        """
        if len(dv.digits) != self.spec.levels:
            raise ValueError("digit vector does not match table spec")
        key = (dv.sign, dv.digits)
        cached = self._memo.get(key)
        if cached is not None:
            self.hits += 1
            if self._memo_capacity:
                self._memo.move_to_end(key)
            return cached
        with self._lock:
            cached = self._memo.get(key)
            if cached is not None:
                self.hits += 1
                return cached
            self.misses += 1
            if dv.sign < 0:
                pos = self._positive_product(dv.digits)
                return self._remember(key, pos.conj().T.copy())
            return self._remember(key, self._positive_product(dv.digits))

    def _positive_product(self, digits: tuple) -> np.ndarray:
        poskey = (1, digits)
        cached = self._memo.get(poskey)
        if cached is not None:
            return cached
        factors = [self._ops[i, c] for i, c in enumerate(digits) if c != 0]
        if not factors:
            out = np.eye(self.dim, dtype=np.complex128)
        else:
            out = factors[0]
            for f in factors[1:]:
                out = out @ f
                self.matmuls += 1
            out = np.ascontiguousarray(out)
        return self._remember(poskey, out)

    def propagator_for(self, omega: float) -> np.ndarray:
        """exp(-i omega dt S) up to grid rounding, assembled from the table."""
        dv = decompose(omega, self.spec)
        if dv.saturated:
            self.saturations += 1
        return self.assemble(dv)

    def propagators_for(self, omegas: np.ndarray, chunk: int = 1024) -> np.ndarray:
        """Vectorized batch of propagators, shape (n, d, d).

        Decomposition, table gathers and the level products are batched;
        this path bypasses the memo (every input performs its ``m - l``
        multiplications) but issues only a handful of numpy calls per
        chunk, which is what the hot loops of the optimizer and the sweep
        want.
        """
        w = np.atleast_1d(np.asarray(omegas, dtype=np.float64))
        signs, digits, saturated = decompose_batch(w, self.spec)
        self.saturations += int(np.count_nonzero(saturated))
        d = self.dim
        out = np.empty((w.size, d, d), dtype=np.complex128)
        # numpy's stacked matmul bypasses BLAS for complex operands, which
        # loses badly above ~16x16; loop the slices there instead.
        slicewise = d > 16
        for start in range(0, w.size, chunk):
            sl = slice(start, min(start + chunk, w.size))
            if slicewise:
                block = out[sl]
                dg = digits[sl]
                for r in range(dg.shape[0]):
                    prod = self._ops[0][dg[r, 0]]
                    for i in range(1, self.spec.levels):
                        prod = prod @ self._ops[i][dg[r, i]]
                    block[r] = prod
            else:
                prod = self._ops[0][digits[sl, 0]]
                for i in range(1, self.spec.levels):
                    prod = prod @ self._ops[i][digits[sl, i]]
                out[sl] = prod
        neg = signs < 0
        if np.any(neg):
            out[neg] = out[neg].conj().transpose(0, 2, 1)
        return out

    def save(self, path):
        """Write spec, generator and operators with a version header and checksum."""
        spec = self.spec
        stored = np.ascontiguousarray(self._ops[:, 1:])
        header = (1, spec.base, spec.low, spec.high, spec.levels, self.dim)
        digest = _table_checksum(header, self.generator, stored)
        np.savez(
            path,
            format_version=np.int64(1),
            base=np.int64(spec.base),
            low=np.int64(spec.low),
            high=np.int64(spec.high),
            omega_max=np.float64(spec.omega_max),
            dt=np.float64(spec.dt),
            signed=np.bool_(spec.signed),
            generator=self.generator,
            operators=stored,
            checksum=np.str_(digest),
        )

    @classmethod
    def load(cls, path) -> "DiscreteOperatorTable":
        """Read a saved table, verifying version and checksum."""
        with np.load(path, allow_pickle=False) as data:
            version = int(data["format_version"])
            if version != 1:
                raise ValueError(f"unsupported table format version {version}")
            spec = CoarseGrainSpec(
                base=int(data["base"]),
                low=int(data["low"]),
                high=int(data["high"]),
                omega_max=float(data["omega_max"]),
                dt=float(data["dt"]),
                signed=bool(data["signed"]),
            )
            generator = np.ascontiguousarray(data["generator"])
            stored = np.ascontiguousarray(data["operators"])
            digest = str(data["checksum"])
        d = generator.shape[0]
        header = (1, spec.base, spec.low, spec.high, spec.levels, d)
        if _table_checksum(header, generator, stored) != digest:
            raise ValueError("table file is corrupt: checksum mismatch")
        if stored.shape != (spec.levels, spec.base - 1, d, d):
            raise ValueError("table file is corrupt: operator block has wrong shape")
        ops = np.empty((spec.levels, spec.base, d, d), dtype=np.complex128)
        ops[:, 0] = np.eye(d)
        ops[:, 1:] = stored
        return cls(spec, generator, ops)


def _table_checksum(header: tuple, generator: np.ndarray, stored: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(repr(header).encode())
    h.update(np.ascontiguousarray(generator).tobytes())
    h.update(np.ascontiguousarray(stored).tobytes())
    return h.hexdigest()


def build_table(spec: CoarseGrainSpec, generator, expm_backend="herm",
                memo_capacity: int | None = None) -> DiscreteOperatorTable:
    """One-time evaluation of the (b-1)(m-l+1) discrete operators.

    ``expm_backend`` may be ``"herm"`` (a single eigendecomposition of the
    generator, then each entry from its spectrum -- the default, since the
    generator is Hermitian), ``"pade"``, or any callable mapping a matrix
    ``-i c b**j dt S`` to its exponential.
    """
    s = require_hermitian(as_matrix(generator))
    d = s.shape[0]
    b = spec.base
    ops = np.empty((spec.levels, b, d, d), dtype=np.complex128)
    ops[:, 0] = np.eye(d)
    coeffs = np.arange(1, b, dtype=np.float64)
    if expm_backend == "herm":
        w, p = np.linalg.eigh(s)
        p_dag = p.conj().T
        for i in range(spec.levels):
            scale = float(b) ** (spec.low + i) * spec.dt
            phases = np.exp(-1j * np.outer(coeffs, scale * w))
            ops[i, 1:] = (p[None, :, :] * phases[:, None, :]) @ p_dag
    else:
        if expm_backend == "pade":
            backend = expm_pade
        elif callable(expm_backend):
            backend = expm_backend
        else:
            raise ValueError(f"unknown expm backend {expm_backend!r}")
        for i in range(spec.levels):
            scale = float(b) ** (spec.low + i) * spec.dt
            for c in range(1, b):
                ops[i, c] = backend(-1j * c * scale * s)
    return DiscreteOperatorTable(spec, s, ops, memo_capacity=memo_capacity)


def assemble(dv: DigitVector, table: DiscreteOperatorTable) -> np.ndarray:
    return table.assemble(dv)


def propagator_for(omega: float, table: DiscreteOperatorTable) -> np.ndarray:
    return table.propagator_for(omega)


def coarse_grain_fidelity(omega: float, table: DiscreteOperatorTable,
                          expm_backend=expm_pade) -> float:
    """Overlap |Tr(U_exact^dag U_table) / N|^2 of the assembled propagator
    against a directly exponentiated one."""
    exact = expm_backend(-1j * float(omega) * table.spec.dt * table.generator)
    return gate_fidelity(table.propagator_for(omega), exact)


import numpy as np
import pytest

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def random_hermitian(rng, dim, scale=1.0):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (a + a.conj().T) / 2
    return scale * h / np.linalg.norm(h)


def random_skew_hermitian(rng, dim, norm):
    """Random -iH with Frobenius norm exactly `norm`."""
    return -1j * random_hermitian(rng, dim, scale=norm)


def random_unitary(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def collective_x(n_spins):
    from redo.spins import spin_op

    return sum(spin_op(n_spins, i, "x") for i in range(1, n_spins + 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)

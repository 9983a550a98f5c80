import numpy as np
import pytest

# basis order shared by every matrix in these tests
BASIS = ("g1", "g2", "e1", "e2")

# the storage map: optical-pair state -> ground-pair state
STORAGE_MATRIX = np.array(
    [
        [-1, 0, 0, 0],
        [0, 0, -1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, -1],
    ],
    dtype=complex,
)

# pi rotations on (g2,e2), (g1,e2), (g1,e1); their palindrome product is
# STORAGE_MATRIX
ROT_G2E2 = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0]], dtype=complex
)
ROT_G1E2 = np.array(
    [[0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [-1, 0, 0, 0]], dtype=complex
)
ROT_G1E1 = np.array(
    [[0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1]], dtype=complex
)

# initial/final states of the storage example: populations 0.2/0.8 with
# coherence 0.4 on the optical pair, then on the ground pair
RHO_OPTICAL = np.zeros((4, 4), dtype=complex)
RHO_OPTICAL[0, 0] = 0.2
RHO_OPTICAL[2, 2] = 0.8
RHO_OPTICAL[0, 2] = RHO_OPTICAL[2, 0] = 0.4

RHO_GROUND = np.zeros((4, 4), dtype=complex)
RHO_GROUND[0, 0] = 0.2
RHO_GROUND[1, 1] = 0.8
RHO_GROUND[0, 1] = RHO_GROUND[1, 0] = 0.4


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def haar_unitary(n, rng):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def special_unitary(n, rng):
    u = haar_unitary(n, rng)
    return u / np.linalg.det(u) ** (1.0 / n)


def random_density(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def max_dev(a, b) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())


def dev_up_to_global_phase(a, b) -> float:
    """max-entry deviation minimized over a global phase on b."""
    a = np.asarray(a)
    b = np.asarray(b)
    k = np.argmax(np.abs(b))
    ratio = a.flat[k] / b.flat[k]
    phase = ratio / abs(ratio) if abs(ratio) > 0 else 1.0
    return float(np.abs(a - phase * b).max())

"""Density matrices, pure states, unitaries and exact algebra on them.

All values are immutable after construction (backing arrays are copied and
marked read-only) and validated against their defining invariants:

* DensityMatrix: Hermitian, unit trace, positive semidefinite.
* PureState: unit norm.
* UnitaryOperator: U U^dag = 1.

Tolerances are double-precision defaults; states produced by numerical
integration may be constructed with relaxed bounds (see `DensityMatrix`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, StateValidationError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_FLOOR = -1e-10
NORM_TOL = 1e-12
UNITARITY_TOL = 1e-12


def _as_complex_matrix(entries, name: str) -> np.ndarray:
    arr = np.array(entries, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise StateValidationError(f"{name} must be a square matrix, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A quantum state: Hermitian, unit-trace, positive-semidefinite matrix.

    Parameters
    ----------
    entries : array_like
        dim x dim complex matrix.
    hermiticity_tol, trace_tol, psd_floor : float, optional
        Validation bounds. The defaults are strict constructor bounds;
        integrators pass relaxed ones for states produced by time stepping.
    """

    entries: np.ndarray
    hermiticity_tol: float = field(default=HERMITICITY_TOL, repr=False)
    trace_tol: float = field(default=TRACE_TOL, repr=False)
    psd_floor: float = field(default=PSD_FLOOR, repr=False)

    def __post_init__(self):
        arr = _as_complex_matrix(self.entries, "DensityMatrix")
        object.__setattr__(self, "entries", arr)
        defect = np.abs(arr - arr.conj().T).max()
        if defect > self.hermiticity_tol:
            raise StateValidationError(f"not Hermitian: max defect {defect:.3e}")
        tr_err = abs(arr.trace() - 1.0)
        if tr_err > self.trace_tol:
            raise StateValidationError(f"trace differs from 1 by {tr_err:.3e}")
        lo = float(np.linalg.eigvalsh(arr).min())
        if lo < self.psd_floor:
            raise StateValidationError(f"not positive semidefinite: min eigenvalue {lo:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def purity(self) -> float:
        """tr(rho^2); equals 1 for pure states."""
        return float(np.real(np.trace(self.entries @ self.entries)))

    def population(self, i: int) -> float:
        return float(np.real(self.entries[i, i]))

    def coherence(self, i: int, j: int) -> complex:
        return complex(self.entries[i, j])


@dataclass(frozen=True, eq=False)
class PureState:
    """A normalized state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if arr.size < 1:
            raise StateValidationError("PureState needs at least one amplitude")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)
        err = abs(np.vdot(arr, arr).real - 1.0)
        if err > NORM_TOL:
            raise StateValidationError(f"squared norm differs from 1 by {err:.3e}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    """A unitary matrix, validated via max-entry norm of U U^dag - 1."""

    entries: np.ndarray

    def __post_init__(self):
        arr = _as_complex_matrix(self.entries, "UnitaryOperator")
        object.__setattr__(self, "entries", arr)
        defect = np.abs(arr @ arr.conj().T - np.eye(arr.shape[0])).max()
        if defect > UNITARITY_TOL:
            raise StateValidationError(f"not unitary: max defect {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def density_from_pure(psi: PureState) -> DensityMatrix:
    """Projector |psi><psi| of a normalized pure state (rank 1, trace 1)."""
    amp = psi.amplitudes
    return DensityMatrix(np.outer(amp, amp.conj()))


def apply_unitary(rho: DensityMatrix, unitary: UnitaryOperator) -> DensityMatrix:
    """Conjugate a state: U rho U^dag.

    Preserves trace, spectrum and purity. Raises `DimensionMismatchError`
    when dimensions disagree.
    """
    if rho.dim != unitary.dim:
        raise DimensionMismatchError(f"state dim {rho.dim} != unitary dim {unitary.dim}")
    u = unitary.entries
    out = u @ rho.entries @ u.conj().T
    # conjugation keeps the invariants up to roundoff; keep strict trace/
    # Hermiticity bounds but allow eigenvalue dust at the PSD floor
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out)


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Symmetric, in [0, 1], equal to |<psi|phi>|^2 when both states are pure.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(f"state dims differ: {rho.dim} != {sigma.dim}")
    w, v = np.linalg.eigh(rho.entries)
    # suppress eigenvalue dust of rank-deficient states: sqrt would blow
    # roundoff-sized eigenvalues up to sqrt(eps)-sized fidelity errors
    w = np.where(w > w.max() * 1e-14, w, 0.0)
    sqrt_rho = (v * np.sqrt(w)) @ v.conj().T
    inner = sqrt_rho @ sigma.entries @ sqrt_rho
    eigs = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    eigs = np.where(eigs > eigs.max() * 1e-14, eigs, 0.0)
    root = np.sqrt(eigs).sum()
    return float(min(max(root * root, 0.0), 1.0))

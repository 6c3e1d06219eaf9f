"""
Dense linear algebra for polarization-qubit pairs.

States live in C^4 with the fixed basis order (|HH>, |HV>, |VH>, |VV>);
the first factor is qubit A. Density matrices are plain ``numpy``
arrays of shape (4, 4); the constructors here validate them and return
read-only copies so they can be shared freely.
"""
from typing import NamedTuple

import numpy as np

from .errors import NumericError, ValidationError

NORM_TOL = 1e-12
PSD_TOL = 1e-9
HERMITIAN_TOL = 1e-10

H = np.array([1.0, 0.0], dtype=complex)
V = np.array([0.0, 1.0], dtype=complex)
D = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
A = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)
R = np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2)
L = np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2)

BASIS_LABELS = ("HH", "HV", "VH", "VV")


class Spectrum(NamedTuple):
    """Eigen-decomposition of a 4x4 Hermitian matrix.

    ``eigenvalues`` are sorted in descending order and ``eigenvectors[:, n]``
    is the unit eigenvector belonging to ``eigenvalues[n]``.
    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def ket(amplitudes, normalize=False):
    """Validate (or normalize) a vector of complex amplitudes.

    Raises ValidationError for non-finite entries or, unless ``normalize``
    is set, a squared norm away from 1.
    """
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    if not np.all(np.isfinite(psi)):
        raise ValidationError("amplitudes must be finite")
    norm2 = float(np.vdot(psi, psi).real)
    if normalize:
        if norm2 == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        psi = psi / np.sqrt(norm2)
    elif abs(norm2 - 1.0) > NORM_TOL:
        raise ValidationError(f"ket is not normalized (|psi|^2 = {norm2!r})")
    return _frozen(psi)


def tensor(a, b):
    """Kronecker product of two single-qubit kets, ordered as (HH, HV, VH, VV)."""
    a = ket(a)
    b = ket(b)
    if a.shape != (2,) or b.shape != (2,):
        raise ValidationError("tensor expects two single-qubit kets")
    return _frozen(np.kron(a, b))


def projector(psi):
    """|psi><psi| for a normalized ket."""
    psi = ket(psi)
    return _frozen(np.outer(psi, psi.conj()))


def check_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix entries must be finite")
    dev = np.max(np.abs(m - m.conj().T))
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian (max deviation {dev:.3g})")
    return m


def density_matrix(m):
    """Validate a two-qubit density matrix and return a read-only copy.

    Checks Hermiticity and unit trace to 1e-12 and positivity to -1e-9.
    Nothing is repaired: an unphysical matrix raises ValidationError
    (see :func:`optent.tomography.project_physical` for repairs).
    """
    m = check_hermitian(m, tol=NORM_TOL)
    tr = np.trace(m)
    if abs(tr - 1.0) > NORM_TOL:
        raise ValidationError(f"trace must be 1, got {tr.real:.15g}")
    lam_min = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
    if lam_min < -PSD_TOL:
        raise ValidationError(f"matrix is not positive semidefinite (min eigenvalue {lam_min:.3g})")
    return _frozen(m)


def pure_density(psi):
    return density_matrix(projector(psi))


def partial_transpose_A(rho):
    """Transpose on the first qubit: <ij|M|kl> = <kj|rho|il>."""
    m = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    return m.transpose(2, 1, 0, 3).reshape(4, 4)


def trace_norm(m):
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    m = check_hermitian(m)
    return float(np.sum(np.abs(np.linalg.eigvalsh(m))))


def negativity(rho):
    """Entanglement negativity ``||rho^T_A||_1 - 1`` (0 separable, 1 maximal)."""
    rho = density_matrix(rho)
    return trace_norm(partial_transpose_A(rho)) - 1.0


def _canonical_phase(v, tol=1e-10):
    """Rotate the global phase so the first non-negligible component is real positive."""
    idx = np.flatnonzero(np.abs(v) > tol)
    if idx.size == 0:
        return v
    c = v[idx[0]]
    return v * (abs(c) / c)


def eigendecompose(m, tie_tol=1e-10):
    """Eigen-decomposition of a 4x4 Hermitian matrix with deterministic ordering.

    Eigenvalues are descending. Eigenvectors have their first non-negligible
    component made real positive; eigenvalues equal within ``tie_tol`` are
    ordered lexicographically by their rounded eigenvector components.
    """
    m = check_hermitian(m)
    try:
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver did not converge: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise NumericError("eigensolver returned non-finite values")

    vecs = [_canonical_phase(v[:, n]) for n in range(len(w))]

    def key(n):
        rounded = np.round(vecs[n], 8)
        return (-np.round(w[n] / tie_tol) * tie_tol,
                tuple(-x for pair in zip(rounded.real, rounded.imag) for x in pair))

    order = sorted(range(len(w)), key=key)
    evals = np.array([w[n] for n in order])
    evecs = np.column_stack([vecs[n] for n in order])
    evals.flags.writeable = False
    evecs.flags.writeable = False
    return Spectrum(evals, evecs)


def _psd_sqrt(m, cutoff=1e-12):
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w = np.where(w > cutoff, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma):
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    rho = density_matrix(rho)
    sigma = density_matrix(sigma)
    s = _psd_sqrt(rho)
    inner = s @ sigma @ s
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    w = np.where(w > 1e-14, w, 0.0)
    return float(min(1.0, np.sum(np.sqrt(w)) ** 2))


HH = tensor(H, H)
HV = tensor(H, V)
VH = tensor(V, H)
VV = tensor(V, V)
PHI_PLUS = ket((HH + VV) / np.sqrt(2))
PHI_MINUS = ket((HH - VV) / np.sqrt(2))
IDENTITY4 = _frozen(np.eye(4))

"""
Local estimation theory for parametric two-qubit states.

Classical Fisher information of a measurement, symmetric logarithmic
derivatives (SLD), the quantum Fisher information (QFI) from the spectral
decomposition, the closed forms for the two model families, Jacobian
reparametrization and Cramer-Rao bounds.

Derivatives are central finite differences with step ``h`` (default 1e-6).
"""
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import core, models
from .errors import ContinuityError, DomainError, SingularModelError, ValidationError
from .models import ModelKind, ModelPoint

DEFAULT_STEP = 1e-6
CLUSTER_GAP = 1e-8
SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class InfoMatrix:
    """Classical or quantum Fisher information matrix."""
    entries: np.ndarray
    kind: str = "quantum"
    labels: tuple = ()

    def __post_init__(self):
        m = np.array(self.entries, dtype=float, ndmin=2)
        if m.shape[0] != m.shape[1]:
            raise ValidationError(f"information matrix must be square, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("information matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > 1e-10 * scale:
            raise ValidationError("information matrix is not symmetric")
        m = 0.5 * (m + m.T)
        if np.linalg.eigvalsh(m)[0] < -1e-9 * scale:
            raise ValidationError("information matrix is not positive semidefinite")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)
        if self.kind not in ("classical", "quantum"):
            raise ValidationError(f"kind must be 'classical' or 'quantum', got {self.kind!r}")
        labels = tuple(self.labels) or tuple(f"x{i}" for i in range(m.shape[0]))
        if len(labels) != m.shape[0] or len(set(labels)) != len(labels):
            raise ValidationError("labels must be unique and match the matrix size")
        object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        return self.entries.shape[0]

    def __getitem__(self, idx):
        return self.entries[idx]


@dataclass(frozen=True)
class StateFamily:
    """A statistical model ``params -> density matrix``.

    ``state_fn`` must be side-effect free and return a valid density matrix
    for every parameter vector within ``step`` of the points it is
    evaluated at.
    """
    state_fn: Callable[[np.ndarray], np.ndarray]
    labels: Sequence[str]
    step: float = DEFAULT_STEP
    kind: Optional[ModelKind] = None

    def __call__(self, params):
        return np.asarray(self.state_fn(np.asarray(params, dtype=float)), dtype=complex)

    def derivative(self, params, i):
        """Central finite difference of the state along parameter ``i``."""
        params = np.asarray(params, dtype=float)
        e = np.zeros_like(params)
        e[i] = self.step
        return (self(params + e) - self(params - e)) / (2.0 * self.step)


def model_family(kind, step=DEFAULT_STEP):
    """The (p, q) parametrization of a model family."""
    kind = ModelKind.parse(kind)
    return StateFamily(lambda x: models.model_state(kind, ModelPoint(x[0], x[1])),
                       labels=("p", "q"), step=step, kind=kind)


def model_family_p_epsilon(kind, step=DEFAULT_STEP):
    """The (p, negativity) parametrization, using the ``q <= 1/2`` branch."""
    kind = ModelKind.parse(kind)

    def state(x):
        q = models.epsilon_to_q(kind, x[0], x[1])
        return models.model_state(kind, ModelPoint(x[0], q))

    return StateFamily(state, labels=("p", "epsilon"), step=step, kind=kind)


def classical_fisher(probs, params, step=DEFAULT_STEP, labels=(), zero_tol=1e-12):
    """Fisher information ``sum_x d_i p(x) d_j p(x) / p(x)`` of a discrete model.

    ``probs`` maps a parameter vector to an outcome distribution. Outcomes
    with zero probability are skipped when their derivative also vanishes;
    otherwise the model is singular and SingularModelError is raised.
    """
    params = np.atleast_1d(np.asarray(params, dtype=float))
    n = params.size
    p0 = np.asarray(probs(params), dtype=float)
    grads = np.empty((n, p0.size))
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        grads[i] = (np.asarray(probs(params + e), dtype=float)
                    - np.asarray(probs(params - e), dtype=float)) / (2.0 * step)
    support = p0 > zero_tol
    dead = ~support & np.any(np.abs(grads) > 1e-6, axis=0)
    if np.any(dead):
        raise SingularModelError(f"outcomes {np.flatnonzero(dead).tolist()} have zero probability "
                                 "but nonzero derivative")
    g = grads[:, support]
    f = (g / p0[support]) @ g.T
    return InfoMatrix(f, kind="classical", labels=labels)


def sld(family, params, i, tol=SUPPORT_TOL):
    """Symmetric logarithmic derivative along parameter ``i``.

    ``L = 2 sum_{n,m} <n|d rho|m> / (p_n + p_m) |n><m|`` over eigenpairs with
    ``p_n + p_m > tol``; on the kernel of ``rho`` it is left at zero.
    """
    rho = family(params)
    spec = core.eigendecompose(rho)
    vecs = spec.eigenvectors
    lam = np.clip(spec.eigenvalues, 0.0, None)
    d_rho = vecs.conj().T @ family.derivative(params, i) @ vecs
    denom = lam[:, None] + lam[None, :]
    keep = denom > tol
    l_eig = np.zeros((4, 4), dtype=complex)
    l_eig[keep] = 2.0 * d_rho[keep] / denom[keep]
    return vecs @ l_eig @ vecs.conj().T


def sld_residual(family, params, i, tol=SUPPORT_TOL):
    """Max-abs residual of ``d rho = (L rho + rho L)/2`` outside the kernel-kernel block."""
    rho = family(params)
    ell = sld(family, params, i, tol)
    d_rho = family.derivative(params, i)
    spec = core.eigendecompose(rho)
    kern = spec.eigenvectors[:, spec.eigenvalues <= tol]
    p0 = kern @ kern.conj().T
    target = d_rho - p0 @ d_rho @ p0
    return float(np.max(np.abs(target - 0.5 * (ell @ rho + rho @ ell))))


def qfi_from_sld(family, params, tol=SUPPORT_TOL):
    """QFI as ``Tr[rho (L_i L_j + L_j L_i)/2]``."""
    params = np.asarray(params, dtype=float)
    rho = family(params)
    ls = [sld(family, params, i, tol) for i in range(params.size)]
    n = params.size
    h = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            h[i, j] = np.trace(rho @ (ls[i] @ ls[j] + ls[j] @ ls[i])).real / 2.0
    return InfoMatrix(h, kind="quantum", labels=family.labels)


def _clusters(evals, gap=CLUSTER_GAP):
    groups = [[0]]
    for n in range(1, len(evals)):
        if abs(evals[n - 1] - evals[n]) < gap:
            groups[-1].append(n)
        else:
            groups.append([n])
    return groups


def _track(rho_shift, projs, sizes):
    """Project ``rho_shift``'s eigenvectors onto the clusters of the central point.

    Returns per-cluster (eigenvalues, projector) at the shifted point.
    """
    w, v = np.linalg.eigh(0.5 * (rho_shift + rho_shift.conj().T))
    overlaps = np.array([[np.real(np.vdot(v[:, k], P @ v[:, k])) for P in projs]
                         for k in range(len(w))])
    assign = np.argmax(overlaps, axis=1)
    best = overlaps[np.arange(len(w)), assign]
    if np.any(best < 0.5) or np.any(np.bincount(assign, minlength=len(projs)) != sizes):
        raise ContinuityError("eigenvectors could not be matched across the finite-difference "
                              f"stencil (max overlaps {np.round(best, 3).tolist()}); "
                              "eigenvalues cross or the step is too large")
    out = []
    for a in range(len(projs)):
        cols = v[:, assign == a]
        out.append((np.sort(w[assign == a])[::-1], cols @ cols.conj().T))
    return out


def qfi(family, params, tol=SUPPORT_TOL, gap=CLUSTER_GAP):
    """QFI from eigenvalue and eigenvector derivatives.

    ``H_ij = sum_n d_i p_n d_j p_n / p_n
             + sum_{n,m} (p_n - p_m)^2/(p_n + p_m)
               * 2 Re <psi_n|d_i psi_m><d_j psi_m|psi_n>``

    Eigenvalues equal within ``gap`` are grouped and their eigenvector
    terms are evaluated through derivatives of the group projector, which
    are independent of the basis chosen inside a degenerate eigenspace.
    For a degenerate group the eigenvalue term becomes
    ``Re Tr[P d_i rho P d_j rho] / p``.
    """
    params = np.asarray(params, dtype=float)
    n = params.size
    rho = family(params)
    spec = core.eigendecompose(rho)
    evals = spec.eigenvalues
    vecs = spec.eigenvectors
    groups = _clusters(evals, gap)
    sizes = np.array([len(g) for g in groups])
    lam = np.array([max(0.0, float(np.mean(evals[g]))) for g in groups])
    projs = [vecs[:, g] @ vecs[:, g].conj().T for g in groups]

    # per-parameter derivatives of the group eigenvalues and projectors
    d_lam = np.zeros((n, len(groups)))
    d_proj = []
    d_rho = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = family.step
        plus = _track(family(params + e), projs, sizes)
        minus = _track(family(params - e), projs, sizes)
        for a in range(len(groups)):
            if sizes[a] == 1:
                d_lam[i, a] = (plus[a][0][0] - minus[a][0][0]) / (2.0 * family.step)
        d_proj.append([(plus[a][1] - minus[a][1]) / (2.0 * family.step) for a in range(len(groups))])
        d_rho.append(family.derivative(params, i))

    h = np.zeros((n, n))
    for a in range(len(groups)):
        if lam[a] <= tol:
            continue
        for i in range(n):
            for j in range(n):
                if sizes[a] == 1:
                    h[i, j] += d_lam[i, a] * d_lam[j, a] / lam[a]
                else:
                    pa = projs[a]
                    h[i, j] += np.trace(pa @ d_rho[i] @ pa @ d_rho[j]).real / lam[a]
    for a in range(len(groups)):
        for b in range(len(groups)):
            if a == b or lam[a] + lam[b] <= tol:
                continue
            w = (lam[a] - lam[b]) ** 2 / (lam[a] + lam[b])
            xs = [projs[a] @ d_proj[i][b] @ projs[b] for i in range(n)]
            for i in range(n):
                for j in range(n):
                    h[i, j] += w * 2.0 * np.trace(xs[i] @ xs[j].conj().T).real
    return InfoMatrix(0.5 * (h + h.T), kind="quantum", labels=family.labels)


def qfi_closed_form(kind, pt):
    """Diagonal QFI of a model family in its (p, q) parametrization.

    decoherence: ``diag(4q(1-q)/(1-p^2), 1/(q(1-q)))``
    Werner:      ``diag(3/(1+(2-3p)p), 2p^2/(q(1-q)(1+p)))``

    The Werner q-element reduces to the pure-state value ``1/(q(1-q))`` at
    ``p = 1``, as does the decoherence one.
    """
    kind = ModelKind.parse(kind)
    p, q = pt.p, pt.q
    qq = q * (1.0 - q)
    if kind is ModelKind.DECOHERENCE:
        if p >= 1.0:
            raise DomainError("H_pp diverges at p = 1 for the decoherence model")
        if qq == 0.0:
            raise DomainError("H_qq diverges at q in {0, 1}")
        h = np.diag([4.0 * qq / (1.0 - p * p), 1.0 / qq])
    else:
        denom = 1.0 + (2.0 - 3.0 * p) * p
        if denom <= 0.0:
            raise DomainError("H_pp diverges at p = 1 for the Werner model")
        if p == 0.0:
            h_qq = 0.0
        elif qq == 0.0:
            raise DomainError("H_qq diverges at q in {0, 1}")
        else:
            h_qq = 2.0 * p * p / (qq * (1.0 + p))
        h = np.diag([3.0 / denom, h_qq])
    return InfoMatrix(h, kind="quantum", labels=("p", "q"))


def reparametrize(info, jacobian, labels=()):
    """Transform an information matrix to new parameters: ``J^T H J``.

    ``jacobian[i, k]`` is the derivative of old parameter ``i`` with respect
    to new parameter ``k``.
    """
    j = np.asarray(jacobian, dtype=float)
    if j.shape != (info.n, info.n):
        raise ValidationError(f"jacobian must have shape {(info.n, info.n)}")
    if abs(np.linalg.det(j)) < 1e-14 * max(1.0, np.max(np.abs(j))) ** info.n:
        raise DomainError("jacobian is singular")
    return InfoMatrix(j.T @ info.entries @ j, kind=info.kind, labels=labels or info.labels)


def jacobian_p_epsilon(kind, pt):
    """d(p, q)/d(p, epsilon) at a model point, for use with :func:`reparametrize`."""
    kind = ModelKind.parse(kind)
    p, q = pt.p, pt.q
    g = np.sqrt(q * (1.0 - q))
    if g == 0.0 or models.model_negativity(kind, pt) <= 0.0:
        raise DomainError("negativity is not a smooth coordinate at this point")
    if kind is ModelKind.DECOHERENCE:
        de_dp, de_dq = 2.0 * g, p * (1.0 - 2.0 * q) / g
    else:
        de_dp, de_dq = 0.5 * (1.0 + 4.0 * g), p * (1.0 - 2.0 * q) / g
    if abs(de_dq) < 1e-12:
        raise DomainError("d epsilon / d q vanishes at q = 1/2; (p, epsilon) is singular there")
    forward = np.array([[1.0, 0.0], [de_dp, de_dq]])
    return np.linalg.inv(forward)


def qfi_p_epsilon(kind, p, epsilon):
    """QFI in the (p, negativity) parametrization via the Jacobian."""
    kind = ModelKind.parse(kind)
    q = models.epsilon_to_q(kind, p, epsilon)
    pt = ModelPoint(p, q)
    return reparametrize(qfi_closed_form(kind, pt), jacobian_p_epsilon(kind, pt),
                         labels=("p", "epsilon"))


def decoherence_inverse_qfi_p_epsilon(p, epsilon):
    """Closed-form inverse QFI of the decoherence model in (p, negativity)."""
    if epsilon <= 0.0:
        raise DomainError("inverse QFI in (p, epsilon) requires epsilon > 0")
    a = 1.0 - p * p
    return np.array([[p * p * a / epsilon ** 2, p * a / epsilon],
                     [p * a / epsilon, 1.0 - epsilon ** 2]])


def cramer_rao_bound(info, M=1):
    """Covariance lower bound ``F^{-1} / M`` for ``M`` repetitions."""
    if int(M) != M or M < 1:
        raise ValidationError("M must be a positive integer")
    f = info.entries if isinstance(info, InfoMatrix) else np.atleast_2d(np.asarray(info, float))
    if np.linalg.matrix_rank(f) < f.shape[0]:
        raise SingularModelError("information matrix is singular")
    return np.linalg.inv(f) / M


def epsilon_variance_bound(epsilon, M=1):
    """Single-parameter negativity bound ``(1 - epsilon^2)/M``.

    Exact for the decoherence model; for the Werner model it is the
    first-order form used for both families.
    """
    return (1.0 - np.asarray(epsilon, dtype=float) ** 2) / M

"""Quantum Fisher information matrix over a Lie-algebra basis.

For a pure state the QFIM is assembled from the image vectors ``G_mu |psi>``
only; no operator products are formed.  Mixed states go through symmetric
logarithmic derivatives computed in the eigenbasis of rho.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DensityMatrix
from .errors import NotNormalizedError, NumericalError, SpaceMismatchError
from .su_basis import as_dense

SYMMETRY_TOL = 1e-10
PSD_RTOL = 1e-8
DEGENERACY_RTOL = 1e-6
SUPPORT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Qfim:
    matrix: np.ndarray
    basis: object
    state_tag: str = ""

    def __post_init__(self):
        m = self.matrix
        scale = max(np.abs(m).max(initial=0.0), 1.0)
        if np.abs(m - m.T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise NumericalError("QFIM is not symmetric")
        w = np.linalg.eigvalsh(m)
        if len(w) and w[0] < -PSD_RTOL * max(w[-1], 1.0):
            raise NumericalError(f"QFIM is not positive semidefinite (min eig {w[0]:.3e})")


@dataclass(frozen=True, eq=False)
class QuantumGeometricTensor:
    matrix: np.ndarray
    basis: object

    @property
    def metric(self):
        """``4 Re Q``, which equals the pure-state QFIM."""
        return 4 * self.matrix.real

    @property
    def berry_curvature(self):
        return self.matrix.imag


def _check_state(psi, basis):
    if psi.space != basis.space:
        raise SpaceMismatchError("state and basis act on different spaces")
    norm = np.linalg.norm(psi.amplitudes)
    if abs(norm - 1.0) > 1e-10:
        raise NotNormalizedError(f"state norm {norm!r} differs from 1")


def image_vectors(psi, generators):
    """Rows ``G_mu |psi>`` stacked into an (m, D) array."""
    return np.array([g.apply(psi.amplitudes) for g in generators])


def _centered_gram(psi, generators):
    images = image_vectors(psi, generators)
    means = images @ psi.amplitudes.conj()
    return images.conj() @ images.T - np.outer(means.conj(), means)


def qgt(psi, basis):
    """``Q_{mu nu} = <G_mu psi|G_nu psi> - <G_mu><G_nu>``."""
    _check_state(psi, basis)
    return QuantumGeometricTensor(_centered_gram(psi, basis.generators), basis)


def qfim_pure(psi, basis, tag=""):
    _check_state(psi, basis)
    f = 4 * _centered_gram(psi, basis.generators).real
    return Qfim((f + f.T) / 2, basis, tag)


def qfi_along(psi, direction, basis, tol=1e-10):
    """QFI ``4 Var(sum_mu v_mu G_mu)`` for a unit coefficient vector ``v``."""
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > tol:
        raise ValueError(f"direction is not a unit vector (norm {np.linalg.norm(direction)!r})")
    f = qfim_pure(psi, basis).matrix
    return float(direction @ f @ direction)


@dataclass(frozen=True)
class SldSystem:
    """SLDs of ``rho`` for a list of generators, in the eigenbasis of rho."""

    populations: np.ndarray
    eigenbasis: np.ndarray
    slds: np.ndarray  # (m, D, D), eigenbasis representation

    def qfim(self):
        p = self.populations
        weights = p[:, None] + p[None, :]
        # F_ab = 1/2 Tr[rho {L_a, L_b}] = 1/2 sum_jk (p_j + p_k) L_a[j,k] L_b[k,j]
        f = 0.5 * np.einsum("ajk,jk,bkj->ab", self.slds, weights, self.slds).real
        return (f + f.T) / 2

    def uhlmann(self):
        p = self.populations
        diff = p[:, None] - p[None, :]
        # Tr[rho [L_a, L_b]] = sum_jk (p_j - p_k) L_a[j,k] L_b[k,j]
        t = np.einsum("ajk,jk,bkj->ab", self.slds, diff, self.slds)
        u = (-0.5j * t).real
        return (u - u.T) / 2


def sld_system(rho, generators, support_tol=SUPPORT_TOL):
    """Solve ``d_mu rho = (rho L + L rho)/2`` with ``d_mu rho = -i [G_mu, rho]``."""
    p, U = np.linalg.eigh(rho.matrix)
    p = np.clip(p, 0.0, None)
    weights = p[:, None] + p[None, :]
    inside = weights > support_tol
    gaps = p[None, :] - p[:, None]  # p_k - p_j
    slds = []
    for g in generators:
        gt = U.conj().T @ as_dense(g.matrix) @ U
        drho = -1j * gt * gaps
        L = np.zeros_like(drho)
        L[inside] = 2 * drho[inside] / weights[inside]
        slds.append(L)
    return SldSystem(p, U, np.array(slds))


def qfim_mixed(rho, basis, tag="", support_tol=SUPPORT_TOL):
    if not isinstance(rho, DensityMatrix):
        raise TypeError("qfim_mixed expects a DensityMatrix")
    if rho.space != basis.space:
        raise SpaceMismatchError("density matrix and basis act on different spaces")
    return Qfim(sld_system(rho, basis.generators, support_tol).qfim(), basis, tag)


@dataclass(frozen=True, eq=False)
class QfimEigen:
    eigenvalues: np.ndarray  # descending
    vectors: np.ndarray  # vectors[:, k] is the k-th eigenvector
    degeneracy_groups: tuple  # tuple of tuples of indices

    def group_of(self, k):
        for group in self.degeneracy_groups:
            if k in group:
                return group
        raise IndexError(k)


def _fix_sign(v):
    return v if v[np.argmax(np.abs(v))] >= 0 else -v


def degeneracy_groups(values, rtol=DEGENERACY_RTOL):
    """Partition descending ``values`` into runs closer than ``rtol * max(values[0], 1)``."""
    if len(values) == 0:
        return ()
    tol = rtol * max(values[0], 1.0)
    groups, current = [], [0]
    for k in range(1, len(values)):
        if abs(values[k - 1] - values[k]) <= tol:
            current.append(k)
        else:
            groups.append(tuple(current))
            current = [k]
    groups.append(tuple(current))
    return tuple(groups)


def diagonalize(q, degeneracy_rtol=DEGENERACY_RTOL):
    m = q.matrix if isinstance(q, Qfim) else np.asarray(q)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("QFIM eigendecomposition failed") from exc
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    v = np.column_stack([_fix_sign(v[:, k]) for k in range(v.shape[1])])
    return QfimEigen(w, v, degeneracy_groups(w, degeneracy_rtol))


def optimal_generator(eig, basis, which=1):
    """Operator ``sum_mu O^mu G_mu`` for the ``which``-th (1-based) eigenvector."""
    if not 1 <= which <= len(eig.eigenvalues):
        raise IndexError(f"rank {which} out of range")
    coeffs = eig.vectors[:, which - 1].copy()
    return basis.combination(coeffs, label=f"G{which}"), coeffs


@dataclass(frozen=True)
class Alignment:
    """Result of matching eigenvectors across consecutive time steps.

    ``order[k]`` is the index in the current (sorted) eigensystem matched to
    slot ``k`` of the previous one; ``vectors``/``eigenvalues`` are the current
    ones rearranged into the previous slots with signs applied.
    """

    order: np.ndarray
    signs: np.ndarray
    overlaps: np.ndarray
    vectors: np.ndarray
    eigenvalues: np.ndarray


def track_eigenvectors(previous, current):
    """Greedy maximum-overlap matching of ``current`` eigenvectors to ``previous`` ones."""
    P = previous.vectors
    C = current.vectors.copy()
    if P.shape != C.shape:
        raise ValueError("eigensystems have different sizes")
    m = C.shape[1]
    for group in current.degeneracy_groups:
        if len(group) < 2:
            continue
        idx = list(group)
        Vg = C[:, idx]
        proj = Vg.T @ P
        chosen = np.argsort(-np.linalg.norm(proj, axis=0), kind="stable")[: len(idx)]
        u, _, vh = np.linalg.svd(proj[:, chosen])
        C[:, idx] = Vg @ (u @ vh)
    raw = P.T @ C  # previous slot x current index
    absov = np.abs(raw)
    order = np.full(m, -1)
    free_prev, free_cur = set(range(m)), set(range(m))
    for _ in range(m):
        rows, cols = sorted(free_prev), sorted(free_cur)
        sub = absov[np.ix_(rows, cols)]
        r, c = np.unravel_index(np.argmax(sub), sub.shape)
        order[rows[r]] = cols[c]
        free_prev.remove(rows[r])
        free_cur.remove(cols[c])
    signs = np.array([1.0 if raw[k, order[k]] >= 0 else -1.0 for k in range(m)])
    vectors = C[:, order] * signs
    overlaps = np.array([vectors[:, k] @ P[:, k] for k in range(m)])
    return Alignment(order, signs, overlaps, vectors, current.eigenvalues[order])


def track_trajectory(eigs):
    """Continuity-tracked eigenvalues/eigenvectors along a list of ``QfimEigen``."""
    if not eigs:
        return [], []
    values = [eigs[0].eigenvalues.copy()]
    vectors = [eigs[0].vectors.copy()]
    prev = eigs[0]
    for eig in eigs[1:]:
        al = track_eigenvectors(prev, eig)
        values.append(al.eigenvalues)
        vectors.append(al.vectors)
        prev = al
    return values, vectors

"""Commuting sets of optimal generators and the Uhlmann curvature matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .dynamics import DensityMatrix, StateVector
from .errors import SpaceMismatchError
from .qfim import image_vectors, sld_system
from .su_basis import frobenius, trace_product

COMMUTE_TOL = 1e-8
SWEEP_SAMPLES = 64


def _commutator(a, b):
    return a @ b - b @ a


def commutator_norm(a, b):
    """Relative Frobenius commutator norm ``|[A,B]| / (|A| |B|)``."""
    if a.space != b.space:
        raise SpaceMismatchError("operators act on different spaces")
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        return 0.0
    return frobenius(_commutator(a.matrix, b.matrix)) / (na * nb)


def commutes(a, b, commute_tol=COMMUTE_TOL):
    """Return ``(flag, diagnostic)`` where diagnostic is the relative commutator norm."""
    diag = commutator_norm(a, b)
    return diag <= commute_tol, diag


def commuting_cliques(operators, commute_tol=COMMUTE_TOL):
    """Maximal cliques of the pairwise-commutation graph of ``operators``.

    Returns ``(cliques, diag)`` with cliques as sorted index tuples and
    ``diag`` the matrix of relative commutator norms.
    """
    m = len(operators)
    diag = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            diag[i, j] = diag[j, i] = commutator_norm(operators[i], operators[j])
    return _cliques(diag, range(m), commute_tol), diag


def _cliques(diag, nodes, tol):
    g = nx.Graph()
    nodes = list(nodes)
    g.add_nodes_from(nodes)
    for a in nodes:
        for b in nodes:
            if a < b and diag[a, b] <= tol:
                g.add_edge(a, b)
    return sorted(tuple(sorted(c)) for c in nx.find_cliques(g))


@dataclass(frozen=True, eq=False)
class CommutingSet:
    member_indices: tuple  # 0-based eigenvector ranks
    coefficients: np.ndarray  # rows are the member coefficient vectors
    generators: tuple
    qfis: np.ndarray
    max_pairwise_commutator: float
    rotation_angles: dict = field(default_factory=dict)
    exceeds_cartan: bool = False

    @property
    def total_qfi(self):
        return float(np.sum(self.qfis))

    @property
    def ranks(self):
        """1-based ranks, as used in reports."""
        return tuple(k + 1 for k in self.member_indices)


def _pair_grams(ops, a, b, others):
    """2x2 Gram matrices of ([A,O], [B,O]) for each O in ``others``."""
    grams = {}
    for o in others:
        ca = _commutator(ops[a].matrix, ops[o].matrix)
        cb = _commutator(ops[b].matrix, ops[o].matrix)
        g = np.array([
            [trace_product(ca.conj().T, ca).real, trace_product(ca.conj().T, cb).real],
            [trace_product(cb.conj().T, ca).real, trace_product(cb.conj().T, cb).real],
        ])
        grams[o] = g
    return grams


def _null_angle(gram):
    w, v = np.linalg.eigh(gram)
    c, s = v[:, 0]
    return math.atan2(s, c) % math.pi


def find_commuting_sets(eig, basis, min_qfi=None, commute_tol=COMMUTE_TOL,
                        sweep_samples=SWEEP_SAMPLES):
    """Maximal sets of mutually commuting QFIM eigen-generators.

    Candidates are eigenvectors with eigenvalue >= ``min_qfi`` (default: N).
    For every two-dimensional degenerate eigenspace among the candidates the
    pair is rotated by angles from a uniform ``sweep_samples`` grid on
    [0, pi) plus, for each other candidate, the exact angle minimizing the
    commutator with it.  Sets are returned by total QFI, descending.
    """
    if min_qfi is None:
        min_qfi = basis.N
    values = eig.eigenvalues
    cands = [k for k in range(len(values)) if values[k] >= min_qfi]
    if not cands:
        return []
    vectors = eig.vectors.copy()
    ops = {k: basis.combination(vectors[:, k], label=f"G{k + 1}") for k in cands}
    norms = {k: ops[k].norm() for k in cands}
    m = len(values)
    base = np.full((m, m), np.inf)
    for i in cands:
        base[i, i] = 0.0
        for j in cands:
            if i < j:
                base[i, j] = base[j, i] = commutator_norm(ops[i], ops[j])

    # (diag matrix, {rank: (angle, partner)}) for each variant of the candidate vectors
    variants = [(base, {})]
    for group in eig.degeneracy_groups:
        pair = [k for k in group if k in ops]
        if len(pair) != 2 or len(group) != 2:
            continue
        a, b = pair
        others = [k for k in cands if k not in pair]
        grams = _pair_grams(ops, a, b, others)
        angles = {math.pi * s / sweep_samples for s in range(sweep_samples)}
        for o in others:
            angles.add(_null_angle(grams[o]))
            angles.add((_null_angle(grams[o]) + math.pi / 2) % math.pi)
        for theta in sorted(angles):
            c, s = math.cos(theta), math.sin(theta)
            diag = base.copy()
            for o in others:
                g = grams[o]
                ra = math.sqrt(max(np.array([c, s]) @ g @ np.array([c, s]), 0.0))
                rb = math.sqrt(max(np.array([-s, c]) @ g @ np.array([-s, c]), 0.0))
                diag[a, o] = diag[o, a] = ra / (norms[a] * norms[o])
                diag[b, o] = diag[o, b] = rb / (norms[b] * norms[o])
            variants.append((diag, {a: (theta, b, 1), b: (theta, a, 2)}))

    best = {}
    for diag, rot in variants:
        for clique in _cliques(diag, cands, commute_tol):
            worst = max((diag[i, j] for i in clique for j in clique if i < j), default=0.0)
            key = clique
            if key not in best or worst < best[key][0]:
                best[key] = (worst, rot)

    keys = [k for k in best if not any(set(k) < set(other) for other in best)]
    out = []
    for key in keys:
        _, rot = best[key]
        coeffs, angles = [], {}
        for k in key:
            v = vectors[:, k]
            if k in rot:
                theta, partner, slot = rot[k]
                c, s = math.cos(theta), math.sin(theta)
                w = vectors[:, partner]
                v = c * v + s * w if slot == 1 else c * v - s * w
                angles[k] = theta
            coeffs.append(v)
        coeffs = np.array(coeffs)
        gens = tuple(basis.combination(v, label=f"G{k + 1}") for v, k in zip(coeffs, key))
        worst = max((commutator_norm(gens[i], gens[j])
                     for i in range(len(gens)) for j in range(i + 1, len(gens))), default=0.0)
        out.append(CommutingSet(
            member_indices=key, coefficients=coeffs, generators=gens,
            qfis=values[list(key)], max_pairwise_commutator=worst,
            rotation_angles=angles, exceeds_cartan=len(key) > basis.n - 1,
        ))
    out.sort(key=lambda cs: (-cs.total_qfi, cs.member_indices))
    # a rotated member of a degenerate pair can coincide with its rotated partner
    seen, unique = set(), []
    for cs in out:
        sig = frozenset(tuple(np.round(_canonical_sign(v), 8)) for v in cs.coefficients)
        if sig not in seen:
            seen.add(sig)
            unique.append(cs)
    return unique


def _canonical_sign(v):
    return v if v[np.argmax(np.abs(v))] >= 0 else -v


@dataclass(frozen=True, eq=False)
class UhlmannMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if np.abs(m + m.T).max(initial=0.0) > 1e-10 * max(np.abs(m).max(initial=0.0), 1.0):
            raise ValueError("Uhlmann matrix is not antisymmetric")


def uhlmann_curvature(state, generators):
    """``U_ab = -i Tr[rho [L_a, L_b]] / 2``.

    Pure states use ``L = 2 d rho``, which reduces to ``4 Im`` of the
    centered overlap matrix of the image vectors ``G_a |psi>``.
    """
    for g in generators:
        if g.space != state.space:
            raise SpaceMismatchError("generator and state act on different spaces")
    if isinstance(state, StateVector):
        images = image_vectors(state, generators)
        means = images @ state.amplitudes.conj()
        q = images.conj() @ images.T - np.outer(means.conj(), means)
        u = 4 * q.imag
    elif isinstance(state, DensityMatrix):
        u = sld_system(state, generators).uhlmann()
    else:
        raise TypeError("state must be a StateVector or DensityMatrix")
    return UhlmannMatrix((u - u.T) / 2)


__all__ = [
    "commutator_norm", "commutes", "commuting_cliques", "CommutingSet",
    "find_commuting_sets", "UhlmannMatrix", "uhlmann_curvature",
]

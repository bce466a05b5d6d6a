"""Unitary connections between equal-spectrum generators.

Solves ``i [R, G] = Z`` for the rotation generator R through the vectorized
superoperator ``I (x) G^T - G (x) I`` and its Moore-Penrose pseudoinverse,
then checks how well ``U_c = exp(-i R pi/2)`` maps G onto Z.

Vectorization is row-major: ``vec(X)[a*D + b] = X[a, b]``, under which
``(I (x) G^T - G (x) I) vec(R) == vec([R, G])``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize as opt
import scipy.sparse.linalg as spla

from .errors import NumericalError, SpaceMismatchError, SpectrumMismatchError
from .su_basis import HermitianOperator, as_dense, decompose_operator, hermitize

DENSE_MAX_DIM = 64
RANK_RTOL = 1e-10
SPECTRUM_TOL = 1e-8
CONNECTED_TOL = 1e-6


def spectra_match(g, z, tol=SPECTRUM_TOL):
    """Sorted spectra agree elementwise within ``tol * max|eig|``."""
    if g.matrix.shape != z.matrix.shape:
        raise SpaceMismatchError("operators have different dimensions")
    sg, sz = g.spectrum(), z.spectrum()
    scale = max(np.abs(sg).max(initial=0.0), np.abs(sz).max(initial=0.0), 1e-300)
    return bool(np.all(np.abs(sg - sz) <= tol * scale))


def vectorize(op):
    return np.asarray(as_dense(op)).reshape(-1).copy()


def devectorize(vec):
    vec = np.asarray(vec)
    D = math.isqrt(vec.size)
    if D * D != vec.size:
        raise ValueError(f"vector length {vec.size} is not a perfect square")
    return vec.reshape(D, D).copy()


def commutator_superoperator(g):
    """Dense ``I (x) G^T - G (x) I``; maps vec(R) to vec([R, G])."""
    g = as_dense(g)
    eye = np.eye(g.shape[0])
    return np.kron(eye, g.T) - np.kron(g, eye)


def _svd(m):
    try:
        return np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD of {m.shape} matrix failed") from exc


def pseudoinverse(m, rank_rtol=RANK_RTOL, return_rank=False):
    """Moore-Penrose pseudoinverse via the SVD.

    Singular values below ``rank_rtol * sigma_max`` are treated as zero.
    """
    m = np.asarray(m)
    if m.size == 0:
        return (m.conj().T.copy(), 0) if return_rank else m.conj().T.copy()
    u, s, vh = _svd(m)
    cutoff = rank_rtol * (s[0] if len(s) else 0.0)
    keep = s > cutoff
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    pinv = (vh.conj().T[:, : len(s)] * inv) @ u.conj().T[: len(s), :]
    return (pinv, int(keep.sum())) if return_rank else pinv


def penrose_residuals(a, a_plus):
    """Relative residuals of the four Penrose conditions."""
    def rel(x, ref):
        return float(np.linalg.norm(x) / max(np.linalg.norm(ref), 1e-300))

    aa = a @ a_plus
    pa = a_plus @ a
    return (
        rel(aa @ a - a, a),
        rel(pa @ a_plus - a_plus, a_plus) if np.linalg.norm(a_plus) else 0.0,
        rel(aa.conj().T - aa, aa) if np.linalg.norm(aa) else 0.0,
        rel(pa.conj().T - pa, pa) if np.linalg.norm(pa) else 0.0,
    )


def _solve_dense(g, z, rank_rtol):
    sup = 1j * commutator_superoperator(g)
    pinv, rank = pseudoinverse(sup, rank_rtol, return_rank=True)
    return devectorize(pinv @ vectorize(z)), rank


def _solve_lsqr(g, z, tol=1e-14):
    g = as_dense(g)
    D = g.shape[0]

    def matvec(v):
        r = v.reshape(D, D)
        return (1j * (r @ g - g @ r)).reshape(-1)

    def rmatvec(v):
        y = v.reshape(D, D)
        return (-1j * (y @ g - g @ y)).reshape(-1)

    op = spla.LinearOperator((D * D, D * D), matvec=matvec, rmatvec=rmatvec, dtype=complex)
    sol = spla.lsqr(op, vectorize(z).astype(complex), atol=tol, btol=tol, iter_lim=20 * D)
    return devectorize(sol[0]), None


def connection_mismatch(r, g, z):
    """``|U^dag G U - Z|_F / |Z|_F`` with ``U = exp(-i R pi/2)``."""
    return _OrbitProbe(r, g, z)(math.pi / 2)


class _OrbitProbe:
    """Evaluates the mismatch of ``exp(-i theta R)`` cheaply in R's eigenbasis."""

    def __init__(self, r, g, z):
        w, v = np.linalg.eigh(as_dense(r))
        self.w = w
        self.v = v
        self.g = v.conj().T @ as_dense(g) @ v
        self.z = v.conj().T @ as_dense(z) @ v
        self.znorm = max(np.linalg.norm(self.z), 1e-300)
        self.diff = w[:, None] - w[None, :]

    def __call__(self, theta):
        rotated = self.g * np.exp(1j * theta * self.diff)
        return float(np.linalg.norm(rotated - self.z) / self.znorm)

    def unitary(self, theta):
        return (self.v * np.exp(-1j * theta * self.w)) @ self.v.conj().T


def _line_search(probe, samples=2048):
    """Angle theta minimizing the mismatch of ``exp(-i theta R)`` over one period."""
    gaps = np.abs(probe.diff[np.abs(probe.diff) > 1e-12])
    if gaps.size == 0:
        return math.pi / 2
    period = 2 * math.pi / gaps.min()
    grid = np.linspace(0.0, period, samples + 1)
    vals = [probe(t) for t in grid]
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, samples)]
    res = opt.minimize_scalar(probe, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14 * max(period, 1.0)})
    return float(res.x) if res.fun <= vals[k] else float(grid[k])


@dataclass(frozen=True, eq=False)
class ConnectionSolution:
    """Rotation generator R with ``U_c = exp(-i R pi/2)`` and diagnostics.

    ``sylvester_operator`` is the Hermitized minimum-norm solution of
    ``i[R, G] = Z``; ``r_operator`` is that operator rescaled by ``scale`` so
    that the pi/2 rotation lands as close to Z as the orbit allows.
    """

    r_operator: HermitianOperator
    r_coefficients: object
    sylvester_residual: float
    connection_fidelity: float
    sylvester_operator: HermitianOperator
    raw_fidelity: float
    scale: float
    discarded_antihermitian: float
    rank: object
    method: str

    @property
    def connected(self):
        return self.connection_fidelity <= CONNECTED_TOL

    def unitary(self):
        return _unitary(self.r_operator)


def _unitary(r):
    w, v = np.linalg.eigh(r.dense())
    return (v * np.exp(-1j * math.pi / 2 * w)) @ v.conj().T


def solve_connection(g, z, basis, dense_max_dim=DENSE_MAX_DIM, rank_rtol=RANK_RTOL,
                     spectrum_tol=SPECTRUM_TOL, refine=True):
    """Generator R of the unitary connection taking G to Z.

    Raises ``SpectrumMismatchError`` unless G and Z share a spectrum.  With
    ``refine`` the solved R is rescaled along its own one-parameter orbit.
    """
    if g.space != z.space or g.space != basis.space:
        raise SpaceMismatchError("G, Z and basis must act on the same space")
    if not spectra_match(g, z, spectrum_tol):
        raise SpectrumMismatchError("G and Z have different spectra; no unitary connection",
                                    g.spectrum(), z.spectrum())
    D = g.space.dim
    gd, zd = g.dense(), z.dense()
    if D <= dense_max_dim:
        raw, rank = _solve_dense(gd, zd, rank_rtol)
        method = "dense-pinv"
    else:
        raw, rank = _solve_lsqr(gd, zd)
        method = "lsqr"
    herm = hermitize(raw)
    discarded = float(np.linalg.norm(raw - herm))
    sylvester = HermitianOperator(herm, "R_sylvester", g.space)
    residual = float(np.linalg.norm(1j * (herm @ gd - gd @ herm) - zd))

    probe = _OrbitProbe(herm, gd, zd)
    raw_fid = probe(math.pi / 2)
    scale = 1.0
    if refine and np.linalg.norm(herm) > 0:
        theta = _line_search(probe)
        if probe(theta) < raw_fid:
            scale = theta / (math.pi / 2)
    r_op = HermitianOperator(herm * scale, "R", g.space)
    fid = probe(scale * math.pi / 2)
    return ConnectionSolution(
        r_operator=r_op,
        r_coefficients=decompose_operator(basis, r_op),
        sylvester_residual=residual,
        connection_fidelity=fid,
        sylvester_operator=sylvester,
        raw_fidelity=raw_fid,
        scale=scale,
        discarded_antihermitian=discarded,
        rank=rank,
        method=method,
    )

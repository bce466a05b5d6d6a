"""Probe states, twisting Hamiltonians and exact unitary evolution.

Units: hbar = 1.  The coupling ``chi`` multiplies the Hamiltonian, so times
given as ``chi * t`` make results independent of ``chi``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .errors import NotNormalizedError, NumericalError, SpaceMismatchError
from .su_basis import (
    HermitianOperator,
    as_dense,
    build_lie_basis,
    su4_named_operators,
)

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    space: object

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.dim,):
            raise SpaceMismatchError(
                f"state has shape {amps.shape}, space has dim {self.space.dim}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise NotNormalizedError(f"state norm {norm!r} differs from 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes, space):
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(amps / np.linalg.norm(amps), space)

    def expectation(self, op):
        return op.expectation(self.amplitudes)

    def variance(self, op):
        g = op.apply(self.amplitudes)
        mean = np.vdot(self.amplitudes, g).real
        return float(np.vdot(g, g).real - mean**2)

    def overlap(self, other):
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density_matrix(self):
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on a symmetric space."""

    matrix: np.ndarray
    space: object

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        D = self.space.dim
        if m.shape != (D, D):
            raise SpaceMismatchError(f"density matrix shape {m.shape} != ({D}, {D})")
        if np.linalg.norm(m - m.conj().T) > 1e-12 * max(np.linalg.norm(m), 1.0):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise NotNormalizedError(f"density matrix trace {np.trace(m).real!r} != 1")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_state(cls, psi):
        return cls(psi.density_matrix(), psi.space)

    @classmethod
    def depolarized(cls, psi, eps):
        """``(1 - eps) |psi><psi| + eps I / D``."""
        D = psi.space.dim
        return cls((1 - eps) * psi.density_matrix() + eps * np.eye(D) / D, psi.space)


def coherent_spin_state(space, theta, phi):
    """Two-mode coherent state ``[cos(theta/2) u^dag + sin(theta/2) e^{i phi} d^dag]^N |0>``."""
    if space.n != 2:
        raise ValueError(f"coherent spin state needs n=2, got n={space.n}")
    N = space.N
    c, s = math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)
    amps = np.array([math.sqrt(math.comb(N, k)) * c**k * s ** (N - k)
                     for k, _ in space.states], dtype=complex)
    # renormalize against rounding only
    return StateVector(amps / np.linalg.norm(amps), space)


def basis_state(space, occupation):
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.index[tuple(occupation)]] = 1.0
    return StateVector(amps, space)


def su4_initial_state(space):
    """``exp(-i pi Jy / sqrt2)`` applied to all particles in mode u."""
    if space.n != 4:
        raise ValueError(f"SU(4) initial state needs n=4, got n={space.n}")
    jy = su4_named_operators(space)["Jy"]
    psi = basis_state(space, (space.N, 0, 0, 0)).amplitudes
    out = la.expm(-1j * math.pi / math.sqrt(2) * jy.dense()) @ psi
    return StateVector(out / np.linalg.norm(out), space)


def default_probe(space):
    """Probe used by the scenarios: CSS along Jx (n=2), the SU(4) state, else (N,0,...)."""
    if space.n == 2:
        return coherent_spin_state(space, math.pi / 2, 0.0)
    if space.n == 4:
        return su4_initial_state(space)
    return basis_state(space, (space.N,) + (0,) * (space.n - 1))


@dataclass(frozen=True)
class HamiltonianSpec:
    kind: str  # "OAT", "TAT" or "CUSTOM"
    chi: float = 1.0
    custom_matrix: object = None

    def __post_init__(self):
        if self.kind not in ("OAT", "TAT", "CUSTOM"):
            raise ValueError(f"unknown Hamiltonian kind {self.kind!r}")
        if self.kind == "CUSTOM" and self.custom_matrix is None:
            raise ValueError("CUSTOM Hamiltonian needs custom_matrix")


def oat_hamiltonian(space, chi=1.0):
    jz = build_lie_basis(space)["Jz"]
    return HermitianOperator((chi * (jz.matrix @ jz.matrix)).tocsr(), "H_OAT", space)


def tat_hamiltonian(space, chi=1.0, form="ladder"):
    """``2 chi E+ E-`` (form="ladder") or ``2 chi (E^2 - Jz^2 + Jz)`` (form="casimir")."""
    ops = su4_named_operators(space)
    if form == "ladder":
        m = 2 * chi * (ops["E+"] @ ops["E-"])
    elif form == "casimir":
        ex, ey, jz = ops["Ex"].matrix, ops["Ey"].matrix, ops["Jz"].matrix
        e2 = ex @ ex + ey @ ey + jz @ jz
        m = 2 * chi * (e2 - jz @ jz + jz)
    else:
        raise ValueError(f"unknown TAT form {form!r}")
    return HermitianOperator(sp.csr_array(m), "H_TAT", space)


def build_hamiltonian(spec, space):
    if spec.kind == "OAT":
        if space.n != 2:
            raise ValueError(f"OAT needs n=2, got n={space.n}")
        return oat_hamiltonian(space, spec.chi)
    if spec.kind == "TAT":
        if space.n != 4:
            raise ValueError(f"TAT needs n=4, got n={space.n}")
        return tat_hamiltonian(space, spec.chi)
    m = spec.custom_matrix
    if m.shape != (space.dim, space.dim):
        raise SpaceMismatchError(f"custom Hamiltonian shape {m.shape} != dim {space.dim}")
    return HermitianOperator(spec.chi * m, "H_CUSTOM", space)


@dataclass(frozen=True)
class EvolutionResult:
    times: np.ndarray
    states: list


class Propagator:
    """Eigendecomposition of H reused for ``exp(-i H t)`` at any t."""

    def __init__(self, H):
        self.space = H.space
        dense = as_dense(H.matrix)
        try:
            if np.allclose(dense.imag, 0.0):
                w, v = np.linalg.eigh(dense.real)
            else:
                w, v = np.linalg.eigh(dense)
        except np.linalg.LinAlgError as exc:
            cond = np.linalg.cond(dense)
            raise NumericalError(
                f"eigendecomposition of {H.label} failed (dim {dense.shape[0]}, "
                f"cond {cond:.3e}, norm {np.linalg.norm(dense):.3e})") from exc
        self.energies = w
        self.vectors = v

    def __call__(self, psi0, t):
        coeffs = self.vectors.conj().T @ psi0.amplitudes
        out = self.vectors @ (np.exp(-1j * self.energies * t) * coeffs)
        # drop accumulated rounding in the norm
        return StateVector(out / np.linalg.norm(out), psi0.space)


def evolve(H, psi0, times, workers=1):
    """States ``exp(-i H t) psi0`` on a sorted time grid starting at 0."""
    if H.space != psi0.space:
        raise SpaceMismatchError("Hamiltonian and state act on different spaces")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0 or times[0] != 0.0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be a non-empty ascending grid starting at 0")
    prop = Propagator(H)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            states = list(pool.map(lambda t: prop(psi0, t), times[1:]))
    else:
        states = [prop(psi0, t) for t in times[1:]]
    return EvolutionResult(times=times, states=[psi0] + states)


def oat_analytic(N, chi_t):
    """Analytic maximal QFI and optimal angle for one-axis twisting of a CSS.

    Returns ``(F, delta)`` with ``F = N + N(N-1)/4 (A + sqrt(A^2 + B^2))``,
    ``A = 1 - cos^{N-2}(2 chi t)``, ``B = 4 sin(chi t) cos^{N-2}(chi t)`` and
    ``delta = arctan(B/A)/2``.
    """
    chi_t = np.asarray(chi_t, dtype=float)
    A = 1 - np.cos(2 * chi_t) ** (N - 2)
    B = 4 * np.sin(chi_t) * np.cos(chi_t) ** (N - 2)
    F = N + N * (N - 1) / 4 * (A + np.sqrt(A**2 + B**2))
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.arctan2(B, A) / 2
    return F, delta


__all__ = [
    "StateVector", "DensityMatrix", "coherent_spin_state", "basis_state", "su4_initial_state",
    "default_probe", "HamiltonianSpec", "oat_hamiltonian", "tat_hamiltonian",
    "build_hamiltonian", "EvolutionResult", "Propagator", "evolve", "oat_analytic",
]

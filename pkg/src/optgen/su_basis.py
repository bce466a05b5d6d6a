"""Symmetric SU(n) spaces, Schwinger-boson operators and an orthonormal su(n) basis.

The N-particle symmetric subspace of n modes is spanned by occupation states
``(k_1, ..., k_n)`` with ``sum(k) == N``.  States are ordered reverse
lexicographically, so ``(N, 0, ..., 0)`` comes first.

Mode indices are 0-based throughout the Python API.  Operator labels use the
1-based mode numbers customary in the physics literature (``A12x`` acts on
modes 0 and 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ResourceError, SpaceMismatchError

DEFAULT_MAX_DIM = 10**6
HERMITIAN_RTOL = 1e-12
ORTHO_RTOL = 1e-10

# n = 4 mode order
SU4_MODES = ("u", "d", "s", "c")

# (label, raising-operator modes (i, j) meaning a_i^dag a_j), in main-text order
SU4_SUBALGEBRAS = {
    "Q": (0, 1),  # u^dag d
    "S": (2, 3),  # s^dag c   (Sigma)
    "M": (0, 3),  # u^dag c
    "N": (2, 1),  # s^dag d
    "U": (0, 2),  # u^dag s
    "V": (3, 1),  # c^dag d
}
SU4_BASIS_LABELS = (
    "Qx", "Qy", "Qz", "Sx", "Sy", "Sz", "Mx", "My",
    "Nx", "Ny", "Pz", "Ux", "Uy", "Vx", "Vy",
)


def dimension(n, N):
    return math.comb(N + n - 1, n - 1)


def _compositions(N, n):
    # reverse-lex: first entry runs from N down to 0
    if n == 1:
        yield (N,)
        return
    for first in range(N, -1, -1):
        for rest in _compositions(N - first, n - 1):
            yield (first,) + rest


@dataclass(frozen=True, eq=False)
class SymmetricSpace:
    """Occupation basis of N bosons in n modes."""

    n: int
    N: int
    states: tuple
    index: dict = field(repr=False)
    occupations: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return len(self.states)

    def __eq__(self, other):
        if not isinstance(other, SymmetricSpace):
            return NotImplemented
        return (self.n, self.N) == (other.n, other.N)

    def __hash__(self):
        return hash((self.n, self.N))

    def __repr__(self):
        return f"SymmetricSpace(n={self.n}, N={self.N}, dim={self.dim})"

    def identity(self):
        return sp.identity(self.dim, dtype=complex, format="csr")


def enumerate_space(n, N, max_dim=DEFAULT_MAX_DIM):
    """Enumerate all occupation states of ``N`` particles in ``n`` modes."""
    if n < 2:
        raise ValueError(f"need at least two modes, got n={n}")
    if N < 1:
        raise ValueError(f"need at least one particle, got N={N}")
    dim = dimension(n, N)
    if dim > max_dim:
        raise ResourceError(
            f"symmetric space n={n}, N={N} has dimension {dim} > max_dim={max_dim}"
        )
    states = tuple(_compositions(N, n))
    index = {s: k for k, s in enumerate(states)}
    occ = np.array(states, dtype=float)
    occ.setflags(write=False)
    return SymmetricSpace(n=n, N=N, states=states, index=index, occupations=occ)


def _check_mode(space, i):
    if not 0 <= i < space.n:
        raise IndexError(f"mode index {i} out of range for n={space.n}")


def transition_operator(space, i, j):
    """Sparse matrix of ``a_i^dag a_j`` on the symmetric space."""
    _check_mode(space, i)
    _check_mode(space, j)
    D = space.dim
    if i == j:
        return sp.diags_array(space.occupations[:, i].astype(complex), format="csr")
    rows, cols, vals = [], [], []
    for col, k in enumerate(space.states):
        if k[j] == 0:
            continue
        target = list(k)
        target[i] += 1
        target[j] -= 1
        rows.append(space.index[tuple(target)])
        cols.append(col)
        vals.append(math.sqrt((k[i] + 1) * k[j]))
    return sp.csr_array((np.array(vals, dtype=complex), (rows, cols)), shape=(D, D))


def as_dense(m):
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def frobenius(m):
    return float(spla.norm(m)) if sp.issparse(m) else float(np.linalg.norm(m))


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A Hermitian matrix on a symmetric space, stored sparse or dense."""

    matrix: object
    label: str
    space: SymmetricSpace

    def __post_init__(self):
        D = self.space.dim
        if self.matrix.shape != (D, D):
            raise SpaceMismatchError(
                f"{self.label}: shape {self.matrix.shape} does not match dim {D}"
            )
        scale = frobenius(self.matrix)
        skew = frobenius(self.matrix - self.matrix.conj().T)
        if skew > HERMITIAN_RTOL * max(scale, 1.0):
            raise ValueError(f"{self.label} is not Hermitian (skew norm {skew:.3e})")

    def dense(self):
        return as_dense(self.matrix)

    def apply(self, vec):
        return self.matrix @ vec

    def expectation(self, vec):
        return float(np.real(np.vdot(vec, self.matrix @ vec)))

    def trace(self):
        return complex(self.matrix.diagonal().sum())

    def norm(self):
        return frobenius(self.matrix)

    def spectrum(self):
        return np.linalg.eigvalsh(self.dense())

    def scaled(self, factor, label=None):
        return HermitianOperator(self.matrix * factor, label or self.label, self.space)


def hermitize(m):
    return (m + m.conj().T) / 2


def combine(coefficients, operators, label="combination"):
    """Real linear combination ``sum_mu c_mu O_mu`` of Hermitian operators."""
    coefficients = np.asarray(coefficients, dtype=float)
    if len(coefficients) != len(operators):
        raise ValueError("coefficient count does not match operator count")
    space = operators[0].space
    total = None
    for c, op in zip(coefficients, operators):
        if op.space != space:
            raise SpaceMismatchError("operators act on different spaces")
        if c == 0.0:
            continue
        total = op.matrix * c if total is None else total + op.matrix * c
    if total is None:
        total = sp.csr_array((space.dim, space.dim), dtype=complex)
    return HermitianOperator(total, label, space)


def trace_product(a, b):
    """``Tr[a b]`` for sparse or dense square matrices."""
    if sp.issparse(a):
        return complex(a.multiply(b.T).sum()) if sp.issparse(b) else complex(
            (a.multiply(np.asarray(b).T)).sum())
    if sp.issparse(b):
        return complex(b.multiply(np.asarray(a).T).sum())
    return complex(np.einsum("ij,ji->", a, b))


def _xyz(space, i, j, name):
    """x, y, z components of the su(2) algebra with raising operator a_i^dag a_j."""
    up = transition_operator(space, i, j)
    down = up.conj().T.tocsr()
    x = (up + down) / 2
    y = (up - down) / 2j
    z = (up @ down - down @ up) / 2
    return (
        HermitianOperator(x.tocsr(), f"{name}x", space),
        HermitianOperator(y.tocsr(), f"{name}y", space),
        HermitianOperator(z.tocsr(), f"{name}z", space),
    )


def _diagonal(space, mode_coeffs, label):
    diag = space.occupations @ np.asarray(mode_coeffs, dtype=float)
    return HermitianOperator(sp.diags_array(diag.astype(complex), format="csr"), label, space)


def _pair_name(n, i, j):
    return f"A{i + 1}{j + 1}" if n < 10 else f"A{i + 1}_{j + 1}"


def _z_coeffs(n, i, j):
    c = np.zeros(n)
    c[i] += 0.5
    c[j] -= 0.5
    return c


@dataclass(frozen=True, eq=False)
class LieBasis:
    """Ordered orthonormal traceless Hermitian basis with ``Tr[G_a G_b] = C delta_ab``."""

    generators: tuple
    norm_c: float
    space: SymmetricSpace

    @property
    def n(self):
        return self.space.n

    @property
    def N(self):
        return self.space.N

    @property
    def labels(self):
        return tuple(g.label for g in self.generators)

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.generators[self.labels.index(key)]
        return self.generators[key]

    def index(self, label):
        return self.labels.index(label)

    def combination(self, coefficients, label="G"):
        return combine(coefficients, self.generators, label)

    def unit_vector(self, label):
        v = np.zeros(len(self))
        v[self.index(label)] = 1.0
        return v

    def gram(self):
        return np.array([[trace_product(a.matrix, b.matrix).real for b in self.generators]
                         for a in self.generators])


def _generic_generators(space):
    n = space.n
    gens = []
    for i in range(n):
        for j in range(i + 1, n):
            x, y, _ = _xyz(space, i, j, _pair_name(n, i, j))
            gens += [x, y]
    for p in range(n // 2):
        i, j = 2 * p, 2 * p + 1
        gens.append(_diagonal(space, _z_coeffs(n, i, j), _pair_name(n, i, j) + "z"))
    return gens


def _alternating_coeffs(n):
    """Mode-coefficient vectors of the un-normalized diagonal completions."""
    out = []
    last = n // 2 - 1 if n % 2 == 0 else (n - 3) // 2
    for k in range(1, last + 1):
        c = np.zeros(n)
        for i in range(1, k + 1):
            # A^z_{(2i-1)(2k+1)} + A^z_{(2i)(2k+2)} in 1-based modes
            c += _z_coeffs(n, 2 * i - 2, 2 * k)
            c += _z_coeffs(n, 2 * i - 1, 2 * k + 1)
        out.append((f"D{2 * k}", c))
    if n % 2 == 1:
        c = sum(_z_coeffs(n, a, n - 1) for a in range(n - 1))
        out.append((f"T{n - 1}", c))
    return out


def build_lie_basis(space):
    """Orthonormal su(n) basis on ``space``.

    Order: for each mode pair i<j the x then y components; then the primary
    diagonal operators A^z_12, A^z_34, ...; then the normalized alternating
    diagonal sums (labels ``D2``, ``D4``, ...) and, for odd n, the terminal
    operator ``T{n-1}``.  For n = 4 the basis is instead the named set
    Qx, Qy, Qz, Sx, Sy, Sz, Mx, My, Nx, Ny, Pz, Ux, Uy, Vx, Vy built from the
    raising operators in ``SU4_SUBALGEBRAS``.

    ``norm_c`` is the numerically computed ``Tr[(A^z_12)^2]``.
    """
    n = space.n
    z12 = _diagonal(space, _z_coeffs(n, 0, 1), "A12z")
    norm_c = trace_product(z12.matrix, z12.matrix).real
    if n == 4:
        gens = _su4_basis(space)
    else:
        gens = _generic_generators(space)
        for label, coeffs in _alternating_coeffs(n):
            op = _diagonal(space, coeffs, label)
            scale = math.sqrt(norm_c / trace_product(op.matrix, op.matrix).real)
            gens.append(op.scaled(scale))
        if n == 2:
            gens = [g.scaled(1.0, label) for g, label in zip(gens, ("Jx", "Jy", "Jz"))]
    return LieBasis(generators=tuple(gens), norm_c=norm_c, space=space)


def _su4_basis(space):
    comps = {name: _xyz(space, i, j, name) for name, (i, j) in SU4_SUBALGEBRAS.items()}
    mz, nz = comps["M"][2], comps["N"][2]
    pz = HermitianOperator(((mz.matrix - nz.matrix) / math.sqrt(2)).tocsr(), "Pz", space)
    lookup = {op.label: op for ops in comps.values() for op in ops}
    lookup["Pz"] = pz
    return [lookup[label] for label in SU4_BASIS_LABELS]


def killing_norm_closed_form(n, N):
    """Closed-form ``prod_{j=1..n}(N+j) / (n+1)!`` for the basis norm."""
    return math.prod(N + j for j in range(1, n + 1)) / math.factorial(n + 1)


def killing_norm_table(ns=range(2, 6), Ns=range(1, 9), rtol=ORTHO_RTOL):
    """Compare the numerical norm C with the closed form on a grid.

    Returns a list of dict rows with keys n, N, numeric, closed_form, agree.
    """
    rows = []
    for n in ns:
        for N in Ns:
            space = enumerate_space(n, N)
            z12 = _diagonal(space, _z_coeffs(n, 0, 1), "A12z")
            numeric = trace_product(z12.matrix, z12.matrix).real
            closed = killing_norm_closed_form(n, N)
            rows.append({
                "n": n, "N": N, "numeric": numeric, "closed_form": closed,
                "agree": abs(numeric - closed) <= rtol * max(abs(numeric), 1.0),
            })
    return rows


@dataclass(frozen=True)
class NamedOperators:
    """Labelled SU(4) operators: Hermitian components plus sparse ladder matrices."""

    hermitian: dict
    ladders: dict

    def __getitem__(self, key):
        if key in self.hermitian:
            return self.hermitian[key]
        return self.ladders[key]

    def __contains__(self, key):
        return key in self.hermitian or key in self.ladders


def su4_named_operators(space):
    """Catalog of the six sub-algebras and the J, K, E composites for n = 4.

    Sub-algebra labels: Q, S (for Sigma), M, N, U, V with suffixes x, y, z.
    Composites follow ``J+ = (M+ + N+)/sqrt2``, ``K+ = (U+ + V+)/sqrt2`` and
    ``E+ = (Q+ + S+)/sqrt2``; every z component is ``[O+, O-]/2``, so
    ``Ez == Jz`` holds exactly.  ``Pz = (Mz - Nz)/sqrt2``.
    """
    if space.n != 4:
        raise ValueError(f"SU(4) catalog needs n=4, got n={space.n}")
    herm, ladders = {}, {}
    raising = {}
    for name, (i, j) in SU4_SUBALGEBRAS.items():
        for op in _xyz(space, i, j, name):
            herm[op.label] = op
        raising[name] = transition_operator(space, i, j)
    herm["Pz"] = HermitianOperator(
        ((herm["Mz"].matrix - herm["Nz"].matrix) / math.sqrt(2)).tocsr(), "Pz", space)
    for name, (a, b) in {"J": ("M", "N"), "K": ("U", "V"), "E": ("Q", "S")}.items():
        up = ((raising[a] + raising[b]) / math.sqrt(2)).tocsr()
        down = up.conj().T.tocsr()
        ladders[f"{name}+"] = up
        ladders[f"{name}-"] = down
        herm[f"{name}x"] = HermitianOperator(((up + down) / 2).tocsr(), f"{name}x", space)
        herm[f"{name}y"] = HermitianOperator(((up - down) / 2j).tocsr(), f"{name}y", space)
        herm[f"{name}z"] = HermitianOperator(((up @ down - down @ up) / 2).tocsr(),
                                             f"{name}z", space)
    return NamedOperators(hermitian=herm, ladders=ladders)


@dataclass(frozen=True)
class Decomposition:
    coefficients: np.ndarray
    identity_part: float
    residual: float


def decompose_operator(basis, op):
    """Project ``op`` onto span{I, G_mu}.

    ``coefficients[mu] = Tr[G_mu op] / C``; the residual is the Frobenius norm
    of what the identity and the basis fail to capture.
    """
    if op.space != basis.space:
        raise SpaceMismatchError("operator and basis act on different spaces")
    D = basis.space.dim
    coeffs = np.array([trace_product(g.matrix, op.matrix).real for g in basis]) / basis.norm_c
    identity_part = op.trace().real / D
    rest = as_dense(op.matrix) - identity_part * np.eye(D)
    for c, g in zip(coeffs, basis):
        if c != 0.0:
            rest = rest - c * as_dense(g.matrix)
    return Decomposition(coefficients=coeffs, identity_part=identity_part,
                         residual=float(np.linalg.norm(rest)))

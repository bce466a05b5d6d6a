import math

import numpy as np
import pytest

from optgen.dynamics import (DensityMatrix, Propagator, coherent_spin_state, oat_hamiltonian,
                             su4_initial_state)
from optgen.errors import SpaceMismatchError
from optgen.multiparam import (UhlmannMatrix, commutator_norm, commutes, commuting_cliques,
                               find_commuting_sets, uhlmann_curvature)
from optgen.qfim import diagonalize, qfim_pure
from optgen.su_basis import build_lie_basis, enumerate_space


def test_commutes_examples():
    sp = enumerate_space(2, 3)
    b = build_lie_basis(sp)
    assert commutes(b["Jz"], b["Jz"]) == (True, 0.0)
    flag, diag = commutes(b["Jx"], b["Jy"])
    assert not flag
    assert diag == pytest.approx(b["Jz"].norm() / (b["Jx"].norm() * b["Jy"].norm()))
    b4 = build_lie_basis(enumerate_space(4, 2))
    assert commutes(b4["Qz"], b4["Sz"])[0]
    with pytest.raises(SpaceMismatchError):
        commutator_norm(b["Jx"], b4["Qx"])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_cartan_guarantee(n):
    b = build_lie_basis(enumerate_space(n, 3))
    diag = [g for g in b if np.count_nonzero(g.dense() - np.diag(np.diag(g.dense()))) == 0]
    assert len(diag) == n - 1
    cliques, _ = commuting_cliques(diag)
    assert cliques == [tuple(range(n - 1))]


def test_cliques_of_basis():
    b = build_lie_basis(enumerate_space(4, 2))
    cliques, diag = commuting_cliques(list(b))
    assert np.allclose(diag, diag.T)
    labels = [tuple(b.labels[k] for k in c) for c in cliques]
    assert ("Qz", "Sz", "Pz") in labels
    assert all(len(c) <= 3 for c in cliques)


def test_su2_sets_are_singletons():
    N = 12
    sp = enumerate_space(2, N)
    b = build_lie_basis(sp)
    prop = Propagator(oat_hamiltonian(sp))
    psi0 = coherent_spin_state(sp, math.pi / 2, 0)
    for t in (0.05, 0.2, 0.6):
        eig = diagonalize(qfim_pure(prop(psi0, t), b))
        sets = find_commuting_sets(eig, b, min_qfi=1e-6)
        assert sets and all(len(s.member_indices) == 1 for s in sets)


def test_sets_are_sorted_and_commute(tat20_quarter, tat20):
    sets = find_commuting_sets(tat20_quarter["eig"], tat20.basis)
    totals = [s.total_qfi for s in sets]
    assert totals == sorted(totals, reverse=True)
    for s in sets:
        assert s.max_pairwise_commutator <= 1e-8
        assert not s.exceeds_cartan
    assert sets[0].ranks == (1, 3, 8)


def test_uhlmann_equal_generators_zero():
    sp = enumerate_space(4, 3)
    b = build_lie_basis(sp)
    u = uhlmann_curvature(su4_initial_state(sp), [b["Qx"]] * 3).matrix
    assert np.abs(u).max() < 1e-12


def test_uhlmann_css_brute_force():
    sp = enumerate_space(2, 2)
    b = build_lie_basis(sp)
    psi = coherent_spin_state(sp, math.pi / 2, 0)
    rho = psi.density_matrix()
    gens = [b["Jx"], b["Jy"], b["Jz"]]
    ls = [2 * (-1j) * (g.dense() @ rho - rho @ g.dense()) for g in gens]
    ref = np.array([[(-0.5j * np.trace(rho @ (la @ lb - lb @ la))).real for lb in ls]
                     for la in ls])
    u = uhlmann_curvature(psi, gens).matrix
    assert np.allclose(u, ref, atol=1e-12)
    # CSS along x: the (x, y) entry vanishes, (y, z) carries the curvature
    assert u[0, 1] == pytest.approx(0.0, abs=1e-12)
    assert u[1, 2] == pytest.approx(2.0)


def test_uhlmann_mixed_matches_pure():
    sp = enumerate_space(4, 2)
    b = build_lie_basis(sp)
    psi = su4_initial_state(sp)
    gens = list(b)[:6]
    pure = uhlmann_curvature(psi, gens).matrix
    mixed = uhlmann_curvature(DensityMatrix.from_state(psi), gens).matrix
    assert np.allclose(pure, mixed, atol=1e-8)


def test_uhlmann_antisymmetry_check():
    with pytest.raises(ValueError):
        UhlmannMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(TypeError):
        uhlmann_curvature(np.zeros(3), [])

import pytest
from hypothesis import given, strategies as st

from lvqc.errors import InvalidSizeError, UnsupportedHamiltonianError
from lvqc.lattice import (OPEN, PERIODIC, Lattice, LocalHamiltonian, PauliTerm, build_heisenberg_afm,
                          even_odd_split, restrict_hamiltonian, terms_equal)


def bonds(H):
    return sorted({t.sites for t in H.terms})


def test_heisenberg_open_three_sites():
    H = build_heisenberg_afm(3)
    assert len(H.terms) == 6
    assert {(t.sites, t.paulis) for t in H.terms} == {
        (b, p + p) for b in [(1, 2), (2, 3)] for p in "XYZ"}
    assert all(t.coeff == 1 for t in H.terms)


def test_heisenberg_metadata():
    assert build_heisenberg_afm(2).metadata == (3, 2, 1)
    for L in (3, 6, 11):
        assert build_heisenberg_afm(L).metadata == (6, 2, 1)


def test_heisenberg_periodic_has_wrap_bond():
    H = build_heisenberg_afm(4, PERIODIC)
    assert len(H.terms) == 12
    assert (1, 4) in bonds(H)


def test_heisenberg_rejects_single_site():
    with pytest.raises(InvalidSizeError):
        build_heisenberg_afm(1)


def test_distance_conventions():
    assert Lattice(10).distance(1, 9) == 8
    assert Lattice(10, PERIODIC).distance(1, 9) == 2


def test_restriction_interior_window():
    R = restrict_hamiltonian(build_heisenberg_afm(10), 5, 4)
    assert R.origin == (3, 4, 5, 6, 7)
    assert len(R.terms) == 12
    assert R.boundary == OPEN


def test_restriction_clipped_at_boundary():
    R = restrict_hamiltonian(build_heisenberg_afm(10), 1, 4)
    assert R.origin == (1, 2, 3)
    assert len(R.terms) == 6


def test_restriction_covering_window_returns_input():
    H = build_heisenberg_afm(6)
    assert restrict_hamiltonian(H, 3, 12) is H


def test_restriction_out_of_range_site():
    with pytest.raises(IndexError):
        restrict_hamiltonian(build_heisenberg_afm(6), 7, 2)


@given(L=st.integers(2, 14), data=st.data())
def test_restriction_is_a_term_subset_and_idempotent(L, data):
    boundary = data.draw(st.sampled_from([OPEN, PERIODIC]))
    H = build_heisenberg_afm(L, boundary)
    j = data.draw(st.integers(1, L))
    Lp = data.draw(st.integers(0, 2 * L))
    R = restrict_hamiltonian(H, j, Lp)
    parent = {(t.sites, t.paulis, t.coeff) for t in H.terms}
    for t in R.terms:
        mapped = tuple(sorted(R.origin[s - 1] for s in t.sites))
        assert (mapped, t.paulis, t.coeff) in parent
    # restricting again around the image of j leaves the term list unchanged
    jj = R.origin.index(j) + 1 if R is not H else j
    again = restrict_hamiltonian(R, jj, Lp)
    assert terms_equal(again.terms, R.terms)


def test_even_odd_split_open_four():
    H_even, H_odd = even_odd_split(build_heisenberg_afm(4))
    assert bonds(H_odd) == [(1, 2), (3, 4)]
    assert bonds(H_even) == [(2, 3)]


def test_even_odd_split_open_five():
    H_even, H_odd = even_odd_split(build_heisenberg_afm(5))
    assert bonds(H_odd) == [(1, 2), (3, 4)]
    assert bonds(H_even) == [(2, 3), (4, 5)]


@given(st.integers(2, 12))
def test_even_odd_split_partitions_terms(L):
    H = build_heisenberg_afm(L)
    H_even, H_odd = even_odd_split(H)
    assert terms_equal(H_even.terms + H_odd.terms, H.terms)


def test_even_odd_split_rejects_longer_range():
    H = LocalHamiltonian(Lattice(4), (PauliTerm((1, 3), "ZZ"),))
    with pytest.raises(UnsupportedHamiltonianError):
        even_odd_split(H)


def test_json_round_trip():
    H = build_heisenberg_afm(5, PERIODIC, coupling=0.7)
    again = LocalHamiltonian.from_json(H.to_json())
    assert again == H
    assert H.to_dict()["terms"][0] == {"sites": [1, 2], "paulis": "XX", "coeff": 0.7}


@pytest.mark.parametrize("sites,paulis", [((), ""), ((1, 1), "XX"), ((1, 2), "X"), ((1,), "Q")])
def test_pauli_term_validation(sites, paulis):
    with pytest.raises(ValueError):
        PauliTerm(sites, paulis)


def test_pauli_term_is_canonically_sorted():
    t = PauliTerm((3, 1), "XZ", -2.0)
    assert t.sites == (1, 3) and t.paulis == "ZX" and t.norm == 2.0

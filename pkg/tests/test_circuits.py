import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from lvqc.circuits import (PER_GATE, SHARED, ParameterVector, TwoQubitGateParams, build_brickwork,
                           decompose_z_conserving, extend_parameters, gate_matrix, n_gates,
                           restrict_circuit, trotter_circuit, trotter_params)
from lvqc.errors import InvalidSizeError, ParameterLayoutError
from lvqc.lattice import OPEN, PERIODIC, build_heisenberg_afm, even_odd_split
from lvqc.statevector import (PAULI, circuit_to_unitary, embed_two_site, exact_evolution,
                              hamiltonian_matrix, is_unitary, total_z)

angles = st.lists(st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False), min_size=5, max_size=5)
HEIS2 = sum(np.kron(PAULI[p], PAULI[p]) for p in "XYZ")


def phase_overlap(A, B):
    return abs(np.vdot(A, B)) / A.shape[0]


def test_zero_angles_give_identity():
    assert np.array_equal(gate_matrix(TwoQubitGateParams()), np.eye(4))


@given(angles)
def test_gate_is_unitary_and_sector_diagonal(a):
    g = gate_matrix(a)
    assert np.max(np.abs(g.conj().T @ g - np.eye(4))) < 1e-12
    assert g[0, 1:].tolist() == [0, 0, 0] and g[3, :3].tolist() == [0, 0, 0]
    assert g[1, 0] == g[2, 0] == g[1, 3] == g[2, 3] == 0


@given(st.floats(-3, 3, allow_nan=False))
def test_trotter_angles_reproduce_heisenberg_bond(t):
    g = gate_matrix([2 * t, 0, 0, -2 * t, 4 * t])
    target = np.exp(1j * t) * expm(-1j * t * HEIS2)
    assert np.max(np.abs(g - target)) < 1e-12


@given(angles)
def test_decomposition_round_trip(a):
    g = gate_matrix(a)
    back = gate_matrix(decompose_z_conserving(g).as_array())
    assert phase_overlap(g, back) == pytest.approx(1.0, abs=1e-10)


def test_gate_layout_examples():
    V = build_brickwork(4, 1, ParameterVector.zeros(1))
    assert [g.sites for g in V.gates] == [(1, 2), (3, 4), (2, 3)]
    Vp = build_brickwork(4, 1, ParameterVector.zeros(1), boundary=PERIODIC)
    assert [g.sites for g in Vp.gates] == [(1, 2), (3, 4), (2, 3), (4, 1)]


def test_zero_parameters_give_identity_circuit():
    V = build_brickwork(6, 3, ParameterVector.zeros(3))
    assert np.allclose(circuit_to_unitary(V), np.eye(64))


def test_parameter_layout_errors(rng):
    with pytest.raises(ParameterLayoutError):
        ParameterVector(np.zeros(15), 2)
    with pytest.raises(ParameterLayoutError):
        build_brickwork(4, 2, ParameterVector(np.zeros(20), 2, PER_GATE))
    with pytest.raises(ParameterLayoutError):
        build_brickwork(4, 1, ParameterVector.zeros(2))
    with pytest.raises(InvalidSizeError):
        build_brickwork(5, 1, ParameterVector.zeros(1), boundary=PERIODIC)


def test_shared_mode_has_ten_d_parameters():
    assert len(trotter_params(0.5, 4)) == 40


def test_restriction_example(rng):
    V = build_brickwork(10, 1, ParameterVector(rng.normal(size=10), 1))
    R = restrict_circuit(V, 5, 4)
    assert R.origin == (3, 4, 5, 6, 7)
    assert [(g.sublayer, R.origin[g.a - 1], R.origin[g.b - 1]) for g in R.gates] == [
        (0, 3, 4), (0, 5, 6), (1, 4, 5), (1, 6, 7)]


@given(L=st.integers(2, 14), d=st.integers(1, 3), data=st.data())
def test_restriction_keeps_exactly_the_contained_gates(L, d, data):
    boundary = data.draw(st.sampled_from([OPEN, PERIODIC])) if L % 2 == 0 else OPEN
    V = build_brickwork(L, d, ParameterVector.zeros(d), boundary=boundary)
    j = data.draw(st.integers(1, L))
    Lt = data.draw(st.integers(0, 2 * L + 1))
    window, _ = V.lattice.window(j, Lt)
    R = restrict_circuit(V, j, Lt)
    expected = {(g.layer, g.sublayer, g.a, g.b) for g in V.gates if g.a in window and g.b in window}
    assert set(R.gate_sites()) == expected
    again = restrict_circuit(R, R.origin.index(j) + 1, Lt)
    assert set(again.gate_sites()) == set(R.gate_sites())


def test_restriction_covering_lattice_is_identity_operation():
    V = build_brickwork(6, 2, ParameterVector.zeros(2))
    assert restrict_circuit(V, 3, 12) is V


def test_extension_counts_and_restriction(rng):
    theta = ParameterVector(rng.normal(size=30), 3)
    assert extend_parameters(theta, 8).angles.tolist() == theta.angles.tolist()
    V8 = build_brickwork(8, 3, theta)
    V16 = build_brickwork(16, 3, extend_parameters(theta, 16))
    odd8 = [g for g in V8.gates if g.layer == 0 and g.sublayer == 0]
    odd16 = [g for g in V16.gates if g.layer == 0 and g.sublayer == 0]
    assert (len(odd8), len(odd16)) == (4, 8)
    # the centred window of the extended chain starts on an odd site, so it carries the
    # brickwork of a fresh 9-site chain with the same shared parameters
    R = restrict_circuit(V16, 9, 8)
    assert R.origin == tuple(range(5, 14))
    fresh = build_brickwork(9, 3, theta)
    assert [(g.layer, g.sublayer, g.a, g.b) for g in R.gates] == \
        [(g.layer, g.sublayer, g.a, g.b) for g in fresh.gates]
    assert np.allclose(circuit_to_unitary(R), circuit_to_unitary(fresh), atol=1e-12)


def test_extension_rejects_per_gate():
    with pytest.raises(ParameterLayoutError):
        extend_parameters(ParameterVector(np.zeros(15), 1, PER_GATE), 8)


def test_trotter_params_zero_time_is_identity():
    theta = trotter_params(0.0, 3)
    assert not theta.angles.any()


def test_single_step_trotter_equals_bond_exponential():
    V = circuit_to_unitary(build_brickwork(2, 1, trotter_params(0.5, 1)))
    assert phase_overlap(V, expm(-0.5j * HEIS2)) == pytest.approx(1, abs=1e-10)


def dense_trotter(H, tau, d):
    H_even, H_odd = even_odd_split(H)
    step = expm(-1j * tau / d * hamiltonian_matrix(H_even)) @ expm(-1j * tau / d * hamiltonian_matrix(H_odd))
    return np.linalg.matrix_power(step, d)


def test_shared_trotter_matches_dense_product_formula():
    H = build_heisenberg_afm(6)
    V = circuit_to_unitary(build_brickwork(6, 5, trotter_params(0.5, 5)))
    assert phase_overlap(V, dense_trotter(H, 0.5, 5)) == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("boundary", [OPEN, PERIODIC])
def test_trotter_circuit_matches_dense_product_formula(boundary):
    H = build_heisenberg_afm(4, boundary, coupling=0.8)
    V = circuit_to_unitary(trotter_circuit(H, 0.5, 1))
    assert phase_overlap(V, dense_trotter(H, 0.5, 1)) == pytest.approx(1, abs=1e-12)


def test_trotter_error_halves_with_depth():
    H = build_heisenberg_afm(6)
    U = exact_evolution(H, 0.5)

    def err(d):
        V = circuit_to_unitary(trotter_circuit(H, 0.5, d))
        phase = np.vdot(U, V) / abs(np.vdot(U, V))
        return np.linalg.norm(V / phase - U, 2)

    for d in (4, 8, 16):
        assert err(2 * d) / err(d) == pytest.approx(0.5, rel=0.2)


def test_trotter_circuit_zero_time_is_identity():
    V = circuit_to_unitary(trotter_circuit(build_heisenberg_afm(4), 0.0, 3))
    assert np.allclose(V, np.eye(16))


@settings(max_examples=20, deadline=None)
@given(L=st.integers(2, 6), d=st.integers(1, 3), seed=st.integers(0, 2**32 - 1),
       mode=st.sampled_from([SHARED, PER_GATE]))
def test_circuits_are_unitary_and_conserve_total_z(L, d, seed, mode):
    rng = np.random.default_rng(seed)
    size = 10 * d if mode == SHARED else 5 * n_gates(L, d)
    V = circuit_to_unitary(build_brickwork(L, d, ParameterVector(rng.normal(size=size), d, mode)))
    assert is_unitary(V)
    Z = np.diag(total_z(L))
    assert np.max(np.abs(V @ Z - Z @ V)) < 1e-10


def test_two_layer_circuit_is_product_of_sublayers(rng):
    theta = ParameterVector(rng.normal(size=20), 2)
    V = build_brickwork(4, 2, theta)
    M = np.eye(16, dtype=complex)
    for layer in range(2):
        for sub, bonds in ((0, [(1, 2), (3, 4)]), (1, [(2, 3)])):
            g = gate_matrix(theta.sublayer_params(layer, sub))
            S = np.eye(16, dtype=complex)
            for a, b in bonds:
                S = embed_two_site(g, a, b, 4) @ S
            M = S @ M
    assert np.max(np.abs(circuit_to_unitary(V) - M)) < 1e-12


def test_parameter_vector_json_round_trip(rng):
    theta = ParameterVector(rng.normal(size=20), 2, size=8)
    again = ParameterVector.from_json(theta.to_json())
    assert again.angles.tolist() == theta.angles.tolist()
    assert (again.depth, again.mode, again.size) == (2, SHARED, 8)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import haar, random_shared
from lvqc.circuits import PER_GATE, ParameterVector, build_brickwork, restrict_circuit, trotter_params
from lvqc.costs import (CostReport, SubsystemCost, check_subsystem_constraints, clamp_unit,
                        cost_alpha, cost_hst, cost_lhst, cost_lhst_j, cost_lhst_per_site,
                        dense_report, fidelity_bounds, local_compilation_cost_pbc,
                        subsystem_cost_generic)
from lvqc.errors import (ConstraintError, InvalidSizeError, NumericalIntegrityError,
                         ParameterLayoutError)
from lvqc.lattice import PERIODIC, Lattice, build_heisenberg_afm, embed_hamiltonian, restrict_hamiltonian
from lvqc.statevector import PAULI, apply_gate, circuit_to_unitary, exact_evolution, local_operator

BELL = np.array([1, 0, 0, 1]) / np.sqrt(2)


def bell_register_weight(U, V, j):
    """``Tr[Pi_j rho_AB]`` from the explicit 2L-qubit register (A on low bits, B on high bits)."""
    L = U.shape[0].bit_length() - 1
    n = 2 * L
    phi = np.zeros(2 ** n, dtype=complex)
    for x in range(2 ** L):
        phi[x | (x << L)] = 1
    phi /= np.sqrt(2 ** L)
    psi = np.kron(V.conj(), U) @ phi
    t = psi.reshape((2,) * n)
    projected = apply_gate(t, np.outer(BELL, BELL), j, L + j, n)
    return float(np.vdot(t, projected).real)


@pytest.mark.parametrize("L", [1, 2, 3, 4])
def test_trace_identity_matches_explicit_bell_register(L):
    U, V = haar(L, 11 + L), haar(L, 23 + L)
    for j in range(1, L + 1):
        assert cost_lhst_j(U, V, j) == pytest.approx(1 - bell_register_weight(U, V, j), abs=1e-12)


def test_hst_matches_explicit_bell_overlap():
    U, V = haar(3, 1), haar(3, 2)
    phi = np.zeros(64, dtype=complex)
    for x in range(8):
        phi[x | (x << 3)] = 1 / np.sqrt(8)
    overlap = np.vdot(phi, np.kron(V.conj(), U) @ phi)
    assert cost_hst(U, V) == pytest.approx(1 - abs(overlap) ** 2, abs=1e-12)


def test_hst_examples():
    U = haar(2, 5)
    assert cost_hst(U, U) == pytest.approx(0, abs=1e-12)
    assert cost_hst(U, np.exp(0.37j) * U) == pytest.approx(0, abs=1e-12)
    assert cost_hst(np.eye(4), local_operator(PAULI["X"], 1, 2)) == pytest.approx(1)


def test_lhst_examples():
    X1 = local_operator(PAULI["X"], 1, 2)
    assert cost_lhst_j(PAULI["X"], np.eye(2), 1) == pytest.approx(1)
    assert cost_lhst_j(X1, np.eye(4), 1) == pytest.approx(1)
    assert cost_lhst_j(X1, np.eye(4), 2) == pytest.approx(0, abs=1e-15)
    assert cost_lhst(X1, np.eye(4)) == pytest.approx(0.5)
    U = haar(3, 9)
    assert all(c < 1e-12 for c in cost_lhst_per_site(U, U))


def test_alpha_mixture():
    U, V = haar(3, 3), haar(3, 4)
    assert cost_alpha(U, V, 0) == pytest.approx(cost_lhst(U, V))
    assert cost_alpha(U, V, 1) == pytest.approx(cost_hst(U, V))
    assert cost_alpha(U, V, 0.5) == pytest.approx(0.5 * (cost_hst(U, V) + cost_lhst(U, V)))
    with pytest.raises(ValueError):
        cost_alpha(U, V, 1.5)


def test_invalid_inputs():
    with pytest.raises(InvalidSizeError):
        cost_hst(np.eye(4), np.eye(8))
    with pytest.raises(IndexError):
        cost_lhst_j(np.eye(4), np.eye(4), 3)


def test_clamping_policy():
    assert clamp_unit(-1e-12) == 0.0
    assert clamp_unit(1 + 1e-12) == 1.0
    with pytest.raises(NumericalIntegrityError):
        clamp_unit(-1e-6)


@settings(max_examples=40, deadline=None)
@given(L=st.integers(2, 5), seed=st.integers(0, 2**31))
def test_sandwich_inequality(L, seed):
    U, V = haar(L, seed), haar(L, seed + 1)
    c_l, c_h = cost_lhst(U, V), cost_hst(U, V)
    assert c_l - 1e-9 <= c_h <= L * c_l + 1e-9


def test_fidelity_bounds():
    assert fidelity_bounds(0.0, 0.0, 5) == (1.0, 1.0)
    f_hst, f_lhst = fidelity_bounds(0.1, 0.02, 3)
    assert f_hst == pytest.approx(1 - 8 / 9 * 0.1)
    assert f_lhst == pytest.approx(1 - 8 / 9 * 3 * 0.02)
    # large L must not overflow
    assert fidelity_bounds(0.01, 1e-4, 400)[0] == pytest.approx(0.99)


def test_report_consistency_and_json():
    U, V = haar(3, 7), haar(3, 8)
    r = dense_report(U, V)
    r.check()
    assert r.c_lhst == pytest.approx(np.mean(r.c_lhst_per_site))
    doc = r.to_dict()
    assert doc["backend"] == "dense" and doc["c_lhst_center"] == r.c_lhst_per_site[0]
    bad = CostReport(0.9, 0.1, [0.1, 0.1, 0.1], 0, 0)
    with pytest.raises(NumericalIntegrityError):
        bad.check()


def embedded_restricted_evolution(H, j, Lp, tau):
    """``U^(L', j)``: the restricted Hamiltonian evolved on the full chain."""
    R = restrict_hamiltonian(H, j, Lp)
    return exact_evolution(embed_hamiltonian(R, H.lattice, R.origin), tau)


def test_subsystem_cost_zero_time():
    H = build_heisenberg_afm(8)
    assert subsystem_cost_generic(H, ParameterVector.zeros(2), 0.0, 4, 8, 2) == pytest.approx(0, abs=1e-12)


def test_subsystem_cost_equals_mean_of_independent_terms(rng):
    L, Lp, d, Lt, tau = 8, 4, 2, 8, 0.5
    H = build_heisenberg_afm(L)
    theta = random_shared(d, rng, 0.5)
    V = build_brickwork(L, d, theta)
    terms = []
    for j in range(1, L + 1):
        window, _ = H.lattice.window(j, Lt)
        R = restrict_hamiltonian(H, j, Lp)
        Ut = exact_evolution(embed_hamiltonian(R, Lattice(len(window)),
                                               [window.index(s) + 1 for s in R.origin]), tau)
        Vt = circuit_to_unitary(restrict_circuit(V, j, Lt))
        terms.append(cost_lhst_j(Ut, Vt, window.index(j) + 1))
    assert subsystem_cost_generic(H, theta, tau, Lp, Lt, d) == pytest.approx(np.mean(terms), abs=1e-12)


def test_subsystem_window_equality_on_full_chain(rng):
    """The windowed term equals the same term evaluated with the full-chain circuit."""
    L, Lp, d, Lt, tau, j = 10, 4, 2, 8, 0.5, 5
    H = build_heisenberg_afm(L)
    theta = random_shared(d, rng)
    full = cost_lhst_j(embedded_restricted_evolution(H, j, Lp, tau),
                       circuit_to_unitary(build_brickwork(L, d, theta)), j)
    windowed = SubsystemCost(H, tau, Lp, Lt, d, sites=[j]).per_site(theta)[0]
    assert abs(full - windowed) < 1e-10


def test_subsystem_constraints_named():
    with pytest.raises(ConstraintError, match="4d >= L'"):
        check_subsystem_constraints(Lp=12, Ltilde=20, d=2)
    with pytest.raises(ConstraintError, match="L~ >= L' \\+ 2d' \\+ 1"):
        check_subsystem_constraints(Lp=4, Ltilde=6, d=2)
    assert check_subsystem_constraints(4, 8, 2) == 1.0


def test_subsystem_cost_accepts_per_gate_parameters(rng):
    H = build_heisenberg_afm(8)
    from lvqc.circuits import n_gates
    theta = ParameterVector(0.3 * rng.normal(size=5 * n_gates(8, 2)), 2, PER_GATE)
    assert 0 <= subsystem_cost_generic(H, theta, 0.5, 4, 8, 2) <= 1


def test_pbc_cost_deep_trotter_is_small():
    H = build_heisenberg_afm(6, PERIODIC)
    assert local_compilation_cost_pbc(H, trotter_params(0.5, 100), 0.5) < 1e-6


def test_pbc_cost_of_trotter_matches_independent_product_formula():
    """Compare with odd/even bond exponentials built directly, and check the 1/d^2 decay."""
    from scipy.linalg import expm
    from lvqc.statevector import hamiltonian_matrix, pauli_string_matrix

    L, tau = 6, 0.5
    H = build_heisenberg_afm(L, PERIODIC)
    U = expm(-1j * tau * hamiltonian_matrix(H))

    def bond(a, b):
        return sum(pauli_string_matrix([a, b], p + p, L) for p in "XYZ")

    odd = bond(1, 2) + bond(3, 4) + bond(5, 6)
    even = bond(2, 3) + bond(4, 5) + bond(1, 6)
    costs = []
    for d in (50, 100):
        step = expm(-1j * tau / d * even) @ expm(-1j * tau / d * odd)
        expected = cost_lhst_j(U, np.linalg.matrix_power(step, d), L // 2)
        costs.append(local_compilation_cost_pbc(H, trotter_params(tau, d), tau))
        assert costs[-1] == pytest.approx(expected, rel=1e-8)
    assert costs[0] / costs[1] == pytest.approx(4, rel=0.05)


def test_pbc_cost_translation_invariant_sites(rng):
    Lt = 6
    H = build_heisenberg_afm(Lt, PERIODIC)
    theta = random_shared(2, rng)
    U = exact_evolution(H, 0.5)
    V = circuit_to_unitary(build_brickwork(Lt, 2, theta, boundary=PERIODIC))
    per_site = cost_lhst_per_site(U, V)
    # shared parameters are invariant under translation by two sites
    assert max(per_site[0::2]) - min(per_site[0::2]) < 1e-10
    assert max(per_site[1::2]) - min(per_site[1::2]) < 1e-10
    single = local_compilation_cost_pbc(H, theta, 0.5)
    assert single == pytest.approx(per_site[Lt // 2 - 1], abs=1e-12)
    full = local_compilation_cost_pbc(H, theta, 0.5, single_site=False)
    assert full == pytest.approx(np.mean(per_site), abs=1e-12)


def test_pbc_cost_zero_time_and_errors():
    H = build_heisenberg_afm(6, PERIODIC)
    assert local_compilation_cost_pbc(H, ParameterVector.zeros(2), 0.0) == pytest.approx(0, abs=1e-12)
    assert local_compilation_cost_pbc(lambda L: build_heisenberg_afm(L, PERIODIC),
                                      ParameterVector.zeros(2), 0.0, Ltilde=4) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ParameterLayoutError):
        local_compilation_cost_pbc(H, ParameterVector(np.zeros(45), 1, PER_GATE), 0.5)
    with pytest.raises(InvalidSizeError):
        local_compilation_cost_pbc(build_heisenberg_afm(5, PERIODIC), ParameterVector.zeros(1), 0.5)

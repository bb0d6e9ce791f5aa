"""Dense statevector / unitary simulation used as the reference for everything else.

Basis convention: site ``j`` (1-based) is bit ``j-1`` of the basis index, so
site 1 is the least significant bit. Reshaping a vector to ``(2,)*n`` puts
site ``j`` on axis ``n - j``.
"""
from __future__ import annotations

import struct
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .circuits import BrickworkCircuit
from .errors import CapacityError, InvalidSizeError
from .lattice import LocalHamiltonian

DENSE_MAX_QUBITS = 14

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        n = self.amplitudes.size.bit_length() - 1
        if 1 << n != self.amplitudes.size:
            raise InvalidSizeError("amplitude count must be a power of two")

    @property
    def n(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy())

    @classmethod
    def basis(cls, bits) -> "StateVector":
        """Computational basis state with ``bits[j-1]`` on site ``j``."""
        idx = sum(int(b) << i for i, b in enumerate(bits))
        amp = np.zeros(1 << len(bits), dtype=complex)
        amp[idx] = 1.0
        return cls(amp)

    # debugging dump: n as uint32, then 2^n little-endian complex128
    def to_bytes(self) -> bytes:
        return struct.pack("<I", self.n) + self.amplitudes.astype("<c16").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "StateVector":
        (n,) = struct.unpack_from("<I", data)
        amp = np.frombuffer(data, dtype="<c16", offset=4, count=1 << n)
        return cls(amp.copy())


def _check_capacity(n: int, max_qubits: int) -> None:
    if n > max_qubits:
        raise CapacityError(
            f"{n} qubits exceeds the dense threshold of {max_qubits}; use the MPS backend"
        )


# ----------------------------------------------------------------------------
# Pauli strings and Hamiltonians
# ----------------------------------------------------------------------------
def pauli_action(sites, paulis: str, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``P|x> = phase[x] |target[x]>`` for every basis index ``x``."""
    flip = zmask = 0
    n_y = 0
    for s, p in zip(sites, paulis):
        bit = 1 << (s - 1)
        if p in "XY":
            flip |= bit
        if p in "YZ":
            zmask |= bit
        n_y += p == "Y"
    x = np.arange(1 << n, dtype=np.int64)
    parity = _popcount(x & zmask) & 1
    phase = (1j ** n_y) * (1 - 2 * parity)
    return x ^ flip, phase.astype(complex)


def _popcount(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    count = np.zeros_like(a)
    while np.any(a):
        count += a & 1
        a >>= 1
    return count


def pauli_string_matrix(sites, paulis: str, n: int, sparse: bool = False):
    target, phase = pauli_action(sites, paulis, n)
    cols = np.arange(1 << n)
    m = sp.csr_matrix((phase, (target, cols)), shape=(1 << n, 1 << n))
    return m if sparse else m.toarray()


def hamiltonian_matrix(H: LocalHamiltonian, sparse: bool = False):
    n = H.size
    dim = 1 << n
    rows, cols, vals = [], [], []
    x = np.arange(dim)
    for t in H.terms:
        target, phase = pauli_action(t.sites, t.paulis, n)
        rows.append(target)
        cols.append(x)
        vals.append(t.coeff * phase)
    if not rows:
        m = sp.csr_matrix((dim, dim), dtype=complex)
    else:
        m = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )
    if H.is_real():
        m = m.real
    return m if sparse else m.toarray()


class Spectrum:
    """Eigendecomposition of a Hermitian matrix, reused across evolution times."""

    def __init__(self, matrix: np.ndarray):
        self.energies, self.vectors = np.linalg.eigh(matrix)

    def evolution(self, tau: float) -> np.ndarray:
        phases = np.exp(-1j * tau * self.energies)
        return (self.vectors * phases) @ self.vectors.conj().T

    def evolve(self, psi: np.ndarray, tau: float) -> np.ndarray:
        return self.vectors @ (np.exp(-1j * tau * self.energies) * (self.vectors.conj().T @ psi))


_SPECTRA: "OrderedDict[LocalHamiltonian, Spectrum]" = OrderedDict()
_SPECTRA_MAX = 8


def spectrum(H: LocalHamiltonian, max_qubits: int = DENSE_MAX_QUBITS) -> Spectrum:
    _check_capacity(H.size, max_qubits)
    if H in _SPECTRA:
        _SPECTRA.move_to_end(H)
        return _SPECTRA[H]
    spec = Spectrum(hamiltonian_matrix(H))
    _SPECTRA[H] = spec
    if len(_SPECTRA) > _SPECTRA_MAX:
        _SPECTRA.popitem(last=False)
    return spec


def exact_evolution(H: LocalHamiltonian, tau: float, max_qubits: int = DENSE_MAX_QUBITS) -> np.ndarray:
    """``exp(-i H tau)`` as a dense ``2^L x 2^L`` matrix."""
    return spectrum(H, max_qubits).evolution(tau)


def evolve_state(psi, H: LocalHamiltonian, tau: float, dense_max: int = 12):
    """``exp(-i H tau) psi``; sparse action of the exponential above ``dense_max`` sites."""
    vec = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    if H.size <= dense_max:
        out = spectrum(H).evolve(vec, tau)
    else:
        out = expm_multiply(-1j * tau * hamiltonian_matrix(H, sparse=True).tocsc(), vec)
    return StateVector(out) if isinstance(psi, StateVector) else out


# ----------------------------------------------------------------------------
# circuits
# ----------------------------------------------------------------------------
def apply_gate(tensor: np.ndarray, gate: np.ndarray, a: int, b: int, n: int) -> np.ndarray:
    """Apply a 4x4 gate on sites ``(a, b)`` to an array shaped ``(2,)*n + batch``."""
    ax_a, ax_b = n - a, n - b
    g = gate.reshape(2, 2, 2, 2)
    out = np.tensordot(g, tensor, axes=([2, 3], [ax_a, ax_b]))
    return np.moveaxis(out, [0, 1], [ax_a, ax_b])


def _run(tensor: np.ndarray, V: BrickworkCircuit, n: int, conj: bool = False) -> np.ndarray:
    cache: dict[int, np.ndarray] = {}
    for g in V.gates:
        key = id(g.params)
        m = cache.get(key)
        if m is None:
            m = g.matrix()
            if conj:
                m = m.conj()
            cache[key] = m
        tensor = apply_gate(tensor, m, g.a, g.b, n)
    return tensor


def apply_circuit(psi, V: BrickworkCircuit):
    """Apply ``V`` to a statevector (``StateVector`` or raw amplitude array)."""
    vec = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    n = V.size
    if vec.size != 1 << n:
        raise InvalidSizeError(f"state has {vec.size} amplitudes, circuit acts on {n} qubits")
    out = _run(vec.reshape((2,) * n), V, n).reshape(-1)
    return StateVector(out) if isinstance(psi, StateVector) else out


def circuit_to_unitary(V: BrickworkCircuit, max_qubits: int = DENSE_MAX_QUBITS) -> np.ndarray:
    n = V.size
    _check_capacity(n, max_qubits)
    dim = 1 << n
    t = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    return _run(t, V, n).reshape(dim, dim)


def embed_two_site(gate: np.ndarray, a: int, b: int, n: int) -> np.ndarray:
    """Dense ``2^n`` matrix of a two-site gate (independent of the circuit kernel)."""
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    ba, bb = a - 1, b - 1
    for x in range(dim):
        sa, sb = (x >> ba) & 1, (x >> bb) & 1
        col = 2 * sa + sb
        rest = x & ~((1 << ba) | (1 << bb))
        for row in range(4):
            amp = gate[row, col]
            if amp != 0:
                ra, rb = row >> 1, row & 1
                out[rest | (ra << ba) | (rb << bb), x] += amp
    return out


def local_operator(op: np.ndarray, j: int, n: int) -> np.ndarray:
    """Dense matrix of a single-site operator on site ``j``."""
    return np.kron(np.kron(np.eye(1 << (n - j)), op), np.eye(1 << (j - 1)))


def expectation(psi, op: np.ndarray, j: int) -> float:
    vec = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)
    n = vec.size.bit_length() - 1
    t = vec.reshape((2,) * n)
    ax = n - j
    opt = np.moveaxis(np.tensordot(op, t, axes=([1], [ax])), 0, ax)
    return float(np.vdot(t, opt).real)


def is_unitary(U: np.ndarray, atol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) < atol)


def total_z(n: int) -> np.ndarray:
    """Diagonal of ``sum_j Z_j``."""
    x = np.arange(1 << n)
    ones = _popcount(x)
    return (n - 2 * ones).astype(float)

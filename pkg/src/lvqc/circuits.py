"""Brickwork circuits built from total-Z-conserving two-qubit gates.

Layer convention: within every layer the odd sublayer (bonds (1,2), (3,4), ...)
acts first, then the even sublayer (bonds (2,3), (4,5), ...). Layers act in
order 1..d. With this ordering one layer of Trotter-parameterised gates is
exactly one first-order even/odd Trotter step.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm

from .errors import InvalidSizeError, ParameterLayoutError, UnsupportedHamiltonianError
from .lattice import OPEN, PERIODIC, Lattice, LocalHamiltonian

SHARED = "shared"
PER_GATE = "per_gate"
N_GATE_PARAMS = 5
ODD, EVEN = 0, 1


@dataclass(frozen=True)
class TwoQubitGateParams:
    eta: float = 0.0
    zeta: float = 0.0
    chi: float = 0.0
    gamma: float = 0.0
    phi: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.eta, self.zeta, self.chi, self.gamma, self.phi], dtype=float)

    @classmethod
    def from_array(cls, a) -> "TwoQubitGateParams":
        a = np.asarray(a, dtype=float)
        if a.shape != (N_GATE_PARAMS,):
            raise ParameterLayoutError(f"expected 5 gate angles, got shape {a.shape}")
        return cls(*map(float, a))


def gate_matrix(p) -> np.ndarray:
    """4x4 matrix of the Z-conserving gate in the basis |00>, |01>, |10>, |11>.

    The first label is the left site of the bond. Accepts a
    :class:`TwoQubitGateParams` or any length-5 sequence
    ``(eta, zeta, chi, gamma, phi)``.
    """
    if isinstance(p, TwoQubitGateParams):
        eta, zeta, chi, gamma, phi = p.as_array()
    else:
        eta, zeta, chi, gamma, phi = np.asarray(p, dtype=float)
    c, s = np.cos(eta), np.sin(eta)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = 1.0
    m[1, 1] = np.exp(-1j * (gamma + zeta)) * c
    m[1, 2] = -1j * np.exp(-1j * (gamma - chi)) * s
    m[2, 1] = -1j * np.exp(-1j * (gamma + chi)) * s
    m[2, 2] = np.exp(-1j * (gamma - zeta)) * c
    m[3, 3] = np.exp(-1j * (2 * gamma + phi))
    return m


_OFF_SECTOR = np.ones((4, 4), dtype=bool)
_OFF_SECTOR[0, 0] = _OFF_SECTOR[3, 3] = False
_OFF_SECTOR[1:3, 1:3] = False


def decompose_z_conserving(U: np.ndarray, atol: float = 1e-10) -> TwoQubitGateParams:
    """Angles reproducing a Z-conserving 4x4 unitary up to a global phase."""
    U = np.asarray(U, dtype=complex)
    if np.max(np.abs(U[_OFF_SECTOR])) > atol:
        raise UnsupportedHamiltonianError("two-qubit unitary mixes total-Z sectors")
    U = U * (np.conj(U[0, 0]) / abs(U[0, 0]))
    block = U[1:3, 1:3]
    gamma = -np.angle(np.linalg.det(block)) / 2
    b = block * np.exp(1j * gamma)  # now in SU(2)
    eta = np.arctan2(abs(b[0, 1]), abs(b[0, 0]))
    zeta = -np.angle(b[0, 0]) if abs(b[0, 0]) > atol else 0.0
    chi = np.angle(1j * b[0, 1]) if abs(b[0, 1]) > atol else 0.0
    phi = -np.angle(U[3, 3]) - 2 * gamma
    return TwoQubitGateParams(float(eta), float(zeta), float(chi), float(gamma), float(phi))


@dataclass(frozen=True)
class ParameterVector:
    """Flat angle vector plus the layout needed to place it in a circuit.

    ``shared`` mode stores one 5-angle set per sublayer, ordered
    ``[layer1-odd, layer1-even, layer2-odd, ...]`` (10 d angles). ``per_gate``
    mode stores 5 angles per gate in circuit application order.
    """

    angles: np.ndarray
    depth: int
    mode: str = SHARED
    size: int | None = None

    def __post_init__(self):
        a = np.array(self.angles, dtype=float).ravel()
        a.flags.writeable = False
        object.__setattr__(self, "angles", a)
        if self.mode not in (SHARED, PER_GATE):
            raise ParameterLayoutError(f"unknown parameter mode {self.mode!r}")
        if self.depth < 1:
            raise ParameterLayoutError("depth must be >= 1")
        if a.size % N_GATE_PARAMS:
            raise ParameterLayoutError("angle count must be a multiple of 5")
        if self.mode == SHARED and a.size != 10 * self.depth:
            raise ParameterLayoutError(
                f"shared mode needs 10*depth = {10 * self.depth} angles, got {a.size}"
            )

    def __len__(self) -> int:
        return self.angles.size

    def with_angles(self, angles) -> "ParameterVector":
        return replace(self, angles=np.asarray(angles, dtype=float))

    def sublayer_params(self, layer: int, sublayer: int) -> np.ndarray:
        if self.mode != SHARED:
            raise ParameterLayoutError("sublayer parameters exist only in shared mode")
        k = 2 * layer + sublayer
        return self.angles[5 * k : 5 * k + 5]

    def to_dict(self) -> dict:
        doc = {"depth": self.depth, "mode": self.mode, "angles": self.angles.tolist()}
        if self.size is not None:
            doc["size"] = self.size
        return doc

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, doc: dict) -> "ParameterVector":
        return cls(np.asarray(doc["angles"], dtype=float), int(doc["depth"]),
                   doc.get("mode", SHARED), doc.get("size"))

    @classmethod
    def from_json(cls, text: str) -> "ParameterVector":
        return cls.from_dict(json.loads(text))

    @classmethod
    def zeros(cls, depth: int) -> "ParameterVector":
        return cls(np.zeros(10 * depth), depth)


@dataclass(frozen=True)
class Gate:
    a: int
    b: int
    params: np.ndarray
    layer: int
    sublayer: int

    @property
    def sites(self) -> tuple[int, int]:
        return self.a, self.b

    def matrix(self) -> np.ndarray:
        return gate_matrix(self.params)


@dataclass(frozen=True)
class BrickworkCircuit:
    """Gates in application order, grouped by (layer, sublayer).

    After :func:`restrict_circuit` the sites are relabelled ``1..size`` and
    ``origin`` maps them back to the parent lattice.
    """

    size: int
    depth: int
    boundary: str
    gates: tuple[Gate, ...]
    origin: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.origin is None:
            object.__setattr__(self, "origin", tuple(range(1, self.size + 1)))

    @property
    def lattice(self) -> Lattice:
        return Lattice(self.size, self.boundary)

    def sublayers(self) -> list[list[Gate]]:
        out: dict[tuple[int, int], list[Gate]] = {}
        for g in self.gates:
            out.setdefault((g.layer, g.sublayer), []).append(g)
        return [out[k] for k in sorted(out)]

    def gate_sites(self) -> list[tuple[int, int, int, int]]:
        """``(layer, sublayer, a, b)`` in parent-lattice labels, for set comparisons."""
        o = self.origin
        return [(g.layer, g.sublayer, o[g.a - 1], o[g.b - 1]) for g in self.gates]


def _bonds(L: int, boundary: str, parity: int) -> list[tuple[int, int]]:
    first = 1 if parity == ODD else 2
    bonds = [(a, a + 1) for a in range(first, L, 2)]
    if parity == EVEN and boundary == PERIODIC and L > 2:
        bonds.append((L, 1))
    return bonds


def brickwork_bonds(L: int, boundary: str = OPEN) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """``(odd_bonds, even_bonds)`` of one brickwork layer."""
    if boundary == PERIODIC and L % 2:
        raise InvalidSizeError("periodic brickwork requires an even number of sites")
    return _bonds(L, boundary, ODD), _bonds(L, boundary, EVEN)


def n_gates(L: int, d: int, boundary: str = OPEN) -> int:
    odd, even = brickwork_bonds(L, boundary)
    return d * (len(odd) + len(even))


def build_brickwork(L: int, d: int, theta: ParameterVector, mode: str | None = None,
                    boundary: str = OPEN) -> BrickworkCircuit:
    if L < 2:
        raise InvalidSizeError("a brickwork circuit needs at least two sites")
    mode = mode or theta.mode
    if mode != theta.mode:
        raise ParameterLayoutError(f"parameter vector is in {theta.mode!r} mode, not {mode!r}")
    if theta.depth != d:
        raise ParameterLayoutError(f"parameter depth {theta.depth} != circuit depth {d}")
    odd, even = brickwork_bonds(L, boundary)
    if mode == PER_GATE and len(theta) != 5 * d * (len(odd) + len(even)):
        raise ParameterLayoutError(
            f"per-gate mode needs {5 * d * (len(odd) + len(even))} angles, got {len(theta)}"
        )
    gates = []
    k = 0
    for layer in range(d):
        for sub, bonds in ((ODD, odd), (EVEN, even)):
            for a, b in bonds:
                if mode == SHARED:
                    p = theta.sublayer_params(layer, sub)
                else:
                    p = theta.angles[5 * k : 5 * k + 5]
                    k += 1
                gates.append(Gate(a, b, p, layer, sub))
    return BrickworkCircuit(L, d, boundary, tuple(gates))


def restrict_circuit(V: BrickworkCircuit, j: int, Ltilde: float) -> BrickworkCircuit:
    """Keep the gates whose support lies inside the ``j``-centred window of size ``Ltilde``."""
    sites, covers_all = V.lattice.window(j, Ltilde)
    if covers_all:
        return V
    local = {s: i + 1 for i, s in enumerate(sites)}
    kept = tuple(
        Gate(local[g.a], local[g.b], g.params, g.layer, g.sublayer)
        for g in V.gates
        if g.a in local and g.b in local
    )
    origin = tuple(V.origin[s - 1] for s in sites)
    return BrickworkCircuit(len(sites), V.depth, OPEN, kept, origin)


def extend_parameters(theta_opt: ParameterVector, L: int) -> ParameterVector:
    """Reuse translation-invariant parameters on a chain of ``L`` sites."""
    if theta_opt.mode != SHARED:
        raise ParameterLayoutError("only shared (translation-invariant) parameters can be extended")
    return replace(theta_opt, size=L)


def trotter_params(tau: float, d: int) -> ParameterVector:
    """Shared parameters making every gate ``exp(-i t (XX+YY+ZZ))`` up to phase, ``t = tau/d``."""
    if d < 1:
        raise ParameterLayoutError("Trotter depth must be >= 1")
    t = tau / d
    layer = [2 * t, 0.0, 0.0, -2 * t, 4 * t]
    return ParameterVector(np.tile(layer, 2 * d), d, SHARED)


def bond_gate(terms, t: float, bond: tuple[int, int] | None = None) -> np.ndarray:
    """``exp(-i t h)`` for a bond operator ``h`` given as two-site Pauli terms.

    ``bond = (left, right)`` fixes which site is the first tensor factor; it
    matters only for the periodic wrap bond (L, 1).
    """
    from .statevector import PAULI  # statevector imports this module

    left = bond[0] if bond is not None else terms[0].sites[0]
    h = np.zeros((4, 4), dtype=complex)
    for term in terms:
        pa, pb = term.paulis if term.sites[0] == left else term.paulis[::-1]
        h += term.coeff * np.kron(PAULI[pa], PAULI[pb])
    return expm(-1j * t * h)


def trotter_circuit(H: LocalHamiltonian, tau: float, d: int) -> BrickworkCircuit:
    """``(exp(-i H_even tau/d) exp(-i H_odd tau/d))^d`` as per-bond Z-conserving gates."""
    if d < 1:
        raise ParameterLayoutError("Trotter depth must be >= 1")
    if H.d_H > 1:
        raise UnsupportedHamiltonianError("Trotter circuit needs a nearest-neighbour Hamiltonian")
    bonds = H.bond_terms()
    odd, even = brickwork_bonds(H.size, H.boundary)
    t = tau / d
    per_bond = {}
    for bond in odd + even:
        if bond in bonds:
            per_bond[bond] = decompose_z_conserving(bond_gate(bonds[bond], t, bond)).as_array()
        else:
            per_bond[bond] = np.zeros(5)
    angles = []
    for _ in range(d):
        for group in (odd, even):
            for bond in group:
                angles.append(per_bond[bond])
    theta = ParameterVector(np.concatenate(angles), d, PER_GATE)
    return build_brickwork(H.size, d, theta, PER_GATE, H.boundary)

"""Matrix-product-state simulation with SVD truncation.

Tensors have shape ``(left bond, 2, right bond)``; MPS position ``k`` (0-based)
holds chain site ``k + 1``. The state is kept in mixed canonical form around
``center``: everything left of it is left-orthonormal, everything right of it
right-orthonormal.

A gate on sites ``i < k`` is applied by merging the window ``i..k`` into one
tensor, contracting the gate into the two addressed legs and splitting the
window back with successive SVDs. For the doubled Bell register the window
spans three positions (the partner of the middle site rides along), which is
equivalent to routing through a swap and back but needs no explicit swap gate.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .circuits import BrickworkCircuit, trotter_circuit
from .errors import CapacityError, InvalidSizeError
from .lattice import OPEN, LocalHamiltonian
from .statevector import PAULI

PLAIN, A_SIDE, B_SIDE = "plain", "A", "B"
DEFAULT_CUTOFF = 1e-10
_BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
BELL_PROJECTOR = np.outer(_BELL, _BELL.conj())
_SWAP = np.eye(4)[[0, 2, 1, 3]]


def _svd(M: np.ndarray):
    try:
        return sla.svd(M, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError:
        return sla.svd(M, full_matrices=False, lapack_driver="gesvd", check_finite=False)


def truncation_rank(s: np.ndarray, chi_max: int | None, cutoff: float) -> tuple[int, float]:
    """Number of singular values to keep and the discarded relative weight.

    Values below ``cutoff * s[0]`` are dropped, then at most ``chi_max`` kept.
    """
    w = s * s
    total = w.sum()
    if total == 0:
        return 1, 0.0
    keep = int(np.count_nonzero(s > cutoff * s[0])) if cutoff > 0 else len(s)
    if chi_max is not None:
        keep = min(keep, chi_max)
    keep = max(keep, 1)
    return keep, float(w[keep:].sum() / total)


@dataclass
class MatrixProductState:
    tensors: list[np.ndarray]
    chi_max: int | None = None
    cutoff: float = DEFAULT_CUTOFF
    center: int = 0
    truncation_error: float = 0.0
    _gate_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.tensors)

    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "MatrixProductState":
        return MatrixProductState([t.copy() for t in self.tensors], self.chi_max, self.cutoff,
                                  self.center, self.truncation_error)

    # canonical form ------------------------------------------------------
    def move_center(self, k: int) -> None:
        T = self.tensors
        while self.center < k:
            c = self.center
            Dl, p, Dr = T[c].shape
            Q, R = np.linalg.qr(T[c].reshape(Dl * p, Dr))
            T[c] = Q.reshape(Dl, p, -1)
            T[c + 1] = np.tensordot(R, T[c + 1], axes=1)
            self.center += 1
        while self.center > k:
            c = self.center
            Dl, p, Dr = T[c].shape
            Q, R = np.linalg.qr(T[c].reshape(Dl, p * Dr).T)
            T[c] = Q.T.reshape(-1, p, Dr)
            T[c - 1] = np.tensordot(T[c - 1], R.T, axes=1)
            self.center -= 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.tensors[self.center]))

    def normalize(self) -> None:
        self.tensors[self.center] /= self.norm()

    # gates ---------------------------------------------------------------
    def apply_two_site(self, gate: np.ndarray, i: int, k: int) -> None:
        """Apply a 4x4 ``gate`` with its first factor on position ``i`` and second on ``k``."""
        if i == k or not (0 <= i < self.n and 0 <= k < self.n):
            raise IndexError(f"invalid MPS positions ({i}, {k}) for {self.n} sites")
        if i > k:
            i, k = k, i
            gate = _SWAP @ gate @ _SWAP
        start, stop = i, k
        going_right = self.center <= start
        if self.center < start:
            self.move_center(start)
        elif self.center > stop:
            self.move_center(stop)
        theta = self.tensors[start]
        for p in range(start + 1, stop + 1):
            theta = np.tensordot(theta, self.tensors[p], axes=1)
        w = stop - start + 1
        g = gate.reshape(2, 2, 2, 2)
        ax = (1, w)
        theta = np.tensordot(g, theta, axes=([2, 3], ax))
        theta = np.moveaxis(theta, [0, 1], ax)
        if going_right:
            self._split_right(theta, start, w)
        else:
            self._split_left(theta, start, w)

    def _split_right(self, T: np.ndarray, start: int, w: int) -> None:
        for p in range(w - 1):
            Dl = T.shape[0]
            U, S, Vh = _svd(T.reshape(Dl * 2, -1))
            keep, lost = truncation_rank(S, self.chi_max, self.cutoff)
            self.truncation_error += lost
            self.tensors[start + p] = U[:, :keep].reshape(Dl, 2, keep)
            T = (S[:keep, None] * Vh[:keep]).reshape((keep,) + T.shape[2:])
        self.tensors[start + w - 1] = T / np.linalg.norm(T)
        self.center = start + w - 1

    def _split_left(self, T: np.ndarray, start: int, w: int) -> None:
        for p in range(w - 1, 0, -1):
            Dr = T.shape[-1]
            U, S, Vh = _svd(T.reshape(-1, 2 * Dr))
            keep, lost = truncation_rank(S, self.chi_max, self.cutoff)
            self.truncation_error += lost
            self.tensors[start + p] = Vh[:keep].reshape(keep, 2, Dr)
            T = (U[:, :keep] * S[:keep]).reshape(T.shape[:-2] + (keep,))
        self.tensors[start] = T / np.linalg.norm(T)
        self.center = start

    def _position(self, site: int, register: str, n_sites: int) -> int:
        if not 1 <= site <= n_sites:
            raise IndexError(f"site {site} outside 1..{n_sites}")
        if register == PLAIN:
            return site - 1
        if register == A_SIDE:
            return 2 * (site - 1)
        if register == B_SIDE:
            return 2 * site - 1
        raise ValueError(f"unknown register {register!r}")

    def register_size(self, register: str) -> int:
        if register == PLAIN:
            return self.n
        if self.n % 2:
            raise InvalidSizeError("a doubled register has an even number of sites")
        return self.n // 2

    def apply_gate(self, gate: np.ndarray, a: int, b: int, register: str = PLAIN) -> None:
        """Apply ``gate`` on chain sites ``(a, b)`` of the addressed register.

        The B side of a doubled register receives the entrywise conjugate.
        """
        L = self.register_size(register)
        if abs(a - b) != 1:
            raise InvalidSizeError(
                f"MPS gates must act on nearest neighbours; got sites ({a}, {b})"
            )
        if register == B_SIDE:
            gate = gate.conj()
        self.apply_two_site(gate, self._position(a, register, L), self._position(b, register, L))

    def apply_circuit(self, V: BrickworkCircuit, register: str = PLAIN) -> None:
        if V.size != self.register_size(register):
            raise InvalidSizeError(f"circuit on {V.size} sites, register has {self.register_size(register)}")
        if V.boundary != OPEN and V.size > 2:
            raise InvalidSizeError("the MPS backend supports open-boundary circuits only")
        conj = register == B_SIDE
        L = V.size
        for sublayer in V.sublayers():
            gates = sorted(sublayer, key=lambda g: min(g.a, g.b))
            # walk the sublayer from whichever end the canonical center sits at
            first = self._position(min(gates[0].a, gates[0].b), register, L)
            last = self._position(max(gates[-1].a, gates[-1].b), register, L)
            if abs(self.center - last) < abs(self.center - first):
                gates.reverse()
            for g in gates:
                m = self._gate_matrix(g.params, conj)
                self.apply_two_site(m, self._position(g.a, register, L),
                                    self._position(g.b, register, L))

    def _gate_matrix(self, params: np.ndarray, conj: bool) -> np.ndarray:
        from .circuits import gate_matrix

        key = (params.tobytes(), conj)
        m = self._gate_cache.get(key)
        if m is None:
            m = gate_matrix(params)
            m = m.conj() if conj else m
            if len(self._gate_cache) > 4096:
                self._gate_cache.clear()
            self._gate_cache[key] = m
        return m

    # measurements ---------------------------------------------------------
    def expectation_one(self, op: np.ndarray, k: int) -> complex:
        """``<op>`` on MPS position ``k``."""
        self.move_center(k)
        T = self.tensors[k]
        return complex(np.einsum("asb,st,atb->", T.conj(), op, T) / np.vdot(T, T))

    def expectation_pair(self, op4: np.ndarray, k: int) -> complex:
        """``<op4>`` on adjacent positions ``(k, k+1)``, first factor on ``k``."""
        self.move_center(k)
        theta = np.tensordot(self.tensors[k], self.tensors[k + 1], axes=1)
        o = op4.reshape(2, 2, 2, 2)
        val = np.einsum("astb,stuv,auvb->", theta.conj(), o, theta)
        return complex(val / np.vdot(theta, theta))

    def local_expectation(self, op, j: int) -> float:
        """Real part of a single-site expectation on chain site ``j`` (1-based)."""
        if isinstance(op, str):
            op = PAULI[op]
        if not 1 <= j <= self.n:
            raise IndexError(f"site {j} outside 1..{self.n}")
        val = self.expectation_one(op, j - 1)
        if abs(val.imag) > 1e-10:
            raise ValueError(f"expectation has imaginary part {val.imag}; is the operator Hermitian?")
        return val.real

    def z_profile(self) -> np.ndarray:
        return np.array([self.local_expectation(PAULI["Z"], j) for j in range(1, self.n + 1)])

    def overlap(self, other: "MatrixProductState") -> complex:
        """``<self|other>``."""
        if other.n != self.n:
            raise InvalidSizeError("overlap needs equal site counts")
        E = np.ones((1, 1), dtype=complex)
        for a, b in zip(self.tensors, other.tensors):
            E = np.einsum("ab,asc,bsd->cd", E, a.conj(), b, optimize=True)
        return complex(E[0, 0])

    # dense conversion -------------------------------------------------------
    def to_dense(self) -> np.ndarray:
        """Amplitudes in the statevector convention (site 1 = least significant bit)."""
        T = self.tensors[0]
        for t in self.tensors[1:]:
            T = np.tensordot(T, t, axes=1)
        T = T.reshape((2,) * self.n)
        return np.transpose(T, tuple(range(self.n - 1, -1, -1))).reshape(-1)

    @classmethod
    def from_dense(cls, vec: np.ndarray, chi_max: int | None = None,
                   cutoff: float = DEFAULT_CUTOFF) -> "MatrixProductState":
        vec = np.asarray(vec, dtype=complex)
        n = vec.size.bit_length() - 1
        T = np.transpose(vec.reshape((2,) * n), tuple(range(n - 1, -1, -1))).reshape(1, -1)
        tensors = []
        err = 0.0
        for _ in range(n - 1):
            Dl = T.shape[0]
            U, S, Vh = _svd(T.reshape(Dl * 2, -1))
            keep, lost = truncation_rank(S, chi_max, cutoff)
            err += lost
            tensors.append(U[:, :keep].reshape(Dl, 2, keep))
            T = S[:keep, None] * Vh[:keep]
        tensors.append(T.reshape(T.shape[0], 2, 1) / np.linalg.norm(T))
        return cls(tensors, chi_max, cutoff, n - 1, err)

    # checkpoints ------------------------------------------------------------
    def save(self, path) -> None:
        arrays = {f"t{k}": t for k, t in enumerate(self.tensors)}
        np.savez(path, center=self.center, truncation_error=self.truncation_error,
                 chi_max=-1 if self.chi_max is None else self.chi_max, cutoff=self.cutoff, **arrays)

    @classmethod
    def load(cls, path) -> "MatrixProductState":
        with np.load(path) as f:
            n = sum(1 for k in f.files if k.startswith("t") and k[1:].isdigit())
            chi = int(f["chi_max"])
            return cls([f[f"t{k}"] for k in range(n)], None if chi < 0 else chi,
                       float(f["cutoff"]), int(f["center"]), float(f["truncation_error"]))


# ----------------------------------------------------------------------------
# state constructors
# ----------------------------------------------------------------------------
def product_state(bits, chi_max: int | None = None, cutoff: float = DEFAULT_CUTOFF) -> MatrixProductState:
    tensors = []
    for b in bits:
        t = np.zeros((1, 2, 1), dtype=complex)
        t[0, int(b), 0] = 1.0
        tensors.append(t)
    return MatrixProductState(tensors, chi_max, cutoff, 0)


def excitation_sites(L: int, Ltilde: int) -> tuple[int, int]:
    if (L - Ltilde) % 2 or not 0 < Ltilde < L:
        raise InvalidSizeError(f"need 0 < L~ < L with L - L~ even, got L={L}, L~={Ltilde}")
    return (L - Ltilde) // 2, (L + Ltilde) // 2


def local_excitation_bits(L: int, Ltilde: int) -> list[int]:
    """Two flipped spins at ``(L-L~)/2`` and ``(L+L~)/2``."""
    a, b = excitation_sites(L, Ltilde)
    return [int(j in (a, b)) for j in range(1, L + 1)]


def domain_wall_bits(L: int, Ltilde: int) -> list[int]:
    """Flipped block from ``(L-L~)/2`` to ``(L+L~)/2`` inclusive."""
    a, b = excitation_sites(L, Ltilde)
    return [int(a <= j <= b) for j in range(1, L + 1)]


def bell_register(Ltilde: int, chi_max: int | None = None,
                  cutoff: float = DEFAULT_CUTOFF) -> MatrixProductState:
    """``2 L~`` sites ordered ``A1, B1, A2, B2, ...``, each pair in ``(|00> + |11>)/sqrt 2``."""
    if Ltilde < 1:
        raise InvalidSizeError("register size must be positive")
    a = np.zeros((1, 2, 2), dtype=complex)
    a[0, 0, 0] = a[0, 1, 1] = 1.0
    b = np.zeros((2, 2, 1), dtype=complex)
    b[0, 0, 0] = b[1, 1, 0] = 1 / np.sqrt(2)
    tensors = []
    for _ in range(Ltilde):
        tensors += [a.copy(), b.copy()]
    # every tensor is left-orthonormal, so the last one carries the norm
    return MatrixProductState(tensors, chi_max, cutoff, 2 * Ltilde - 1)


def apply_gate_mps(psi: MatrixProductState, gate: np.ndarray, j: int,
                   register: str = PLAIN) -> MatrixProductState:
    """Copy of ``psi`` with ``gate`` applied on sites ``(j, j+1)`` of the register."""
    out = psi.copy()
    out.apply_gate(gate, j, j + 1, register)
    return out


def tebd_evolve(psi: MatrixProductState, H: LocalHamiltonian, tau: float,
                steps: int) -> MatrixProductState:
    """``(exp(-i H_even tau/d) exp(-i H_odd tau/d))^d`` applied to a copy of ``psi``."""
    out = psi.copy()
    if tau != 0:
        out.apply_circuit(trotter_circuit(H, tau, steps))
    return out


# ----------------------------------------------------------------------------
# doubled-register cost evaluation
# ----------------------------------------------------------------------------
class BellCostEvaluator:
    """HST / LHST costs of ``V`` against a fixed reference circuit on a ``2 L~`` MPS.

    The reference acts on the A side once; each evaluation copies that state
    and applies ``V*`` on the B side (the two sides commute).
    """

    def __init__(self, reference: BrickworkCircuit, chi_max: int | None = None,
                 cutoff: float = DEFAULT_CUTOFF, max_truncation: float | None = None):
        self.size = reference.size
        self.max_truncation = max_truncation
        reg = bell_register(self.size, chi_max, cutoff)
        reg.apply_circuit(reference, register=A_SIDE)
        self.base = reg
        self._bell = bell_register(self.size)

    def state(self, V: BrickworkCircuit) -> MatrixProductState:
        psi = self.base.copy()
        psi.apply_circuit(V, register=B_SIDE)
        if self.max_truncation is not None and psi.truncation_error > self.max_truncation:
            raise CapacityError(
                f"bond dimension {psi.chi_max} too small: truncation error "
                f"{psi.truncation_error:.3e} exceeds {self.max_truncation:.3e}"
            )
        return psi

    @staticmethod
    def _pair_weight(psi: MatrixProductState, j: int) -> float:
        return psi.expectation_pair(BELL_PROJECTOR, 2 * (j - 1)).real

    def lhst_j(self, V: BrickworkCircuit, j: int) -> float:
        return _unit(1.0 - self._pair_weight(self.state(V), j))

    def lhst_per_site(self, V: BrickworkCircuit, psi: MatrixProductState | None = None) -> list[float]:
        psi = self.state(V) if psi is None else psi
        return [_unit(1.0 - self._pair_weight(psi, j)) for j in range(1, self.size + 1)]

    def hst(self, V: BrickworkCircuit, psi: MatrixProductState | None = None) -> float:
        psi = self.state(V) if psi is None else psi
        return _unit(1.0 - abs(self._bell.overlap(psi)) ** 2)

    def report(self, V: BrickworkCircuit):
        from .costs import make_report

        psi = self.state(V)
        per_site = self.lhst_per_site(V, psi)
        c_hst = self.hst(V, psi)
        trunc = psi.truncation_error
        return make_report(c_hst, per_site, "mps", truncation_error=trunc)


def _unit(x: float) -> float:
    from .costs import clamp_unit

    # truncation can push a tiny cost slightly negative; clamp_unit rejects real violations
    return clamp_unit(x)


def cost_lhst_j_mps(H: LocalHamiltonian, theta, tau: float, j: int, Ltilde: int | None = None,
                    d_ref: int = 100, chi: int | None = 30) -> float:
    """``C_LHST^(j)`` between deep-Trotter ``exp(-i H tau)`` and the brickwork ``V(theta)``."""
    from .circuits import build_brickwork

    Ltilde = H.size if Ltilde is None else Ltilde
    if H.size != Ltilde:
        raise InvalidSizeError(f"Hamiltonian has {H.size} sites, expected {Ltilde}")
    ev = BellCostEvaluator(trotter_circuit(H, tau, d_ref), chi_max=chi)
    V = build_brickwork(Ltilde, theta.depth, theta, boundary=H.boundary)
    return ev.lhst_j(V, j)

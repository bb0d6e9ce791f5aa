"""Hilbert-Schmidt-test cost functions and their subsystem / local-compilation variants.

Dense evaluation never builds the doubled 2L-qubit register. With ``W = U V^†``

    Tr[Pi_j rho_AB(U, V)] = 1/4 (1 + sum_{P=X,Y,Z} Tr(W^† P_j W P_j) / 2^L),

all three Pauli terms entering with a plus sign: the ``-YY`` of the Bell
projector is cancelled by ``Y^T = -Y`` when the B-side Pauli is moved onto A.
``tests/test_costs.py`` pins this against an explicit Bell-register build.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .circuits import (SHARED, BrickworkCircuit, ParameterVector, build_brickwork,
                       restrict_circuit)
from .errors import ConstraintError, InvalidSizeError, NumericalIntegrityError, ParameterLayoutError
from .lattice import PERIODIC, Lattice, LocalHamiltonian, embed_hamiltonian, restrict_hamiltonian
from .statevector import PAULI, circuit_to_unitary, exact_evolution

CLAMP_SLACK = 1e-9
_XYZ = (PAULI["X"], PAULI["Y"], PAULI["Z"])


def clamp_unit(x: float, what: str = "cost") -> float:
    if not -CLAMP_SLACK <= x <= 1 + CLAMP_SLACK:
        raise NumericalIntegrityError(f"{what} = {x!r} is outside [0, 1] beyond rounding")
    return float(min(1.0, max(0.0, x)))


def _n_qubits(U: np.ndarray, V: np.ndarray) -> int:
    if U.shape != V.shape or U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InvalidSizeError(f"unitaries have mismatched shapes {U.shape} and {V.shape}")
    n = U.shape[0].bit_length() - 1
    if 1 << n != U.shape[0]:
        raise InvalidSizeError("dimension is not a power of two")
    return n


# ----------------------------------------------------------------------------
# plain HST / LHST
# ----------------------------------------------------------------------------
def cost_hst(U: np.ndarray, V: np.ndarray) -> float:
    """``1 - |Tr(U^† V)|^2 / 4^L``."""
    n = _n_qubits(U, V)
    tr = np.vdot(U, V)  # sum conj(U) * V = Tr(U^† V)
    return clamp_unit(1.0 - abs(tr) ** 2 / 4.0 ** n, "C_HST")


def _site_gram(W: np.ndarray, n: int, j: int) -> np.ndarray:
    """``K[r,s,d,e] = sum_rest conj(W[r.., d..]) W[s.., e..]`` over site ``j``'s row/column bits."""
    hi, lo = 1 << (n - j), 1 << (j - 1)
    W6 = W.reshape(hi, 2, lo, hi, 2, lo)
    return np.einsum("arbcdf,asbcef->rsde", W6.conj(), W6, optimize=True)


def pauli_overlaps(W: np.ndarray, j: int) -> np.ndarray:
    """``[Tr(W^† P_j W P_j) / 2^L for P in X, Y, Z]`` (real)."""
    n = W.shape[0].bit_length() - 1
    K = _site_gram(W, n, j)
    vals = [np.einsum("rsde,rs,ed->", K, P, P) for P in _XYZ]
    return np.real(np.array(vals)) / (1 << n)


def bell_pair_weight(W: np.ndarray, j: int) -> float:
    """``Tr[Pi_j rho_AB]`` for ``rho_AB`` prepared with ``W = U V^†``."""
    return 0.25 * (1.0 + float(np.sum(pauli_overlaps(W, j))))


def cost_lhst_j(U: np.ndarray, V: np.ndarray, j: int) -> float:
    n = _n_qubits(U, V)
    if not 1 <= j <= n:
        raise IndexError(f"site {j} outside 1..{n}")
    W = U @ V.conj().T
    return clamp_unit(1.0 - bell_pair_weight(W, j), f"C_LHST^({j})")


def cost_lhst_per_site(U: np.ndarray, V: np.ndarray) -> list[float]:
    n = _n_qubits(U, V)
    W = U @ V.conj().T
    return [clamp_unit(1.0 - bell_pair_weight(W, j), f"C_LHST^({j})") for j in range(1, n + 1)]


def cost_lhst(U: np.ndarray, V: np.ndarray) -> float:
    return float(np.mean(cost_lhst_per_site(U, V)))


def cost_alpha(U: np.ndarray, V: np.ndarray, alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    c = 0.0
    if alpha > 0:
        c += alpha * cost_hst(U, V)
    if alpha < 1:
        c += (1 - alpha) * cost_lhst(U, V)
    return c


def fidelity_bounds(c_hst: float, c_lhst: float, L: int) -> tuple[float, float]:
    """Average-gate-fidelity from ``C_HST`` (exact) and its lower bound from ``C_LHST``."""
    factor = 1.0 / (1.0 + 2.0 ** (-L))  # 2^L / (2^L + 1) without overflow
    return 1.0 - factor * c_hst, 1.0 - factor * L * c_lhst


# ----------------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------------
@dataclass
class CostReport:
    c_hst: float
    c_lhst: float
    c_lhst_per_site: list[float]
    fidelity_lower_bound_hst: float
    fidelity_lower_bound_lhst: float
    backend: str = "dense"
    epsilon_budget: tuple[float, float, float] | None = None
    truncation_error: float = 0.0

    @property
    def size(self) -> int:
        return len(self.c_lhst_per_site)

    def c_lhst_center(self) -> float:
        return self.c_lhst_per_site[self.size // 2 - 1]

    def check(self, atol: float = 1e-9) -> None:
        """Raise if the report violates its internal consistency relations."""
        if abs(self.c_lhst - float(np.mean(self.c_lhst_per_site))) > atol:
            raise NumericalIntegrityError("c_lhst is not the mean of the per-site costs")
        L = self.size
        if not (self.c_lhst - atol <= self.c_hst <= L * self.c_lhst + atol):
            raise NumericalIntegrityError(
                f"sandwich C_LHST <= C_HST <= L C_LHST violated: {self.c_lhst}, {self.c_hst}"
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["c_lhst_center"] = self.c_lhst_center()
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def make_report(c_hst: float, per_site: Sequence[float], backend: str = "dense",
                epsilon_budget=None, truncation_error: float = 0.0) -> CostReport:
    per_site = [float(c) for c in per_site]
    c_lhst = float(np.mean(per_site))
    f_hst, f_lhst = fidelity_bounds(c_hst, c_lhst, len(per_site))
    return CostReport(float(c_hst), c_lhst, per_site, f_hst, f_lhst, backend,
                      epsilon_budget, truncation_error)


def dense_report(U: np.ndarray, V: np.ndarray) -> CostReport:
    return make_report(cost_hst(U, V), cost_lhst_per_site(U, V), "dense")


# ----------------------------------------------------------------------------
# subsystem cost (generic, non-translation-invariant protocol)
# ----------------------------------------------------------------------------
def check_subsystem_constraints(Lp: float, Ltilde: float, d: int) -> float:
    """Validate ``4d >= L'`` and ``L~ >= L' + 2d' + 1``; return ``d' = d - L'/4``."""
    if 4 * d < Lp:
        raise ConstraintError(f"4d >= L' violated: 4*{d} < {Lp}")
    d_prime = d - Lp / 4
    if Ltilde < Lp + 2 * d_prime + 1:
        raise ConstraintError(
            f"L~ >= L' + 2d' + 1 violated: {Ltilde} < {Lp} + 2*{d_prime} + 1"
        )
    return d_prime


@dataclass
class _Subsystem:
    j: int
    local_j: int
    sites: tuple[int, ...]
    U: np.ndarray


class SubsystemCost:
    """Per-site subsystem costs ``C^(j)(U~^(L',j), V^(L~,j))`` with cached targets.

    Each summand lives on the ``|Lambda^(L~, j)|`` sites of its own window;
    the restricted targets are exponentiated once and reused for every
    parameter vector.
    """

    def __init__(self, H: LocalHamiltonian, tau: float, Lp: float, Ltilde: float, d: int,
                 sites: Sequence[int] | None = None, check: bool = True):
        if check:
            check_subsystem_constraints(Lp, Ltilde, d)
        self.H, self.tau, self.Lp, self.Ltilde, self.d = H, tau, Lp, Ltilde, d
        self.sites = list(sites) if sites is not None else list(H.lattice.sites)
        self._subsystems = [self._build(j) for j in self.sites]

    def _build(self, j: int) -> _Subsystem:
        H = self.H
        window, _ = H.lattice.window(j, self.Ltilde)
        pos = {s: i + 1 for i, s in enumerate(window)}
        Hr = restrict_hamiltonian(H, j, self.Lp)
        # Hr.origin lists parent sites; place them inside the L~ window
        Hw = embed_hamiltonian(Hr, Lattice(len(window)), [pos[s] for s in Hr.origin])
        return _Subsystem(j, pos[j], window, exact_evolution(Hw, self.tau))

    def per_site(self, theta: ParameterVector) -> list[float]:
        V = build_brickwork(self.H.size, self.d, theta, boundary=self.H.boundary)
        out = []
        for sub in self._subsystems:
            Vr = restrict_circuit(V, sub.j, self.Ltilde)
            out.append(cost_lhst_j(sub.U, circuit_to_unitary(Vr), sub.local_j))
        return out

    def __call__(self, theta: ParameterVector) -> float:
        # the sum is normalised by the full chain length, as in the generic protocol
        return float(np.sum(self.per_site(theta)) / self.H.size)


def subsystem_cost_generic(H: LocalHamiltonian, theta: ParameterVector, tau: float,
                           Lp: float, Ltilde: float, d: int) -> float:
    return SubsystemCost(H, tau, Lp, Ltilde, d)(theta)


# ----------------------------------------------------------------------------
# translation-invariant local-compilation cost
# ----------------------------------------------------------------------------
def local_compilation_cost_pbc(H_pbc, theta: ParameterVector, tau: float, alpha: float = 0.0,
                               Ltilde: int | None = None, single_site: bool = True) -> float:
    """``alpha C_HST + (1 - alpha) C_LHST`` on a periodic chain of ``L~`` sites.

    ``H_pbc`` is either the periodic ``L~``-site Hamiltonian or a callable
    ``L -> LocalHamiltonian``. With ``single_site`` the local part is taken at
    site ``L~/2`` only, which equals the site average by translation invariance.
    """
    if callable(H_pbc) and not isinstance(H_pbc, LocalHamiltonian):
        if Ltilde is None:
            raise ValueError("Ltilde is required when H_pbc is a Hamiltonian family")
        H_pbc = H_pbc(Ltilde)
    Ltilde = H_pbc.size if Ltilde is None else Ltilde
    if H_pbc.size != Ltilde:
        raise InvalidSizeError(f"Hamiltonian has {H_pbc.size} sites, expected L~ = {Ltilde}")
    if H_pbc.boundary != PERIODIC:
        raise ValueError("local_compilation_cost_pbc needs a periodic Hamiltonian")
    if Ltilde % 2:
        raise InvalidSizeError("the compilation size must be even")
    if theta.mode != SHARED:
        raise ParameterLayoutError("translation-invariant compilation needs shared parameters")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    U = exact_evolution(H_pbc, tau)
    V = circuit_to_unitary(build_brickwork(Ltilde, theta.depth, theta, boundary=PERIODIC))
    c = 0.0
    if alpha > 0:
        c += alpha * cost_hst(U, V)
    if alpha < 1:
        c_l = cost_lhst_j(U, V, Ltilde // 2) if single_site else cost_lhst(U, V)
        c += (1 - alpha) * c_l
    return c


class DenseObjective:
    """Angle vector -> compilation cost on a dense ``L~``-site register.

    The target unitary is computed once. ``site=None`` averages C_LHST over
    all sites; otherwise only the given site enters (the central-site
    shortcut).
    """

    def __init__(self, target: np.ndarray, size: int, depth: int, boundary: str = "open",
                 site: int | None = None, alpha: float = 0.0, mode: str = SHARED):
        self.U = target
        self.size, self.depth, self.boundary = size, depth, boundary
        self.site, self.alpha, self.mode = site, alpha, mode

    def circuit(self, angles) -> BrickworkCircuit:
        theta = ParameterVector(angles, self.depth, self.mode)
        return build_brickwork(self.size, self.depth, theta, boundary=self.boundary)

    def __call__(self, angles) -> float:
        V = circuit_to_unitary(self.circuit(angles))
        c = 0.0
        if self.alpha > 0:
            c += self.alpha * cost_hst(self.U, V)
        if self.alpha < 1:
            local = cost_lhst_j(self.U, V, self.site) if self.site else cost_lhst(self.U, V)
            c += (1 - self.alpha) * local
        return c

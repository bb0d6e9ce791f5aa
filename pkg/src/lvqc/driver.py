"""End-to-end compilation runs, size-extension studies and stroboscopic dynamics."""
from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .circuits import (PER_GATE, SHARED, BrickworkCircuit, ParameterVector, build_brickwork,
                       extend_parameters, trotter_circuit, trotter_params)
from .costs import CostReport, DenseObjective, SubsystemCost, dense_report
from .errors import CapacityError, OptimizerError
from .lattice import OPEN, PERIODIC, LocalHamiltonian, PauliTerm, Lattice, build_heisenberg_afm
from .mps import BellCostEvaluator, domain_wall_bits, local_excitation_bits, product_state
from .optimize import OptimizationTrace, OptimizerConfig, minimize
from .planner import LOCAL, LRBoundModel, plan_size
from .statevector import (PAULI, StateVector, apply_circuit, circuit_to_unitary, evolve_state,
                          exact_evolution, expectation)

# dense cost evaluation needs W = U V^† with 4^L entries; 12 qubits is ~270 MB
DENSE_EVAL_MAX = 12
PBC_THEOREM1, GENERIC_THEOREM2 = "pbc_theorem1", "generic_theorem2"


def _from_dict(cls, doc: dict):
    names = {f.name for f in fields(cls)}
    unknown = set(doc) - names
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return cls(**doc)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Translation-invariant nearest-neighbour family, buildable at any size.

    ``model="heisenberg"`` gives ``J sum (XX + YY + ZZ)``; ``model="bond"``
    uses ``bond_terms``, a list of ``[paulis, coeff]`` pairs placed on every
    bond.
    """

    model: str = "heisenberg"
    coupling: float = 1.0
    boundary: str = OPEN
    bond_terms: tuple = ()

    def build(self, L: int, boundary: str | None = None) -> LocalHamiltonian:
        boundary = boundary or self.boundary
        if self.model == "heisenberg":
            return build_heisenberg_afm(L, boundary, self.coupling)
        if self.model == "bond":
            bonds = [(j, j + 1) for j in range(1, L)]
            if boundary == PERIODIC and L > 2:
                bonds.append((L, 1))
            terms = tuple(PauliTerm(b, p, c) for b in bonds for p, c in self.bond_terms)
            return LocalHamiltonian(Lattice(L, boundary), terms)
        raise ValueError(f"unknown Hamiltonian model {self.model!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "HamiltonianSpec":
        doc = dict(doc)
        doc["bond_terms"] = tuple(tuple(t) for t in doc.get("bond_terms", ()))
        return _from_dict(cls, doc)


@dataclass(frozen=True)
class PlanSettings:
    variant: str = "finite_range"
    dim: int = 1
    v: float | None = None
    xi: float | None = None
    tolerance: float = 1e-2
    target: str = LOCAL
    system_size: int | None = None

    def model(self, H: LocalHamiltonian) -> LRBoundModel:
        kw = {k: getattr(self, k) for k in ("v", "xi") if getattr(self, k) is not None}
        return LRBoundModel.heuristic(H.g, H.k, H.d_H, self.variant, D=self.dim, **kw)


@dataclass
class CompileConfig:
    hamiltonian: HamiltonianSpec = field(default_factory=HamiltonianSpec)
    tau: float = 0.5
    depth: int = 3
    protocol: str = PBC_THEOREM1
    alpha: float = 0.0
    Ltilde: int | None = 8
    plan: PlanSettings | None = None
    backend: str = "auto"  # dense, mps or auto (dense up to DENSE_EVAL_MAX sites)
    chi: int = 30
    reference: str = "exact"  # exact or trotter; MPS always uses the Trotter reference
    d_ref: int = 100
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    eval_sizes: list[int] = field(default_factory=lambda: [8, 12, 16])
    baseline_depths: list[int] = field(default_factory=list)
    system_size: int | None = None  # generic protocol: full chain length
    Lp: float | None = None  # generic protocol: restriction size L'
    workers: int = 1

    def __post_init__(self):
        if self.protocol not in (PBC_THEOREM1, GENERIC_THEOREM2):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.backend not in ("auto", "dense", "mps"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.reference not in ("exact", "trotter"):
            raise ValueError(f"unknown reference {self.reference!r}")
        if self.Ltilde is None and self.plan is None:
            raise ValueError("give either an explicit Ltilde or planner settings")
        if self.Ltilde is not None and self.eval_sizes and self.Ltilde > min(self.eval_sizes):
            raise ValueError("Ltilde must not exceed the smallest evaluation size")
        if self.protocol == GENERIC_THEOREM2 and (self.system_size is None or self.Lp is None):
            raise ValueError("the generic protocol needs system_size and Lp")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "CompileConfig":
        doc = dict(doc)
        if "hamiltonian" in doc:
            doc["hamiltonian"] = HamiltonianSpec.from_dict(doc["hamiltonian"])
        if doc.get("plan") is not None:
            doc["plan"] = _from_dict(PlanSettings, doc["plan"])
        if "optimizer" in doc:
            doc["optimizer"] = _from_dict(OptimizerConfig, doc["optimizer"])
        return _from_dict(cls, doc)

    @classmethod
    def from_json_file(cls, path) -> "CompileConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass
class SizeEvaluation:
    L: int
    optimized: CostReport
    baselines: dict[int, CostReport]

    def to_dict(self) -> dict:
        return {"L": self.L, "optimized": self.optimized.to_dict(),
                "baselines": {str(d): r.to_dict() for d, r in self.baselines.items()}}


@dataclass
class RunReport:
    config: dict
    Ltilde: int
    plan: dict | None
    trace: OptimizationTrace | None
    theta_opt: ParameterVector | None
    initial_cost: float | None
    evaluations: list[SizeEvaluation]
    status: str = "ok"
    error: str | None = None

    def check(self) -> None:
        for ev in self.evaluations:
            ev.optimized.check()
            for r in ev.baselines.values():
                r.check()

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "error": self.error,
            "Ltilde": self.Ltilde,
            "plan": self.plan,
            "initial_cost": self.initial_cost,
            "theta_opt": None if self.theta_opt is None else self.theta_opt.to_dict(),
            "optimization": None if self.trace is None else self.trace.to_dict(),
            "evaluations": [e.to_dict() for e in self.evaluations],
            "config": self.config,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# ----------------------------------------------------------------------------
# objectives
# ----------------------------------------------------------------------------
class MpsObjective:
    """Angle vector -> ``alpha C_HST + (1 - alpha) C_LHST^(site)`` on the doubled MPS register."""

    def __init__(self, H: LocalHamiltonian, tau: float, depth: int, chi: int, d_ref: int,
                 site: int, alpha: float = 0.0):
        self.size, self.depth, self.site, self.alpha = H.size, depth, site, alpha
        self.evaluator = BellCostEvaluator(trotter_circuit(H, tau, d_ref), chi_max=chi)

    def circuit(self, angles) -> BrickworkCircuit:
        return build_brickwork(self.size, self.depth, ParameterVector(angles, self.depth))

    def __call__(self, angles) -> float:
        ev = self.evaluator
        psi = ev.state(self.circuit(angles))
        c = 0.0
        if self.alpha > 0:
            c += self.alpha * ev.hst(None, psi)
        if self.alpha < 1:
            c += (1 - self.alpha) * max(0.0, 1.0 - ev._pair_weight(psi, self.site))
        return c


class _GenericObjective:
    def __init__(self, cost: SubsystemCost, depth: int):
        self.cost, self.depth = cost, depth

    def __call__(self, angles) -> float:
        return self.cost(ParameterVector(angles, self.depth, PER_GATE))


def _use_dense(cfg: CompileConfig, L: int) -> bool:
    if cfg.backend == "dense":
        if L > DENSE_EVAL_MAX:
            raise CapacityError(
                f"dense cost evaluation is limited to {DENSE_EVAL_MAX} sites (got {L}); use the MPS backend"
            )
        return True
    if cfg.backend == "mps":
        return False
    return L <= DENSE_EVAL_MAX


def _reference_unitary(cfg: CompileConfig, H: LocalHamiltonian) -> np.ndarray:
    if cfg.reference == "exact":
        return exact_evolution(H, cfg.tau)
    return circuit_to_unitary(trotter_circuit(H, cfg.tau, cfg.d_ref))


def trotter_parameters_per_gate(H: LocalHamiltonian, tau: float, d: int) -> ParameterVector:
    V = trotter_circuit(H, tau, d)
    return ParameterVector(np.concatenate([g.params for g in V.gates]), d, PER_GATE)


# ----------------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------------
def evaluate_parameters(cfg: CompileConfig, theta: ParameterVector, L: int,
                        baseline_depths: list[int] | None = None) -> SizeEvaluation:
    """Cost report for ``theta`` extended to ``L`` sites and for Trotter baselines."""
    H = cfg.hamiltonian.build(L)
    depths = baseline_depths if baseline_depths is not None else sorted({cfg.depth, *cfg.baseline_depths})
    if theta.mode == SHARED:
        theta_L = extend_parameters(theta, L)
        V = build_brickwork(L, theta.depth, theta_L, boundary=H.boundary)
    else:
        V = build_brickwork(L, theta.depth, theta, boundary=H.boundary)
    baselines_V = {d: trotter_circuit(H, cfg.tau, d) for d in depths}
    if _use_dense(cfg, L):
        U = _reference_unitary(cfg, H)
        opt = dense_report(U, circuit_to_unitary(V))
        base = {d: dense_report(U, circuit_to_unitary(Vb)) for d, Vb in baselines_V.items()}
    else:
        ev = BellCostEvaluator(trotter_circuit(H, cfg.tau, cfg.d_ref), chi_max=cfg.chi)
        opt = ev.report(V)
        base = {d: ev.report(Vb) for d, Vb in baselines_V.items()}
    return SizeEvaluation(L, opt, base)


def resolve_size(cfg: CompileConfig) -> tuple[int, dict | None]:
    if cfg.Ltilde is not None:
        return cfg.Ltilde, None
    H = cfg.hamiltonian.build(max(4, min(cfg.eval_sizes or [4])))
    p = cfg.plan
    target, size = p.target, p.system_size
    if size is None and cfg.eval_sizes:
        size = max(cfg.eval_sizes)
    plan = plan_size(p.model(H), cfg.tau, cfg.depth, H.metadata, p.tolerance, target, size)
    return plan.Ltilde, plan.to_dict()


def run_lvqc(cfg: CompileConfig, log=None) -> RunReport:
    """Plan, optimise from the Trotter initialisation, extend and evaluate."""
    Ltilde, plan = resolve_size(cfg)
    executor = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    site = Ltilde // 2

    if cfg.protocol == PBC_THEOREM1:
        H = cfg.hamiltonian.build(Ltilde)
        theta0 = trotter_params(cfg.tau, cfg.depth)
        if _use_dense(cfg, Ltilde):
            objective = DenseObjective(_reference_unitary(cfg, H), Ltilde, cfg.depth, H.boundary,
                                       site=site, alpha=cfg.alpha)
        else:
            objective = MpsObjective(H, cfg.tau, cfg.depth, cfg.chi, cfg.d_ref, site, cfg.alpha)
        sizes = cfg.eval_sizes
    else:
        H = cfg.hamiltonian.build(cfg.system_size)
        theta0 = trotter_parameters_per_gate(H, cfg.tau, cfg.depth)
        objective = _GenericObjective(SubsystemCost(H, cfg.tau, cfg.Lp, Ltilde, cfg.depth), cfg.depth)
        sizes = [cfg.system_size]

    callback = None
    if log is not None:
        callback = lambda r: log(f"iter {r.iteration:4d}  cost {r.cost:.6e}  |g| {r.grad_norm:.2e}  "
                                 f"step {r.step:.2e}  {r.seconds:8.1f}s")
    initial = float(objective(theta0.angles))
    try:
        trace = minimize(objective, theta0, cfg.optimizer, executor=executor, callback=callback)
    except OptimizerError as exc:
        return RunReport(cfg.to_dict(), Ltilde, plan, None, None, initial, [], "optimizer_failure", str(exc))
    finally:
        if executor is not None:
            executor.shutdown()
    theta_opt = trace.theta()
    evaluations = [evaluate_parameters(cfg, theta_opt, L) for L in sizes]
    report = RunReport(cfg.to_dict(), Ltilde, plan, trace, theta_opt, initial, evaluations)
    report.check()
    return report


# ----------------------------------------------------------------------------
# stroboscopic dynamics
# ----------------------------------------------------------------------------
@dataclass
class DynamicsResult:
    L: int
    site: int
    tau: float
    initial: str
    compiled: list[float]
    reference: list[float]
    backend: str
    reference_kind: str

    @property
    def mse(self) -> float:
        """Mean-square deviation over steps ``1..n`` (step 0 is identical by construction)."""
        a, b = np.array(self.compiled[1:]), np.array(self.reference[1:])
        return float(np.mean((a - b) ** 2)) if a.size else 0.0

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["series", "step", "t", "site", "value"])
            for name, series in (("compiled", self.compiled), ("reference", self.reference)):
                for n, val in enumerate(series):
                    w.writerow([name, n, repr(n * self.tau), self.site, repr(val)])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mse"] = self.mse
        return d


def initial_bits(kind: str, L: int, Ltilde: int) -> list[int]:
    kind = kind.upper()
    if kind == "LE":
        return local_excitation_bits(L, Ltilde)
    if kind == "DW":
        return domain_wall_bits(L, Ltilde)
    raise ValueError(f"initial state must be LE or DW, got {kind!r}")


def run_stroboscopic(theta_opt: ParameterVector, L: int, initial: str, n_steps: int,
                     backend: str = "dense", *, Ltilde: int, tau: float,
                     hamiltonian: HamiltonianSpec = HamiltonianSpec(), chi: int = 60,
                     d_ref: int = 100, reference: str | None = None) -> DynamicsResult:
    """``<Z_{L/2}>`` after each of ``n_steps`` applications of ``V^(L)(theta_opt)``.

    The reference is exact repeated evolution on the dense backend (or a
    ``d_ref``-step Trotter circuit per period with ``reference="trotter"``)
    and ``d_ref``-step TEBD per period on the MPS backend.
    """
    if theta_opt.mode != SHARED:
        raise ValueError("stroboscopic dynamics needs shared (translation-invariant) parameters")
    if L % 2:
        raise ValueError("L must be even")
    H = hamiltonian.build(L)
    V = build_brickwork(L, theta_opt.depth, extend_parameters(theta_opt, L), boundary=H.boundary)
    bits = initial_bits(initial, L, Ltilde)
    site = L // 2
    Z = PAULI["Z"]
    if backend == "dense":
        reference = reference or "exact"
        psi = StateVector.basis(bits).amplitudes
        ref = psi.copy()
        ref_circuit = trotter_circuit(H, tau, d_ref) if reference == "trotter" else None
        comp_series, ref_series = [expectation(psi, Z, site)], [expectation(ref, Z, site)]
        for _ in range(n_steps):
            psi = apply_circuit(psi, V)
            ref = apply_circuit(ref, ref_circuit) if ref_circuit else evolve_state(ref, H, tau)
            comp_series.append(expectation(psi, Z, site))
            ref_series.append(expectation(ref, Z, site))
    elif backend == "mps":
        reference = "trotter"
        psi = product_state(bits, chi)
        ref = product_state(bits, chi)
        step_circuit = trotter_circuit(H, tau, d_ref)
        comp_series, ref_series = [psi.local_expectation(Z, site)], [ref.local_expectation(Z, site)]
        for _ in range(n_steps):
            psi.apply_circuit(V)
            ref.apply_circuit(step_circuit)
            comp_series.append(psi.local_expectation(Z, site))
            ref_series.append(ref.local_expectation(Z, site))
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return DynamicsResult(L, site, tau, initial.upper(), comp_series, ref_series, backend, reference)

"""Single-register sampling estimators for the HST and LHST costs.

Bell-pair expectation values ``F(W, P_A, P_B) = <Phi+|(W x I)^† (P_A x P_B) (W x I)|Phi+>``
are rewritten as ``2^-L sum_x alpha_x <y_x| W^† P_A W |x>`` with
``P_B|x> = alpha_x |y_x>``. Each matrix element is read off from expectation
values in the superposition states ``(|x> ± |y>)/sqrt 2`` (real part) or
``(|x> ± i|y>)/sqrt 2`` (imaginary part), so only an L-qubit register is
simulated. Measurement shots are drawn from the exact outcome probabilities.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidSizeError
from .statevector import DENSE_MAX_QUBITS, _check_capacity, pauli_action


@dataclass(frozen=True)
class EstimatorConfig:
    N1: int = 64
    N2: int = 4096
    N3: int = 1000
    seed: int = 0

    def __post_init__(self):
        if min(self.N1, self.N2, self.N3) < 1:
            raise ValueError("sample counts must be positive")


@dataclass(frozen=True)
class Estimate:
    estimate: float
    stderr: float

    def __iter__(self):
        return iter((self.estimate, self.stderr))

    def to_json(self, cfg: EstimatorConfig | None = None) -> str:
        doc = asdict(self)
        if cfg is not None:
            doc.update(asdict(cfg))
        return json.dumps(doc)


def parse_pauli(spec, n: int) -> tuple[tuple[int, ...], str]:
    """Accept ``"IXZ"`` (character ``i`` on site ``i+1``) or ``(sites, labels)``."""
    if isinstance(spec, str):
        if len(spec) != n:
            raise InvalidSizeError(f"Pauli string {spec!r} does not have length {n}")
        pairs = [(i + 1, p) for i, p in enumerate(spec.upper()) if p != "I"]
        if any(p not in "XYZ" for _, p in pairs):
            raise ValueError(f"invalid Pauli string {spec!r}")
        return tuple(s for s, _ in pairs), "".join(p for _, p in pairs)
    sites, labels = spec
    return tuple(sites), str(labels).upper()


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def _sampled_expectation(WS: np.ndarray, target: np.ndarray, phase: np.ndarray, shots: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Shot estimates of ``<s|W^† P W|s>`` for the columns ``W s`` of ``WS``."""
    exact = np.real(np.sum(WS.conj()[target] * (phase[:, None] * WS), axis=0))
    p_plus = np.clip((1.0 + exact) / 2.0, 0.0, 1.0)
    return 2.0 * rng.binomial(shots, p_plus) / shots - 1.0


def estimate_F(W: np.ndarray, P_A, P_B, cfg: EstimatorConfig = EstimatorConfig(),
               rng=None, samples: int | None = None) -> Estimate:
    """Sampled ``F(W, P_A, P_B)`` with its standard error."""
    dim = W.shape[0]
    n = dim.bit_length() - 1
    _check_capacity(n, DENSE_MAX_QUBITS)
    rng = _rng(cfg.seed if rng is None else rng)
    N2 = cfg.N2 if samples is None else samples
    tA, phA = pauli_action(*parse_pauli(P_A, n), n)
    tB, phB = pauli_action(*parse_pauli(P_B, n), n)

    x = rng.integers(0, dim, size=N2)
    y, alpha = tB[x], phB[x]
    diag = y == x
    imag = np.abs(alpha.imag) > 0.5  # alpha is one of ±1, ±i
    cols = np.arange(N2)

    def measured(coeff_y: np.ndarray) -> np.ndarray:
        S = np.zeros((dim, N2), dtype=complex)
        S[x, cols] = 1.0
        S[y, cols] += coeff_y  # y == x never reaches here with a nonzero coefficient
        S /= np.linalg.norm(S, axis=0)
        return _sampled_expectation(W @ S, tA, phA, cfg.N1, rng)

    c = np.where(imag, 1j, 1.0) * ~diag
    plus, minus = measured(c), measured(-c)
    element = np.where(imag, 0.5j * (plus - minus), 0.5 * (plus - minus))
    # when y == x the element is a plain expectation value; the "plus" state is |x> itself
    element = np.where(diag, plus, element)
    f = np.real(alpha * element)
    return Estimate(float(f.mean()), float(f.std(ddof=1) / np.sqrt(N2)) if N2 > 1 else float("inf"))


def bell_pauli_exact(W: np.ndarray, P_A, P_B) -> float:
    """Exact ``F(W, P_A, P_B) = Tr(W^† P_A W P_B^T) / 2^L`` (reference value)."""
    n = W.shape[0].bit_length() - 1
    tA, phA = pauli_action(*parse_pauli(P_A, n), n)
    tB, phB = pauli_action(*parse_pauli(P_B, n), n)
    x = np.arange(W.shape[0])
    O = W.conj().T @ _apply_rows(W, tA, phA)
    return float(np.real(np.sum(phB * O[tB, x])) / W.shape[0])


def _apply_rows(M: np.ndarray, target: np.ndarray, phase: np.ndarray) -> np.ndarray:
    out = np.empty(M.shape, dtype=np.result_type(M, phase))
    out[target] = phase[:, None] * M
    return out


def _site_pauli(label: str, j: int, n: int) -> tuple[tuple[int, ...], str]:
    if not 1 <= j <= n:
        raise IndexError(f"site {j} outside 1..{n}")
    return (j,), label


def estimate_lhst_j(U: np.ndarray, V: np.ndarray, j: int, cfg: EstimatorConfig = EstimatorConfig(),
                    rng=None) -> Estimate:
    """``1 - (1/4)(1 + F_X - F_Y + F_Z)`` with ``F_O = F(U V^†, O_j, O_j)``."""
    n = U.shape[0].bit_length() - 1
    rng = _rng(cfg.seed if rng is None else rng)
    W = U @ V.conj().T
    streams = rng.spawn(3)
    F = {}
    for (label, sign), r in zip((("X", 1), ("Y", -1), ("Z", 1)), streams):
        P = _site_pauli(label, j, n)
        F[label] = (sign, estimate_F(W, P, P, cfg, r))
    value = 1.0 - 0.25 * (1.0 + sum(s * e.estimate for s, e in F.values()))
    err = 0.25 * np.sqrt(sum(e.stderr ** 2 for _, e in F.values()))
    return Estimate(float(value), float(err))


def estimate_hst(U: np.ndarray, V: np.ndarray, cfg: EstimatorConfig = EstimatorConfig(),
                 rng=None) -> Estimate:
    """``1 - mean_P(c_P F(U V^†, P, P))`` over ``N3`` uniform Pauli strings."""
    dim = U.shape[0]
    n = dim.bit_length() - 1
    rng = _rng(cfg.seed if rng is None else rng)
    W = U @ V.conj().T
    draws = rng.integers(0, 4, size=(cfg.N3, n))
    streams = rng.spawn(cfg.N3)
    terms = np.empty(cfg.N3)
    for k, (row, r) in enumerate(zip(draws, streams)):
        label = "".join("IXYZ"[c] for c in row)
        sign = 1.0 if label.count("Y") % 2 == 0 else -1.0
        terms[k] = sign * estimate_F(W, label, label, cfg, r).estimate
    err = terms.std(ddof=1) / np.sqrt(cfg.N3) if cfg.N3 > 1 else float("inf")
    return Estimate(float(1.0 - terms.mean()), float(err))

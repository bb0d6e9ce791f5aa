"""Lieb-Robinson error estimates and compilation-size planning.

``epsilon_lr`` estimates the error made by replacing the full Hamiltonian with
its restriction to a causal-cone window. Every unnamed prefactor defaults to
1, so the values are model estimates and not certified bounds; plans carry
``certified = False`` to say so.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from scipy import integrate

from .errors import PlanInfeasibleError, ProtocolInapplicableError

FINITE, SHORT, LONG = "finite_range", "short_range", "long_range"
LOCAL, GLOBAL = "local", "global"
MAX_LENGTH = 4096
MAX_PAIR_SUM = 1024


@dataclass(frozen=True)
class LRBoundModel:
    variant: str = FINITE
    D: int = 1
    C_lr: float = 1.0
    v: float = 2.0
    xi: float = 1.0
    # short range
    h: float = 1.0
    zeta: float = 1.0
    C6: float = 1.0
    # long range
    alpha: float = 3.0
    sigma: float | None = None
    f_sigma_vtau: float = 1.0
    C9: float = 1.0
    C10: float | None = None
    C11: float = 1.0

    def __post_init__(self):
        if self.variant not in (FINITE, SHORT, LONG):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.D < 1:
            raise ValueError("dimension must be >= 1")
        if self.v <= 0 or self.xi <= 0:
            raise ValueError("need v > 0 and xi > 0")
        if self.variant == SHORT and self.zeta <= 0:
            raise ValueError("need zeta > 0")
        if self.variant == LONG:
            if self.alpha <= self.D:
                raise ProtocolInapplicableError(
                    f"long-range Lieb-Robinson bound needs alpha > D, got alpha={self.alpha}, D={self.D}"
                )
            lo = (self.D + 1) / (self.alpha + 1)
            if self.sigma is None:
                object.__setattr__(self, "sigma", (lo + 1) / 2)
            if not lo < self.sigma < 1:
                raise ValueError(f"sigma must lie in ({lo:.6g}, 1), got {self.sigma}")

    @classmethod
    def heuristic(cls, g: float, k: int, d_H: int, variant: str = FINITE, **kw) -> "LRBoundModel":
        """Default ``v = 2 g k d_H`` and ``xi = d_H`` for a nearest-neighbour-like chain."""
        kw.setdefault("v", 2 * g * k * max(d_H, 1))
        kw.setdefault("xi", float(max(d_H, 1)))
        return cls(variant=variant, **kw)

    @property
    def c10(self) -> float:
        if self.C10 is not None:
            return self.C10
        return self.f_sigma_vtau / (self.sigma * self.alpha - self.D)

    def to_dict(self) -> dict:
        return asdict(self)


def _check_lengths(l0: float, r_H: float | None, tau: float) -> None:
    if l0 <= 0 or tau < 0:
        raise ValueError(f"need l0 > 0 and tau >= 0, got l0={l0}, tau={tau}")
    if r_H is not None and r_H <= 0:
        raise ValueError(f"need r_H > 0, got {r_H}")


def finite_range_integral(model: LRBoundModel, l0: float, tau: float) -> float:
    """Closed form of ``C ∫_{l0+v tau}^∞ r^(D-1) exp(-(r - v tau)/xi) dr``."""
    D, xi = model.D, model.xi
    a = l0 + model.v * tau
    s = sum(math.factorial(D - 1) / math.factorial(m) * a ** m * xi ** (D - 1 - m) for m in range(D))
    return model.C_lr * xi * math.exp(-l0 / xi) * s


def finite_range_quadrature(model: LRBoundModel, l0: float, tau: float) -> float:
    """The same integral by adaptive quadrature (independent oracle)."""
    vt, xi, D = model.v * tau, model.xi, model.D
    val, _ = integrate.quad(lambda r: r ** (D - 1) * math.exp(-(r - vt) / xi), l0 + vt, math.inf,
                            epsabs=0.0, epsrel=1e-12, limit=200)
    return model.C_lr * val


def epsilon_lr(model: LRBoundModel, l0: float, tau: float, r_H: float | None = None) -> float:
    _check_lengths(l0, r_H, tau)
    vt = model.v * tau
    D = model.D
    if model.variant == FINITE:
        return finite_range_integral(model, l0, tau)
    if r_H is None:
        raise ValueError(f"{model.variant} bound needs the cut-off length r_H")
    if model.variant == SHORT:
        tail = model.C6 * (l0 + r_H + vt) ** D * r_H ** (D - 1) * math.exp(-r_H / model.zeta)
        return finite_range_integral(model, l0, tau) + tail
    a = l0 + vt
    s, alpha = model.sigma, model.alpha
    t1 = model.C9 * math.exp(vt - a ** (1 - s)) * a ** (D + 1 - s)
    t2 = model.c10 * a ** (D - s * alpha)
    t3 = model.C11 * (l0 + r_H + vt) ** D / r_H ** alpha
    return t1 + t2 + t3


@dataclass
class CompilationPlan:
    l0: int
    r_H: int | None
    Lp: int
    d: int
    d_prime: float
    Ltilde: int
    epsilon_lr: float
    target: str = LOCAL
    system_size: int | None = None
    depth_guideline_met: bool = True
    certified: bool = False
    model: dict = field(default_factory=dict)

    def check(self) -> None:
        if self.Ltilde % 2:
            raise AssertionError(f"L~ = {self.Ltilde} is odd")
        if self.Ltilde < self.Lp + 2 * self.d_prime + 1:
            raise AssertionError("L~ >= L' + 2d' + 1 violated")
        if self.d_prime < 0:
            raise AssertionError("d' < 0")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def table(self) -> str:
        rows = [("l0", self.l0), ("r_H", self.r_H), ("L'", self.Lp), ("d", self.d),
                ("d'", self.d_prime), ("L~", self.Ltilde), ("epsilon_LR", f"{self.epsilon_lr:.3e}"),
                ("target", self.target if self.system_size is None else f"{self.target}:{self.system_size}"),
                ("4d >= L'", self.depth_guideline_met), ("certified", self.certified)]
        w = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{w}}  {v}" for k, v in rows)


def compilation_size(Lp: float, d_prime: float) -> int:
    """Smallest even integer ``>= L' + 2 d' + 1``."""
    x = math.ceil(Lp + 2 * d_prime + 1 - 1e-12)
    return x + (x % 2)


def sizes_for(l0: float, reach: float, tau: float, v: float, d: int) -> tuple[int, float, int, bool]:
    """``(L', d', L~, 4d >= L')`` for a window half-width ``l0 + reach + v tau``."""
    Lp = math.ceil(2 * (l0 + reach + v * tau) - 1e-12)
    met = 4 * d >= Lp
    d_prime = max(0.0, d - Lp / 4)
    return Lp, d_prime, compilation_size(Lp, d_prime), met


def _candidates(model: LRBoundModel, d_H: int):
    """``(l0, r_H)`` pairs in order of increasing window half-width."""
    if model.variant == FINITE:
        for l0 in range(1, MAX_LENGTH):
            yield l0, None
        return
    for total in range(2, MAX_PAIR_SUM):
        for l0 in range(1, total):
            yield l0, total - l0


def plan_size(model: LRBoundModel, tau: float, d: int, H_meta: tuple[float, int, int],
              tolerance: float, target: str = LOCAL, system_size: int | None = None) -> CompilationPlan:
    """Smallest window whose estimated error meets ``tolerance``.

    For ``target="global"`` the requirement is ``L^D * eps <= tolerance`` with
    ``L = system_size``. Raises :class:`PlanInfeasibleError` when the resulting
    ``L~`` would exceed the system size.
    """
    if not 0 < tolerance <= 1:
        raise ValueError("tolerance must lie in (0, 1]")
    if d < 1:
        raise ValueError("depth must be >= 1")
    _, _, d_H = H_meta
    if target not in (LOCAL, GLOBAL):
        raise ValueError(f"unknown target {target!r}")
    if target == GLOBAL:
        if system_size is None:
            raise ValueError("a global target needs the system size L")
        if model.variant == LONG and model.alpha <= 2 * model.D:
            raise ProtocolInapplicableError(
                f"global-fidelity planning for power-law interactions needs alpha > 2D, got {model.alpha}"
            )
    scale = float(system_size) ** model.D if target == GLOBAL else 1.0

    best_eps = math.inf
    best_sum = None
    chosen = None
    for l0, r_H in _candidates(model, d_H):
        reach = d_H if r_H is None else r_H
        Lp, d_prime, Lt, met = sizes_for(l0, reach, tau, model.v, d)
        if system_size is not None and Lt > system_size:
            break
        if best_sum is not None and l0 + (r_H or 0) > best_sum:
            break  # every pair of the minimal half-width has been scanned
        eps = epsilon_lr(model, l0, tau, r_H)
        best_eps = min(best_eps, eps)
        if scale * eps <= tolerance and (chosen is None or eps < chosen[-1]):
            chosen = (l0, r_H, Lp, d_prime, Lt, met, eps)
            best_sum = l0 + (r_H or 0)
    if chosen is None:
        if not math.isfinite(best_eps):  # even the smallest window is larger than the system
            first = next(iter(_candidates(model, d_H)))
            best_eps = epsilon_lr(model, first[0], tau, first[1])
        raise PlanInfeasibleError(
            f"no window{'' if system_size is None else f' with L~ <= {system_size}'} reaches "
            f"tolerance {tolerance:g}; smallest estimate {scale * best_eps:.3e}",
            achievable_epsilon=scale * best_eps,
        )
    l0, r_H, Lp, d_prime, Lt, met, eps = chosen
    plan = CompilationPlan(l0, r_H, Lp, d, d_prime, Lt, eps, target, system_size, met, False,
                           model.to_dict())
    plan.check()
    return plan

"""1D lattices and local Hamiltonians written as sums of Pauli strings.

Sites are 1-indexed throughout the public API. A restricted Hamiltonian lives
on a fresh open lattice ``1..n`` and remembers which sites of its parent it
came from in ``origin``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InvalidSizeError, UnsupportedHamiltonianError

OPEN = "open"
PERIODIC = "periodic"
_BOUNDARIES = (OPEN, PERIODIC)


@dataclass(frozen=True)
class Lattice:
    size: int
    boundary: str = OPEN

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise InvalidSizeError(f"lattice size must be a positive integer, got {self.size}")
        if self.boundary not in _BOUNDARIES:
            raise ValueError(f"boundary must be one of {_BOUNDARIES}, got {self.boundary!r}")

    @property
    def sites(self) -> range:
        return range(1, self.size + 1)

    def check_site(self, j: int) -> None:
        if not 1 <= j <= self.size:
            raise IndexError(f"site {j} outside lattice 1..{self.size}")

    def distance(self, a: int, b: int) -> int:
        d = abs(a - b)
        if self.boundary == PERIODIC:
            d = min(d, self.size - d)
        return d

    def window(self, j: int, size: float) -> tuple[tuple[int, ...], bool]:
        """Sites within distance ``size/2`` of ``j``, in chain order.

        Returns ``(sites, covers_all)``. For a periodic lattice the window is
        listed cyclically starting from its left end, so that consecutive
        entries are nearest neighbours; when it covers the whole ring the
        natural order ``1..L`` is returned instead.
        """
        self.check_site(j)
        half = int(size // 2)
        L = self.size
        if self.boundary == OPEN:
            lo, hi = max(1, j - half), min(L, j + half)
            sites = tuple(range(lo, hi + 1))
            return sites, len(sites) == L
        if 2 * half + 1 >= L:
            return tuple(range(1, L + 1)), True
        return tuple((j - 1 + o) % L + 1 for o in range(-half, half + 1)), False


@dataclass(frozen=True)
class PauliTerm:
    """``coeff * P_{s1} P_{s2} ...`` with ``sites`` kept sorted ascending."""

    sites: tuple[int, ...]
    paulis: str
    coeff: float = 1.0

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        paulis = str(self.paulis).upper()
        if not sites:
            raise ValueError("a Pauli term needs a nonempty support")
        if len(sites) != len(paulis):
            raise ValueError(f"{len(sites)} sites but {len(paulis)} Pauli labels")
        if len(set(sites)) != len(sites):
            raise ValueError(f"repeated site in support {sites}")
        if any(p not in "XYZ" for p in paulis):
            raise ValueError(f"Pauli labels must be X/Y/Z, got {paulis!r}")
        order = sorted(range(len(sites)), key=sites.__getitem__)
        object.__setattr__(self, "sites", tuple(sites[i] for i in order))
        object.__setattr__(self, "paulis", "".join(paulis[i] for i in order))
        object.__setattr__(self, "coeff", float(self.coeff))

    @property
    def norm(self) -> float:
        # a Pauli string has unit operator norm
        return abs(self.coeff)

    def relabel(self, mapping: dict[int, int]) -> "PauliTerm":
        return PauliTerm(tuple(mapping[s] for s in self.sites), self.paulis, self.coeff)

    def to_dict(self) -> dict:
        return {"sites": list(self.sites), "paulis": self.paulis, "coeff": self.coeff}


@dataclass(frozen=True)
class LocalHamiltonian:
    lattice: Lattice
    terms: tuple[PauliTerm, ...]
    origin: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        terms = tuple(self.terms)
        for t in terms:
            for s in t.sites:
                self.lattice.check_site(s)
        object.__setattr__(self, "terms", terms)
        if self.origin is None:
            object.__setattr__(self, "origin", tuple(self.lattice.sites))
        elif len(self.origin) != self.lattice.size:
            raise ValueError("origin must list one parent site per lattice site")

    @property
    def size(self) -> int:
        return self.lattice.size

    @property
    def boundary(self) -> str:
        return self.lattice.boundary

    # locality metadata -------------------------------------------------
    @property
    def g(self) -> float:
        """Extensiveness: largest summed term norm touching a single site."""
        load = {j: 0.0 for j in self.lattice.sites}
        for t in self.terms:
            for s in t.sites:
                load[s] += t.norm
        return max(load.values()) if load else 0.0

    @property
    def k(self) -> int:
        return max((len(t.sites) for t in self.terms), default=0)

    @property
    def d_H(self) -> int:
        dist = self.lattice.distance
        return max(
            (max(dist(a, b) for a in t.sites for b in t.sites) for t in self.terms),
            default=0,
        )

    @property
    def metadata(self) -> tuple[float, int, int]:
        return self.g, self.k, self.d_H

    def is_real(self) -> bool:
        # a string with an odd number of Y factors is purely imaginary
        return all(t.paulis.count("Y") % 2 == 0 for t in self.terms)

    def __add__(self, other: "LocalHamiltonian") -> "LocalHamiltonian":
        if other.lattice != self.lattice:
            raise ValueError("cannot add Hamiltonians on different lattices")
        return LocalHamiltonian(self.lattice, self.terms + other.terms, self.origin)

    def bond_terms(self) -> dict[tuple[int, int], list[PauliTerm]]:
        """Group two-site terms by bond ``(left, right)`` in chain orientation."""
        L = self.size
        bonds: dict[tuple[int, int], list[PauliTerm]] = {}
        for t in self.terms:
            if len(t.sites) != 2:
                raise UnsupportedHamiltonianError(
                    f"term {t.paulis} on {t.sites} is not a two-site interaction"
                )
            a, b = t.sites
            if b == a + 1:
                key = (a, b)
            elif self.boundary == PERIODIC and (a, b) == (1, L):
                key = (L, 1)
            else:
                raise UnsupportedHamiltonianError(f"term on {t.sites} is not nearest-neighbour")
            bonds.setdefault(key, []).append(t)
        return bonds

    # serialisation -------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "lattice": {"size": self.size, "boundary": self.boundary},
            "terms": [t.to_dict() for t in self.terms],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, doc: dict) -> "LocalHamiltonian":
        lat = Lattice(int(doc["lattice"]["size"]), doc["lattice"].get("boundary", OPEN))
        terms = tuple(
            PauliTerm(tuple(t["sites"]), t["paulis"], t.get("coeff", 1.0)) for t in doc["terms"]
        )
        return cls(lat, terms)

    @classmethod
    def from_json(cls, text: str) -> "LocalHamiltonian":
        return cls.from_dict(json.loads(text))


def build_heisenberg_afm(L: int, boundary: str = OPEN, coupling: float = 1.0) -> LocalHamiltonian:
    """Antiferromagnetic Heisenberg chain ``sum_j (XX + YY + ZZ)`` on bonds (j, j+1)."""
    if L < 2:
        raise InvalidSizeError(f"Heisenberg chain needs L >= 2, got {L}")
    lat = Lattice(L, boundary)
    bonds = [(j, j + 1) for j in range(1, L)]
    if boundary == PERIODIC and L > 2:
        bonds.append((L, 1))
    terms = [PauliTerm(b, p + p, coupling) for b in bonds for p in "XYZ"]
    return LocalHamiltonian(lat, tuple(terms))


def restrict_hamiltonian(H: LocalHamiltonian, j: int, Lp: float) -> LocalHamiltonian:
    """Keep the terms supported inside the ``j``-centred window of size ``Lp``.

    The result lives on an open lattice relabelled ``1..n`` with ``origin``
    recording the parent sites. A window covering the whole lattice returns
    ``H`` itself.
    """
    if Lp < 0:
        raise ValueError("restriction size must be non-negative")
    sites, covers_all = H.lattice.window(j, Lp)
    if covers_all:
        return H
    local = {s: i + 1 for i, s in enumerate(sites)}
    kept = tuple(t.relabel(local) for t in H.terms if all(s in local for s in t.sites))
    origin = tuple(H.origin[s - 1] for s in sites)
    return LocalHamiltonian(Lattice(len(sites), OPEN), kept, origin)


def embed_hamiltonian(H: LocalHamiltonian, lattice: Lattice, positions: Sequence[int]) -> LocalHamiltonian:
    """Place ``H``'s sites at ``positions`` (1-based) of a larger ``lattice``."""
    if len(positions) != H.size:
        raise ValueError("need one position per site")
    mapping = {i + 1: int(p) for i, p in enumerate(positions)}
    return LocalHamiltonian(lattice, tuple(t.relabel(mapping) for t in H.terms))


def even_odd_split(H: LocalHamiltonian) -> tuple[LocalHamiltonian, LocalHamiltonian]:
    """Split a nearest-neighbour chain into ``(H_even, H_odd)``.

    ``H_odd`` holds bonds (2k-1, 2k), ``H_even`` bonds (2k, 2k+1); the
    periodic wrap bond (L, 1) counts as even and requires even L.
    """
    if H.d_H > 1:
        raise UnsupportedHamiltonianError(f"even/odd split needs d_H <= 1, got {H.d_H}")
    if H.boundary == PERIODIC and H.size % 2:
        raise UnsupportedHamiltonianError("periodic even/odd split requires an even number of sites")
    even: list[PauliTerm] = []
    odd: list[PauliTerm] = []
    for (a, _), terms in H.bond_terms().items():
        (odd if a % 2 == 1 else even).extend(terms)
    return LocalHamiltonian(H.lattice, tuple(even), H.origin), LocalHamiltonian(H.lattice, tuple(odd), H.origin)


def terms_equal(a: Iterable[PauliTerm], b: Iterable[PauliTerm]) -> bool:
    """Order-insensitive equality of two term lists."""
    key = lambda t: (t.sites, t.paulis, t.coeff)
    return sorted(map(key, a)) == sorted(map(key, b))

"""Finite-index sublattices of Z^d in Hermite normal form, and the lattice CRT.

A basis is stored column-wise and upper triangular: column ``j`` is zero
below row ``j``, its diagonal entry ``h[j][j]`` is positive and every entry
above a diagonal ``h[i][i]`` is reduced into ``[0, h[i][i])``.  Coset normal
forms are then the boxes ``0 <= r_i < h[i][i]``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .rings import QuadInt, is_unit, mul, norm, unit_inverse, xgcd

Point = tuple[int, ...]
Matrix = tuple[tuple[int, ...], ...]  # rows


def hnf(generators: Iterable[Sequence[int]], d: int) -> Matrix:
    """Upper-triangular column HNF of the lattice spanned by ``generators``.

    Raises DomainError if the generators do not span a full-rank lattice.
    """
    active = [list(map(int, g)) for g in generators]
    pivots: list[list[int] | None] = [None] * d
    for row in range(d - 1, -1, -1):
        live = [c for c in active if c[row] != 0]
        rest = [c for c in active if c[row] == 0]
        while len(live) > 1:
            live.sort(key=lambda c: abs(c[row]))
            piv = live[0]
            nxt = [piv]
            for c in live[1:]:
                q = c[row] // piv[row]
                c = [ci - q * pi for ci, pi in zip(c, piv)]
                (nxt if c[row] != 0 else rest).append(c)
            live = nxt
        if not live:
            raise DomainError("generators do not span a full-rank sublattice")
        piv = live[0]
        if piv[row] < 0:
            piv = [-v for v in piv]
        pivots[row] = piv
        active = [c for c in rest if any(c)]
    cols: list[list[int]] = pivots  # type: ignore[assignment]
    for j in range(d):
        for i in range(j - 1, -1, -1):
            q = cols[j][i] // cols[i][i]
            if q:
                cols[j] = [a - q * b for a, b in zip(cols[j], cols[i])]
    return tuple(tuple(cols[j][i] for j in range(d)) for i in range(d))


def det(basis: Matrix) -> int:
    return math.prod(basis[i][i] for i in range(len(basis)))


@dataclass(frozen=True)
class ModulusLattice:
    """A sublattice of Z^d: ``b*Z^d`` or the ideal ``(pi**k)`` of a quadratic ring."""

    basis: Matrix
    source: tuple = ()

    @property
    def d(self) -> int:
        return len(self.basis)

    @property
    def index(self) -> int:
        return det(self.basis)

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.basis[i][i] for i in range(self.d))

    def column(self, j: int) -> Point:
        return tuple(self.basis[i][j] for i in range(self.d))

    def reduce(self, p: Sequence[int]) -> Point:
        """Coset normal form of ``p``."""
        r = list(map(int, p))
        for j in range(self.d - 1, -1, -1):
            q = r[j] // self.basis[j][j]
            if q:
                for i in range(j + 1):
                    r[i] -= q * self.basis[i][j]
        return tuple(r)

    def reduce_array(self, pts: np.ndarray) -> np.ndarray:
        r = np.array(pts, dtype=np.int64, copy=True).reshape(-1, self.d)
        for j in range(self.d - 1, -1, -1):
            q = np.floor_divide(r[:, j], self.basis[j][j])
            for i in range(j + 1):
                r[:, i] -= q * self.basis[i][j]
        return r

    def contains(self, p: Sequence[int]) -> bool:
        return not any(self.reduce(p))

    def normal_forms(self) -> Iterable[Point]:
        """All coset representatives in lexicographic order (lazy)."""
        return itertools.product(*(range(h) for h in self.diagonal))

    def point(self, coeffs: Sequence[int]) -> Point:
        return tuple(
            sum(self.basis[i][j] * c for j, c in enumerate(coeffs)) for i in range(self.d)
        )

    def describe(self) -> dict:
        kind = self.source[0] if self.source else "lattice"
        out: dict = {"kind": kind, "basis": [list(r) for r in self.basis], "index": self.index}
        if kind == "scalar":
            out["b"] = self.source[1]
        elif kind == "ideal":
            _, ring, pi, k = self.source
            out.update(ring=ring, prime=[pi.a, pi.b], k=k)
        return out

    def __str__(self) -> str:
        if self.source and self.source[0] == "scalar":
            return f"{self.source[1]}Z^{self.d}"
        if self.source and self.source[0] == "ideal":
            _, ring, pi, k = self.source
            return f"({pi})^{k}"
        return f"lattice{self.basis}"


def scalar_lattice(b: int, d: int) -> ModulusLattice:
    if b < 1:
        raise DomainError("scalar modulus must be positive")
    return ModulusLattice(
        tuple(tuple(b if i == j else 0 for j in range(d)) for i in range(d)), ("scalar", b)
    )


def element_lattice(g: QuadInt) -> Matrix:
    """HNF of the principal ideal ``(g)`` in coordinates ``(a, b)`` of ``a + b*omega``."""
    if g.is_zero():
        raise DomainError("the zero ideal is not a sublattice")
    omega = QuadInt(0, 1, g.ring)
    c1, c2 = g, mul(g, omega)
    return hnf([(c1.a, c1.b), (c2.a, c2.b)], 2)


def ideal_lattice(pi: QuadInt, k: int = 1) -> ModulusLattice:
    if pi.ring == "rational":
        return ModulusLattice(((abs(pi.a) ** k,),), ("ideal", pi.ring, pi, k))
    basis = element_lattice(pi**k)
    lat = ModulusLattice(basis, ("ideal", pi.ring, pi, k))
    assert lat.index == abs(norm(pi)) ** k
    return lat


def principal_lattice(g: QuadInt) -> ModulusLattice:
    if g.ring == "rational":
        return ModulusLattice(((abs(g.a),),), ("principal", g.ring, g))
    return ModulusLattice(element_lattice(g), ("principal", g.ring, g))


def ideal_generator(lat: ModulusLattice) -> QuadInt | None:
    """Generator of the principal ideal behind ``lat``, if it came from one."""
    if lat.source and lat.source[0] == "ideal":
        return lat.source[2] ** lat.source[3]
    if lat.source and lat.source[0] == "principal":
        return lat.source[2]
    return None


def intersect(lat1: ModulusLattice, lat2: ModulusLattice) -> ModulusLattice:
    """Intersection of two sublattices with coprime indices."""
    n1, n2 = lat1.index, lat2.index
    if math.gcd(n1, n2) != 1:
        raise DomainError(f"indices {n1} and {n2} are not coprime")
    gens = [tuple(n2 * v for v in lat1.column(j)) for j in range(lat1.d)]
    gens += [tuple(n1 * v for v in lat2.column(j)) for j in range(lat2.d)]
    return ModulusLattice(hnf(gens, lat1.d), ("intersection",))


def transform(lat: ModulusLattice, m: Sequence[Sequence[int]]) -> ModulusLattice:
    """Image ``M(lat)`` of a lattice under an integer matrix with det +-1."""
    d = lat.d
    gens = [
        tuple(sum(m[i][k] * lat.basis[k][j] for k in range(d)) for i in range(d))
        for j in range(d)
    ]
    return ModulusLattice(hnf(gens, d), ("image",) + tuple(lat.source))


def _as_element(p: Sequence[int], ring: str) -> QuadInt:
    return QuadInt(p[0], p[1] if len(p) > 1 else 0, ring)


def _merge(t: Point, lat: ModulusLattice, r: Point, other: ModulusLattice):
    g1, g2 = ideal_generator(lat), ideal_generator(other)
    if g1 is not None and g2 is not None and g1.ring == g2.ring:
        g, u, v = xgcd(g1, g2)
        if not is_unit(g):
            raise DomainError(f"ideals ({g1}) and ({g2}) are not coprime")
        w = unit_inverse(g)
        e1, e2 = u * w * g1, v * w * g2  # e1 + e2 = 1, e1 in (g1), e2 in (g2)
        x = _as_element(t, g1.ring) * e2 + _as_element(r, g1.ring) * e1
        lat = principal_lattice(g1 * g2)
        return lat.reduce(x.coords[: lat.d]), lat
    n1, n2 = lat.index, other.index
    if math.gcd(n1, n2) != 1:
        raise DomainError(f"indices {n1} and {n2} share a factor")
    # u*n1 + v*n2 = 1; t' = t*v*n2 + r*u*n1 solves both
    u = pow(n1, -1, n2)
    v = (1 - u * n1) // n2
    t = tuple(ti * v * n2 + ri * u * n1 for ti, ri in zip(t, r))
    lat = intersect(lat, other)
    return lat.reduce(t), lat


def crt_solve(
    congruences: Sequence[tuple[Sequence[int], ModulusLattice]],
) -> tuple[Point, ModulusLattice]:
    """Solve ``t = r_i mod L_i`` for pairwise coprime moduli.

    Moduli are coprime when their indices are, or when they are coprime
    ideals of one ring (a split prime and its conjugate share an index).
    Returns the least non-negative representative ``t0`` (normal form modulo
    the intersection) and the intersection lattice ``L``; the solution set is
    exactly ``t0 + L``.
    """
    if not congruences:
        raise DomainError("empty congruence system")
    for (_, a), (_, b) in itertools.combinations(congruences, 2):
        if math.gcd(a.index, b.index) != 1:
            ga, gb = ideal_generator(a), ideal_generator(b)
            if ga is None or gb is None or ga.ring != gb.ring or not is_unit(xgcd(ga, gb)[0]):
                raise DomainError(f"indices {a.index} and {b.index} share a factor")
    r0, lat = congruences[0]
    t = lat.reduce(r0)
    for r, other in congruences[1:]:
        t, lat = _merge(t, lat, tuple(r), other)
    for r, other in congruences:
        assert other.reduce(t) == other.reduce(r)
    return t, lat

"""Coset occupancy, the admissibility predicate and locator search."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ResourceError
from .lattice import ModulusLattice, crt_solve
from .rings import QuadInt, norm
from .sieve import Box, VSpec, contains, sieve_mask

Point = tuple[int, ...]


def _points(U: Iterable[Sequence[int]]) -> list[Point]:
    return sorted({tuple(int(c) for c in p) for p in U})


@dataclass(frozen=True)
class CosetProfile:
    modulus: ModulusLattice
    met: int
    missed_example: Point | None

    @property
    def all_met(self) -> bool:
        return self.missed_example is None

    def to_dict(self) -> dict:
        return {
            "modulus": str(self.modulus),
            "index": self.modulus.index,
            "met": self.met,
            "missed_coset": list(self.missed_example) if self.missed_example is not None else None,
        }


def cosets_met(U: Iterable[Sequence[int]], m: ModulusLattice) -> CosetProfile:
    pts = _points(U)
    if len(pts) > 10**6:
        raise ResourceError("coset profile limited to 10^6 points")
    if pts:
        reduced = m.reduce_array(np.array(pts, dtype=np.int64))
        seen = {tuple(int(c) for c in r) for r in np.unique(reduced, axis=0)}
    else:
        seen = set()
    missed = None
    if len(seen) < m.index:
        missed = next(r for r in m.normal_forms() if r not in seen)
    return CosetProfile(m, len(seen), missed)


@dataclass
class AdmissibilityResult:
    admissible: bool
    certificates: list[CosetProfile] = field(default_factory=list)
    violator: CosetProfile | None = None

    def __bool__(self) -> bool:
        return self.admissible

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "certificates": [c.to_dict() for c in self.certificates],
            "violator": self.violator.to_dict() if self.violator else None,
        }


def is_admissible(U: Iterable[Sequence[int]], spec: VSpec) -> AdmissibilityResult:
    """Check every defining modulus of index at most ``|U|``.

    A modulus of larger index cannot have all of its cosets met, so the
    finite check decides admissibility for the whole family.
    """
    pts = _points(U)
    certs = []
    for m in spec.moduli(len(pts)):
        prof = cosets_met(pts, m)
        if prof.all_met:
            return AdmissibilityResult(False, certs, prof)
        certs.append(prof)
    return AdmissibilityResult(True, certs)


# -- locator ----------------------------------------------------------------

def _modulus_size(m: ModulusLattice) -> int:
    """The scalar ``b`` for ``bZ^d``, the absolute norm (= index) for ideals."""
    return m.source[1] if m.source and m.source[0] == "scalar" else m.index


def _collision_bound(pts: list[Point], spec: VSpec) -> int:
    """No modulus of larger index can identify two points of ``pts``."""
    best = 1
    for p, q in itertools.combinations(pts, 2):
        diff = [a - b for a, b in zip(p, q)]
        if spec.kind == "kfree_ring":
            x = QuadInt(diff[0], diff[1] if spec.d == 2 else 0, spec.ring)
            best = max(best, abs(norm(x)))
        else:
            best = max(best, max(abs(c) for c in diff) ** spec.d)
    return best


def special_moduli(P: Sequence[Point], spec: VSpec) -> list[ModulusLattice]:
    """Moduli that collapse two points of ``P`` or have at most ``|P|`` cosets."""
    pts = _points(P)
    m = len(pts)
    if m == 0:
        return []
    out = []
    for mod in spec.moduli(max(m, _collision_bound(pts, spec))):
        if mod.index <= m or cosets_met(pts, mod).met < m:
            out.append(mod)
    return out


def locator_density_bound(P: Iterable[Sequence[int]], spec: VSpec, n: int) -> float:
    """Density of the truncated solution set ``Theta_n`` for ``L(P, empty)``."""
    pts = _points(P)
    if not spec.is_erdos:
        raise DomainError(f"{spec.label()} does not satisfy the coprimality condition")
    if not is_admissible(pts, spec):
        raise DomainError("P is not admissible")
    if not pts:
        return 1.0
    special = special_moduli(pts, spec)
    keys = {mod.basis for mod in special}
    value = 1.0 / math.prod(mod.index for mod in special)
    if spec.kind == "kfree_ring":
        pool = spec.moduli(n)
    else:
        pool = spec.moduli(n**spec.d)
    for mod in pool:
        if mod.basis in keys or _modulus_size(mod) > n:
            continue
        value *= 1.0 - len(pts) / mod.index
    return value


@dataclass
class LocatorResult:
    status: str  # found | not_found | impossible
    t: Point | None = None
    mode: str = "radius"
    searched: int = 0
    violator: CosetProfile | None = None
    congruences: list[tuple[Point, ModulusLattice]] = field(default_factory=list)

    def to_dict(self) -> dict:
        out: dict = {"status": self.status, "mode": self.mode, "searched": self.searched}
        out["t"] = list(self.t) if self.t is not None else None
        if self.violator is not None:
            out["violator"] = self.violator.to_dict()
        if self.congruences:
            out["congruences"] = [
                {"residue": list(r), "modulus": str(m), "index": m.index} for r, m in self.congruences
            ]
        return out


def scan_order(pts: np.ndarray) -> np.ndarray:
    """Permutation sorting points by shell, then |coordinates|, then signs."""
    a = np.abs(pts)
    keys = [pts[:, i] < 0 for i in range(pts.shape[1] - 1, -1, -1)]
    keys += [a[:, i] for i in range(pts.shape[1] - 1, -1, -1)]
    keys.append(a.max(axis=1))
    return np.lexsort(keys)


def shell(d: int, s: int) -> list[Point]:
    """Points of sup-norm exactly ``s`` in scan order."""
    if s == 0:
        return [(0,) * d]
    pts = np.array(
        [p for p in itertools.product(range(-s, s + 1), repeat=d) if max(map(abs, p)) == s],
        dtype=np.int64,
    )
    return [tuple(int(c) for c in pts[i]) for i in scan_order(pts)]


def locator_mask(
    P: Sequence[Point], Q: Sequence[Point], spec: VSpec, radius: int, threads: int | None = None
) -> np.ndarray:
    """Boolean array over ``[-radius, radius]^d``: True where ``t`` lies in ``L(P, Q)``."""
    pts = list(P) + list(Q)
    reach = max((max(abs(c) for c in p) for p in pts), default=0)
    W = radius + reach
    mask = sieve_mask(spec, Box(spec.d, W), threads)
    side = 2 * radius + 1
    ok = np.ones((side,) * spec.d, dtype=bool)
    for p in P:
        ok &= mask[tuple(slice(W - radius + c, W + radius + c + 1) for c in p)]
    for q in Q:
        ok &= ~mask[tuple(slice(W - radius + c, W + radius + c + 1) for c in q)]
    return ok


def _verify(t: Point, P: Sequence[Point], Q: Sequence[Point], spec: VSpec) -> bool:
    plus = lambda p: tuple(a + b for a, b in zip(t, p))  # noqa: E731
    return all(contains(spec, plus(p)) for p in P) and not any(contains(spec, plus(q)) for q in Q)


def _radius_scan(P, Q, spec, radius, threads) -> LocatorResult:
    r = min(8, radius)
    while True:
        ok = locator_mask(P, Q, spec, r, threads)
        hits = np.argwhere(ok).astype(np.int64) - r
        if len(hits):
            t = tuple(int(c) for c in hits[scan_order(hits)[0]])
            assert _verify(t, P, Q, spec)
            return LocatorResult("found", t, "radius", ok.size)
        if r >= radius:
            return LocatorResult("not_found", None, "radius", ok.size)
        r = min(2 * r, radius)


def _crt_system(P, Q, spec) -> list[tuple[Point, ModulusLattice]]:
    special = special_moduli(P, spec)
    system = []
    for mod in special:
        missed = cosets_met(P, mod).missed_example
        system.append((tuple(-c for c in missed), mod))
    used = {mod.basis for mod in special}
    pool = spec.iter_moduli()
    for q in Q:
        for mod in pool:
            if mod.basis in used:
                continue
            if mod.index <= len(P):
                continue
            target = mod.reduce(q)
            if any(mod.reduce(p) == target for p in P):
                continue
            used.add(mod.basis)
            system.append((tuple(-c for c in q), mod))
            break
        else:
            raise ResourceError(f"no unused modulus left to force {q} out of the set")
    return system


def _crt_scan(P, Q, spec, radius) -> LocatorResult:
    system = _crt_system(P, Q, spec)
    if not system:
        res = _radius_scan(P, Q, spec, radius, None)
        res.mode = "crt"
        return res
    t0, lat = crt_solve(system)
    searched = 0
    for s in range(radius + 1):
        for c in shell(spec.d, s):
            searched += 1
            t = tuple(a + b for a, b in zip(t0, lat.point(c)))
            if _verify(t, P, Q, spec):
                return LocatorResult("found", t, "crt", searched, congruences=system)
    return LocatorResult("not_found", None, "crt", searched, congruences=system)


def find_locator(
    P: Iterable[Sequence[int]],
    Q: Iterable[Sequence[int]],
    spec: VSpec,
    radius: int = 500,
    mode: str = "radius",
    threads: int | None = None,
) -> LocatorResult:
    """Find ``t`` with ``t + P`` inside the set and ``t + Q`` outside it.

    ``radius`` bounds ``|t|_inf`` in radius mode and the coefficient shell in
    CRT mode.  Inadmissible ``P`` is reported as impossible without search.
    """
    P, Q = _points(P), _points(Q)
    if set(P) & set(Q):
        raise DomainError("P and Q must be disjoint")
    if any(len(p) != spec.d for p in P + Q):
        raise DomainError(f"points must have dimension {spec.d}")
    adm = is_admissible(P, spec)
    if not adm:
        return LocatorResult("impossible", None, mode, 0, adm.violator)
    if mode == "radius":
        return _radius_scan(P, Q, spec, radius, threads)
    if mode == "crt":
        if not spec.is_erdos:
            raise DomainError(f"CRT mode needs pairwise coprime moduli; {spec.label()} is not")
        return _crt_scan(P, Q, spec, radius)
    raise DomainError(f"unknown search mode {mode!r}")

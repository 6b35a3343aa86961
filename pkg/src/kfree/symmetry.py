"""Stabilisers of point sets inside GL(2, Z) and witnesses against non-members.

Stabiliser tests are patch-level: a matrix passes when it (and its inverse)
maps every point of ``V`` in ``[-r, r]^2`` back into ``V``.  The sieved window
always reaches far enough that every image is decided exactly.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from sympy import nextprime

from .admissibility import AdmissibilityResult, cosets_met, is_admissible, shell
from .errors import ConfigError, PreconditionError, ResourceError
from .lattice import crt_solve, ideal_lattice, principal_lattice, transform
from .rings import (
    QuadInt,
    canonical_primes,
    classify_prime,
    conj,
    factor,
    make_ring,
    mul,
    prime_norm,
)
from .sieve import Box, VSpec, contains, default_threads, sieve_mask

Point = tuple[int, ...]


@dataclass(frozen=True, order=True)
class UniMat:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if abs(self.det) != 1:
            raise ConfigError(f"matrix {self.rows} is not unimodular")

    @classmethod
    def of(cls, *entries: int) -> UniMat:
        """Build a 2x2 matrix from row-major entries ``a, b, c, d``."""
        a, b, c, d = entries
        return cls(((a, b), (c, d)))

    @property
    def d(self) -> int:
        return len(self.rows)

    @property
    def det(self) -> int:
        (a, b), (c, d) = self.rows
        return a * d - b * c

    @property
    def bound(self) -> int:
        return max(abs(v) for r in self.rows for v in r)

    def flat(self) -> tuple[int, ...]:
        return tuple(v for r in self.rows for v in r)

    def inverse(self) -> UniMat:
        (a, b), (c, d) = self.rows
        e = self.det
        return UniMat(((d * e, -b * e), (-c * e, a * e)))

    def __matmul__(self, other: UniMat) -> UniMat:
        (a, b), (c, d) = self.rows
        (p, q), (r, s) = other.rows
        return UniMat(((a * p + b * r, a * q + b * s), (c * p + d * r, c * q + d * s)))

    def apply(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts, dtype=np.int64) @ np.array(self.rows, dtype=np.int64).T

    def apply_point(self, p: Sequence[int]) -> Point:
        return tuple(sum(m * x for m, x in zip(row, p)) for row in self.rows)

    def __str__(self) -> str:
        return "[" + ",".join("[" + ",".join(map(str, r)) + "]" for r in self.rows) + "]"


IDENTITY = UniMat.of(1, 0, 0, 1)


def enumerate_glz(d: int, entry_bound: int) -> list[UniMat]:
    """All matrices in GL(2, Z) with entries bounded by ``entry_bound``, lexicographic."""
    if d != 2:
        raise ConfigError("only d = 2 is supported")
    if entry_bound < 1:
        raise ConfigError("entry bound must be >= 1")
    if entry_bound > 6:
        raise ResourceError("entry bound above 6 is beyond desk scale")
    rng = range(-entry_bound, entry_bound + 1)
    return [
        UniMat(((a, b), (c, e)))
        for a, b, c, e in itertools.product(rng, repeat=4)
        if abs(a * e - b * c) == 1
    ]


# -- expected groups ----------------------------------------------------------

def multiplication_matrix(u: QuadInt) -> UniMat:
    omega = QuadInt(0, 1, u.ring)
    c1, c2 = u, mul(u, omega)
    return UniMat(((c1.a, c2.a), (c1.b, c2.b)))


def conjugation_matrix(ring: str) -> UniMat:
    c2 = conj(QuadInt(0, 1, ring))
    return UniMat(((1, c2.a), (0, c2.b)))


def _torsion_generator(ring: str) -> QuadInt:
    spec = make_ring(ring)
    units = [QuadInt(*c, ring) for c in spec.torsion_units]
    for u in units:
        x, order = u, 1
        while x != QuadInt(1, 0, ring):
            x, order = mul(x, u), order + 1
        if order == len(units):
            return u
    raise AssertionError("torsion group is not cyclic")


def expected_generators(spec: VSpec) -> list[UniMat]:
    if spec.d != 2:
        raise ConfigError(f"{spec.label()} does not live in dimension 2")
    if spec.kind != "kfree_ring":
        return [UniMat.of(0, -1, 1, 0), UniMat.of(1, 1, 0, 1), UniMat.of(1, 0, 0, -1)]
    ring = make_ring(spec.ring)
    if ring.fundamental_unit is None:
        return [multiplication_matrix(_torsion_generator(spec.ring)), conjugation_matrix(spec.ring)]
    eps = QuadInt(*ring.fundamental_unit, spec.ring)
    return [multiplication_matrix(eps), conjugation_matrix(spec.ring), UniMat.of(-1, 0, 0, -1)]


def group_name(spec: VSpec) -> str:
    if spec.kind != "kfree_ring":
        return "GL(2,Z)"
    return {"gauss": "D4", "eisenstein": "D6"}.get(spec.ring, "C2 x D_inf")


def closure(generators: Iterable[UniMat], entry_bound: int) -> list[UniMat]:
    """Group elements reachable through words whose partial products stay within the bound."""
    gens = []
    for g in generators:
        gens += [g, g.inverse()]
    seen = {IDENTITY}
    todo = deque([IDENTITY])
    while todo:
        x = todo.popleft()
        for g in gens:
            y = x @ g
            if y.bound <= entry_bound and y not in seen:
                seen.add(y)
                todo.append(y)
    return sorted(seen, key=UniMat.flat)


# -- stabiliser tests -------------------------------------------------------

@dataclass
class Window:
    """A sieved membership mask on ``[-R, R]^2``."""

    spec: VSpec
    R: int
    mask: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, spec: VSpec, R: int, threads: int | None = None) -> Window:
        return cls(spec, R, sieve_mask(spec, Box(spec.d, R), threads))

    def points(self, r: int) -> np.ndarray:
        R = self.R
        sub = self.mask[R - r:R + r + 1, R - r:R + r + 1]
        return np.argwhere(sub).astype(np.int64) - r

    def member(self, pts: np.ndarray) -> np.ndarray:
        return self.mask[pts[:, 0] + self.R, pts[:, 1] + self.R]


@dataclass(frozen=True)
class StabVerdict:
    matrix: UniMat
    passed: bool
    counterexample: Point | None = None
    direction: str | None = None  # "forward" tests M, "inverse" tests M^-1


def required_radius(r: int, entry_bound: int) -> int:
    return r * (1 + 2 * entry_bound)


def stab_test(M: UniMat, spec: VSpec, r: int, window: Window | None = None) -> StabVerdict:
    """Decide ``M(V) in V`` and ``M^-1(V) in V`` on the window ``[-r, r]^2``.

    The counterexample is the lexicographically least failing point, checking
    ``M`` before ``M^-1``.
    """
    inv = M.inverse()
    need = required_radius(r, max(M.bound, inv.bound))
    if window is None:
        window = Window.build(spec, need)
    if window.spec != spec:
        raise PreconditionError("window was sieved for a different set")
    if window.R < need:
        raise PreconditionError(f"sieve radius {window.R} is below the required {need}")
    pts = window.points(r)
    for direction, mat in (("forward", M), ("inverse", inv)):
        bad = ~window.member(mat.apply(pts))
        if bad.any():
            w = pts[np.argmax(bad)]
            return StabVerdict(M, False, (int(w[0]), int(w[1])), direction)
    return StabVerdict(M, True)


@dataclass
class StabReport:
    spec: VSpec
    entry_bound: int
    radius: int
    sieve_radius: int
    tested: list[UniMat]
    passed: list[UniMat]
    counterexamples: dict[UniMat, StabVerdict]
    expected: list[UniMat]

    @property
    def match(self) -> str:
        got, want = set(self.passed), set(self.expected)
        if got == want:
            return "exact"
        if got > want:
            return "superset"
        if got < want:
            return "deficit"
        return "mismatch"

    def to_dict(self) -> dict:
        got, want = set(self.passed), set(self.expected)
        return {
            "schema": "stabreport/1",
            "spec": self.spec.to_dict(),
            "entry_bound": self.entry_bound,
            "radius": self.radius,
            "sieve_radius": self.sieve_radius,
            "tested": len(self.tested),
            "passed": [list(m.flat()) for m in self.passed],
            "counterexamples": [
                {"matrix": list(v.matrix.flat()), "point": list(v.counterexample), "direction": v.direction}
                for v in (self.counterexamples[m] for m in self.tested if m in self.counterexamples)
            ],
            "group": {
                "name": group_name(self.spec),
                "generators": [list(g.flat()) for g in expected_generators(self.spec)],
                "expected_size": len(self.expected),
                "match": self.match,
                "missing": [list(m.flat()) for m in sorted(want - got, key=UniMat.flat)],
                "extra": [list(m.flat()) for m in sorted(got - want, key=UniMat.flat)],
            },
        }


def stab_search(
    spec: VSpec, entry_bound: int, radius: int, threads: int | None = None
) -> StabReport:
    candidates = enumerate_glz(2, entry_bound)
    R = required_radius(radius, entry_bound)
    window = Window.build(spec, R, threads)
    n = threads or default_threads()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            verdicts = list(pool.map(lambda M: stab_test(M, spec, radius, window), candidates))
    else:
        verdicts = [stab_test(M, spec, radius, window) for M in candidates]
    passed = [v.matrix for v in verdicts if v.passed]
    failed = {v.matrix: v for v in verdicts if not v.passed}
    expected = closure(expected_generators(spec), entry_bound)
    return StabReport(spec, entry_bound, radius, R, candidates, passed, failed, expected)


# -- witnesses ----------------------------------------------------------------

@dataclass(frozen=True)
class BadPrime:
    rho: QuadInt
    w: Point
    exponent: int
    tag: str


def _element(p: Sequence[int], ring: str) -> QuadInt:
    return QuadInt(p[0], p[1], ring)


def _prime_tag(pi: QuadInt) -> str:
    n = abs(prime_norm(pi))
    r = math.isqrt(n)
    return "Inert" if r * r == n else classify_prime(pi.ring, n).tag


def _check_stab_precondition(A: UniMat, spec: VSpec) -> None:
    if stab_test(A, spec, 16).passed:
        raise PreconditionError(f"{A} passes the stabiliser test for {spec.label()}")


def bad_prime_witness(A: UniMat, ring: str, k: int, max_shell: int = 64) -> BadPrime:
    """First ``w`` in ``V`` (shell order) such that ``A(w)`` has a ``k``-th prime power factor."""
    spec = VSpec("kfree_ring", 2, k=k, ring=ring)
    _check_stab_precondition(A, spec)
    for s in range(1, max_shell + 1):
        for w in shell(2, s):
            if not contains(spec, w):
                continue
            img = _element(A.apply_point(w), ring)
            for pi, e in factor(img).factors:
                if e >= k:
                    tag = _prime_tag(pi)
                    assert tag != "Inert", "an inert bad prime contradicts unimodularity"
                    assert not (tag == "Ramified" and k % 2 == 0), "ramified bad prime with even k"
                    return BadPrime(pi, w, e, tag)
    raise ResourceError(f"no bad prime found within shell {max_shell}")


@dataclass
class Witness:
    A: UniMat
    ring: str
    k: int
    bad: BadPrime
    P: list[QuadInt]
    L_basis: tuple
    z: list[Point]
    S: list[Point]
    repairs: list[str]
    shell_offset: int
    S_check: AdmissibilityResult
    AS_check: AdmissibilityResult

    @property
    def valid(self) -> bool:
        return self.S_check.admissible and not self.AS_check.admissible

    def image(self) -> list[Point]:
        return [self.A.apply_point(p) for p in self.S]

    def to_dict(self) -> dict:
        q = lambda x: [x.a, x.b]  # noqa: E731
        return {
            "schema": "witness/1",
            "matrix": list(self.A.flat()),
            "ring": self.ring,
            "k": self.k,
            "rho": q(self.bad.rho),
            "rho_tag": self.bad.tag,
            "w": list(self.bad.w),
            "n": len(self.S),
            "P": [q(p) for p in self.P],
            "L_basis": [list(r) for r in self.L_basis],
            "z": [list(p) for p in self.z],
            "repairs": self.repairs,
            "shell_offset": self.shell_offset,
            "S": [list(p) for p in self.S],
            "A_S": [list(p) for p in self.image()],
            "S_admissible": self.S_check.admissible,
            "A_S_admissible": self.AS_check.admissible,
            "A_S_violator": self.AS_check.violator.to_dict() if self.AS_check.violator else None,
        }


def _small_primes(rho: QuadInt) -> list[QuadInt]:
    n = abs(prime_norm(rho))
    below = [pi for pi in canonical_primes(rho.ring, n) if abs(prime_norm(pi)) < n]
    if below:
        return below
    # nothing of smaller norm: fall back to the least inert prime
    p = 2
    while classify_prime(rho.ring, p).tag != "Inert":
        p = nextprime(p)
    return [classify_prime(rho.ring, p).generators[0]]


def _conjugate_prime(rho: QuadInt) -> QuadInt | None:
    if _prime_tag(rho) != "Split":
        return None
    a, b = classify_prime(rho.ring, abs(prime_norm(rho))).generators
    return b if a == rho else a


def _repair(S, w, A, T, Tbar, spec) -> tuple[list[Point], list[str]]:
    add = lambda p: (p[0] + w[0], p[1] + w[1])  # noqa: E731
    S = list(S)
    notes = []
    if cosets_met(S, T).all_met:
        S[1] = add(S[1])
        notes.append("z2 -> z2 + w")
    if Tbar is not None and cosets_met(S, Tbar).all_met:
        for i in range(2, len(S)):
            trial = S[:i] + [add(S[i])] + S[i + 1:]
            if not cosets_met(trial, Tbar).all_met and not cosets_met(trial, T).all_met:
                S = trial
                notes.append(f"z{i + 1} -> z{i + 1} + w")
                break
    return S, notes


def inadmissible_image_witness(
    A: UniMat, ring: str, k: int, max_shell: int = 64, max_offset: int = 8
) -> Witness:
    """An admissible ``S`` whose image ``A(S)`` meets every coset of ``(rho^k)``."""
    spec = VSpec("kfree_ring", 2, k=k, ring=ring)
    bad = bad_prime_witness(A, ring, k, max_shell)
    rho, w = bad.rho, bad.w
    T = ideal_lattice(rho, k)
    rho_bar = _conjugate_prime(rho)
    Tbar = ideal_lattice(rho_bar, k) if rho_bar is not None else None
    P = _small_primes(rho)
    g = QuadInt(1, 0, ring)
    for pi in P:
        g = g * pi**k
    L = principal_lattice(g)
    Ainv = A.inverse()
    pre = transform(T, Ainv.rows)
    targets = [c for c in T.normal_forms() if any(c)]
    coeffs = [c for s in range(max_offset + 1) for c in shell(2, s)]
    last = None
    for offset, c in enumerate(coeffs[: max_offset + 1]):
        z = []
        for tgt in targets:
            t0, M = crt_solve([((1, 0), L), (Ainv.apply_point(tgt), pre)])
            z.append(tuple(a + b for a, b in zip(t0, M.point(c))))
        S, repairs = _repair([w] + z, w, A, T, Tbar, spec)
        s_check = is_admissible(S, spec)
        as_check = is_admissible([A.apply_point(p) for p in S], spec)
        last = Witness(A, ring, k, bad, P, L.basis, z, S, repairs, offset, s_check, as_check)
        if last.valid:
            return last
    raise ResourceError(f"witness construction did not verify; last state: {last.to_dict()}")

"""Exact arithmetic in Euclidean quadratic rings Z[omega] and in Z.

Elements are stored as integer pairs ``(a, b)`` standing for ``a + b*omega``,
where ``omega**2 = t*omega + s`` for the ring's trace/constant pair ``(t, s)``.
The conjugate of omega is ``t - omega`` and the field norm is the binary
quadratic form ``a**2 + t*a*b - s*b**2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from sympy import factorint, isprime, primerange
from sympy.ntheory import sqrt_mod

from .errors import ConfigError, DomainError, ResourceError

INT64_MAX = 2**63 - 1
MAX_FACTOR_NORM = 10**12

RING_IDS = ("gauss", "eisenstein", "sqrt2", "golden", "sqrt3", "rational")


@dataclass(frozen=True)
class RingSpec:
    id: str
    omega_desc: str
    trace: int
    const: int
    fundamental_unit: tuple[int, int] | None
    torsion_units: tuple[tuple[int, int], ...]
    ramified: tuple[tuple[int, tuple[int, int]], ...]
    split_modulus: int
    split_residues: frozenset[int]
    inert_residues: frozenset[int]

    @property
    def norm_coeffs(self) -> tuple[int, int, int]:
        if self.id == "rational":
            return (1, 0, 0)
        return (1, self.trace, -self.const)

    @property
    def discriminant(self) -> int:
        return self.trace * self.trace + 4 * self.const

    @property
    def ramified_primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.ramified)

    @property
    def is_real(self) -> bool:
        return self.fundamental_unit is not None

    @property
    def degree(self) -> int:
        return 1 if self.id == "rational" else 2

    def __call__(self, a: int, b: int = 0) -> QuadInt:
        return QuadInt(a, b, self.id)


_TABLE = {
    "gauss": dict(
        omega_desc="i", trace=0, const=-1, fundamental_unit=None,
        torsion_units=((1, 0), (0, 1), (-1, 0), (0, -1)),
        ramified=((2, (1, 1)),),
        split_modulus=4, split_residues=frozenset({1}), inert_residues=frozenset({3}),
    ),
    "eisenstein": dict(
        # (-rho)^m for m = 0..5
        omega_desc="rho", trace=-1, const=-1, fundamental_unit=None,
        torsion_units=((1, 0), (0, -1), (-1, -1), (-1, 0), (0, 1), (1, 1)),
        ramified=((3, (1, -1)),),
        split_modulus=3, split_residues=frozenset({1}), inert_residues=frozenset({2}),
    ),
    "sqrt2": dict(
        omega_desc="sqrt2", trace=0, const=2, fundamental_unit=(1, 1),
        torsion_units=((1, 0), (-1, 0)),
        ramified=((2, (0, 1)),),
        split_modulus=8, split_residues=frozenset({1, 7}), inert_residues=frozenset({3, 5}),
    ),
    "golden": dict(
        # sqrt5 = 2*tau - 1
        omega_desc="tau", trace=1, const=1, fundamental_unit=(0, 1),
        torsion_units=((1, 0), (-1, 0)),
        ramified=((5, (-1, 2)),),
        split_modulus=5, split_residues=frozenset({1, 4}), inert_residues=frozenset({2, 3}),
    ),
    "sqrt3": dict(
        omega_desc="sqrt3", trace=0, const=3, fundamental_unit=(2, 1),
        torsion_units=((1, 0), (-1, 0)),
        ramified=((2, (1, 1)), (3, (0, 1))),
        split_modulus=12, split_residues=frozenset({1, 11}), inert_residues=frozenset({5, 7}),
    ),
    "rational": dict(
        omega_desc="-", trace=0, const=0, fundamental_unit=None,
        torsion_units=((1, 0), (-1, 0)),
        ramified=(),
        split_modulus=1, split_residues=frozenset(), inert_residues=frozenset({0}),
    ),
}


@lru_cache(maxsize=None)
def make_ring(ring_id: str) -> RingSpec:
    """Return the specification table for one of the six supported rings."""
    try:
        row = _TABLE[ring_id]
    except KeyError:
        raise ConfigError(f"unknown ring {ring_id!r}; expected one of {RING_IDS}") from None
    return RingSpec(id=ring_id, **row)


def _check(v: int) -> int:
    if not -INT64_MAX <= v <= INT64_MAX:
        raise OverflowError(f"coordinate {v} exceeds signed 64-bit range")
    return v


@dataclass(frozen=True, order=True)
class QuadInt:
    a: int
    b: int = 0
    ring: str = field(default="gauss", compare=True)

    def __post_init__(self) -> None:
        _check(self.a)
        _check(self.b)
        if self.ring == "rational" and self.b != 0:
            raise DomainError("rational integers carry no omega coordinate")

    @property
    def spec(self) -> RingSpec:
        return make_ring(self.ring)

    @property
    def coords(self) -> tuple[int, int]:
        return (self.a, self.b)

    def _same(self, other: QuadInt | int) -> QuadInt:
        if isinstance(other, int):
            return QuadInt(other, 0, self.ring)
        if other.ring != self.ring:
            raise DomainError(f"ring mismatch: {self.ring} vs {other.ring}")
        return other

    def __add__(self, other: QuadInt | int) -> QuadInt:
        o = self._same(other)
        return QuadInt(self.a + o.a, self.b + o.b, self.ring)

    __radd__ = __add__

    def __sub__(self, other: QuadInt | int) -> QuadInt:
        o = self._same(other)
        return QuadInt(self.a - o.a, self.b - o.b, self.ring)

    def __rsub__(self, other: int) -> QuadInt:
        return self._same(other) - self

    def __neg__(self) -> QuadInt:
        return QuadInt(-self.a, -self.b, self.ring)

    def __mul__(self, other: QuadInt | int) -> QuadInt:
        return mul(self, self._same(other))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> QuadInt:
        if n < 0:
            raise DomainError("negative powers are only defined for units; use unit_power")
        result = QuadInt(1, 0, self.ring)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __str__(self) -> str:
        if self.ring == "rational":
            return str(self.a)
        w = self.spec.omega_desc
        if self.b == 0:
            return str(self.a)
        coef = {1: "", -1: "-"}.get(self.b, str(self.b))
        if self.a == 0:
            return f"{coef}{w}"
        return f"{self.a}{'+' if self.b > 0 else ''}{coef}{w}"


def mul(x: QuadInt, y: QuadInt) -> QuadInt:
    if x.ring != y.ring:
        raise DomainError(f"ring mismatch: {x.ring} vs {y.ring}")
    r = x.spec
    bd = x.b * y.b
    return QuadInt(x.a * y.a + r.const * bd, x.a * y.b + x.b * y.a + r.trace * bd, x.ring)


def conj(x: QuadInt) -> QuadInt:
    """Galois conjugate; complex conjugation for the imaginary rings."""
    if x.ring == "rational":
        return x
    return QuadInt(x.a + x.spec.trace * x.b, -x.b, x.ring)


def norm(x: QuadInt) -> int:
    if x.ring == "rational":
        return x.a
    r = x.spec
    return x.a * x.a + r.trace * x.a * x.b - r.const * x.b * x.b


def exact_div(x: QuadInt, y: QuadInt) -> QuadInt | None:
    """Return ``x / y`` when ``y`` divides ``x``, else None."""
    if y.is_zero():
        raise DomainError("division by zero")
    if x.ring == "rational":
        return None if x.a % y.a else QuadInt(x.a // y.a, 0, x.ring)
    n = norm(y)
    num = mul(x, conj(y))
    if num.a % n or num.b % n:
        return None
    return QuadInt(num.a // n, num.b // n, x.ring)


def divides(y: QuadInt, x: QuadInt) -> bool:
    return exact_div(x, y) is not None


def _round_div(p: int, q: int) -> int:
    if q < 0:
        p, q = -p, -q
    return (2 * p + q) // (2 * q)


def divmod_euclid(x: QuadInt, y: QuadInt) -> tuple[QuadInt, QuadInt]:
    """Quotient by coordinate-wise rounding; ``|N(r)| < |N(y)|`` in all five rings."""
    if y.is_zero():
        raise DomainError("division by zero")
    if x.ring == "rational":
        q = QuadInt(_round_div(x.a, y.a), 0, x.ring)
        return q, x - q * y
    n = norm(y)
    num = mul(x, conj(y))
    q = QuadInt(_round_div(num.a, n), _round_div(num.b, n), x.ring)
    r = x - q * y
    assert abs(norm(r)) < abs(n)
    return q, r


# -- units -----------------------------------------------------------------

def is_unit(x: QuadInt) -> bool:
    return abs(norm(x)) == 1


def unit_inverse(u: QuadInt) -> QuadInt:
    n = norm(u)
    if abs(n) != 1:
        raise DomainError(f"{u} is not a unit")
    c = conj(u)
    return c if n == 1 else -c


def _unit_sequence(t: int, n_eps: int, n: int) -> tuple[int, int]:
    """Return (c_n, c_{n-1}) for c_{j+1} = t*c_j - n_eps*c_{j-1}, c_0 = 0, c_1 = 1."""
    prev, cur = 0, 1  # c_0, c_1
    if n >= 1:
        for _ in range(n - 1):
            prev, cur = cur, t * cur - n_eps * prev
        return cur, prev
    # walk backwards: c_{j-1} = n_eps * (t*c_j - c_{j+1}) since n_eps = +-1
    nxt, cur = 1, 0  # c_1, c_0
    for _ in range(-n):
        nxt, cur = cur, n_eps * (t * cur - nxt)
    prev = n_eps * (t * cur - nxt)
    return cur, prev


def unit_power(ring: RingSpec | str, n: int) -> QuadInt:
    """Power ``eps**n`` of the fundamental unit via the two-term recursion.

    With trace ``T`` and norm ``N`` of eps, ``eps**n = c_n*eps - N*c_{n-1}``.
    For Z[sqrt2] this is the familiar ``lambda**n = c_n*lambda + c_{n-1}``.
    """
    spec = make_ring(ring) if isinstance(ring, str) else ring
    if spec.fundamental_unit is None:
        raise DomainError(f"ring {spec.id} has a finite unit group")
    if abs(n) > 80:
        raise ResourceError("unit exponent limited to |n| <= 80")
    eps = QuadInt(*spec.fundamental_unit, spec.id)
    t_eps = eps.a * 2 + spec.trace * eps.b  # eps + conj(eps)
    n_eps = norm(eps)
    c_n, c_prev = _unit_sequence(t_eps, n_eps, n)
    out = QuadInt(c_n * eps.a - n_eps * c_prev, c_n * eps.b, spec.id)
    assert abs(norm(out)) == 1
    return out


def unit_sequence(ring: RingSpec | str, n: int) -> int:
    """The integer ``c_n`` with ``eps**n = c_n*eps - N(eps)*c_{n-1}``."""
    spec = make_ring(ring) if isinstance(ring, str) else ring
    eps = QuadInt(*spec.fundamental_unit, spec.id)
    return _unit_sequence(eps.a * 2 + spec.trace * eps.b, norm(eps), n)[0]


# -- canonical associates --------------------------------------------------

def _real_sign(x: QuadInt) -> int:
    """Sign of x under the embedding sending omega to its larger real root."""
    r = x.spec
    u, v, disc = 2 * x.a + r.trace * x.b, x.b, r.discriminant
    if u >= 0 and v >= 0:
        return 0 if u == v == 0 else 1
    if u <= 0 and v <= 0:
        return -1
    lhs, rhs = u * u, v * v * disc
    if u > 0:
        return 1 if lhs > rhs else -1
    return 1 if rhs > lhs else -1


def _dominant(x: QuadInt) -> bool:
    # |x| >= |conj x| under the real embedding; omega - conj(omega) > 0 here
    return x.b * (2 * x.a + x.spec.trace * x.b) >= 0


def canonical_associate(x: QuadInt) -> tuple[QuadInt, QuadInt]:
    """Return ``(unit, rep)`` with ``x = unit * rep`` and ``rep`` canonical.

    gauss: a > 0, b >= 0.  eisenstein: a > 0, 0 <= b < a.  rational: a > 0.
    Real rings: rep > 0 with ``1 <= |rep / conj(rep)| < eps**2``.
    """
    if x.is_zero():
        raise DomainError("zero has no canonical associate")
    r = x.spec
    if r.id == "rational":
        return (QuadInt(1 if x.a > 0 else -1, 0, r.id), QuadInt(abs(x.a), 0, r.id))
    if not r.is_real:
        for coords in r.torsion_units:
            u = QuadInt(*coords, r.id)
            y = mul(u, x)
            if (r.id == "gauss" and y.a > 0 and y.b >= 0) or (
                r.id == "eisenstein" and y.a > 0 and 0 <= y.b < y.a
            ):
                return unit_inverse(u), y
        raise AssertionError("sector rule failed to select an associate")
    eps = QuadInt(*r.fundamental_unit, r.id)
    eps_inv = unit_inverse(eps)
    y, j = x, 0
    while not _dominant(y):
        y, j = mul(y, eps), j - 1
    while _dominant(mul(y, eps_inv)):
        y, j = mul(y, eps_inv), j + 1
    sign = 1
    if _real_sign(y) < 0:
        y, sign = -y, -1
    unit = unit_power(r, j) if abs(j) <= 80 else _slow_power(eps, eps_inv, j)
    return (unit if sign > 0 else -unit), y


def _slow_power(eps: QuadInt, eps_inv: QuadInt, j: int) -> QuadInt:
    return (eps if j > 0 else eps_inv) ** abs(j)


def canonical(x: QuadInt) -> QuadInt:
    return canonical_associate(x)[1]


def is_associate(x: QuadInt, y: QuadInt) -> bool:
    return canonical(x) == canonical(y)


# -- gcd -----------------------------------------------------------------

def gcd(x: QuadInt, y: QuadInt) -> QuadInt:
    if x.ring != y.ring:
        raise DomainError(f"ring mismatch: {x.ring} vs {y.ring}")
    if x.is_zero() and y.is_zero():
        raise DomainError("gcd(0, 0) is undefined")
    while not y.is_zero():
        _, rem = divmod_euclid(x, y)
        x, y = y, rem
    return canonical(x)


def xgcd(x: QuadInt, y: QuadInt) -> tuple[QuadInt, QuadInt, QuadInt]:
    """Bezout data ``(g, u, v)`` with ``u*x + v*y = g``; ``g`` is a gcd up to a unit."""
    if x.ring != y.ring:
        raise DomainError(f"ring mismatch: {x.ring} vs {y.ring}")
    if x.is_zero() and y.is_zero():
        raise DomainError("gcd(0, 0) is undefined")
    one, zero = QuadInt(1, 0, x.ring), QuadInt(0, 0, x.ring)
    r0, r1, s0, s1, t0, t1 = x, y, one, zero, zero, one
    while not r1.is_zero():
        q, r = divmod_euclid(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


# -- primes ----------------------------------------------------------------

@dataclass(frozen=True)
class PrimeClass:
    tag: str  # "Ramified" | "Inert" | "Split"
    generators: tuple[QuadInt, ...]


def _split_root(spec: RingSpec, p: int) -> int:
    roots = sqrt_mod(spec.discriminant % p, p, all_roots=True)
    if not roots:
        raise AssertionError(f"{p} should split in {spec.id}")
    inv2 = pow(2, -1, p)
    return ((spec.trace + min(roots)) * inv2) % p


@lru_cache(maxsize=4096)
def classify_prime(ring: str, p: int) -> PrimeClass:
    """Decide how the rational prime ``p`` behaves in ``ring``.

    Split primes come back as a pair of canonical, non-associate conjugates,
    ordered so the larger coordinate pair is first.
    """
    spec = make_ring(ring)
    if p < 2 or not isprime(p):
        raise DomainError(f"{p} is not a rational prime")
    for q, gen in spec.ramified:
        if q == p:
            return PrimeClass("Ramified", (canonical(QuadInt(*gen, ring)),))
    res = p % spec.split_modulus
    if res in spec.inert_residues or spec.id == "rational":
        return PrimeClass("Inert", (QuadInt(p, 0, ring),))
    if res not in spec.split_residues:
        raise AssertionError(f"unclassified prime {p} in {ring}")
    r = _split_root(spec, p)
    pi = gcd(QuadInt(p, 0, ring), QuadInt(-r, 1, ring))
    if abs(norm(pi)) != p:
        raise AssertionError(f"split descent failed for {p} in {ring}")
    pair = sorted({pi, canonical(conj(pi))}, key=lambda z: (z.a, z.b), reverse=True)
    assert len(pair) == 2
    return PrimeClass("Split", tuple(pair))


def abs_norm_of_prime_class(ring: str, p: int) -> list[int]:
    """Absolute norms of the canonical primes above ``p`` (no generators needed)."""
    spec = make_ring(ring)
    if p in spec.ramified_primes:
        return [p]
    res = p % spec.split_modulus
    if spec.id == "rational":
        return [p]
    if res in spec.inert_residues:
        return [p * p]
    return [p, p]


def canonical_primes(ring: str, max_abs_norm: int) -> list[QuadInt]:
    """All canonical primes with ``|N(pi)| <= max_abs_norm``, sorted by norm."""
    spec = make_ring(ring)
    out: list[QuadInt] = []
    for p in primerange(2, max_abs_norm + 1):
        if spec.id != "rational" and p not in spec.ramified_primes:
            if p % spec.split_modulus in spec.inert_residues and p * p > max_abs_norm:
                continue
        out.extend(classify_prime(ring, p).generators)
    return sorted(out, key=lambda z: (abs(norm(z)), -z.a, -z.b))


def prime_norm(pi: QuadInt) -> int:
    return abs(norm(pi))


# -- factorisation ---------------------------------------------------------

@dataclass(frozen=True)
class Factorization:
    unit: QuadInt
    factors: tuple[tuple[QuadInt, int], ...]

    def value(self) -> QuadInt:
        out = self.unit
        for pi, e in self.factors:
            out = out * pi**e
        return out

    def exponents(self) -> dict[QuadInt, int]:
        return dict(self.factors)


def factor(x: QuadInt) -> Factorization:
    """Canonical factorisation: factor ``|N(x)|`` over Z, then lift each prime."""
    if x.is_zero():
        raise DomainError("cannot factor zero")
    n = abs(norm(x))
    if n > MAX_FACTOR_NORM:
        raise ResourceError(f"|N(x)| = {n} exceeds the factoring limit {MAX_FACTOR_NORM}")
    factors: list[tuple[QuadInt, int]] = []
    rest = x
    for p in sorted(factorint(n)):
        for pi in classify_prime(x.ring, p).generators:
            e = 0
            while True:
                q = exact_div(rest, pi)
                if q is None:
                    break
                rest, e = q, e + 1
            if e:
                factors.append((pi, e))
    if not is_unit(rest):
        raise AssertionError(f"factorisation of {x} left non-unit {rest}")
    return Factorization(rest, tuple(factors))


def is_k_free(x: QuadInt, k: int) -> bool:
    if k < 2:
        raise DomainError("k must be at least 2")
    if x.is_zero():
        return False
    return all(e < k for _, e in factor(x).factors)


def iter_box(ring: str, radius: int) -> Iterator[QuadInt]:
    if ring == "rational":
        yield from (QuadInt(a, 0, ring) for a in range(-radius, radius + 1))
        return
    for a in range(-radius, radius + 1):
        for b in range(-radius, radius + 1):
            yield QuadInt(a, b, ring)

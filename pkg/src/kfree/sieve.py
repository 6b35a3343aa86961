"""Finite windows of visible, B-free and k-free point sets.

Windows are boxes ``[-R, R]^d``.  Every sieve works on a boolean mask that is
partitioned into slabs along the first axis; slabs are independent, so the
output does not depend on how (or whether) the box is split across threads.
"""
from __future__ import annotations

import json
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from sympy import factorint, primerange

from .errors import ConfigError, ResourceError
from .lattice import ModulusLattice, ideal_lattice, scalar_lattice
from .rings import QuadInt, canonical_primes, is_k_free, make_ring

MAX_BOX_POINTS = 10**8
KINDS = ("visible", "kfree_lattice", "bfree_lattice", "kfree_ring")


@dataclass(frozen=True)
class Box:
    d: int
    half_width: int

    def __post_init__(self) -> None:
        if self.d not in (1, 2, 3):
            raise ConfigError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.half_width < 1:
            raise ConfigError(f"half width must be >= 1, got {self.half_width}")
        if self.size > MAX_BOX_POINTS:
            raise ResourceError(f"box has {self.size} points, limit is {MAX_BOX_POINTS}")

    @property
    def side(self) -> int:
        return 2 * self.half_width + 1

    @property
    def size(self) -> int:
        return self.side**self.d

    def contains(self, p: Sequence[int]) -> bool:
        return all(-self.half_width <= c <= self.half_width for c in p)


@dataclass(frozen=True)
class VSpec:
    kind: str
    d: int = 2
    k: int | None = None
    B: tuple[int, ...] | None = None
    ring: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown set kind {self.kind!r}")
        if self.kind in ("kfree_lattice", "kfree_ring") and (self.k is None or self.k < 1):
            raise ConfigError("k-free sets need k >= 1")
        if self.kind == "kfree_ring":
            spec = make_ring(self.ring or "")
            if self.d != spec.degree:
                raise ConfigError(f"kfree_ring over {self.ring} lives in dimension {spec.degree}")
            if self.k < 2:
                raise ConfigError("kfree_ring needs k >= 2")
        if self.kind == "bfree_lattice":
            if not self.B or any(b < 2 for b in self.B):
                raise ConfigError("B must be a non-empty list of integers >= 2")
            bs = sorted(set(self.B))
            for i, b in enumerate(bs):
                if any(c % b == 0 for c in bs[i + 1:]):
                    raise ConfigError(f"B is not primitive: {b} divides a larger element")

    @property
    def is_erdos(self) -> bool:
        """Pairwise coprime moduli (the summability condition holds for d >= 2)."""
        if self.kind == "bfree_lattice":
            bs = sorted(set(self.B))
            return all(math.gcd(x, y) == 1 for i, x in enumerate(bs) for y in bs[i + 1:])
        if self.kind == "kfree_lattice":
            return self.k * self.d >= 2
        return True

    def label(self) -> str:
        if self.kind == "visible":
            return f"visible(d={self.d})"
        if self.kind == "kfree_lattice":
            return f"kfree_lattice(d={self.d},k={self.k})"
        if self.kind == "bfree_lattice":
            return f"bfree_lattice(d={self.d},B={list(self.B)})"
        return f"kfree_ring({self.ring},k={self.k})"

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "d": self.d}
        if self.k is not None:
            out["k"] = self.k
        if self.B is not None:
            out["B"] = list(self.B)
        if self.ring is not None:
            out["ring"] = self.ring
        return out

    @classmethod
    def from_dict(cls, data: dict) -> VSpec:
        return cls(
            kind=data["kind"],
            d=data.get("d", 2),
            k=data.get("k"),
            B=tuple(data["B"]) if data.get("B") is not None else None,
            ring=data.get("ring"),
        )

    # moduli ---------------------------------------------------------------

    def iter_moduli(self) -> Iterator[ModulusLattice]:
        """All defining moduli in order of non-decreasing index (possibly infinite)."""
        if self.kind == "bfree_lattice":
            for b in sorted(set(self.B)):
                yield scalar_lattice(b, self.d)
            return
        if self.kind == "kfree_ring":
            bound = 64
            seen = 0
            while True:
                primes = _ring_primes(self.ring, bound)
                for pi in primes[seen:]:
                    yield ideal_lattice(pi, self.k)
                seen = len(primes)
                bound *= 4
        exp = 1 if self.kind == "visible" else self.k
        bound = 64
        lo = 2
        while True:
            for p in primerange(lo, bound):
                yield scalar_lattice(p**exp, self.d)
            lo, bound = bound, bound * 4

    def moduli(self, max_index: int) -> list[ModulusLattice]:
        """Defining moduli whose index does not exceed ``max_index``."""
        if max_index < 2:
            return []
        if self.kind == "bfree_lattice":
            return [scalar_lattice(b, self.d) for b in sorted(set(self.B)) if b**self.d <= max_index]
        if self.kind == "kfree_ring":
            root = _iroot(max_index, self.k)
            return [ideal_lattice(pi, self.k) for pi in _ring_primes(self.ring, root)]
        exp = 1 if self.kind == "visible" else self.k
        root = _iroot(max_index, exp * self.d)
        return [scalar_lattice(p**exp, self.d) for p in primerange(2, root + 1)]


def _iroot(n: int, k: int) -> int:
    r = int(round(n ** (1.0 / k)))
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


@lru_cache(maxsize=64)
def _ring_primes(ring: str, max_abs_norm: int) -> tuple[QuadInt, ...]:
    return tuple(canonical_primes(ring, max_abs_norm))


def visible(d: int = 2) -> VSpec:
    return VSpec("visible", d)


def kfree_lattice(d: int, k: int) -> VSpec:
    return VSpec("kfree_lattice", d, k=k)


def bfree_lattice(d: int, B: Sequence[int]) -> VSpec:
    return VSpec("bfree_lattice", d, B=tuple(B))


def kfree_ring(ring: str, k: int) -> VSpec:
    return VSpec("kfree_ring", make_ring(ring).degree, k=k, ring=ring)


# -- membership oracle --------------------------------------------------------

def _kfree_int(n: int, k: int) -> bool:
    return all(e < k for e in factorint(abs(n)).values())


def contains(spec: VSpec, p: Sequence[int]) -> bool:
    """Exact single-point membership, independent of any sieve."""
    p = tuple(int(c) for c in p)
    if len(p) != spec.d:
        raise ConfigError(f"point {p} has wrong dimension for {spec.label()}")
    if spec.kind == "kfree_ring":
        x = QuadInt(p[0], p[1] if spec.d == 2 else 0, spec.ring)
        return is_k_free(x, spec.k)
    g = math.gcd(*p)
    if g == 0:
        return False
    if spec.kind == "visible":
        return g == 1
    if spec.kind == "kfree_lattice":
        return _kfree_int(g, spec.k)
    return all(g % b for b in spec.B)


# -- sieving ----------------------------------------------------------------

def _strike_scalar(mask: np.ndarray, lo: int, R: int, b: int) -> None:
    d = mask.ndim
    sl = (slice((-lo) % b, None, b),) + (slice(R % b, None, b),) * (d - 1)
    mask[sl] = False


def _strike_hnf2(mask: np.ndarray, lo: int, hi: int, R: int, basis) -> None:
    """Clear every point of the 2-d lattice with upper-triangular ``basis``."""
    (h00, h01), (_, h11) = basis
    j = np.arange(-(R // h11), R // h11 + 1, dtype=np.int64)
    xs = lo + np.mod(j * h01 - lo, h00)
    cnt = np.maximum((hi - xs) // h00 + 1, 0)
    m = int(cnt.max()) if cnt.size else 0
    if m == 0:
        return
    t = np.arange(m, dtype=np.int64)
    ok = t[None, :] < cnt[:, None]
    X = (xs[:, None] + h00 * t[None, :])[ok]
    Y = np.broadcast_to((j * h11)[:, None], ok.shape)[ok]
    mask[X - lo, Y + R] = False


def max_abs_norm(ring: str, R: int) -> int:
    """Upper bound for ``|N(a + b*omega)|`` over the box ``[-R, R]^2``."""
    spec = make_ring(ring)
    if spec.id == "rational":
        return R
    _, t, r = spec.norm_coeffs
    return (1 + abs(t) + abs(r)) * R * R


def _scalar_moduli(spec: VSpec, R: int) -> list[int]:
    if spec.kind == "visible":
        return list(primerange(2, R + 1))
    if spec.kind == "kfree_lattice":
        return [p**spec.k for p in primerange(2, _iroot(R, spec.k) + 1)]
    if spec.kind == "bfree_lattice":
        return [b for b in sorted(set(spec.B)) if b <= R]
    # rational ring: k-th powers of rational primes
    return [p**spec.k for p in primerange(2, _iroot(R, spec.k) + 1)]


def _sieve_slab(spec: VSpec, R: int, lo: int, hi: int) -> np.ndarray:
    shape = (hi - lo + 1,) + (2 * R + 1,) * (spec.d - 1)
    mask = np.ones(shape, dtype=bool)
    if spec.kind == "kfree_ring" and spec.ring != "rational":
        bound = _iroot(max_abs_norm(spec.ring, R), spec.k)
        for pi in _ring_primes(spec.ring, bound):
            _strike_hnf2(mask, lo, hi, R, ideal_lattice(pi, spec.k).basis)
    else:
        for b in _scalar_moduli(spec, R):
            _strike_scalar(mask, lo, R, b)
    if lo <= 0 <= hi:
        mask[(-lo,) + (R,) * (spec.d - 1)] = False
    return mask


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("KFREE_THREADS", "1")))
    except ValueError:
        raise ConfigError("KFREE_THREADS must be an integer") from None


def sieve_mask(spec: VSpec, box: Box, threads: int | None = None) -> np.ndarray:
    """Boolean membership mask of the box, indexed by ``coords + R``."""
    if box.d != spec.d:
        raise ConfigError(f"box dimension {box.d} does not match {spec.label()}")
    R = box.half_width
    n = threads or default_threads()
    n = max(1, min(n, box.side))
    if n == 1:
        return _sieve_slab(spec, R, -R, R)
    edges = np.linspace(-R, R + 1, n + 1).astype(int)
    slabs = [(int(a), int(b) - 1) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=n) as pool:
        parts = list(pool.map(lambda s: _sieve_slab(spec, R, *s), slabs))
    return np.concatenate(parts, axis=0)


@dataclass
class PointSet:
    spec: VSpec
    box: Box
    points: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.points)

    def as_tuples(self) -> list[tuple[int, ...]]:
        return [tuple(int(c) for c in p) for p in self.points]

    def mask(self) -> np.ndarray:
        R = self.box.half_width
        m = np.zeros((self.box.side,) * self.box.d, dtype=bool)
        if len(self.points):
            m[tuple((self.points + R).T)] = True
        return m

    def restrict(self, half_width: int) -> PointSet:
        keep = np.all(np.abs(self.points) <= half_width, axis=1)
        return PointSet(self.spec, Box(self.box.d, half_width), self.points[keep])

    def density(self) -> Fraction:
        return density(self)

    def to_dict(self) -> dict:
        return {
            "schema": "pointset/1",
            "spec": self.spec.to_dict(),
            "box": {"d": self.box.d, "half_width": self.box.half_width},
            "points": self.points.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    def to_bytes(self) -> bytes:
        header = json.dumps(self.spec.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        body = np.ascontiguousarray(self.points, dtype="<i4").tobytes()
        return (
            _MAGIC
            + struct.pack("<BBIQI", 1, self.box.d, self.box.half_width, len(self.points), len(header))
            + header
            + body
        )

    @classmethod
    def from_dict(cls, data: dict) -> PointSet:
        if data.get("schema") != "pointset/1":
            raise ConfigError(f"unsupported schema {data.get('schema')!r}")
        box = Box(data["box"]["d"], data["box"]["half_width"])
        pts = np.array(data["points"], dtype=np.int64).reshape(-1, box.d)
        return cls(VSpec.from_dict(data["spec"]), box, pts)

    @classmethod
    def from_bytes(cls, raw: bytes) -> PointSet:
        if raw[:4] != _MAGIC:
            raise ConfigError("not a binary pointset")
        off = 4 + struct.calcsize("<BBIQI")
        version, d, R, n, hlen = struct.unpack("<BBIQI", raw[4:off])
        if version != 1:
            raise ConfigError(f"unsupported binary pointset version {version}")
        spec = VSpec.from_dict(json.loads(raw[off:off + hlen]))
        pts = np.frombuffer(raw[off + hlen:], dtype="<i4").astype(np.int64).reshape(n, d)
        return cls(spec, Box(d, R), pts)


_MAGIC = b"KFPS"


def sieve(spec: VSpec, box: Box, threads: int | None = None) -> PointSet:
    """Exact window ``V intersect box``, sorted lexicographically."""
    mask = sieve_mask(spec, box, threads)
    pts = np.argwhere(mask).astype(np.int64) - box.half_width
    return PointSet(spec, box, pts)


def density(ps: PointSet) -> Fraction:
    """Share of box points (origin included in the count) that lie in the set."""
    return Fraction(len(ps.points), ps.box.size)

"""Zeta values, theoretical densities and entropies, and empirical comparisons."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from sympy import bernoulli, factorial

from .errors import ConfigError, DomainError
from .rings import canonical_primes, prime_norm
from .sieve import Box, VSpec, density, sieve

CLASSICAL = "classical"
EXTENSION = "extension"
DEFAULT_TRUNCATION = 20000


@lru_cache(maxsize=None)
def _bernoulli_coeff(j: int) -> float:
    """``B_{2j} / (2j)!`` as a float."""
    return float(bernoulli(2 * j) / factorial(2 * j))


def zeta_with_bound(s: float, tol: float = 1e-14, N: int | None = None) -> tuple[float, float]:
    """Riemann zeta by Euler-Maclaurin summation, with a bound on the truncation error.

    For real ``s`` the remainder after the correction terms is smaller than the
    first omitted term, which is returned as the bound.
    """
    if s < 1.5:
        raise DomainError(f"s = {s} is too close to the pole at 1")
    if tol < 1e-14:
        raise ConfigError("tolerance below 1e-14 is not supported in double precision")
    N = N or 16
    parts = [n**-s for n in range(1, N)]
    parts += [N ** (1 - s) / (s - 1), 0.5 * N**-s]
    rising = s  # s (s+1) ... (s+2j-2)
    for j in range(1, 200):
        term = _bernoulli_coeff(j) * rising * N ** (-s - 2 * j + 1)
        if abs(term) <= tol / 2:
            return math.fsum(parts), abs(term)
        parts.append(term)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    raise DomainError("Euler-Maclaurin terms did not shrink; raise N")


def zeta(s: float, tol: float = 1e-14, N: int | None = None) -> float:
    return zeta_with_bound(s, tol, N)[0]


@dataclass(frozen=True)
class Theory:
    value: float
    provenance: str
    truncation: int | None = None


def _ring_euler_product(ring: str, k: int, truncation: int) -> float:
    factors = [1.0 - prime_norm(pi) ** -k for pi in canonical_primes(ring, truncation)]
    return math.prod(factors)


def theoretical_density(spec: VSpec, truncation: int = DEFAULT_TRUNCATION) -> Theory:
    """Limit density of the set, tagged with where the constant comes from.

    Ring sets use a truncated Euler product of the Dedekind zeta function; the
    constant is a cross-check only and is tagged as an extension.
    """
    if spec.kind == "visible":
        if spec.d < 2:
            raise DomainError("visible points need d >= 2")
        return Theory(1.0 / zeta(spec.d), CLASSICAL)
    if spec.kind == "kfree_lattice":
        if spec.k * spec.d < 2:
            raise DomainError("k*d must be at least 2")
        return Theory(1.0 / zeta(spec.k * spec.d), CLASSICAL)
    if spec.kind == "bfree_lattice":
        if not spec.is_erdos:
            raise DomainError("density product needs pairwise coprime B")
        return Theory(math.prod(1.0 - b ** -spec.d for b in sorted(set(spec.B))), EXTENSION)
    return Theory(_ring_euler_product(spec.ring, spec.k, truncation), EXTENSION, truncation)


def entropy(spec: VSpec, truncation: int = DEFAULT_TRUNCATION) -> Theory:
    """Topological entropy ``dens(V) * log 2``."""
    th = theoretical_density(spec, truncation)
    return Theory(th.value * math.log(2), th.provenance, th.truncation)


@dataclass
class DensityReport:
    spec: VSpec
    radii: list[int]
    empirical: list[Fraction]
    theoretical: Theory

    @property
    def relative_errors(self) -> list[float]:
        t = self.theoretical.value
        return [abs(float(e) - t) / t for e in self.empirical]

    def rows(self) -> list[dict]:
        return [
            {
                "spec": self.spec.label(),
                "radius": r,
                "empirical": repr(float(e)),
                "theoretical": repr(self.theoretical.value),
                "rel_error": repr(err),
                "provenance": self.theoretical.provenance,
            }
            for r, e, err in zip(self.radii, self.empirical, self.relative_errors)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["spec", "radius", "empirical", "theoretical", "rel_error", "provenance"]
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "schema": "density/1",
            "spec": self.spec.to_dict(),
            "theoretical": self.theoretical.value,
            "provenance": self.theoretical.provenance,
            "truncation": self.theoretical.truncation,
            "rows": [
                {
                    "radius": r,
                    "count": e.numerator * ((2 * r + 1) ** self.spec.d) // e.denominator,
                    "empirical": [e.numerator, e.denominator],
                    "empirical_float": float(e),
                    "rel_error": err,
                }
                for r, e, err in zip(self.radii, self.empirical, self.relative_errors)
            ],
        }


def density_report(
    spec: VSpec, radii: Sequence[int], threads: int | None = None, truncation: int = DEFAULT_TRUNCATION
) -> DensityReport:
    radii = sorted(set(radii))
    if not radii:
        raise ConfigError("at least one radius is required")
    theory = theoretical_density(spec, truncation)
    # one sieve at the largest radius, then restrict (windows are monotone)
    big = sieve(spec, Box(spec.d, radii[-1]), threads)
    emp = [density(big.restrict(r)) for r in radii]
    return DensityReport(spec, radii, emp, theory)

"""Exact sieves, admissibility and symmetry searches for visible points,
B-free lattice sets and k-free integers in quadratic rings."""

from .errors import ConfigError, DomainError, KfreeError, PreconditionError, ResourceError
from .rings import QuadInt, canonical_associate, classify_prime, factor, gcd, is_k_free, make_ring, unit_power
from .lattice import ModulusLattice, crt_solve, ideal_lattice, scalar_lattice
from .sieve import Box, PointSet, VSpec, bfree_lattice, contains, density, kfree_lattice, kfree_ring, sieve, visible
from .admissibility import cosets_met, find_locator, is_admissible, locator_density_bound
from .symmetry import UniMat, bad_prime_witness, enumerate_glz, expected_generators, inadmissible_image_witness, stab_search, stab_test
from .analytics import density_report, entropy, theoretical_density, zeta

__version__ = "0.1.0"

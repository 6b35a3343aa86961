import csv
import io
import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kfree.analytics import density_report, entropy, theoretical_density, zeta, zeta_with_bound
from kfree.errors import ConfigError, DomainError
from kfree.sieve import bfree_lattice, kfree_lattice, kfree_ring, visible


def test_zeta_closed_forms():
    assert abs(zeta(2) - math.pi**2 / 6) < 1e-12
    assert abs(zeta(4) - math.pi**4 / 90) < 1e-12
    assert abs(zeta(6) - math.pi**6 / 945) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(1.5, 40, allow_nan=False))
def test_zeta_against_mpmath(s):
    assert abs(zeta(s) - float(mpmath.zeta(s))) <= 1e-13


def test_zeta_bound_is_honoured():
    val, bound = zeta_with_bound(6, 1e-12)
    assert bound <= 1e-12
    assert abs(val - zeta(6, 1e-12, N=32)) <= 1e-12
    assert abs(zeta(1.5) - float(mpmath.zeta(1.5))) < 1e-13


def test_zeta_errors():
    with pytest.raises(DomainError):
        zeta(1.2)
    with pytest.raises(ConfigError):
        zeta(2, 1e-16)


def test_theoretical_values():
    th = theoretical_density(visible(2))
    assert th.value == pytest.approx(0.607927, abs=1e-6) and th.provenance == "classical"
    th = theoretical_density(kfree_lattice(2, 2))
    assert th.value == pytest.approx(0.923938, abs=1e-6) and th.provenance == "classical"
    assert theoretical_density(visible(3)).value == pytest.approx(1 / float(mpmath.zeta(3)), rel=1e-13)
    with pytest.raises(DomainError):
        theoretical_density(visible(1))
    with pytest.raises(DomainError):
        theoretical_density(bfree_lattice(2, [4, 6]))
    assert theoretical_density(bfree_lattice(2, [4, 9])).provenance == "extension"


def test_ring_product_is_tagged_and_decreasing():
    spec = kfree_ring("gauss", 2)
    vals = [theoretical_density(spec, n) for n in (10, 100, 1000, 20000)]
    assert all(v.provenance == "extension" for v in vals)
    assert [v.truncation for v in vals] == [10, 100, 1000, 20000]
    nums = [v.value for v in vals]
    assert nums == sorted(nums, reverse=True)
    assert 0 < nums[-1] < 1


def test_entropy_is_density_times_log2():
    assert entropy(visible(2)).value == theoretical_density(visible(2)).value * math.log(2)
    assert entropy(visible(2)).value == pytest.approx(0.42139, abs=1e-5)
    assert entropy(kfree_lattice(3, 2)).value == math.log(2) / zeta(6)
    with pytest.raises(DomainError):
        entropy(visible(1))
    assert entropy(kfree_ring("eisenstein", 2)).provenance == "extension"


def test_density_report_converges():
    rep = density_report(visible(2), [250, 500, 1000, 2000])
    errs = rep.relative_errors
    assert errs[-1] <= errs[0]
    assert errs[2] < 0.005


def test_density_report_csv():
    rep = density_report(kfree_lattice(2, 2), [10, 20])
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert list(rows[0]) == ["spec", "radius", "empirical", "theoretical", "rel_error", "provenance"]
    assert [r["radius"] for r in rows] == ["10", "20"]
    d = rep.to_dict()
    assert d["schema"] == "density/1" and d["rows"][0]["count"] == round(float(rep.empirical[0]) * 21**2)


def test_density_report_needs_radius():
    with pytest.raises(ConfigError):
        density_report(visible(2), [])

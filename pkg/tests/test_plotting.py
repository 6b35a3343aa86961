from kfree.analytics import density_report
from kfree.plotting import plot_density, render_ppm, render_svg
from kfree.sieve import Box, PointSet, kfree_ring, sieve, visible


def test_svg_is_deterministic(tmp_path):
    ps = sieve(kfree_ring("eisenstein", 2), Box(2, 12))
    a = render_svg([ps], tmp_path / "a.svg", embed=True)
    b = render_svg([ps], tmp_path / "b.svg", embed=True)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().lstrip().startswith("<?xml")


def test_svg_two_sets_and_empty(tmp_path):
    ps = sieve(visible(2), Box(2, 6))
    empty = PointSet(ps.spec, ps.box, ps.points[:0])
    out = render_svg([ps, empty], tmp_path / "c.svg", title="two")
    assert "two" in out.read_text()


def test_ppm_header(tmp_path):
    ps = sieve(visible(2), Box(2, 5))
    raw = render_ppm(ps, tmp_path / "v.ppm", scale=2).read_bytes()
    side = 2 * 11
    header = f"P6\n{side} {side}\n255\n".encode()
    assert raw.startswith(header) and len(raw) == len(header) + 3 * side * side


def test_density_plot(tmp_path):
    out = plot_density(density_report(visible(2), [10, 20, 40]), tmp_path / "d.png")
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

import numpy as np
import pytest

from usets import geometry as geo
from usets.geometry import Verdict
from usets.serialize import ParseError, format_region, parse_region_text


def roundtrip(region):
    return parse_region_text(format_region(region))


class TestRoundTrip:
    def test_polytope(self, tetrahedron):
        back = roundtrip(tetrahedron)
        assert geo.regions_equal(back, tetrahedron) is Verdict.TRUE

    def test_box_with_infinite_bounds(self):
        b = geo.box([0, float("-inf")], [1, float("inf")])
        back = roundtrip(b)
        assert isinstance(back, geo.Box)
        assert np.array_equal(back.lower, b.lower) and np.array_equal(back.upper, b.upper)

    def test_union(self):
        u = geo.UnionOfPolytopes((
            geo.as_polytope(geo.interval(0, 1)),
            geo.as_polytope(geo.interval(2, 3)),
        ))
        back = roundtrip(u)
        assert isinstance(back, geo.UnionOfPolytopes)
        assert geo.contains(back, [0.5]) and geo.contains(back, [2.5])
        assert not geo.contains(back, [1.5])

    def test_ellipsoid(self):
        e = geo.Ellipsoid([1.0, 2.0], np.array([[2.0, 0.5], [0.5, 1.0]]), 1.5)
        back = roundtrip(e)
        assert isinstance(back, geo.Ellipsoid)
        assert np.allclose(back.center, e.center)
        assert np.allclose(back.shape, e.shape)
        assert back.level == pytest.approx(e.level)

    def test_empty_and_full(self):
        assert isinstance(roundtrip(geo.EmptyRegion(3)), geo.EmptyRegion)
        assert isinstance(roundtrip(geo.FullRegion(2)), geo.FullRegion)

    def test_float_precision_survives(self):
        p = geo.polytope([[1 / 3, -2 / 7]], [1e-13])
        back = roundtrip(p)
        assert np.array_equal(back.a, p.a)
        assert np.array_equal(back.b, p.b)


class TestParsing:
    def test_exponent_notation(self):
        region = parse_region_text("box\n-1e-2 0\n2.5E3 1\n")
        assert isinstance(region, geo.Box)
        assert region.lower[0] == pytest.approx(-0.01)
        assert region.upper[0] == pytest.approx(2500.0)

    def test_comments_and_blank_lines(self):
        text = "# a comment\n\nbox\n0\n# interior comment\n1\n"
        assert isinstance(parse_region_text(text), geo.Box)

    def test_error_carries_line_number(self):
        with pytest.raises(ParseError) as err:
            parse_region_text("polytope n=2 rows=1\n1 oops 3\n")
        assert err.value.line == 2

    def test_row_count_mismatch(self):
        with pytest.raises(ParseError):
            parse_region_text("polytope n=2 rows=2\n1 0 1\n")

    def test_unknown_kind(self):
        with pytest.raises(ParseError) as err:
            parse_region_text("zonotope n=2\n")
        assert "zonotope" in str(err.value)

    def test_trailing_content_rejected(self):
        with pytest.raises(ParseError):
            parse_region_text("box\n0\n1\nextra\n")

    def test_missing_attribute(self):
        with pytest.raises(ParseError):
            parse_region_text("polytope rows=1\n1 0\n")

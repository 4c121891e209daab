"""
Unit tests for golden display loading and comparison
"""
import pytest

from app.algebra import FIELD
from app.golden import (
    canonical_roundtrip,
    compare_expression,
    compare_series,
    compare_table,
    golden_names,
    golden_path,
    load_expression,
    load_series,
    load_table,
)
from app.parser import parse_expression
from app.series import TruncatedSeries

P = parse_expression


@pytest.fixture
def golden_dir(tmp_path):
    (tmp_path / "toy").mkdir()
    (tmp_path / "toy" / "series.txt").write_text(
        "# a comment line\n-1 = hbar\n0 = -alpha  # trailing comment\n2 = beta/hbar^2\n"
    )
    (tmp_path / "toy" / "limit.txt").write_text("x^2\n  + beta*x\n")
    (tmp_path / "toy" / "broken.txt").write_text("x + 1\ny\n")
    return tmp_path


class TestLoaders:
    """Test parsing of golden files"""

    def test_load_series(self, golden_dir):
        table = load_series("toy/series", golden_dir)
        assert table == {-1: P("hbar"), 0: P("-alpha"), 2: P("beta/hbar^2")}

    def test_load_expression_joins_lines(self, golden_dir):
        assert load_expression("toy/limit", golden_dir) == P("x^2 + beta*x")

    def test_table_line_without_equals(self, golden_dir):
        with pytest.raises(ValueError, match="without '='"):
            load_table("toy/limit", golden_dir)

    def test_missing_file(self, golden_dir):
        with pytest.raises(FileNotFoundError, match="toy/absent"):
            golden_path("toy/absent", golden_dir)

    def test_golden_names(self, golden_dir):
        assert golden_names(golden_dir) == ["toy/broken", "toy/limit", "toy/series"]


class TestComparisons:
    """Test coefficient-level comparison with displays"""

    def setup_method(self):
        """Setup test fixtures"""
        self.expected = {-1: P("hbar"), 0: P("-alpha"), 2: P("beta/hbar^2")}

    def _series(self, extra=None):
        return TruncatedSeries("t1", P("alpha"), {**self.expected, **(extra or {})}, 5)

    def test_matching_series(self):
        assert compare_series(self._series(), self.expected) == []

    def test_omitted_power_must_vanish(self):
        mismatches = compare_series(self._series({1: P("gamma")}), self.expected)
        assert [m.key for m in mismatches] == ["1"]
        assert mismatches[0].expected == "0"

    def test_power_beyond_display_is_ignored(self):
        assert compare_series(self._series({4: P("gamma")}), self.expected) == []

    def test_compare_table(self):
        mismatches = compare_table({"alpha": P("beta"), "beta": P("1")}, {"alpha": P("beta"), "gamma": P("2")})
        assert sorted(m.key for m in mismatches) == ["beta", "gamma"]

    def test_compare_expression(self):
        assert compare_expression("limit", P("x + 1"), "1 + x") == []
        assert compare_expression("limit", P("x"), FIELD.zero)[0].key == "limit"


class TestShippedDisplays:
    """Test the displays shipped with the package"""

    def test_all_models_present(self):
        names = golden_names()
        for model in ("pIV", "gar92", "gar5232"):
            assert any(name.startswith(f"{model}/") for name in names)

    @pytest.mark.parametrize("name", golden_names())
    def test_canonical_roundtrip(self, name):
        assert canonical_roundtrip(name)

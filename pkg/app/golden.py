"""
Golden displays: reference formulas stored as canonical text under ``golden/``.

A golden file holds either one expression (possibly spread over several
lines) or a table of ``key = expression`` lines. Series tables are keyed by
the power of the local variable; flow tables by parameter name. Lines
starting with ``#`` are comments.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Union

from .algebra import FIELD, RatFunc, to_text
from .config import settings
from .parser import parse_expression
from .series import TruncatedSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Mismatch:
    key: str
    expected: str
    computed: str


def golden_path(name: str, directory: Optional[Path] = None) -> Path:
    path = Path(directory or settings.golden_dir) / f"{name}.txt"
    if not path.is_file():
        raise FileNotFoundError(f"golden file '{name}' not found in {path.parent}")
    return path


def _content_lines(path: Path) -> List[str]:
    lines = (line.split("#", 1)[0].strip() for line in path.read_text(encoding="utf-8").splitlines())
    return [line for line in lines if line]


def load_expression(name: str, directory: Optional[Path] = None) -> RatFunc:
    """Parse a single-expression golden file"""
    return parse_expression(" ".join(_content_lines(golden_path(name, directory))))


def load_table(name: str, directory: Optional[Path] = None) -> Dict[str, RatFunc]:
    """Parse a ``key = expression`` golden file"""
    table: Dict[str, RatFunc] = {}
    for line in _content_lines(golden_path(name, directory)):
        key, sep, text = line.partition("=")
        if not sep:
            raise ValueError(f"golden line without '=': {line!r}")
        table[key.strip()] = parse_expression(text)
    return table


def load_series(name: str, directory: Optional[Path] = None) -> Dict[int, RatFunc]:
    return {int(k): v for k, v in load_table(name, directory).items()}


def compare_series(series: TruncatedSeries, expected: Mapping[int, RatFunc]) -> List[Mismatch]:
    """Coefficients that differ from a golden display.

    Every power between the lowest and highest displayed one is compared;
    powers the display omits must vanish.
    """
    mismatches = []
    for n in range(min(expected), max(expected) + 1):
        want = expected.get(n, FIELD.zero)
        got = series.coefficient(n)
        if got != want:
            mismatches.append(Mismatch(str(n), to_text(want), to_text(got)))
    return mismatches


def compare_table(
    computed: Mapping[str, RatFunc], expected: Mapping[str, RatFunc]
) -> List[Mismatch]:
    mismatches = []
    for key in sorted(set(computed) | set(expected)):
        got = computed.get(key, FIELD.zero)
        want = expected.get(key, FIELD.zero)
        if got != want:
            mismatches.append(Mismatch(key, to_text(want), to_text(got)))
    return mismatches


def compare_expression(key: str, computed: RatFunc, expected: Union[RatFunc, str]) -> List[Mismatch]:
    if isinstance(expected, str):
        expected = parse_expression(expected)
    if computed == expected:
        return []
    return [Mismatch(key, to_text(expected), to_text(computed))]


def golden_names(directory: Optional[Path] = None) -> List[str]:
    """All golden files as ``model/display`` names"""
    root = Path(directory or settings.golden_dir)
    return sorted(str(p.relative_to(root).with_suffix("")) for p in root.rglob("*.txt"))


def canonical_roundtrip(name: str, directory: Optional[Path] = None) -> bool:
    """Whether every expression of a golden file re-parses from its canonical text to itself"""
    path = golden_path(name, directory)
    lines = _content_lines(path)
    if all("=" in line for line in lines):
        values = list(load_table(name, directory).values())
    else:
        values = [load_expression(name, directory)]
    ok = all(parse_expression(to_text(v)) == v for v in values)
    if not ok:
        logger.warning(f"Golden file {name} does not round-trip through canonical text")
    return ok

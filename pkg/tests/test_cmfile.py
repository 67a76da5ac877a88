import numpy as np
import pytest

from cvloc import states
from cvloc.cmfile import CONVENTION, format_cm, parse_cm, read_cm, write_cm
from cvloc.errors import CMParseError

HEADER = f"cv-cm v1 N=1 convention={CONVENTION}\n"


def test_round_trip_is_bit_exact(tmp_path, rng):
    g = states.random_physical_cm(3, rng)
    path = tmp_path / "g.cm"
    write_cm(path, g, ("A", "B", "C"))
    f = read_cm(path)
    assert np.array_equal(f.matrix, g)
    assert f.labels == ("A", "B", "C") and f.n_modes == 3


def test_comments_and_blank_lines():
    f = parse_cm("# leading comment\n\n" + HEADER + "# labels: X\n1 0\n\n# between rows\n0 1\n")
    np.testing.assert_array_equal(f.matrix, np.eye(2))
    assert f.labels == ("X",)


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("cv-cx v1 N=1 convention=" + CONVENTION + "\n1 0\n0 1\n", 1, 1),
        ("cv-cm v1 N=1 convention=xp-blocks\n1 0\n0 1\n", 1, 14),
        ("cv-cm v2 N=1 convention=" + CONVENTION + "\n1 0\n0 1\n", 1, 7),
        ("cv-cm v1 N=x convention=" + CONVENTION + "\n1 0\n0 1\n", 1, 10),
        (HEADER + "1 0\n0 abc\n", 3, 3),
        (HEADER + "1 0\n0 nan\n", 3, 3),
        (HEADER + "1 0 0\n0 1\n", 2, 5),
        (HEADER + "1 0\n", 3, 1),
        (HEADER + "1 0\n0 1\n1 1\n", 4, 1),
        (HEADER + "1 0.5\n0 1\n", 3, 1),
        ("", 1, 1),
    ],
)
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(CMParseError) as info:
        parse_cm(text)
    assert (info.value.line, info.value.column) == (line, col)
    assert f"{line}" in str(info.value)


def test_convention_mismatch_message():
    with pytest.raises(CMParseError, match="convention"):
        parse_cm("cv-cm v1 N=1 convention=xxpp-vacuum1/2\n1 0\n0 1\n")


def test_label_count_checked():
    with pytest.raises(CMParseError):
        parse_cm(HEADER + "# labels: A B\n1 0\n0 1\n")
    with pytest.raises(ValueError):
        format_cm(np.eye(2), ("A", "B"))

from fractions import Fraction

import pytest

from ribbonzeta.errors import GraphFormatError, NonPositiveLength, NotInvolution, UnstableType
from ribbonzeta.graphio import format_graph, parse_graph, read_graph
from ribbonzeta.ribbon import topological_type

THETA = """\
halfedges 6   # theta graph
twin: 0 3
twin: 1 4
twin: 2 5
vertex: 0 1 2
vertex: 3 4 5
length: 0 1/3
length: 1 1/3
length: 2 0.5
"""


def test_parse_theta():
    mg = parse_graph(THETA)
    assert topological_type(mg.graph) == (1, 1)
    assert mg.lengths == (Fraction(1, 3), Fraction(1, 3), Fraction(1, 2))
    assert mg.is_rational


def test_roundtrip():
    mg = parse_graph(THETA)
    assert parse_graph(format_graph(mg)) == mg


def test_integer_lengths_simplify():
    mg = parse_graph(THETA.replace("1/3", "2"))
    assert mg.lengths[0] == 2 and isinstance(mg.lengths[0], int)


@pytest.mark.parametrize(
    "text, err",
    [
        (THETA.replace("halfedges 6", ""), GraphFormatError),
        (THETA.replace("halfedges 6", "halfedges 8"), GraphFormatError),
        (THETA.replace("length: 2 0.5\n", ""), GraphFormatError),
        (THETA + "length: 3 1\n", GraphFormatError),
        (THETA.replace("0.5", "abc"), GraphFormatError),
        (THETA.replace("0.5", "-1"), NonPositiveLength),
        (THETA.replace("twin: 2 5", "twin: 2 4"), NotInvolution),
        (THETA + "bogus: 1\n", GraphFormatError),
        ("halfedges 2\ntwin: 0 1\nvertex: 0 1\nlength: 0 1\n", UnstableType),
    ],
)
def test_parse_errors(text, err):
    with pytest.raises(err):
        parse_graph(text)


def test_read_missing_file(tmp_path):
    with pytest.raises(GraphFormatError):
        read_graph(tmp_path / "nope.txt")

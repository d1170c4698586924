import math

import numpy as np
import pytest

from torus_localize.config import corpus_names, load_config, parse_config
from torus_localize.errors import ConfigParse, NotPositiveDefinite


def test_corpus_loads():
    names = corpus_names()
    assert {"q_sum2.toml", "hex.toml", "sqrt2.toml", "sqrt235.toml"} <= set(names)
    for n in names:
        cfg = load_config(n)
        # the stored dual basis reproduces the exact form
        assert np.allclose(cfg.B.T @ cfg.B, cfg.Q.matrix(), atol=1e-12)


def test_multiline_and_comments():
    cfg = parse_config("""
        # a sheared square lattice
        dim = 2
        basis = [[1, 1],   # first row
                 [0, 1]]
    """)
    assert cfg.source == "basis"
    # B = [[1, 0], [-1, 1]], so |Bk|^2 = k1^2 + (k2 - k1)^2
    assert [str(c) for c in cfg.Q.coeffs()] == ["2", "-2", "1"]


def test_dual_and_matrix_keys_agree():
    a = parse_config("field = quadirr(2)\nform = [sqrt(2), 0, 1]")
    b = parse_config("field = quadirr(2)\nmatrix = [[sqrt(2), 0], [0, 1]]")
    assert a.Q.S == b.Q.S
    c = parse_config("field = float\ndual = [[1.189207115002721, 0], [0, 1]]")
    assert c.Q.coeffs()[0] == pytest.approx(math.sqrt(2), rel=1e-14)


@pytest.mark.parametrize("text,line,col", [
    ("dim = 2\nform = [1, 0, 1", 2, 8),
    ("dim = 2\nfrom = [1, 0, 1]", 2, 1),
    ("dim = 3\nform = [1, 0, 1]", 1, 7),
    ("form = [1, , 1]", 1, None),
    ("form = [1, 0, sqrt(2)]", 1, 8),
])
def test_errors_carry_position(text, line, col):
    with pytest.raises(ConfigParse) as exc:
        parse_config(text)
    assert exc.value.line == line
    if col is not None:
        assert exc.value.column == col


def test_missing_shape_key():
    with pytest.raises(ConfigParse):
        parse_config("dim = 2\n")


def test_indefinite_form():
    with pytest.raises(NotPositiveDefinite):
        parse_config("form = [1, 3, 1]")


def test_missing_file():
    with pytest.raises(ConfigParse):
        load_config("/nonexistent/x.toml")

"""Key-value config files describing a lattice or a form.

::

    dim = 2
    field = quadirr(2)          # rational | float | quadirr(s1,...)
    form = [sqrt(2), 0, 1]      # q11, q12, q22 of Q/4pi^2
    # or: basis = [[...], ...]  the matrix A; lattice vectors are its columns
    # or: dual = [[...], ...]   the matrix B = (A^T)^-1, with Q(k) = 4pi^2 |B k|^2
    # or: matrix = [[...], ...] the symmetric matrix of Q/4pi^2
    eps_eq = 1e-12

Bracketed values may span several lines; ``#`` starts a comment.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigParse, TorusLocalizeError
from .lattice import FOUR_PI2, QuadraticForm, dual_basis, gram_form
from .scalars import ScalarField

SHAPE_KEYS = ("form", "basis", "dual", "matrix")
KNOWN_KEYS = ("dim", "field", "eps_eq", "name") + SHAPE_KEYS


@dataclass(frozen=True)
class FormConfig:
    d: int
    field: ScalarField
    Q: QuadraticForm
    B: np.ndarray
    source: str
    name: str | None = None

    def describe(self) -> dict:
        return {"dim": self.d, "field": self.field.describe(), "source": self.source,
                "name": self.name, "coeffs": [str(c) for c in self.Q.coeffs()]}


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def _raw_entries(text: str):
    """Yield ``(key, value_text, line, column_of_value)``; brackets may span lines."""
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = _strip_comment(lines[i])
        if not raw.strip():
            i += 1
            continue
        if "=" not in raw:
            col = len(raw) - len(raw.lstrip()) + 1
            raise ConfigParse("expected 'key = value'", i + 1, col)
        key_part, val = raw.split("=", 1)
        key = key_part.strip()
        if not key.replace("_", "").isalnum():
            raise ConfigParse(f"invalid key {key!r}", i + 1, len(key_part) - len(key_part.lstrip()) + 1)
        col = len(key_part) + 2 + (len(val) - len(val.lstrip()))
        start = i + 1
        depth = val.count("[") - val.count("]")
        while depth > 0:
            i += 1
            if i >= len(lines):
                raise ConfigParse(f"unterminated '[' in value of {key!r}", start, col)
            nxt = _strip_comment(lines[i])
            val += " " + nxt
            depth += nxt.count("[") - nxt.count("]")
        if depth < 0:
            raise ConfigParse(f"unbalanced ']' in value of {key!r}", i + 1, col)
        yield key, val.strip(), start, col
        i += 1


def _split_list(text: str, line: int, col: int):
    """Parse ``[a, b, [c, d]]`` into nested lists of entry strings."""
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ConfigParse("expected a bracketed list", line, col)
    pos = 0

    def parse_list():
        nonlocal pos
        assert text[pos] == "["
        pos += 1
        items = []
        cur = ""
        paren = 0
        while pos < len(text):
            ch = text[pos]
            if ch == "[" and paren == 0:
                if cur.strip():
                    raise ConfigParse("unexpected '['", line, col + pos)
                items.append(parse_list())
                cur = None
                continue
            if ch == "(":
                paren += 1
            elif ch == ")":
                paren -= 1
            if ch == "," and paren == 0:
                if cur is not None:
                    if not cur.strip():
                        raise ConfigParse("empty list entry", line, col + pos)
                    items.append(cur.strip())
                cur = ""
            elif ch == "]" and paren == 0:
                pos += 1
                if cur is not None and cur.strip():
                    items.append(cur.strip())
                return items
            elif cur is not None:
                cur += ch
            elif not ch.isspace():
                raise ConfigParse(f"unexpected {ch!r} after a nested list", line, col + pos)
            pos += 1
        raise ConfigParse("unterminated list", line, col)

    out = parse_list()
    if text[pos:].strip():
        raise ConfigParse("trailing text after list", line, col + pos)
    return out


def parse_config(text: str, name: str | None = None) -> FormConfig:
    entries = {}
    where = {}
    for key, val, line, col in _raw_entries(text):
        if key not in KNOWN_KEYS:
            raise ConfigParse(f"unknown key {key!r}", line, 1)
        if key in entries:
            raise ConfigParse(f"duplicate key {key!r}", line, 1)
        entries[key] = val
        where[key] = (line, col)
    shapes = [k for k in SHAPE_KEYS if k in entries]
    if len(shapes) != 1:
        raise ConfigParse("exactly one of form, basis, dual, matrix is required")
    shape = shapes[0]
    try:
        eps = float(entries.get("eps_eq", "1e-12"))
    except ValueError:
        raise ConfigParse("eps_eq must be a number", *where["eps_eq"]) from None
    try:
        field = ScalarField.from_spec(entries.get("field", "rational"), eps)
    except TorusLocalizeError as exc:
        raise ConfigParse(str(exc), *where.get("field", (None, None))) from None
    line, col = where[shape]
    data = _split_list(entries[shape], line, col)

    def parse_entry(s):
        try:
            return field.parse(s)
        except ConfigParse as exc:
            raise ConfigParse(str(exc).split(" (column")[0], line, col) from None
        except TorusLocalizeError as exc:
            raise ConfigParse(str(exc), line, col) from None

    if shape == "form":
        if any(isinstance(v, list) for v in data):
            raise ConfigParse("form expects a flat coefficient list", line, col)
        d = {3: 2, 6: 3, 10: 4}.get(len(data))
        if d is None:
            raise ConfigParse(f"form needs 3, 6 or 10 coefficients, got {len(data)}", line, col)
        vals = [parse_entry(s) for s in data]
    else:
        if not data or not all(isinstance(r, list) for r in data):
            raise ConfigParse(f"{shape} expects a list of rows", line, col)
        d = len(data)
        if any(len(r) != d for r in data):
            raise ConfigParse(f"{shape} must be square", line, col)
        vals = [[parse_entry(s) for s in row] for row in data]
    if "dim" in entries:
        try:
            dim = int(entries["dim"])
        except ValueError:
            raise ConfigParse("dim must be an integer", *where["dim"]) from None
        if dim != d:
            raise ConfigParse(f"dim = {dim} does not match the {shape} size {d}", *where["dim"])
    if not 2 <= d <= 4:
        raise ConfigParse("only 2 <= dim <= 4 is supported", line, col)
    try:
        if shape == "form":
            Q = QuadraticForm.from_coeffs(d, vals, field, FOUR_PI2)
        elif shape == "matrix":
            Q = QuadraticForm(tuple(map(tuple, vals)), field, FOUR_PI2)
        elif shape == "dual":
            Q = gram_form(vals, field)
        else:
            Q = gram_form(dual_basis(vals, field), field)
    except TorusLocalizeError:
        raise
    except ValueError as exc:
        raise ConfigParse(str(exc), line, col) from None
    return FormConfig(d, field, Q, Q.dual_matrix(), shape, entries.get("name", name))


def corpus_names() -> list[str]:
    files = resources.files("torus_localize") / "data"
    return sorted(p.name for p in files.iterdir() if p.name.endswith(".toml"))


def read_corpus(name: str) -> str:
    return (resources.files("torus_localize") / "data" / name).read_text()


def load_config(path) -> FormConfig:
    """Read a config file; bare names fall back to the shipped corpus."""
    p = Path(path)
    if p.exists():
        return parse_config(p.read_text(), p.name)
    if p.name in corpus_names() and len(p.parts) == 1:
        return parse_config(read_corpus(p.name), p.name)
    raise ConfigParse(f"config file {path} not found")

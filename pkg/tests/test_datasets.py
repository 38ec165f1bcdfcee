import math

import pytest
from hypothesis import given, settings, strategies as st

from qrev.datasets import (
    INFEASIBLE,
    Dataset,
    format_cell,
    from_csv,
    from_json,
    parse_cell,
    read_dataset,
    to_csv,
    to_json,
    write_dataset,
)

# strings that would read back as another type are not representable as text cells
plain_text = st.text(st.characters(blacklist_categories=("Cc", "Cs")), max_size=12).filter(lambda s: isinstance(parse_cell(s), str))
cells = st.one_of(
    st.floats(allow_nan=True, allow_infinity=True),
    st.integers(-10**12, 10**12),
    st.booleans(),
    plain_text,
)


def same(a, b):
    if isinstance(a, float) and math.isnan(a):
        return isinstance(b, float) and math.isnan(b)
    return type(a) is type(b) and a == b


@st.composite
def datasets(draw):
    n_cols = draw(st.integers(1, 4))
    cols = draw(st.lists(st.text("abcdefgh_", min_size=1, max_size=6), min_size=n_cols,
                         max_size=n_cols, unique=True))
    rows = draw(st.lists(st.lists(cells, min_size=n_cols, max_size=n_cols), max_size=6))
    return Dataset("demo", cols, rows)


@settings(max_examples=200, deadline=None)
@given(ds=datasets())
def test_csv_round_trip(ds):
    back = from_csv(to_csv(ds), "demo")
    assert back.columns == ds.columns
    for r0, r1 in zip(ds.rows, back.rows, strict=True):
        assert all(same(a, b) for a, b in zip(r0, r1))


@settings(max_examples=200, deadline=None)
@given(ds=datasets())
def test_json_round_trip(ds):
    ds = Dataset(ds.name, ds.columns,
                 [[c for c in row] for row in ds.rows
                  if not any(isinstance(c, str) and c in ("inf", "-inf", "nan") for c in row)])
    back = from_json(to_json(ds))
    assert back.name == ds.name and back.columns == ds.columns
    for r0, r1 in zip(ds.rows, back.rows, strict=True):
        assert all(same(a, b) for a, b in zip(r0, r1))


def test_format_cell_examples():
    assert format_cell(1.0) == "1.0"
    assert format_cell(0.1) == "0.10000000000000001"
    assert format_cell(1e300) == "1.0000000000000001e+300"
    assert format_cell(True) == "true"
    assert format_cell(float("inf")) == "inf"
    assert format_cell(INFEASIBLE) == "infeasible"
    with pytest.raises(TypeError):
        format_cell(None)
    with pytest.raises(ValueError):
        format_cell("a\rb")


def test_rows_must_match_columns():
    with pytest.raises(ValueError):
        Dataset("x", ["a", "b"], [[1.0]])


def test_write_and_read(tmp_path):
    ds = Dataset("tab", ["a", "flag"], [[0.5, True], [INFEASIBLE, False]])
    for fmt in ("csv", "json"):
        path = write_dataset(ds, tmp_path, fmt)
        assert path.name == f"tab.{fmt}"
        assert b"\r" not in path.read_bytes()
        assert read_dataset(path) == ds
    with pytest.raises(ValueError):
        write_dataset(ds, tmp_path, "xml")

from dataclasses import replace

import pytest

from illumination.errors import ParameterError
from illumination.io_utils import rows_to_csv
from illumination.sweeps import (
    SWEEP_COLUMNS,
    FigureSpec,
    SweepConfig,
    chernoff_row,
    figure_rows,
    parse_grid,
    run_sweep,
)


@pytest.mark.parametrize("value, expected", [
    ("0,0.5", (0.0, 0.5)),
    ("0:1:3", (0.0, 0.5, 1.0)),
    (" 2 ", (2.0,)),
    (0.25, (0.25,)),
    ([1, 2], (1.0, 2.0)),
])
def test_parse_grid(value, expected):
    assert parse_grid(value) == pytest.approx(expected)


@pytest.mark.parametrize("value", ["", "0:1", "a,b", "0:1:0"])
def test_parse_grid_rejects(value):
    with pytest.raises(ParameterError):
        parse_grid(value)


def test_points_are_lexicographic():
    config = SweepConfig(probes=("coherent", "tmsv"), r="0,0.5", nbar="1,2")
    points = config.points()
    assert len(points) == 8
    assert points[0] == ("coherent", 0.0, 0.01, 1.0, 0.5)
    assert points[1] == ("coherent", 0.0, 0.01, 2.0, 0.5)
    assert points[2] == ("coherent", 0.5, 0.01, 1.0, 0.5)
    assert points[4][0] == "tmsv"


@pytest.mark.parametrize("overrides", [
    {"probes": ("squeezed",)},
    {"r": "0,1.5"},
    {"kappa": "-0.1"},
    {"nbar": "-1"},
    {"ns": "-1"},
    {"m": 0},
    {"fmt": "xml"},
    {"workers": 0},
])
def test_config_rejects(overrides):
    with pytest.raises(ParameterError):
        SweepConfig(**overrides)


def test_from_mapping_overrides_and_unknown_keys():
    config = SweepConfig.from_mapping({"r": [0.0, 0.1], "m": 3}, m=None, r="0.2")
    assert config.r == (0.2,)
    assert config.m == 3
    with pytest.raises(ParameterError):
        SweepConfig.from_mapping({"radius": 1.0})


def test_single_point_sweep_matches_row():
    rows = run_sweep(SweepConfig(r=0.3, nbar=2.0, m=4))
    assert rows == [chernoff_row(("coherent", 0.3, 0.01, 2.0, 0.5), 4)]
    assert rows[0]["half_q_M"] == pytest.approx(0.5 * rows[0]["q"] ** 4)


def test_parallel_sweep_is_deterministic():
    config = SweepConfig(probes=("coherent", "tmsv"), r="0:0.6:3", nbar="1,5")
    serial = rows_to_csv(SWEEP_COLUMNS, run_sweep(config))
    parallel = rows_to_csv(SWEEP_COLUMNS, run_sweep(replace(config, workers=2)))
    assert serial == parallel


# --- Figures ---

def test_figure_defaults_and_overrides():
    spec = FigureSpec.defaults("fig3a")
    assert spec.m == 10
    assert len(spec.r) == 21
    assert FigureSpec.defaults("fig3a", m=None).m == 10
    assert FigureSpec.defaults("fig2", kappa=0.05).kappa == 0.05
    with pytest.raises(ParameterError):
        FigureSpec.defaults("fig9")


def test_fig3a_rows():
    rows = figure_rows(FigureSpec.defaults("fig3a"))
    assert len(rows) == 42
    assert set(rows[0]) == {"r", "nbar", "half_delta_10"}


def test_fig2_half_q_falls_with_absorption():
    spec = FigureSpec.defaults("fig2")
    rows = figure_rows(spec)
    assert len(rows) == 40
    for probe in ("coherent", "tmsv"):
        for nbar in spec.nbar:
            curve = [row["half_q"] for row in rows if row["probe"] == probe and row["nbar"] == nbar]
            assert all(b < a for a, b in zip(curve, curve[1:]))


def test_fig3c_brighter_background_helps():
    spec = FigureSpec.defaults("fig3c")
    rows = figure_rows(spec)
    assert len(rows) == 2 * 2 * spec.log10_m[2]
    for probe in ("coherent", "tmsv"):
        dim = [row["log10_half_qM"] for row in rows if row["probe"] == probe and row["nbar"] == 1.0]
        bright = [row["log10_half_qM"] for row in rows if row["probe"] == probe and row["nbar"] == 5.0]
        assert all(b < d for d, b in zip(dim, bright))


def test_metadata_notes_copy_range():
    meta = FigureSpec.defaults("fig3b").metadata()
    assert meta["log10_m"] == [0.0, 4.0, 41]
    assert "note" in meta
    assert "note" not in FigureSpec.defaults("fig2").metadata()
    assert FigureSpec.defaults("fig3a").metadata()["m"] == 10


def test_copy_count_rows_carry_r():
    spec = FigureSpec.defaults("fig3c", r="0.1,0.3", nbar="1")
    rows = figure_rows(spec)
    assert len(rows) == 2 * 2 * spec.log10_m[2]
    assert {row["r"] for row in rows} == {0.1, 0.3}
    first = [row["log10_half_qM"] for row in rows if row["probe"] == "tmsv" and row["r"] == 0.1]
    assert len(first) == spec.log10_m[2]

import csv

import pytest

from color_rl.asl.loops import METRIC_COLUMNS
from color_rl.metrics import MetricsWriter


def test_header_and_rows(tmp_path):
    path = tmp_path / "metrics.csv"
    with MetricsWriter(path, METRIC_COLUMNS) as w:
        w.write_row({"wall_time_s": 0.5, "T_step": 16, "B_step": 0,
                     "buffer_size": 16, "epsilon_min_active": 0.01})
        w.write_row({"wall_time_s": 1.5, "T_step": 48, "B_step": 10,
                     "measured_TPS": 53.3, "buffer_size": 48,
                     "recent_arrival_rate": None})
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == METRIC_COLUMNS
    assert rows[1][1] == "16"
    assert rows[2][3] == "53.3"
    assert rows[2][7] == ""  # None -> empty cell


def test_flushed_per_row(tmp_path):
    path = tmp_path / "metrics.csv"
    w = MetricsWriter(path, ("a", "b"))
    w.write_row({"a": 1, "b": 2})
    # visible to a second reader before close
    rows = list(csv.reader(path.open()))
    assert rows == [["a", "b"], ["1", "2"]]
    w.close()


def test_unknown_column_rejected(tmp_path):
    with MetricsWriter(tmp_path / "m.csv", ("a",)) as w:
        with pytest.raises(ValueError):
            w.write_row({"zzz": 1})


def test_monotone_columns_in_practice(tmp_path):
    path = tmp_path / "metrics.csv"
    with MetricsWriter(path, METRIC_COLUMNS) as w:
        for t in range(5):
            w.write_row({"wall_time_s": t * 0.5, "T_step": t * 16, "B_step": t * 4,
                         "buffer_size": t * 16})
    rows = list(csv.DictReader(path.open()))
    t_steps = [int(r["T_step"]) for r in rows]
    b_steps = [int(r["B_step"]) for r in rows]
    assert t_steps == sorted(t_steps)
    assert b_steps == sorted(b_steps)

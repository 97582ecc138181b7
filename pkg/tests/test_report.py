import numpy as np
import pytest

from towbandit.env import RewardDistribution
from towbandit.harness import AggregateCurve, AlgorithmSpec, ExperimentConfig, compare, run_single
from towbandit.plotting import render_curves, render_sweep
from towbandit.report import (CURVE_HEADER, emit_csv, emit_plot_script, emit_sweep_csv, emit_voltage_csv,
                              read_curve_csv)

MACHINES = (RewardDistribution.gaussian(0.5, 0.2), RewardDistribution.gaussian(0.6, 0.2))


def curve(n=5):
    cum = np.cumsum(np.linspace(0.51, 0.59, n)) / 3.0
    return AggregateCurve(cum, np.arange(n) / 7.0, samples=3, label="x")


def test_curve_header_and_rows(tmp_path):
    path = emit_csv(curve(), tmp_path / "c.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "play,mean_cumulative_reward,mean_n_b"
    assert len(lines) == 6
    assert lines[1].startswith("1,")


def test_round_trip(tmp_path):
    c = curve(1000)
    back = read_curve_csv(emit_csv(c, tmp_path / "c.csv"))
    # 12 significant digits are written
    assert np.allclose(back.mean_cumulative_reward, c.mean_cumulative_reward, rtol=5e-12, atol=1e-12)
    assert np.allclose(back.mean_n_b, c.mean_n_b, rtol=5e-12, atol=1e-12)
    rounded = np.array([float(format(v, ".12g")) for v in c.mean_cumulative_reward])
    assert np.array_equal(back.mean_cumulative_reward, rounded)


def test_empty_curve_is_header_only(tmp_path):
    empty = AggregateCurve(np.array([]), np.array([]), samples=0)
    path = emit_csv(empty, tmp_path / "e.csv")
    assert path.read_text() == ",".join(CURVE_HEADER) + "\n"


def test_identical_inputs_identical_bytes(tmp_path):
    a = emit_csv(curve(), tmp_path / "a.csv").read_bytes()
    b = emit_csv(curve(), tmp_path / "b.csv").read_bytes()
    assert a == b


def test_trace_and_voltage_schema(tmp_path):
    config = ExperimentConfig(MACHINES, AlgorithmSpec("asdm", k=0.55), plays=10, samples=1)
    trace = run_single(config, 0)
    lines = emit_csv(trace, tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,machine,reward,cum_reward,n_a,n_b,x_a"
    assert len(lines) == 11
    volts = emit_voltage_csv(trace, tmp_path / "v.csv").read_text().splitlines()
    assert volts[0] == "t,machine,reward,delta_v,voltage"
    t, machine, reward, dv, v = volts[1].split(",")
    assert float(dv) == pytest.approx(float(reward) - 0.55, abs=1e-11)
    assert float(v) == pytest.approx(-(1.0 + float(dv)), abs=1e-11)


def test_comparison_table(tmp_path):
    configs = [ExperimentConfig(MACHINES, a, plays=20, samples=4)
               for a in (AlgorithmSpec("asdm", k=0.55), AlgorithmSpec("softmax", tau=0.3))]
    lines = emit_csv(compare(configs, workers=1), tmp_path / "cmp.csv").read_text().splitlines()
    assert lines[0] == "play,asdm,softmax"
    assert len(lines) == 21


def test_unknown_type_rejected(tmp_path):
    with pytest.raises(TypeError):
        emit_csv([1, 2, 3], tmp_path / "x.csv")


def test_write_failure_names_the_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        emit_csv(curve(), blocker / "c.csv")


@pytest.mark.parametrize("paths", [["a.csv"], ["a.csv", "b.csv"]])
def test_plot_script_series(tmp_path, paths):
    text = emit_plot_script(paths, tmp_path / "p.gp").read_text()
    assert text.count("with lines") == len(paths)
    for p in paths:
        assert f"'{p}' using 1:2" in text
    assert str(tmp_path) not in text


def test_sweep_csv(tmp_path):
    lines = emit_sweep_csv([(0.55, curve()), (0.75, curve())], tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "value,mean_cumulative_reward,mean_n_b"
    assert lines[1].startswith("0.55,")


def test_figures_are_written(tmp_path):
    png = render_curves([curve(50)], tmp_path / "c.png", optimum=0.6)
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    png2 = render_sweep([(0.5, curve()), (0.6, curve())], "k", tmp_path / "s.png")
    assert png2.stat().st_size > 0

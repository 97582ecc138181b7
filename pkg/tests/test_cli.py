import json
import subprocess
import sys

import pytest

from towbandit.cli import main

MACHINES = [{"kind": "gaussian", "mu": 0.5, "sigma": 0.2}, {"kind": "gaussian", "mu": 0.6, "sigma": 0.2}]


def write_config(tmp_path, name="c.json", **extra):
    data = {"machines": MACHINES, "algorithm": {"name": "asdm", "k": 0.55},
            "plays": 50, "samples": 8, "master_seed": 1, "outputs": ["curve"]}
    data.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_run_writes_requested_outputs(tmp_path, capsys):
    config = write_config(tmp_path, outputs=["curve", "trace", "voltage", "plot_script", "figure"])
    out = tmp_path / "out"
    assert main(["run", "--config", config, "--out", str(out), "--workers", "1"]) == 0
    for name in ("curve.csv", "trace.csv", "voltage.csv", "plot.gp", "curve.png"):
        assert (out / name).exists(), name
    assert "'curve.csv'" in (out / "plot.gp").read_text()
    assert "mean_cumulative_reward=" in capsys.readouterr().out


def test_overrides(tmp_path):
    config = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["run", "--config", config, "--out", str(out), "--plays", "7", "--samples", "2",
                 "--seed", "0xFFFFFFFFFFFFFFFF", "--workers", "1"]) == 0
    assert len((out / "curve.csv").read_text().splitlines()) == 8


def test_compare_is_byte_identical_across_invocations_and_workers(tmp_path):
    config = write_config(tmp_path, algorithms=[{"name": "asdm", "k": 0.55}, {"name": "softmax", "tau": 0.3}],
                          outputs=["curve", "plot_script"])
    data = json.loads(open(config).read())
    del data["algorithm"]
    open(config, "w").write(json.dumps(data))
    outs = []
    for i, workers in enumerate(("1", "1", "3")):
        out = tmp_path / f"out{i}"
        assert main(["compare", "--config", config, "--out", str(out), "--workers", workers]) == 0
        outs.append(out)
    for name in ("comparison.csv", "curve_asdm.csv", "curve_softmax.csv", "plot.gp"):
        blobs = {(o / name).read_bytes() for o in outs}
        assert len(blobs) == 1, name


def test_compare_with_repeated_config_flags(tmp_path):
    a = write_config(tmp_path, "a.json")
    b = write_config(tmp_path, "b.json", algorithm={"name": "cheater"})
    out = tmp_path / "out"
    assert main(["compare", "--config", a, "--config", b, "--out", str(out), "--workers", "1"]) == 0
    assert (out / "comparison.csv").read_text().splitlines()[0] == "play,asdm,cheater"


def test_bounds_from_flags(capsys):
    assert main(["bounds", "--mu-a", "0.6", "--mu-b", "0.5", "--sigma-a", "0.2", "--plays", "1"]) == 0
    text = capsys.readouterr().out
    assert "tow_bound_n_b=0.5\n" in text
    assert "tow_bound_n_b_limit=16.5\n" in text
    assert "cheater_bound_n_b_limit=8.5\n" in text


def test_bounds_from_config(tmp_path, capsys):
    config = write_config(tmp_path)
    out = tmp_path / "b"
    assert main(["bounds", "--config", config, "--out", str(out)]) == 0
    text = (out / "bounds.txt").read_text()
    # machines are reordered so that A is the better one
    assert "mu_a=0.6\n" in text and "mu_b=0.5\n" in text
    assert text == capsys.readouterr().out


def test_sweep(tmp_path):
    config = write_config(tmp_path, outputs=["curve", "figure"])
    out = tmp_path / "s"
    assert main(["sweep", "--config", config, "--param", "k", "--values", "0.5,0.55,0.6",
                 "--out", str(out), "--workers", "1"]) == 0
    assert len((out / "sweep.csv").read_text().splitlines()) == 4
    assert (out / "sweep.png").exists()


@pytest.mark.parametrize("argv_extra, data", [
    ([], {"plays": 0}),
    ([], {"algorithm": {"name": "softmax", "tau": -1}}),
    ([], {"algorithm": {"name": "asdm", "k": 0.55, "bogus": 1}}),
    ([], {"machines": [{"kind": "gaussian", "mu": 0.5, "sigma": -1}, MACHINES[1]]}),
])
def test_config_errors_exit_2(tmp_path, argv_extra, data, capsys):
    config = write_config(tmp_path, **data)
    assert main(["run", "--config", config, "--out", str(tmp_path / "o")] + argv_extra) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert main(["run", "--out", str(tmp_path)]) == 2
    assert main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2
    assert main(["bounds", "--mu-a", "0.5"]) == 2


def test_runtime_error_exit_1(tmp_path):
    config = write_config(tmp_path)
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["run", "--config", config, "--out", str(blocker / "x"), "--workers", "1"]) == 1


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "towbandit", "bounds", "--mu-a", "0.6", "--mu-b", "0.5",
                           "--sigma-a", "0.2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "phi_t=0.25" in proc.stdout

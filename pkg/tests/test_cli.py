import csv
import json
import subprocess
import sys

import pytest

from grank.catalog import dump_catalog, fixture_path
from grank.cli import main, read_config_file

SMALL = ["--n_nodes", "8", "--total_ticks", "300", "--bootstrap_tick", "100",
         "--attack_tick", "200"]


def test_validate_fixture(capsys):
    assert main(["validate", str(fixture_path())]) == 0
    assert "256 items, 39 tags" in capsys.readouterr().out


def test_validate_empty_file(tmp_path, capsys):
    p = tmp_path / "empty.psv"
    p.write_text("")
    assert main(["validate", str(p)]) == 3


def test_validate_untagged_row_is_named(tmp_path, capsys):
    p = tmp_path / "bad.psv"
    p.write_text("title|artist|album|tags\nA|B|C|x\nD|E|F|\n")
    assert main(["validate", str(p)]) == 3
    assert "row 3" in capsys.readouterr().err


def test_validate_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "nope.psv")]) == 3


def test_run_writes_manifest_and_outputs(tmp_path):
    assert main(["run", "--scenario", "targeted_sybil", "--F", "1", "--seed", "4", *SMALL,
                 "--out", str(tmp_path)]) == 0
    run = tmp_path / "targeted_sybil_F1_seed4"
    manifest = json.loads((run / "manifest.json").read_text())
    assert manifest["seed"] == 4 and manifest["config"]["F"] == 1.0
    for name in manifest["outputs"].values():
        assert (run / name).exists()
    rows = list(csv.DictReader((run / "snapshots.csv").open()))
    assert [int(r["tick"]) for r in rows] == [100, 200, 300]


def test_run_rerun_is_byte_identical(tmp_path):
    args = ["run", "--scenario", "inflation", *SMALL]
    main([*args, "--out", str(tmp_path / "a")])
    main([*args, "--out", str(tmp_path / "b")])
    name = "inflation_F0_seed0/snapshots.csv"
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_env_var_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("GRANK_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["run", "--n_nodes", "4", "--total_ticks", "100"]) == 0
    assert (tmp_path / "env" / "baseline_F0_seed0" / "manifest.json").exists()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text("scenario = inflation\nF = 1\nn_nodes = 6\ntotal_ticks = 200\n"
                   "bootstrap_tick = 50\nattack_tick = 150\n")
    assert read_config_file(cfg)["F"] == "1"
    assert main(["run", "--config", str(cfg), "--F", "0", "--out", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "inflation_F0_seed0" / "manifest.json").read_text())
    assert manifest["config"]["n_nodes"] == 6 and manifest["config"]["F"] == 0.0

    js = tmp_path / "exp.json"
    js.write_text(json.dumps({"scenario": "baseline", "n_nodes": 5, "total_ticks": 100}))
    assert main(["run", "--config", str(js), "--out", str(tmp_path)]) == 0


@pytest.mark.parametrize("argv", [
    ["run", "--scenario", "nope"],
    ["run", "--scenario", "baseline", "--adversary_count", "3"],
    ["run", "--seed", "abc"],
    ["run", "--config", "/does/not/exist.ini"],
])
def test_config_errors_exit_2(argv, tmp_path):
    assert main([*argv, "--out", str(tmp_path)]) == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "x.json"
    cfg.write_text('{"colour": "red"}')
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_bad_catalog_exit_3(tmp_path):
    bad = tmp_path / "bad.psv"
    bad.write_text("nonsense\n")
    assert main(["run", "--catalog", str(bad), "--out", str(tmp_path)]) == 3


def test_custom_catalog(tmp_path, fixture_catalog):
    cat = tmp_path / "cat.json"
    dump_catalog(fixture_catalog, cat)
    assert main(["run", "--catalog", str(cat), "--n_nodes", "4", "--total_ticks", "100",
                 "--out", str(tmp_path)]) == 0


def test_sweep_product_and_index(tmp_path):
    argv = ["sweep", "--scenarios", "targeted_sybil", "inflation", "--F-values", "0,1",
            "--seeds", "2", *SMALL, "--out", str(tmp_path)]
    assert main(argv) == 0
    index = json.loads((tmp_path / "index.json").read_text())
    assert len(index["runs"]) == 4 and all(r["status"] == "ok" for r in index["runs"])
    first = (tmp_path / "index.json").read_text()
    assert main(argv) == 0
    assert (tmp_path / "index.json").read_text() == first


def test_sweep_records_failures(tmp_path):
    argv = ["sweep", "--scenarios", "baseline", "inflation", "--F-values", "0", "--seeds", "1",
            *SMALL, "--adversary_count", "1", "--out", str(tmp_path)]
    assert main(argv) == 4
    runs = json.loads((tmp_path / "index.json").read_text())["runs"]
    assert [r["status"] for r in runs] == ["failed", "ok"]
    assert "adversaries" in runs[0]["error"]


def test_sweep_empty_seed_list(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--scenarios", "baseline", "--F-values", "0", "--seeds"])
    assert exc.value.code == 2
    assert main(["sweep", "--scenarios", "baseline", "--F-values", "0", "--seeds", ",",
                 "--out", str(tmp_path)]) == 2


def test_export_plots(tmp_path):
    main(["sweep", "--scenarios", "baseline", "--F-values", "0", "1", "--seeds", "0",
          "--n_nodes", "6", "--total_ticks", "200", "--out", str(tmp_path)])
    main(["run", "--scenario", "push_vs_pull", *SMALL, "--out", str(tmp_path / "pp")])
    out = tmp_path / "plots.csv"
    assert main(["export-plots", str(tmp_path / "index.json"),
                 str(tmp_path / "pp" / "push_vs_pull_F0_seed0" / "manifest.json"),
                 "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    figs = {r["figure"] for r in rows}
    assert {"fig3", "fig4", "fig5", "fig7", "fig8", "fig9"} <= figs
    fig3 = [r for r in rows if r["figure"] == "fig3"]
    assert len(fig3) == 2 * 2 * 6   # runs x snapshots x nodes
    assert {r["series"] for r in rows if r["figure"] == "fig8"} >= {"ambient", "house"}


def test_export_plots_missing_files(tmp_path):
    assert main(["export-plots", str(tmp_path / "nothing.json")]) == 3
    main(["run", "--n_nodes", "4", "--total_ticks", "100", "--out", str(tmp_path)])
    run = tmp_path / "baseline_F0_seed0"
    (run / "snapshots.csv").unlink()
    assert main(["export-plots", str(run / "manifest.json")]) == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "grank", "validate", str(fixture_path())],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "256 items" in proc.stdout

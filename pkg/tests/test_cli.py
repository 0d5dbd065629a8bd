"""Command-line surface: exit codes, file outputs, determinism.

Everything runs in-process through ``cli.main`` so coverage tools see it
and no subprocess startup cost is paid.  Exit-code contract:

* 0 — ran and all checks passed;
* 1 — ran but a check failed or an iteration did not converge;
* 2 — the configuration itself was rejected.
"""

import json

import pytest

from branchwalk import cli

GOOD_EIG_TOML = """\
[scenario]
name = "mini-golden"
description = "golden-mean shift, flat weights"

[system]
family = "subshift"
transition = [[1, 1], [1, 0]]

[weight]
kind = "symbols"
values = ["1", "1"]

[delta]
mode = "subshift-perron"
rescale = true

[measure]
kind = "perron-cylinders"
depth = 4

[tests]
family = "cylinders"
max_depth = 2

[run]
depths = [0, 1, 2]
tolerance = 0.0
seed = 3
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(args):
    return cli.main([str(a) for a in args])


# ---------------------------------------------------------------------------
# verify


def test_verify_bundled_scenario_passes(tmp_path, capsys):
    code = run(["verify", "golden-mean", "--out", tmp_path])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] is True
    assert report["scenario"] == "golden-mean"
    assert report["max_discrepancy"] == 0.0
    assert {c["check"] for c in report["checks"]} == {
        "fixed-point-property", "duality", "pushforward",
        "disintegration", "quasi-invariance", "transfer-oracle"}
    out = capsys.readouterr().out
    assert out.count("pass") >= 6


def test_verify_writes_manifest_with_checksums(tmp_path):
    run(["verify", "golden-mean", "--out", tmp_path])
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["tool"] == "branchwalk"
    assert manifest["generator"] == "splitmix64-counter/v1"
    assert "report.json" in manifest["outputs"]
    digest = manifest["outputs"]["report.json"]
    import hashlib
    actual = hashlib.sha256((tmp_path / "report.json").read_bytes())
    assert digest == "sha256:" + actual.hexdigest()


def test_verify_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["verify", "2-shift-weighted", "--out", a])
    run(["verify", "2-shift-weighted", "--out", b])
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "manifest.json").read_bytes() == \
        (b / "manifest.json").read_bytes()


def test_verify_accepts_a_scenario_file(tmp_path):
    path = write(tmp_path, "mini.toml", GOOD_EIG_TOML)
    assert run(["verify", path, "--out", tmp_path / "o"]) == 0


def test_verify_accepts_json_scenarios(tmp_path):
    from branchwalk import load_scenario
    cfg = load_scenario("golden-mean")
    path = write(tmp_path, "g.json", json.dumps(cfg.as_dict()))
    assert run(["verify", path, "--out", tmp_path / "o"]) == 0


# ---------------------------------------------------------------------------
# configuration rejection (exit 2)


def test_unrescaled_eigenvalue_is_refused(tmp_path, capsys):
    bad = GOOD_EIG_TOML.replace("rescale = true", "rescale = false")
    path = write(tmp_path, "bad.toml", bad)
    assert run(["verify", path, "--out", tmp_path / "o"]) == 2
    err = capsys.readouterr().err
    assert "rescale" in err


def test_negative_weight_is_refused(tmp_path, capsys):
    bad = GOOD_EIG_TOML.replace('family = "subshift"', 'family = "circle"') \
        .replace("transition = [[1, 1], [1, 0]]", "degree = 2") \
        .replace('kind = "symbols"', 'kind = "trig"') \
        .replace('values = ["1", "1"]', "cos = [1.0, 0.0]\nsin = [0.0, 1.5]") \
        .replace('mode = "subshift-perron"\nrescale = true',
                 'mode = "strongly-invariant"') \
        .replace('kind = "perron-cylinders"\ndepth = 4',
                 'kind = "lebesgue-grid"\nsize = 256') \
        .replace('family = "cylinders"\nmax_depth = 2',
                 'family = "trig-modes"\nmax_frequency = 2')
    path = write(tmp_path, "neg.toml", bad)
    assert run(["verify", path, "--out", tmp_path / "o"]) == 2
    assert "< 0 at" in capsys.readouterr().err


def test_unknown_field_is_refused(tmp_path, capsys):
    path = write(tmp_path, "uf.toml",
                 GOOD_EIG_TOML + "\n[system]\ngamma = 2\n")
    # duplicate section is a parse error too; either way the config loses
    assert run(["verify", path, "--out", tmp_path / "o"]) == 2


def test_unknown_field_message_names_the_path(tmp_path, capsys):
    text = GOOD_EIG_TOML.replace("family = \"subshift\"",
                                 "family = \"subshift\"\ngamma = 2")
    path = write(tmp_path, "uf2.toml", text)
    assert run(["verify", path, "--out", tmp_path / "o"]) == 2
    assert "system.gamma" in capsys.readouterr().err


def test_out_of_range_seed_is_refused(tmp_path):
    assert run(["verify", "golden-mean", "--seed", "-1",
                "--out", tmp_path]) == 2


# ---------------------------------------------------------------------------
# sample-paths


def test_sample_paths_csv_layout(tmp_path):
    code = run(["sample-paths", "2-shift-weighted",
                "--x0", "000000", "--depth", "3", "--count", "50",
                "--seed", "11", "--out", tmp_path])
    assert code == 0
    lines = (tmp_path / "paths.csv").read_text().splitlines()
    assert lines[0] == "kind,seed,index,labels,points"
    path_rows = [l for l in lines if l.startswith("path,")]
    freq_rows = [l for l in lines if l.startswith("freq1,")
                 or l.startswith("freq2,") or l.startswith("freq3,")]
    assert len(path_rows) == 50
    assert freq_rows, "summary rows missing"
    # every sampled label string is a 3-letter binary word
    for row in path_rows:
        labels = row.split(",")[3]
        assert len(labels) == 3 and set(labels) <= {"0", "1"}


def test_sample_paths_zero_count_is_header_only(tmp_path):
    run(["sample-paths", "2-shift-weighted", "--x0", "000000",
         "--depth", "2", "--count", "0", "--out", tmp_path])
    assert (tmp_path / "paths.csv").read_text().splitlines() == [
        "kind,seed,index,labels,points"]


def test_sample_paths_deterministic_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        run(["sample-paths", "haar-circle", "--x0", "0.3",
             "--depth", "4", "--count", "25", "--seed", "8", "--out", out])
    assert (a / "paths.csv").read_bytes() == (b / "paths.csv").read_bytes()


def test_sample_paths_rejects_foreign_symbols(tmp_path):
    code = run(["sample-paths", "2-shift-weighted",
                "--x0", "012", "--depth", "2", "--count", "1",
                "--out", tmp_path])
    assert code == 2


def test_sample_paths_from_a_single_symbol_grows_the_word(tmp_path):
    # backward moves prepend symbols, so a length-1 start is fine
    code = run(["sample-paths", "2-shift-weighted",
                "--x0", "0", "--depth", "3", "--count", "4",
                "--out", tmp_path])
    assert code == 0
    rows = [l for l in (tmp_path / "paths.csv").read_text().splitlines()
            if l.startswith("path,")]
    assert all(len(r.split(",")[4].split("|")[-1]) == 4 for r in rows)


# ---------------------------------------------------------------------------
# h-function


def test_h_function_flat_filter_converges(tmp_path):
    code = run(["h-function", "haar-circle", "--grid", "512",
                "--out", tmp_path])
    assert code == 0
    lines = (tmp_path / "h_function.csv").read_text().splitlines()
    assert lines[0] == "x,h"
    data = [l for l in lines if not l.startswith("#") and l != "x,h"]
    assert len(data) == 512
    comments = "\n".join(l for l in lines if l.startswith("#"))
    assert "# converged = true" in comments
    # flat filter: h is identically one
    for row in data[:8]:
        assert abs(float(row.split(",")[1]) - 1.0) < 1e-10


def test_h_function_rejects_incompatible_grid(tmp_path):
    code = run(["h-function", "haar-circle", "--grid", "511",
                "--out", tmp_path])
    assert code == 2


# ---------------------------------------------------------------------------
# brolin


def test_brolin_outputs_raster_and_moments(tmp_path):
    code = run(["brolin", "--c", "0", "--samples", "2000", "--grid", "64",
                "--seed", "2026", "--out", tmp_path])
    assert code == 0
    head = (tmp_path / "brolin.pgm").read_bytes()[:2]
    assert head == b"P5"
    rows = (tmp_path / "moments.csv").read_text().splitlines()
    assert rows[0] == "name,value"
    moments = dict(r.split(",") for r in rows[1:])
    assert abs(float(moments["const"]) - 1.0) < 1e-12
    assert abs(float(moments["Re[z^1zb^1]"]) - 1.0) < 1e-9


def test_brolin_zero_samples_blank_raster(tmp_path):
    assert run(["brolin", "--c", "-1", "--samples", "0", "--grid", "16",
                "--out", tmp_path]) == 0


def test_brolin_far_parameter_is_refused(tmp_path):
    assert run(["brolin", "--c", "4.5", "--samples", "10",
                "--out", tmp_path]) == 2


# ---------------------------------------------------------------------------
# eigmeasure


def test_eigmeasure_exact_table(tmp_path):
    code = run(["eigmeasure", "golden-mean", "--out", tmp_path])
    assert code == 0
    text = (tmp_path / "eigmeasure.txt").read_text()
    assert "# eigenvalue_scaled = 1" in text
    assert "0.72360679774997894" in text
    assert "sqrt(5)" in text


def test_eigmeasure_requires_a_subshift(tmp_path):
    assert run(["eigmeasure", "haar-circle",
                "--out", tmp_path]) == 2


# ---------------------------------------------------------------------------
# global flags


def test_threads_flag_pins_blas_env(tmp_path, monkeypatch):
    import os
    monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
    run(["verify", "golden-mean", "--threads", "2",
         "--out", tmp_path])
    assert os.environ["OMP_NUM_THREADS"] == "2"


def test_deterministic_sum_flag_round_trips(tmp_path):
    from branchwalk import measures
    try:
        code = run(["verify", "golden-mean",
                    "--deterministic-sum", "--out", tmp_path])
        assert code == 0
        assert measures._DETERMINISTIC_SUMS is True
    finally:
        measures.set_deterministic_sums(False)

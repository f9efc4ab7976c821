"""End-to-end command tests driven through cli.run with argv lists."""

import json

import pytest

from streamtree import cli, restore
from streamtree.schema import load_schema


@pytest.fixture()
def stream(tmp_path):
    """A small synthetic stream on disk plus its schema path."""
    data = tmp_path / "s.csv"
    schema = tmp_path / "s.schema.json"
    rc = cli.run(["synth", "--preset", "threshold", "--rows", "3000",
                  "--seed", "7", "--out", str(data),
                  "--schema-out", str(schema)])
    assert rc == 0
    return str(data), str(schema)


def test_synth_writes_rows_and_schema(tmp_path):
    data = tmp_path / "x.csv"
    schema = tmp_path / "x.schema.json"
    rc = cli.run(["synth", "--preset", "xor", "--rows", "500", "--seed", "1",
                  "--out", str(data), "--schema-out", str(schema)])
    assert rc == 0
    assert len(data.read_text().splitlines()) == 500
    loaded = load_schema(str(schema))
    assert loaded.class_count == 2


def test_eval_reports_metrics(stream, capsys):
    data, schema = stream
    rc = cli.run(["eval", "--data", data, "--schema", schema])
    out = capsys.readouterr().out
    assert rc == 0
    assert "accuracy" in out
    assert "samples" in out


def test_eval_json_output(stream, capsys):
    data, schema = stream
    rc = cli.run(["eval", "--data", data, "--schema", schema, "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["command"] == "eval"
    assert doc["metrics"]["samples_seen"] == 3000
    assert 0.0 <= doc["metrics"]["accuracy"] <= 1.0


def test_eval_out_file(stream, tmp_path, capsys):
    data, schema = stream
    report = tmp_path / "report.json"
    rc = cli.run(["eval", "--data", data, "--schema", schema,
                  "--out", str(report)])
    capsys.readouterr()
    assert rc == 0
    doc = json.loads(report.read_text())
    assert doc["metrics"]["samples_seen"] == 3000


def test_eval_deterministic_json(stream, capsys):
    data, schema = stream
    cli.run(["eval", "--data", data, "--schema", schema, "--json"])
    a = json.loads(capsys.readouterr().out)
    cli.run(["eval", "--data", data, "--schema", schema, "--json"])
    b = json.loads(capsys.readouterr().out)
    a["metrics"].pop("wall_time")
    b["metrics"].pop("wall_time")
    assert a == b


def test_eval_snapshot_roundtrips(stream, tmp_path, capsys):
    data, schema = stream
    snap = tmp_path / "tree.snapshot"
    rc = cli.run(["eval", "--data", data, "--schema", schema,
                  "--snapshot", str(snap)])
    capsys.readouterr()
    assert rc == 0
    tree = restore(snap.read_bytes())
    assert tree.train_count == 3000


def test_missing_data_is_status_3(stream, tmp_path, capsys):
    _, schema = stream
    rc = cli.run(["eval", "--data", str(tmp_path / "nope.csv"),
                  "--schema", schema])
    err = capsys.readouterr().err
    assert rc == 3
    assert "not found" in err


def test_missing_schema_is_status_3(stream, tmp_path, capsys):
    data, _ = stream
    rc = cli.run(["eval", "--data", data,
                  "--schema", str(tmp_path / "nope.json")])
    capsys.readouterr()
    assert rc == 3


def test_bad_schema_is_status_4(stream, tmp_path, capsys):
    data, _ = stream
    bad = tmp_path / "bad.json"
    bad.write_text('{"attributes": []}')
    rc = cli.run(["eval", "--data", data, "--schema", str(bad)])
    capsys.readouterr()
    assert rc == 4


def test_malformed_row_is_status_4(stream, tmp_path, capsys):
    _, schema = stream
    bad = tmp_path / "bad.csv"
    bad.write_text("0.5,0.5,oops\n")
    rc = cli.run(["eval", "--data", str(bad), "--schema", schema])
    err = capsys.readouterr().err
    assert rc == 4
    assert "row 1" in err


def test_usage_error_is_status_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.run(["eval"])  # --data/--schema are required
    capsys.readouterr()
    assert exc.value.code == 2


def test_sweep_runs_each_count(stream, capsys):
    data, schema = stream
    rc = cli.run(["sweep", "--data", data, "--schema", schema,
                  "--quantiles", "2,8", "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert [r["quantiles"] for r in doc["rows"]] == [2, 8]
    for r in doc["rows"]:
        assert r["metrics"]["samples_seen"] == 3000


def test_sweep_rejects_bad_list(stream, capsys):
    data, schema = stream
    rc = cli.run(["sweep", "--data", data, "--schema", schema,
                  "--quantiles", "2,eight"])
    capsys.readouterr()
    assert rc == 1


def test_compare_reports_both_methods(stream, capsys):
    data, schema = stream
    rc = cli.run(["compare", "--data", data, "--schema", schema, "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    gap = doc["quantile"]["accuracy"] - doc["gaussian"]["accuracy"]
    assert doc["accuracy_gap"] == pytest.approx(gap)


def test_cdf_export_writes_series(stream, tmp_path, capsys):
    data, schema = stream
    series = tmp_path / "cdf.csv"
    rc = cli.run(["cdf-export", "--data", data, "--schema", schema,
                  "--attr", "0", "--limit", "1000", "--out", str(series),
                  "--json"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["samples"] == 1000
    assert set(doc["sup_errors"]) == {"quantile", "quantile_step", "gaussian"}
    lines = series.read_text().splitlines()
    assert lines[0] == "x,exact,quantile,quantile_step,gaussian"
    assert len(lines) == 1001


def test_cdf_export_attr_out_of_range(stream, capsys):
    data, schema = stream
    rc = cli.run(["cdf-export", "--data", data, "--schema", schema,
                  "--attr", "99"])
    capsys.readouterr()
    assert rc == 1


def test_encode_builds_coded_csv_and_schema(tmp_path, capsys):
    raw = tmp_path / "raw.csv"
    raw.write_text(
        "temp,sky,play\n"
        "21.5,sunny,yes\n"
        "18.0,rain,no\n"
        "25.2,sunny,yes\n"
        "15.5,cloudy,no\n"
    )
    coded = tmp_path / "coded.csv"
    schema_path = tmp_path / "coded.schema.json"
    mapping = tmp_path / "map.json"
    rc = cli.run(["encode", "--data", str(raw), "--out", str(coded),
                  "--schema-out", str(schema_path),
                  "--mapping-out", str(mapping), "--has-header"])
    capsys.readouterr()
    assert rc == 0

    schema = load_schema(str(schema_path))
    assert schema.attr_count == 2
    assert schema.attributes[0].kind == "numeric"
    assert schema.attributes[0].declared_min == 15.5
    assert schema.attributes[0].declared_max == 25.2
    assert schema.attributes[1].kind == "categorical"
    assert schema.attributes[1].cardinality == 3

    maps = json.loads(mapping.read_text())
    assert maps["labels"] == {"no": 0, "yes": 1}
    assert maps["columns"]["1"] == {"cloudy": 0, "rain": 1, "sunny": 2}

    rows = coded.read_text().splitlines()
    assert rows[0] == "21.5,2,1"
    assert rows[3] == "15.5,0,0"


def test_encode_detects_late_string_values(tmp_path, capsys):
    # column 0 looks numeric until row 3; the value seen before the flip
    # must still land in the code map
    raw = tmp_path / "raw.csv"
    raw.write_text("1,yes\n2,no\nlow,yes\n2,no\n1,yes\n2,no\n")
    coded = tmp_path / "coded.csv"
    schema_path = tmp_path / "s.json"
    rc = cli.run(["encode", "--data", str(raw), "--out", str(coded),
                  "--schema-out", str(schema_path)])
    capsys.readouterr()
    assert rc == 0
    schema = load_schema(str(schema_path))
    assert schema.attributes[0].kind == "categorical"
    assert schema.attributes[0].cardinality == 3  # "1", "2", "low"


def test_encode_forced_categorical_and_drop(tmp_path, capsys):
    raw = tmp_path / "raw.csv"
    raw.write_text("0,1.5,3,a\n1,2.5,4,b\n2,3.5,3,a\n")
    coded = tmp_path / "coded.csv"
    schema_path = tmp_path / "s.json"
    rc = cli.run(["encode", "--data", str(raw), "--out", str(coded),
                  "--schema-out", str(schema_path),
                  "--categorical", "2", "--drop", "0"])
    capsys.readouterr()
    assert rc == 0
    schema = load_schema(str(schema_path))
    assert schema.attr_count == 2
    assert schema.attributes[0].kind == "numeric"
    assert schema.attributes[1].kind == "categorical"
    assert schema.attributes[1].cardinality == 2  # codes for "3", "4"


def test_encoded_output_trains(tmp_path, capsys):
    raw = tmp_path / "raw.csv"
    lines = []
    for k in range(1500):
        x = (k % 100) / 100.0
        lines.append(f"{x},{'hot' if x > 0.5 else 'cold'}")
    raw.write_text("\n".join(lines) + "\n")
    coded = tmp_path / "coded.csv"
    schema_path = tmp_path / "s.json"
    assert cli.run(["encode", "--data", str(raw), "--out", str(coded),
                    "--schema-out", str(schema_path)]) == 0
    rc = cli.run(["eval", "--data", str(coded), "--schema", str(schema_path),
                  "--nmin", "50", "--json"])
    out = capsys.readouterr().out
    assert rc == 0
    doc = json.loads(out.splitlines()[-1])
    assert doc["metrics"]["accuracy"] > 0.8


def test_unknown_preset_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.run(["synth", "--preset", "nope", "--out", str(tmp_path / "x")])
    capsys.readouterr()
    assert exc.value.code == 2

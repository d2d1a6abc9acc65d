import hashlib
import json

import pytest

from schottky_lab.cli import EXIT_CONFIG, main, parse_config, read_resonances_csv
from schottky_lab.errors import ConfigError

GROUP_JSON = {
    "n": 1,
    "generators": [
        {"c_src": -2.0, "r_src": 1.0, "c_dst": 2.0, "r_dst": 1.0},
        {"c_src": -6.0, "r_src": 1.0, "c_dst": 6.0, "r_dst": 1.0},
    ],
    "euler_char": -1,
    "dk": [],
    "budgets": {"word_count": 10000000, "N_max": 14, "R_cut": 60},
}


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(GROUP_JSON))
    return path


def _digest(doc):
    return hashlib.sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


@pytest.mark.parametrize("mutate, field", [
    (lambda d: d["generators"][0].update(c_src="x"), "generators[0].c_src"),
    (lambda d: d["generators"][1].pop("r_dst"), "generators[1].r_dst"),
    (lambda d: d["generators"][0].update(r_src=-1.0), "generators[0].r_src"),
    (lambda d: d.update(n=2), "n"),
    (lambda d: d["budgets"].update(N_max=0), "budgets.N_max"),
    (lambda d: d["budgets"].update(walltime=3), "budgets.walltime"),
    (lambda d: d.update(euler_char=1.5), "euler_char"),
])
def test_invalid_field_named(mutate, field, tmp_path, capsys):
    doc = json.loads(json.dumps(GROUP_JSON))
    mutate(doc)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["delta", "--config", str(path)]) == EXIT_CONFIG
    assert f"'{field}'" in capsys.readouterr().err


def test_malformed_json_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 1, "generators": [')
    assert main(["delta", "--config", str(path)]) == EXIT_CONFIG
    assert "malformed JSON" in capsys.readouterr().err


def test_overlapping_disks_exit_code(tmp_path):
    doc = json.loads(json.dumps(GROUP_JSON))
    doc["generators"][1]["c_src"] = -2.5
    path = tmp_path / "overlap.json"
    path.write_text(json.dumps(doc))
    assert main(["delta", "--config", str(path)]) == EXIT_CONFIG


def test_digest_is_canonical():
    text = json.dumps(GROUP_JSON, indent=4)
    assert parse_config(text).digest == _digest(GROUP_JSON)
    with pytest.raises(ConfigError):
        parse_config("[]")


def test_delta_command(config_file, tmp_path, capsys):
    out = tmp_path / "delta.json"
    assert main(["delta", "--config", str(config_file), "--max-word-len", "8", "--out", str(out)]) == 0
    assert capsys.readouterr().out.startswith("delta 0.32")
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["header"]["config_sha256"] == _digest(GROUP_JSON)
    lo, hi = doc["bracket"]
    assert lo <= doc["delta"] <= hi
    assert abs(doc["zeta_root"] - 0.32060444439383434) < 1e-12


def test_zeta_eval_prints_17_digits(config_file, capsys):
    assert main(["zeta-eval", "--config", str(config_file), "--lam", "-0.5,1"]) == 0
    line = capsys.readouterr().out.split()
    real_part = line[line.index("Z") + 1].split(",")[0]
    assert float(real_part) == float(f"{float(real_part):.17g}")
    digits = real_part.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
    assert len(digits) >= 15


def test_resonances_csv_layout(config_file, tmp_path):
    out = tmp_path / "res.csv"
    assert main(["resonances", "--config", str(config_file), "--rect", "-0.1,0.25,1.0,1.5",
                 "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == f"# config_sha256={_digest(GROUP_JSON)} version=0.1.0"
    assert lines[1] == "re,im,multiplicity,newton_residual,box_w,box_h"
    hits = read_resonances_csv(out)
    assert len(hits) == 2
    assert min(abs(h.lam - (0.18184892804163286 + 1.3385951223013164j)) for h in hits) < 1e-9


def test_artifacts_identical_across_thread_counts(config_file, tmp_path):
    blobs = []
    for threads in ("1", "4"):
        out = tmp_path / f"res{threads}.csv"
        assert main(["resonances", "--config", str(config_file), "--threads", threads,
                     "--rect", "-0.1,0.25,1.0,1.5", "--out", str(out)]) == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]


def test_trace_requires_resonances_for_rank_two(config_file, tmp_path):
    assert main(["trace", "--config", str(config_file), "--out", str(tmp_path / "t.csv")]) == EXIT_CONFIG

import json

import jsonschema
import pytest

from quadspin import cli
from quadspin.exactalg import Field
from quadspin.linsys import LinearSystem, planted_singular_web

FP = Field.fp(10007)


def gen(tmp_path, name="sys.json", *extra, n=3, m=3, seed=7):
    out = tmp_path / name
    args = ["gen", "--n", str(n), "--m", str(m), "--seed", str(seed), "--out", str(out), *extra]
    assert cli.main(args) == 0
    return out


@pytest.fixture
def sysfile(tmp_path):
    return gen(tmp_path, "sys.json", "--field", "fp:10007")


def test_gen_is_byte_identical(tmp_path):
    a = gen(tmp_path, "a.json", "--field", "fp:10007", n=4, m=4, seed=42)
    b = gen(tmp_path, "b.json", "--field", "fp:10007", n=4, m=4, seed=42)
    assert a.read_bytes() == b.read_bytes()
    c = gen(tmp_path, "c.json", "--field", "fp:10007", n=4, m=4, seed=43)
    assert c.read_bytes() != a.read_bytes()


def test_gen_round_trips(sysfile):
    raw = json.loads(sysfile.read_text())
    L = LinearSystem.from_json(raw)
    again = L.to_json(raw["_meta"])
    assert again == raw
    assert raw["_meta"]["command"] == "gen" and raw["_meta"]["seed"] == 7


@pytest.mark.parametrize("flag, value", [("--n", "5"), ("--n", "1"), ("--m", "5")])
def test_gen_rejects_out_of_range(tmp_path, flag, value):
    args = {"--n": "2", "--m": "2"}
    args[flag] = value
    assert cli.main(["gen", "--n", args["--n"], "--m", args["--m"], "--seed", "0", "--out", str(tmp_path / "x")]) == 2


def test_gen_requires_seed(tmp_path):
    with pytest.raises(SystemExit) as e:
        cli.main(["gen", "--n", "2", "--m", "2"])
    assert e.value.code == 2


def test_verify_requires_seed(sysfile):
    with pytest.raises(SystemExit) as e:
        cli.main(["verify", str(sysfile), "--suite", "mf"])
    assert e.value.code == 2


def test_default_field_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("QF_DEFAULT_FIELD", "fp:101")
    out = gen(tmp_path, n=2, m=2)
    assert json.loads(out.read_text())["field"] == {"kind": "fp", "p": 101}
    monkeypatch.setenv("QF_DEFAULT_FIELD", "fp:100")
    assert cli.main(["gen", "--n", "2", "--m", "2", "--seed", "0", "--out", str(tmp_path / "y")]) == 2


@pytest.mark.parametrize("suite", cli.SUITES)
def test_every_suite_passes_and_matches_schema(sysfile, tmp_path, suite):
    out = tmp_path / "r.json"
    assert cli.main(["verify", str(sysfile), "--suite", suite, "--seed", "3", "--trials", "2", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    jsonschema.validate(report, cli.REPORT_SCHEMA)
    assert report["passed"] and [c["index"] for c in report["cases"]] == list(range(report["trials"]))
    assert report["_meta"]["input_hash"] == cli.hashlib.sha256(sysfile.read_bytes()).hexdigest()


def test_ranks_suite_on_n4(tmp_path):
    sysfile = gen(tmp_path, "n4.json", "--field", "fp:10007", n=4, m=2)
    out = tmp_path / "r.json"
    assert cli.main(["verify", str(sysfile), "--suite", "ranks", "--seed", "0", "--out", str(out)]) == 0
    got = json.loads(out.read_text())["cases"][0]["got"]["single"]
    assert all(r == 128 for r in got[7:]) and got[6] != 128


def test_verify_is_reproducible_and_job_independent(sysfile, tmp_path):
    outs = []
    for i, jobs in enumerate(("1", "1", "3")):
        out = tmp_path / f"r{i}.json"
        assert cli.main(["verify", str(sysfile), "--suite", "mf", "--seed", "9", "--trials", "6", "--jobs", jobs, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_manifest_sidecar(sysfile, tmp_path):
    man = tmp_path / "m.json"
    cli.main(["verify", str(sysfile), "--suite", "lemma", "--seed", "1", "--trials", "1", "--out", str(tmp_path / "r.json"), "--manifest", str(man)])
    info = json.loads(man.read_text())
    assert set(info) == {"command", "seed", "field", "n", "m", "input_hash", "version", "wall_time"}


def test_planted_failure_exits_one(tmp_path):
    L, v = planted_singular_web(2, FP, 0)
    path = tmp_path / "planted.json"
    path.write_text(json.dumps(L.to_json()))
    out = tmp_path / "r.json"
    point = ",".join(str(int(x)) for x in v)
    assert cli.main(["verify", str(path), "--suite", "complex", "--seed", "0", "--point", point, "--out", str(out)]) == 1
    case = json.loads(out.read_text())["cases"][0]
    assert case["passed"] is False and case["got"]["smooth"] is False


def test_corrupted_json_names_byte_offset(sysfile, tmp_path, capsys):
    # the stray comma sits at character 7 but byte 8, after the two-byte e-acute
    text = sysfile.read_text(encoding="utf-8")
    bad = tmp_path / "bad.json"
    bad.write_bytes(('{"\u00e9":1,,' + text[1:]).encode("utf-8"))
    assert cli.main(["verify", str(bad), "--suite", "mf", "--seed", "0"]) == 2
    assert "byte offset 8" in capsys.readouterr().err


def test_missing_file_exits_two(tmp_path):
    assert cli.main(["verify", str(tmp_path / "nope.json"), "--suite", "mf", "--seed", "0"]) == 2


def test_point_outside_complex_suite_is_usage_error(sysfile):
    assert cli.main(["verify", str(sysfile), "--suite", "mf", "--seed", "0", "--point", "1,2,3,4,5,6"]) == 2


def test_rational_system_is_not_supported(tmp_path, capsys):
    path = gen(tmp_path, "q.json", "--field", "q", n=2, m=2)
    assert cli.main(["verify", str(path), "--suite", "mf", "--seed", "0"]) == 2
    assert "explicitly hyperbolic" in capsys.readouterr().err


def test_strata_csv(tmp_path, capsys):
    path = gen(tmp_path, "web.json", "--field", "fp:11", n=3, m=4, seed=1)
    assert cli.main(["strata", str(path), "--p", "11"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "corank,count" and 2 <= len(lines) <= 4
    assert sum(int(line.split(",")[1]) for line in lines[1:]) == (11**4 - 1) // 10


@pytest.mark.parametrize("n", [2, 3, 4])
def test_disc_degree(tmp_path, capsys, n):
    path = gen(tmp_path, "s.json", "--field", "fp:10007", n=n, m=2, seed=n)
    assert cli.main(["disc", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["degree"] == 2 * n


def test_cover_on_pencil(tmp_path, capsys):
    path = gen(tmp_path, "p.json", "--field", "fp:10007", n=2, m=2, seed=1)
    assert cli.main(["cover", str(path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["branch_smooth"] is True and rep["singular_candidates"] == []
    assert rep["degree"] == 4


def test_pretty_renderings(sysfile, capsys):
    assert cli.main(["verify", str(sysfile), "--suite", "hom", "--seed", "0", "--trials", "1", "--pretty"]) == 0
    assert capsys.readouterr().out.startswith("suite hom: PASS")
    assert cli.main(["strata", str(sysfile), "--p", "11", "--pretty"]) == 0
    assert "corank 0:" in capsys.readouterr().out

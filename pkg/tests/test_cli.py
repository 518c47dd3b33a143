import csv
import io
import json

import numpy as np
import pytest

from cartan3 import __version__
from cartan3.cli import RunConfig, main, parse_alphas, parse_grid, parse_matrix
from cartan3.core import InvalidInputError

ABS2 = '{"kind": "raw", "function": "abs2_z11"}'
EXP_NEG = '{"kind": "elliptic", "profile": "exp_neg"}'
PARA = '{"kind": "parabolic", "profile": "exp_neg", "of": "trace"}'


def _rows(text):
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_c_table_constant(capsys):
    code, out, _ = _run(capsys, "c-table", "--n", "1", "--lambda", "2",
                        "--symbol", '{"kind": "elliptic", "profile": "constant"}', "--max-degree", "5")
    rows = _rows(out)
    assert code == 0 and len(rows) == 6
    assert all(float(r["value_re"]) == pytest.approx(1.0, abs=1e-12) for r in rows)


def test_c_table_radial(capsys):
    code, out, _ = _run(capsys, "c-table", "--n", "1", "--lambda", "2", "--symbol", ABS2, "--max-degree", "3")
    vals = [float(r["value_re"]) for r in _rows(out)]
    assert code == 0
    assert np.allclose(vals, [0.5, 2 / 3, 0.75, 0.8], atol=1e-10)


def test_c_table_n2_engages_mc(capsys):
    code, out, _ = _run(capsys, "c-table", "--n", "2", "--lambda", "4", "--symbol", EXP_NEG,
                        "--max-degree", "2", "--mc-samples", "20000")
    rows = _rows(out)
    # Signatures (0,0), (1,0), (2,0), (1,1).
    assert code == 0 and len(rows) == 4
    assert all(float(r["std_error"]) > 0 for r in rows)


def test_c_table_embeds_config_and_version(capsys):
    _, out, _ = _run(capsys, "c-table", "--n", "1", "--lambda", "2", "--symbol", ABS2,
                     "--alphas", "0;2", "--seed", "7")
    head = [line for line in out.splitlines() if line.startswith("#")]
    assert any(__version__ in line for line in head)
    cfg = json.loads(next(line for line in head if line.startswith("# config:")).split(":", 1)[1])
    assert cfg["seed"] == 7 and cfg["mc_samples"] == 100_000


def test_c_table_json(capsys):
    code, out, _ = _run(capsys, "c-table", "--n", "1", "--lambda", "3", "--symbol", ABS2,
                        "--alphas", "1", "--format", "json")
    obj = json.loads(out)
    assert code == 0 and obj["meta"]["version"] == __version__
    assert obj["entries"][0]["value_re"] == pytest.approx(0.5, abs=1e-10)  # (k+1)/(k+lam)


def test_c_table_rerun_byte_identical(tmp_path):
    paths = [tmp_path / f"t{i}.csv" for i in range(2)]
    for p in paths:
        assert main(["c-table", "--n", "2", "--lambda", "4", "--symbol", EXP_NEG, "--max-degree", "1",
                     "--mc-samples", "5000", "--seed", "3", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_symbol_from_file(tmp_path, capsys):
    f = tmp_path / "sym.json"
    f.write_text(ABS2)
    code, out, _ = _run(capsys, "c-table", "--n", "1", "--lambda", "2", "--symbol", f"@{f}", "--alphas", "0")
    assert code == 0 and float(_rows(out)[0]["value_re"]) == pytest.approx(0.5)


@pytest.mark.parametrize(
    "argv",
    [
        ["c-table", "--n", "1", "--lambda", "0.5", "--symbol", ABS2, "--alphas", "0"],
        ["c-table", "--n", "1", "--lambda", "2", "--symbol", "{bad", "--alphas", "0"],
        ["c-table", "--n", "1", "--lambda", "2", "--symbol", ABS2, "--alphas", "0", "--mc-samples", "99"],
        ["c-table", "--n", "1", "--lambda", "2", "--symbol", ABS2, "--alphas", "0", "--quad-order", "3"],
        ["c-table", "--n", "2", "--lambda", "4", "--symbol", ABS2, "--alphas", "0,1"],
        ["c-table", "--n", "1", "--lambda", "2", "--symbol", "@/nonexistent.json", "--alphas", "0"],
        ["gamma", "--n", "1", "--lambda", "2", "--symbol", PARA, "--grid", "1:oops"],
        ["gamma", "--n", "1", "--lambda", "2", "--symbol", EXP_NEG, "--grid", "1"],
        ["moment", "--action", "elliptic", "--point", "[[1, 0], [0, 1]]"],
        ["moment", "--action", "hyperbolic", "--point", "[[0]]"],
        ["verify", "--suite", "nonsense"],
        ["frobnicate"],
    ],
)
def test_invalid_input_exit_2(argv, capsys):
    code, _, err = _run(capsys, *argv)
    assert code == 2
    assert err


def test_gamma_examples(capsys):
    code, out, _ = _run(capsys, "gamma", "--n", "1", "--lambda", "2", "--symbol", PARA, "--grid", "0.5,1,2")
    vals = [float(r["gamma_re"]) for r in _rows(out)]
    assert code == 0 and np.allclose(vals, [0.5, 2 / 3, 0.8], atol=1e-6)


def test_gamma_constant_profile(capsys):
    sym = '{"kind": "parabolic", "profile": "constant", "of": "trace"}'
    code, out, _ = _run(capsys, "gamma", "--n", "2", "--lambda", "3.5", "--symbol", sym, "--grid", "0.5:2:4")
    vals = [float(r["gamma_re"]) for r in _rows(out)]
    assert code == 0 and len(vals) == 4 and np.allclose(vals, 1.0, atol=1e-4)


def test_moment_examples(capsys):
    code, out, _ = _run(capsys, "moment", "--action", "elliptic", "--point", "[[0,0],[0,0]]")
    assert code == 0 and json.loads(out)["moment"] == -4.0
    code, out, _ = _run(capsys, "moment", "--action", "parabolic", "--point", '[["1i",0],[0,"1i"]]')
    assert code == 0 and json.loads(out)["moment"] == [[-2.0, 0.0], [0.0, -2.0]]


def test_moment_boundary_names_eigenvalue(capsys):
    code, _, err = _run(capsys, "moment", "--action", "elliptic", "--point", "[[1,0],[0,1]]")
    assert code == 2 and "eigenvalue" in err


def test_verify_geometry_passes(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "geometry")
    report = json.loads(out)
    assert code == 0 and report["pass"]
    assert all(r["verdict"] == "pass" for r in report["results"])


def test_verify_all_small_sample_reports_verdicts(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "all", "--mc-samples", "100")
    report = json.loads(out)
    verdicts = {r["verdict"] for r in report["results"]}
    assert verdicts <= {"pass", "fail", "inconclusive"}
    assert code == (0 if report["pass"] else 1)
    assert {r["suite"] for r in report["results"]} == {"geometry", "symbols", "spectral", "oracle"}


def test_workers_env_default(monkeypatch):
    from cartan3.core import default_workers

    monkeypatch.setenv("CARTAN3_WORKERS", "3")
    assert default_workers() == 3


def test_run_config_validation():
    with pytest.raises(InvalidInputError):
        RunConfig(mc_samples=50)
    with pytest.raises(InvalidInputError):
        RunConfig(output="xml")
    assert "workers" not in RunConfig(workers=4).meta()["config"]


def test_parsers():
    assert parse_grid("0.5:1.5:3") == [0.5, 1.0, 1.5]
    assert parse_grid("0.5,1,2") == [0.5, 1.0, 2.0]
    with pytest.raises(InvalidInputError):
        parse_grid("1:2")
    assert [s.alpha for s in parse_alphas("1,0;2,1", 2)] == [(1, 0), (2, 1)]
    with pytest.raises(InvalidInputError):
        parse_alphas("0,1", 2)
    M = parse_matrix(json.loads('[[[1, 2], 0], [0, "3-1i"]]'))
    assert M[0, 0] == 1 + 2j and M[1, 1] == 3 - 1j

import json

import pytest

from fuchsian.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_convert_reference_values(capsys):
    code, out, _ = run_cli(capsys, "convert", "--alpha", "2", "--rho", "1")
    assert code == EXIT_OK
    payload = json.loads(out)
    m = [complex(float(x["re"]), float(x["im"])) for x in payload["m_vec"]]
    # puncture order 1, 1/alpha, 0
    assert abs(m[0] + 1) < 1e-20
    assert abs(m[1]) < 1e-20
    assert abs(m[2] - 1) < 1e-20
    m_inf = complex(float(payload["m_infinity"]["re"]), float(payload["m_infinity"]["im"]))
    assert abs(m_inf - 0.5) < 1e-20
    closed = payload["closed_forms"]
    assert abs(float(closed[0]["re"]) - 1) < 1e-20


def test_convert_requires_arguments(capsys):
    code, _, err = run_cli(capsys, "convert")
    assert code == EXIT_USAGE


def test_solve_degenerate_puncture_exit_code(capsys):
    code, _, err = run_cli(capsys, "solve", "1.0")
    assert code == EXIT_USAGE


def test_solve_unreachable_puncture(capsys):
    code, _, err = run_cli(capsys, "solve", "3.0")
    assert code == EXIT_USAGE


def test_verify_unreadable_file(tmp_path, capsys):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    code, _, _ = run_cli(capsys, "verify", str(empty))
    assert code == EXIT_USAGE


def test_solve_verify_round_trip(tmp_path, capsys):
    out_file = tmp_path / "result.json"
    cache = tmp_path / "cache.jsonl"
    code, out, err = run_cli(
        capsys,
        "--prec", "192", "--order", "64", "--cache", str(cache), "--hex",
        "solve", "0.5", "--output", str(out_file),
    )
    assert code == EXIT_OK, err
    payload = json.loads(out_file.read_text())
    assert payload["rho_F"]["re"].startswith("@hex:")
    assert payload["cache_hit"] is False

    # verify passes on the stored result
    code, out, err = run_cli(capsys, "verify", str(out_file))
    assert code == EXIT_OK, err
    report = json.loads(out)
    assert report["passed"] is True
    assert report["checks"]["ring_basis_k1"]["rank"] == 3

    # identical request hits the cache
    code, out, _ = run_cli(
        capsys,
        "--prec", "192", "--order", "64", "--cache", str(cache), "--hex",
        "solve", "0.5",
    )
    assert code == EXIT_OK
    assert json.loads(out)["cache_hit"] is True


def test_verify_detects_tampered_rho(tmp_path, capsys):
    out_file = tmp_path / "result.json"
    code, _, err = run_cli(
        capsys, "--prec", "192", "--order", "64", "--hex", "solve", "0.5", "--output", str(out_file)
    )
    assert code == EXIT_OK, err
    payload = json.loads(out_file.read_text())
    payload["rho_hat_F"] = {"re": "0.50001", "im": "0.0"}
    payload["rho_F"] = {"re": "1.00002", "im": "0.0"}
    out_file.write_text(json.dumps(payload))
    code, out, _ = run_cli(capsys, "verify", str(out_file))
    assert code == EXIT_NUMERICAL
    report = json.loads(out)
    assert report["passed"] is False


def test_ring_command(tmp_path, capsys):
    out_file = tmp_path / "result.json"
    code, _, err = run_cli(
        capsys, "--prec", "192", "--order", "64", "--hex", "solve", "0.5", "--output", str(out_file)
    )
    assert code == EXIT_OK, err
    code, out, err = run_cli(capsys, "ring", "--k", "1", "--result", str(out_file))
    assert code == EXIT_OK, err
    payload = json.loads(out)
    assert payload["dimension"] == 3 and payload["rank"] == 3
    assert len(payload["elements"]) == 3


def test_solve_conjugate_outputs(capsys):
    code1, out1, err1 = run_cli(capsys, "--prec", "160", "--order", "48", "solve", "0.5+0.004i")
    assert code1 == EXIT_OK, err1
    code2, out2, err2 = run_cli(capsys, "--prec", "160", "--order", "48", "solve", "0.5-0.004i")
    assert code2 == EXIT_OK, err2
    p1, p2 = json.loads(out1), json.loads(out2)
    r1 = complex(float(p1["rho_F_at_w"]["re"]), float(p1["rho_F_at_w"]["im"]))
    r2 = complex(float(p2["rho_F_at_w"]["re"]), float(p2["rho_F_at_w"]["im"]))
    assert abs(r1 - r2.conjugate()) < 1e-20
    assert p2["normalization_moves"] == ["conjugate"]


def test_expand_smoke(tmp_path, capsys):
    csv_path = tmp_path / "samples.csv"
    code, out, err = run_cli(
        capsys,
        "expand", "--degree", "1", "--slopes", "2,3,5", "--xmax", "0.004", "--xcount", "2",
        "--sample-prec", "160", "--sample-order", "64", "--guard-degree", "1",
        "--csv", str(csv_path),
    )
    assert code == EXIT_OK, err
    payload = json.loads(out)
    a10 = float(payload["coefficients"]["a_10"])
    a01 = float(payload["coefficients"]["a_01"])
    assert abs(a10 + 1.2311297) < 2e-3
    assert abs(a01 - 0.0638755) < 2e-3
    header, *rows = csv_path.read_text().strip().splitlines()
    assert header == "x,slope,rho_re,rho_im"
    assert len(rows) == 12

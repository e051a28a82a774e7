import json
from fractions import Fraction

import pytest
from click.testing import CliRunner

from certnorms.cli import main
from certnorms.hypercube import Partition, Polynomial


@pytest.fixture()
def files(tmp_path):
    third = Fraction(1, 3)
    p = Polynomial(3, {(1, 0, 0): third, (0, 1, 0): third, (0, 0, 1): third})
    P = Partition(3, [[1, 2, 3]])
    pf = tmp_path / "p.json"
    Pf = tmp_path / "P.json"
    pf.write_text(json.dumps(p.to_json()))
    Pf.write_text(json.dumps(P.to_json()))
    chsh = tmp_path / "chsh.json"
    chsh.write_text(json.dumps({"rows": [[0.5, 0.5], [0.5, -0.5]]}))
    return {"poly": str(pf), "part": str(Pf), "chsh": str(chsh), "dir": tmp_path}


def run(*args):
    return CliRunner().invoke(main, list(args))


def test_norms_example(files):
    res = run("norms", files["poly"], "--partition", files["part"])
    assert res.exit_code == 0, res.output
    body = json.loads(res.output)
    assert body["norm_inf"]["value"] == 1.0
    assert body["norm_one"]["value"] == 0.5


def test_dual_norms_example(files):
    res = run("dual-norms", files["poly"], "--partition", files["part"])
    assert res.exit_code == 0, res.output
    body = json.loads(res.output)
    assert abs(body["inf_dual"]["lower"] - 1 / 3) < 1e-9
    assert abs(body["inf_dual"]["upper"] - 1 / 3) < 1e-9


def test_query_error_matrix(files):
    res = run("query-error", "--matrix", files["chsh"])
    assert res.exit_code == 0, res.output
    body = json.loads(res.output)
    assert abs(body["eps"]["lower"] - (1 - 2**-0.5)) < 1e-2


def test_determinism_byte_identical(files):
    a = run("--seed", "3", "--format", "csv", "kg-bounds", "--k", "2", "--samples", "3")
    b = run("--seed", "3", "--format", "csv", "kg-bounds", "--k", "2", "--samples", "3")
    assert a.exit_code == 0 and b.exit_code == 0
    assert a.output == b.output
    header = a.output.splitlines()[0]
    assert header == "index,matrix_hash,inf_to_one,cb_lower,cb_upper,ratio_lower,ratio_upper"


def test_witness_csv_and_dump_cert(files):
    cert_path = files["dir"] / "cert.json"
    res = run("--format", "csv", "witness", "--n", "3", "--dump-cert", str(cert_path))
    assert res.exit_code == 0, res.output
    lines = res.output.splitlines()
    assert lines[0].startswith("n,q_norm2_sq,")
    assert lines[1].split(",")[0] == "3"
    assert cert_path.exists()
    cert = json.loads(cert_path.read_text())
    assert cert["w"] == 1.0


def test_out_flag_writes_file(files):
    out = files["dir"] / "result.json"
    res = run("--out", str(out), "norms", files["poly"])
    assert res.exit_code == 0
    assert res.output == ""
    assert json.loads(out.read_text())["norm_one"]["value"] == 0.5


def test_exit_code_validation_failure(files):
    # a partition file passed as the polynomial: schema mismatch -> 2
    res = run("norms", files["part"])
    assert res.exit_code == 2


def test_exit_code_missing_file():
    res = run("norms", "/nonexistent/p.json")
    assert res.exit_code == 2


def test_exit_code_cap_exceeded(files, tmp_path):
    big = Polynomial(30, {tuple([1] + [0] * 29): 1})
    f = tmp_path / "big.json"
    f.write_text(json.dumps(big.to_json()))
    res = run("norms", str(f))
    assert res.exit_code == 3


def test_verify_sdp2_cli(files, tmp_path):
    from certnorms.queryerror import sdp2_from_polynomial, sdp2_parity_lift

    p = Polynomial(4, {(1, 0, 1, 0): 0.5, (0, 1, 0, 1): -0.25})
    P = Partition(4, [[1, 2], [3, 4]])
    inst = sdp2_parity_lift(sdp2_from_polynomial(p, P), P)
    fi = tmp_path / "inst.json"
    fp = tmp_path / "p4.json"
    fP = tmp_path / "P4.json"
    fi.write_text(json.dumps(inst.to_json()))
    fp.write_text(json.dumps(p.to_json()))
    fP.write_text(json.dumps(P.to_json()))
    res = run("verify-sdp2", str(fi), "--partition", str(fP), "--poly", str(fp))
    assert res.exit_code == 0, res.output
    assert json.loads(res.output)["ok"] is True


def test_probe_csv_schema(files):
    res = run("--format", "csv", "probe-open-question", "--samples", "2", "--k", "2")
    assert res.exit_code == 0, res.output
    assert res.output.splitlines()[0] == (
        "index,eps_lower,eps_upper,almost_gt_lower,almost_gt_upper,gap_to_bound"
    )

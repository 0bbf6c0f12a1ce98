import json

import pytest

from codedpir.cli import main
from codedpir.service import ServerPool


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def ex2_file(tmp_path, capsys):
    path = tmp_path / "ex2.json"
    assert run(capsys, "code", "build", "example2", "-o", str(path))[0] == 0
    return path


def test_build_verify_oracle(tmp_path, capsys):
    path = tmp_path / "ml.json"
    assert run(capsys, "code", "build", "ml15-7", "-o", str(path))[0] == 0
    rc, out, _ = run(capsys, "code", "verify", "-f", str(path), "--distance")
    assert rc == 0 and out.startswith("pass")
    rc, out, _ = run(capsys, "code", "oracle", "-f", str(path), "-i", "3")
    assert rc == 0 and out.strip() == "5"


def test_build_with_params(capsys):
    rc, out, _ = run(capsys, "code", "build", "cubic", "-p", "sigma=2", "-p", "k=3")
    assert rc == 0 and json.loads(out)["k"] == 3


def test_export_matrix(ex2_file, capsys):
    rc, out, _ = run(capsys, "code", "export", "-f", str(ex2_file), "--format", "matrix")
    lines = out.splitlines()
    assert rc == 0 and lines[0].startswith("# example2 [8,4]") and len(lines) == 5


def test_verify_rejects_tampered(ex2_file, capsys):
    obj = json.loads(ex2_file.read_text())
    obj["k"] = 4
    ex2_file.write_text(json.dumps(obj))
    rc, out, err = run(capsys, "code", "verify", "-f", str(ex2_file))
    assert rc == 1


def test_bounds_cell(capsys):
    rc, out, _ = run(capsys, "bounds", "cell", "-s", "3", "-k", "8")
    assert out.strip() == "lower=14 upper=14 provenance=balanced(3,8)"


def test_bounds_table_small(capsys):
    rc, out, _ = run(capsys, "bounds", "table", "--s-max", "3", "--k-max", "4")
    assert rc == 0 and len(out.strip().splitlines()) == 1 + 3 * 4


def test_protocol_audit(capsys):
    rc, out, _ = run(capsys, "protocol", "audit", "-n", "6", "--i1", "0", "--i2", "5")
    assert rc == 0 and out.startswith("identical")


def test_emulate_sweep(capsys):
    rc, out, _ = run(capsys, "emulate", "run", "--example2", "-n", "16")
    assert rc == 0 and "16/16" in out


def test_emulate_failed_server(capsys):
    rc, out, _ = run(capsys, "emulate", "run", "--example2", "-k", "2", "-n", "16", "--failed", "4")
    assert rc == 0


def test_emulate_trace(capsys):
    rc, out, _ = run(capsys, "emulate", "trace", "--example2", "--part", "1")
    assert rc == 0 and "c8=x1+x4" in out and "a3' = " in out


def test_trace_part_out_of_range(capsys):
    rc, _, err = run(capsys, "emulate", "trace", "--example2", "--part", "0")
    assert rc == 2 and "1..4" in err


def test_missing_code_source(capsys):
    rc, _, err = run(capsys, "emulate", "run", "-n", "8")
    assert rc == 2


def test_missing_file_is_error(capsys):
    rc, _, err = run(capsys, "code", "verify", "-f", "/nonexistent.json")
    assert rc == 1 and err.startswith("error:")


def test_array_build_verify_get(tmp_path, capsys):
    path = tmp_path / "a.json"
    assert run(capsys, "array", "build", "--example", "2x25", "-o", str(path))[0] == 0
    rc, out, _ = run(capsys, "array", "verify", "-f", str(path))
    assert rc == 0 and out.strip() == "pass"
    rc, out, _ = run(capsys, "array", "get", "-f", str(path), "-n", "24", "-i", "7")
    assert rc == 0 and out.startswith("bit=")


def test_ledger(capsys):
    rc, out, _ = run(capsys, "ledger")
    assert "A(3,15): published=26 derived=27" in out
    assert "published=9387 derived=9388" in out


def test_get_over_tcp(tmp_path, ex2_file, capsys):
    data = tmp_path / "db.txt"
    bits = "1011001110001011"
    data.write_text(bits + "\n")
    with ServerPool(8) as pool:
        cfg = tmp_path / "svc.json"
        cfg.write_text(json.dumps({
            "servers": [f"{h}:{p}" for h, p in pool.endpoints],
            "code": ex2_file.name,
            "protocol": {"name": "xork", "k": 3},
            "seed": 1,
        }))
        rc, out, _ = run(capsys, "get", "--config", str(cfg), "-i", "2", "--upload", str(data))
        assert rc == 0 and out.splitlines()[0] == f"bit={bits[2]}"
        rc, out, _ = run(capsys, "get", "--config", str(cfg), "-i", "9", "-n", "16")
        assert rc == 0 and out.splitlines()[0] == f"bit={bits[9]}"
        pool.kill(0)
        rc, _, err = run(capsys, "get", "--config", str(cfg), "-i", "9", "-n", "16", "--timeout", "2")
        assert rc == 1 and "unreachable" in err

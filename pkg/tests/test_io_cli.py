import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfwavelet import io
from lfwavelet.cli import EXIT_CONTRACT, EXIT_FAIL, EXIT_OK, EXIT_USAGE, OUT_ENV, main
from lfwavelet.errors import FormatError
from lfwavelet.field import FieldParams, LaurentElem
from lfwavelet.functions import FREQUENCY, POINT, TestFunction, Window

from conftest import random_values

F2 = FieldParams(2)


# --- formats ------------------------------------------------------------------------------------


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=9, max_size=9), st.sampled_from([POINT, FREQUENCY]))
def test_function_round_trip_bit_exact(tmp_path_factory, pairs, side):
    f = TestFunction(FieldParams(3), side, Window(1, 1), np.array([complex(a, b) for a, b in pairs]))
    path = tmp_path_factory.mktemp("rt") / "f.json"
    io.write_function(path, f, {"kind": "random"})
    g, meta = io.read_function(path)
    assert meta == {"kind": "random"}
    assert g.params == f.params and g.side == f.side and g.window == f.window
    assert f.values.tobytes() == g.values.tobytes()


def test_field_with_reduction_round_trip(tmp_path, rng):
    params = FieldParams(2, 3, (1, 0, 1, 1))
    f = TestFunction(params, POINT, Window(0, 1), random_values(rng, 8))
    g, _ = io.read_function(io.write_function(tmp_path / "f.json", f))
    assert g.params.reduction == (1, 0, 1, 1)


def test_laurent_round_trip():
    x = LaurentElem.from_codes(FieldParams(3, 2), {-3: 4, 0: 1, 2: 8})
    assert io.laurent_from_list(x.params, io.laurent_to_list(x)) == x


def good_dict():
    return io.function_to_dict(TestFunction(F2, POINT, Window(0, 1), [1.0, -1.0]))


def broken(mutate):
    d = good_dict()
    mutate(d)
    return d


@pytest.mark.parametrize(
    "data, needle",
    [
        (broken(lambda d: d.pop("format_version")), "format_version"),
        (broken(lambda d: d.update(format_version=7)), "format_version"),
        (broken(lambda d: d.pop("field")), "field"),
        (broken(lambda d: d["field"].pop("p")), "field"),
        (broken(lambda d: d["field"].update(p=4)), "field"),
        (broken(lambda d: d["field"].update(c="1")), "field.c"),
        (broken(lambda d: d.update(side="time")), "side"),
        (broken(lambda d: d["window"].update(M=-1)), "window"),
        (broken(lambda d: d["window"].pop("N")), "window"),
        (broken(lambda d: d["values"].pop()), "values"),
        (broken(lambda d: d["values"].__setitem__(0, [1.0])), "values[0]"),
        (broken(lambda d: d["values"].__setitem__(1, ["x", 0])), "values[1]"),
        (broken(lambda d: d.update(metadata=[1])), "metadata"),
        ([1, 2], "top level"),
    ],
)
def test_format_errors_name_the_field(data, needle):
    with pytest.raises(FormatError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        io.function_from_dict(data)


def test_invalid_json_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format_version": 1,\n  "field": }')
    with pytest.raises(FormatError, match="line 2"):
        io.read_function(path)


def test_non_finite_handling(tmp_path):
    with pytest.raises(ValueError):
        io.dumps({"v": float("nan")})
    # report values pass through _plain, which maps non-finite floats to null
    path = io.write_json(tmp_path / "r.json", {"v": np.float64("nan"), "z": 1 + 2j, "a": np.arange(2)})
    assert io.read_json(path) == {"v": None, "z": [1.0, 2.0], "a": [0, 1]}


def test_csv_round_trip(tmp_path):
    rows = [{"res": 2, "index": 3, "value": 0.1 + 0.2}, {"res": 2, "index": 4, "value": 1.0}]
    path = io.write_csv(tmp_path / "t.csv", rows, ["res", "index", "value"])
    back = io.read_csv(path)
    assert [float(r["value"]) for r in back] == [0.1 + 0.2, 1.0]
    assert back[0]["index"] == "3"


# --- CLI ----------------------------------------------------------------------------------------


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def haar_dir(tmp_path, capsys):
    out = tmp_path / "haar3"
    assert run(capsys, "--p", 3, "--out", out, "family", "--kind", "haar")[0] == EXIT_OK
    return out


def test_family_command(haar_dir):
    names = sorted(p.name for p in haar_dir.iterdir())
    assert names == ["phi.json", "psi_1.json", "psi_2.json"]
    psi, meta = io.read_function(haar_dir / "psi_1.json")
    assert meta["role"] == "wavelet" and meta["member"] == 1
    assert psi.params == FieldParams(3)


def test_family_from_files(haar_dir, tmp_path, capsys):
    out = tmp_path / "copy"
    code, _, _ = run(capsys, "--out", out, "family", "--kind", "file", haar_dir / "psi_1.json", haar_dir / "psi_2.json")
    assert code == EXIT_OK
    assert io.read_function(out / "psi_2.json")[1]["zero_vanish_level"] == 0


def test_verify_exit_codes(haar_dir, tmp_path, capsys):
    code, out, _ = run(capsys, "--out", tmp_path / "v", "verify", haar_dir / "psi_1.json", haar_dir / "psi_2.json")
    assert code == EXIT_OK
    assert "orthonormal_basis=True" in out
    verdict = io.read_json(tmp_path / "v" / "verdict.json")
    assert verdict["format_version"] == io.FORMAT_VERSION and verdict["command"] == "verify"

    ann = tmp_path / "ann"
    run(capsys, "--out", ann, "family", "--kind", "annulus")
    assert run(capsys, "--out", ann, "verify", ann / "psi_1.json")[0] == EXIT_FAIL

    # a function that does not vanish near 0 has no certificate
    bad = io.write_function(tmp_path / "bad.json", TestFunction(F2, FREQUENCY, Window(1, 0), [1.0, 1.0]))
    code, _, err = run(capsys, "--out", tmp_path, "verify", bad)
    assert code == EXIT_CONTRACT
    assert "CertificateError" in err


def test_verify_csv_tables(haar_dir, tmp_path, capsys):
    out = tmp_path / "csv"
    run(capsys, "--out", out, "--format", "csv", "verify", haar_dir / "psi_1.json", haar_dir / "psi_2.json")
    rows = io.read_csv(out / "calderon.csv")
    assert rows and all(float(r["residual"]) < 1e-12 for r in rows)
    ts = io.read_csv(out / "ts.csv")
    assert {int(r["s"]) % 3 for r in ts} == {1, 2}


def test_usage_errors(tmp_path, capsys):
    missing = run(capsys, "--out", tmp_path, "verify", tmp_path / "nope.json")
    assert missing[0] == EXIT_USAGE and "nope.json" in missing[2]
    (tmp_path / "junk.json").write_text("{")
    assert run(capsys, "--out", tmp_path, "verify", tmp_path / "junk.json")[0] == EXIT_USAGE
    assert run(capsys, "--reduction", "1,x", "--out", tmp_path, "family", "--kind", "haar")[0] == EXIT_USAGE
    assert run(capsys, "--p", 4, "--out", tmp_path, "family", "--kind", "haar")[0] == EXIT_USAGE
    assert run(capsys, "--out", tmp_path, "family", "--kind", "file")[0] == EXIT_USAGE


def test_field_mismatch(haar_dir, tmp_path, capsys):
    assert run(capsys, "--p", 2, "--out", tmp_path, "verify", haar_dir / "psi_1.json")[0] == EXIT_USAGE


@pytest.mark.parametrize("argv", [[], ["bogus"], ["family"], ["verify"], ["--tol", "x", "verify", "a.json"]])
def test_argparse_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_transform_round_trip(tmp_path, capsys, rng):
    f = TestFunction(FieldParams(3), POINT, Window(1, 1), random_values(rng, 9))
    src = io.write_function(tmp_path / "f.json", f)
    fwd = tmp_path / "F.json"
    back = tmp_path / "g.json"
    assert run(capsys, "transform", src, "-o", fwd)[0] == EXIT_OK
    assert run(capsys, "transform", fwd, "-o", back, "--naive")[0] == EXIT_OK
    F, _ = io.read_function(fwd)
    assert F.side == FREQUENCY
    g, _ = io.read_function(back)
    assert g.allclose(f, atol=1e-12)


def test_dimension_gramian_frame_bounds(haar_dir, tmp_path, capsys):
    files = [haar_dir / "psi_1.json", haar_dir / "psi_2.json"]
    out = tmp_path / "o"
    code, text, _ = run(capsys, "--out", out, "dimension", *files)
    assert code == EXIT_OK and "min=1 max=1" in text
    assert io.read_json(out / "dimension.json")["periodicity_residual"] == 0
    run(capsys, "--out", out, "--format", "csv", "dimension", *files)
    assert all(float(r["value"]) == pytest.approx(1) for r in io.read_csv(out / "dimension.csv"))

    assert run(capsys, "--out", out, "gramian", "--S", 2, *files)[0] == EXIT_OK
    gram = io.read_json(out / "gramian.json")
    assert gram["truncated"] and len(gram["slices"][0]["entries"]) == 9
    assert run(capsys, "--out", out, "gramian", "--cell", 10_000, *files)[0] == EXIT_USAGE

    code, text, _ = run(capsys, "--out", out, "frame-bounds", "--S", 2, "--trials", 20, "--J", 2, *files)
    assert code == EXIT_OK and text.strip() == "A=1 B=1"
    fb = io.read_json(out / "frame_bounds.json")
    assert fb["bessel_estimate"]["approximate"] and fb["bessel_estimate"]["trials"] == 20


def test_mra_command(haar_dir, tmp_path, capsys):
    out = tmp_path / "m"
    code, text, _ = run(capsys, "--out", out, "mra", haar_dir / "psi_1.json", haar_dir / "psi_2.json")
    assert code == EXIT_OK and "recovery_ok=True" in text
    phi_hat, meta = io.read_function(out / "phi_hat.json")
    assert meta["recovered"] and phi_hat.norm() == pytest.approx(1)
    report = io.read_json(out / "mra_report.json")
    assert report["is_mra_wavelet"] and report["modulation_gaps"] == []
    run(capsys, "--out", out, "family", "--kind", "annulus")
    assert run(capsys, "--out", out, "mra", out / "psi_1.json")[0] == EXIT_CONTRACT


def test_outputs_byte_identical(haar_dir, tmp_path, capsys):
    files = [haar_dir / "psi_1.json", haar_dir / "psi_2.json"]
    for name in ("a", "b"):
        run(capsys, "--out", tmp_path / name, "verify", *files)
        run(capsys, "--out", tmp_path / name, "frame-bounds", "--trials", 10, "--J", 2, "--seed", 5, *files)
    for fname in ("verdict.json", "frame_bounds.json"):
        assert (tmp_path / "a" / fname).read_bytes() == (tmp_path / "b" / fname).read_bytes()


def test_out_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env"))
    assert run(capsys, "family", "--kind", "annulus")[0] == EXIT_OK
    assert (tmp_path / "env" / "psi_1.json").exists()
    # the flag wins over the environment, also when given after the subcommand
    assert run(capsys, "family", "--kind", "annulus", "--out", tmp_path / "flag")[0] == EXIT_OK
    assert (tmp_path / "flag" / "psi_1.json").exists()


def test_verdict_json_is_plain(haar_dir, tmp_path, capsys):
    run(capsys, "--out", tmp_path, "verify", haar_dir / "psi_1.json", haar_dir / "psi_2.json")
    text = (tmp_path / "verdict.json").read_text()
    assert "NaN" not in text and "Infinity" not in text
    json.loads(text)

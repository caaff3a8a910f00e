import io as _io
import json

import numpy as np
import pytest

from covx import io
from covx.channels import builtin_examples, qubit_phase_rep
from covx.cli import run
from covx.errors import ParseError
from covx.reps import SUdTensor, U1Weights, heisenberg_weyl, quaternion_group


def call(*argv):
    out, err = _io.StringIO(), _io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
        return p
    return write


class TestFormats:
    def test_matrix_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        M[0, 0] = 1 / 3
        io.save_matrix(tmp_path / "m.json", M)
        assert np.array_equal(io.load_matrix(tmp_path / "m.json"), M)

    def test_real_entries_allowed(self):
        M = io.matrix_from_json({"rows": 1, "cols": 2, "data": [1, [0, 2]]})
        assert np.array_equal(M, [[1, 2j]])

    @pytest.mark.parametrize("obj, msg", [
        ({"rows": 2, "cols": 2, "data": [[1, 0]]}, "expected 4 entries"),
        ({"rows": 1, "cols": 2, "data": [[1, 0], "x"]}, "row 0, col 1"),
        ({"cols": 1, "data": []}, "missing field 'rows'"),
        ([1, 2], "expected a JSON object"),
    ])
    def test_matrix_errors(self, obj, msg):
        with pytest.raises(ParseError, match=msg):
            io.matrix_from_json(obj)

    def test_json_syntax_position(self, files):
        p = files("bad.json", '{"rows": 1,\n ]')
        with pytest.raises(ParseError, match=r"bad.json:2:2"):
            io.load_matrix(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            io.load_matrix(tmp_path / "nope.json")

    @pytest.mark.parametrize("rep", [U1Weights([0, 1, -2]), quaternion_group(), heisenberg_weyl(3),
                                     SUdTensor(3, "ustar_ustar")])
    def test_rep_round_trip(self, tmp_path, rep):
        io.save_rep(tmp_path / "r.json", rep)
        back = io.load_rep(tmp_path / "r.json")
        assert type(back) is type(rep) and back.dim == rep.dim
        assert io.rep_to_json(back) == io.rep_to_json(rep)

    @pytest.mark.parametrize("obj", [{"type": "u1_weights", "weights": [0.5]}, {"type": "nope"},
                                     {"type": "su_d_tensor", "d": 1, "variant": "u_ustar"},
                                     {"type": "finite", "unitaries": []}, {"weights": [1]}])
    def test_rep_errors(self, obj):
        with pytest.raises(ParseError):
            io.rep_from_json(obj)

    def test_channel_dims(self):
        obj = io.channel_to_json(np.eye(4), 2, 2)
        assert io.channel_from_json(obj)[1:] == (2, 2)
        obj["dim_out"] = 3
        with pytest.raises(ParseError):
            io.channel_from_json(obj)


class TestCli:
    def test_decompose_clone12(self, tmp_path):
        io.save_rep(tmp_path / "rep.json", qubit_phase_rep(2))
        code, out, _ = call("decompose", tmp_path / "rep.json")
        rep = json.loads(out)
        assert code == 0
        assert [(b["k"], b["m"]) for b in rep["blocks"]] == [(-1, 1), (0, 3), (1, 3), (2, 1)]

    def test_example_verdicts(self):
        assert call("channel", "example", "clone13", "--check", "extremal")[0] == 0
        assert call("channel", "example", "clone12", "--check", "extremal")[0] == 1
        assert call("channel", "example", "clone12", "--check", "tni")[0] == 0
        assert call("channel", "example", "transpose_minus", "--d", "3", "--check", "all")[0] == 0

    def test_povm_extremal_with_witness(self, tmp_path):
        e0, e1 = np.array([1, 1, 1, 1.0]), np.array([1, -1, 1, -1.0])
        io.save_matrix(tmp_path / "xi.json", 0.5 * (np.outer(e0, e0) + np.outer(e1, e1)))
        io.save_rep(tmp_path / "rep.json", U1Weights([0, 1, 2, 3]))
        wpath = tmp_path / "w.json"
        code, out, _ = call("povm", "extremal", tmp_path / "xi.json", tmp_path / "rep.json", "-o", wpath)
        assert code == 1 and json.loads(out)["verdict"] is False
        Th = io.load_matrix(wpath)
        t = json.loads(out)["witness_step"]
        xi = io.load_matrix(tmp_path / "xi.json")
        for s in (1, -1):
            io.save_matrix(tmp_path / "pm.json", xi + s * t * Th)
            assert call("povm", "check", tmp_path / "pm.json", tmp_path / "rep.json")[0] == 0

    def test_povm_check_and_prob(self, tmp_path):
        io.save_matrix(tmp_path / "xi.json", np.ones((3, 3)))
        io.save_rep(tmp_path / "rep.json", U1Weights([0, 1, 2]))
        io.save_matrix(tmp_path / "rho.json", np.ones((3, 3)) / 3)
        assert call("povm", "check", tmp_path / "xi.json", tmp_path / "rep.json")[0] == 0
        code, out, _ = call("povm", "prob", tmp_path / "xi.json", tmp_path / "rep.json", tmp_path / "rho.json",
                            "--angle", "0")
        assert code == 0 and abs(json.loads(out)["density"] - 3) < 1e-12
        io.save_matrix(tmp_path / "two.json", 2 * np.eye(3))
        assert call("povm", "check", tmp_path / "two.json", tmp_path / "rep.json")[0] == 1

    def test_parse_error_exit(self, files):
        bad = files("bad.json", "{\n  oops")
        code, out, err = call("povm", "check", bad, bad)
        assert code == 2 and out == ""
        assert err.startswith("covx: error:") and "bad.json:2:" in err

    def test_usage_errors(self):
        assert call("nope")[0] == 2
        assert call()[0] == 2
        assert call("channel", "example", "clone12", "--d", "x")[0] == 2

    def test_report_refeed(self, tmp_path):
        code, out, _ = call("channel", "example", "clone12")
        (tmp_path / "ex.json").write_text(out)
        io.save_rep(tmp_path / "rep.json", qubit_phase_rep(2))
        assert call("channel", "check", tmp_path / "ex.json", tmp_path / "rep.json")[0] == 0
        assert call("channel", "extremal", tmp_path / "ex.json", tmp_path / "rep.json")[0] == 1
        code, out, _ = call("channel", "witness", tmp_path / "ex.json", tmp_path / "rep.json")
        (tmp_path / "wit.json").write_text(out)
        S = io.load_matrix(tmp_path / "wit.json")
        assert S.shape == (8, 8) and np.linalg.norm(S) > 0

    def test_rep_in_flag(self, tmp_path):
        cov, _ = builtin_examples("clone12")
        io.write_json(tmp_path / "R.json", io.channel_to_json(cov.R, 2, 4))
        io.save_rep(tmp_path / "v.json", U1Weights([0, 1, 1, 2]))
        io.save_rep(tmp_path / "u.json", U1Weights([0, 1]))
        assert call("channel", "check", tmp_path / "R.json", tmp_path / "v.json", "--rep-in", tmp_path / "u.json")[0] == 0

    def test_apply(self, tmp_path):
        cov, _ = builtin_examples("transpose_plus", 2)
        io.write_json(tmp_path / "R.json", io.channel_to_json(cov.R, 2, 2))
        io.save_matrix(tmp_path / "rho.json", np.diag([1.0, 0.0]))
        code, out, _ = call("channel", "apply", tmp_path / "R.json", tmp_path / "rho.json")
        (tmp_path / "o.json").write_text(out)
        assert np.allclose(io.load_matrix(tmp_path / "o.json"), np.diag([2, 1]) / 3)
        code, out, _ = call("channel", "apply", tmp_path / "R.json", tmp_path / "rho.json", "--heisenberg")
        assert code == 0

    def test_optimize_povm(self, tmp_path):
        e = np.ones(2) / np.sqrt(2)
        io.save_matrix(tmp_path / "w.json", np.outer(e, e))
        io.save_rep(tmp_path / "rep.json", U1Weights([0, 1]))
        code, out, _ = call("optimize", "povm", "--cost", tmp_path / "w.json", "--rep", tmp_path / "rep.json",
                            "--restarts", "1", "--out", tmp_path / "z.json")
        rep = json.loads(out)
        assert code == 0 and abs(rep["value"] - 2) < 1e-6 and rep["extremality"]["verdict"] is True
        assert np.allclose(io.load_matrix(tmp_path / "z.json"), np.ones((2, 2)), atol=1e-5)

    def test_optimize_needs_dim_in(self, tmp_path):
        io.save_matrix(tmp_path / "w.json", np.eye(4))
        io.save_rep(tmp_path / "rep.json", U1Weights([0, 1, -1, 0]))
        assert call("optimize", "channel", "--cost", tmp_path / "w.json", "--rep", tmp_path / "rep.json")[0] == 2

    def test_text_output(self):
        code, out, _ = call("--output", "text", "channel", "example", "clone13")
        assert code == 0 and "R: <16x16 matrix>" in out

    def test_examples_bit_identical(self, tmp_path):
        assert call("examples", "--out-dir", tmp_path / "a")[0] == 0
        assert call("examples", "--out-dir", tmp_path / "b")[0] == 0
        names = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert "clone12.json" in names and "cost_clone12.json" in names
        for n in names:
            assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()

    def test_covx_tol_env(self, monkeypatch, tmp_path):
        io.save_rep(tmp_path / "rep.json", U1Weights([0, 1]))
        monkeypatch.setenv("COVX_TOL", "not-a-float")
        assert call("decompose", tmp_path / "rep.json")[0] == 2
        monkeypatch.setenv("COVX_TOL", "1e-7")
        assert call("decompose", tmp_path / "rep.json")[0] == 0
        monkeypatch.setenv("COVX_TOL", "5")
        assert call("decompose", tmp_path / "rep.json")[0] == 2

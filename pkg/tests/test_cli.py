import io
import json
import subprocess
import sys

import numpy as np
import pytest

from wbstream.cli import run

SEED = "ab" * 32


def cli(args, text=""):
    out = io.StringIO()
    code = run(["--seed", SEED, *args], stdin=io.StringIO(text), stdout=out)
    return code, out.getvalue()


class TestRecoverVector:
    def test_enumerate(self):
        code, out = cli(["recover-vector", "--n", "6", "--k", "2", "--beta", "3"], "v 2 3\nv 5 -2\n")
        assert code == 0 and out == "2 3\n5 -2\n"

    def test_fast_not_in_class(self):
        text = "vector n=64\n" + "".join(f"v {i} 1\n" for i in range(1, 5))
        code, out = cli(["recover-vector", "--k", "3", "--beta", "2", "--fast"], text)
        assert code == 3 and out == "NONE\n"

    def test_capacity_is_usage_error(self):
        code, _ = cli(["recover-vector", "--n", "1024", "--k", "8", "--beta", "100"], "v 1 1\n")
        assert code == 1

    def test_json(self):
        code, out = cli(["--json", "recover-vector", "--n", "6", "--k", "2", "--beta", "3"], "v 2 3\n")
        assert code == 0 and json.loads(out) == {
            "command": "recover-vector", "verdict": "recovered", "value": [[2, 3]]}

    def test_config_defaults(self, tmp_path):
        cfg = tmp_path / "p.cfg"
        cfg.write_text(f"dim=6\nk=2\nbeta=3\nseed={SEED}\n")
        code, out = cli(["--config", str(cfg), "recover-vector"], "v 4 -1\n")
        assert code == 0 and out == "4 -1\n"

    def test_input_file(self, tmp_path):
        f = tmp_path / "s.txt"
        f.write_text("vector n=6\nv 1 2\n")
        code, out = cli(["recover-vector", "--k", "1", "--beta", "3", "--input", str(f)])
        assert code == 0 and out == "1 2\n"


class TestOtherCommands:
    def test_estimate_l0(self):
        text = "vector n=16\n" + "".join(f"v {i} 1\n" for i in range(1, 11))
        code, out = cli(["estimate-l0", "--eps", "0.5"], text)
        assert code == 0 and out == "4\n"

    def test_recover_matrix(self):
        code, out = cli(["recover-matrix", "--n", "3", "--k", "1", "--beta", "4"], "m 1 1 2\nm 1 3 4\n")
        assert code == 0 and out == "2 0 4\n0 0 0\n0 0 0\n"

    def test_rank_decision(self):
        eye = "matrix n=4\n" + "".join(f"m {i} {i} 1\n" for i in range(1, 5))
        assert cli(["rank-decision", "--k", "2", "--beta", "1"], eye) == (3, "RANK>2\n")
        code, out = cli(["rank-decision", "--k", "4", "--beta", "1"], eye)
        assert code == 0 and out.splitlines()[0] == "RANK<=4"

    def test_rpca(self):
        text = "matrix n=4\nm 1 1 1\nm 1 2 1\nm 2 1 1\nm 2 2 1\nm 4 3 9\n"
        code, out = cli(["rpca", "--k", "1", "--r", "1", "--beta", "9"], text)
        lines = out.splitlines()
        assert code == 0 and lines[0] == "L:" and lines[5] == "S:" and lines[9] == "0 0 9 0"

    def test_tensor(self):
        code, out = cli(["recover-tensor", "--dims", "2,2,2", "--k", "1", "--beta", "2"], "t 1 1 1 2\n")
        assert code == 0 and out.startswith("mode 1:\n") and out.count("mode") == 3
        code, out = cli(["recover-tensor", "--k", "1", "--beta", "2"],
                        "tensor dims=2,2,2\nt 1 1 1 1\nt 2 2 2 1\n")
        assert code == 3 and out == "NONE\n"

    def test_matching(self):
        path = "graph n=4\ne 1 2 +1\ne 2 3 +1\ne 3 4 +1\n"
        assert cli(["matching", "--kprime", "2"], path) == (0, "1 2\n3 4\n")
        assert cli(["matching", "--kprime", "0"], path) == (3, "LARGER_THAN 0\n")

    def test_game(self):
        code, out = cli(["game", "--alg", "enumerate-recover", "--strategy", "collision",
                         "--toy", "--rounds", "5", "--seed", "1"])
        lines = out.splitlines()
        assert code == 0 and len(lines) == 7 and lines[-1].startswith("VERDICT ADVERSARY_WINS")


class TestErrors:
    def test_parse_error_exit_2(self, capsys):
        code, _ = cli(["recover-matrix", "--k", "1", "--beta", "5"], "matrix n=8\nm 9 1 5\n")
        assert code == 2 and "line 2" in capsys.readouterr().err

    def test_missing_header_and_size(self):
        assert cli(["recover-vector", "--k", "1", "--beta", "1"], "v 1 1\n")[0] == 2

    def test_usage_errors(self):
        with pytest.raises(SystemExit) as exc:
            run(["recover-vector", "--n", "x"])
        assert exc.value.code == 1
        assert cli(["recover-vector", "--n", "4"], "")[0] == 1
        assert cli(["recover-tensor", "--dims", "a,b", "--k", "1", "--beta", "1"])[0] == 1

    def test_bad_seed(self):
        out = io.StringIO()
        assert run(["--seed", "zz", "recover-vector", "--n", "4", "--k", "1", "--beta", "1"],
                   stdin=io.StringIO(""), stdout=out) == 1


def test_determinism_across_runs():
    text = "vector n=32\nv 3 5\nv 9 -2\nv 3 -1\n"
    args = ["recover-vector", "--k", "2", "--beta", "9", "--fast"]
    assert cli(args, text) == cli(args, text)
    g = ["game", "--alg", "fast-recover", "--strategy", "oblivious", "--rounds", "10", "--seed", "4"]
    assert cli(g) == cli(g)


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "wbstream.cli", "recover-vector", "--n", "6", "--k", "1", "--beta", "3"],
        input="v 2 -3\n", capture_output=True, text=True,
    )
    assert proc.returncode == 0 and proc.stdout == "2 -3\n"

import io
import json
import logging

import pytest

from app.cli import run
from app.graph_core import load_graph

from .conftest import E1_GRAPH


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def e1_file(tmp_path):
    path = tmp_path / "e1.json"
    path.write_text(json.dumps(E1_GRAPH), encoding="utf-8")
    return str(path)


@pytest.fixture
def write_json(tmp_path):
    def write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)
    return write


@pytest.fixture
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


class TestAnalyze:
    def test_e1(self, e1_file):
        code, out, _ = invoke("analyze", e1_file)
        assert code == 0
        report = json.loads(out)
        assert report["bound"] == 1
        assert report["formula"] == "cor-abelian"

    def test_output_is_stable(self, e1_file):
        assert invoke("analyze", e1_file)[1] == invoke("analyze", e1_file)[1]

    def test_unsupported_graph(self, write_json):
        path = write_json("mixed.json", {
            "vertices": ["p", "q"],
            "edges": [
                {"id": "b", "range": "p", "source": "p"},
                {"id": "c", "range": "q", "source": "q"},
                {"id": "d", "range": "p", "source": "q"},
            ],
        })
        code, out, _ = invoke("analyze", path)
        assert code == 1
        assert json.loads(out)["status"] == "unsupported"

    def test_missing_file(self, tmp_path):
        code, out, err = invoke("analyze", str(tmp_path / "nope.json"))
        assert code == 1
        assert out == ""
        assert json.loads(err)["error"] == "missing-input"

    def test_malformed_graph(self, write_json):
        path = write_json("bad.json", {"vertices": ["v"], "edges": [{"id": "e", "range": "v"}]})
        code, _, err = invoke("analyze", path)
        assert code == 1
        assert json.loads(err)["error"] == "parse-error"

    def test_depth_too_small(self, e1_file):
        code, _, err = invoke("analyze", e1_file, "--depth", "1")
        assert code == 1
        assert json.loads(err)["error"] == "depth-exceeded"


class TestGraphCommands:
    def test_unfurl_dot(self, e1_file):
        code, out, _ = invoke("unfurl", e1_file, "--depth", "4", "--dot")
        assert code == 0
        assert out.startswith('digraph "F" {')

    def test_unfurl_json(self, e1_file):
        code, out, _ = invoke("unfurl", e1_file, "--depth", "4", "--format", "json")
        assert code == 0
        F = load_graph(out)
        assert len(F.vertices) == 6 and len(F.edges) == 5

    def test_paths(self, e1_file):
        code, out, _ = invoke("paths", e1_file)
        assert code == 0
        assert out.splitlines() == ["^a", "e^a"]

    def test_paths_json(self, e1_file):
        _, out, _ = invoke("paths", e1_file, "--json")
        assert json.loads(out)["strata"] == {"2": ["^a", "e^a"]}

    def test_compose(self, e1_file):
        code, out, _ = invoke("compose", e1_file, "(e^a | 2 | ^a)", "(^a | -5 | e^a)")
        assert code == 0
        assert out.strip() == "(e^a | -3 | e^a)"

    def test_inverse_and_quotient(self, e1_file):
        code, out, _ = invoke("compose", e1_file, "(e^a | 2 | ^a)", "--inverse", "--quotient")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "(^a | -2 | e^a)"
        assert "| 1 |" in lines[1]

    def test_inverse_takes_one_element(self, e1_file):
        code, _, _ = invoke("compose", e1_file, "(e^a | 2 | ^a)", "(^a | 0 | ^a)", "--inverse")
        assert code == 64

    def test_not_composable(self, e1_file):
        code, _, err = invoke("compose", e1_file, "(e^a | 0 | ^a)", "(e^a | 0 | ^a)")
        assert code == 1
        assert json.loads(err)["error"] == "non-composable"

    def test_dad(self, e1_file):
        code, out, _ = invoke("dad", e1_file)
        assert code == 0
        payload = json.loads(out)
        assert payload["d"] == 0
        assert payload["fragment"] == "unfurled-quotient"

    def test_dad_on_isotropy_is_inconclusive(self, e1_file):
        code, out, _ = invoke("dad", e1_file, "--element", "(e^a | 1 | e^a)", "--d-max", "1", "--cap", "30")
        assert code == 1
        payload = json.loads(out)
        assert payload["d"] is None
        assert payload["inconclusive"]


class TestGroupoidCommands:
    def test_spectrum_of_a_group(self):
        code, out, _ = invoke("spectrum", "--group", "S3")
        assert code == 0
        payload = json.loads(out)
        assert payload["max_dimension"] == 2
        assert sorted(e["isotropy_degree"] for e in payload["spectrum"]) == [1, 2]

    def test_spectrum_of_the_sign_model(self):
        code, out, _ = invoke("spectrum", "--model", "s3-sign", "--series", "--subhomogeneous", "2")
        assert code == 0
        payload = json.loads(out)
        assert payload["elements"] == 30
        assert payload["orbits"] == [["-2", "2"], ["-1", "1"], ["0"]]
        assert payload["subhomogeneous"]["holds"]
        cores = payload["subhomogeneous"]["abelian_cores"]
        assert sorted(c["index"] for c in cores) == [1, 1, 2]
        assert payload["composition_series"]["applicable"] is False

    def test_group_file(self, write_json):
        path = write_json("z3.json", {"table": [[0, 1, 2], [1, 2, 0], [2, 0, 1]]})
        code, out, _ = invoke("spectrum", "--group-file", path)
        assert code == 0
        assert json.loads(out)["max_dimension"] == 1

    def test_group_file_needs_one_source(self, write_json):
        path = write_json("both.json", {"name": "S3", "table": [[0]]})
        code, _, err = invoke("spectrum", "--group-file", path)
        assert code == 1
        assert json.loads(err)["error"] == "invalid-group"

    def test_action_file(self, write_json):
        path = write_json("swap.json", {
            "group": {"name": "Z/2"},
            "points": ["a", "b"],
            "action": [[0, 1], [1, 0]],
        })
        code, out, _ = invoke("spectrum", "--action", path)
        assert code == 0
        assert json.loads(out)["orbits"] == [["a", "b"]]

    def test_twist_klein4(self):
        code, out, _ = invoke("twist", "--group", "Klein4", "--klein4", "--bound", "4")
        assert code == 0
        payload = json.loads(out)
        assert payload["degrees"] == [2]
        assert payload["bound"]["holds"]

    def test_untwisted(self):
        _, out, _ = invoke("twist", "--group", "Klein4")
        assert json.loads(out)["degrees"] == [1, 1, 1, 1]

    def test_cocycle_file(self, write_json):
        path = write_json("broken.json", {"angles": [["(0,1)", "(0,1)", "1/2"]]})
        code, _, err = invoke("twist", "--group", "Klein4", "--cocycle", path)
        assert code == 1
        assert json.loads(err)["error"] == "invalid-cocycle"

    def test_cocycle_unknown_element(self, write_json):
        path = write_json("unknown.json", {"angles": [["x", "y", "1/2"]]})
        code, _, _ = invoke("twist", "--group", "Klein4", "--cocycle", path)
        assert code == 1


class TestBound:
    def test_integer_output(self):
        code, out, _ = invoke("bound", "cor-abelian", "--dimDual", "1", "--dimG0", "0", "--dad", "0")
        assert code == 0
        assert out == "1\n"

    def test_json_output(self):
        _, out, _ = invoke("bound", "lemma-ext", "--dimI", "1", "--dimQuotient", "0", "--json")
        assert json.loads(out)["bound"] == 1

    def test_missing_input(self):
        code, _, err = invoke("bound", "thm-main", "--supPrim", "1")
        assert code == 1
        assert json.loads(err)["error"] == "missing-input"

    def test_negative_input(self):
        code, _, _ = invoke("bound", "cor-compact", "--dimG0", "-1", "--dad", "0")
        assert code == 1

    def test_unknown_formula(self):
        assert invoke("bound", "thm-nope")[0] == 64


class TestUsage:
    def test_unknown_command(self):
        code, _, err = invoke("frobnicate")
        assert code == 64
        assert "groupoid-dim" in err

    def test_missing_argument(self):
        assert invoke("analyze")[0] == 64

    def test_help(self, capsys):
        assert invoke("--help")[0] == 0

    def test_verbose_logs_to_stderr(self, e1_file, restore_logging):
        code, _, err = invoke("paths", e1_file, "-v")
        assert code == 0
        assert "DEBUG" in err

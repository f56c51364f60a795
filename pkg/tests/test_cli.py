from __future__ import annotations

import json
import subprocess
import sys

import pytest

from cuphom.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, (json.loads(out) if out else None), err


@pytest.fixture
def fx(fixtures_dir):
    return lambda name: str(fixtures_dir / name)


class TestCup:
    def test_single_triple(self, capsys, fx):
        code, obj, _ = run_json(capsys, "cup", fx("form_l3_m1.json"))
        assert code == 0
        assert obj["rank_f2"] == 6 and obj["rank_q"] == 6 and obj["two_torsion"] is False
        assert sum(obj["by_degree"]) == 6

    def test_empty_l2(self, capsys, fx):
        code, obj, _ = run_json(capsys, "cup", fx("form_l2_empty.json"))
        assert code == 0 and obj["rank_f2"] == obj["rank_q"] == 4

    def test_two_torsion(self, capsys, fx):
        code, obj, _ = run_json(capsys, "cup", fx("form_l3_m2.json"))
        assert (obj["rank_f2"], obj["rank_q"], obj["two_torsion"]) == (8, 6, True)

    def test_ring_selection(self, capsys, fx):
        _, obj, _ = run_json(capsys, "cup", fx("form_l3_m2.json"), "--ring", "f2")
        assert obj["rank_f2"] == 8 and obj["rank_q"] is None

    def test_linked_rejected(self, capsys, fx):
        code, out, err = run(capsys, "cup", fx("form_linked.json"))
        assert code == 3 and out == "" and "split" in err

    def test_malformed(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"ell": 3, "triples": [[1,2,3,1]], "bogus": 0}')
        assert run(capsys, "cup", bad)[0] == 2
        bad.write_text("{not json")
        assert run(capsys, "cup", bad)[0] == 2
        assert run(capsys, "cup", tmp_path / "missing.json")[0] == 2

    def test_argparse_errors(self, capsys):
        assert run(capsys, "cup", "--ring", "z")[0] == 2
        assert run(capsys, "nonsense")[0] == 2
        assert run(capsys, "cup")[0] == 2

    def test_check_only(self, capsys, fx):
        code, obj, _ = run_json(capsys, "cup", fx("form_two_triples.json"), "--check")
        assert code == 0 and obj == {"valid": True, "ell": 5, "complexity": 2}

    def test_random_is_seeded(self, capsys):
        first = run(capsys, "cup", "--random", 5, "--seed", 3)[1]
        second = run(capsys, "cup", "--random", 5, "--seed", 3)[1]
        assert first == second and "form" in json.loads(first)

    def test_text_format(self, capsys, fx):
        code, out, _ = run(capsys, "cup", fx("form_l3_m1.json"), "--format", "text")
        assert code == 0 and "rank_f2: 6" in out.splitlines()


class TestSurgeryKnot:
    def test_unknot(self, capsys, fx):
        code, obj, _ = run_json(capsys, "surgery-knot", fx("unknot.json"), "-n", 0)
        assert code == 0 and obj["classes"]["0"] == 2 and obj["stable"]
        _, obj, _ = run_json(capsys, "surgery-knot", fx("unknot.json"), "-n", 5)
        assert obj["classes"] == {str(s): 1 for s in range(5)} and obj["total_rank"] == 5

    def test_trefoil(self, capsys, fx):
        for n in (1, -1):
            code, obj, _ = run_json(capsys, "surgery-knot", fx("trefoil.json"), "--framing", n)
            assert code == 0 and obj["classes"] == {"0": 1}

    def test_truncation(self, capsys, fx):
        code, obj, _ = run_json(capsys, "surgery-knot", fx("trefoil.json"), "-n", 1, "--truncation", 6)
        assert code == 0 and obj["truncation"] == 6 and obj["stable_against"] == 9
        code, _, err = run(capsys, "surgery-knot", fx("trefoil.json"), "-n", 1, "--truncation", 1)
        assert code == 3 and "truncation" in err

    def test_inconsistent_entry_named(self, capsys, tmp_path):
        bad = tmp_path / "knot.json"
        bad.write_text(
            json.dumps(
                {
                    "generators": [{"name": "a", "A": 1, "M": 0}, {"name": "b", "A": -1, "M": -1}],
                    "differential": [{"from": "b", "to": "a", "nz": 0, "nw": 1}],
                }
            )
        )
        code, out, err = run(capsys, "surgery-knot", bad, "-n", 1)
        assert code == 3 and out == "" and "b->a" in err

    def test_framing_required(self, capsys, fx):
        assert run(capsys, "surgery-knot", fx("unknot.json"))[0] == 2

    def test_check_only(self, capsys, fx):
        code, obj, _ = run_json(capsys, "surgery-knot", fx("trefoil.json"), "-n", 1, "--check")
        assert code == 0 and obj == {"valid": True, "generators": 3}


class TestHypercube:
    def test_cup_model(self, capsys, fx):
        code, obj, _ = run_json(capsys, "hypercube", fx("cup_model_l3.json"))
        assert code == 0
        assert obj["d1_zero"] and obj["d2_zero"] and obj["nonzero_differentials"] == [3]
        assert obj["collapse_page"] == 4 and obj["e_infinity"] == obj["total_homology"] == 6 and obj["agree"]

    def test_pages_flag(self, capsys, fx):
        _, obj, _ = run_json(capsys, "hypercube", fx("cup_model_l3.json"), "--pages", 2)
        assert [pg["r"] for pg in obj["pages"]] == [1, 2]
        assert run(capsys, "hypercube", fx("cup_model_l3.json"), "--pages", 0)[0] == 2

    def test_zero_cube(self, capsys, fx):
        code, obj, _ = run_json(capsys, "hypercube", fx("zero_cube_l2.json"))
        assert code == 0 and obj["collapse_page"] == 1

    def test_broken_relations(self, capsys, fx):
        code, obj, err = run_json(capsys, "hypercube", fx("broken_square.json"))
        assert code == 4
        assert obj["relations"]["violations"] == [{"eps": "00", "eps_prime": "11", "nonzero_entries": 1}]
        assert "relation failure" in err

    def test_compresses_boxes(self, capsys, tmp_path, rng):
        from cuphom.hypercube import random_hyperbox

        path = tmp_path / "box.json"
        path.write_text(json.dumps(random_hyperbox(rng, (2, 1)).to_json_obj()))
        code, obj, _ = run_json(capsys, "hypercube", path)
        assert code == 0 and obj["compressed"] and obj["size"] == [2, 1] and obj["agree"]

    def test_check_only(self, capsys, fx):
        code, obj, _ = run_json(capsys, "hypercube", fx("cup_model_l3.json"), "--check")
        assert code == 0 and obj["relations"]["ok"] and "pages" not in obj


class TestReduce:
    def test_single_triple(self, capsys, fx):
        code, obj, _ = run_json(capsys, "reduce", fx("form_l3_m1.json"))
        assert code == 0 and obj["depth"] == 0 and obj["leaf_complexities"] == [1] and obj["all_checks_pass"]

    def test_two_triples(self, capsys, fx):
        _, obj, _ = run_json(capsys, "reduce", fx("form_two_triples.json"))
        assert obj["depth"] == 1 and obj["leaf_complexities"] == [1, 1]
        root = obj["ledger"][0]
        assert root["kind"] == "connect_sum" and root["psi_check"] and root["bound_holds"]
        assert [row["rank_f2"] for row in obj["ledger"][1:]] == [24, 24]

    def test_three_triples(self, capsys, fx):
        _, obj, _ = run_json(capsys, "reduce", fx("form_three_triples.json"))
        assert obj["depth"] == 2 and obj["leaves_ok"] and obj["all_checks_pass"]

    def test_random(self, capsys):
        code, obj, _ = run_json(capsys, "reduce", "--random", 6, "--seed", 11)
        assert code == 0 and obj["leaves_ok"] and obj["all_checks_pass"]

    def test_random_and_input_conflict(self, capsys, fx):
        assert run(capsys, "reduce", fx("form_l3_m1.json"), "--random", 4)[0] == 2


def test_module_entry_point(fixtures_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "cuphom", "cup", str(fixtures_dir / "form_l3_m1.json")],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["rank_f2"] == 6


def test_output_is_byte_stable(capsys, fx):
    first = run(capsys, "reduce", fx("form_three_triples.json"))[1]
    assert run(capsys, "reduce", fx("form_three_triples.json"))[1] == first

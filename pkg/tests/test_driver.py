from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from oracles import FIXTURES, PROGRAMS, answer_blocks, normalize_answer
from symerl.cli import main
from symerl.driver import (
    CONFIRMED, int_list_skeleton, parse_fun, read_json, render, render_json, skeletons, term_skeleton,
    verify,
)
from symerl.syntax import FunName
from symerl.terms import INT, NIL, Cons

SUM_FILE = str(FIXTURES / "sum_list.cerl-min")
GOLDEN = [
    "In=[cons(lit(Type,_V),lit(list,nil))], Err=badarith, dif(Type,int), dif(Type,float)",
    "In=[L], Err=match_fail, dif(L,cons(_Head,_Tail)), dif(L,lit(list,nil))",
]


def cli(*args) -> tuple[int, str, str]:
    env = dict(os.environ, SYMERL_SEED="0")
    proc = subprocess.run([sys.executable, "-m", "symerl.cli", *args], capture_output=True, text=True,
                          env=env, timeout=120)
    return proc.returncode, proc.stdout, proc.stderr


# -- skeletons -------------------------------------------------------------------------

def test_int_list_skeleton_lengths():
    sks = list(int_list_skeleton(3))
    assert [s.label for s in sks] == [f"int-list length {n}" for n in (3, 2, 1, 0)]
    three = sks[0].inputs[0]
    assert isinstance(three, Cons) and three.head.tag == INT
    assert sks[-1].inputs == [NIL]


def test_term_skeleton_and_errors():
    sk = term_skeleton("cons(lit(int,N),lit(list,nil))", 1)
    assert sk.inputs[0].tail == NIL and sk.inputs[0].head.tag == INT
    with pytest.raises(ValueError):
        term_skeleton("[lit(int,1), lit(int,2)]", 1)
    with pytest.raises(ValueError):
        list(skeletons("bogus", ["X"]))
    with pytest.raises(ValueError):
        list(skeletons("int-list:2", ["X", "Y"]))


def test_parse_fun():
    assert parse_fun("sum/1") == FunName("sum", 1)
    assert parse_fun("'Odd name'/0") == FunName("Odd name", 0)
    with pytest.raises(ValueError):
        parse_fun("sum")


# -- verification ----------------------------------------------------------------------

def test_golden_answers():
    text = render(verify(SUM_FILE, "sum/1", 20))
    blocks = {normalize_answer(b) for b in answer_blocks(text)}
    for want in GOLDEN:
        assert normalize_answer(want) in blocks


def test_badarith_answer_comes_first():
    v = verify(SUM_FILE, "sum/1", 20)
    first = v.answers[0]
    assert normalize_answer(" ".join(first.text_block())) == normalize_answer(GOLDEN[0])


def test_certification_of_int_lists():
    v = verify(SUM_FILE, "sum/1", 100, "int-list:100")
    assert v.certified and v.answers == [] and v.exit_code == 0
    assert len(v.skeletons) == 101


@pytest.mark.parametrize("path, fun", PROGRAMS)
def test_every_answer_is_confirmed(path, fun):
    v = verify(FIXTURES / path, fun, 20)
    assert v.answers
    assert all(a.status == CONFIRMED and a.witness for a in v.answers)


def test_max_answers_truncates():
    v = verify(SUM_FILE, "sum/1", 20, max_answers=3)
    assert len(v.answers) == 3 and v.truncated and not v.certified


def test_term_skeleton_run():
    v = verify(SUM_FILE, "sum/1", 5, "term:cons(lit(atom,a),lit(list,nil))")
    assert [a.error for a in v.answers] == ["badarith"]


def test_json_round_trip():
    v = verify(FIXTURES / "pair.cerl-min", "ratio/1", 10)
    text = render_json(v)
    back = read_json(text)
    v.elapsed = round(v.elapsed, 6)  # the report keeps microseconds
    assert back == v
    data = json.loads(text)
    assert data["function"] == "ratio/1" and data["answers"][0]["status"] == CONFIRMED


def test_text_report_has_no_timing():
    v = verify(FIXTURES / "pair.cerl-min", "ratio/1", 10)
    v.elapsed = 123.456
    assert "123" not in render(v)


def test_cut_without_answers_is_exit_3(tmp_path):
    src = tmp_path / "loop.cerl-min"
    src.write_text("module m = f/1 = fun (X) -> apply 'f'/1 (X) end")
    v = verify(src, "f/1", 5)
    assert v.answers == [] and not v.certified and v.exit_code == 3
    assert "cut by bound 5" in render(v)


# -- command line ------------------------------------------------------------------------

def test_cli_exit_codes(tmp_path, capsys):
    assert main(["verify", SUM_FILE, "--fun", "sum/1", "--bound", "5"]) == 1
    assert main(["verify", SUM_FILE, "--fun", "sum/1", "--bound", "10", "--skeleton", "int-list:5"]) == 0
    assert main(["verify", SUM_FILE, "--fun", "nope/1", "--bound", "5"]) == 2
    assert main(["verify", str(tmp_path / "missing.cerl-min"), "--fun", "f/0", "--bound", "1"]) == 2
    bad = tmp_path / "bad.cerl-min"
    bad.write_text("module m = f/0 = fun () -> Y end")
    assert main(["verify", str(bad), "--fun", "f/0", "--bound", "1"]) == 2
    assert "bad.cerl-min:1:" in capsys.readouterr().err
    loop = tmp_path / "loop.cerl-min"
    loop.write_text("module m = f/1 = fun (X) -> apply 'f'/1 (X) end")
    assert main(["verify", str(loop), "--fun", "f/1", "--bound", "3"]) == 3
    assert main(["verify", SUM_FILE, "--fun", "sum/1", "--bound", "-1"]) == 2


def test_cli_dump_facts(capsys):
    main(["verify", SUM_FILE, "--fun", "sum/1", "--bound", "0", "--dump-facts"])
    assert capsys.readouterr().out.startswith("fundef(lit(atom,'sum_list'),var('sum',1),")


def test_cli_json(capsys):
    main(["verify", SUM_FILE, "--fun", "sum/1", "--bound", "3", "--format", "json"])
    data = json.loads(capsys.readouterr().out)
    assert data["certified"] is False and data["answers"]


def test_cli_is_deterministic():
    args = ("verify", SUM_FILE, "--fun", "sum/1", "--bound", "20", "--skeleton", "general", "--format", "text")
    first = cli(*args)
    second = cli(*args)
    assert first[0] == 1
    assert first[1] == second[1] and first[1]

from __future__ import annotations

import pytest

from oracles import FIXTURES, PROGRAMS, completeness
from symerl.driver import load, parse_fun, verify


@pytest.mark.parametrize("path, fun", PROGRAMS)
def test_every_small_crash_is_admitted(path, fun):
    """Ground inputs up to depth 3 that crash within 50 applications are all covered."""
    v = verify(FIXTURES / path, fun, 50)
    stats = completeness(load(FIXTURES / path), parse_fun(fun), v.answers, depth=3, steps=50)
    assert stats["crashes"] > 0
    assert stats["misses"] == []


def test_missing_answer_is_noticed():
    # without the match_fail answers, the non-list inputs of sum go uncovered
    v = verify(FIXTURES / "sum_list.cerl-min", "sum/1", 10)
    kept = [a for a in v.answers if a.error != "match_fail"]
    assert len(kept) < len(v.answers)
    stats = completeness(load(FIXTURES / "sum_list.cerl-min"), parse_fun("sum/1"), kept, depth=2, steps=10)
    assert stats["misses"] and all(err == "match_fail" for err, _ in stats["misses"])


def test_short_bound_misses_deep_crashes():
    # a bound-1 run cannot explain a badarith at the third element
    v = verify(FIXTURES / "sum_list.cerl-min", "sum/1", 1)
    stats = completeness(load(FIXTURES / "sum_list.cerl-min"), parse_fun("sum/1"), v.answers, depth=3, steps=50)
    assert any(err == "badarith" for err, _ in stats["misses"])

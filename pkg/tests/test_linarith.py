from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

from symerl.linarith import SAT, UNKNOWN, UNSAT, LinCon, project, rational_model, solve

X, Y, Z = "x", "y", "z"
GRID = [Fraction(n, 2) for n in range(-8, 9)]
INT_GRID = list(range(-6, 7))


def random_system(rng: random.Random, names=(X, Y, Z)) -> list[LinCon]:
    out = []
    for _ in range(rng.randint(1, 4)):
        vs = rng.sample(names, rng.randint(1, len(names)))
        coeffs = {v: rng.choice([-2, -1, 1, 2]) for v in vs}
        out.append(LinCon.make(coeffs, rng.choice(["=", "!=", "<", "<="]), rng.randint(-4, 4)))
    return out


def grid_solution(cons, names, values):
    for point in itertools.product(values, repeat=len(names)):
        model = dict(zip(names, point))
        if all(c.holds(model) for c in cons):
            return model
    return None


def test_strict_contradiction():
    assert solve([LinCon.make({X: 1}, "<", 0), LinCon.make({X: -1}, "<", 0)])[0] == UNSAT


def test_equalities_imply_value():
    status, model = solve([LinCon.make({X: 1, Y: 1}, "=", 3), LinCon.make({X: 1}, "=", 1)])
    assert status == SAT and model[Y] == 2


def test_integrality():
    assert solve([LinCon.make({X: 2}, "=", 1)], int_vars=[X])[0] == UNSAT
    status, model = solve([LinCon.make({X: 2}, "=", 1)])
    assert status == SAT and model[X] == Fraction(1, 2)


def test_disequality_split():
    cons = [LinCon.make({X: 1}, "<=", 1), LinCon.make({X: 1}, "<=", 1),
            LinCon.make({X: -1}, "<=", -1), LinCon.make({X: 1}, "!=", 1)]
    assert solve(cons)[0] == UNSAT
    cons = [LinCon.make({X: 1}, "<=", 2), LinCon.make({X: -1}, "<=", 0), LinCon.make({X: 1}, "!=", 0)]
    status, model = solve(cons, int_vars=[X])
    assert status == SAT and model[X] in (1, 2)


def test_unbounded_integer_search_is_unknown_not_unsat():
    # 3x = 2y + 1 with x, y > bound: solutions exist but lie outside a tiny window
    cons = [LinCon.make({X: 3, Y: -2}, "=", 1), LinCon.make({X: -1}, "<", -10)]
    status, _ = solve(cons, int_vars=[X, Y], bound=2)
    assert status in (SAT, UNKNOWN)


def test_bad_relation_rejected():
    with pytest.raises(ValueError):
        LinCon.make({X: 1}, ">", 0)


@pytest.mark.parametrize("seed", range(4))
def test_rational_solve_against_grid(seed):
    rng = random.Random(seed)
    for _ in range(100):
        cons = random_system(rng)
        status, model = solve(cons)
        if status == SAT:
            assert all(c.holds(model) for c in cons)
        found = grid_solution(cons, (X, Y, Z), GRID)
        if found is not None:
            assert status == SAT, (cons, found)
        if status == UNSAT:
            assert found is None


@pytest.mark.parametrize("seed", range(4))
def test_integer_solve_against_enumeration(seed):
    rng = random.Random(100 + seed)
    for _ in range(100):
        cons = random_system(rng, (X, Y))
        status, model = solve(cons, int_vars=[X, Y], bound=16)
        found = grid_solution(cons, (X, Y), INT_GRID)
        if status == SAT:
            assert all(c.holds(model) for c in cons)
            assert all(model[v].denominator == 1 for v in (X, Y) if v in model)
        if found is not None:
            assert status == SAT, (cons, found)


@pytest.mark.parametrize("seed", range(3))
def test_projection_is_implied(seed):
    rng = random.Random(200 + seed)
    for _ in range(100):
        cons = random_system(rng)
        proj = project(cons, {X})
        assert all(c.vars <= {X} for c in proj)
        for point in itertools.product(GRID[::2], repeat=3):
            model = dict(zip((X, Y, Z), point))
            if all(c.holds(model) for c in cons):
                assert all(c.holds(model) for c in proj)


def test_projection_keeps_exact_shadow():
    # x = y + 1, 0 <= y <= 2  projects to 1 <= x <= 3
    cons = [LinCon.make({X: 1, Y: -1}, "=", 1), LinCon.make({Y: -1}, "<=", 0), LinCon.make({Y: 1}, "<=", 2)]
    proj = project(cons, {X})
    for x in GRID:
        assert all(c.holds({X: x}) for c in proj) == (1 <= x <= 3)


def test_rational_model_of_empty_system():
    assert rational_model([]) == {}

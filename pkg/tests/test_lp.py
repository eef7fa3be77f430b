import math

import numpy as np
import pytest

from conftest import random_lp
from reservoirplan import lp


def test_bound_only_problem():
    p = lp.LpProblem()
    x = p.add_variable("x", 0.0, 5.0)
    p.set_objective_coefficient(x, 1.0)
    s = lp.solve(p)
    assert s.status == lp.OPTIMAL
    assert s.objective == pytest.approx(5.0, abs=1e-9)
    assert s.values[x] == pytest.approx(5.0, abs=1e-9)


def test_simplex_on_one_face():
    p = lp.LpProblem()
    x = p.add_variable("x")
    y = p.add_variable("y")
    p.set_objective_coefficient(x, 1.0)
    p.set_objective_coefficient(y, 1.0)
    p.add_constraint([(x, 1.0), (y, 1.0)], lp.LESS_EQUAL, 1.0)
    s = lp.solve(p)
    assert s.status == lp.OPTIMAL
    assert s.objective == pytest.approx(1.0, abs=1e-9)


def test_equality_and_free_variables():
    p = lp.LpProblem()
    x = p.add_variable("x", -math.inf, math.inf)
    z = p.add_variable("z", -math.inf, math.inf)
    p.set_objective_coefficient(z, -1.0)
    p.add_constraint([(z, 1.0), (x, -1.0)], lp.GREATER_EQUAL, 0.0)
    p.add_constraint([(z, 1.0), (x, 1.0)], lp.GREATER_EQUAL, 0.0)
    p.add_constraint([(x, 1.0)], lp.EQUAL, 3.0)
    s = lp.solve(p)
    assert s.status == lp.OPTIMAL
    assert s.objective == pytest.approx(-3.0, abs=1e-8)


def test_oracle_matches_listed_cases():
    p = lp.LpProblem()
    x = p.add_variable("x", 0.0, 5.0)
    p.set_objective_coefficient(x, 1.0)
    assert lp.oracle_solve(p).objective == pytest.approx(5.0)

    p = lp.LpProblem()
    x = p.add_variable("x")
    y = p.add_variable("y")
    p.set_objective_coefficient(x, 1.0)
    p.set_objective_coefficient(y, 1.0)
    p.add_constraint([(x, 1.0), (y, 1.0)], lp.LESS_EQUAL, 1.0)
    assert lp.oracle_solve(p).objective == pytest.approx(1.0)


def test_infeasible_box():
    p = lp.LpProblem()
    p.add_variable("x", 2.0, 1.0)
    assert lp.oracle_solve(p).status == lp.INFEASIBLE
    assert lp.solve(p).status == lp.INFEASIBLE


def test_unbounded_above():
    p = lp.LpProblem()
    x = p.add_variable("x", 0.0, math.inf)
    p.set_objective_coefficient(x, 1.0)
    assert lp.oracle_solve(p).status == lp.UNBOUNDED
    s = lp.solve(p)
    assert s.status == lp.UNBOUNDED
    assert s.ray is not None and s.ray[x] > 0


def test_infeasible_constraints():
    p = lp.LpProblem()
    x = p.add_variable("x", 0.0, 10.0)
    p.add_constraint([(x, 1.0)], lp.GREATER_EQUAL, 5.0)
    p.add_constraint([(x, 1.0)], lp.LESS_EQUAL, 2.0)
    assert lp.solve(p).status == lp.INFEASIBLE
    assert lp.oracle_solve(p).status == lp.INFEASIBLE


def test_unbounded_ray_improves_objective():
    p = lp.LpProblem()
    x = p.add_variable("x", 0.0, math.inf)
    y = p.add_variable("y", 0.0, math.inf)
    p.set_objective_coefficient(x, 1.0)
    p.set_objective_coefficient(y, 0.5)
    p.add_constraint([(x, 1.0), (y, -1.0)], lp.LESS_EQUAL, 4.0)
    s = lp.solve(p)
    assert s.status == lp.UNBOUNDED
    gain = float(np.dot(p.objective_vector(), s.ray))
    assert gain > 1e-9


def test_oracle_rejects_oversized_problems():
    p = lp.LpProblem()
    for j in range(13):
        p.add_variable(f"x{j}", 0.0, 1.0)
    with pytest.raises(ValueError, match="at most 12"):
        lp.oracle_solve(p)


def test_solver_matches_oracle_on_50_random_boxed_instances():
    rng = np.random.default_rng(1729)
    optimal_seen = 0
    for _ in range(50):
        p = random_lp(rng, anchored=True)
        s = lp.solve(p)
        o = lp.oracle_solve(p)
        assert s.status == o.status
        if s.status == lp.OPTIMAL:
            optimal_seen += 1
            assert s.objective == pytest.approx(o.objective, abs=1e-7)
            assert lp.constraint_violation(p, s.values) <= 1e-7
    assert optimal_seen >= 40


def test_solver_matches_oracle_including_infeasible_instances():
    rng = np.random.default_rng(888)
    statuses = set()
    for _ in range(60):
        p = random_lp(rng, anchored=False)
        s = lp.solve(p)
        o = lp.oracle_solve(p)
        assert s.status == o.status
        statuses.add(s.status)
        if s.status == lp.OPTIMAL:
            assert s.objective == pytest.approx(o.objective, abs=1e-7)
    assert lp.INFEASIBLE in statuses and lp.OPTIMAL in statuses


def test_objective_scaling_invariance():
    rng = np.random.default_rng(4242)
    for _ in range(20):
        p = random_lp(rng, anchored=True)
        s1 = lp.solve(p)
        if s1.status != lp.OPTIMAL:
            continue
        lam = float(rng.uniform(0.5, 10.0))
        original = dict(p.objective)
        for idx, coef in original.items():
            p.set_objective_coefficient(idx, lam * coef)
        s2 = lp.solve(p)
        for idx, coef in original.items():
            p.set_objective_coefficient(idx, coef)
        assert s2.status == lp.OPTIMAL
        assert s2.objective == pytest.approx(
            lam * s1.objective, rel=1e-6, abs=1e-9)


def test_iteration_limit_is_distinguishable():
    p = lp.LpProblem()
    x = p.add_variable("x", 0.0, 5.0)
    y = p.add_variable("y", 0.0, 5.0)
    p.set_objective_coefficient(x, 1.0)
    p.set_objective_coefficient(y, 1.0)
    p.add_constraint([(x, 1.0), (y, 1.0)], lp.LESS_EQUAL, 3.0)
    forced = lp.solve(p, max_iterations=0)
    assert forced.status == lp.ITERATION_LIMIT
    assert lp.solve(p).status == lp.OPTIMAL


def test_mps_round_trip():
    rng = np.random.default_rng(303)
    for _ in range(10):
        p = random_lp(rng, anchored=True)
        text = lp.to_mps(p)
        q = lp.from_mps(text)
        assert q.num_variables == p.num_variables
        assert q.num_constraints == p.num_constraints
        sp, sq = lp.solve(p), lp.solve(q)
        assert sp.status == sq.status
        if sp.status == lp.OPTIMAL:
            assert sq.objective == pytest.approx(sp.objective, abs=1e-9)


def test_mps_round_trip_free_and_fixed_bounds():
    p = lp.LpProblem("edge")
    p.add_variable("free", -math.inf, math.inf)
    p.add_variable("fixed", 2.5, 2.5)
    p.add_variable("upper_only", -math.inf, 3.0)
    p.set_objective_coefficient(0, 1.0)
    p.add_constraint([(0, 1.0), (2, 1.0)], lp.LESS_EQUAL, 1.0)
    q = lp.from_mps(lp.to_mps(p))
    assert q.lower == p.lower
    assert q.upper == p.upper


def test_mps_parse_error_context():
    with pytest.raises(ValueError, match="line"):
        lp.from_mps("NAME x\nROWS\n Z  BAD\nENDATA\n")

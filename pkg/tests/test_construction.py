import numpy as np
import pytest

from chshq.construction import (ExcludedPointError, GridLine, GridPoint, UnsupportedConstructionError,
                                alice_rule, bob_rule, build_grid, build_strategy, construct, dedup_lines,
                                derive_params, grid_incidences, transform_line, transform_point,
                                TaggedLineSet)
from chshq.incidence import on_line, validate_unambiguous


@pytest.mark.parametrize("p, p1, p2, strict, sandwich, big", [
    (101, 4, 24, True, True, False),
    (1499, 10, 148, True, True, False),
    (40009, 34, 1176, True, True, True),
    (32771, 32, 1024, False, True, True),
    (1009, 10, 100, False, True, False),
])
def test_derive_params(p, p1, p2, strict, sandwich, big):
    params = derive_params(p)
    assert (params.p1, params.p2) == (p1, p2)
    assert params.bound_p1sq_lt_p2 is strict
    assert params.bound_sandwich is sandwich
    assert params.p1_gt_30 is big


def test_derive_params_rejects_small_and_composite():
    with pytest.raises(UnsupportedConstructionError):
        derive_params(7)
    with pytest.raises(ValueError):
        derive_params(8)


def direct_grid_incidences(params):
    points, lines = build_grid(params)
    return sum(g.a == l.y * g.x + l.b for g in points for l in lines)


@pytest.mark.parametrize("p, n_points, n_lines, incidences", [(101, 96, 24, 96), (1499, 1480, 370, 3700)])
def test_build_grid(p, n_points, n_lines, incidences):
    params = derive_params(p)
    points, lines = build_grid(params)
    assert (len(points), len(lines)) == (n_points, n_lines)
    assert points == sorted(points) and lines == sorted(lines)
    assert grid_incidences(params) == incidences == direct_grid_incidences(params)
    assert incidences == params.p1 ** 2 * params.p2 // 4


@pytest.mark.parametrize("p", [101, 1009, 1499, 40009, 32771])
def test_lines_never_wrap(p):
    params = derive_params(p)
    p1, p2 = params.p1, params.p2
    assert p2 // 2 - 1 + (p1 // 2 - 1) * (p1 - 1) < p2
    assert grid_incidences(params) == p1 * p1 * p2 // 4


def test_transform_examples():
    params = derive_params(101)
    assert transform_point(GridPoint(1, 0), params) == (80, 1)
    assert transform_point(GridPoint(1, 2), params) == (23, 93)
    assert transform_line(GridLine(1, 1), params) == (46, 45)
    assert transform_line(GridLine(0, 0), params) == (0, 1)
    with pytest.raises(ExcludedPointError):
        transform_point(GridPoint(0, 0), params)


@pytest.mark.parametrize("p", [101, 1499])
def test_transformation_preserves_incidence(p):
    params = derive_params(p)
    points, lines = build_grid(params)
    points = points[1:]
    tp = [transform_point(g, params) for g in points]
    tl = [transform_line(l, params) for l in lines]
    for g, pt in zip(points, tp):
        for l, ln in zip(lines, tl):
            assert (g.a == l.y * g.x + l.b) == on_line(pt, ln, p)
    assert len({pt.x for pt in tp}) == len(tp)


def test_vectorized_pipeline_matches_scalar_maps():
    c = construct(1499)
    points, lines = build_grid(c.params)
    assert [tuple(t) for t in c.points] == [transform_point(g, c.params) for g in points[1:]]
    assert [tuple(t) for t in c.lines] == [transform_line(l, c.params) for l in lines]
    assert c.lines.sources.tolist() == [list(l) for l in lines]


def test_dedup_keeps_smallest_source():
    c = construct(101)
    kept = {tuple(src) for src in c.kept.sources.tolist()}
    zero_slope = [tuple(src) for src, s in zip(c.lines.sources.tolist(), c.lines.slopes.tolist()) if s == 0]
    assert zero_slope == [(y, 0) for y in range(c.params.p1 // 2)]
    assert (0, 0) in kept and all(src not in kept for src in zero_slope[1:])
    assert validate_unambiguous(c.points, c.kept).duplicate_slope_count == 0
    # for every slope, the kept source is the smallest one carrying that slope
    best = {}
    for src, s in zip(c.lines.sources.tolist(), c.lines.slopes.tolist()):
        best.setdefault(s, tuple(src))
    assert kept == set(best.values())


def test_dedup_identity_on_distinct_slopes():
    lines = TaggedLineSet(11, np.array([[3, 1], [1, 2], [5, 0]]), np.array([[0, 1], [1, 0], [0, 2]]))
    out = dedup_lines(lines)
    assert np.array_equal(out.data, lines.data) and np.array_equal(out.sources, lines.sources)


def test_dedup_ties_and_order():
    lines = TaggedLineSet(11, np.array([[3, 1], [3, 2], [4, 0], [3, 5]]),
                          np.array([[1, 0], [0, 4], [0, 0], [0, 2]]))
    out = dedup_lines(lines)
    assert out.data.tolist() == [[4, 0], [3, 5]]


@pytest.mark.parametrize("p, wins", [(101, 240), (1009, 3859), (1499, 5719)])
def test_build_strategy_report(p, wins):
    s, rep = build_strategy(p)
    params = rep.params
    assert rep.pre_incidences == params.p1 ** 2 * params.p2 // 4
    assert rep.lines_kept + rep.lines_removed == rep.lines_total == params.p1 * params.p2 // 4
    assert rep.points_total == params.p1 * params.p2 - 1
    # each kept line keeps all p1 grid points except (0, 0) on line (0, 0)
    assert rep.post_incidence_count == rep.lines_kept * params.p1 - 1
    assert rep.win_count == wins  # frozen from a pure-Python double loop
    assert rep.win_count >= rep.post_incidence_count


def test_build_strategy_unsupported():
    with pytest.raises(UnsupportedConstructionError):
        build_strategy(7)


def test_alice_rule_examples():
    params = derive_params(101)
    assert alice_rule(0, params) == 0
    assert alice_rule(23, params) == 93
    s, _ = build_strategy(101, with_evaluation=False)
    # inputs whose inverse decomposes to x' >= p1 fall back to 0
    outside = [x for x in range(1, 101) if params.p2 * (params.p1 - 1) < pow(x, -1, 101) <= 101 - params.p2]
    assert len(outside) == 5
    assert all(alice_rule(x, params) == 0 == s.alice[x] for x in outside)


def test_bob_rule_examples():
    params = derive_params(101)
    assert bob_rule(46, params) == 56
    assert (93 + 56 - 23 * 46) % 101 == 0
    assert bob_rule(0, params) == 100
    s, _ = build_strategy(101, with_evaluation=False)
    unmatched = [beta for beta in range(101) if s.bob[beta] == 0]
    assert unmatched and all(bob_rule(b, params) == 0 for b in unmatched)


@pytest.mark.parametrize("p", [101, 1009, 1499])
def test_rules_match_tables(p):
    s, _ = build_strategy(p, with_evaluation=False)
    params = derive_params(p)
    assert [alice_rule(x, params) for x in range(p)] == s.alice.tolist()
    assert [bob_rule(b, params) for b in range(p)] == s.bob.tolist()

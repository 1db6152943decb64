import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lidar_cover import build_qubo, decode, energy, slack_width
from lidar_cover.errors import InfeasibleError, ValidationError
from lidar_cover.graph import from_coverage
from lidar_cover.qubo import Qubo, energies
from oracles import slack_minimized, uncovered_count


def covered_graph(cover):
    """Graph over the street ids that appear in ``cover`` (renumbered densely)."""
    ids = sorted({s for c in cover for s in c})
    index = {s: k for k, s in enumerate(ids)}
    return from_coverage([[index[s] for s in c] for c in cover], len(ids))


@pytest.mark.parametrize("degree, binary, one_hot", [
    (1, 0, 1), (2, 1, 2), (3, 2, 3), (4, 2, 4), (5, 3, 5), (8, 3, 8), (9, 4, 9),
])
def test_slack_width(degree, binary, one_hot):
    assert slack_width(degree, "binary") == binary
    assert slack_width(degree, "one_hot") == one_hot


def test_slack_width_degree_zero():
    with pytest.raises(InfeasibleError):
        slack_width(0, "binary")


@settings(max_examples=200)
@given(st.integers(1, 10_000))
def test_binary_width_is_ceil_log2(d):
    # 2^k >= d > 2^(k-1)
    k = slack_width(d, "binary")
    assert 2 ** k >= d and (k == 0 or 2 ** (k - 1) < d)
    assert k <= slack_width(d, "one_hot")


def test_toy_1_four_variables(toy_graphs):
    assert build_qubo(toy_graphs[1], "binary", 0.2).num_vars == 4


def test_toy_11_variables(toy_graphs):
    assert build_qubo(toy_graphs[11], "binary", 1.5).num_vars == 111


def test_toy_1_energy_anchor(toy_graphs):
    # x = (1, 0): min over slack bits is exactly one active sensor
    q = build_qubo(toy_graphs[1], "binary", 0.2)
    assert slack_minimized(q, (1, 0)) == pytest.approx(1.0, abs=1e-12)


def test_alpha_phenomenon_toy_1(toy_graphs):
    for alpha, feasible in ((0.2, False), (1.5, True)):
        q = build_qubo(toy_graphs[1], "binary", alpha)
        best = min(itertools.product((0, 1), repeat=q.num_vars), key=lambda a: energy(q, a))
        assert decode(q, best, toy_graphs[1]).feasible is feasible


@pytest.mark.parametrize("encoding", ["binary", "one_hot"])
@pytest.mark.parametrize("alpha", [0.2, 1.5])
def test_energy_identity_small(encoding, alpha):
    g = from_coverage([[0, 1], [1, 2], [2]], 3)
    q = build_qubo(g, encoding, alpha)
    for x in itertools.product((0, 1), repeat=3):
        assert slack_minimized(q, x) == pytest.approx(sum(x) + alpha * uncovered_count(g, x),
                                                      abs=1e-9)


def test_uncoverable_rejected():
    g = from_coverage([[0]], 2)
    with pytest.raises(InfeasibleError) as info:
        build_qubo(g)
    assert list(info.value.street_ids) == [1]


@pytest.mark.parametrize("alpha", [0, -1.0, float("nan")])
def test_bad_alpha(alpha):
    with pytest.raises(ValidationError):
        build_qubo(from_coverage([[0]], 1), alpha=alpha)


def test_variable_layout(toy_graphs):
    q = build_qubo(toy_graphs[2], "one_hot", 1.0)
    L = toy_graphs[2].num_lidars
    assert q.var_meta[:L] == tuple(("decision", l) for l in range(L))
    slack = q.var_meta[L:]
    assert [m[1] for m in slack] == sorted(m[1] for m in slack)


def test_text_round_trip(toy_graphs):
    for enc in ("binary", "one_hot"):
        q = build_qubo(toy_graphs[4], enc, 1.5)
        again = Qubo.loads(q.dumps())
        assert again == q
        assert again.dumps() == q.dumps()


def test_decode_rejects_foreign_graph(toy_graphs):
    q = build_qubo(toy_graphs[1])
    with pytest.raises(ValidationError):
        decode(q, [0] * q.num_vars, toy_graphs[2])


def test_decode_all_zero_toy_1(toy_graphs):
    q = build_qubo(toy_graphs[1])
    sol = decode(q, [0] * 4, toy_graphs[1])
    assert not sol.feasible and sol.uncovered == (0, 1)


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_vectorized_energy_matches_scalar(data):
    cover = data.draw(st.lists(st.lists(st.integers(0, 3), min_size=1, max_size=3),
                               min_size=1, max_size=4))
    g = covered_graph(cover)
    enc = data.draw(st.sampled_from(["binary", "one_hot"]))
    q = build_qubo(g, enc, data.draw(st.sampled_from([0.2, 1.0, 1.5])))
    rows = data.draw(st.lists(st.lists(st.integers(0, 1), min_size=q.num_vars,
                                       max_size=q.num_vars), min_size=1, max_size=5))
    vec = energies(q, np.array(rows))
    assert vec == pytest.approx([energy(q, r) for r in rows], abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(0, 5), min_size=1, max_size=5), min_size=1, max_size=6))
def test_variable_count_accounting(cover):
    g = covered_graph(cover)
    counts = {}
    for enc in ("binary", "one_hot"):
        counts[enc] = build_qubo(g, enc, 1.0).num_vars
        assert counts[enc] == g.num_lidars + sum(slack_width(len(ns), enc) for ns in g.neighbors)
    assert counts["binary"] <= counts["one_hot"]

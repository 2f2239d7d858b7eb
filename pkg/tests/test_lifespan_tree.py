import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twocenter3d.arrangement import build_tour, enumerate_cells
from twocenter3d.lifespan_tree import (LifeSpan, SpanOutOfRange, build, compute_spans,
                                       evaluate_leaves, node_bound)


def _tour(n, seed):
    rng = np.random.default_rng(seed)
    cells = enumerate_cells((rng.normal(size=(n, 3)), rng.normal(size=n)))
    return cells, build_tour(cells)


def test_small_tree_frozen():
    spans = [LifeSpan(0, 0, 4), LifeSpan(1, 1, 3), LifeSpan(2, 2, 4)]
    t = build(spans, 4)
    assert [sorted(t.members_at(k)) for k in range(4)] == [[0], [0, 1], [0, 1, 2], [0, 2]]
    assert t.stored == 1 + 2 + 1


def test_out_of_range():
    with pytest.raises(SpanOutOfRange):
        build([LifeSpan(0, 0, 5)], 4)
    with pytest.raises(SpanOutOfRange):
        build([LifeSpan(0, 2, 2)], 4)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 9), st.integers(0, 10 ** 6))
def test_membership_matches_cell_signs(n, seed):
    cells, tour = _tour(n, seed)
    initial = [i for i, s in enumerate(cells[tour.cells[0]].signs) if s > 0]
    plus, minus = compute_spans(tour, initial, n)
    tp, tm = build(plus, len(tour)), build(minus, len(tour))
    for k in range(len(tour)):
        signs = cells[tour.cells[k]].signs
        assert tp.members_at(k) == {i for i in range(n) if signs[i] > 0}
        assert tm.members_at(k) == {i for i in range(n) if signs[i] < 0}
    bound = node_bound(len(tour))
    assert all(c <= bound for c in tp.per_span_nodes + tm.per_span_nodes)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10 ** 6))
def test_evaluate_leaves_matches_direct(n, seed):
    cells, tour = _tour(n, seed)
    initial = [i for i, s in enumerate(cells[tour.cells[0]].signs) if s > 0]
    plus, _ = compute_spans(tour, initial, n)
    tree = build(plus, len(tour))
    weights = np.random.default_rng(seed).random(n)

    def pred(ids):
        return round(float(weights[list(ids)].sum()), 12)

    got = evaluate_leaves(tree, pred)
    want = [pred(sorted(tree.members_at(k))) for k in range(len(tour))]
    assert got == want
    assert evaluate_leaves(tree, pred, memo=False) == want


def test_payload_mode():
    spans = [LifeSpan(0, 0, 3), LifeSpan(1, 1, 3)]
    tree = build(spans, 3, payload=lambda ids: frozenset(ids))
    out = evaluate_leaves(tree, lambda pays: frozenset().union(*pays) if pays else frozenset(), use_payloads=True)
    assert out == [frozenset({0}), frozenset({0, 1}), frozenset({0, 1})]

import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.errors import DataError
from src.forest.ensemble import ForestParams
from src.forest.tree import LEAF, DecisionTree, best_split, gini, train_tree
from src.utils.seeding import derive_rng


@pytest.mark.parametrize("counts, expected", [([5, 0], 0.0), ([3, 3], 0.5), ([3, 1], 0.375)])
def test_gini_fixtures(counts, expected):
    assert gini(counts) == pytest.approx(expected, abs=1e-15)


def test_gini_of_empty_node():
    with pytest.raises(DataError):
        gini([0, 0])


@given(st.integers(0, 1000), st.integers(0, 1000))
def test_gini_bounds(a, b):
    if a + b == 0:
        return
    assert 0.0 <= gini([a, b]) <= 0.5


def test_best_split_on_separable_line():
    split = best_split(np.array([[1.0], [2.0], [3.0], [4.0]]), np.array([0, 0, 1, 1]), [0])
    assert split.feature == 0
    assert split.threshold == 2.5
    assert split.gain == pytest.approx(0.5)


def test_best_split_pure_node():
    assert best_split(np.array([[1.0], [2.0]]), np.array([1, 1]), [0]) is None


def test_best_split_identical_rows():
    assert best_split(np.array([[1.0, 2.0], [1.0, 2.0]]), np.array([0, 1]), [0, 1]) is None


def test_best_split_ties_go_to_the_lower_feature():
    X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]])
    split = best_split(X, np.array([0, 0, 1, 1]), [1, 0])
    assert split.feature == 0


def test_best_split_ties_go_to_the_lower_threshold():
    # both 1.5 and 3.5 isolate one minority row
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    split = best_split(X, np.array([1, 0, 0, 1]), [0])
    assert split.threshold == 1.5


def test_best_split_respects_min_samples_leaf():
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    y = np.array([1, 0, 0, 0])
    assert best_split(X, y, [0]).threshold == 1.5
    assert best_split(X, y, [0], min_samples_leaf=2).threshold == 2.5
    assert best_split(X, y, [0], min_samples_leaf=3) is None


def test_separable_data_gives_a_stump():
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    y = np.array([0, 0, 1, 1])
    tree = train_tree(X, y, ForestParams(mtry=1), derive_rng(0, 0))
    assert tree.depth() == 1
    assert tree.predict(X).tolist() == [0, 0, 1, 1]


def test_single_row_is_a_leaf():
    tree = train_tree(np.array([[3.0, 1.0]]), np.array([1]), ForestParams(), derive_rng(0, 0))
    assert tree.n_nodes == 1
    assert tree.predict(np.array([[0.0, 0.0]])).tolist() == [1]


def test_same_stream_same_tree(blobs):
    X, y, _ = blobs
    a = train_tree(X, y, ForestParams(mtry=2), derive_rng(5, 1))
    b = train_tree(X, y, ForestParams(mtry=2), derive_rng(5, 1))
    for field in ("feature", "threshold", "left", "right", "counts"):
        np.testing.assert_array_equal(getattr(a, field), getattr(b, field))


def test_structure_invariants(rng):
    X = rng.normal(size=(80, 5))
    y = (X[:, 0] + 0.5 * rng.normal(size=80) > 0).astype(int)
    params = ForestParams(min_samples_leaf=3, max_depth=6)
    tree = train_tree(X, y, params, derive_rng(1, 2))
    internal = tree.feature != LEAF
    children = np.concatenate([tree.left[internal], tree.right[internal]])
    assert sorted(children.tolist()) == list(range(1, tree.n_nodes))
    assert np.all(tree.counts[~internal].sum(axis=1) >= params.min_samples_leaf)
    assert np.all(tree.counts[internal] == 0)
    assert tree.counts.sum() == 80
    assert tree.depth() <= 6


def test_max_depth_zero_is_a_single_leaf(blobs):
    X, y, _ = blobs
    tree = train_tree(X, y, ForestParams(max_depth=0), derive_rng(0, 0))
    assert tree.n_nodes == 1
    assert tree.counts[0].tolist() == [30, 30]
    assert tree.predict(X[:1]).tolist() == [0]


def test_nested_form_round_trip(blobs):
    X, y, _ = blobs
    tree = train_tree(X, y, ForestParams(), derive_rng(3, 3))
    back = DecisionTree.from_nested(tree.to_nested())
    np.testing.assert_array_equal(back.predict(X), tree.predict(X))
    assert back.to_nested() == tree.to_nested()

import pathlib

import pytest

import forestscope as fs


def test_full_xyz_or_ab_has_72_trees_at_eight_nodes():
    data = fs.concept_dataset("xyz-or-ab")
    assert len(data) == 32
    assert fs.count_trees(data, 8) == {8: 72}
    assert fs.min_consistent_size(data, 20) == 8


def test_fast_and_naive_agree():
    schema = fs.FeatureSchema.binary(["a", "b"])
    xor = fs.Dataset(schema, [([0, 0], 0), ([0, 1], 1), ([1, 0], 1), ([1, 1], 0)])
    fast = sorted(fs.to_string(t, schema) for t in fs.collect_consistent(xor, 3))
    naive = sorted(fs.to_string(t, schema) for t in fs.enumerate_naive(xor, 3))
    assert fast == naive
    assert len(fast) == 2


def test_tree_round_trip_and_classify():
    schema = fs.FeatureSchema.binary(["a"])
    tree = fs.parse_tree("(a 0:[neg] 1:[pos])", schema)
    assert tree.node_cardinality == 1
    assert tree.classify([1]) == 1
    assert fs.to_string(tree, schema) == "(a 0:[neg] 1:[pos])"


def test_leave_one_out_error_below_eight_nodes():
    (leg,) = fs.run_preset("fig5", seed=1, threads=2)
    assert len(leg.trials) == 32
    for row in fs.aggregate_by_cardinality(leg.trials):
        if row.node_cardinality < 8:
            assert row.mean_error == 1.0


def test_pairwise_probabilities_sum_to_one():
    (leg,) = fs.run_preset("fig10-12", trials=20)
    for row in fs.pairwise(leg.trials):
        assert abs(row.p_smaller_better + row.p_equal + row.p_larger_better - 1.0) < 1e-12
    assert fs.derive_policy(leg.trials)


def test_run_experiment_writes_files(tmp_path: pathlib.Path):
    files = fs.run_experiment("fig1", str(tmp_path), trials=3, charts=True)
    assert "cardinality_stats.csv" in files
    header = (tmp_path / "cardinality_stats.csv").read_text().splitlines()[0]
    assert header.startswith("preset,seed,node_cardinality")


def test_errors_are_translated():
    with pytest.raises(fs.ForestscopeError, match="unknown-preset"):
        fs.run_preset("fig99")
    with pytest.raises(fs.ForestscopeError, match="io"):
        fs.load_dataset("/nonexistent.csv")

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sawb.experiment import (CELLS, MASKS, RANGES, EvalReport, component_study, evaluate_cell, fold_seed,
                             generate_dataset, parse_cell, power_error_analysis, r_squared, regenerate_record,
                             rmse, sample_scenarios, split_and_fold, train_cells)
from sawb.spectral import feature_width


def test_cells():
    assert len(CELLS) == 21 and len(MASKS) == 7
    assert parse_cell("3dof:hs") == (("heave", "pitch", "roll"), "hs")
    assert parse_cell("roll+heave:mu") == (("heave", "roll"), "mu")
    for bad in ("3dof", "3dof:speed", "yaw:hs", "a:b:c"):
        with pytest.raises(ValueError):
            parse_cell(bad)


def test_split_counts_full_scale():
    s = split_and_fold(48000, seed=0)
    assert s.test.size == 4800
    assert [f.size for f in s.folds] == [8640] * 5
    tr, va = s.fold(0)
    assert tr.size == 34560 and va.size == 8640


@settings(max_examples=30, deadline=None)
@given(n=st.integers(10, 3000), seed=st.integers(0, 2**32 - 1))
def test_split_partition_properties(n, seed):
    s = split_and_fold(n, seed)
    allidx = np.concatenate([s.test, *s.folds])
    assert np.array_equal(np.sort(allidx), np.arange(n))
    sizes = [f.size for f in s.folds]
    assert max(sizes) - min(sizes) <= 1 and sizes == sorted(sizes, reverse=True)
    assert s.test.size == int(np.floor(0.1 * n))
    for j in range(5):
        tr, va = s.fold(j)
        assert np.intersect1d(tr, va).size == 0 and np.intersect1d(tr, s.test).size == 0


def test_split_uneven_and_determinism():
    s = split_and_fold(103, seed=1)
    assert s.test.size == 10 and [f.size for f in s.folds] == [19, 19, 19, 18, 18]
    t = split_and_fold(103, seed=1)
    assert all(np.array_equal(a, b) for a, b in zip(s.folds, t.folds))
    with pytest.raises(ValueError):
        split_and_fold(5, 0)


def test_metrics():
    assert rmse([0, 0], [5, 0]) == pytest.approx(3.5355339, rel=1e-7)
    assert rmse([1, 2, 3], [1, 2, 3]) == 0
    assert r_squared([2, 2, 3, 5], [1, 2, 3, 6]) == pytest.approx(1 - 2 / 14)
    assert r_squared([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.2)
    assert r_squared([2.5, 2.5, 2.5, 2.5], [1, 2, 3, 4]) == 0.0
    with pytest.raises(ValueError):
        rmse([], [])
    with pytest.raises(ValueError):
        r_squared([1, 2], [3, 3])


def test_scenario_sampling():
    sc = sample_scenarios(4000, 3)
    for name, (lo, hi) in RANGES.items():
        v = np.array([getattr(s, name) for s in sc])
        assert v.min() >= lo and v.max() <= hi
        assert v.mean() == pytest.approx((lo + hi) / 2, rel=0.05)
    assert len({s.seed for s in sc}) == 4000
    assert sample_scenarios(10, 3) == sample_scenarios(10, 3)


def test_dataset_shapes_and_prefix(tiny_dataset):
    ds = tiny_dataset
    assert len(ds) == 24 and ds.k_max == 80
    assert ds.features("heave+pitch+roll", 80).shape == (24, 484)
    assert ds.features("heave", 30).shape == (24, feature_width("heave", 30))
    np.testing.assert_array_equal(ds.features("pitch", 30)[:, :30], ds.ordinates[:, 1, :30])
    np.testing.assert_array_equal(ds.feature_vector(3, "heave+roll", 30).to_array(),
                                  ds.features("heave+roll", 30, [3])[0])
    assert np.all(np.diff(ds.ordinates, axis=2) <= 0)
    with pytest.raises(ValueError):
        ds.features("heave", 81)


def test_parallel_generation_matches_serial(tiny_dataset):
    par = generate_dataset(24, seed=11, parallelism=2)
    for name in ("h_s", "speed", "seeds", "ordinates", "freqs", "m0"):
        assert np.array_equal(getattr(par, name), getattr(tiny_dataset, name))
    assert par.manifest == tiny_dataset.manifest


def test_regenerate_record_from_manifest(tiny_dataset):
    sc, (ords, freqs, m0) = regenerate_record(tiny_dataset.manifest, 17)
    assert sc == tiny_dataset.scenario(17)
    assert np.array_equal(ords, tiny_dataset.ordinates[17]) and np.array_equal(m0, tiny_dataset.m0[17])


def test_fold_seeds_are_distinct():
    seeds = {fold_seed(0, c, j) for c in CELLS for j in range(5)}
    assert len(seeds) == 105


def test_component_study_smoke(tiny_dataset, tmp_path):
    cells = ["heave:hs", "3dof:mu"]
    report = component_study(tiny_dataset, seed=0, cells=cells, epochs=2)
    assert isinstance(report, EvalReport) and len(report) == 2
    r = report["heave:hs"]
    assert len(r.fold_rmse) == 5 and r.test_estimate.shape == r.test_truth.shape == (2,)
    assert np.all(np.isfinite(r.residuals))
    names = {p.name for p in report.write(tmp_path)}
    assert names == {"metrics.csv", "test_metrics.csv", "summary.csv", "residuals.csv"}
    tables = power_error_analysis(report, tiny_dataset)
    assert tables["3dof:mu"].m0.shape == (2, 3)
    # parallel training reproduces the serial models exactly
    split = split_and_fold(tiny_dataset, 0)
    par = train_cells(tiny_dataset, split, cells, 0, parallelism=2, epochs=2)
    for c in cells:
        again = evaluate_cell(tiny_dataset, split, c, par[c])
        assert np.array_equal(again.test_estimate, report[c].test_estimate)

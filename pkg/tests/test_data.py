"""Ingestion, labeling, resampling, splits and folds."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eegband import data
from eegband.rng import make_rng


def write_trial(path, arr, delimiter=","):
    data.save_trial_csv(path, arr, delimiter=delimiter)


def make_manifest(class_sizes, n_participants=10, fs=250.0):
    """Synthetic manifest without files, for split/fold logic tests."""
    ambs = {0: [0.15, 0.25], 1: [0.4, 0.45, 0.55, 0.6], 2: [0.75, 0.85]}
    rows = []
    i = 0
    for cls, size in enumerate(class_sizes):
        for j in range(size):
            rows.append(data.ManifestRow(
                f"trial_{i:05d}.csv", ambs[cls][j % len(ambs[cls])],
                f"P{i % n_participants:02d}", fs))
            i += 1
    return data.DatasetManifest(rows, fs)


# -------------------------------------------------------------------- labels

@pytest.mark.parametrize("a,expected", [
    (0.15, data.LEFT), (0.25, data.LEFT),
    (0.4, data.HIGH_AMBIGUITY), (0.45, data.HIGH_AMBIGUITY),
    (0.55, data.HIGH_AMBIGUITY), (0.6, data.HIGH_AMBIGUITY),
    (0.75, data.RIGHT), (0.85, data.RIGHT),
])
def test_label_mapping(a, expected):
    assert data.label_from_ambiguity(a) == expected


def test_label_rejects_unknown_value():
    with pytest.raises(ValueError, match="0.5"):
        data.label_from_ambiguity(0.5)


def test_label_partition_covers_all_values():
    buckets = {0: 0, 1: 0, 2: 0}
    for a in data.ALLOWED_AMBIGUITIES:
        buckets[data.label_from_ambiguity(a)] += 1
    assert buckets == {0: 2, 1: 4, 2: 2}


# ------------------------------------------------------------------- CSV I/O

def test_load_well_formed_trial(tmp_path):
    arr = make_rng(1).normal(size=(31, 1024)).astype(np.float32)
    p = tmp_path / "t.csv"
    write_trial(p, arr)
    trial = data.load_trial_csv(p, 0.15, "P01", 250.0)
    assert trial.data.shape == (31, 1024)
    assert not trial.length_warning
    assert trial.label == data.LEFT
    assert np.allclose(trial.data, arr, atol=0)  # %.9g round-trips float32


@pytest.mark.parametrize("delim", [",", ";", "\t"])
def test_delimiter_autodetect(tmp_path, delim):
    arr = make_rng(2).normal(size=(31, 700)).astype(np.float32)
    p = tmp_path / "t.csv"
    write_trial(p, arr, delimiter=delim)
    trial = data.load_trial_csv(p, 0.4, "P02", 250.0)
    assert trial.delimiter == delim
    assert np.allclose(trial.data, arr, atol=0)


def test_wrong_row_count_rejected(tmp_path):
    p = tmp_path / "t.csv"
    write_trial(p, np.zeros((30, 700)))
    with pytest.raises(ValueError, match="31"):
        data.load_trial_csv(p, 0.15, "P01", 250.0)


def test_short_trial_flagged_not_rejected(tmp_path):
    p = tmp_path / "t.csv"
    write_trial(p, make_rng(0).normal(size=(31, 600)))
    trial = data.load_trial_csv(p, 0.15, "P01", 250.0)
    assert trial.length_warning
    assert trial.n_samples == 600


def test_non_numeric_cell_located(tmp_path):
    arr = np.zeros((31, 700))
    p = tmp_path / "t.csv"
    write_trial(p, arr)
    lines = p.read_text().splitlines()
    cells = lines[4].split(",")
    cells[9] = "oops"
    lines[4] = ",".join(cells)
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="row 5, column 10"):
        data.load_trial_csv(p, 0.15, "P01", 250.0)


def test_ragged_rows_rejected(tmp_path):
    p = tmp_path / "t.csv"
    write_trial(p, np.zeros((31, 700)))
    lines = p.read_text().splitlines()
    lines[7] = lines[7] + ",0"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="ragged"):
        data.load_trial_csv(p, 0.15, "P01", 250.0)


def test_manifest_roundtrip(tmp_path):
    m = make_manifest([2, 4, 2])
    mp = tmp_path / "manifest.csv"
    data.save_manifest(m, mp)
    loaded = data.load_manifest(mp)
    assert len(loaded) == 8
    assert loaded.fs == 250.0
    assert [r.path for r in loaded.rows] == [r.path for r in m.rows]
    assert data.manifest_hash(loaded) == data.manifest_hash(m)


def test_manifest_rejects_duplicate_paths():
    rows = [data.ManifestRow("a.csv", 0.15, "P0", 250.0),
            data.ManifestRow("a.csv", 0.25, "P1", 250.0)]
    with pytest.raises(ValueError, match="duplicate"):
        data.DatasetManifest(rows, 250.0)


# ------------------------------------------------------------- length/scale

def test_standardize_identity_at_target():
    arr = make_rng(3).normal(size=(31, 256)).astype(np.float32)
    t = data.Trial(arr, 0.15, 0, "P", 250.0)
    out = data.standardize_length(t, 256)
    assert np.array_equal(out.data, arr)


def test_standardize_constant_channel():
    arr = np.full((31, 999), 2.5, dtype=np.float32)
    t = data.Trial(arr, 0.15, 0, "P", 250.0)
    out = data.standardize_length(t, 256)
    assert out.data.shape == (31, 256)
    assert np.allclose(out.data, 2.5, atol=1e-6)


def test_standardize_linear_ramp():
    T = 1024
    ramp = np.linspace(0.0, 1.0, T, dtype=np.float64)
    arr = np.tile(ramp, (31, 1)).astype(np.float32)
    t = data.Trial(arr, 0.15, 0, "P", 250.0)
    out = data.standardize_length(t, 256)
    ideal = np.linspace(0.0, 1.0, 256)
    assert np.abs(out.data[0] - ideal).max() < 1e-6
    # endpoints map to original endpoints
    assert out.data[0, 0] == pytest.approx(0.0, abs=1e-7)
    assert out.data[0, -1] == pytest.approx(1.0, abs=1e-6)


def test_normalize_z_scores():
    arr = np.zeros((31, 3), dtype=np.float32)
    arr[0] = [1.0, 2.0, 3.0]
    t = data.Trial(arr, 0.15, 0, "P", 250.0)
    out = data.normalize_per_channel(t)
    assert np.allclose(out.data[0], [-1.2247449, 0.0, 1.2247449], atol=1e-6)


def test_normalize_idempotent():
    arr = make_rng(4).normal(size=(31, 500)).astype(np.float32)
    t = data.Trial(arr, 0.15, 0, "P", 250.0)
    once = data.normalize_per_channel(t)
    twice = data.normalize_per_channel(once)
    assert np.abs(once.data - twice.data).max() < 1e-6


def test_normalize_constant_channel_zeroed_and_flagged():
    arr = make_rng(5).normal(size=(31, 100)).astype(np.float32)
    arr[12] = 7.0
    t = data.Trial(arr, 0.15, 0, "P", 250.0)
    out = data.normalize_per_channel(t)
    assert np.all(out.data[12] == 0.0)
    assert out.zero_variance_channels == (12,)


# ---------------------------------------------------------------------- split

def test_split_reproduces_reference_counts():
    m = make_manifest([997, 2000, 1003], n_participants=20)
    plan = data.split_train_test(m, ratio=0.6, seed=0)
    labels = m.labels()
    train_counts = np.bincount(labels[plan.train], minlength=3)
    test_counts = np.bincount(labels[plan.test], minlength=3)
    assert train_counts.tolist() == [598, 1200, 602]
    assert test_counts.tolist() == [399, 800, 401]


def test_split_rejects_ratio_one():
    m = make_manifest([4, 4, 4])
    with pytest.raises(ValueError, match="ratio"):
        data.split_train_test(m, ratio=1.0)


def test_split_rejects_empty_class():
    rows = [data.ManifestRow(f"t{i}.csv", 0.15, "P0", 250.0) for i in range(4)]
    m = data.DatasetManifest(rows, 250.0)
    with pytest.raises(ValueError, match="class"):
        data.split_train_test(m, ratio=0.5)


def test_split_seeds_change_assignment_not_counts():
    m = make_manifest([50, 80, 50])
    p1 = data.split_train_test(m, ratio=0.6, seed=1)
    p2 = data.split_train_test(m, ratio=0.6, seed=2)
    assert p1.train != p2.train
    labels = m.labels()
    c1 = np.bincount(labels[p1.train], minlength=3)
    c2 = np.bincount(labels[p2.train], minlength=3)
    assert np.array_equal(c1, c2)


@settings(max_examples=60, deadline=None)
@given(sizes=st.tuples(st.integers(2, 60), st.integers(2, 60), st.integers(2, 60)),
       seed=st.integers(0, 2**32 - 1),
       ratio=st.floats(0.2, 0.8))
def test_split_partitions_indices(sizes, seed, ratio):
    m = make_manifest(list(sizes))
    plan = data.split_train_test(m, ratio=ratio, seed=seed)
    train, test = set(plan.train), set(plan.test)
    assert train.isdisjoint(test)
    assert train | test == set(range(len(m)))


def test_grouped_split_keeps_participants_whole():
    m = make_manifest([40, 40, 40], n_participants=12)
    plan = data.split_train_test(m, ratio=0.6, seed=3, group_by_participant=True)
    pids = m.participants()
    train_p = {pids[i] for i in plan.train}
    test_p = {pids[i] for i in plan.test}
    assert train_p.isdisjoint(test_p)


# ---------------------------------------------------------------------- folds

def test_twenty_participants_twenty_folds():
    m = make_manifest([100, 200, 100], n_participants=20)
    plan = data.make_folds(m, k=20)
    pids = m.participants()
    for fold in range(20):
        fold_p = {pids[i] for i in plan.fold_indices(fold)}
        assert len(fold_p) == 1


def test_single_fold_contains_everything():
    m = make_manifest([5, 5, 5], n_participants=4)
    plan = data.make_folds(m, k=1)
    assert plan.fold_indices(0) == list(range(15))


def test_fold_greedy_balancing_equal_counts():
    # 4 participants with 10 trials each, k=2 -> 20/20
    rows = []
    i = 0
    for p in range(4):
        for _ in range(10):
            rows.append(data.ManifestRow(f"t{i}.csv", 0.15, f"P{p}", 250.0))
            i += 1
    m = data.DatasetManifest(rows, 250.0)
    plan = data.make_folds(m, k=2)
    sizes = [len(plan.fold_indices(f)) for f in range(2)]
    assert sizes == [20, 20]


def test_folds_require_enough_participants():
    m = make_manifest([10, 10, 10], n_participants=5)
    with pytest.raises(ValueError, match="participants"):
        data.make_folds(m, k=20)


@settings(max_examples=40, deadline=None)
@given(counts=st.lists(st.integers(1, 30), min_size=4, max_size=25),
       k=st.integers(1, 4))
def test_fold_group_purity(counts, k):
    rows = []
    i = 0
    for p, c in enumerate(counts):
        for _ in range(c):
            rows.append(data.ManifestRow(f"t{i}.csv", 0.55, f"P{p:02d}", 250.0))
            i += 1
    m = data.DatasetManifest(rows, 250.0)
    plan = data.make_folds(m, k=k)
    pids = m.participants()
    seen = {}
    for idx, fold in enumerate(plan.assignment):
        pid = pids[idx]
        assert seen.setdefault(pid, fold) == fold
    # every trial lands in exactly one fold
    assert len(plan.assignment) == len(m)
    assert set(plan.assignment) <= set(range(k))


# ----------------------------------------------------------------------- plans

def test_plan_roundtrip(tmp_path):
    m = make_manifest([10, 12, 10])
    split = data.split_train_test(m, ratio=0.6, seed=5)
    folds = data.make_folds(m, k=3)
    sp, fp = tmp_path / "split.json", tmp_path / "folds.json"
    data.save_plan(split, sp)
    data.save_plan(folds, fp)
    split2 = data.load_plan(sp)
    folds2 = data.load_plan(fp)
    assert split2.train == split.train and split2.test == split.test
    assert folds2.assignment == folds.assignment


def test_to_model_inputs_shapes():
    trials = []
    rng = make_rng(6)
    for i in range(5):
        T = int(rng.integers(180, 380))
        arr = rng.normal(size=(31, T)).astype(np.float32)
        trials.append(data.Trial(arr, 0.15 if i % 2 else 0.75,
                                 data.LEFT if i % 2 else data.RIGHT,
                                 f"P{i}", 250.0))
    X, y = data.to_model_inputs(trials, sequence_length=128)
    assert X.shape == (5, 128, 31)
    assert X.dtype == np.float32
    assert y.tolist() == [2, 0, 2, 0, 2]
    # normalized: per-channel mean ~0 along time
    assert np.abs(X.mean(axis=1)).max() < 1e-5

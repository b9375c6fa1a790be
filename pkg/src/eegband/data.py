"""Trial ingestion, labeling, length/scale standardization, splits and folds.

A dataset is a manifest CSV (`path,ambiguity,participant_id,fs_hz`) next to
one trial CSV per recording: 31 channel rows, 700..1500 sample columns of
decimal reals, delimiter comma/semicolon/tab. The class label is derived from
the trial's ambiguity value, never stored.
"""

import csv
import hashlib
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .rng import make_rng

N_CHANNELS = 31
LENGTH_RANGE = (700, 1500)
PLAN_VERSION = 1

LEFT, HIGH_AMBIGUITY, RIGHT = 0, 1, 2

# ambiguity value -> class; mid-range values form the high-ambiguity class
AMBIGUITY_CLASSES = {
    0.15: LEFT, 0.25: LEFT,
    0.40: HIGH_AMBIGUITY, 0.45: HIGH_AMBIGUITY,
    0.55: HIGH_AMBIGUITY, 0.60: HIGH_AMBIGUITY,
    0.75: RIGHT, 0.85: RIGHT,
}
ALLOWED_AMBIGUITIES = tuple(sorted(AMBIGUITY_CLASSES))

_DELIMITERS = (",", ";", "\t")


def label_from_ambiguity(a):
    """Class index for an ambiguity value; rejects values outside the set."""
    a = float(a)
    for known, label in AMBIGUITY_CLASSES.items():
        if abs(a - known) < 1e-9:
            return label
    raise ValueError(
        f"ambiguity {a} is not one of the presented values {ALLOWED_AMBIGUITIES}")


@dataclass
class Trial:
    """One recording: channels x samples, plus labeling metadata."""

    data: np.ndarray          # [31, T] float32
    ambiguity: float
    label: int
    participant_id: str
    fs: float
    band_tag: str = "raw"     # raw | theta | alpha | beta
    length_warning: bool = False
    zero_variance_channels: tuple = ()
    delimiter: str = ","
    source_path: str = ""

    @property
    def n_samples(self):
        return self.data.shape[1]


@dataclass
class ManifestRow:
    path: str
    ambiguity: float
    participant_id: str
    fs: float


@dataclass
class DatasetManifest:
    rows: list
    fs: float
    base_dir: str = "."
    version: int = PLAN_VERSION

    def __post_init__(self):
        paths = [r.path for r in self.rows]
        if len(set(paths)) != len(paths):
            raise ValueError("manifest contains duplicate trial paths")
        for r in self.rows:
            label_from_ambiguity(r.ambiguity)  # validates the value

    def labels(self):
        return np.array([label_from_ambiguity(r.ambiguity) for r in self.rows])

    def participants(self):
        return [r.participant_id for r in self.rows]

    def __len__(self):
        return len(self.rows)


def _detect_delimiter(first_line):
    counts = {d: first_line.count(d) for d in _DELIMITERS}
    best = max(counts, key=counts.get)
    if counts[best] == 0:
        raise ValueError("no recognized delimiter (comma/semicolon/tab) found")
    return best


def load_trial_csv(path, ambiguity, participant_id, fs, band_tag="raw"):
    """Parse one 31xT trial file into a Trial; strict on structure."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty trial file")
    delim = _detect_delimiter(lines[0])
    rows = [ln.split(delim) for ln in lines]
    if len(rows) != N_CHANNELS:
        raise ValueError(
            f"{path}: expected {N_CHANNELS} channel rows, found {len(rows)}")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ValueError(
                f"{path}: ragged rows, row {i + 1} has {len(r)} cells "
                f"instead of {width}")
    try:
        data = np.array(rows, dtype=np.float64)
    except ValueError:
        for i, r in enumerate(rows):
            for j, cell in enumerate(r):
                try:
                    float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric cell at row {i + 1}, "
                        f"column {j + 1}: {cell!r}") from None
        raise
    if not np.isfinite(data).all():
        bad = np.argwhere(~np.isfinite(data))[0]
        raise ValueError(
            f"{path}: non-finite sample at row {bad[0] + 1}, column {bad[1] + 1}")
    warn = not LENGTH_RANGE[0] <= data.shape[1] <= LENGTH_RANGE[1]
    return Trial(
        data=data.astype(np.float32),
        ambiguity=float(ambiguity),
        label=label_from_ambiguity(ambiguity),
        participant_id=str(participant_id),
        fs=float(fs),
        band_tag=band_tag,
        length_warning=warn,
        delimiter=delim,
        source_path=str(path),
    )


def save_trial_csv(path, data, delimiter=","):
    """Write a [31, T] array as a trial CSV, float32 round-trip safe."""
    arr = np.asarray(data, dtype=np.float32)
    with open(path, "w", encoding="utf-8") as fh:
        for row in arr:
            fh.write(delimiter.join(f"{v:.9g}" for v in row))
            fh.write("\n")


def load_manifest(path):
    """Read a manifest CSV; trial paths are relative to the manifest's dir."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = ["path", "ambiguity", "participant_id", "fs_hz"]
        if reader.fieldnames != expected:
            raise ValueError(
                f"{path}: manifest header must be {','.join(expected)}, "
                f"got {reader.fieldnames}")
        for rec in reader:
            rows.append(ManifestRow(rec["path"], float(rec["ambiguity"]),
                                    rec["participant_id"], float(rec["fs_hz"])))
    if not rows:
        raise ValueError(f"{path}: manifest has no rows")
    fs_values = {r.fs for r in rows}
    if len(fs_values) != 1:
        raise ValueError(f"{path}: mixed sampling rates {sorted(fs_values)}")
    return DatasetManifest(rows, rows[0].fs, base_dir=os.path.dirname(path) or ".")


def save_manifest(manifest, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "ambiguity", "participant_id", "fs_hz"])
        for r in manifest.rows:
            writer.writerow([r.path, f"{r.ambiguity:g}", r.participant_id,
                             f"{r.fs:g}"])


def load_dataset(manifest, band_tag="raw"):
    """Load every trial referenced by the manifest, in manifest order."""
    trials = []
    for row in manifest.rows:
        p = os.path.join(manifest.base_dir, row.path)
        trials.append(load_trial_csv(p, row.ambiguity, row.participant_id,
                                     row.fs, band_tag=band_tag))
    return trials


# ------------------------------------------------------------ standardization

def standardize_length(trial, target=256):
    """Linear resample every channel to `target` samples over the full trial."""
    T = trial.n_samples
    if T < 2:
        raise ValueError("cannot resample a trial with fewer than 2 samples")
    if T == target:
        return replace(trial, data=trial.data.copy())
    old = np.linspace(0.0, 1.0, T)
    new = np.linspace(0.0, 1.0, target)
    out = np.empty((trial.data.shape[0], target), dtype=np.float64)
    src = trial.data.astype(np.float64)
    for c in range(trial.data.shape[0]):
        out[c] = np.interp(new, old, src[c])
    return replace(trial, data=out.astype(np.float32))


def normalize_per_channel(trial):
    """Zero-mean unit-variance per channel; constant channels become zeros."""
    src = trial.data.astype(np.float64)
    mean = src.mean(axis=1, keepdims=True)
    std = src.std(axis=1, keepdims=True)
    degenerate = std[:, 0] <= 1e-10 * np.maximum(1.0, np.abs(mean[:, 0]))
    safe_std = np.where(degenerate[:, None], 1.0, std)
    out = (src - mean) / safe_std
    out[degenerate] = 0.0
    return replace(trial, data=out.astype(np.float32),
                   zero_variance_channels=tuple(np.where(degenerate)[0]))


def to_model_inputs(trials, sequence_length=256, normalize=True):
    """Stack trials into (X [N, T, C] float32, y [N]) for the classifier."""
    xs = []
    ys = []
    for t in trials:
        s = standardize_length(t, sequence_length)
        if normalize:
            s = normalize_per_channel(s)
        xs.append(s.data.T)  # time-major: [T, channels]
        ys.append(t.label)
    return np.stack(xs).astype(np.float32), np.array(ys, dtype=np.int64)


# --------------------------------------------------------------- splits/folds

@dataclass
class SplitPlan:
    train: list
    test: list
    ratio: float
    seed: int
    version: int = PLAN_VERSION

    def to_dict(self):
        return {"version": self.version, "kind": "split", "ratio": self.ratio,
                "seed": self.seed, "train": list(map(int, self.train)),
                "test": list(map(int, self.test))}

    @classmethod
    def from_dict(cls, d):
        if d.get("kind") != "split" or d.get("version") != PLAN_VERSION:
            raise ValueError(f"not a version-{PLAN_VERSION} split plan")
        return cls(d["train"], d["test"], d["ratio"], d["seed"])


@dataclass
class FoldPlan:
    k: int
    assignment: list  # fold index per trial index
    seed: int = 0
    version: int = PLAN_VERSION

    def fold_indices(self, fold):
        return [i for i, f in enumerate(self.assignment) if f == fold]

    def to_dict(self):
        return {"version": self.version, "kind": "folds", "k": self.k,
                "seed": self.seed, "assignment": list(map(int, self.assignment))}

    @classmethod
    def from_dict(cls, d):
        if d.get("kind") != "folds" or d.get("version") != PLAN_VERSION:
            raise ValueError(f"not a version-{PLAN_VERSION} fold plan")
        return cls(d["k"], d["assignment"], d.get("seed", 0))


def split_train_test(manifest, ratio=0.6, seed=0, group_by_participant=False):
    """Stratified train/test split over manifest rows.

    Default mode is stratified by class only: per-class train count is
    round(ratio * class_size) exactly. The group-aware mode keeps each
    participant on one side at the cost of approximate counts.
    """
    labels = manifest.labels()
    if group_by_participant:
        if not 0.0 < ratio < 1.0:
            raise ValueError(f"ratio must lie strictly inside (0, 1), got {ratio}")
        return _grouped_split(manifest, labels, ratio, seed)
    return split_indices(labels, ratio, seed)


def split_indices(labels, ratio=0.6, seed=0):
    """Class-stratified split over a label vector; see split_train_test."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie strictly inside (0, 1), got {ratio}")
    labels = np.asarray(labels)
    rng = make_rng(seed)
    train, test = [], []
    for cls in range(3):
        idx = np.where(labels == cls)[0]
        if idx.size == 0:
            raise ValueError(f"class {cls} has no trials; cannot stratify")
        n_train = int(round(ratio * idx.size))
        perm = rng.permutation(idx)
        train.extend(perm[:n_train].tolist())
        test.extend(perm[n_train:].tolist())
    return SplitPlan(sorted(train), sorted(test), ratio, seed)


def _grouped_split(manifest, labels, ratio, seed):
    participants = manifest.participants()
    order = sorted(set(participants))
    rng = make_rng(seed)
    rng.shuffle(order)
    total = len(labels)
    train_ids = set()
    count = 0
    for pid in order:
        if count >= round(ratio * total):
            break
        train_ids.add(pid)
        count += sum(1 for p in participants if p == pid)
    train = [i for i, p in enumerate(participants) if p in train_ids]
    test = [i for i, p in enumerate(participants) if p not in train_ids]
    if not train or not test:
        raise ValueError("grouped split produced an empty side; "
                         "too few participants for this ratio")
    return SplitPlan(train, test, ratio, seed)


def make_folds(manifest, k=20):
    """Participant-grouped folds, round-robin over descending trial counts."""
    participants = manifest.participants()
    counts = {}
    for p in participants:
        counts[p] = counts.get(p, 0) + 1
    if len(counts) < k:
        raise ValueError(
            f"need at least k={k} distinct participants, have {len(counts)}")
    ordered = sorted(counts, key=lambda p: (-counts[p], p))
    fold_of = {p: i % k for i, p in enumerate(ordered)}
    assignment = [fold_of[p] for p in participants]
    return FoldPlan(k, assignment)


def save_plan(plan, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plan.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_plan(path):
    with open(path, "r", encoding="utf-8") as fh:
        d = json.load(fh)
    if d.get("kind") == "split":
        return SplitPlan.from_dict(d)
    if d.get("kind") == "folds":
        return FoldPlan.from_dict(d)
    raise ValueError(f"{path}: unknown plan kind {d.get('kind')!r}")


# ------------------------------------------------------------------ hashing

def trial_hash(trial):
    """Content hash of one trial (data + label identity)."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(trial.data, dtype="<f4").tobytes())
    h.update(f"|{trial.ambiguity:g}|{trial.participant_id}|{trial.band_tag}"
             .encode())
    return h.hexdigest()


def dataset_hash(trials):
    h = hashlib.sha256()
    for t in trials:
        h.update(trial_hash(t).encode())
    return h.hexdigest()


def manifest_hash(manifest):
    h = hashlib.sha256()
    for r in manifest.rows:
        h.update(f"{r.path}|{r.ambiguity:g}|{r.participant_id}|{r.fs:g}\n"
                 .encode())
    return h.hexdigest()

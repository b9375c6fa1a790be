"""Band-filtered dataset expansion.

Each expansion band produces a full filtered copy of the original dataset:
every trial zero-phase filtered channel-wise at its native length, with label,
participant and length untouched. Three bands turn 4 000 trials into 12 000.

Subsets can be materialized to disk as `<out>/<band>/<original-name>.csv`
plus a per-band manifest, so pretraining stages replay from files.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import data, dsp


@dataclass
class AugmentedCorpus:
    """Filtered copies of one dataset, keyed by band name, plus provenance."""

    subsets: dict          # band name -> list of Trial
    provenance: dict       # source hash, band edges, filter metadata

    def total_trials(self):
        return sum(len(v) for v in self.subsets.values())

    def corpus_hash(self):
        import hashlib

        h = hashlib.sha256()
        for name in sorted(self.subsets):
            h.update(name.encode())
            h.update(data.dataset_hash(self.subsets[name]).encode())
        return h.hexdigest()


def generate_band_subset(trials, band, fs, order=dsp.DEFAULT_ORDER, workers=1):
    """Zero-phase filter every trial into one band; order and size preserved."""
    if not trials:
        raise ValueError("cannot band-filter an empty dataset")
    cascade = dsp.design_bandpass(band, fs, order=order)

    def one(trial):
        filtered = dsp.apply_zero_phase(trial.data, cascade)
        return replace(trial, data=filtered.astype(np.float32),
                       band_tag=band.name)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, trials))
    return [one(t) for t in trials]


def build_corpus(trials, bands=None, fs=dsp.DEFAULT_FS,
                 order=dsp.DEFAULT_ORDER, workers=1, source_hash=None):
    """Filtered subsets for every requested band (default: theta/alpha/beta)."""
    if bands is None:
        bands = dsp.standard_bands()
    names = [b.name for b in bands]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate band names in {names}")
    subsets = {}
    for band in bands:
        subsets[band.name] = generate_band_subset(trials, band, fs,
                                                  order=order, workers=workers)
    provenance = {
        "source_hash": source_hash or data.dataset_hash(trials),
        "bands": {b.name: [b.low_hz, b.high_hz] for b in bands},
        "filter": {"family": "butterworth", "order": order, "fs": fs,
                   "application": "zero-phase"},
    }
    return AugmentedCorpus(subsets, provenance)


def materialize_corpus(corpus, out_dir):
    """Write each band subset as trial CSVs + manifest under out_dir/<band>/."""
    written = {}
    for band_name in sorted(corpus.subsets):
        band_dir = os.path.join(out_dir, band_name)
        os.makedirs(band_dir, exist_ok=True)
        rows = []
        for i, trial in enumerate(corpus.subsets[band_name]):
            base = os.path.basename(trial.source_path) if trial.source_path \
                else f"trial_{i:05d}.csv"
            data.save_trial_csv(os.path.join(band_dir, base), trial.data)
            rows.append(data.ManifestRow(base, trial.ambiguity,
                                         trial.participant_id, trial.fs))
        manifest = data.DatasetManifest(rows, corpus.subsets[band_name][0].fs,
                                        base_dir=band_dir)
        data.save_manifest(manifest, os.path.join(band_dir, "manifest.csv"))
        written[band_name] = band_dir
    return written


def load_corpus(root_dir, bands=None):
    """Load a materialized corpus back from disk."""
    if bands is None:
        bands = list(dsp.BAND_ORDER)
    subsets = {}
    for name in bands:
        band_dir = os.path.join(root_dir, name)
        manifest = data.load_manifest(os.path.join(band_dir, "manifest.csv"))
        subsets[name] = data.load_dataset(manifest, band_tag=name)
    return AugmentedCorpus(subsets, {"loaded_from": str(root_dir)})

import numpy as np
import pytest

from streambench.core import DataError, UsageError
from streambench.datasets import CsvStream, open_dataset, parse_dataset_id, write_csv
from streambench.evaluation import prequential_run
from streambench.features import (DriftConfig, SampleWindow, histogram_features, histogram_ranges,
                                  meanstd_features)
from streambench.naive_bayes import NaiveBayes


def write(path, header, rows):
    path.write_text("\n".join([",".join(header)] + [",".join(map(str, r)) for r in rows]) + "\n")
    return str(path)


def sample_file(tmp_path, n=120, axes=3, labels=(5, 9), seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        label = labels[(i // 10) % len(labels)]
        rows.append([*np.round(rng.normal(size=axes) + label, 4), label])
    return write(tmp_path / "samples.csv", [f"a{i}" for i in range(axes)] + ["label"], rows), rows


def test_parse_synth_id():
    ref = parse_dataset_id("synth:randomrbf,seed=3,n=500,d=6,classes=20")
    assert (ref.kind, ref.name, ref.seed, ref.length) == ("synth", "randomrbf", 3, 500)
    assert ref.params == {"dimensionality": 6, "num_classes": 20}


@pytest.mark.parametrize("text", ["synth:nope", "synth:hyperplane,bogus=1", "synth:randomtree,n",
                                  "/no/such/file.csv", "synth:hyperplane,n=abc"])
def test_bad_ids(text):
    with pytest.raises(UsageError):
        parse_dataset_id(text)


def test_synth_seed_pinning():
    pinned = parse_dataset_id("synth:hyperplane,seed=4,n=300")
    a, b = open_dataset(pinned, seed=1), open_dataset(pinned, seed=2)
    assert np.array_equal(a.X, b.X)
    free = parse_dataset_id("synth:hyperplane,n=300")
    assert not np.array_equal(open_dataset(free, 1).X, open_dataset(free, 2).X)
    assert len(open_dataset(free, 1)) == 300


def test_sample_csv_windows_to_meanstd(tmp_path):
    path, rows = sample_file(tmp_path)
    stream = CsvStream(path, window=10)
    assert stream.kind == "samples" and stream.label_map == {5: 0, 9: 1}
    assert stream.spec.dimensionality == 6 and len(stream) == 12
    got = list(stream)
    arr = np.array(rows, dtype=float)
    for i, inst in enumerate(got):
        block = arr[10 * i:10 * (i + 1)]
        labels = np.array([stream.label_map[int(v)] for v in block[:, -1]])
        ref = meanstd_features(SampleWindow(block[:, :-1], labels))
        assert np.allclose(inst.features, ref.features) and inst.label == ref.label


def test_histogram_pipeline(tmp_path):
    path, rows = sample_file(tmp_path, n=105)
    stream = CsvStream(path, features="histogram", window=20, bins=4)
    assert stream.spec.dimensionality == 12 and len(stream) == 5
    arr = np.array(rows, dtype=float)
    ranges = histogram_ranges(arr[:, :-1], 0.1)
    for i, inst in enumerate(stream):
        block = arr[20 * i:20 * (i + 1)]
        labels = np.array([stream.label_map[int(v)] for v in block[:, -1]])
        ref = histogram_features(SampleWindow(block[:, :-1], labels), 4, ranges)
        assert np.array_equal(inst.features, ref.features) and inst.label == ref.label
        assert np.allclose(inst.features.reshape(3, 4).sum(axis=1), 1.0)


def test_feature_csv_round_trip(tmp_path):
    src = open_dataset(parse_dataset_id("synth:randomrbf,n=400,seed=2"))
    path = str(tmp_path / "f.csv")
    assert write_csv(src, path) == 400
    back = CsvStream(path, features="none")
    assert back.kind == "features"
    mat = back.materialize()
    remapped = np.array([back.label_map[v] for v in src.y])
    assert np.array_equal(mat.X, src.X) and np.array_equal(mat.y, remapped)


def test_pipeline_mismatches(tmp_path):
    path, _ = sample_file(tmp_path)
    with pytest.raises(UsageError):
        CsvStream(path, features="none")
    feat = write(tmp_path / "f.csv", ["f0", "f1", "label"], [[0.1, 0.2, 1], [0.3, 0.4, 0]])
    with pytest.raises(UsageError):
        CsvStream(feat, features="histogram")
    assert CsvStream(feat).features == "none"


@pytest.mark.parametrize("rows,line", [
    ([[0.1, 0.2, 1], [0.3, "x", 0]], 3),
    ([[0.1, 0.2, 1], [0.3, 0]], 3),
    ([[0.1, 0.2, 1], [0.1, 0.2, 0], ["nan", 0.2, 1]], 4),
    ([[0.1, 0.2, "b"]], 2),
])
def test_malformed_rows_report_line(tmp_path, rows, line):
    path = write(tmp_path / "bad.csv", ["f0", "f1", "label"], rows)
    with pytest.raises(DataError, match=f"bad.csv:{line}:"):
        CsvStream(path)


def test_bad_header(tmp_path):
    with pytest.raises(DataError, match=":1:"):
        CsvStream(write(tmp_path / "h.csv", ["x", "y", "label"], [[1, 2, 0]]))
    with pytest.raises(DataError, match=":1:"):
        CsvStream(write(tmp_path / "h2.csv", ["f0", "f1", "class"], [[1, 2, 0]]))


def test_too_short_for_one_window(tmp_path):
    path, _ = sample_file(tmp_path, n=5)
    with pytest.raises(DataError):
        CsvStream(path, window=10)


def test_drift_on_csv(tmp_path):
    path, _ = sample_file(tmp_path)
    base = CsvStream(path, window=10)
    drifted = base.with_drift(DriftConfig(6, 1))
    a, b = [i.label for i in base], [i.label for i in drifted]
    assert a[:6] == b[:6]
    assert b[6:] == [(v + 1) % 2 for v in a[6:]]
    with pytest.raises(UsageError):
        base.with_drift(DriftConfig(12, 1))
    with pytest.raises(UsageError):
        base.with_drift(DriftConfig(3, 2))


def test_buffer_independent_of_length(tmp_path):
    peaks = []
    for n in (600, 6000):
        d = tmp_path / str(n)
        d.mkdir()
        path, _ = sample_file(d, n=n)
        stream = CsvStream(path, window=10)
        prequential_run(NaiveBayes(6, 2), stream)
        peaks.append(stream.peak_buffer_bytes)
    assert peaks[0] == peaks[1] > 0


def test_blocks_match_iteration(tmp_path):
    path, _ = sample_file(tmp_path, n=300)
    stream = CsvStream(path, window=10)
    X = np.concatenate([bx for bx, _ in stream.iter_blocks(7)])
    y = np.concatenate([by for _, by in stream.iter_blocks(7)])
    items = list(stream)
    assert np.array_equal(X, np.stack([i.features for i in items]))
    assert y.tolist() == [i.label for i in items]

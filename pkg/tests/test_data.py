import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats
from sklearn.base import clone

from eegwgan.data import (
    Dataset,
    FileMinMaxScaler,
    load_dataset_dir,
    make_toy_dataset,
    minmax_scale_file,
    read_segment_csv,
    sample_real_batch,
    write_segment_csv,
    write_toy_dataset,
)
from eegwgan.exceptions import ConfigError, DegenerateFileError, EmptyDatasetError, ParseError, ShapeError

from oracles import naive_dft_power


def _write(path, rows):
    path.write_text("".join(",".join(str(v) for v in r) + "\n" for r in rows))


# -- scaling ------------------------------------------------------------------


def test_scale_single_row():
    np.testing.assert_array_equal(minmax_scale_file([[0, 5, 10]]), [[-1, 0, 1]])


def test_scale_constant_file():
    with pytest.raises(DegenerateFileError):
        minmax_scale_file([[-3, -3], [-3, -3]])


def test_scale_is_file_wise_not_per_row():
    np.testing.assert_array_equal(minmax_scale_file([[0, 10], [5, 10]]), [[-1, 1], [0, 1]])


@settings(max_examples=50)
@given(
    arrays(np.float64, (3, 4), elements=st.floats(-100, 100)),
    st.floats(0.01, 100),
    st.floats(-100, 100),
)
def test_scale_affine_invariant(raw, a, b):
    if raw.max() - raw.min() < 1e-3:
        return
    np.testing.assert_allclose(minmax_scale_file(a * raw + b), minmax_scale_file(raw), atol=1e-5)


@settings(max_examples=50)
@given(arrays(np.float64, (5, 3), elements=st.floats(-1e4, 1e4)))
def test_scale_hits_both_ends(raw):
    if raw.max() == raw.min():
        return
    out = minmax_scale_file(raw)
    assert out.min() == -1 and out.max() == 1


def test_file_scaler_estimator(rng):
    X = rng.normal(5, 3, size=(10, 4))
    scaler = FileMinMaxScaler()
    out = scaler.fit_transform(X)
    np.testing.assert_allclose(out, minmax_scale_file(X), atol=1e-6)
    np.testing.assert_allclose(scaler.inverse_transform(out), X, atol=1e-4)
    assert clone(scaler).get_params() == {}


# -- loading ------------------------------------------------------------------


def test_load_counts_and_order(tmp_path, rng):
    _write(tmp_path / "1_a.csv", rng.normal(size=(3, 32)))
    _write(tmp_path / "0_b.csv", rng.normal(size=(2, 32)))
    ds = load_dataset_dir(tmp_path)
    assert len(ds) == 5
    assert ds.labels.tolist() == [0, 0, 1, 1, 1]


def test_load_ignores_unlabelled_files(tmp_path, rng):
    _write(tmp_path / "0_a.csv", rng.normal(size=(2, 32)))
    _write(tmp_path / "notes.csv", rng.normal(size=(2, 7)))
    (tmp_path / "1_x.txt").write_text("junk")
    assert len(load_dataset_dir(tmp_path)) == 2


def test_load_only_constant_files(tmp_path):
    _write(tmp_path / "0_a.csv", [[1.0] * 32] * 2)
    _write(tmp_path / "1_b.csv", [[7.0] * 32])
    with pytest.warns(UserWarning, match="constant"):
        with pytest.raises(EmptyDatasetError):
            load_dataset_dir(tmp_path)


def test_load_skips_constant_with_warning(tmp_path, rng):
    _write(tmp_path / "0_a.csv", [[1.0] * 32] * 2)
    _write(tmp_path / "1_b.csv", rng.normal(size=(4, 32)))
    with pytest.warns(UserWarning):
        ds = load_dataset_dir(tmp_path)
    assert ds.labels.tolist() == [1] * 4


def test_load_round_trip(tmp_path, rng):
    scaled = minmax_scale_file(rng.normal(size=(6, 32)))
    write_segment_csv(tmp_path / "1_s.csv", scaled)
    ds = load_dataset_dir(tmp_path)
    np.testing.assert_allclose(ds.samples, scaled, atol=1e-6)


def test_load_is_deterministic(tmp_path, rng):
    for name in ("1_c.csv", "0_a.csv", "1_b.csv"):
        _write(tmp_path / name, rng.normal(size=(3, 32)))
    a, b = load_dataset_dir(tmp_path), load_dataset_dir(tmp_path)
    assert a.samples.tobytes() == b.samples.tobytes()
    assert a.labels.tolist() == b.labels.tolist()


def test_parse_error_names_file_and_line(tmp_path):
    path = tmp_path / "0_bad.csv"
    path.write_text("1,2,3\n4,oops,6\n")
    with pytest.raises(ParseError, match=r"0_bad\.csv:2"):
        read_segment_csv(path, seg_len=3)


def test_ragged_rows(tmp_path):
    path = tmp_path / "0_bad.csv"
    path.write_text("1,2,3\n4,5\n")
    with pytest.raises(ParseError, match=":2"):
        read_segment_csv(path, seg_len=3)


def test_wrong_column_count(tmp_path):
    _write(tmp_path / "0_a.csv", [[1, 2, 3]])
    with pytest.raises(ShapeError):
        load_dataset_dir(tmp_path)


def test_missing_directory(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope"):
        load_dataset_dir(tmp_path / "nope")


def test_dataset_invariants():
    with pytest.raises(ValueError):
        Dataset(np.full((2, 32), 1.5), [0, 1])
    with pytest.raises(ShapeError):
        Dataset(np.zeros((2, 32)), [0, 1, 1])
    ds = Dataset(np.zeros((2, 32)), [0, 1])
    with pytest.raises(ValueError):
        ds.samples[0, 0] = 0.5


# -- batch sampling ---------------------------------------------------------------


def test_single_sample_dataset():
    ds = Dataset(np.linspace(-1, 1, 32)[None], [1])
    x, y = sample_real_batch(ds, 10, np.random.default_rng(0))
    assert (x == ds.samples[0]).all() and (y == 1).all()


def test_batch_determinism(small_toy):
    a = sample_real_batch(small_toy, 64, np.random.default_rng(9))
    b = sample_real_batch(small_toy, 64, np.random.default_rng(9))
    assert a[0].tobytes() == b[0].tobytes() and (a[1] == b[1]).all()


def test_batch_labels_paired(small_toy):
    x, y = sample_real_batch(small_toy, 200, np.random.default_rng(1))
    for row, label in zip(x, y):
        matches = np.where((small_toy.samples == row).all(axis=1))[0]
        assert label in small_toy.labels[matches]


def test_batch_uniformity_chi_square():
    ds = Dataset(np.linspace(-1, 1, 10)[:, None] * np.ones((10, 32)), np.arange(10) % 2)
    rng = np.random.default_rng(2024)
    counts = np.zeros(10)
    for _ in range(1000):
        x, _ = sample_real_batch(ds, 100, rng)
        idx = np.rint((x[:, 0] + 1) / 2 * 9).astype(int)
        counts += np.bincount(idx, minlength=10)
    assert counts.sum() == 100_000
    assert stats.chisquare(counts).pvalue > 0.01


def test_batch_from_empty_dataset():
    ds = Dataset(np.zeros((0, 32)), np.zeros(0, dtype=int))
    with pytest.raises(EmptyDatasetError):
        sample_real_batch(ds, 4, np.random.default_rng(0))


# -- toy data -----------------------------------------------------------------


def test_toy_noise_free_peaks_at_f0():
    ds = make_toy_dataset(n_per_class=20, f0=2, f1=6, noise_std=0, seed=1)
    for label, f in ((0, 2), (1, 6)):
        power = naive_dft_power(ds.select(label))
        assert (power[:, 1:].argmax(axis=1) + 1 == f).all()
        assert (power.argmax(axis=1) == f).all()


def test_toy_balance_and_range():
    ds = make_toy_dataset(n_per_class=100, seed=0)
    assert len(ds) == 200
    assert ds.class_counts() == {0: 100, 1: 100}
    assert ds.samples.min() >= -1 and ds.samples.max() <= 1


@pytest.mark.parametrize("f0, f1", [(2, 2), (0, 3), (2, 16), (20, 3)])
def test_toy_invalid_frequencies(f0, f1):
    with pytest.raises(ConfigError):
        make_toy_dataset(n_per_class=5, f0=f0, f1=f1)


def test_toy_written_files_reload(tmp_path):
    ds = make_toy_dataset(n_per_class=30, seed=4)
    paths = write_toy_dataset(ds, tmp_path)
    assert [p.name for p in paths] == ["0_toy.csv", "1_toy.csv"]
    back = load_dataset_dir(tmp_path)
    np.testing.assert_allclose(back.samples, ds.samples, atol=1e-6)
    assert back.labels.tolist() == ds.labels.tolist()

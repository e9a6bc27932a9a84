import numpy as np
import pytest

from relu_forge.data import (
    additive_target,
    make_dataset,
    random_teacher,
    read_dataset_csv,
    sample_separated,
    smooth_product_target,
    sparse_bump_target,
    teacher_labels,
    write_dataset_csv,
)
def test_sample_separated_respects_min_distance():
    for d in (1, 2, 3):
        pts = sample_separated(30, d, seed=d)
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=2))
        dist[np.diag_indices(30)] = np.inf
        assert dist.min() >= 0.5 * 30 ** (-1.0 / d)
        assert np.abs(pts).max() <= 1.0


def test_sample_separated_infeasible_raises():
    with pytest.raises(RuntimeError):
        sample_separated(100, 1, seed=0, min_sep=1.0)


def test_make_dataset_noise_is_bounded():
    target = smooth_product_target(2)
    clean = make_dataset(target, 40, 2, seed=0)
    noisy = make_dataset(target, 40, 2, seed=0, noise=0.25)
    assert np.array_equal(clean.points, noisy.points)
    assert np.abs(noisy.labels - clean.labels).max() <= 0.25


def test_targets_are_bounded_and_vectorized():
    rng = np.random.default_rng(1)
    xs = rng.uniform(-1, 1, size=(500, 3))
    for target in (
        smooth_product_target(3),
        smooth_product_target(3, r=1.5),
        additive_target(3),
        sparse_bump_target(3, N=4, u=5, seed=2),
    ):
        vals = np.asarray(target(xs))
        assert vals.shape == (500,)
        assert np.abs(vals).max() <= 3.0


def test_sparse_target_supported_on_few_cells():
    N, u = 4, 2
    target = sparse_bump_target(2, N=N, u=u, seed=3)
    g = np.linspace(-1, 1, 81)
    xs = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    vals = np.abs(target(xs))
    occupied = set()
    for x, v in zip(xs, vals):
        if v > 1e-12:
            cell = tuple(np.minimum(((x + 1) / 2 * N).astype(int), N - 1))
            occupied.add(cell)
    assert len(occupied) <= u


def test_csv_roundtrip(tmp_path):
    ds = make_dataset(smooth_product_target(2), 12, 2, seed=4)
    path = str(tmp_path / "ds.csv")
    write_dataset_csv(ds, path)
    back = read_dataset_csv(path)
    assert np.array_equal(back.points, ds.points)
    assert np.array_equal(back.labels, ds.labels)


def test_csv_parse_error_names_cell(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x1,y\n0.25,1.0\nnope,0.5\n")
    with pytest.raises(ValueError, match="row 3, column 1"):
        read_dataset_csv(str(path))


def test_csv_requires_y_column(tmp_path):
    path = tmp_path / "noy.csv"
    path.write_text("x1,x2\n0.1,0.2\n")
    with pytest.raises(ValueError, match="'y'"):
        read_dataset_csv(str(path))


def test_random_teacher_bounded_on_cube():
    teacher = random_teacher(2, 2, 8, seed=5)
    rng = np.random.default_rng(6)
    vals = teacher_labels(teacher, rng.uniform(-1, 1, size=(2000, 2)))
    assert np.isfinite(vals).all()
    assert np.abs(vals).max() < 50.0

import numpy as np
import pytest

from locspike.synth import SynthSpec, generate, motif_cells, split


def test_noise_free_samples_identical_per_class():
    ds = generate(SynthSpec(classes=4, taxels=16, steps=40, samples_per_class=5,
                            base_rate=0.0, pattern_strength=1.0, jitter=0, seed=3))
    for c in range(4):
        xs = [x for x, m in ds if m.label == c]
        assert all(np.array_equal(xs[0], x) for x in xs[1:])
    firsts = [next(x for x, m in ds if m.label == c) for c in range(4)]
    for a in range(4):
        for b in range(a + 1, 4):
            assert not np.array_equal(firsts[a], firsts[b])


def test_same_seed_same_data():
    spec = SynthSpec(classes=3, taxels=12, steps=30, samples_per_class=4, seed=11)
    a, b = generate(spec), generate(spec)
    assert [m for _, m in a] == [m for _, m in b]
    assert all(np.array_equal(x, y) for (x, _), (y, _) in zip(a, b))
    c = generate(SynthSpec(classes=3, taxels=12, steps=30, samples_per_class=4, seed=12))
    assert any(not np.array_equal(x, y) for (x, _), (y, _) in zip(a, c))


def test_default_density_in_range():
    ds = generate(SynthSpec(seed=7))
    assert len(ds) == 200 and (ds.channels, ds.steps, ds.classes) == (16, 50, 4)
    density = np.mean([x.mean() for x, _ in ds])
    assert 0.01 <= density <= 0.15


def test_nearest_neighbour_separable_without_noise():
    ds = generate(SynthSpec(classes=4, samples_per_class=10, base_rate=0.0, jitter=0, seed=2))
    X = np.array([x.ravel() for x, _ in ds], dtype=float)
    y = ds.labels
    d = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
    np.fill_diagonal(d, np.inf)
    assert (y[d.argmin(1)] == y).all()


def test_motifs_disjoint():
    spec = SynthSpec()
    sets = [set(motif_cells(spec, c)) for c in range(spec.classes)]
    for a in range(len(sets)):
        for b in range(a + 1, len(sets)):
            assert not sets[a] & sets[b]


def test_infeasible_packing_rejected():
    with pytest.raises(ValueError, match="cannot pack"):
        generate(SynthSpec(classes=8, taxels=8, steps=50, samples_per_class=2))
    with pytest.raises(ValueError):
        SynthSpec(base_rate=0.5, pattern_strength=0.4)


def test_split_stratified():
    ds = generate(SynthSpec(classes=2, taxels=8, steps=20, samples_per_class=50, seed=0))
    tr, te = split(ds, 0.8, seed=5)
    assert np.bincount(tr.labels).tolist() == [40, 40]
    assert np.bincount(te.labels).tolist() == [10, 10]
    ids_tr = {m.sample_id for _, m in tr}
    ids_te = {m.sample_id for _, m in te}
    assert not ids_tr & ids_te
    assert ids_tr | ids_te == {m.sample_id for _, m in ds}
    tr2, _ = split(ds, 0.8, seed=5)
    assert [m for _, m in tr] == [m for _, m in tr2]


@pytest.mark.parametrize("frac", [0.0, 1.0, -0.1, 1.5])
def test_split_rejects_bad_fraction(frac):
    ds = generate(SynthSpec(classes=2, taxels=8, steps=20, samples_per_class=5))
    with pytest.raises(ValueError):
        split(ds, frac)

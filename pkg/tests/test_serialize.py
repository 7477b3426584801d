import json
import os

import numpy as np
import pytest

import kooplift as kl
from kooplift.errors import ConfigError, DataError
from kooplift.serialize import model_from_dict, model_to_dict

from conftest import make_slow_manifold_dataset


@pytest.fixture(scope="module")
def dataset():
    return make_slow_manifold_dataset(grid=3, t_end=3.0)


def _controlled_dataset():
    rng = np.random.default_rng(0)
    A, B = kl.drss(2, 1, seed=3)
    x = rng.normal(size=2)
    rows, us = [x], []
    for _ in range(60):
        u = rng.normal(size=1)
        x = A @ x + B @ u
        rows.append(x)
        us.append(u)
    us.append(np.zeros(1))
    return kl.TrajectoryDataset([np.array(rows)], dt=0.5, inputs=[np.array(us)])


def _models(dataset):
    yield "poly", kl.fit(kl.Polynomial(2), "edmd", dataset), np.array([0.3, -0.4])
    yield "rbf", kl.fit(
        kl.RadialBasis("thinplate", n_centers=6, seed=2), "edmd", dataset
    ), np.array([0.1, 0.6])
    yield "rff", kl.fit(
        kl.RandomFourier(12, sigma=1.2, seed=4), "edmd", dataset
    ), np.array([-0.2, 0.5])
    yield "concat", kl.fit(
        kl.Concat([kl.Identity(), kl.Polynomial(2)]), "edmd", dataset
    ), np.array([0.7, -0.1])
    yield "kdmd", kl.fit(
        None,
        kl.RegressorConfig(kind="kdmd", kernel=kl.KernelConfig(kind="polynomial", degree=2)),
        kl.TrajectoryDataset([t[:30] for t in dataset.trajectories[:4]], dt=dataset.dt),
    ), np.array([0.4, 0.2])
    yield "dmdc", kl.fit(kl.Identity(), "dmdc", _controlled_dataset()), np.array([0.5, -0.5])


def test_roundtrip_simulate_bit_identical(tmp_path, dataset):
    for name, model, x0 in _models(dataset):
        path = str(tmp_path / f"{name}.json")
        kl.save_model(model, path)
        loaded = kl.load_model(path)
        if model.controlled:
            U = np.random.default_rng(1).normal(size=(model.q, 20))
            a = model.simulate(x0, 20, U=U)
            b = loaded.simulate(x0, 20, U=U)
        else:
            a = model.simulate(x0, 20)
            b = loaded.simulate(x0, 20)
        np.testing.assert_array_equal(a, b), name


def test_roundtrip_spectral_objects(tmp_path, dataset):
    model = kl.fit(kl.Polynomial(2), "edmd", dataset)
    path = str(tmp_path / "m.json")
    kl.save_model(model, path)
    loaded = kl.load_model(path)
    np.testing.assert_array_equal(model.eigenvalues, loaded.eigenvalues)
    np.testing.assert_array_equal(
        model.continuous_eigenvalues(), loaded.continuous_eigenvalues()
    )
    x = np.array([0.2, 0.9])
    np.testing.assert_array_equal(model.eigenfunctions(x), loaded.eigenfunctions(x))
    ta, tb = model.koopman_modes(), loaded.koopman_modes()
    np.testing.assert_array_equal(ta.modes, tb.modes)
    np.testing.assert_array_equal(ta.amplitudes, tb.amplitudes)
    np.testing.assert_array_equal(ta.scores, tb.scores)


def test_saved_file_is_deterministic(tmp_path, dataset):
    model = kl.fit(kl.Polynomial(2), "edmd", dataset)
    p1, p2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    kl.save_model(model, p1)
    kl.save_model(model, p2)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_dict_roundtrip_without_file(dataset):
    model = kl.fit(kl.RandomFourier(8, seed=1), "edmd", dataset)
    d = json.loads(json.dumps(model_to_dict(model)))
    loaded = model_from_dict(d)
    x0 = np.array([0.25, -0.75])
    np.testing.assert_array_equal(model.simulate(x0, 10), loaded.simulate(x0, 10))


def test_schema_top_level_keys(dataset):
    model = kl.fit(kl.Polynomial(2), "edmd", dataset)
    d = model_to_dict(model)
    assert set(d) == {
        "schema_version", "dt", "n", "q", "observables", "A", "C", "eigen", "metadata",
    }
    assert d["schema_version"] == 1
    cm = kl.fit(kl.Identity(), "dmdc", _controlled_dataset())
    assert "B" in model_to_dict(cm)


def test_complex_encoding_pairs(dataset):
    model = kl.fit(kl.Polynomial(2), "edmd", dataset)
    d = model_to_dict(model)
    lam = d["eigen"]["lambdas"]
    assert all(len(pair) == 2 for pair in lam)
    vals = np.array([complex(re, im) for re, im in lam])
    np.testing.assert_array_equal(vals, model.eigenvalues)


def test_load_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DataError, match="not valid JSON"):
        kl.load_model(str(p))
    p.write_text(json.dumps({"schema_version": 99}))
    with pytest.raises(DataError, match="schema version"):
        kl.load_model(str(p))
    p.write_text(json.dumps({"schema_version": 1, "dt": 0.1}))
    with pytest.raises(DataError, match="missing keys"):
        kl.load_model(str(p))
    with pytest.raises(DataError):
        kl.load_model(str(tmp_path / "missing.json"))


def test_custom_observables_refuse_serialization(dataset):
    model = kl.fit(kl.Custom([lambda x: x[0] ** 2]), "edmd", dataset)
    with pytest.raises(ConfigError, match="serialized"):
        model_to_dict(model)


def test_observable_config_roundtrip_lifts_identically(dataset):
    libs = [
        kl.Polynomial(3),
        kl.TimeDelay(2),
        kl.RandomFourier(9, sigma=0.6, seed=7),
        kl.Concat([kl.Identity(), kl.Polynomial(2)]),
    ]
    rows = np.random.default_rng(2).normal(size=(5, 2))
    for lib in libs:
        lib.bind(2)
        lib.prepare(rows)
        clone = kl.observable_from_config(json.loads(json.dumps(lib.config())))
        if isinstance(lib, kl.TimeDelay):
            np.testing.assert_array_equal(
                lib.lift_trajectory(rows), clone.lift_trajectory(rows)
            )
        else:
            np.testing.assert_array_equal(lib.lift_rows(rows), clone.lift_rows(rows))


def test_observable_config_rejects_unknown(dataset):
    with pytest.raises(ConfigError, match="unknown observable kind"):
        kl.observable_from_config({"kind": "wavelet"})
    with pytest.raises(ConfigError, match="unknown keys"):
        kl.observable_from_config({"kind": "polynomial", "degree": 2, "foo": 1})


def test_atomic_write_replaces_not_partial(tmp_path):
    from kooplift.serialize import atomic_write_text

    target = tmp_path / "out.txt"
    atomic_write_text(str(target), "hello\n")
    assert target.read_text() == "hello\n"
    leftovers = [p for p in os.listdir(tmp_path) if p.startswith(".tmp-")]
    assert leftovers == []

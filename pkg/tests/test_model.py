import numpy as np
import pytest

import kooplift as kl
from kooplift.errors import ConfigError, DataError, RegressionError

from conftest import make_slow_manifold_dataset

TARGET_MUS = (-0.05, -0.1, -1.0)


def _linear_dataset(A, x0s, steps, dt=1.0):
    trajs = []
    for x0 in x0s:
        rows = [np.asarray(x0, dtype=float)]
        for _ in range(steps):
            rows.append(A @ rows[-1])
        trajs.append(np.array(rows))
    return kl.TrajectoryDataset(trajs, dt=dt)


@pytest.fixture(scope="module")
def diag_model():
    A = np.diag([0.9, 0.5])
    ds = _linear_dataset(A, [[1.0, 0.2], [0.3, 1.0]], 10)
    return kl.fit(kl.Identity(), "dmd", ds)


@pytest.fixture(scope="module")
def fig1_lift_model(slow_manifold_small):
    # the exactly closed (x1, x2, x1^2) embedding
    return kl.fit(kl.Custom([lambda x: x[0] ** 2]), "edmd", slow_manifold_small)


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def test_fit_slow_manifold_spectrum(slow_manifold_poly_model):
    model = slow_manifold_poly_model
    assert model.metadata["rank"] == 6
    mus = model.continuous_eigenvalues()
    for target in TARGET_MUS:
        assert np.min(np.abs(mus - target)) < 1e-4


def test_fit_identity_dmd_recovers_generator(diag_model):
    np.testing.assert_allclose(diag_model.A, np.diag([0.9, 0.5]), atol=1e-10)


def test_fit_empty_dataset():
    with pytest.raises(kl.DataError, match="no trajectories"):
        kl.fit(kl.Identity(), "dmd", kl.TrajectoryDataset([], dt=1.0))


def test_fit_stage_labels(slow_manifold_small):
    with pytest.raises(DataError, match="lifting stage"):
        kl.fit(kl.TimeDelay(10_000), "hdmd", slow_manifold_small)
    zeros = kl.TrajectoryDataset([np.zeros((5, 2))], dt=1.0)
    with pytest.raises(RegressionError, match="regression stage"):
        kl.fit(kl.Identity(), "dmd", zeros)
    tiny = kl.TrajectoryDataset([np.random.default_rng(0).normal(size=(4, 2))], dt=1.0)
    with pytest.raises(DataError, match="reconstruction stage"):
        kl.fit(kl.RandomFourier(32, seed=0, include_state=False), "edmd", tiny)


def test_fit_input_consistency_checks(slow_manifold_small):
    with pytest.raises(ConfigError, match="requires input data"):
        kl.fit(kl.Identity(), "dmdc", slow_manifold_small)
    ds = kl.TrajectoryDataset(
        [np.random.default_rng(0).normal(size=(5, 2))], dt=1.0,
        inputs=[np.ones((5, 1))],
    )
    with pytest.raises(ConfigError, match="unforced"):
        kl.fit(kl.Identity(), "dmd", ds)


def test_fit_kdmd_rejects_nontrivial_observables(slow_manifold_small):
    with pytest.raises(ConfigError, match="identity"):
        kl.fit(kl.Polynomial(2), "kdmd", slow_manifold_small)


def test_regressor_config_validation():
    with pytest.raises(ConfigError, match="unknown regressor kind"):
        kl.RegressorConfig(kind="sindy")
    with pytest.raises(ConfigError, match="delays only applies"):
        kl.RegressorConfig(kind="edmd", delays=2)
    with pytest.raises(ConfigError, match="kernel only applies"):
        kl.RegressorConfig(kind="edmd", kernel=kl.KernelConfig())
    with pytest.raises(ConfigError, match="rank_in/rank_out"):
        kl.RegressorConfig(kind="dmdc", rank=3)
    with pytest.raises(ConfigError, match="controlled"):
        kl.RegressorConfig(kind="edmd", rank_in=3)
    assert kl.RegressorConfig(kind="kdmd").kernel is not None


# ---------------------------------------------------------------------------
# predict
# ---------------------------------------------------------------------------

def test_predict_linear(diag_model):
    np.testing.assert_allclose(
        diag_model.predict(np.array([1.0, 1.0])), [0.9, 0.5], atol=1e-10
    )


def test_predict_fixed_point(slow_manifold_poly_model):
    out = slow_manifold_poly_model.predict(np.zeros(2))
    assert np.max(np.abs(out)) <= 1e-8


def _controlled_scalar_model():
    rng = np.random.default_rng(7)
    u = rng.normal(size=40)
    x = [0.3]
    for k in range(40):
        x.append(0.5 * x[-1] + 1.0 * u[k])
    ds = kl.TrajectoryDataset(
        [np.array(x)[:, None]], dt=1.0, inputs=[np.append(u, 0.0)[:, None]]
    )
    return kl.fit(kl.Identity(), "dmdc", ds)


def test_predict_controlled_scalar():
    model = _controlled_scalar_model()
    assert model.controlled and model.q == 1
    assert model.A[0, 0] == pytest.approx(0.5, abs=1e-10)
    assert model.B[0, 0] == pytest.approx(1.0, abs=1e-10)
    assert model.predict(np.array([2.0]), u=np.array([1.0]))[0] == pytest.approx(2.0, abs=1e-9)


def test_predict_input_validation(diag_model):
    with pytest.raises(DataError, match="unforced"):
        diag_model.predict(np.array([1.0, 1.0]), u=np.array([1.0]))
    model = _controlled_scalar_model()
    with pytest.raises(DataError, match="controlled"):
        model.predict(np.array([1.0]))


def test_predict_composition_identity(slow_manifold_poly_model):
    model = slow_manifold_poly_model
    rng = np.random.default_rng(11)
    for _ in range(5):
        x = rng.uniform(-1, 1, size=2)
        manual = model.C.apply_vec(model.A @ model.observables.lift(x))
        np.testing.assert_allclose(model.predict(x), manual, rtol=1e-12, atol=1e-14)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_zero_steps(diag_model):
    out = diag_model.simulate(np.array([0.4, -0.2]), 0)
    np.testing.assert_array_equal(out, [[0.4, -0.2]])


def test_simulate_equals_one_predict(diag_model):
    x0 = np.array([0.7, -1.2])
    np.testing.assert_array_equal(
        diag_model.simulate(x0, 1)[1], diag_model.predict(x0)
    )


def test_simulate_matches_relifted_predict_for_exact_closure(fig1_lift_model):
    model = fig1_lift_model
    x0 = np.array([0.8, -0.6])
    sim = model.simulate(x0, 30)
    x = x0
    for k in range(1, 31):
        x = model.predict(x)
        assert np.max(np.abs(x - sim[k])) <= 1e-8


def test_simulate_semigroup_property(fig1_lift_model):
    model = fig1_lift_model
    x0 = np.array([-0.9, 0.4])
    whole = model.simulate(x0, 40)
    first = model.simulate(x0, 15)
    second = model.simulate(first[-1], 25)
    np.testing.assert_allclose(second, whole[15:], atol=1e-8)


def test_simulate_input_validation():
    model = _controlled_scalar_model()
    with pytest.raises(DataError, match="controlled"):
        model.simulate(np.array([1.0]), 5)
    with pytest.raises(DataError, match="shape"):
        model.simulate(np.array([1.0]), 5, U=np.ones((1, 4)))
    out = model.simulate(np.array([1.0]), 5, U=np.zeros((1, 5)))
    assert out.shape == (6, 1)
    np.testing.assert_allclose(out[:, 0], 1.0 * 0.5 ** np.arange(6), atol=1e-9)


# ---------------------------------------------------------------------------
# spectral analytics
# ---------------------------------------------------------------------------

def _abs_corr(f, g):
    f = np.asarray(f, dtype=complex) - np.mean(f)
    g = np.asarray(g, dtype=complex) - np.mean(g)
    return abs(np.vdot(f, g)) / (np.linalg.norm(f) * np.linalg.norm(g))


@pytest.fixture(scope="module")
def grid_points():
    g = np.linspace(-1.0, 1.0, 50)
    return np.array([[a, b] for a in g for b in g])


def test_eigenfunction_slow_mode_is_x1(slow_manifold_poly_model, grid_points):
    model = slow_manifold_poly_model
    mus = model.continuous_eigenvalues()
    j = int(np.argmin(np.abs(mus - (-0.05))))
    phi = model.eigenfunctions_rows(grid_points)[:, j]
    assert _abs_corr(phi, grid_points[:, 0]) >= 1.0 - 1e-6


def test_eigenfunction_fast_mode_formula(slow_manifold_poly_model, grid_points):
    # analytic eigenfunction for mu = -1 is proportional to x2 - x1^2 / 0.9
    model = slow_manifold_poly_model
    mus = model.continuous_eigenvalues()
    j = int(np.argmin(np.abs(mus - (-1.0))))
    phi = model.eigenfunctions_rows(grid_points)[:, j]
    target = grid_points[:, 1] - grid_points[:, 0] ** 2 / 0.9
    assert _abs_corr(phi, target) >= 1.0 - 1e-6


def test_eigenfunctions_vanish_at_origin(slow_manifold_poly_model):
    # monomials vanish at 0, so eigenfunctions without a constant-feature
    # component must too; that is exactly the closed-subspace modes here
    model = slow_manifold_poly_model
    phi = model.eigenfunctions(np.zeros(2))
    mus = model.continuous_eigenvalues()
    for target in TARGET_MUS:
        j = int(np.argmin(np.abs(mus - target)))
        assert abs(phi[j]) < 1e-8
        assert abs(model.regression.eigensystem.W_left[0, j]) < 1e-8


def test_eigenfunctions_batch_matches_single(slow_manifold_poly_model):
    model = slow_manifold_poly_model
    x = np.array([0.3, -0.4])
    np.testing.assert_allclose(
        model.eigenfunctions_rows(x[None, :])[0], model.eigenfunctions(x),
        rtol=1e-12, atol=1e-14,
    )


def test_koopman_modes_diagonal(diag_model):
    table = diag_model.koopman_modes()
    assert len(table) == 2
    for j in range(2):
        v = table.modes[:, j]
        v = v / v[np.argmax(np.abs(v))]
        expected = np.zeros(2)
        expected[j] = 1.0
        np.testing.assert_allclose(v.real, expected, atol=1e-10)
        np.testing.assert_allclose(v.imag, 0.0, atol=1e-10)


def test_mode_sum_reproduces_simulate(fig1_lift_model, slow_manifold_small):
    model = fig1_lift_model
    x0 = slow_manifold_small.trajectories[0][0]
    table = model.koopman_modes()
    K = 100
    sim = model.simulate(x0, K)
    powers = table.lambdas[None, :] ** np.arange(K + 1)[:, None]
    recon = (powers * table.amplitudes[None, :]) @ table.modes.T
    assert np.max(np.abs(recon.real - sim)) <= 1e-8
    assert np.max(np.abs(recon.imag)) <= 1e-8


def test_mode_for_slow_eigenvalue_has_no_x2_component(fig1_lift_model):
    # reconstruction column for the x1 eigenfunction is (1, 0)
    table = fig1_lift_model.koopman_modes()
    j = int(np.argmin(np.abs(table.mus - (-0.05))))
    v = table.modes[:, j]
    assert abs(v[1]) <= 1e-6 * abs(v[0])


def test_mode_table_rows(diag_model):
    rows = diag_model.koopman_modes().as_rows()
    assert len(rows) == 2
    assert set(rows[0]) == {"lambda", "mu", "mode", "amplitude", "score"}


# ---------------------------------------------------------------------------
# linearity consistency
# ---------------------------------------------------------------------------

def test_linearity_scores_exact_closure(fig1_lift_model, slow_manifold_small):
    scores, findings = fig1_lift_model.linearity_consistency(slow_manifold_small)
    assert findings == []
    assert np.nanmax(scores) <= 1e-6
    np.testing.assert_allclose(scores, fig1_lift_model.training_scores, atol=1e-12)


def test_linearity_scores_degrade_under_truncation():
    ds = make_slow_manifold_dataset(grid=3, t_end=2.0)
    wide = kl.TrajectoryDataset([2.0 * t for t in ds.trajectories], dt=ds.dt)
    truncated = kl.fit(kl.Polynomial(2), kl.RegressorConfig(kind="edmd", rank=2), wide)
    assert np.nanmax(truncated.training_scores) > 1e-2


def test_linearity_scores_identity_dynamics():
    trajs = [np.tile([1.0, 2.0], (6, 1)), np.tile([0.5, -1.0], (6, 1))]
    ds = kl.TrajectoryDataset(trajs, dt=1.0)
    model = kl.fit(kl.Identity(), "dmd", ds)
    scores, _ = model.linearity_consistency(ds)
    np.testing.assert_allclose(model.eigenvalues, np.ones(model.metadata["rank"]))
    assert np.nanmax(scores) <= 1e-12


def test_linearity_nan_sentinel():
    from kooplift.model import _consistency_scores

    phi_x = np.array([[0.0, 0.0], [1.0, 2.0]])
    phi_xp = np.array([[0.0, 0.0], [1.0, 2.0]])
    scores, findings = _consistency_scores(phi_x, phi_xp, np.array([1.0, 1.0]))
    assert np.isnan(scores[0]) and scores[1] == 0.0
    assert len(findings) == 1 and "vanishes" in findings[0]


def test_scores_bounded_by_residual_over_sigma_min(slow_manifold_poly_model):
    m = slow_manifold_poly_model
    bound = m.metadata["residual_fro"] / m.metadata["sigma_min"]
    assert np.nanmax(m.training_scores) <= bound * (1 + 1e-9)


# ---------------------------------------------------------------------------
# continuous eigenvalues
# ---------------------------------------------------------------------------

def test_continuous_eigenvalue_arithmetic(diag_model):
    es = kl.eig_biorthogonal(np.diag([np.exp(-0.02), 1.0]), dt=0.02)
    assert es.mus[1] == pytest.approx(-1.0, abs=1e-12)
    assert es.mus[0] == pytest.approx(0.0, abs=1e-12)
    # a 7-digit rounding of exp(-0.02) lands 1.4e-6 away from mu = -1
    es2 = kl.eig_biorthogonal(np.array([[0.9801987]]), dt=0.02)
    assert es2.mus[0].real == pytest.approx(-0.999998638375819, abs=1e-12)
    assert es2.mus[0].real == pytest.approx(-1.0, abs=2e-6)


def test_model_reports_branch_findings():
    A = np.diag([-0.5, 0.25])
    ds = _linear_dataset(A, [[1.0, 1.0], [0.5, -1.0]], 8)
    model = kl.fit(kl.Identity(), "dmd", ds)
    assert any("aliasing-ambiguous" in f for f in model.regression.eigensystem.findings)


# ---------------------------------------------------------------------------
# eigen residual and reconstruction invariants
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("fixture_name", ["slow_manifold_poly_model", "diag_model",
                                          "fig1_lift_model"])
def test_eigen_residual_bound(fixture_name, request):
    model = request.getfixturevalue(fixture_name)
    es = model.regression.eigensystem
    R = model.A @ es.W_right - es.W_right * es.lambdas[None, :]
    assert np.max(np.abs(R)) <= 1e-8 * np.linalg.norm(model.A)


def test_reconstruction_exact_on_lifted_training_data(slow_manifold_poly_model,
                                                      slow_manifold_small):
    model = slow_manifold_poly_model
    pairs = kl.build_snapshot_pairs(slow_manifold_small)
    Z = model.observables.lift_rows(pairs.X.T.copy()).T
    np.testing.assert_array_equal(model.C.apply_cols(Z), pairs.X)


# ---------------------------------------------------------------------------
# time-delay and kernel pipelines
# ---------------------------------------------------------------------------

def test_time_delay_pipeline_roundtrip():
    dt, omega = 0.1, 1.1
    k = np.arange(300)
    sig = np.cos(omega * k * dt)[:, None]
    ds = kl.TrajectoryDataset([sig], dt=dt)
    model = kl.fit(None, kl.RegressorConfig(kind="hdmd", delays=2), ds)
    assert isinstance(model.observables, kl.TimeDelay)
    window = sig[:3]  # oldest first
    sim = model.simulate(window, 50)
    np.testing.assert_allclose(sim[:, 0], np.cos(omega * (k[2:53]) * dt), atol=1e-8)
    # first output row is the most recent window state
    assert sim[0, 0] == sig[2, 0]
    one = model.predict(window)
    np.testing.assert_allclose(one[0], sim[1, 0], atol=1e-12)


def test_hdmdc_pipeline():
    rng = np.random.default_rng(5)
    a, b = 0.7, 0.5
    u = rng.normal(size=80)
    x = [0.1]
    for k in range(80):
        x.append(a * x[-1] + b * u[k])
    ds = kl.TrajectoryDataset(
        [np.array(x)[:, None]], dt=1.0, inputs=[np.append(u, 0.0)[:, None]]
    )
    model = kl.fit(None, kl.RegressorConfig(kind="hdmdc", delays=1), ds)
    assert model.controlled
    window = np.array([[0.0], [1.0]])
    out = model.predict(window, u=np.array([0.25]))
    assert out[0] == pytest.approx(a * 1.0 + b * 0.25, abs=1e-8)


def test_kdmd_pipeline_linear_data():
    A = np.diag([0.9, 0.5])
    ds = _linear_dataset(A, [[1.0, 0.2], [0.3, 1.0], [-0.5, 0.7]], 20)
    model = kl.fit(None, kl.RegressorConfig(
        kind="kdmd", kernel=kl.KernelConfig(kind="polynomial", degree=2)), ds)
    x = np.array([0.4, -0.3])
    np.testing.assert_allclose(model.predict(x), A @ x, atol=1e-8)
    sim = model.simulate(np.array([1.0, 0.5]), 10)
    truth = np.array([[0.9**k, 0.5**k] for k in range(11)]) * np.array([1.0, 0.5])
    np.testing.assert_allclose(sim, truth, atol=1e-8)
    phi0 = model.eigenfunctions(np.array([0.7, 0.1]))
    assert phi0.shape == (model.metadata["rank"],)
    scores, _ = model.linearity_consistency(ds)
    assert np.nanmax(scores) <= 1e-6
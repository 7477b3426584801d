import numpy as np
import pytest

import kooplift as kl


def make_slow_manifold_dataset(grid=10, t_end=50.0, dt=0.02):
    """Grid of initial conditions on [-1, 1]^2 integrated with fixed-step RK4."""
    pts = np.linspace(-1.0, 1.0, grid)
    X0 = np.array([[a, b] for a in pts for b in pts])
    spec = kl.get_system("slow_manifold")
    n_samples = int(round(t_end / dt))  # t = arange(0, t_end, dt)
    batch = kl.integrate_rk4_batch(spec, X0, dt, n_samples - 1)
    return kl.TrajectoryDataset(list(batch), dt=dt)


@pytest.fixture(scope="session")
def slow_manifold_small():
    """Reduced dataset for unit tests: 3x3 grid, 10 time units."""
    return make_slow_manifold_dataset(grid=3, t_end=10.0)


@pytest.fixture(scope="session")
def slow_manifold_poly_model(slow_manifold_small):
    return kl.fit(kl.Polynomial(2), "edmd", slow_manifold_small)

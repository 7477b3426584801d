"""Observable libraries: lifting maps from state space into feature space.

Every library maps an n-dimensional state to an N-dimensional lifted vector
and knows how to get back: libraries that embed the state verbatim carry the
embedding indices (exact reconstruction), the rest fall back to a fitted
linear reconstruction map.

Libraries are immutable once bound to an input dimension; lifting the same
input twice yields bit-identical output, with any randomness fixed by a
stored seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import ConfigError, DataError

__all__ = [
    "Observable",
    "Identity",
    "Polynomial",
    "TimeDelay",
    "RadialBasis",
    "RandomFourier",
    "Custom",
    "Concat",
    "KernelLift",
    "ReconstructionMap",
    "fit_reconstruction",
    "observable_from_config",
]

_RBF_KIND_IDS = {
    "thinplate": _kernels.RBF_THINPLATE,
    "gauss": _kernels.RBF_GAUSS,
    "invquad": _kernels.RBF_INVQUAD,
    "invmultiquad": _kernels.RBF_INVMULTIQUAD,
    "polyharmonic": _kernels.RBF_POLYHARMONIC,
}


class Observable:
    """Base class for lifting maps."""

    kind: str = "base"

    def __init__(self):
        self.n_input: Optional[int] = None

    # -- binding ------------------------------------------------------------
    def bind(self, n_input: int) -> "Observable":
        """Fix the input dimension; idempotent, errors on a conflicting rebind."""
        if n_input < 1:
            raise ConfigError(f"n_input must be >= 1, got {n_input}")
        if self.n_input is not None:
            if self.n_input != n_input:
                raise ConfigError(
                    f"{self.kind} library already bound to n={self.n_input}, "
                    f"cannot rebind to n={n_input}"
                )
            return self
        self.n_input = int(n_input)
        self._on_bind()
        return self

    def _on_bind(self):
        pass

    def prepare(self, X_rows: np.ndarray) -> None:
        """Data-dependent setup hook (e.g. drawing centers); default no-op."""

    def _require_bound(self):
        if self.n_input is None:
            raise ConfigError(f"{self.kind} library is not bound to an input dimension")

    # -- lifting ------------------------------------------------------------
    @property
    def n_output(self) -> int:
        raise NotImplementedError

    @property
    def state_indices(self) -> Optional[tuple]:
        """Lifted coordinates that equal the state verbatim, or None."""
        return None

    def lift_rows(self, X: np.ndarray) -> np.ndarray:
        """Lift a batch of states, one per row: (m, n) -> (m, N)."""
        raise NotImplementedError

    def lift(self, x) -> np.ndarray:
        """Lift a single state vector: (n,) -> (N,)."""
        x = np.asarray(x, dtype=float)
        self._require_bound()
        if x.shape != (self.n_input,):
            raise DataError(
                f"expected state of dimension {self.n_input}, got shape {x.shape}"
            )
        return self.lift_rows(x[None, :])[0]

    def config(self) -> dict:
        raise NotImplementedError


class Identity(Observable):
    """The trivial lift: z = x."""

    kind = "identity"

    @property
    def n_output(self) -> int:
        self._require_bound()
        return self.n_input

    @property
    def state_indices(self):
        self._require_bound()
        return tuple(range(self.n_input))

    def lift_rows(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_input:
            raise DataError(f"expected {self.n_input} columns, got {X.shape[1]}")
        return X.copy()

    def config(self):
        return {"kind": self.kind, "n_input": self.n_input}


class Polynomial(Observable):
    """All monomials of total degree 0..degree.

    Ordering is fixed so serialized models are portable: the constant term
    first, then degree by degree, and within a degree by exponent tuple with
    earlier coordinates taking higher powers first. For n=2, degree=2 this
    gives (1, x1, x2, x1^2, x1*x2, x2^2). The linear block sits at indices
    1..n, so reconstruction is an exact index selection.
    """

    kind = "polynomial"

    def __init__(self, degree: int):
        super().__init__()
        if degree < 1:
            raise ConfigError(f"polynomial degree must be >= 1, got {degree}")
        self.degree = int(degree)
        self._exps: Optional[np.ndarray] = None

    def _on_bind(self):
        n = self.n_input
        rows = [np.zeros(n, dtype=np.int64)]
        for deg in range(1, self.degree + 1):
            for combo in combinations_with_replacement(range(n), deg):
                e = np.zeros(n, dtype=np.int64)
                for idx in combo:
                    e[idx] += 1
                rows.append(e)
        self._exps = np.array(rows, dtype=np.int64)

    @property
    def exponents(self) -> np.ndarray:
        self._require_bound()
        return self._exps

    @property
    def n_output(self) -> int:
        self._require_bound()
        return self._exps.shape[0]

    @property
    def state_indices(self):
        self._require_bound()
        return tuple(range(1, self.n_input + 1))

    def lift_rows(self, X):
        self._require_bound()
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_input:
            raise DataError(f"expected {self.n_input} columns, got {X.shape[1]}")
        return _kernels.poly_features(X, self._exps)

    def config(self):
        return {"kind": self.kind, "n_input": self.n_input, "degree": self.degree}


class TimeDelay(Observable):
    """Delay embedding: stack the current state with its d predecessors.

    The lifted vector is [x_k; x_{k-1}; ...; x_{k-d}] (most recent first),
    so a trajectory of T samples yields T - d lifted snapshots; the earliest
    d samples are consumed as warm-up (no zero padding). Reconstruction
    selects the leading state block.
    """

    kind = "time_delay"

    def __init__(self, delays: int):
        super().__init__()
        if delays < 0:
            raise ConfigError(f"delays must be >= 0, got {delays}")
        self.delays = int(delays)

    @property
    def n_output(self) -> int:
        self._require_bound()
        return self.n_input * (self.delays + 1)

    @property
    def state_indices(self):
        self._require_bound()
        return tuple(range(self.n_input))

    def lift_window(self, window: np.ndarray) -> np.ndarray:
        """Lift one window of d+1 consecutive states (rows in time order)."""
        self._require_bound()
        w = np.asarray(window, dtype=float)
        if w.ndim == 1:
            w = w.reshape(-1, self.n_input)
        if w.shape != (self.delays + 1, self.n_input):
            raise DataError(
                f"need a window of {self.delays + 1} states of dimension "
                f"{self.n_input}, got shape {w.shape}"
            )
        return w[::-1].reshape(-1).copy()

    def lift_trajectory(self, traj: np.ndarray) -> np.ndarray:
        """Embed a whole trajectory: (T, n) -> (T - d, n*(d+1))."""
        self._require_bound()
        traj = np.asarray(traj, dtype=float)
        T = traj.shape[0]
        d = self.delays
        if T < d + 1:
            raise DataError(
                f"trajectory with {T} samples is too short for {d} delays"
            )
        blocks = [traj[d - j : T - j] for j in range(d + 1)]
        return np.hstack(blocks)

    def lift_rows(self, X):
        # rows are already embedded vectors; d = 0 behaves as identity
        self._require_bound()
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_output:
            raise DataError(
                f"expected embedded rows of dimension {self.n_output}, got {X.shape[1]}"
            )
        return X.copy()

    def lift(self, x):
        x = np.asarray(x, dtype=float)
        self._require_bound()
        if x.ndim == 2 or x.size == self.n_output:
            if x.ndim == 2:
                return self.lift_window(x)
            return x.astype(float).copy()
        raise DataError(
            f"time-delay lift needs a (d+1, n) window or an embedded vector of "
            f"length {self.n_output}, got shape {x.shape}"
        )

    def config(self):
        return {"kind": self.kind, "n_input": self.n_input, "delays": self.delays}


class RadialBasis(Observable):
    """State plus radial features around a set of centers.

    The state is prepended so reconstruction stays exact. Centers are either
    given explicitly (k, n) or drawn uniformly (without replacement) from the
    training rows at fit time, fixed by `seed`.

    Args:
        rbf_kind: one of thinplate, gauss, invquad, invmultiquad, polyharmonic.
        centers: explicit (k, n) center matrix, or None to sample from data.
        n_centers: number of centers to sample when `centers` is None.
        shape_eps: shape parameter for the scaled kinds.
        seed: RNG seed for center sampling.
        ph_exp: exponent for the polyharmonic kind.
    """

    kind = "rbf"

    def __init__(
        self,
        rbf_kind: str = "thinplate",
        centers: Optional[np.ndarray] = None,
        n_centers: int = 10,
        shape_eps: float = 1.0,
        seed: int = 0,
        ph_exp: int = 3,
    ):
        super().__init__()
        if rbf_kind not in _RBF_KIND_IDS:
            raise ConfigError(
                f"unknown rbf kind {rbf_kind!r}; choose from {sorted(_RBF_KIND_IDS)}"
            )
        if shape_eps <= 0:
            raise ConfigError(f"shape_eps must be positive, got {shape_eps}")
        if centers is None and n_centers < 1:
            raise ConfigError(f"n_centers must be >= 1, got {n_centers}")
        if ph_exp < 1:
            raise ConfigError(f"ph_exp must be >= 1, got {ph_exp}")
        self.rbf_kind = rbf_kind
        self.shape_eps = float(shape_eps)
        self.seed = int(seed)
        self.n_centers = int(n_centers)
        self.ph_exp = int(ph_exp)
        self.centers = None if centers is None else np.array(centers, dtype=float)
        if self.centers is not None and self.centers.ndim != 2:
            raise ConfigError("centers must be a (k, n) matrix")

    def _on_bind(self):
        if self.centers is not None and self.centers.shape[1] != self.n_input:
            raise ConfigError(
                f"centers have dimension {self.centers.shape[1]}, state has "
                f"{self.n_input}"
            )

    def prepare(self, X_rows):
        if self.centers is not None:
            return
        m = X_rows.shape[0]
        if m < self.n_centers:
            raise DataError(
                f"cannot draw {self.n_centers} centers from {m} training rows"
            )
        rng = np.random.default_rng(self.seed)
        idx = rng.choice(m, size=self.n_centers, replace=False)
        self.centers = np.array(X_rows[np.sort(idx)], dtype=float)

    def _require_centers(self):
        if self.centers is None:
            raise ConfigError("rbf centers not set; call prepare() with training data")

    @property
    def n_output(self) -> int:
        self._require_bound()
        self._require_centers()
        return self.n_input + self.centers.shape[0]

    @property
    def state_indices(self):
        self._require_bound()
        return tuple(range(self.n_input))

    def lift_rows(self, X):
        self._require_bound()
        self._require_centers()
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_input:
            raise DataError(f"expected {self.n_input} columns, got {X.shape[1]}")
        feats = _kernels.rbf_features(
            X, self.centers, _RBF_KIND_IDS[self.rbf_kind], self.shape_eps, self.ph_exp
        )
        return np.hstack([X, feats])

    def config(self):
        self._require_centers()
        return {
            "kind": self.kind,
            "n_input": self.n_input,
            "rbf_kind": self.rbf_kind,
            "shape_eps": self.shape_eps,
            "seed": self.seed,
            "ph_exp": self.ph_exp,
            "centers": self.centers.tolist(),
        }


class RandomFourier(Observable):
    """Random Fourier features sqrt(2/D) cos(w.x + b).

    Frequencies w are i.i.d. zero-mean Gaussian with covariance sigma^-2 I and
    phases b uniform on [0, 2pi), both drawn once from `seed` when the library
    is bound. With `include_state` the state is prepended (exact
    reconstruction); otherwise reconstruction is fitted by least squares.
    In expectation over draws, phi(x).phi(y) approximates the Gaussian kernel
    exp(-||x - y||^2 / (2 sigma^2)).
    """

    kind = "random_fourier"

    def __init__(
        self,
        n_features: int,
        sigma: float = 1.0,
        seed: int = 0,
        include_state: bool = True,
    ):
        super().__init__()
        if n_features < 1:
            raise ConfigError(f"n_features must be >= 1, got {n_features}")
        if sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {sigma}")
        self.n_features = int(n_features)
        self.sigma = float(sigma)
        self.seed = int(seed)
        self.include_state = bool(include_state)
        self.W: Optional[np.ndarray] = None
        self.b: Optional[np.ndarray] = None

    def _on_bind(self):
        rng = np.random.default_rng(self.seed)
        self.W = rng.normal(0.0, 1.0 / self.sigma, size=(self.n_input, self.n_features))
        self.b = rng.uniform(0.0, 2.0 * math.pi, size=self.n_features)

    @property
    def n_output(self) -> int:
        self._require_bound()
        return (self.n_input if self.include_state else 0) + self.n_features

    @property
    def state_indices(self):
        self._require_bound()
        if self.include_state:
            return tuple(range(self.n_input))
        return None

    def lift_rows(self, X):
        self._require_bound()
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_input:
            raise DataError(f"expected {self.n_input} columns, got {X.shape[1]}")
        feats = _kernels.rff_features(X, self.W, self.b)
        if self.include_state:
            return np.hstack([X, feats])
        return feats

    def config(self):
        self._require_bound()
        return {
            "kind": self.kind,
            "n_input": self.n_input,
            "n_features": self.n_features,
            "sigma": self.sigma,
            "seed": self.seed,
            "include_state": self.include_state,
            # realized draws stored so loading reproduces lifts bit-for-bit
            "W": self.W.tolist(),
            "b": self.b.tolist(),
        }


class Custom(Observable):
    """State plus user-supplied scalar- or vector-valued functions of it.

    Output dimensions are probed once at bind time by evaluating each
    function at the origin. An empty function list reduces to the identity.
    Custom libraries cannot be serialized.
    """

    kind = "custom"

    def __init__(self, functions: Sequence[Callable]):
        super().__init__()
        self.functions = list(functions)
        self._dims: Optional[list] = None

    def _on_bind(self):
        probe = np.ones(self.n_input)
        dims = []
        for i, f in enumerate(self.functions):
            try:
                out = np.atleast_1d(np.asarray(f(probe), dtype=float))
            except Exception as exc:
                raise ConfigError(f"custom function {i} failed on probe input: {exc}")
            if out.ndim != 1 or out.size < 1:
                raise ConfigError(f"custom function {i} must return a 1-d value")
            dims.append(out.size)
        self._dims = dims

    @property
    def n_output(self) -> int:
        self._require_bound()
        return self.n_input + sum(self._dims)

    @property
    def state_indices(self):
        self._require_bound()
        return tuple(range(self.n_input))

    def lift_rows(self, X):
        self._require_bound()
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_input:
            raise DataError(f"expected {self.n_input} columns, got {X.shape[1]}")
        blocks = [X.copy()]
        for i, f in enumerate(self.functions):
            vals = np.array([np.atleast_1d(f(row)) for row in X], dtype=float)
            if vals.shape[1] != self._dims[i]:
                raise DataError(
                    f"custom function {i} changed output dimension "
                    f"({self._dims[i]} -> {vals.shape[1]})"
                )
            if not np.all(np.isfinite(vals)):
                raise DataError(f"custom function {i} returned non-finite values")
            blocks.append(vals)
        return np.hstack(blocks)

    def config(self):
        raise ConfigError("custom observables cannot be serialized")


class Concat(Observable):
    """Concatenation of libraries with duplicate state blocks removed.

    The state block of the first library that embeds it is kept; exact state
    coordinates of later libraries are dropped so the state appears once.
    Reconstruction is inherited from that first embedding library.
    """

    kind = "concat"

    def __init__(self, parts: Sequence[Observable]):
        super().__init__()
        if not parts:
            raise ConfigError("concat needs at least one library")
        for p in parts:
            if isinstance(p, TimeDelay):
                raise ConfigError("time_delay libraries cannot be concatenated")
        self.parts = list(parts)
        self._keep: Optional[list] = None

    def _on_bind(self):
        for p in self.parts:
            p.bind(self.n_input)
        self._refresh_layout()

    def prepare(self, X_rows):
        for p in self.parts:
            p.prepare(X_rows)
        self._refresh_layout()

    def _refresh_layout(self):
        keep = []
        first_state = None
        for i, p in enumerate(self.parts):
            try:
                N_i = p.n_output
            except ConfigError:
                self._keep = None  # a part is not ready yet (e.g. rbf centers)
                return
            idx = np.ones(N_i, dtype=bool)
            sidx = p.state_indices
            if sidx is not None:
                if first_state is None:
                    first_state = i
                elif i > first_state:
                    idx[list(sidx)] = False
            keep.append(idx)
        self._keep = keep
        self._first_state = first_state

    def _require_layout(self):
        self._require_bound()
        if self._keep is None:
            self._refresh_layout()
        if self._keep is None:
            raise ConfigError("concat parts not fully prepared")

    @property
    def n_output(self) -> int:
        self._require_layout()
        return int(sum(k.sum() for k in self._keep))

    @property
    def state_indices(self):
        self._require_layout()
        if self._first_state is None:
            return None
        offset = 0
        for i, p in enumerate(self.parts):
            if i == self._first_state:
                return tuple(offset + j for j in p.state_indices)
            offset += int(self._keep[i].sum())
        return None

    def lift_rows(self, X):
        self._require_layout()
        X = np.asarray(X, dtype=float)
        blocks = [p.lift_rows(X)[:, self._keep[i]] for i, p in enumerate(self.parts)]
        return np.hstack(blocks)

    def config(self):
        return {
            "kind": self.kind,
            "n_input": self.n_input,
            "parts": [p.config() for p in self.parts],
        }


class KernelLift(Observable):
    """Eigenfunction-space lift used by kernel regression models.

    Lifts x to the complex vector of fitted eigenfunction values
    phi_j(x) = sum_i alpha_ij k(x, x_i) over the stored training states.
    Produced by the pipeline, not constructed directly by users.
    """

    kind = "kernel_lift"

    def __init__(self, kernel_config: dict, centers: np.ndarray, alpha: np.ndarray):
        super().__init__()
        self.kernel_config = dict(kernel_config)
        self.centers = np.array(centers, dtype=float)  # (m, n) training states
        self.alpha = np.array(alpha, dtype=complex)  # (m, r) coefficients
        self.bind(self.centers.shape[1])

    @property
    def n_output(self) -> int:
        return self.alpha.shape[1]

    def _kernel_params(self):
        cfg = self.kernel_config
        if cfg["kind"] == "gaussian":
            return _kernels.KERNEL_GAUSSIAN, float(cfg["sigma"]), 0.0, 0.0
        return _kernels.KERNEL_POLYNOMIAL, float(cfg.get("offset", 1.0)), float(cfg["degree"]), 0.0

    def lift_rows(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n_input:
            raise DataError(f"expected {self.n_input} columns, got {X.shape[1]}")
        kind, p0, p1, p2 = self._kernel_params()
        K = _kernels.gram_matrix(X, self.centers, kind, p0, p1, p2)  # (b, m)
        return K @ self.alpha

    def lift(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_input,):
            raise DataError(
                f"expected state of dimension {self.n_input}, got shape {x.shape}"
            )
        return self.lift_rows(x[None, :])[0]

    def config(self):
        return {
            "kind": self.kind,
            "n_input": self.n_input,
            "kernel": dict(self.kernel_config),
            "centers": self.centers.tolist(),
            "alpha_re": self.alpha.real.tolist(),
            "alpha_im": self.alpha.imag.tolist(),
        }


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

@dataclass
class ReconstructionMap:
    """Linear map recovering the state from the lifted vector, x = C z.

    For exact-embedding libraries `indices` selects the embedded coordinates
    (bit-exact); otherwise C is fitted by least squares.
    """

    C: np.ndarray
    indices: Optional[tuple] = None
    findings: list = field(default_factory=list)

    def apply_cols(self, Z: np.ndarray) -> np.ndarray:
        """Map lifted columns (N, m) back to state columns (n, m)."""
        if self.indices is not None:
            return Z[list(self.indices), ...]
        return self.C @ Z

    def apply_vec(self, z: np.ndarray) -> np.ndarray:
        if self.indices is not None:
            return z[list(self.indices)]
        return self.C @ z


def fit_reconstruction(library: Observable, X: np.ndarray) -> ReconstructionMap:
    """Build the reconstruction map for a library from training columns X (n, m).

    Exact-embedding libraries get the index-selection map; otherwise C is the
    least-squares minimizer of ||X - C Phi(X)||_F with a singular-value
    cutoff. Rank-deficient lifted data yields a warning finding and the
    minimum-norm solution.
    """
    X = np.asarray(X)
    n = X.shape[0]
    idx = library.state_indices
    if idx is not None:
        N = library.n_output
        C = np.zeros((n, N))
        for row, j in enumerate(idx):
            C[row, j] = 1.0
        return ReconstructionMap(C=C, indices=tuple(idx))
    Z = library.lift_rows(X.T).T  # (N, m)
    N, m = Z.shape
    if m < N:
        raise DataError(
            f"fitted reconstruction needs at least N={N} training columns, got m={m}"
        )
    # solve min ||X - C Z||_F  <=>  Z.T @ C.T ~ X.T
    Ct, _, rank, _ = np.linalg.lstsq(Z.T, X.T, rcond=1e-10)
    findings = []
    if rank < min(N, m):
        findings.append(
            f"lifted training data is rank deficient ({rank} < {min(N, m)}); "
            "returned the minimum-norm reconstruction"
        )
    return ReconstructionMap(C=np.asarray(Ct).T, indices=None, findings=findings)


# ---------------------------------------------------------------------------
# config round trip
# ---------------------------------------------------------------------------

_ALLOWED_KEYS = {
    "identity": {"kind", "n_input"},
    "polynomial": {"kind", "n_input", "degree"},
    "time_delay": {"kind", "n_input", "delays"},
    "rbf": {
        "kind", "n_input", "rbf_kind", "shape_eps", "seed", "ph_exp",
        "centers", "n_centers",
    },
    "random_fourier": {
        "kind", "n_input", "n_features", "sigma", "seed", "include_state", "W", "b",
    },
    "concat": {"kind", "n_input", "parts"},
    "kernel_lift": {"kind", "n_input", "kernel", "centers", "alpha_re", "alpha_im"},
}


def observable_from_config(cfg: dict) -> Observable:
    """Rebuild a library from its JSON config; unknown kinds/keys rejected."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ConfigError("observable config must be an object with a 'kind' key")
    kind = cfg["kind"]
    if kind not in _ALLOWED_KEYS:
        raise ConfigError(f"unknown observable kind {kind!r}")
    extra = set(cfg) - _ALLOWED_KEYS[kind]
    if extra:
        raise ConfigError(f"unknown keys in {kind} observable config: {sorted(extra)}")

    if kind == "identity":
        lib = Identity()
    elif kind == "polynomial":
        if "degree" not in cfg:
            raise ConfigError("polynomial config needs 'degree'")
        lib = Polynomial(int(cfg["degree"]))
    elif kind == "time_delay":
        if "delays" not in cfg:
            raise ConfigError("time_delay config needs 'delays'")
        lib = TimeDelay(int(cfg["delays"]))
    elif kind == "rbf":
        centers = cfg.get("centers")
        lib = RadialBasis(
            rbf_kind=cfg.get("rbf_kind", "thinplate"),
            centers=None if centers is None else np.asarray(centers, dtype=float),
            n_centers=int(cfg.get("n_centers", 10)),
            shape_eps=float(cfg.get("shape_eps", 1.0)),
            seed=int(cfg.get("seed", 0)),
            ph_exp=int(cfg.get("ph_exp", 3)),
        )
    elif kind == "random_fourier":
        if "n_features" not in cfg:
            raise ConfigError("random_fourier config needs 'n_features'")
        lib = RandomFourier(
            n_features=int(cfg["n_features"]),
            sigma=float(cfg.get("sigma", 1.0)),
            seed=int(cfg.get("seed", 0)),
            include_state=bool(cfg.get("include_state", True)),
        )
        if "W" in cfg and "b" in cfg and cfg.get("n_input") is not None:
            lib.bind(int(cfg["n_input"]))
            lib.W = np.asarray(cfg["W"], dtype=float)
            lib.b = np.asarray(cfg["b"], dtype=float)
            if lib.W.shape != (lib.n_input, lib.n_features) or lib.b.shape != (
                lib.n_features,
            ):
                raise ConfigError("random_fourier W/b shapes inconsistent with config")
    elif kind == "concat":
        if "parts" not in cfg:
            raise ConfigError("concat config needs 'parts'")
        lib = Concat([observable_from_config(p) for p in cfg["parts"]])
    else:  # kernel_lift
        for key in ("kernel", "centers", "alpha_re", "alpha_im"):
            if key not in cfg:
                raise ConfigError(f"kernel_lift config needs {key!r}")
        alpha = np.asarray(cfg["alpha_re"], dtype=float) + 1j * np.asarray(
            cfg["alpha_im"], dtype=float
        )
        return KernelLift(cfg["kernel"], np.asarray(cfg["centers"], dtype=float), alpha)

    if cfg.get("n_input") is not None and lib.n_input is None:
        lib.bind(int(cfg["n_input"]))
    return lib

"""The user-facing model: observables composed with a fitted operator.

`fit` builds snapshot pairs, lifts both sides, runs the configured
regression, fits the state reconstruction, and assembles an immutable
KoopmanModel exposing prediction, simulation, spectral analytics, and
validation scores.

Multi-step simulation iterates in the lifted space and reconstructs each
step; it never re-lifts, which would silently reintroduce nonlinearity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .data import TrajectoryDataset, build_snapshot_pairs
from .errors import ConfigError, DataError, KoopliftError, RegressionError
from .observables import (
    Identity,
    KernelLift,
    Observable,
    ReconstructionMap,
    TimeDelay,
    fit_reconstruction,
)
from .regression import (
    KernelConfig,
    RegressionResult,
    fit_edmd,
    fit_edmdc,
    fit_hankel,
    fit_kdmd,
)

__all__ = ["RegressorConfig", "KoopmanModel", "ModeTable", "fit"]

_UNFORCED = ("dmd", "edmd", "hdmd", "kdmd")
_CONTROLLED = ("dmdc", "edmdc", "hdmdc")
REGRESSOR_KINDS = _UNFORCED + _CONTROLLED


@dataclass(frozen=True)
class RegressorConfig:
    """Which operator fit to run and with what reduction parameters."""

    kind: str = "edmd"
    rank: object = None  # int cap or float relative cutoff
    rank_in: object = None  # controlled fits: SVD rank of the stacked input
    rank_out: object = None  # controlled fits: output-side compression
    delays: int = 0  # hdmd / hdmdc
    kernel: Optional[KernelConfig] = None  # kdmd

    def __post_init__(self):
        if self.kind not in REGRESSOR_KINDS:
            raise ConfigError(
                f"unknown regressor kind {self.kind!r}; choose from {REGRESSOR_KINDS}"
            )
        if self.delays < 0:
            raise ConfigError(f"delays must be >= 0, got {self.delays}")
        if self.delays > 0 and self.kind not in ("hdmd", "hdmdc"):
            raise ConfigError(f"delays only applies to hdmd/hdmdc, not {self.kind}")
        if self.kernel is not None and self.kind != "kdmd":
            raise ConfigError(f"a kernel only applies to kdmd, not {self.kind}")
        controlled = self.kind in _CONTROLLED
        if self.rank is not None and controlled:
            raise ConfigError(f"{self.kind} uses rank_in/rank_out, not rank")
        if (self.rank_in is not None or self.rank_out is not None) and not controlled:
            raise ConfigError(f"rank_in/rank_out only apply to controlled kinds, "
                              f"not {self.kind}")
        if self.kind == "kdmd" and self.kernel is None:
            object.__setattr__(self, "kernel", KernelConfig())


@dataclass
class ModeTable:
    """Per-mode spectral records, sorted in eigenvalue order."""

    lambdas: np.ndarray  # (r,)
    mus: np.ndarray  # (r,)
    modes: np.ndarray  # (n, r) complex state-space mode vectors
    amplitudes: np.ndarray  # (r,) eigenfunction values at the first training snapshot
    scores: np.ndarray  # (r,) linearity-consistency scores on the training data

    def __len__(self) -> int:
        return self.lambdas.shape[0]

    def as_rows(self) -> list:
        return [
            {
                "lambda": complex(self.lambdas[j]),
                "mu": complex(self.mus[j]),
                "mode": self.modes[:, j].copy(),
                "amplitude": complex(self.amplitudes[j]),
                "score": float(self.scores[j]),
            }
            for j in range(len(self))
        ]


def _consistency_scores(phi_x: np.ndarray, phi_xp: np.ndarray, lambdas: np.ndarray):
    """Per-mode ||phi_j(X') - lambda_j phi_j(X)|| / ||phi_j(X)|| with NaN sentinel."""
    scores = np.empty(lambdas.shape[0])
    findings = []
    for j in range(lambdas.shape[0]):
        den = np.linalg.norm(phi_x[j])
        if den == 0.0:
            scores[j] = np.nan
            findings.append(
                f"mode {j}: eigenfunction vanishes on the data; score undefined"
            )
        else:
            scores[j] = np.linalg.norm(phi_xp[j] - lambdas[j] * phi_x[j]) / den
    return scores, findings


class KoopmanModel:
    """A fitted lifted-linear model; immutable after fit.

    predict composes reconstruction, operator, and lifting with no hidden
    recentering; simulate iterates the operator in lifted space. The real
    part is taken after any complex arithmetic, with the largest imaginary
    leakage recorded in ``metadata['imag_leakage_max']``.
    """

    def __init__(self, observables: Observable, regression: RegressionResult,
                 C: ReconstructionMap, dt: float, n: int, q: int,
                 metadata: dict, z0_train: np.ndarray,
                 training_scores: np.ndarray):
        self.observables = observables
        self.regression = regression
        self.C = C
        self.dt = float(dt)
        self.n = int(n)
        self.q = int(q)
        self.metadata = dict(metadata)
        self.z0_train = z0_train
        self.training_scores = training_scores
        self._A = np.ascontiguousarray(regression.A)
        B = regression.B
        self._B = None if B is None else np.ascontiguousarray(B)

    # -- basic properties ----------------------------------------------------
    @property
    def controlled(self) -> bool:
        return self._B is not None

    @property
    def A(self) -> np.ndarray:
        return self._A

    @property
    def B(self) -> Optional[np.ndarray]:
        return self._B

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.regression.eigensystem.lambdas

    def continuous_eigenvalues(self) -> np.ndarray:
        """ln(lambda)/dt on the principal branch; see eigensystem findings for
        zero or negative-real eigenvalues."""
        return self.regression.eigensystem.mus

    # -- lifting helpers -------------------------------------------------------
    def _lift_state(self, x) -> np.ndarray:
        z = self.observables.lift(np.asarray(x, dtype=float))
        return np.asarray(z, dtype=self._A.dtype)

    def _current_state(self, x, z) -> np.ndarray:
        if isinstance(self.observables, TimeDelay):
            return np.asarray(z[: self.n], dtype=float).copy()
        return np.asarray(x, dtype=float).reshape(-1).copy()

    def _record_leakage(self, arr: np.ndarray) -> np.ndarray:
        if np.iscomplexobj(arr):
            leak = float(np.max(np.abs(arr.imag))) if arr.size else 0.0
            prev = self.metadata.get("imag_leakage_max", 0.0)
            if leak > prev:
                self.metadata["imag_leakage_max"] = leak
            return np.ascontiguousarray(arr.real)
        return arr

    def _check_inputs(self, U, n_steps: int) -> Optional[np.ndarray]:
        if not self.controlled:
            if U is not None:
                raise DataError("model is unforced; got unexpected inputs")
            return None
        if U is None:
            raise DataError(f"model is controlled; provide inputs with {self.q} channel(s)")
        U = np.asarray(U, dtype=float)
        if U.ndim == 1:
            U = U[None, :] if self.q == 1 else U[:, None]
        if U.shape != (self.q, n_steps):
            raise DataError(
                f"inputs must have shape ({self.q}, {n_steps}), got {U.shape}"
            )
        return np.ascontiguousarray(U.astype(self._A.dtype, copy=False))

    # -- prediction -----------------------------------------------------------
    def predict(self, x, u=None) -> np.ndarray:
        """Advance a state by one sample interval: C (A Phi(x) + B u)."""
        z0 = self._lift_state(x)
        if self.controlled:
            if u is None:
                raise DataError(f"model is controlled; provide u with {self.q} channel(s)")
            uvec = np.asarray(u, dtype=float).reshape(-1)
            if uvec.shape[0] != self.q:
                raise DataError(f"u must have {self.q} channel(s), got {uvec.shape[0]}")
            U = np.ascontiguousarray(uvec[:, None].astype(self._A.dtype, copy=False))
            Z = _kernels.iterate_linear_controlled(self._A, self._B, z0, U)
        else:
            if u is not None:
                raise DataError("model is unforced; got unexpected input u")
            Z = _kernels.iterate_linear(self._A, z0, 1)
        xnext = self.C.apply_vec(Z[1])
        return self._record_leakage(xnext)

    def simulate(self, x0, n_steps: int, U=None) -> np.ndarray:
        """Roll the model forward in lifted space; returns n_steps + 1 states.

        The first row is the initial state. For time-delay observables, x0 is
        a (d+1, n) window of consecutive states (oldest first) or an already
        embedded vector; the returned rows are plain n-dimensional states.
        """
        if n_steps < 0:
            raise DataError(f"n_steps must be >= 0, got {n_steps}")
        z0 = self._lift_state(x0)
        x0_state = self._current_state(x0, z0)
        Uc = self._check_inputs(U, n_steps) if (U is not None or self.controlled) else None
        if n_steps == 0:
            return x0_state[None, :]
        if Uc is not None:
            Z = _kernels.iterate_linear_controlled(self._A, self._B, z0, Uc)
        else:
            Z = _kernels.iterate_linear(self._A, z0, n_steps)
        states = self.C.apply_cols(Z[1:].T).T
        states = self._record_leakage(states)
        return np.vstack([x0_state[None, :], states])

    # -- spectral analytics -----------------------------------------------------
    def eigenfunctions(self, x) -> np.ndarray:
        """Fitted eigenfunction values phi_j(x), one complex value per mode."""
        z = self._lift_state(x)
        return self.regression.eigensystem.W_left.conj().T @ z

    def eigenfunctions_rows(self, X) -> np.ndarray:
        """Eigenfunction values for a batch of states: (m, n) -> (m, r)."""
        X = np.asarray(X, dtype=float)
        Z = self.observables.lift_rows(X)
        return Z @ self.regression.eigensystem.W_left.conj()

    def koopman_modes(self, exact: Optional[bool] = None) -> ModeTable:
        """State-space mode vectors v_j = C w_j with amplitudes phi_j(x0).

        ``exact`` selects SVD-exact modes (default where the regression
        provides them) versus projected eigenvectors.
        """
        W = self.regression.reported_modes(exact)
        modes = self.C.apply_cols(W)
        amplitudes = self.regression.eigensystem.W_left.conj().T @ self.z0_train
        return ModeTable(
            lambdas=self.eigenvalues.copy(),
            mus=self.continuous_eigenvalues().copy(),
            modes=modes,
            amplitudes=amplitudes,
            scores=self.training_scores.copy(),
        )

    def linearity_consistency(self, data: TrajectoryDataset):
        """Per-mode eigenfunction residuals over a dataset's snapshot pairs.

        Returns (scores, findings); 0 marks a perfect Koopman eigenfunction,
        NaN marks an eigenfunction that vanishes on the data.
        """
        Z, Zp, _ = _lift_pairs(self.observables, data)
        Wl = self.regression.eigensystem.W_left
        phi_x = Wl.conj().T @ Z.astype(self._A.dtype)
        phi_xp = Wl.conj().T @ Zp.astype(self._A.dtype)
        return _consistency_scores(phi_x, phi_xp, self.eigenvalues)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def _stage(label: str, exc: KoopliftError) -> KoopliftError:
    return type(exc)(f"{label} stage: {exc}")


def _lift_pairs(library: Observable, data: TrajectoryDataset):
    """Lifted snapshot pair columns (Z, Zprime, U) for any library route."""
    if isinstance(library, TimeDelay):
        d = library.delays
        Zs, Zps, Us = [], [], []
        for i, traj in enumerate(data.trajectories):
            if traj.shape[0] < d + 2:
                raise DataError(
                    f"trajectory {i} too short for {d} delays: has {traj.shape[0]} "
                    f"samples, need at least {d + 2}"
                )
            Y = library.lift_trajectory(traj)
            Zs.append(Y[:-1])
            Zps.append(Y[1:])
            if data.inputs is not None:
                Us.append(data.inputs[i][d:-1])
        Z = np.vstack(Zs).T
        Zp = np.vstack(Zps).T
        U = np.vstack(Us).T if Us else None
        return Z, Zp, U
    pairs = build_snapshot_pairs(data)
    Z = library.lift_rows(np.ascontiguousarray(pairs.X.T)).T
    Zp = library.lift_rows(np.ascontiguousarray(pairs.Xprime.T)).T
    return Z, Zp, pairs.U


def _resolve_library(observables, config: RegressorConfig) -> Observable:
    lib = observables if observables is not None else Identity()
    if not isinstance(lib, Observable):
        raise ConfigError(f"observables must be an Observable, got {type(lib).__name__}")
    if config.kind in ("hdmd", "hdmdc"):
        if isinstance(lib, TimeDelay):
            return lib
        if isinstance(lib, Identity):
            return TimeDelay(config.delays)
        raise ConfigError(
            f"{config.kind} pairs with identity or time_delay observables, "
            f"got {lib.kind}"
        )
    if config.kind == "kdmd" and not isinstance(lib, Identity):
        raise ConfigError(
            "kdmd lifts implicitly through its kernel; use identity observables"
        )
    return lib


def fit(observables, regressor, data: TrajectoryDataset) -> KoopmanModel:
    """Fit a Koopman model: lift snapshot pairs and regress the operator.

    ``observables`` is an Observable library (None means identity);
    ``regressor`` is a RegressorConfig or a kind string. Errors from the
    submodules are re-raised with a stage label (lifting / regression /
    reconstruction).
    """
    if isinstance(regressor, str):
        regressor = RegressorConfig(kind=regressor)
    if not data.trajectories:
        raise DataError("no trajectories")
    n = data.n_states
    q = data.n_inputs
    controlled = regressor.kind in _CONTROLLED
    if controlled and q == 0:
        raise ConfigError(f"{regressor.kind} requires input data, dataset has none")
    if not controlled and q > 0:
        raise ConfigError(
            f"dataset carries inputs but {regressor.kind} is unforced; "
            "use dmdc/edmdc/hdmdc"
        )
    library = _resolve_library(observables, regressor)

    # lifting
    try:
        library.bind(n)
        all_rows = np.vstack([t for t in data.trajectories])
        library.prepare(all_rows)
        if regressor.kind == "kdmd":
            pairs = build_snapshot_pairs(data)
            Z, Zp, U = pairs.X, pairs.Xprime, pairs.U
        else:
            Z, Zp, U = _lift_pairs(library, data)
    except KoopliftError as exc:
        raise _stage("lifting", exc) from exc

    # regression
    try:
        if regressor.kind == "kdmd":
            res = fit_kdmd(Z, Zp, regressor.kernel, rank=regressor.rank, dt=data.dt)
        elif controlled:
            res = fit_edmdc(
                Z, Zp, U, rank_in=regressor.rank_in, rank_out=regressor.rank_out,
                dt=data.dt, kind=regressor.kind,
            )
        else:
            res = fit_edmd(Z, Zp, rank=regressor.rank, dt=data.dt, kind=regressor.kind)
    except KoopliftError as exc:
        raise _stage("regression", exc) from exc

    # reconstruction
    try:
        if regressor.kind == "kdmd":
            library = KernelLift(
                regressor.kernel.to_dict(), res.kernel_centers, res.kernel_alpha
            )
            C = ReconstructionMap(C=res.modes_state, indices=None)
            z0 = library.lift(res.kernel_centers[0])
        else:
            X_state = build_snapshot_pairs(data).X
            C = fit_reconstruction(library, X_state)
            z0 = np.asarray(Z[:, 0], dtype=res.A.dtype).copy()
    except KoopliftError as exc:
        raise _stage("reconstruction", exc) from exc

    Wl = res.eigensystem.W_left
    if regressor.kind == "kdmd":
        phi_x = (library.lift_rows(np.ascontiguousarray(Z.T))).T
        phi_xp = (library.lift_rows(np.ascontiguousarray(Zp.T))).T
    else:
        phi_x = Wl.conj().T @ Z.astype(res.A.dtype)
        phi_xp = Wl.conj().T @ Zp.astype(res.A.dtype)
    scores, score_findings = _consistency_scores(phi_x, phi_xp, res.eigensystem.lambdas)

    metadata = {
        "m": res.m,
        "rank": res.rank,
        "residual": res.residual_rel,
        "residual_fro": res.residual_fro,
        "sigma_min": res.sigma_min,
        "n_features": int(res.A.shape[0]),
        "regressor": res.kind,
        "imag_leakage_max": 0.0,
        "findings": list(res.findings) + list(C.findings) + score_findings,
    }
    return KoopmanModel(
        observables=library, regression=res, C=C, dt=data.dt, n=n, q=q,
        metadata=metadata, z0_train=z0, training_scores=scores,
    )

"""Best-fit linear evolution operators on snapshot matrices.

All fits solve variants of the regression Z' ~ A Z over column-aligned
snapshot matrices, via truncated SVD. Controlled variants stack the input
below the state and partition the solution into [A B]; the input-evolution
rows of the stacked operator are never fitted (they are irrelevant for
control). The kernel variant works with Gram matrices instead of explicit
features.

Rank handling: an integer caps the retained rank, a float in (0, 1) replaces
the default relative singular-value cutoff of 1e-10.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Integral, Real
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ConfigError, DataError, RegressionError

__all__ = [
    "EigenSystem",
    "RegressionResult",
    "KernelConfig",
    "eig_biorthogonal",
    "fit_dmd",
    "fit_edmd",
    "fit_dmdc",
    "fit_edmdc",
    "fit_kdmd",
    "fit_hankel",
    "fit_continuous_generator",
]

RANK_CUTOFF = 1e-10  # relative singular-value cutoff, keeps exact problems exact
GRAM_CUTOFF = 1e-12  # relative cutoff on Gram-matrix eigenvalues (~ sigma^2)


@dataclass
class EigenSystem:
    """Eigendecomposition with biorthogonal left/right vectors.

    Eigenvalues are sorted by decreasing modulus, ties broken by decreasing
    real part, then increasing imaginary part, which keeps conjugate pairs
    adjacent. Columns satisfy W_left^H W_right = I for distinct eigenvalues;
    left vectors are scaled so their max-modulus entry is 1, with the right
    vectors rescaled to preserve biorthogonality.
    """

    lambdas: np.ndarray  # (r,) discrete eigenvalues
    mus: np.ndarray  # (r,) continuous eigenvalues ln(lambda)/dt, principal branch
    W_right: np.ndarray  # (N, r)
    W_left: np.ndarray  # (N, r)
    dt: float = 1.0
    findings: list = field(default_factory=list)

    @property
    def rank(self) -> int:
        return self.lambdas.shape[0]


def _sort_order(lam: np.ndarray) -> np.ndarray:
    return np.lexsort((lam.imag, -lam.real, -np.abs(lam)))


def _continuous_eigs(lam: np.ndarray, dt: float):
    mus = np.empty(lam.shape, dtype=complex)
    findings = []
    zero = lam == 0
    if zero.any():
        mus[zero] = complex(-np.inf, 0.0)
        findings.append(
            f"{int(zero.sum())} zero eigenvalue(s): continuous eigenvalue "
            "reported as -inf"
        )
    nz = ~zero
    mus[nz] = np.log(lam[nz]) / dt
    neg_real = nz & (lam.imag == 0) & (lam.real < 0)
    if neg_real.any():
        findings.append(
            "negative real eigenvalue(s): principal-branch log gives imaginary "
            "part pi/dt; the continuous eigenvalue is aliasing-ambiguous"
        )
    return mus, findings


def _normalize_pair(W_right: np.ndarray, W_left: np.ndarray):
    """Scale left columns to unit max-modulus entry, keeping biorthogonality."""
    Wr = W_right.copy()
    Wl = W_left.copy()
    for j in range(Wr.shape[1]):
        c = Wl[np.argmax(np.abs(Wl[:, j])), j]
        if c != 0:
            Wl[:, j] = Wl[:, j] / c
            Wr[:, j] = Wr[:, j] * np.conj(c)
    return Wr, Wl


def eig_biorthogonal(A: np.ndarray, dt: float = 1.0) -> EigenSystem:
    """Eigendecomposition of a square matrix with biorthogonal left vectors.

    A near-defective eigenvector matrix is flagged with a finding and the
    left vectors fall back to the pseudoinverse (biorthogonality is then only
    approximate for the affected cluster).
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DataError(f"expected a square matrix, got shape {A.shape}")
    lam, W = np.linalg.eig(A)
    lam = lam.astype(complex)
    W = W.astype(complex)
    order = _sort_order(lam)
    lam = lam[order]
    W = W[:, order]
    findings = []
    cond = np.linalg.cond(W)
    if not np.isfinite(cond) or cond > 1e12:
        findings.append(
            f"eigenvector matrix is ill-conditioned (cond={cond:.2e}); the "
            "operator is defective within tolerance and biorthogonality is "
            "waived for the affected cluster"
        )
        W_left = np.linalg.pinv(W).conj().T
    else:
        W_left = np.linalg.inv(W).conj().T
    W, W_left = _normalize_pair(W, W_left)
    mus, mu_findings = _continuous_eigs(lam, dt)
    return EigenSystem(
        lambdas=lam, mus=mus, W_right=W, W_left=W_left, dt=dt,
        findings=findings + mu_findings,
    )


@dataclass
class RegressionResult:
    """A fitted linear operator with its spectral decomposition.

    The operator is stored reduced: `A_reduced` is (r, r) over the basis
    `projection` (N, r); `projection=None` means the reduced and full
    operators coincide. Eigenvectors in `eigensystem` always live in the
    full N-dimensional lifted space.
    """

    kind: str
    rank: int
    A_reduced: np.ndarray
    projection: Optional[np.ndarray] = None
    B_reduced: Optional[np.ndarray] = None
    svd_factors: Optional[tuple] = None  # (Ur, Sr, Vr) of the input-side SVD
    eigensystem: Optional[EigenSystem] = None
    modes_exact: Optional[np.ndarray] = None  # (N, r), SVD-DMD exact modes
    use_exact_modes: bool = False
    residual_fro: float = 0.0
    residual_rel: float = 0.0
    sigma_min: float = 0.0
    m: int = 0
    findings: list = field(default_factory=list)
    # kernel-variant payload
    kernel_config: Optional["KernelConfig"] = None
    kernel_centers: Optional[np.ndarray] = None  # (m, n) training states, row-major
    kernel_alpha: Optional[np.ndarray] = None  # (m, r) eigenfunction coefficients
    modes_state: Optional[np.ndarray] = None  # (n, r) Koopman modes (kernel variant)

    @property
    def A(self) -> np.ndarray:
        """The operator in the full lifted space."""
        if self.projection is None:
            return self.A_reduced
        return self.projection @ self.A_reduced @ self.projection.conj().T

    @property
    def B(self) -> Optional[np.ndarray]:
        if self.B_reduced is None:
            return None
        if self.projection is None:
            return self.B_reduced
        return self.projection @ self.B_reduced

    @property
    def modes_projected(self) -> np.ndarray:
        """Right eigenvectors mapped to the full lifted space."""
        return self.eigensystem.W_right

    def reported_modes(self, exact: Optional[bool] = None) -> np.ndarray:
        if exact is None:
            exact = self.use_exact_modes
        if exact and self.modes_exact is not None:
            return self.modes_exact
        return self.eigensystem.W_right


def _as_matrix(M, name) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[None, :]
    if M.ndim != 2:
        raise DataError(f"{name} must be a 2-d matrix, got shape {M.shape}")
    return M


def _truncate_svd(M: np.ndarray, rank):
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        raise RegressionError("all singular values below cutoff")
    cutoff = RANK_CUTOFF
    cap = None
    if rank is not None:
        if isinstance(rank, Integral):
            if rank < 1:
                raise ConfigError(f"rank must be >= 1, got {rank}")
            cap = int(rank)
        elif isinstance(rank, Real):
            if not 0.0 < float(rank) < 1.0:
                raise ConfigError(
                    f"a float rank is a relative cutoff and must lie in (0, 1), got {rank}"
                )
            cutoff = float(rank)
        else:
            raise ConfigError(f"rank must be an integer or a float cutoff, got {rank!r}")
    r = int(np.sum(s > cutoff * s[0]))
    if cap is not None:
        r = min(r, cap)
    if r == 0:
        raise RegressionError("all singular values below cutoff")
    return U[:, :r], s[:r], Vt[:r].T


def _lift_eigensystem(eig_red: EigenSystem, projection: Optional[np.ndarray]) -> EigenSystem:
    if projection is None:
        return eig_red
    Wr = projection @ eig_red.W_right
    Wl = projection @ eig_red.W_left
    Wr, Wl = _normalize_pair(Wr, Wl)
    return EigenSystem(
        lambdas=eig_red.lambdas, mus=eig_red.mus, W_right=Wr, W_left=Wl,
        dt=eig_red.dt, findings=list(eig_red.findings),
    )


def fit_edmd(Z, Zprime, rank=None, dt: float = 1.0, kind: str = "edmd") -> RegressionResult:
    """SVD-based least-squares fit of Z' ~ A Z on lifted snapshot columns.

    Returns the reduced operator over the leading left-singular basis of Z,
    its eigensystem mapped to the full space, and both projected and exact
    SVD-DMD modes (the exact form is the default reported one; eigenvalues at
    zero fall back to the projected mode).
    """
    Z = _as_matrix(Z, "Z")
    Zp = _as_matrix(Zprime, "Zprime")
    if Z.shape != Zp.shape:
        raise DataError(f"Z and Zprime shapes differ: {Z.shape} vs {Zp.shape}")
    m = Z.shape[1]
    if m < 2:
        raise RegressionError(f"need at least 2 snapshot pairs, got m={m}")
    Ur, sr, Vr = _truncate_svd(Z, rank)
    r = sr.shape[0]
    G = Zp @ (Vr * (1.0 / sr))  # (N, r) = Zprime Vr Sr^-1
    At = Ur.T @ G
    eig_red = eig_biorthogonal(At, dt)
    eig_full = _lift_eigensystem(eig_red, Ur)

    # exact modes Zprime Vr Sr^-1 w / lambda, with w scaled consistently with
    # the canonical full-space eigenvectors so amplitudes pair up; lambda = 0
    # falls back to the projected mode
    findings = []
    W_red = Ur.T @ eig_full.W_right
    ME = G.astype(complex) @ W_red
    lam = eig_full.lambdas
    nz = lam != 0
    ME[:, nz] = ME[:, nz] / lam[nz]
    if (~nz).any():
        ME[:, ~nz] = eig_full.W_right[:, ~nz]
        findings.append("zero eigenvalue(s): exact modes fall back to projected modes")

    A_full = Ur @ At @ Ur.T
    E = Zp - A_full @ Z
    fro = float(np.linalg.norm(E))
    denom = float(np.linalg.norm(Zp))
    return RegressionResult(
        kind=kind, rank=r, A_reduced=At, projection=Ur,
        svd_factors=(Ur, sr, Vr), eigensystem=eig_full,
        modes_exact=ME, use_exact_modes=True,
        residual_fro=fro, residual_rel=fro / denom if denom > 0 else 0.0,
        sigma_min=float(sr[-1]), m=m, findings=findings + list(eig_full.findings),
    )


def fit_dmd(X, Xprime, rank=None, dt: float = 1.0) -> RegressionResult:
    """Exact (SVD-based) DMD: fit_edmd applied to raw state snapshots."""
    return fit_edmd(X, Xprime, rank=rank, dt=dt, kind="dmd")


def fit_edmdc(Z, Zprime, U, rank_in=None, rank_out=None, dt: float = 1.0,
              kind: str = "edmdc") -> RegressionResult:
    """Controlled fit: Z' ~ A Z + B U via SVD of the stacked [Z; U].

    When rank_out is given and below N, a second SVD of Zprime compresses the
    state block; the eigensystem is always computed from A alone.
    """
    Z = _as_matrix(Z, "Z")
    Zp = _as_matrix(Zprime, "Zprime")
    U = _as_matrix(U, "U")
    if Z.shape != Zp.shape:
        raise DataError(f"Z and Zprime shapes differ: {Z.shape} vs {Zp.shape}")
    N, m = Z.shape
    q = U.shape[0]
    if q == 0:
        raise ConfigError("no input channels given; use fit_edmd for unforced data")
    if U.shape[1] != m:
        raise DataError(f"U has {U.shape[1]} columns, expected {m}")
    if m < 2:
        raise RegressionError(f"need at least 2 snapshot pairs, got m={m}")
    if rank_in is not None and isinstance(rank_in, Integral) and rank_in > N + q:
        raise ConfigError(f"rank_in={rank_in} exceeds stacked dimension {N + q}")
    Omega = np.vstack([Z, U])
    Uo, so, Vo = _truncate_svd(Omega, rank_in)
    AB = Zp @ (Vo * (1.0 / so)) @ Uo.T  # (N, N+q)
    A = AB[:, :N]
    B = AB[:, N:]

    if rank_out is not None and (not isinstance(rank_out, Integral) or rank_out < N):
        Uout, s_out, _ = _truncate_svd(Zp, rank_out)
        projection = Uout
        A_red = Uout.T @ A @ Uout
        B_red = Uout.T @ B
        r = A_red.shape[0]
    else:
        projection = None
        A_red, B_red = A, B
        r = N
    eig_red = eig_biorthogonal(A_red, dt)
    eig_full = _lift_eigensystem(eig_red, projection)

    E = Zp - (A @ Z + B @ U)
    fro = float(np.linalg.norm(E))
    denom = float(np.linalg.norm(Zp))
    return RegressionResult(
        kind=kind, rank=r, A_reduced=A_red, projection=projection, B_reduced=B_red,
        svd_factors=(Uo, so, Vo), eigensystem=eig_full,
        modes_exact=None, use_exact_modes=False,
        residual_fro=fro, residual_rel=fro / denom if denom > 0 else 0.0,
        sigma_min=float(so[-1]), m=m, findings=list(eig_full.findings),
    )


def fit_dmdc(X, Xprime, U, rank_in=None, rank_out=None, dt: float = 1.0) -> RegressionResult:
    """DMD with control on raw states (two-SVD reduction via rank_out)."""
    return fit_edmdc(X, Xprime, U, rank_in=rank_in, rank_out=rank_out, dt=dt, kind="dmdc")


@dataclass(frozen=True)
class KernelConfig:
    """Kernel for the Gram-matrix regression variant.

    gaussian: k(x, y) = exp(-||x - y||^2 / (2 sigma^2));
    polynomial: k(x, y) = (offset + x.y)^degree.
    reg_eps scales a Tikhonov term reg_eps * m * I on the Gram matrix.
    """

    kind: str = "gaussian"
    sigma: float = 1.0
    degree: int = 2
    offset: float = 1.0
    reg_eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "polynomial"):
            raise ConfigError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if self.kind == "polynomial":
            if self.degree < 1:
                raise ConfigError(f"degree must be >= 1, got {self.degree}")
            if self.offset < 0:
                raise ConfigError(f"offset must be >= 0, got {self.offset}")
        if self.reg_eps < 0:
            raise ConfigError(f"reg_eps must be >= 0, got {self.reg_eps}")

    def to_dict(self) -> dict:
        if self.kind == "gaussian":
            return {"kind": self.kind, "sigma": self.sigma, "reg_eps": self.reg_eps}
        return {
            "kind": self.kind, "degree": self.degree, "offset": self.offset,
            "reg_eps": self.reg_eps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelConfig":
        allowed = {"kind", "sigma", "degree", "offset", "reg_eps"}
        extra = set(d) - allowed
        if extra:
            raise ConfigError(f"unknown keys in kernel config: {sorted(extra)}")
        return cls(
            kind=d.get("kind", "gaussian"),
            sigma=float(d.get("sigma", 1.0)),
            degree=int(d.get("degree", 2)),
            offset=float(d.get("offset", 1.0)),
            reg_eps=float(d.get("reg_eps", 0.0)),
        )

    def gram(self, Xrows: np.ndarray, Yrows: np.ndarray) -> np.ndarray:
        if self.kind == "gaussian":
            return _kernels.gram_matrix(
                Xrows, Yrows, _kernels.KERNEL_GAUSSIAN, self.sigma, 0.0, 0.0
            )
        return _kernels.gram_matrix(
            Xrows, Yrows, _kernels.KERNEL_POLYNOMIAL, self.offset, float(self.degree), 0.0
        )


def fit_kdmd(X, Xprime, kernel: KernelConfig, rank=None, dt: float = 1.0) -> RegressionResult:
    """Kernel regression variant operating on Gram matrices.

    Eigendecomposes the regularized operator (G + reg_eps*m*I)^-1 T restricted
    to the principal eigenspace of G, where G_ij = k(x_i, x_j) and
    T_ij = k(x'_i, x_j). Eigenfunctions are phi_j(x) = sum_i alpha_ij k(x, x_i);
    Koopman modes come from the least-squares projection of X onto the
    eigenfunction trajectory matrix.
    """
    X = _as_matrix(X, "X")
    Xp = _as_matrix(Xprime, "Xprime")
    if X.shape != Xp.shape:
        raise DataError(f"X and Xprime shapes differ: {X.shape} vs {Xp.shape}")
    m = X.shape[1]
    if m < 2:
        raise RegressionError(f"need at least 2 snapshot pairs, got m={m}")
    Xr = np.ascontiguousarray(X.T)
    Xpr = np.ascontiguousarray(Xp.T)
    G = kernel.gram(Xr, Xr)
    T = kernel.gram(Xpr, Xr)
    s, Q = np.linalg.eigh(0.5 * (G + G.T))
    s = s[::-1]
    Q = Q[:, ::-1]
    s = np.maximum(s, 0.0)
    if s[0] <= 0.0:
        raise RegressionError("Gram matrix is zero; no data support")
    r_num = int(np.sum(s > GRAM_CUTOFF * s[0]))
    r = r_num
    if rank is not None:
        if not isinstance(rank, Integral) or rank < 1:
            raise ConfigError(f"kernel rank must be a positive integer, got {rank}")
        if rank > r_num and kernel.reg_eps == 0.0:
            raise RegressionError(
                f"Gram matrix is singular at rank {rank} (numerical rank {r_num}); "
                "set reg_eps > 0 to regularize"
            )
        r = min(int(rank), m)
    sr = s[:r]
    Qr = Q[:, :r]
    denom = sr + kernel.reg_eps * m
    if np.any(denom <= 0.0):
        raise RegressionError(
            "Gram matrix is numerically singular; set reg_eps > 0 to regularize"
        )
    A_hat = (Qr.T @ T @ Qr) / denom[:, None]
    lam, beta = np.linalg.eig(A_hat)
    lam = lam.astype(complex)
    beta = beta.astype(complex)
    order = _sort_order(lam)
    lam = lam[order]
    beta = beta[:, order]
    alpha = Qr @ beta  # (m, r) eigenfunction coefficients
    Xi = (G @ alpha).T  # (r, m) eigenfunction values on the training states

    # canonical scaling: unit-norm eigenfunction trajectories, leading entry real
    for j in range(r):
        nrm = np.linalg.norm(Xi[j])
        if nrm > 0:
            c = Xi[j, np.argmax(np.abs(Xi[j]))]
            scale = (np.abs(c) / c) / nrm
            Xi[j] *= scale
            alpha[:, j] *= scale
    V = np.linalg.lstsq(Xi.T, Xr, rcond=None)[0].T  # (n, r) modes: X ~ V Xi

    Xi_next = (T @ alpha).T
    E = Xi_next - lam[:, None] * Xi
    fro = float(np.linalg.norm(E))
    den = float(np.linalg.norm(Xi_next))
    mus, mu_findings = _continuous_eigs(lam, dt)
    eye = np.eye(r, dtype=complex)
    eig = EigenSystem(
        lambdas=lam, mus=mus, W_right=eye, W_left=eye.copy(), dt=dt,
        findings=mu_findings,
    )
    return RegressionResult(
        kind="kdmd", rank=r, A_reduced=np.diag(lam), projection=None,
        eigensystem=eig, residual_fro=fro,
        residual_rel=fro / den if den > 0 else 0.0,
        sigma_min=float(np.sqrt(sr[-1])), m=m, findings=list(mu_findings),
        kernel_config=kernel, kernel_centers=Xr, kernel_alpha=alpha, modes_state=V,
    )


def hankel_embed(traj: np.ndarray, delays: int) -> np.ndarray:
    """Delay-embed a trajectory: (T, n) -> (T - d, n*(d+1)), most recent first."""
    traj = np.atleast_2d(np.asarray(traj, dtype=float))
    T = traj.shape[0]
    if T < delays + 2:
        raise DataError(
            f"trajectory with {T} samples is too short for {delays} delays "
            f"(need at least {delays + 2})"
        )
    return np.hstack([traj[delays - j : T - j] for j in range(delays + 1)])


def fit_hankel(trajectories, delays: int, rank=None, inputs=None,
               dt: float = 1.0) -> RegressionResult:
    """Delay-embedded DMD (with control when inputs are given).

    Embeds each trajectory with `delays` past samples, forms snapshot pairs
    that never straddle trajectory boundaries, and runs fit_dmd / fit_dmdc on
    the embedded pairs.
    """
    if delays < 0:
        raise ConfigError(f"delays must be >= 0, got {delays}")
    if isinstance(trajectories, np.ndarray) and trajectories.ndim == 2:
        trajectories = [trajectories]
    Zs, Zps, Us = [], [], []
    for i, traj in enumerate(trajectories):
        try:
            Y = hankel_embed(np.asarray(traj, dtype=float), delays)
        except DataError as exc:
            raise DataError(f"trajectory {i}: {exc}") from None
        Zs.append(Y[:-1])
        Zps.append(Y[1:])
        if inputs is not None:
            u = np.asarray(inputs[i], dtype=float)
            if u.ndim == 1:
                u = u[:, None]
            # inputs aligned with the most recent sample of each window
            Us.append(u[delays:-1])
    Z = np.vstack(Zs).T
    Zp = np.vstack(Zps).T
    if inputs is None:
        res = fit_dmd(Z, Zp, rank=rank, dt=dt)
        res.kind = "hdmd"
    else:
        U = np.vstack(Us).T
        res = fit_dmdc(Z, Zp, U, rank_in=rank, dt=dt)
        res.kind = "hdmdc"
    return res


def fit_continuous_generator(Z, Zdot):
    """Diagnostic regression Zdot ~ A_c Z for a continuous-time generator.

    The discrete pipeline never consumes derivatives; this exists for
    inspecting derivative-based fits side by side with the discrete operator.
    Returns (A_c, relative residual).
    """
    Z = _as_matrix(Z, "Z")
    Zd = _as_matrix(Zdot, "Zdot")
    if Z.shape != Zd.shape:
        raise DataError(f"Z and Zdot shapes differ: {Z.shape} vs {Zd.shape}")
    Ac = np.linalg.lstsq(Z.T, Zd.T, rcond=RANK_CUTOFF)[0].T
    E = Zd - Ac @ Z
    den = np.linalg.norm(Zd)
    rel = float(np.linalg.norm(E) / den) if den > 0 else 0.0
    return Ac, rel

"""Linear smoothers on explicit feature designs.

Every fit here predicts f(x0) = s(x0) . y_train where the weight vector s(x0)
does not depend on y_train. Fits keep the SVD factors of their design so the
weights can be recovered for arbitrary inputs:

    under-determined (p >= n):  s(x0) = phi(x0)' Phi' (Phi Phi')^-1
    over-determined  (p <  n):  s(x0) = phi(x0)' (Phi' Phi)^-1 Phi'

both of which reduce to phi(x0)' V S^-1 U' on the compact SVD Phi = U S V'.
All inversions go through the SVD with a relative singular-value cutoff.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularDesignError, ValidationError


def svd_cutoff(s: np.ndarray, shape: tuple[int, int]) -> float:
    """Relative rank tolerance: max(n, p) * eps * largest singular value."""
    if s.size == 0:
        return 0.0
    return max(shape) * np.finfo(float).eps * float(s[0])


def _masked_inverse(s: np.ndarray, cutoff: float) -> np.ndarray:
    inv = np.zeros_like(s)
    keep = s > cutoff
    inv[keep] = 1.0 / s[keep]
    return inv


# --------------------------------------------------------------------------- fit objects


@dataclass
class PcrState:
    """Standardization + projection pipeline kept by a PCR fit."""

    mean: np.ndarray          # per kept column
    std: np.ndarray           # per kept column (ones when not scaling)
    kept: np.ndarray          # boolean mask over original columns
    components: np.ndarray    # (p_kept, p_pc) right singular vectors
    solver: np.ndarray        # (p_pc + 1, n): beta = solver @ y
    scale_columns: bool


@dataclass
class PcrSmoother:
    """The y-independent half of a PCR fit.

    Holds the fitted projection pipeline and the pseudo-inverse solver, so
    weight matrices (and fits for many target vectors at once) can be produced
    without refactoring the design per target.
    """

    state: PcrState
    train_design: np.ndarray  # (n, p_pc + 1) projected columns + intercept
    tolerance: float
    rank: int

    @property
    def n_train(self) -> int:
        return self.train_design.shape[0]

    def design(self, Phi0: np.ndarray) -> np.ndarray:
        st = self.state
        Phi0 = np.atleast_2d(np.asarray(Phi0, dtype=float))
        if Phi0.shape[1] != st.kept.size:
            raise ValidationError(
                f"query has {Phi0.shape[1]} columns, design had {st.kept.size}"
            )
        Z0 = ((Phi0[:, st.kept] - st.mean) / st.std) @ st.components
        return np.concatenate([Z0, np.ones((Z0.shape[0], 1))], axis=1)

    def weight_matrix(self, Phi0: np.ndarray) -> np.ndarray:
        return self.design(Phi0) @ self.state.solver

    def hat_matrix(self) -> np.ndarray:
        return self.train_design @ self.state.solver

    def coefficients(self, y: np.ndarray) -> np.ndarray:
        return self.state.solver @ np.asarray(y, dtype=float)


@dataclass
class LinearFit:
    """A fitted linear smoother; mode is one of ols / min_norm / svd_basis / pcr."""

    mode: str
    coefficients: np.ndarray
    train_design: np.ndarray
    fitted_values: np.ndarray
    tolerance: float
    rank: int
    rank_deficient: bool = False
    pcr_state: PcrState | None = None
    # compact SVD factors of the (possibly transformed) design
    _U: np.ndarray = field(default=None, repr=False)
    _s_inv: np.ndarray = field(default=None, repr=False)
    _Vt: np.ndarray = field(default=None, repr=False)

    @property
    def n_train(self) -> int:
        return self.train_design.shape[0]

    # -- prediction path (through the coefficients) -------------------------

    def predict(self, Phi0: np.ndarray) -> np.ndarray:
        Phi0 = self._check_query(Phi0)
        if self.mode == "svd_basis":
            B0 = Phi0 @ self._Vt.T
            return B0 @ self.coefficients
        if self.mode == "pcr":
            return self._pcr_design(Phi0) @ self.coefficients
        return Phi0 @ self.coefficients

    # -- weight path (rows of the smoother matrix) --------------------------

    def weight_matrix(self, Phi0: np.ndarray) -> np.ndarray:
        """Rows s(x0) for each row of Phi0, shape (m, n_train)."""
        Phi0 = self._check_query(Phi0)
        if self.mode == "pcr":
            return self._pcr_design(Phi0) @ self.pcr_state.solver
        return ((Phi0 @ self._Vt.T) * self._s_inv) @ self._U.T

    def weight_vector(self, phi0: np.ndarray) -> np.ndarray:
        return self.weight_matrix(np.atleast_2d(phi0))[0]

    def hat_matrix(self) -> np.ndarray:
        """Smoother matrix at the training points (n, n).

        For the SVD-backed modes the training rows reduce exactly to the
        orthogonal projection U U' onto the fitted column space.
        """
        if self.mode == "pcr":
            return self.weight_matrix(self.train_design)
        U = self._U[:, : self.rank]
        return U @ U.T

    def _pcr_design(self, Phi0: np.ndarray) -> np.ndarray:
        st = self.pcr_state
        Z0 = ((Phi0[:, st.kept] - st.mean) / st.std) @ st.components
        return np.concatenate([Z0, np.ones((Z0.shape[0], 1))], axis=1)

    def _check_query(self, Phi0: np.ndarray) -> np.ndarray:
        Phi0 = np.atleast_2d(np.asarray(Phi0, dtype=float))
        p = self.train_design.shape[1]
        if Phi0.shape[1] != p:
            raise ValidationError(f"query has {Phi0.shape[1]} columns, design had {p}")
        return Phi0


# --------------------------------------------------------------------------- fits


def fit_ols(Phi: np.ndarray, y: np.ndarray) -> LinearFit:
    """Ordinary least squares; requires p < n and full column rank."""
    Phi, y = _check_design(Phi, y)
    n, p = Phi.shape
    if p >= n:
        raise ValidationError(f"fit_ols needs p < n, got p={p}, n={n}")
    U, s, Vt = np.linalg.svd(Phi, full_matrices=False)
    cut = svd_cutoff(s, Phi.shape)
    if s[-1] <= cut:
        raise SingularDesignError(
            f"design is rank deficient: smallest singular value {s[-1]:.3e} "
            f"<= cutoff {cut:.3e}"
        )
    s_inv = 1.0 / s
    beta = Vt.T @ (s_inv * (U.T @ y))
    return LinearFit(
        mode="ols", coefficients=beta, train_design=Phi,
        fitted_values=Phi @ beta, tolerance=cut, rank=p,
        _U=U, _s_inv=s_inv, _Vt=Vt,
    )


def fit_minnorm(Phi: np.ndarray, y: np.ndarray) -> LinearFit:
    """Minimum-norm interpolant beta = Phi'(Phi Phi')^-1 y; requires p >= n.

    When rank(Phi) < n the pseudo-inverse solution is returned and the fit is
    flagged rank_deficient.
    """
    Phi, y = _check_design(Phi, y)
    n, p = Phi.shape
    if p < n:
        raise ValidationError(f"fit_minnorm needs p >= n, got p={p}, n={n}")
    U, s, Vt = np.linalg.svd(Phi, full_matrices=False)
    cut = svd_cutoff(s, Phi.shape)
    rank = int(np.count_nonzero(s > cut))
    s_inv = _masked_inverse(s, cut)
    beta = Vt.T @ (s_inv * (U.T @ y))
    return LinearFit(
        mode="min_norm", coefficients=beta, train_design=Phi,
        fitted_values=Phi @ beta, tolerance=cut, rank=rank,
        rank_deficient=rank < n, _U=U, _s_inv=s_inv, _Vt=Vt,
    )


def fit_svd_basis(Phi: np.ndarray, y: np.ndarray) -> LinearFit:
    """Least squares on the rotated basis B = U S from the compact SVD.

    Predictions for a new point use b(x0) = V' phi(x0); on that basis the fit
    is plain least squares, and it reproduces the minimum-norm predictions.
    """
    Phi, y = _check_design(Phi, y)
    U, s, Vt = np.linalg.svd(Phi, full_matrices=False)
    cut = svd_cutoff(s, Phi.shape)
    rank = int(np.count_nonzero(s > cut))
    s_inv = _masked_inverse(s, cut)
    beta = s_inv * (U.T @ y)  # solves (U S) beta = y in the least-squares sense
    return LinearFit(
        mode="svd_basis", coefficients=beta, train_design=Phi,
        fitted_values=U @ (s * beta), tolerance=cut, rank=rank,
        rank_deficient=rank < min(Phi.shape), _U=U, _s_inv=s_inv, _Vt=Vt,
    )


def pcr_smoother(
    Phi: np.ndarray, p_pc: int, scale_columns: bool = True
) -> PcrSmoother:
    """Fit the target-independent part of principal-component regression.

    Pipeline: center (and by default scale) the columns, drop zero-variance
    columns, project onto the top p_pc right singular vectors, append an
    intercept column, and form the SVD cutoff pseudo-inverse of that
    (p_pc + 1)-column system. Near-square designs are legitimately
    ill-conditioned here; their variance blow-up is something we measure
    rather than reject.
    """
    Phi = np.asarray(Phi, dtype=float)
    if Phi.ndim != 2:
        raise ValidationError(f"design must be 2-d, got shape {Phi.shape}")
    if not np.isfinite(Phi).all():
        raise ValidationError("design contains non-finite values")
    n, p = Phi.shape
    if not (1 <= p_pc <= min(n - 1, p)):
        raise ValidationError(
            f"p_pc must be in [1, min(n-1, p)] = [1, {min(n - 1, p)}], got {p_pc}"
        )
    mean_all = Phi.mean(axis=0)
    std_all = Phi.std(axis=0)
    kept = std_all > 1e-12 * max(1.0, float(np.abs(Phi).max()))
    if not kept.all():
        warnings.warn(
            f"dropping {int((~kept).sum())} zero-variance column(s) before PCA",
            stacklevel=2,
        )
    if not kept.any():
        raise ValidationError("all columns have zero variance")
    std = std_all[kept] if scale_columns else np.ones(int(kept.sum()))
    Xs = (Phi[:, kept] - mean_all[kept]) / std
    U, s, Vt = np.linalg.svd(Xs, full_matrices=False)
    k = min(p_pc, s.size)
    Z = U[:, :k] * s[:k]
    A = np.concatenate([Z, np.ones((n, 1))], axis=1)
    Ua, sa, Vta = np.linalg.svd(A, full_matrices=False)
    cut = svd_cutoff(sa, A.shape)
    sa_inv = _masked_inverse(sa, cut)
    solver = (Vta.T * sa_inv) @ Ua.T
    state = PcrState(
        mean=mean_all[kept], std=std, kept=kept,
        components=Vt[:k].T, solver=solver, scale_columns=scale_columns,
    )
    return PcrSmoother(
        state=state, train_design=A, tolerance=cut,
        rank=int(np.count_nonzero(sa > cut)),
    )


def fit_pcr(
    Phi: np.ndarray,
    y: np.ndarray,
    p_pc: int,
    scale_columns: bool = True,
) -> LinearFit:
    """Principal-component regression with an appended intercept.

    See pcr_smoother for the pipeline; this adds the solve for one target
    vector and wraps everything as a LinearFit.
    """
    Phi, y = _check_design(Phi, y)
    sm = pcr_smoother(Phi, p_pc, scale_columns=scale_columns)
    beta = sm.coefficients(y)
    return LinearFit(
        mode="pcr", coefficients=beta, train_design=Phi,
        fitted_values=sm.train_design @ beta, tolerance=sm.tolerance,
        rank=sm.rank,
        rank_deficient=sm.rank < sm.train_design.shape[1],
        pcr_state=sm.state,
    )


def _check_design(Phi, y):
    Phi = np.asarray(Phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if Phi.ndim != 2:
        raise ValidationError(f"design must be 2-d, got shape {Phi.shape}")
    if y.shape != (Phi.shape[0],):
        raise ValidationError(
            f"targets shape {y.shape} does not match n={Phi.shape[0]}"
        )
    if not np.isfinite(Phi).all() or not np.isfinite(y).all():
        raise ValidationError("design or targets contain non-finite values")
    return Phi, y

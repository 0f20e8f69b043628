"""Finite-sample bound constants and numerical assumption audits.

The closed-form constants follow their defining formulas; for
cross-checking, the ridge-logistic variance constant evaluates to 6511.52
at (rho, delta, lambda) = (1, 1, 0.1).

Audits are sample estimates: the curvature floor is a minimum of segment
Hessian eigenvalues over sampled rows and a t-grid, and the tilde moments
are plain sample means of the 8th/4th powers, labeled as estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh

from .losses import loss_eval
from .regularizers import reg_curvature_diag
from .solver import _weighted_gram


@dataclass
class AssumptionAudit:
    """Empirical stand-ins for the bound constants.

    c0_emp: max |loss first derivative| over the data, including each
    held-out row scored against its leave-one-out fit.
    nu_emp: min over sampled rows and the t-grid of the smallest eigenvalue
    of the segment Hessians.
    tilde_moments: sample means of |d1|^8, ||x||^4 and sigma_min^{-8}.
    """

    c0_emp: float
    nu_emp: float
    tilde_moments: dict
    t_grid_size: int
    sampled_indices: tuple


@dataclass
class BoundReport:
    rho: float
    delta: float
    c0: float
    c1: float
    nu: float
    C_b: float
    C_v: float
    bound_over_n: float
    audit: AssumptionAudit | None = None


def compute_Cb(c0, c1, rho, delta, nu):
    """Bias constant (c0 c1 rho sqrt(delta) / nu)^2."""
    for name, value in (("c0", c0), ("c1", c1), ("rho", rho), ("delta", delta), ("nu", nu)):
        if not value > 0:
            raise ValueError(f"{name} must be positive")
    return (c0 * c1 * rho * np.sqrt(delta) / nu) ** 2


def compute_Cb_tilde(c1, rho, delta, ell_dot_8th, inv_sigma_min_8th, x_norm_4th):
    """Moment-based bias constant c1^2 rho delta c~0 nu~ c4.

    The three moment arguments are population quantities; in practice they
    come from AssumptionAudit.tilde_moments and the result is an estimate,
    never a certified bound.
    """
    for name, value in (
        ("c1", c1),
        ("rho", rho),
        ("delta", delta),
        ("ell_dot_8th", ell_dot_8th),
        ("inv_sigma_min_8th", inv_sigma_min_8th),
        ("x_norm_4th", x_norm_4th),
    ):
        if value < 0:
            raise ValueError(f"{name} must be nonnegative")
    return c1**2 * rho * delta * ell_dot_8th * inv_sigma_min_8th * x_norm_4th


def compute_Cv_from_parts(E_var, C_b):
    """Variance constant from its two ingredients.

    C_v = E_var + 2 C_b + 2 sqrt(C_b) sqrt(E_var + C_b).
    """
    if E_var < 0 or C_b < 0:
        raise ValueError("E_var and C_b must be nonnegative")
    return E_var + 2.0 * C_b + 2.0 * np.sqrt(C_b) * np.sqrt(E_var + C_b)


def compute_Cv_logistic(rho, delta, lam):
    """Ridge-logistic variance constant, printed formula.

    C_v = 6 + 5 rho delta / lam + 2 (4 rho sqrt(delta) / lam)^2
        + 2 (4 rho sqrt(delta) / lam) sqrt(6 + 5 rho delta / lam
                                           + (4 rho sqrt(delta) / lam)^2)
    """
    for name, value in (("rho", rho), ("delta", delta), ("lam", lam)):
        if not value > 0:
            raise ValueError(f"{name} must be positive")
    e_var = 6.0 + 5.0 * rho * delta / lam
    root_cb = 4.0 * rho * np.sqrt(delta) / lam
    return e_var + 2.0 * root_cb**2 + 2.0 * root_cb * np.sqrt(e_var + root_cb**2)


def pick_audit_indices(n, count=25):
    """Deterministic, evenly spaced subset of row indices."""
    count = min(n, count)
    return tuple(int(i) for i in np.unique(np.linspace(0, n - 1, count).round()))


def _segment_sigma_min(data, model, beta_full, beta_loo, i, t_grid):
    """inf over the t-grid of sigma_min(A_{t,/i})."""
    X_i = np.delete(data.X, i, axis=0)
    y_i = np.delete(data.y, i)
    best = np.inf
    for t in t_grid:
        beta_t = t * beta_loo + (1.0 - t) * beta_full
        _, _, d2 = loss_eval(model.loss, y_i, X_i @ beta_t)
        A = _weighted_gram(X_i, d2)
        idx = np.diag_indices_from(A)
        A[idx] += model.lam * reg_curvature_diag(model.reg, beta_t)
        sigma_min = eigvalsh(A, subset_by_index=[0, 0], lower=True)[0]
        best = min(best, float(sigma_min))
    return best


def audit_assumptions(data, model, full_fit, loo_fits, t_grid_size=11):
    """Empirical audit of the derivative bound and curvature floor.

    loo_fits maps row index -> leave-one-out FitResult for the sampled rows;
    the t-grid is uniform on [0, 1] including endpoints.
    """
    if t_grid_size < 2:
        raise ValueError("t_grid_size must be >= 2")
    beta = np.asarray(full_fit.beta_hat, dtype=float)
    _, d1, _ = loss_eval(model.loss, data.y, data.X @ beta)
    c0_emp = float(np.max(np.abs(d1)))
    for i, res in loo_fits.items():
        _, d1_i, _ = loss_eval(
            model.loss, data.y[i], float(data.X[i] @ res.beta_hat)
        )
        c0_emp = max(c0_emp, abs(float(d1_i)))

    t_grid = np.linspace(0.0, 1.0, t_grid_size)
    inv_eighth = []
    nu_emp = np.inf
    for i, res in loo_fits.items():
        sigma_min = _segment_sigma_min(data, model, beta, res.beta_hat, i, t_grid)
        nu_emp = min(nu_emp, sigma_min)
        inv_eighth.append(sigma_min**-8 if sigma_min > 0 else np.inf)

    tilde = {
        "ell_dot_8th": float(np.mean(np.abs(d1) ** 8)),
        "x_norm_4th": float(np.mean(np.sum(data.X**2, axis=1) ** 2)),
        "inv_sigma_min_8th": float(np.mean(inv_eighth)) if inv_eighth else np.nan,
    }
    return AssumptionAudit(
        c0_emp=c0_emp,
        nu_emp=float(nu_emp),
        tilde_moments=tilde,
        t_grid_size=t_grid_size,
        sampled_indices=tuple(sorted(loo_fits)),
    )


def check_perturb_lemma(data, model, full_fit, loo_fits, nu_emp):
    """Per-row check of the leave-one-out perturbation bound.

    ||beta_loo - beta_full|| <= |d1_i(beta_full)| ||x_i|| / nu_emp must hold
    for every audited row; slack is rhs - lhs (equality cases get a tiny
    tolerance).
    """
    if not nu_emp > 0:
        raise ValueError("nu_emp must be positive")
    beta = np.asarray(full_fit.beta_hat, dtype=float)
    rows = []
    for i, res in sorted(loo_fits.items()):
        _, d1_i, _ = loss_eval(model.loss, data.y[i], float(data.X[i] @ beta))
        lhs = float(np.linalg.norm(res.beta_hat - beta))
        rhs = abs(float(d1_i)) * float(np.linalg.norm(data.X[i])) / nu_emp
        rows.append(
            {
                "i": int(i),
                "lhs": lhs,
                "rhs": rhs,
                "holds": bool(lhs <= rhs + 1e-9 * (1.0 + rhs)),
                "slack": rhs - lhs,
            }
        )
    return rows

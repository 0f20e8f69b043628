"""Ground-truth out-of-sample prediction error.

Closed forms exist for the linear-Gaussian and logistic designs; a seeded
Monte-Carlo estimate covers every family and doubles as the cross-check
oracle for the closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .datagen import CovSpec, derive_seed, gen_response, substream
from .losses import _softplus, loss_eval

_MC_CHUNK = 200_000


@dataclass(frozen=True, eq=False)
class TrueModel:
    """The data-generating truth: coefficients, feature covariance, noise."""

    beta_star: np.ndarray
    sigma_spec: CovSpec
    noise_var: float = 0.0
    family: str = "linear"
    shape: float | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "beta_star", np.asarray(self.beta_star, dtype=float)
        )
        if self.noise_var < 0:
            raise ValueError("noise_var must be nonnegative")


def err_out_linear(beta_hat, truth):
    """Exact out-of-sample squared error for the linear-Gaussian family.

    Returns E[(y_o - x_o beta_hat)^2 | D] = noise_var +
    ||Sigma^{1/2} (beta_hat - beta_star)||^2.  This is in full-squared-error
    units; callers whose phi is the half squared error scale by 1/2.
    """
    if truth.family != "linear":
        raise ValueError("err_out_linear requires the linear family")
    diff = np.asarray(beta_hat, dtype=float) - truth.beta_star
    # raises if the explicit covariance is not SPD
    truth.sigma_spec.cholesky(diff.shape[0])
    return float(truth.noise_var + truth.sigma_spec.quad(diff))


def gauss_hermite_expectation(func, var, order=64):
    """E func(Z) for Z ~ N(0, var) by Gauss-Hermite quadrature.

    Uses the sqrt(2) change of variables; weights sum to sqrt(pi).
    """
    if var < 0:
        raise ValueError("variance must be nonnegative")
    if var == 0.0:
        return float(func(np.zeros(1))[0])
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    z = np.sqrt(2.0 * var) * nodes
    return float(weights @ func(z) / np.sqrt(np.pi))


def err_out_logistic(beta_hat, truth, quad_order=64):
    """Out-of-sample logistic loss under a Gaussian design, by quadrature.

    With Z = x_o beta_star and W = x_o beta_hat jointly Gaussian,
    E[y_o W] reduces to the projection coefficient cov(W, Z) / var(Z)
    times E[Z sigmoid(Z)]; for scaled-identity covariance the coefficient
    is the familiar beta_hat.beta_star / ||beta_star||^2.
    """
    if truth.family != "logistic":
        raise ValueError("err_out_logistic requires the logistic family")
    if quad_order < 20:
        raise ValueError("quad_order must be >= 20")
    beta_hat = np.asarray(beta_hat, dtype=float)
    var_z = truth.sigma_spec.quad(truth.beta_star)
    if not var_z > 0:
        raise ValueError("degenerate beta_star")
    var_w = truth.sigma_spec.quad(beta_hat)
    coef = truth.sigma_spec.cross(beta_hat, truth.beta_star) / var_z
    e_zsig = gauss_hermite_expectation(lambda z: z * expit(z), var_z, quad_order)
    e_softplus = gauss_hermite_expectation(_softplus, var_w, quad_order)
    return float(-coef * e_zsig + e_softplus)


def err_out_monte_carlo(beta_hat, truth, model, m, seed):
    """Monte-Carlo out-of-sample error: fresh draws of (x_o, y_o).

    Returns (mean, std_err) of phi(y_o, x_o beta_hat) over m draws,
    deterministic given seed.  Draws are generated in fixed-size chunks on
    independent substreams and merged by streaming mean/variance, so chunks
    are combinable in any order.
    """
    if m < 100:
        raise ValueError("m must be >= 100")
    beta_hat = np.asarray(beta_hat, dtype=float)
    p = beta_hat.shape[0]
    chol = truth.sigma_spec.cholesky(p)
    scaled_identity = truth.sigma_spec.kind == "scaled_identity"
    scale = np.sqrt(truth.sigma_spec.scale)

    count = 0
    mean = 0.0
    m2 = 0.0
    chunk_index = 0
    while count < m:
        size = min(_MC_CHUNK, m - count)
        rng = substream(seed, chunk_index)
        Z = rng.standard_normal((size, p))
        X = scale * Z if scaled_identity else Z @ chol.T
        y = gen_response(
            X,
            truth.beta_star,
            truth.family,
            derive_seed(seed, chunk_index, 1),
            noise_var=truth.noise_var,
            shape=truth.shape,
        )
        values, _, _ = loss_eval(model.phi_spec, y, X @ beta_hat)
        # Chan's pairwise merge of (count, mean, M2) summaries
        c_count = size
        c_mean = float(np.mean(values))
        c_m2 = float(np.sum((values - c_mean) ** 2))
        delta = c_mean - mean
        total = count + c_count
        mean += delta * c_count / total
        m2 += c_m2 + delta * delta * count * c_count / total
        count = total
        chunk_index += 1
    std_err = np.sqrt(m2 / (count - 1) / count)
    return float(mean), float(std_err)

"""Convex coordinatewise regularizers.

Smooth families (ridge, smoothed elastic net) expose value / gradient /
diagonal Hessian; nonsmooth families (l1, elastic net) expose a closed-form
proximal operator.  The regularizer is applied coordinatewise and summed,
so its Hessian is diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import _softplus

FAMILIES = ("ridge", "smoothed_elastic_net", "l1", "elastic_net")
SMOOTH_FAMILIES = ("ridge", "smoothed_elastic_net")


@dataclass(frozen=True)
class RegSpec:
    """A regularizer family plus its parameters.

    mix is the elastic-net mixing weight (weight of the l1 part for
    elastic_net, weight of the quadratic part for smoothed_elastic_net);
    smooth_sharpness controls how closely the softplus surrogate of |b|
    hugs the absolute value.
    """

    family: str
    mix: float | None = None
    smooth_sharpness: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown regularizer family {self.family!r}")
        needs_mix = self.family in ("smoothed_elastic_net", "elastic_net")
        if needs_mix:
            if self.mix is None or not 0.0 <= self.mix <= 1.0:
                raise ValueError(f"{self.family} requires mix in [0, 1]")
        elif self.mix is not None:
            raise ValueError(f"mix is not a parameter of {self.family}")
        if self.family == "smoothed_elastic_net":
            if self.smooth_sharpness is None or not self.smooth_sharpness > 0:
                raise ValueError("smoothed_elastic_net requires smooth_sharpness > 0")
        elif self.smooth_sharpness is not None:
            raise ValueError(f"smooth_sharpness is not a parameter of {self.family}")

    @property
    def is_smooth(self):
        return self.family in SMOOTH_FAMILIES


def _smooth_abs_parts(beta, sharpness):
    # softplus surrogate of |b|: value, first and second derivative
    ab = sharpness * beta
    value = (_softplus(ab) + _softplus(-ab)) / sharpness
    t = np.tanh(0.5 * ab)
    return value, t, 0.5 * sharpness * (1.0 - t * t)


def reg_value(spec, beta):
    """Penalty value (without lambda) for any family."""
    beta = np.asarray(beta, dtype=float)
    f = spec.family
    if f == "ridge":
        return 0.5 * float(beta @ beta)
    if f == "smoothed_elastic_net":
        v, _, _ = _smooth_abs_parts(beta, spec.smooth_sharpness)
        return float(spec.mix * beta @ beta + (1.0 - spec.mix) * np.sum(v))
    if f == "l1":
        return float(np.sum(np.abs(beta)))
    # elastic_net
    return float(0.5 * (1.0 - spec.mix) * beta @ beta + spec.mix * np.sum(np.abs(beta)))


def reg_eval(spec, beta):
    """Value, gradient and diagonal Hessian of a smooth regularizer.

    Raises ValueError for nonsmooth families; use prox_step for those.
    """
    if not spec.is_smooth:
        raise ValueError(f"reg_eval requires a smooth family, got {spec.family}")
    beta = np.asarray(beta, dtype=float)
    if spec.family == "ridge":
        return 0.5 * float(beta @ beta), beta.copy(), np.ones_like(beta)
    m, a = spec.mix, spec.smooth_sharpness
    v, t, curv = _smooth_abs_parts(beta, a)
    value = float(m * beta @ beta + (1.0 - m) * np.sum(v))
    grad = 2.0 * m * beta + (1.0 - m) * t
    hess = 2.0 * m + (1.0 - m) * curv
    return value, grad, hess


def prox_step(spec, v, step, lam):
    """argmin_b 0.5 ||b - v||^2 + step * lam * r(b), coordinatewise.

    Soft-thresholding for l1; soft-thresholding plus quadratic shrinkage
    for elastic_net.  Raises ValueError for smooth families.
    """
    if spec.is_smooth:
        raise ValueError(f"prox_step requires l1 or elastic_net, got {spec.family}")
    if step <= 0 or lam <= 0:
        raise ValueError("step and lam must be positive")
    v = np.asarray(v, dtype=float)
    if spec.family == "l1":
        thresh = step * lam
        return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)
    thresh = step * lam * spec.mix
    shrink = 1.0 + step * lam * (1.0 - spec.mix)
    return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0) / shrink


def strong_convexity_lower(spec, lam):
    """Strong-convexity constant of lam * r, zero when there is none."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    f = spec.family
    if f == "ridge":
        return lam
    if f == "smoothed_elastic_net":
        return 2.0 * lam * spec.mix
    if f == "elastic_net":
        return lam * (1.0 - spec.mix)
    return 0.0


def reg_curvature_diag(spec, beta):
    """Diagonal of the (a.e.) second derivative of r at beta.

    For l1 / elastic_net this is the curvature of the quadratic part only;
    it is what enters the segment-Hessian audits for those penalties.
    """
    beta = np.asarray(beta, dtype=float)
    f = spec.family
    if f == "ridge":
        return np.ones_like(beta)
    if f == "smoothed_elastic_net":
        _, _, curv = _smooth_abs_parts(beta, spec.smooth_sharpness)
        return 2.0 * spec.mix + (1.0 - spec.mix) * curv
    if f == "elastic_net":
        return np.full_like(beta, 1.0 - spec.mix)
    return np.zeros_like(beta)

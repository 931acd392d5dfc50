"""Velocity-prediction DPO objective with hand-derived gradients.

Under a variance-preserving schedule (alpha_t^2 + sigma_t^2 = 1), the
velocity target for a clean latent x0 and noise eps at timestep t is

    v_t = alpha_t * eps - sigma_t * x0

and the energy of a prediction is the squared error ||v_t - v_pred||^2.
The preference loss for one (winner, loser) pair sharing noise and
timestep is

    inner = beta * ((E_ref_w - E_theta_w) - (E_ref_l - E_theta_l))
    loss  = -log sigmoid(inner) = log(1 + exp(-inner))

evaluated in the numerically stable softplus form.  Gradients with
respect to the trainable energies are

    d loss / d E_theta_w =  beta * sigmoid(-inner)
    d loss / d E_theta_l = -beta * sigmoid(-inner)

The toy alignment loop trains a linear velocity predictor by full-batch
gradient descent on this loss, propagating the chain rule through the
energies by hand; it verifies the objective steers predictions toward
winners, not model capacity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import TrainingDivergedError, ValidationError

DEFAULT_TIMESTEPS = 1000
DEFAULT_BETA = 1.0


@dataclass(frozen=True)
class NoiseSchedule:
    """Variance-preserving noise schedule coefficients per timestep."""

    timesteps: int
    alpha: np.ndarray
    sigma: np.ndarray
    alpha_bar: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        alpha_bar = np.asarray(self.alpha_bar, dtype=np.float64)
        if not (len(alpha) == len(sigma) == len(alpha_bar) == self.timesteps):
            raise ValidationError("schedule arrays must match timestep count",
                                  code="dimension_mismatch")
        if np.max(np.abs(alpha ** 2 + sigma ** 2 - 1.0)) > 1e-9:
            raise ValidationError(
                "schedule is not variance-preserving: alpha^2 + sigma^2 != 1")
        if np.any(np.diff(alpha_bar) > 1e-12):
            raise ValidationError("alpha_bar must be non-increasing in t")
        if abs(alpha_bar[0] - 1.0) > 1e-3:
            raise ValidationError("alpha_bar[0] must be close to 1")
        for arr in (alpha, sigma, alpha_bar):
            arr.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "alpha_bar", alpha_bar)


def cosine_schedule(timesteps=DEFAULT_TIMESTEPS):
    """Cosine variance-preserving schedule.

    alpha_t = cos(pi t / (2 T)), sigma_t = sin(pi t / (2 T)); under this
    parameterization alpha_bar_t = alpha_t^2 directly.
    """
    t = np.arange(timesteps, dtype=np.float64)
    alpha = np.cos(np.pi * t / (2.0 * timesteps))
    sigma = np.sin(np.pi * t / (2.0 * timesteps))
    return NoiseSchedule(timesteps, alpha, sigma, alpha ** 2)


def _check_t(sched: NoiseSchedule, t):
    if not (0 <= t < sched.timesteps):
        raise ValidationError(f"timestep {t} outside 0..{sched.timesteps - 1}")


def _check_dims(*vectors):
    dims = {np.asarray(v).shape for v in vectors}
    if len(dims) != 1:
        raise ValidationError(f"vector shapes differ: {sorted(map(str, dims))}",
                              code="dimension_mismatch")


def noisy_latent(x0, eps, sched: NoiseSchedule, t):
    """sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps."""
    _check_t(sched, t)
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    _check_dims(x0, eps)
    ab = sched.alpha_bar[t]
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * eps


def velocity_target(x0, eps, sched: NoiseSchedule, t):
    """alpha_t eps - sigma_t x0."""
    _check_t(sched, t)
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    _check_dims(x0, eps)
    return sched.alpha[t] * eps - sched.sigma[t] * x0


def energy(v_pred, v_target):
    """Squared L2 norm of the velocity prediction error."""
    v_pred = np.asarray(v_pred, dtype=np.float64)
    v_target = np.asarray(v_target, dtype=np.float64)
    _check_dims(v_pred, v_target)
    d = v_target - v_pred
    return float(d @ d)


@dataclass(frozen=True)
class EnergyQuad:
    """The four energies entering one preference-loss evaluation."""

    e_theta_w: float
    e_ref_w: float
    e_theta_l: float
    e_ref_l: float

    def __post_init__(self):
        vals = (self.e_theta_w, self.e_ref_w, self.e_theta_l, self.e_ref_l)
        if not all(np.isfinite(v) for v in vals):
            raise ValidationError("energies must be finite", code="non_finite")


def _sigmoid(x):
    # Stable in both tails.
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


def dpo_loss(q: EnergyQuad, beta=DEFAULT_BETA):
    """Preference loss and gradients w.r.t. the trainable energies.

    Returns (loss, d_loss/d_e_theta_w, d_loss/d_e_theta_l).  The loss is
    computed as softplus(-inner) = log(1 + exp(-inner)), never through a
    bare -log(sigmoid()) which overflows for large |inner|.
    """
    if beta <= 0:
        raise ValidationError(f"beta must be positive, got {beta}")
    inner = beta * ((q.e_ref_w - q.e_theta_w) - (q.e_ref_l - q.e_theta_l))
    loss = float(np.logaddexp(0.0, -inner))
    s = _sigmoid(-inner)
    return loss, beta * s, -beta * s


@dataclass(frozen=True)
class DpoSample:
    """Clean winner/loser latents with their shared noise and timestep."""

    x0_w: np.ndarray
    x0_l: np.ndarray
    eps: np.ndarray
    t: int
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        x0_w = np.asarray(self.x0_w, dtype=np.float64)
        x0_l = np.asarray(self.x0_l, dtype=np.float64)
        eps = np.asarray(self.eps, dtype=np.float64)
        _check_dims(x0_w, x0_l, eps)
        object.__setattr__(self, "x0_w", x0_w)
        object.__setattr__(self, "x0_l", x0_l)
        object.__setattr__(self, "eps", eps)


@dataclass(frozen=True)
class AlignmentTrace:
    """Per-step loss and implicit reward margin of the toy loop."""

    loss: np.ndarray
    mean_margin: np.ndarray
    final_margins: np.ndarray

    @property
    def positive_fraction(self):
        return float(np.mean(self.final_margins > 0))

    def write(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write("step\tloss\tmean_margin\n")
            for i, (l, m) in enumerate(zip(self.loss, self.mean_margin)):
                f.write(f"{i}\t{l:.10g}\t{m:.10g}\n")


class _LinearPredictor:
    """v(x_t) = W x_t + b with hand-derived energy gradients."""

    def __init__(self, dim):
        self.w = np.zeros((dim, dim))
        self.b = np.zeros(dim)

    def predict(self, x_t):
        return x_t @ self.w.T + self.b

    def copy(self):
        out = _LinearPredictor(self.w.shape[0])
        out.w = self.w.copy()
        out.b = self.b.copy()
        return out


def toy_align(pairs, sched: NoiseSchedule, beta=DEFAULT_BETA, steps=500,
              lr=1e-2):
    """Full-batch gradient descent of the preference loss over a pair set.

    The reference predictor is a frozen copy of the initialization.  The
    trace records loss and the mean implicit reward margin
    beta * ((E_ref_w - E_theta_w) - (E_ref_l - E_theta_l)) per step.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValidationError("toy_align needs at least one pair")
    dim = len(pairs[0].x0_w)
    for p in pairs:
        if len(p.x0_w) != dim:
            raise ValidationError("inconsistent latent dimensions across pairs",
                                  code="dimension_mismatch")

    # Precompute noisy inputs and targets; they do not change during training.
    xw = np.stack([noisy_latent(p.x0_w, p.eps, sched, p.t) for p in pairs])
    xl = np.stack([noisy_latent(p.x0_l, p.eps, sched, p.t) for p in pairs])
    vw = np.stack([velocity_target(p.x0_w, p.eps, sched, p.t) for p in pairs])
    vl = np.stack([velocity_target(p.x0_l, p.eps, sched, p.t) for p in pairs])

    model = _LinearPredictor(dim)
    ref = model.copy()
    e_ref_w = np.sum((vw - ref.predict(xw)) ** 2, axis=1)
    e_ref_l = np.sum((vl - ref.predict(xl)) ** 2, axis=1)

    losses = np.empty(steps)
    margins = np.empty(steps)
    n = len(pairs)
    per_pair_margin = None
    for step in range(steps):
        # Oversized steps blow the energies up to inf/nan; that case is
        # detected below and raised, so intermediate warnings are noise.
        with np.errstate(over="ignore", invalid="ignore"):
            rw = vw - model.predict(xw)
            rl = vl - model.predict(xl)
            e_w = np.sum(rw ** 2, axis=1)
            e_l = np.sum(rl ** 2, axis=1)

            inner = beta * ((e_ref_w - e_w) - (e_ref_l - e_l))
            loss = float(np.mean(np.logaddexp(0.0, -inner)))
        if not np.isfinite(loss):
            raise TrainingDivergedError(
                f"loss became non-finite at step {step}", step=step)
        losses[step] = loss
        per_pair_margin = inner
        margins[step] = float(np.mean(inner))

        # d loss_i / d e_w_i = beta * sigmoid(-inner_i) / n (mean reduction),
        # d e / d W = -2 r x^T, d e / d b = -2 r.
        with np.errstate(over="ignore", invalid="ignore"):
            s = expit(-inner)
            g_w = beta * s / n
            g_l = -beta * s / n
            grad_w_mat = (-2.0 * ((g_w[:, None] * rw).T @ xw
                                  + (g_l[:, None] * rl).T @ xl))
            grad_b = -2.0 * ((g_w[:, None] * rw).sum(axis=0)
                             + (g_l[:, None] * rl).sum(axis=0))
            model.w -= lr * grad_w_mat
            model.b -= lr * grad_b

    return AlignmentTrace(losses, margins, per_pair_margin)


def separable_cohort(n_pairs, dim, seed, noise_scale=1.0):
    """Construction where winners are exactly linearly predictable.

    At timestep 0 the noisy latent equals x0 and the velocity target
    equals eps; choosing eps as a fixed linear map of the winner latent
    makes the winner side fittable by a linear predictor while the loser
    latents are independent noise the same map cannot explain.
    """
    rng = np.random.default_rng(seed)
    w_true = rng.normal(0.0, 1.0, size=(dim, dim)) / np.sqrt(dim)
    b_true = rng.normal(0.0, 0.1, size=dim)
    pairs = []
    for _ in range(n_pairs):
        x0_w = rng.normal(0.0, 1.0, size=dim)
        x0_l = rng.normal(0.0, noise_scale, size=dim)
        eps = w_true @ x0_w + b_true
        pairs.append(DpoSample(x0_w, x0_l, eps, t=0))
    return pairs

"""Radial (spectral-level) stochastic flows and their flat-space cousins.

The core process is the interacting-particle equation on the ordered
chamber,

    d sigma_k = (1/2) dS/dsigma_k dt + sqrt(2/beta) dB_k,

whose drift is half the entropy gradient.  beta = inf removes the noise
and leaves the deterministic (mean-curvature) flow, integrated either by
Euler-Maruyama inside the common driver or by classical RK4 for accuracy
studies.  Companion models: the squared-radial flat analogue (dyson) and
the flat sphere toy model in point-cloud or scalar-radius form.
"""
from __future__ import annotations

import numpy as np

from . import ensemble as ens
from .entropy import _gradient_raw, cutoff_eta, entropy_gradient
from .errors import ChamberExit, OriginHit, OutOfChamber
from .config import SimConfig


def siegel_drift(sigma) -> np.ndarray:
    """Drift of the radial flow: half the entropy gradient."""
    return 0.5 * entropy_gradient(sigma)


def dyson_drift(lam) -> np.ndarray:
    """Componentwise sum_{l != k} 1 / (lambda_k - lambda_l)."""
    lam = np.asarray(getattr(lam, "sigma", lam), dtype=float)
    n = lam.shape[-1]
    if n == 1:
        return np.zeros_like(lam)
    diff = lam[..., :, None] - lam[..., None, :]
    mask = ~np.eye(n, dtype=bool)
    if np.any(diff[..., mask] == 0):
        raise OutOfChamber("coincident coordinates")
    inv = np.where(mask, 1.0 / np.where(diff != 0, diff, np.inf), 0.0)
    return np.sum(inv, axis=-1)


def _noise_coef(beta: float) -> float:
    return 0.0 if np.isinf(beta) else float(np.sqrt(2.0 / beta))


def _ordered(prop: np.ndarray, floor: float) -> np.ndarray:
    ok = prop[..., 0] > floor
    if prop.shape[-1] > 1:
        ok = ok & np.all(np.diff(prop, axis=-1) > floor, axis=-1)
    return ok


class ParticleKernel:
    """Euler-Maruyama step of the radial flow, optional entropy cutoff."""

    def __init__(self, cfg: SimConfig):
        self.sigma0 = cfg.sigma0
        self.beta = cfg.beta
        self.cutoff = cfg.cutoff
        self.floor = cfg.gap_floor
        self.noise_dim = cfg.n
        self.obs_dim = cfg.n

    def init(self, c: int) -> np.ndarray:
        return np.tile(self.sigma0, (c, 1))

    def observe(self, state: np.ndarray) -> np.ndarray:
        return state

    def attempt(self, state, idx, h, xi):
        sig = state[idx]
        if self.cutoff is not None:
            eta = np.asarray(cutoff_eta(sig, *self.cutoff))
        else:
            eta = np.ones(len(idx))
        drift = 0.5 * _gradient_raw(sig)
        prop = sig + eta[:, None] * (drift * h + _noise_coef(self.beta) * np.sqrt(h) * xi)
        frozen = eta == 0.0
        ok = _ordered(prop, self.floor) & np.all(np.isfinite(prop), axis=-1) & ~frozen
        status = np.where(ok, ens.OK, ens.REJECT_CHAMBER)
        status[frozen] = ens.FREEZE
        state[idx[ok]] = prop[ok]
        return status


class MeanCurvatureKernel:
    """Classical RK4 on sigma' = (1/2) grad S; no noise."""

    def __init__(self, cfg: SimConfig):
        self.sigma0 = cfg.sigma0
        self.floor = cfg.gap_floor
        self.noise_dim = 0
        self.obs_dim = cfg.n

    def init(self, c: int) -> np.ndarray:
        return np.tile(self.sigma0, (c, 1))

    def observe(self, state: np.ndarray) -> np.ndarray:
        return state

    def attempt(self, state, idx, h, xi):
        sig = state[idx]
        prop = _rk4_step(sig, h)
        ok = _ordered(prop, self.floor) & np.all(np.isfinite(prop), axis=-1)
        status = np.where(ok, ens.OK, ens.REJECT_CHAMBER)
        state[idx[ok]] = prop[ok]
        return status


class DysonKernel:
    """Euler-Maruyama for the flat squared-radial analogue on the real line."""

    def __init__(self, cfg: SimConfig):
        self.lam0 = cfg.sigma0
        self.beta = cfg.beta
        self.floor = cfg.gap_floor
        self.noise_dim = cfg.n
        self.obs_dim = cfg.n

    def init(self, c: int) -> np.ndarray:
        return np.tile(self.lam0, (c, 1))

    def observe(self, state: np.ndarray) -> np.ndarray:
        return state

    def attempt(self, state, idx, h, xi):
        lam = state[idx]
        n = lam.shape[-1]
        diff = lam[:, :, None] - lam[:, None, :]
        mask = ~np.eye(n, dtype=bool)
        inv = np.where(mask, 1.0 / np.where(diff != 0, diff, np.inf), 0.0)
        drift = np.sum(inv, axis=-1)
        prop = lam + drift * h + _noise_coef(self.beta) * np.sqrt(h) * xi
        ok = prop[:, 0] > -np.inf
        if n > 1:
            ok = np.all(np.diff(prop, axis=-1) > self.floor, axis=-1)
        ok = ok & np.all(np.isfinite(prop), axis=-1)
        status = np.where(ok, ens.OK, ens.REJECT_CHAMBER)
        state[idx[ok]] = prop[ok]
        return status


class SpherePointKernel:
    """Ambient point-cloud step: tangential noise at unit rate, radial noise
    scaled by sqrt(2/beta).  Euler-Maruyama; no drift term."""

    reject_reasons = {ens.REJECT_CHAMBER: "origin-hit"}

    def __init__(self, cfg: SimConfig):
        self.r0 = float(cfg.sigma0[0])
        self.n = cfg.n
        self.beta = cfg.beta
        self.floor = cfg.gap_floor
        self.noise_dim = cfg.n
        self.obs_dim = 1

    def init(self, c: int) -> np.ndarray:
        z = np.zeros((c, self.n))
        z[:, 0] = self.r0
        return z

    def observe(self, state: np.ndarray) -> np.ndarray:
        return np.linalg.norm(state, axis=-1, keepdims=True)

    def attempt(self, state, idx, h, xi):
        z = state[idx]
        r = np.linalg.norm(z, axis=-1, keepdims=True)
        zh = z / r
        db = np.sqrt(h) * xi
        rad = np.sum(zh * db, axis=-1, keepdims=True)
        prop = z + db - zh * rad + _noise_coef(self.beta) * zh * rad
        ok = np.linalg.norm(prop, axis=-1) > self.floor
        status = np.where(ok, ens.OK, ens.REJECT_CHAMBER)
        state[idx[ok]] = prop[ok]
        return status


class SphereRadiusKernel:
    """Scalar radius equation dr = (n-1)/(2r) dt + sqrt(2/beta) dB."""

    reject_reasons = {ens.REJECT_CHAMBER: "origin-hit"}

    def __init__(self, cfg: SimConfig):
        self.r0 = float(cfg.sigma0[0])
        self.n = cfg.n
        self.beta = cfg.beta
        self.floor = cfg.gap_floor
        self.noise_dim = 1
        self.obs_dim = 1

    def init(self, c: int) -> np.ndarray:
        return np.full((c, 1), self.r0)

    def observe(self, state: np.ndarray) -> np.ndarray:
        return state

    def attempt(self, state, idx, h, xi):
        r = state[idx]
        prop = r + (self.n - 1) / (2.0 * r) * h + _noise_coef(self.beta) * np.sqrt(h) * xi
        ok = prop[:, 0] > self.floor
        status = np.where(ok, ens.OK, ens.REJECT_CHAMBER)
        state[idx[ok]] = prop[ok]
        return status


def _rk4_step(sig: np.ndarray, h: float) -> np.ndarray:
    k1 = 0.5 * _gradient_raw(sig)
    k2 = 0.5 * _gradient_raw(sig + 0.5 * h * k1)
    k3 = 0.5 * _gradient_raw(sig + 0.5 * h * k2)
    k4 = 0.5 * _gradient_raw(sig + h * k3)
    return sig + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_mean_curvature(sigma0, t_final: float, h: float):
    """Deterministic radial flow by classical RK4.

    Returns (times, trajectory) with trajectory[j] the state at times[j];
    times is the uniform grid 0, h, ..., t_final.
    """
    sigma0 = np.asarray(getattr(sigma0, "sigma", sigma0), dtype=float)
    steps = int(round(t_final / h))
    if abs(steps * h - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError("t_final must be an integer multiple of h")
    traj = np.empty((steps + 1, sigma0.size))
    traj[0] = sigma0
    sig = sigma0[None, :].copy()
    for j in range(steps):
        sig = _rk4_step(sig, h)
        if not np.all(np.isfinite(sig)):
            raise OutOfChamber("flow left the chamber")
        traj[j + 1] = sig[0]
    return np.arange(steps + 1) * h, traj


def step_particles(sigma, beta: float, h: float, gaussians, cutoff=None, gap_floor: float = 1e-6):
    """One Euler-Maruyama step of the radial flow for a single state.

    Returns the new sigma; with an active cutoff that has reached zero the
    state is returned unchanged (frozen).  Raises ChamberExit when the
    proposed step violates ordering or the gap floor.
    """
    sigma = np.asarray(getattr(sigma, "sigma", sigma), dtype=float)
    xi = np.asarray(gaussians, dtype=float)
    if xi.shape != sigma.shape:
        raise ValueError("gaussians must match sigma in shape")
    state = sigma[None, :].copy()
    kernel = ParticleKernel.__new__(ParticleKernel)
    kernel.beta = float(beta)
    kernel.cutoff = cutoff
    kernel.floor = gap_floor
    kernel.noise_dim = kernel.obs_dim = sigma.size
    status = kernel.attempt(state, np.array([0]), h, xi[None, :])
    if status[0] == ens.REJECT_CHAMBER:
        raise ChamberExit("step left the ordered chamber")
    return state[0]


_KERNELS = {
    "particle": ParticleKernel,
    "mean-curvature": MeanCurvatureKernel,
    "dyson": DysonKernel,
    "sphere-point": SpherePointKernel,
    "sphere-radius": SphereRadiusKernel,
}


def step_sphere_point(z, beta: float, h: float, gaussians, floor: float = 1e-6) -> np.ndarray:
    """One point-cloud step; raises OriginHit when the move reaches the origin."""
    z = np.asarray(z, dtype=float)
    state = z[None, :].copy()
    kernel = SpherePointKernel.__new__(SpherePointKernel)
    kernel.beta = float(beta)
    kernel.floor = floor
    status = kernel.attempt(state, np.array([0]), h, np.asarray(gaussians, float)[None, :])
    if status[0] != ens.OK:
        raise OriginHit("step reached the origin")
    return state[0]


def simulate_particle_paths(cfg: SimConfig, threads: int = 1) -> ens.PathEnsemble:
    """Run an ensemble for any of the particle-type schemes."""
    if cfg.scheme not in _KERNELS:
        raise ValueError(f"not a particle-type scheme: {cfg.scheme}")
    kernel = _KERNELS[cfg.scheme](cfg)
    return ens.run_ensemble(cfg, kernel, threads=threads)

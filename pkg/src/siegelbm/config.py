"""Simulation configuration: parsing and validation of run descriptions.

Validation reports the first failing field by name.  Schemes:

  matrix          disk-model matrix integrator (predictor-corrector)
  particle        radial interacting-particle integrator (Euler-Maruyama)
  mean-curvature  deterministic radial flow (classical RK4)
  dyson           squared-radial flat-space analogue
  sphere-point    flat sphere toy model, ambient point cloud
  sphere-radius   flat sphere toy model, scalar radius equation
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid
from .linalg import matrix_from_json

SCHEMES = ("matrix", "particle", "mean-curvature", "dyson", "sphere-point", "sphere-radius")

_KNOWN_KEYS = {
    "n",
    "beta",
    "sigma0",
    "t_final",
    "dt",
    "n_paths",
    "seed",
    "scheme",
    "sample_times",
    "cutoff",
    "gap_floor",
    "q0",
}

_DEFAULT_CUTOFF = (50.0, 50.0)


def _fail(fieldname: str, msg: str):
    raise ConfigInvalid(f"{fieldname}: {msg}")


@dataclass(frozen=True)
class SimConfig:
    n: int
    beta: float  # np.inf for the deterministic-noise limit
    sigma0: np.ndarray
    t_final: float
    dt: float
    n_paths: int
    seed: int
    scheme: str
    sample_times: tuple = ()
    cutoff: tuple | None = None  # resolved (k, K) or None
    gap_floor: float = 1e-6
    q0: np.ndarray | None = None
    sample_indices: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "sigma0", np.asarray(self.sigma0, dtype=float))
        if self.sample_indices is None:
            if self.sample_times:
                idx = [int(round(float(t) / self.dt)) for t in self.sample_times]
            else:
                idx = [0, self.n_steps]
            object.__setattr__(
                self, "sample_indices", np.unique(np.asarray(idx, dtype=np.int64))
            )

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def to_meta(self) -> dict:
        return {
            "scheme": self.scheme,
            "n": self.n,
            "beta": float(self.beta),
            "sigma0": [float(v) for v in self.sigma0],
            "t_final": self.t_final,
            "dt": self.dt,
            "n_paths": self.n_paths,
            "seed": self.seed,
            "gap_floor": self.gap_floor,
            "cutoff": list(self.cutoff) if self.cutoff else None,
        }


def _validate_sigma0(scheme: str, n: int, raw) -> np.ndarray:
    if not isinstance(raw, (list, tuple)) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw
    ):
        _fail("sigma0", "must be a list of numbers")
    arr = np.asarray(raw, dtype=float)
    if scheme in ("sphere-point", "sphere-radius"):
        if arr.size != 1:
            _fail("sigma0", "sphere schemes take a single initial radius")
        if arr[0] <= 0:
            _fail("sigma0", "initial radius must be positive")
        return arr
    if arr.size != n:
        _fail("sigma0", f"expected {n} entries, got {arr.size}")
    if np.any(np.diff(arr) <= 0):
        _fail("sigma0", "entries must be strictly ascending")
    if scheme != "dyson" and arr[0] <= 0:
        _fail("sigma0", "entries must be strictly positive")
    return arr


def config_from_dict(raw: dict) -> SimConfig:
    """Build and validate a SimConfig, naming the first failing field."""
    if not isinstance(raw, dict):
        raise ConfigInvalid("config: must be a JSON object")
    for key in raw:
        if key not in _KNOWN_KEYS:
            _fail(key, "unknown field")

    n = raw.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= 8:
        _fail("n", "must be an integer in [1, 8]")

    beta_raw = raw.get("beta")
    if beta_raw == "inf":
        beta = float("inf")
    elif isinstance(beta_raw, (int, float)) and not isinstance(beta_raw, bool) and beta_raw > 0:
        beta = float(beta_raw)
    else:
        _fail("beta", 'must be a positive number or "inf"')

    scheme = raw.get("scheme")
    if scheme not in SCHEMES:
        _fail("scheme", f"must be one of {', '.join(SCHEMES)}")

    sigma0 = _validate_sigma0(scheme, n, raw.get("sigma0"))

    t_final = raw.get("t_final")
    if not isinstance(t_final, (int, float)) or isinstance(t_final, bool) or t_final <= 0:
        _fail("t_final", "must be a positive number")
    dt = raw.get("dt")
    if not isinstance(dt, (int, float)) or isinstance(dt, bool) or dt <= 0 or dt > t_final:
        _fail("dt", "must be a positive number no larger than t_final")
    n_steps = round(t_final / dt)
    if n_steps < 1 or abs(n_steps * dt - t_final) > 1e-9 * t_final:
        _fail("dt", "t_final must be an integer multiple of dt")

    n_paths = raw.get("n_paths")
    if not isinstance(n_paths, int) or isinstance(n_paths, bool) or n_paths < 1:
        _fail("n_paths", "must be a positive integer")
    seed = raw.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**63:
        _fail("seed", "must be a nonnegative 63-bit integer")

    gap_floor = raw.get("gap_floor", 1e-6)
    if not isinstance(gap_floor, (int, float)) or isinstance(gap_floor, bool) or gap_floor <= 0:
        _fail("gap_floor", "must be a positive number")

    sample_arg = raw.get("sample_times")
    if sample_arg is None:
        indices = np.array(sorted({0, n_steps}), dtype=np.int64)
    elif isinstance(sample_arg, int) and not isinstance(sample_arg, bool):
        if sample_arg < 1:
            _fail("sample_times", "stride must be a positive integer")
        indices = np.unique(np.r_[np.arange(0, n_steps + 1, sample_arg), n_steps])
    elif isinstance(sample_arg, (list, tuple)):
        idx = []
        for t in sample_arg:
            if not isinstance(t, (int, float)) or isinstance(t, bool) or t < 0 or t > t_final:
                _fail("sample_times", f"time {t!r} outside [0, t_final]")
            j = round(float(t) / dt)
            if abs(j * dt - t) > 1e-9 * max(1.0, t_final):
                _fail("sample_times", f"time {t!r} not on the dt grid")
            idx.append(j)
        if not idx:
            _fail("sample_times", "list must be nonempty")
        indices = np.unique(np.asarray(idx, dtype=np.int64))
    else:
        _fail("sample_times", "must be a list of times or an integer stride")

    cutoff_raw = raw.get("cutoff")
    if cutoff_raw is None:
        cutoff = _DEFAULT_CUTOFF if (scheme == "particle" and beta < 2) else None
    elif cutoff_raw is False:
        cutoff = None
    elif isinstance(cutoff_raw, dict) and set(cutoff_raw) == {"k", "K"}:
        kk, bk = cutoff_raw["k"], cutoff_raw["K"]
        ok = all(isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 for v in (kk, bk))
        if not ok:
            _fail("cutoff", "k and K must be positive numbers")
        cutoff = (float(kk), float(bk))
    else:
        _fail("cutoff", 'must be null, false, or {"k": ..., "K": ...}')
    if cutoff is not None and scheme != "particle":
        _fail("cutoff", "only the particle scheme supports the entropy cutoff")

    q0_raw = raw.get("q0")
    q0 = None
    if q0_raw is not None:
        if scheme != "matrix":
            _fail("q0", "only the matrix scheme takes an initial unitary")
        try:
            q0 = matrix_from_json(q0_raw)
        except Exception:
            _fail("q0", "must be a nested list of (re, im) pairs")
        if q0.shape != (n, n):
            _fail("q0", f"must be {n} x {n}")
        if np.linalg.norm(q0.conj().T @ q0 - np.eye(n)) > 1e-10:
            _fail("q0", "must be unitary to 1e-10")

    return SimConfig(
        n=n,
        beta=beta,
        sigma0=sigma0,
        t_final=float(t_final),
        dt=float(dt),
        n_paths=n_paths,
        seed=seed,
        scheme=scheme,
        sample_times=tuple(float(j * dt) for j in indices),
        cutoff=cutoff,
        gap_floor=float(gap_floor),
        q0=q0,
        sample_indices=indices,
    )

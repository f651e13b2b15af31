"""Path ensembles, deterministic per-path noise streams, and the shared
integrator driver with reject-and-halve step control.

Every path owns a counter-based generator keyed by (master seed, scheme,
purpose, path index), so results are independent of chunking and thread
count, and different schemes run from the same master seed stay
decorrelated.  Retries during step halving draw from a separate purpose
stream so the primary per-step blocks stay aligned.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

_CHUNK = 512
_HALVING_UNITS = 1024  # step-halving floor is h / 2**10

SCHEME_IDS = {
    "matrix": 1,
    "particle": 2,
    "mean-curvature": 3,
    "dyson": 4,
    "sphere-point": 5,
    "sphere-radius": 6,
    "takagi-chart": 7,
}

# attempt() status codes
OK = 0
REJECT_CHAMBER = 1
REJECT_DOMAIN = 2
FREEZE = 3


def _reason(kernel, st: int) -> str:
    names = getattr(kernel, "reject_reasons", None) or {}
    default = "chamber-exit" if st == REJECT_CHAMBER else "domain-exit"
    return names.get(st, default)


def path_generator(seed: int, scheme: str, path_index: int, retry: bool = False):
    """Generator for one path's noise stream (Philox, explicitly keyed)."""
    tag = (int(retry) << 60) | (SCHEME_IDS[scheme] << 48) | path_index
    key = np.array([seed, tag], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class PathEnsemble:
    """Sampled trajectories of one simulation run.

    samples has shape (n_paths, n_times, dim) and holds NaN at times past a
    path's stopping time.  stopped_at is NaN for paths that never stopped.
    """

    meta: dict
    times: np.ndarray
    samples: np.ndarray
    stopped_at: np.ndarray
    stop_reason: list
    rejections: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.samples.shape[0]

    def alive_mask(self, time_index: int) -> np.ndarray:
        """Paths with a valid sample at the given time index."""
        return ~np.isnan(self.samples[:, time_index, 0])


def ensembles_equal(a: PathEnsemble, b: PathEnsemble) -> bool:
    return (
        a.meta == b.meta
        and np.array_equal(a.times, b.times)
        and np.array_equal(a.samples, b.samples, equal_nan=True)
        and np.array_equal(a.stopped_at, b.stopped_at, equal_nan=True)
        and a.stop_reason == b.stop_reason
        and np.array_equal(a.rejections, b.rejections)
    )


def _meta_to_json(meta: dict) -> dict:
    out = dict(meta)
    beta = out.get("beta")
    if beta is not None and np.isinf(beta):
        out["beta"] = "inf"
    return out


def _meta_from_json(obj: dict) -> dict:
    out = dict(obj)
    if out.get("beta") == "inf":
        out["beta"] = float("inf")
    return out


def write_jsonl(ens: PathEnsemble, path: str):
    """One header line with metadata, then one record per path per sample
    time in path-major order.  Records past a path's stopping time carry
    an empty sigma list and stopped = true; byte content is a pure
    function of the ensemble.
    """
    header = {
        "meta": _meta_to_json(ens.meta),
        "times": [float(t) for t in ens.times],
        "stopped_at": [None if np.isnan(t) else float(t) for t in ens.stopped_at],
        "stop_reason": list(ens.stop_reason),
        "rejections": [int(r) for r in ens.rejections],
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for p in range(ens.n_paths):
            stop_t = ens.stopped_at[p]
            for j, t in enumerate(ens.times):
                row = ens.samples[p, j]
                stopped = bool(not np.isnan(stop_t) and t >= stop_t)
                sigma = [] if np.any(np.isnan(row)) else [float(v) for v in row]
                rec = {"path": p, "t": float(t), "sigma": sigma, "stopped": stopped}
                fh.write(json.dumps(rec) + "\n")


def read_jsonl(path: str) -> PathEnsemble:
    with open(path) as fh:
        header = json.loads(fh.readline())
        meta = _meta_from_json(header["meta"])
        times = np.asarray(header["times"], dtype=float)
        stopped_at = np.asarray(
            [np.nan if t is None else t for t in header["stopped_at"]], dtype=float
        )
        reasons = list(header["stop_reason"])
        rejections = np.asarray(header["rejections"], dtype=np.int64)
        n_paths = len(reasons)
        dim = int(meta["dim"])
        samples = np.full((n_paths, times.size, dim), np.nan)
        t_index = {float(t): j for j, t in enumerate(times)}
        for line in fh:
            rec = json.loads(line)
            if rec["sigma"]:
                samples[rec["path"], t_index[rec["t"]]] = rec["sigma"]
    return PathEnsemble(
        meta=meta,
        times=times,
        samples=samples,
        stopped_at=stopped_at,
        stop_reason=reasons,
        rejections=rejections,
    )


def run_ensemble(cfg, kernel, threads: int = 1) -> PathEnsemble:
    """Integrate an ensemble of paths with per-interval reject-and-halve.

    Each global step attempts the full interval h.  A rejected path retries
    a refinement of the same draw over successively halved substeps; an
    accepted substep takes fresh draws and lets the substep size grow back,
    so the h / 2**10 floor is only reached through ten consecutive
    rejections.  A path at the floor is stopped at its current time.  A FREEZE
    status (cutoff reached zero) also stops the path; its state simply
    never moves again.
    """
    n_paths = cfg.n_paths
    steps = cfg.n_steps
    h = cfg.dt
    sample_idx = cfg.sample_indices
    times = sample_idx * h
    samples = np.full((n_paths, times.size, kernel.obs_dim), np.nan)
    stopped_at = np.full(n_paths, np.nan)
    reasons: list = [None] * n_paths
    rejections = np.zeros(n_paths, dtype=np.int64)
    sample_pos = {int(j): pos for pos, j in enumerate(sample_idx)}

    def do_chunk(lo: int, hi: int):
        c = hi - lo
        state = kernel.init(c)
        nd = kernel.noise_dim
        if nd > 0:
            noise = np.stack(
                [
                    path_generator(cfg.seed, cfg.scheme, p).standard_normal((steps, nd))
                    for p in range(lo, hi)
                ]
            )
        else:
            noise = np.zeros((c, steps, 0))
        alive = np.ones(c, dtype=bool)
        retry_gens: dict = {}

        def halve(i: int, j: int, xi):
            # a rejected substep is refined, not redrawn: the increment over
            # its first half is the conditional (bridge) draw
            # (xi + eta) / sqrt(2), so an adverse draw decays by 1/sqrt(2)
            # per level instead of being forgotten.  Accepted substeps take
            # fresh draws from the path's retry stream and the substep size
            # grows back, so only a run of ten straight rejections (a path
            # cornered at the boundary at every scale) reaches the floor.
            gen = retry_gens.get(i)
            if gen is None:
                gen = retry_gens[i] = path_generator(cfg.seed, cfg.scheme, lo + i, retry=True)
            units, du = _HALVING_UNITS, _HALVING_UNITS // 2
            idx = np.array([i])
            xi = (xi + gen.standard_normal(nd)) / np.sqrt(2.0)
            while True:
                if du == 0:
                    stopped_at[lo + i] = (j + (_HALVING_UNITS - units) / _HALVING_UNITS) * h
                    reasons[lo + i] = last_reason[0]
                    alive[i] = False
                    return
                st = int(kernel.attempt(state, idx, h * du / _HALVING_UNITS, xi[None, :])[0])
                if st == OK:
                    units -= du
                    if units == 0:
                        return
                    xi = gen.standard_normal(nd)
                    du = min(2 * du, _HALVING_UNITS // 2, units)
                elif st == FREEZE:
                    stopped_at[lo + i] = (j + (_HALVING_UNITS - units) / _HALVING_UNITS) * h
                    reasons[lo + i] = "cutoff-floor"
                    alive[i] = False
                    return
                else:
                    rejections[lo + i] += 1
                    last_reason[0] = _reason(kernel, st)
                    xi = (xi + gen.standard_normal(nd)) / np.sqrt(2.0)
                    du //= 2

        if 0 in sample_pos:
            samples[lo:hi, sample_pos[0]] = kernel.observe(state)
        for j in range(steps):
            act = np.nonzero(alive)[0]
            if act.size:
                status = kernel.attempt(state, act, h, noise[act, j])
                frozen = act[status == FREEZE]
                for i in frozen:
                    stopped_at[lo + i] = j * h
                    reasons[lo + i] = "cutoff-floor"
                    alive[i] = False
                failed_mask = (status == REJECT_CHAMBER) | (status == REJECT_DOMAIN)
                for i, st in zip(act[failed_mask], status[failed_mask]):
                    rejections[lo + i] += 1
                    last_reason = [_reason(kernel, int(st))]
                    halve(int(i), j, noise[i, j])
            if (j + 1) in sample_pos:
                live = np.nonzero(alive)[0]
                if live.size:
                    samples[lo + live, sample_pos[j + 1]] = kernel.observe(state)[live]

    chunks = [(lo, min(lo + _CHUNK, n_paths)) for lo in range(0, n_paths, _CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda c: do_chunk(*c), chunks))
    else:
        for lo, hi in chunks:
            do_chunk(lo, hi)

    meta = cfg.to_meta()
    meta["dim"] = kernel.obs_dim
    return PathEnsemble(
        meta=meta,
        times=times,
        samples=samples,
        stopped_at=stopped_at,
        stop_reason=reasons,
        rejections=rejections,
    )

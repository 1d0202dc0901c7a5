"""Experiment orchestration: Monte Carlo runs, exact verification, coupling
measurements, landscape marginals, and record analysis.

Replicas are independent work items; each one derives its environment seed
from the master seed by index splitting, so the finalized output depends
only on (config, master seed) and never on worker count or arrival order.
"""

from __future__ import annotations

import math
import multiprocessing
import os
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import records as rec
from .environment import (EnvironmentSpec, WeightOracle, env_stats,
                          parse_env_spec, split_seed, validate_spec)
from .lattice import (brute_force, log_path_count, path_functionals,
                      sandwich_check, sweep, sweep_targets)
from .scaling import (floor_map, grid_point, landscape_rescale, normalize,
                      stat_theorem1_i, stat_theorem1_ii, stat_theorem1_iii)
from .stats import Ecdf, bootstrap_ci, ks_two_sample, moments
from .gue import ReferenceEcdf

BUILD = "kpzlab-0.1.0"

# Fixed replica-batch size; must not depend on worker count (determinism).
CHUNK = 32

DEFAULT_FAMILY_BATTERY = (
    "beta:1,1",
    "dirichlet:1,1,1,1",
    "twopoint:0.4,0.3,0.2,0.1|0.1,0.2,0.3,0.4|0.5",
    "logpareto:3,1",
)


class VerificationFailure(RuntimeError):
    """An exact inequality or write-time consistency check was violated."""


@dataclass(frozen=True)
class ExperimentConfig:
    env: str
    n_list: tuple
    a: float = 0.3
    replicas: int = 1
    seed: int = 0
    mode: str = "axis"          # axis | fixed_k | landscape
    k: int = 1                  # fixed_k mode only
    pairs: tuple = ()           # landscape mode: ((x1,x2,y1,y2), ...)
    functionals: tuple = ("S", "G")
    workers: int = 1
    out: str = ""
    couple_t: float = 1.0
    couple_origins: int = 32

    def spec(self) -> EnvironmentSpec:
        return parse_env_spec(self.env)

    def hash_payload(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        d.pop("out")
        return d

    def digest(self) -> str:
        return rec.config_hash(self.hash_payload())

    def header(self) -> dict:
        return {"build": BUILD, "config": self.hash_payload(),
                "config_hash": self.digest()}


def default_workers() -> int:
    env = os.environ.get("KPZLAB_WORKERS")
    if env:
        return max(1, int(env))
    return 1


# ---------------------------------------------------------------------------
# Replica computation
# ---------------------------------------------------------------------------

def _replica_seeds(master: int, lo: int, hi: int) -> np.ndarray:
    return np.array([split_seed(master, i) for i in range(lo, hi)],
                    dtype=np.uint64)


def _axis_chunk(config: ExperimentConfig, n: int, lo: int, hi: int) -> list:
    """Records for replica indices [lo, hi) at one lattice size."""
    spec = config.spec()
    stats = env_stats(spec)
    oracle = WeightOracle(spec, config.seed)
    seeds = _replica_seeds(config.seed, lo, hi)
    if config.mode == "fixed_k":
        # The k x k GUE law matches the target spanning k vertex rows,
        # i.e. transverse displacement k - 1 (n + k vertices in total).
        if config.k < 1:
            raise ValueError("k must be >= 1")
        k = config.k - 1
    else:
        k = int(math.floor(n ** config.a))
    want = tuple(sorted(set(config.functionals) | {"S", "G"}))
    out = sweep_targets(oracle, (0, 0), n, k, [(n, k)], want=want, seeds=seeds)
    S = out["S"][:, 0]
    G = out["G"][:, 0]
    L = out["L"][:, 0] if "L" in out else None
    logc = log_path_count(n, k)
    recs = []
    for b, idx in enumerate(range(lo, hi)):
        s, g = float(S[b]), float(G[b])
        if not (g - 1e-9 <= s <= g + logc + 1e-9):
            raise VerificationFailure(
                f"sandwich violated at write time: n={n} index={idx}")
        r = {"index": idx, "seed": int(seeds[b]), "n": n, "a": config.a,
             "target": [n, k], "S": s, "G": g,
             "s_hat": float(normalize(s, n + k, stats))}
        if L is not None:
            r["L"] = float(L[b])
        if config.mode == "fixed_k":
            r["k"] = config.k
            r["t1ii"] = float(stat_theorem1_ii(s, n, config.k, stats))
        else:
            t1i = float(stat_theorem1_i(s, n, config.a, stats))
            t1iii = float(stat_theorem1_iii(s, n, config.a, stats))
            ident = t1i * stats.sigma * n ** (-config.a / 6.0)
            if abs(t1iii - ident) > 1e-9 * (1.0 + abs(t1iii)):
                raise VerificationFailure("statistic identity violated")
            r["t1i"] = t1i
            r["t1iii"] = t1iii
        recs.append(r)
    return recs


def _landscape_chunk(config: ExperimentConfig, n: int, lo: int, hi: int) -> list:
    spec = config.spec()
    stats = env_stats(spec)
    oracle = WeightOracle(spec, config.seed)
    seeds = _replica_seeds(config.seed, lo, hi)
    recs = [[] for _ in range(hi - lo)]
    for pair_index, (x1, x2, y1, y2) in enumerate(config.pairs):
        x, y = (x1, x2), (y1, y2)
        gx = grid_point(x, n, config.a)
        gy = grid_point(y, n, config.a)
        sx = (int(math.floor(gx[0])), gx[1])
        sy = (int(math.floor(gy[0])), gy[1])
        if min(*sx, *sy) < 0:
            raise ValueError(f"pair {x}->{y} maps outside the nonnegative "
                             f"quadrant at n={n}")
        dx, dy = sy[0] - sx[0], sy[1] - sx[1]
        out = sweep_targets(oracle, sx, dx, dy, [(dx, dy)],
                            want=("S", "G"), seeds=seeds)
        S, G = out["S"][:, 0], out["G"][:, 0]
        logc = log_path_count(dx, dy)
        steps = dx + dy
        for b, idx in enumerate(range(lo, hi)):
            s, g = float(S[b]), float(G[b])
            if not (g - 1e-9 <= s <= g + logc + 1e-9):
                raise VerificationFailure(
                    f"sandwich violated at write time: n={n} index={idx}")
            s_hat = float(normalize(s, steps, stats))
            recs[b].append({
                "index": idx, "seed": int(seeds[b]), "n": n, "a": config.a,
                "pair_index": pair_index, "pair": [x1, x2, y1, y2],
                "target": [sy[0], sy[1]], "origin": [sx[0], sx[1]],
                "S": s, "G": g, "s_hat": s_hat,
                "sna": float(landscape_rescale(x, y, s_hat, n, config.a))})
    return [r for group in recs for r in group]


def _run_task(args):
    config, n, lo, hi = args
    if config.mode == "landscape":
        return n, lo, hi, _landscape_chunk(config, n, lo, hi)
    return n, lo, hi, _axis_chunk(config, n, lo, hi)


# ---------------------------------------------------------------------------
# Simulation driver (simulate / landscape share it)
# ---------------------------------------------------------------------------

def run_simulate(config: ExperimentConfig, resume: bool = False,
                 progress=None) -> dict:
    """Run all replicas, persist records, finalize; returns a summary."""
    if not config.out:
        raise ValueError("config.out must be set")
    if config.replicas < 1:
        raise ValueError("need at least one replica")
    digest = config.digest()
    t0 = time.time()

    if resume and os.path.exists(rec.manifest_path(config.out)):
        manifest = rec.RunManifest.load(config.out)
        if manifest.config_hash != digest:
            raise ValueError("resume: manifest belongs to a different config")
        done_records = rec.load_partial(config.out, manifest)
        rec.rewrite_partial(config.out, done_records)
    else:
        manifest = rec.RunManifest(digest, BUILD,
                                   len(config.n_list) * config.replicas)
        if os.path.exists(rec.partial_path(config.out)):
            os.remove(rec.partial_path(config.out))
        done_records = []
    manifest.save(config.out)

    tasks = []
    for n in config.n_list:
        for lo in range(0, config.replicas, CHUNK):
            hi = min(lo + CHUNK, config.replicas)
            if not manifest.is_done(n, lo, hi):
                tasks.append((config, n, lo, hi))

    all_records = list(done_records)

    def handle(result):
        n, lo, hi, recs = result
        rec.append_partial(config.out, recs)
        manifest.mark(n, lo, hi)
        manifest.save(config.out)
        all_records.extend(recs)
        if progress:
            progress(manifest.count_completed(), manifest.total)

    if config.workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(config.workers) as pool:
            for result in pool.imap_unordered(_run_task, tasks):
                handle(result)
    else:
        for task in tasks:
            handle(_run_task(task))

    manifest.finalized = True
    manifest.save(config.out)
    rec.finalize(config.out, config.header(), all_records)
    return {"records": len(all_records), "out": config.out,
            "elapsed_s": time.time() - t0}


# ---------------------------------------------------------------------------
# Exact verification
# ---------------------------------------------------------------------------

def run_verify(env: str | None = None, seed: int = 0,
               envs_per_family: int = 100, max_steps: int = 12,
               sandwich_instances: int = 10_000, sandwich_dx: int = 500,
               sandwich_dy: int = 50, rtol: float = 1e-10,
               slack: float = 1e-9, records_path: str | None = None) -> dict:
    """Exact-inequality verification battery.

    Checks DP-vs-brute-force equivalence, the binomial sandwich,
    superadditivity, and coupling domination; optionally recheck the
    sandwich on a stored record file.  Returns a report with per-check
    counts; any violation marks the report failed.
    """
    env_list = [env] if env else list(DEFAULT_FAMILY_BATTERY)
    rng = np.random.default_rng(seed)
    report = {"checks": {}, "failed": False}

    def check(name, checked, violations):
        report["checks"][name] = {"checked": checked, "violations": violations}
        if violations:
            report["failed"] = True

    # --- DP vs brute force over all small displacements -------------------
    checked = bad = 0
    disps = [(dx, dy) for dx in range(max_steps + 1)
             for dy in range(max_steps + 1) if 1 <= dx + dy <= max_steps]
    for env_text in env_list:
        spec = parse_env_spec(env_text)
        for _ in range(envs_per_family):
            oracle = WeightOracle(spec, int(rng.integers(0, 2**63)))
            res = sweep(oracle, (0, 0), max_steps, max_steps)
            for dx, dy in disps:
                bf = brute_force(oracle, (0, 0), (dx, dy))
                for got, want in ((res.S[dy, dx], bf.S), (res.G[dy, dx], bf.G),
                                  (res.L[dy, dx], bf.L)):
                    checked += 1
                    if abs(got - want) > rtol * max(1.0, abs(want)):
                        bad += 1
    check("dp_vs_brute_force", checked, bad)

    # --- Sandwich on larger random instances ------------------------------
    checked = bad = 0
    per_env = 100
    n_envs = max(1, sandwich_instances // per_env)
    for i in range(n_envs):
        env_text = env_list[i % len(env_list)]
        oracle = WeightOracle(parse_env_spec(env_text),
                              int(rng.integers(0, 2**63)))
        res = sweep(oracle, (0, 0), sandwich_dx, sandwich_dy, want=("S", "G"))
        dxs = rng.integers(0, sandwich_dx + 1, size=per_env)
        dys = rng.integers(0, sandwich_dy + 1, size=per_env)
        for dx, dy in zip(dxs, dys):
            s, g = res.S[dy, dx], res.G[dy, dx]
            checked += 1
            if not (g - slack <= s <= g + log_path_count(int(dx), int(dy)) + slack):
                bad += 1
    check("sandwich", checked, bad)

    # --- Superadditivity (Chapman-Kolmogorov) -----------------------------
    checked = bad = 0
    for env_text in env_list:
        spec = parse_env_spec(env_text)
        for _ in range(20):
            oracle = WeightOracle(spec, int(rng.integers(0, 2**63)))
            x = (0, 0)
            my = tuple(int(v) for v in rng.integers(0, 9, size=2))
            z = (my[0] + int(rng.integers(0, 9)), my[1] + int(rng.integers(0, 9)))
            f_xz = path_functionals(oracle, x, z)
            f_xy = path_functionals(oracle, x, my)
            f_yz = path_functionals(oracle, my, z)
            tau_y = float(oracle.log_w12(my[0], my[1])[0])
            conds = (
                f_xz.S >= f_xy.S + f_yz.S - slack,
                f_xz.G >= f_xy.G + f_yz.G - slack,
                f_xz.L >= f_xy.L + f_yz.L - tau_y - slack,
            )
            for ok in conds:
                checked += 1
                if not ok:
                    bad += 1
    check("superadditivity", checked, bad)

    # --- Coupling domination on small random instances --------------------
    from .lattice import coupling_bound
    checked = bad = 0
    for env_text in env_list:
        spec = parse_env_spec(env_text)
        for _ in range(50):
            oracle = WeightOracle(spec, int(rng.integers(0, 2**63)))
            dx = int(rng.integers(0, 30))
            dy = int(rng.integers(0, 10))
            f = path_functionals(oracle, (0, 0), (dx, dy))
            bound = coupling_bound(oracle, (dx, dy), dx)
            checked += 1
            if abs(f.G - f.L) > bound + slack:
                bad += 1
    check("coupling_domination", checked, bad)

    # --- Optional: recheck stored records ---------------------------------
    if records_path:
        checked = bad = 0
        _, stored = rec.read_records(records_path)
        for r in stored:
            if "S" not in r or "G" not in r:
                continue
            tx, ty = r["target"]
            ox, oy = r.get("origin", [0, 0])
            logc = log_path_count(tx - ox, ty - oy)
            checked += 1
            if not (r["G"] - slack <= r["S"] <= r["G"] + logc + slack):
                bad += 1
        check("stored_records_sandwich", checked, bad)

    return report


# ---------------------------------------------------------------------------
# Coupling measurements (Lambda_t region)
# ---------------------------------------------------------------------------

def run_couple(config: ExperimentConfig) -> dict:
    """Sampled-origin measurement of max |S - L| over the coupling region.

    For each n: region [0, t*n] x [0, t*k] with k = floor(n^a); origins are
    the corner plus `couple_origins` uniform draws.  Every visited pair is
    also checked against the exact |G - L| domination bound.
    """
    spec = config.spec()
    stats = env_stats(spec)
    p = stats.moment_order
    t = config.couple_t
    summary = {"env": config.env, "a": config.a, "t": t, "p": p, "per_n": [],
               "violations": 0}
    for n in config.n_list:
        k = int(math.floor(n ** config.a))
        w = int(math.floor(t * n))
        h = int(math.floor(t * k))
        rng = np.random.default_rng(split_seed(config.seed, n))
        origins = [(0, 0)] + [
            (int(rng.integers(0, w + 1)), int(rng.integers(0, h + 1)))
            for _ in range(config.couple_origins)]
        maxima = []
        violations = 0
        for ridx in range(config.replicas):
            oracle = WeightOracle(spec, int(split_seed(config.seed, ridx)))
            # Row maxima over the full region, plus |tau| for endpoint terms.
            x1 = np.arange(0, w + 1, dtype=np.int64)
            x2 = np.arange(0, h + 1, dtype=np.int64)
            lw1_grid, lw2_grid = oracle.log_w12(x1[None, :], x2[:, None])
            abs_tau = np.abs(lw1_grid)
            m_rows = (abs_tau + np.abs(lw2_grid)).max(axis=1)  # (h+1,)
            m_cum = np.concatenate([[0.0], np.cumsum(m_rows)])
            rep_max = 0.0
            for ox, oy in origins:
                res = sweep(oracle, (ox, oy), w - ox, h - oy)
                d_sl = np.abs(res.S - res.L)
                rep_max = max(rep_max, float(d_sl.max()))
                # bound[j, i] = sum of M over rows oy..oy+j + max |tau| on
                # the target column between the origin row and row oy+j.
                col_max = np.maximum.accumulate(abs_tau[oy:, ox:], axis=0)
                bound = (m_cum[oy + 1:] - m_cum[oy])[:, None] + col_max
                violations += int(np.sum(np.abs(res.G - res.L) > bound + 1e-9))
            maxima.append(rep_max)
        inv_p = 1.0 / p if math.isfinite(p) else 0.0
        norm = t * t * k * (n + k) ** inv_p
        summary["per_n"].append({
            "n": n, "k": k, "mean_max": float(np.mean(maxima)),
            "max_max": float(np.max(maxima)),
            "normalizer": norm,
            "ratio": float(np.mean(maxima)) / norm})
        summary["violations"] += violations
    summary["failed"] = summary["violations"] > 0
    return summary


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------

_STATISTICS = ("t1i", "t1ii", "t1iii", "landscape")


def run_analyze(records_path: str, reference_path: str | None,
                statistic: str, threshold: float | None = None,
                bootstrap: int = 400, csv_out: str | None = None,
                seed: int = 0) -> dict:
    """KS / moment analysis of one statistic across lattice sizes.

    Returns a machine-readable summary; optionally writes a quantile CSV
    (statistic quantiles vs reference quantiles per n) for plotting.
    """
    if statistic not in _STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}")
    header, stored = rec.read_records(records_path)
    if not stored:
        raise ValueError("record file holds no records")
    cfg = header.get("config", {})
    key = "sna" if statistic == "landscape" else statistic
    if key not in stored[0]:
        raise ValueError(
            f"records were not generated for statistic {statistic!r} "
            f"(mode {cfg.get('mode')!r})")

    reference = None
    if reference_path:
        reference = ReferenceEcdf.load(reference_path)

    by_n = {}
    for r in stored:
        by_n.setdefault(r["n"], []).append(r[key])

    rng = np.random.default_rng(seed)
    summary = {"statistic": statistic, "config_hash": header.get("config_hash"),
               "reference": reference.kind if reference else None,
               "per_n": [], "passed": None}
    csv_rows = []
    qs = np.linspace(0.01, 0.99, 99)
    for n in sorted(by_n):
        vals = np.asarray(by_n[n], dtype=float)
        mom = moments(vals)
        ci = bootstrap_ci(vals, np.mean, bootstrap, 0.95, rng)
        entry = {"n": n, "count": int(vals.size), "mean": mom.mean,
                 "variance": mom.variance, "skewness": mom.skewness,
                 "excess_kurtosis": mom.excess_kurtosis,
                 "mean_ci95": list(ci),
                 "median_abs": float(np.median(np.abs(vals)))}
        if reference is not None:
            ks = ks_two_sample(Ecdf(vals), Ecdf(reference.samples))
            entry["ks"] = ks.statistic
            entry["ks_location"] = ks.location
            ref_q = np.quantile(reference.samples, qs)
        else:
            ref_q = np.full(qs.size, math.nan)
        val_q = np.quantile(vals, qs)
        for q, vq, rq in zip(qs, val_q, ref_q):
            csv_rows.append((n, q, vq, rq))
        summary["per_n"].append(entry)

    if threshold is not None and reference is not None:
        last = summary["per_n"][-1]
        summary["threshold"] = threshold
        summary["passed"] = bool(last["ks"] <= threshold)

    if csv_out:
        with open(csv_out, "w") as fh:
            fh.write("n,quantile,statistic,reference\n")
            for n, q, vq, rq in csv_rows:
                fh.write(f"{n},{q:.2f},{vq!r},{rq!r}\n")
    return summary

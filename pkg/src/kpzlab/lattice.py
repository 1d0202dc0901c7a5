"""Exact dynamic programming on the directed lattice.

For a site pair x <= y (componentwise) the module computes the triple

  S -- log P_{x,omega}(X_{|x-y|_1} = y), the quenched path log-probability;
       exact because a walk reaching y in |x-y|_1 steps only takes up-right
       steps, so S = log sum over up-right paths of the product of weights,
  G -- max over up-right paths of the sum of edge log-weights (the most
       likely single path; the passage value of the environment LPP is -G),
  L -- max over up-right paths of the sum of vertex weights
       tau_z = log omega(z, e1), endpoints included (standard vertex LPP).

All three satisfy first-order row recurrences, so a sweep walks the rectangle
row by row with O(width) working memory per functional, vectorized both along
the row and across a batch of replica seeds.  Everything here is pure given
the weight oracle; results are independent of batching and call order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .environment import WeightOracle

# Enumeration cap for the brute-force oracle.
BRUTE_FORCE_MAX_STEPS = 22

# Default cell cap for full-grid sweeps (raise via argument for big runs).
DEFAULT_MAX_CELLS = 200_000_000


class PathFunctionals(NamedTuple):
    S: float
    G: float
    L: float


@dataclass
class SweepResult:
    """Grids of functional values from `origin` over a rectangle.

    Arrays are indexed [j, i] = (row, column) = value at
    (origin[0] + i, origin[1] + j); entries are None when not requested.
    """

    origin: tuple
    width: int
    height: int
    S: np.ndarray | None = None
    G: np.ndarray | None = None
    L: np.ndarray | None = None
    row_max: np.ndarray | None = None


def path_count(dx: int, dy: int) -> int:
    """Number of up-right paths across displacement (dx, dy), exactly."""
    if dx < 0 or dy < 0:
        raise ValueError("displacement components must be nonnegative")
    return math.comb(dx + dy, dy)


def log_path_count(dx: int, dy: int) -> float:
    """log C(dx+dy, dy) via lgamma, usable far beyond exact-integer range."""
    if dx < 0 or dy < 0:
        raise ValueError("displacement components must be nonnegative")
    n, k = dx + dy, dy
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _check_pair(x, y):
    dx, dy = y[0] - x[0], y[1] - x[1]
    if dx < 0 or dy < 0:
        raise ValueError(f"target {y} not up-right of origin {x}")
    return dx, dy


# ---------------------------------------------------------------------------
# Row-sweep engine
# ---------------------------------------------------------------------------

def _dp_rows(oracle: WeightOracle, origin, width, height, want,
             seeds=None, collect=None, keep_grids=False, track_row_max=False):
    """Shared row-by-row DP engine.

    seeds      -- None (use the oracle's master seed) or an int array (B,);
                  with seeds, all arrays gain a leading batch axis.
    collect    -- optional list of (i, j) targets; returns dict name -> array
                  of collected values, shape (B, len(collect)) or (len,).
    keep_grids -- keep full (H+1, W+1) grids (single-seed use only).

    Row recurrences (i along the row, j the row index, la = prefix sums of
    log w_E1, ct = inclusive prefix sums of tau = log w_E1):

      S[i,j] = la[i] + logaddexp-accum_m<=i ( S[m,j-1] + log w_E2[m,j-1] - la[m] )
      G[i,j] = la[i] + max-accum_m<=i       ( G[m,j-1] + log w_E2[m,j-1] - la[m] )
      L[i,j] = ct[i] + max-accum_m<=i       ( L[m,j-1] - ct[m] + tau[m,j] )

    with row 0 given by S = G = la and L = ct.
    """
    ox, oy = origin
    batched = seeds is not None
    seed_col = np.asarray(seeds).reshape(-1, 1) if batched else None
    x1 = np.arange(ox, ox + width + 1, dtype=np.int64)

    want = set(want)
    need_S, need_G, need_L = "S" in want, "G" in want, "L" in want

    grids = {k: [] for k in want} if keep_grids else None
    collected = {k: [] for k in want} if collect is not None else None
    by_row = {}
    if collect is not None:
        for idx, (i, j) in enumerate(collect):
            if not (0 <= i <= width and 0 <= j <= height):
                raise ValueError(f"collect target {(i, j)} outside rectangle")
            by_row.setdefault(j, []).append((idx, i))
    row_max = [] if track_row_max else None

    S = G = L = None
    lw2_prev = None
    for j in range(height + 1):
        if batched:
            lw1, lw2 = oracle.log_w12(x1[None, :], oy + j, seed=seed_col)
        else:
            lw1, lw2 = oracle.log_w12(x1, oy + j)
        # la[i] = sum of log w_E1 over columns 0..i-1 of this row.
        la = np.zeros_like(lw1)
        np.cumsum(lw1[..., :-1], axis=-1, out=la[..., 1:])
        if j == 0:
            if need_S:
                S = la.copy()
            if need_G:
                G = la.copy()
            if need_L:
                L = np.cumsum(lw1, axis=-1)
        else:
            if need_S:
                t = S + lw2_prev - la
                S = la + np.logaddexp.accumulate(t, axis=-1)
            if need_G:
                t = G + lw2_prev - la
                G = la + np.maximum.accumulate(t, axis=-1)
            if need_L:
                ct = np.cumsum(lw1, axis=-1)
                t = L - ct + lw1
                L = ct + np.maximum.accumulate(t, axis=-1)
        lw2_prev = lw2
        if track_row_max:
            row_max.append(np.max(np.abs(lw1) + np.abs(lw2), axis=-1))
        vals = {"S": S, "G": G, "L": L}
        if keep_grids:
            for k in want:
                grids[k].append(vals[k].copy())
        if collect is not None and j in by_row:
            for idx, i in by_row[j]:
                for k in want:
                    collected[k].append((idx, vals[k][..., i]))

    out = {}
    if keep_grids:
        for k in want:
            out[k] = np.stack(grids[k], axis=0)
    if collect is not None:
        for k in want:
            vals = sorted(collected[k], key=lambda p: p[0])
            out[k] = np.stack([v for _, v in vals], axis=-1)
    if track_row_max:
        out["row_max"] = np.stack(row_max, axis=-1)
    return out


def sweep(oracle: WeightOracle, origin, width: int, height: int,
          want=("S", "G", "L"), track_row_max: bool = False,
          max_cells: int = DEFAULT_MAX_CELLS) -> SweepResult:
    """Full-grid DP from `origin` over a (width+1) x (height+1) rectangle."""
    if width < 0 or height < 0:
        raise ValueError("width and height must be nonnegative")
    cells = (width + 1) * (height + 1)
    if cells > max_cells:
        raise MemoryError(f"sweep of {cells} cells exceeds cap {max_cells}")
    out = _dp_rows(oracle, origin, width, height, want,
                   keep_grids=True, track_row_max=track_row_max)
    return SweepResult(tuple(origin), width, height,
                       S=out.get("S"), G=out.get("G"), L=out.get("L"),
                       row_max=out.get("row_max"))


def sweep_targets(oracle: WeightOracle, origin, width: int, height: int,
                  targets, want=("S", "G", "L"), seeds=None) -> dict:
    """Values at selected rectangle offsets only; O(width) memory per row.

    With `seeds` (array of replica seeds) the returned arrays have shape
    (len(seeds), len(targets)); per-replica values are bit-identical to a
    single-seed sweep with that seed.
    """
    return _dp_rows(oracle, origin, width, height, want,
                    seeds=seeds, collect=list(targets))


def compute_S(oracle: WeightOracle, x, y) -> float:
    """Quenched log-probability log P_{x,omega}(X_{|x-y|_1} = y)."""
    dx, dy = _check_pair(x, y)
    out = sweep_targets(oracle, x, dx, dy, [(dx, dy)], want=("S",))
    return float(out["S"][0])


def compute_G(oracle: WeightOracle, x, y) -> float:
    """Best single-path log-likelihood; the passage value is T = -G."""
    dx, dy = _check_pair(x, y)
    out = sweep_targets(oracle, x, dx, dy, [(dx, dy)], want=("G",))
    return float(out["G"][0])


def compute_L(oracle: WeightOracle, x, y) -> float:
    """Vertex LPP value with weights tau_z = log omega(z, e1)."""
    dx, dy = _check_pair(x, y)
    out = sweep_targets(oracle, x, dx, dy, [(dx, dy)], want=("L",))
    return float(out["L"][0])


def path_functionals(oracle: WeightOracle, x, y) -> PathFunctionals:
    dx, dy = _check_pair(x, y)
    out = sweep_targets(oracle, x, dx, dy, [(dx, dy)])
    return PathFunctionals(float(out["S"][0]), float(out["G"][0]),
                           float(out["L"][0]))


# ---------------------------------------------------------------------------
# Brute-force oracle and geodesics
# ---------------------------------------------------------------------------

def _weight_grids(oracle, x, dx, dy):
    x1 = np.arange(x[0], x[0] + dx + 1, dtype=np.int64)
    x2 = np.arange(x[1], x[1] + dy + 1, dtype=np.int64)
    return oracle.log_w12(x1[None, :], x2[:, None])  # (lw1, lw2), [j, i]


def brute_force(oracle: WeightOracle, x, y) -> PathFunctionals:
    """Exact enumeration over all C(dx+dy, dy) up-right paths.

    The independent test oracle for the DP; capped at 22 steps.
    """
    from itertools import combinations

    dx, dy = _check_pair(x, y)
    steps = dx + dy
    if steps > BRUTE_FORCE_MAX_STEPS:
        raise ValueError(f"{steps} steps exceeds enumeration cap "
                         f"{BRUTE_FORCE_MAX_STEPS}")
    lw1, lw2 = _weight_grids(oracle, x, dx, dy)
    path_logps = []
    path_taus = []
    for ups in combinations(range(steps), dy):
        i = j = 0
        logp = 0.0
        tau = lw1[0, 0]
        up_set = set(ups)
        for s in range(steps):
            if s in up_set:
                logp += lw2[j, i]
                j += 1
            else:
                logp += lw1[j, i]
                i += 1
            tau += lw1[j, i]
        path_logps.append(logp)
        path_taus.append(tau)
    logps = np.array(path_logps)
    m = logps.max()
    s_val = m + math.log(np.exp(logps - m).sum())
    return PathFunctionals(float(s_val), float(m), float(max(path_taus)))


def geodesic(oracle: WeightOracle, x, y, which: str = "G") -> list:
    """An optimal path for G or L, deterministic under ties.

    Backtracking takes the e1 predecessor only when strictly better (up to
    accumulated rounding), which pushes e1 steps as early as possible: a
    tied environment yields the all-right-then-up path.
    """
    if which not in ("G", "L"):
        raise ValueError("which must be 'G' or 'L'")
    dx, dy = _check_pair(x, y)
    res = sweep(oracle, x, dx, dy, want=(which,))
    grid = res.G if which == "G" else res.L
    lw1, lw2 = _weight_grids(oracle, x, dx, dy)

    def strictly_greater(a, b):
        # Equal DP values may differ in the last bits depending on the
        # summation order; treat those as ties.
        return a > b + 1e-12 * (1.0 + max(abs(a), abs(b)))

    path = [(x[0] + dx, x[1] + dy)]
    i, j = dx, dy
    while i > 0 or j > 0:
        if j == 0:
            take_e1 = True
        elif i == 0:
            take_e1 = False
        elif which == "G":
            take_e1 = strictly_greater(grid[j, i - 1] + lw1[j, i - 1],
                                       grid[j - 1, i] + lw2[j - 1, i])
        else:
            take_e1 = strictly_greater(grid[j, i - 1], grid[j - 1, i])
        if take_e1:
            i -= 1
        else:
            j -= 1
        path.append((x[0] + i, x[1] + j))
    path.reverse()
    return path


# ---------------------------------------------------------------------------
# Inequalities
# ---------------------------------------------------------------------------

def sandwich_check(f: PathFunctionals, dx: int, dy: int,
                   slack: float = 1e-9) -> bool:
    """G - slack <= S <= G + log C(dx+dy, dy) + slack (binomial sandwich)."""
    upper = f.G + log_path_count(dx, dy)
    return (f.G - slack <= f.S) and (f.S <= upper + slack)


def row_maxima(oracle: WeightOracle, n: int, j: int, seed=None) -> float:
    """M_j = max over 0 <= x1 <= n of (|log w_E1| + |log w_E2|) at row j."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    x1 = np.arange(0, n + 1, dtype=np.int64)
    return float(np.max(oracle.abs_tau_w2(x1, j, seed=seed)))


def coupling_bound(oracle: WeightOracle, d, n: int, origin=(0, 0)) -> float:
    """Deterministic bound dominating |G - L| over displacement d from origin.

    Sum of row maxima M_j over the dy+1 rows the pair spans (columns 0..n)
    plus the largest |tau| on the target column: vertex path sums carry one
    more term than edge sums, so the endpoint needs its own allowance.
    """
    dx, dy = d
    ox, oy = origin
    total = sum(row_maxima(oracle, n, oy + j) for j in range(dy + 1))
    x2 = np.arange(oy, oy + dy + 1, dtype=np.int64)
    lw1, _ = oracle.log_w12(ox + dx, x2)
    return total + float(np.max(np.abs(lw1)))

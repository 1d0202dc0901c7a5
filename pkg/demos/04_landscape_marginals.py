"""Directed-landscape rescaling: one-point marginals and the parabolic shift.

Plane points map to lattice scale via (z)_n = (z2*n + 2*z1*n^(1-a/3),
floor(z2*n^a)).  The rescaled, normalized log-probability between two plane
points behaves like a landscape value: marginals for different horizontal
displacements differ by the parabolic shift (y1-x1)^2, so shifting one
sample by +1 should (approximately) superpose the two empirical laws.
"""

import numpy as np

from kpzlab import (Ecdf, ExperimentConfig, grid_point, ks_two_sample,
                    landscape_rescale, run_simulate)
from kpzlab import records as rec

N = 20_000
A = 0.25

print(f"grid mapping at n={N}, a={A}:")
for z in ((0.0, 0.0), (0.0, 1.0), (1.0, 1.0)):
    print(f"  {z} -> {grid_point(z, N, A)}")

slope = N ** ((A - 3) / 6)
print(f"\nrescaling slope n^((a-3)/6) = {slope:.3e}; "
      f"parabolic terms: 2*n^(2a/3) = {2 * N ** (2 * A / 3):.2f}, "
      f"n^(a/3) = {N ** (A / 3):.2f}")
print(f"sanity: rescale of s_hat=0 for (0,0)->(1,1): "
      f"{landscape_rescale((0, 0), (1, 1), 0.0, N, A):.3f}")

out = "/tmp/kpzlab_demo_landscape.jsonl"
config = ExperimentConfig(env="beta:1,1", n_list=(N,), a=A, replicas=300,
                          seed=8, mode="landscape",
                          pairs=((0, 0, 0, 1), (0, 0, 1, 1)), out=out)
summary = run_simulate(config)
print(f"\n{summary['records']} records in {summary['elapsed_s']:.1f}s")

_, rows = rec.read_records(out)
sna = {0: [], 1: []}
for r in rows:
    sna[r["pair_index"]].append(r["sna"])
a0, a1 = np.asarray(sna[0]), np.asarray(sna[1])
print(f"pair (0,0)->(0,1): mean {a0.mean():+.3f}")
print(f"pair (0,0)->(1,1): mean {a1.mean():+.3f} "
      f"(expected about 1 lower: unit parabolic penalty)")
ks = ks_two_sample(Ecdf(a0), Ecdf(a1 + 1.0))
print(f"two-sample KS after +1 shift: {ks.statistic:.3f} "
      "(stationarity of the one-point marginal)")

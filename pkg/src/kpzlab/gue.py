"""GUE sampling and Tracy-Widom reference distributions.

Matrix normalization: diagonal entries N(0,1), off-diagonal complex entries
with independent N(0, 1/2) real and imaginary parts, so the spectral edge
sits at 2*sqrt(k) and k^(1/6) * (lambda_max - 2*sqrt(k)) tends to the GUE
Tracy-Widom law.  Large-order references use the beta=2 tridiagonal Hermite
ensemble with a Sturm-count bisection eigensolver; the tridiagonal route is
validated against dense sampling before use (see tests).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla


@dataclass
class SymTridiagonal:
    """Real symmetric tridiagonal matrix: diagonal d, off-diagonal e >= 0."""

    d: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        self.e = np.asarray(self.e, dtype=float)
        if self.e.shape != (max(self.d.shape[0] - 1, 0),):
            raise ValueError("off-diagonal length must be order - 1")

    @property
    def order(self) -> int:
        return self.d.shape[0]


def sample_gue(k: int, rng: np.random.Generator) -> np.ndarray:
    """One k x k GUE matrix (Hermitian by construction)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return sample_gue_batch(k, 1, rng)[0]


def sample_gue_batch(k: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """m independent k x k GUE matrices, shape (m, k, k) complex."""
    a = rng.standard_normal((m, k, k))
    b = rng.standard_normal((m, k, k))
    z = (a + 1j * b) / math.sqrt(2.0)
    h = (z + z.conj().transpose(0, 2, 1)) / math.sqrt(2.0)
    idx = np.arange(k)
    h[:, idx, idx] = a[:, idx, idx]  # diagonal N(0,1), imaginary part dropped
    return h


def largest_eigenvalue_dense(h: np.ndarray) -> np.ndarray:
    """lambda_max of (a batch of) Hermitian matrices via dense solve."""
    return np.linalg.eigvalsh(h)[..., -1]


def householder_tridiagonalize(h: np.ndarray) -> SymTridiagonal:
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Householder (Hessenberg) reduction followed by a diagonal-unitary phase
    normalization making the off-diagonal real and nonnegative; the spectrum
    is preserved.
    """
    h = np.asarray(h)
    k = h.shape[0]
    if k == 1:
        return SymTridiagonal(h.real.reshape(1), np.zeros(0))
    t = sla.hessenberg(h)
    d = np.real(np.diagonal(t)).copy()
    e = np.abs(np.diagonal(t, offset=1)).copy()
    return SymTridiagonal(d, e)


def sample_gue_tridiagonal(n: int, rng: np.random.Generator) -> SymTridiagonal:
    """Tridiagonal beta=2 Hermite ensemble, same spectrum law as sample_gue.

    Diagonal N(0,1); off-diagonal entry i distributed chi_{2(n-i)}/sqrt(2)
    for i = 1..n-1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    d = rng.standard_normal(n)
    dof = 2.0 * np.arange(n - 1, 0, -1)
    e = np.sqrt(rng.chisquare(dof) / 2.0) if n > 1 else np.zeros(0)
    return SymTridiagonal(d, e)


def _sample_tridiagonal_batch(n: int, m: int, rng: np.random.Generator):
    d = rng.standard_normal((m, n))
    dof = 2.0 * np.arange(n - 1, 0, -1)
    e = np.sqrt(rng.chisquare(np.broadcast_to(dof, (m, n - 1))) / 2.0)
    return d, e


def sturm_count(d: np.ndarray, e: np.ndarray, x) -> np.ndarray:
    """Number of eigenvalues strictly below x, by the Sturm sequence.

    d: (..., n), e: (..., n-1), x broadcastable against the batch shape.
    """
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    x = np.asarray(x, dtype=float)
    n = d.shape[-1]
    tiny = np.finfo(float).tiny * 4.0
    e2 = e * e
    q = d[..., 0] - x
    q = np.where(np.abs(q) < tiny, -tiny, q)
    count = (q < 0).astype(np.int64)
    for i in range(1, n):
        q = d[..., i] - x - e2[..., i - 1] / q
        q = np.where(np.abs(q) < tiny, -tiny, q)
        count += q < 0
    return count


def largest_eigenvalues_batch(d: np.ndarray, e: np.ndarray,
                              tol: float = 1e-10,
                              max_iter: int = 200) -> np.ndarray:
    """lambda_max of a batch of symmetric tridiagonals by Sturm bisection."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    d = np.atleast_2d(np.asarray(d, dtype=float))
    e = np.asarray(e, dtype=float).reshape(d.shape[0], -1)
    n = d.shape[-1]
    emax = np.max(np.abs(e), axis=-1) if n > 1 else np.zeros(d.shape[0])
    lo = np.min(d, axis=-1) - 2.0 * emax
    hi = np.max(d, axis=-1) + 2.0 * emax
    for _ in range(max_iter):
        if np.max(hi - lo) <= tol:
            break
        mid = 0.5 * (lo + hi)
        all_below = sturm_count(d, e, mid) == n
        hi = np.where(all_below, mid, hi)
        lo = np.where(all_below, lo, mid)
    else:
        raise RuntimeError("Sturm bisection did not converge")
    return 0.5 * (lo + hi)


def largest_eigenvalue(t: SymTridiagonal, tol: float = 1e-10) -> float:
    """lambda_max of one symmetric tridiagonal matrix, within +/- tol."""
    if t.order == 1:
        return float(t.d[0])
    return float(largest_eigenvalues_batch(t.d[None, :], t.e[None, :], tol)[0])


# ---------------------------------------------------------------------------
# Reference ECDFs
# ---------------------------------------------------------------------------

@dataclass
class ReferenceEcdf:
    """Sorted reference samples plus the metadata to regenerate them."""

    kind: str                 # "tw_gue" | "lambda_k" | "normal"
    params: dict
    seed: int
    samples: np.ndarray
    build: str = "kpzlab-0.1.0"

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=float))

    def save(self, path):
        with open(path, "w") as fh:
            meta = {"kind": self.kind, "params": self.params,
                    "seed": self.seed, "m": int(self.samples.size),
                    "build": self.build}
            fh.write(json.dumps(meta, sort_keys=True) + "\n")
            for v in self.samples:
                fh.write(repr(float(v)) + "\n")

    @classmethod
    def load(cls, path) -> "ReferenceEcdf":
        with open(path) as fh:
            meta = json.loads(fh.readline())
            samples = np.array([float(line) for line in fh if line.strip()])
        if samples.size != meta["m"]:
            raise ValueError(f"reference {path}: expected {meta['m']} samples, "
                             f"found {samples.size}")
        return cls(meta["kind"], meta["params"], meta["seed"], samples,
                   build=meta.get("build", ""))


def tw_reference(n: int, m: int, rng_or_seed, tol: float = 1e-8,
                 chunk: int = 2000) -> ReferenceEcdf:
    """Tracy-Widom GUE reference: n^(1/6) * (lambda_max - 2*sqrt(n)) over m
    independent tridiagonal-ensemble draws."""
    if n < 100 or m < 1000:
        raise ValueError("need n >= 100 and m >= 1000")
    seed, rng = _coerce_rng(rng_or_seed)
    vals = np.empty(m)
    done = 0
    while done < m:
        b = min(chunk, m - done)
        d, e = _sample_tridiagonal_batch(n, b, rng)
        lam = largest_eigenvalues_batch(d, e, tol=tol)
        vals[done:done + b] = n ** (1.0 / 6.0) * (lam - 2.0 * math.sqrt(n))
        done += b
    return ReferenceEcdf("tw_gue", {"n": n, "m": m, "tol": tol, "chunk": chunk},
                         seed, vals)


def lambda_k_reference(k: int, m: int, rng_or_seed,
                       chunk: int = 20000) -> ReferenceEcdf:
    """lambda_max of k x k dense GUE matrices, m samples."""
    if k < 1 or m < 1000:
        raise ValueError("need k >= 1 and m >= 1000")
    seed, rng = _coerce_rng(rng_or_seed)
    vals = np.empty(m)
    done = 0
    while done < m:
        b = min(chunk, m - done)
        h = sample_gue_batch(k, b, rng)
        vals[done:done + b] = largest_eigenvalue_dense(h)
        done += b
    return ReferenceEcdf("lambda_k", {"k": k, "m": m, "chunk": chunk}, seed, vals)


def normal_reference(m: int, rng_or_seed) -> ReferenceEcdf:
    """Standard normal reference samples (the k=1 law)."""
    seed, rng = _coerce_rng(rng_or_seed)
    return ReferenceEcdf("normal", {"m": m}, seed, rng.standard_normal(m))


def _coerce_rng(rng_or_seed):
    if isinstance(rng_or_seed, np.random.Generator):
        return -1, rng_or_seed
    seed = int(rng_or_seed)
    return seed, np.random.default_rng(seed)

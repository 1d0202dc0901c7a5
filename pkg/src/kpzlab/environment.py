"""Random environment families and site-addressable weight sampling.

An environment assigns to every lattice site x in Z^2 a probability vector
omega(x, .) over the four nearest-neighbour steps.  Sampling is storage-free:
weights are a pure function of (family parameters, master seed, site), produced
by a counter-based 64-bit hash feeding fixed inverse-CDF transforms, so any
rectangle of the environment can be regenerated in any order, bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

# Direction indices: the directed (up-right) pair first.
E1, E2, W1, W2 = 0, 1, 2, 3
DIRECTION_NAMES = ("E1", "E2", "W1", "W2")
STEPS = ((1, 0), (0, 1), (-1, 0), (0, -1))

NEG_INF = float("-inf")

_FAMILIES = ("beta", "dirichlet", "twopoint", "logpareto")

# Fixed number of uniform draws consumed per site, per family.
_DRAWS = {"beta": 1, "dirichlet": 4, "twopoint": 1, "logpareto": 1}


class EnvironmentError_(ValueError):
    """Invalid environment specification."""


# ---------------------------------------------------------------------------
# Specs and statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnvironmentSpec:
    """One of the four supported environment families.

    params:
      beta      -- (alpha, beta): jump right with prob B(alpha,beta), up with 1-B
      dirichlet -- (a1, a2, a3, a4): full 4-vector Dirichlet
      twopoint  -- (v0, v1, q): vectors of 4 probabilities; pick v1 w.p. q
      logpareto -- (theta, v_min): p(E1)=exp(-V), V Pareto(theta, v_min);
                   the remaining mass is split equally over E2, W1, W2
    """

    family: str
    params: tuple
    elliptic: bool = False
    uniformly_elliptic: bool = False
    kappa: float = 0.0


@dataclass(frozen=True)
class EnvStats:
    """Moments of log omega(0, e1): mean mu < 0, sd sigma, moment order."""

    mu: float
    sigma: float
    moment_order: float  # may be math.inf

    @property
    def iq_axis(self) -> float:
        """Quenched rate function at e1: I_q(e1) = -mu."""
        return -self.mu


def validate_spec(spec: EnvironmentSpec) -> EnvironmentSpec:
    """Check parameters and fill the ellipticity flags from the family."""
    fam = spec.family
    p = spec.params
    if fam == "beta":
        a, b = p
        if not (a > 0 and b > 0):
            raise EnvironmentError_("beta: shape parameters must be positive")
        return replace(spec, elliptic=False, uniformly_elliptic=False, kappa=0.0)
    if fam == "dirichlet":
        if len(p) != 4 or any(ai <= 0 for ai in p):
            raise EnvironmentError_("dirichlet: need four positive parameters")
        return replace(spec, elliptic=True, uniformly_elliptic=False, kappa=0.0)
    if fam == "twopoint":
        v0, v1, q = p
        if not (0.0 < q < 1.0):
            raise EnvironmentError_("twopoint: q must lie in (0,1)")
        for v in (v0, v1):
            if len(v) != 4 or any(x <= 0 for x in v):
                raise EnvironmentError_("twopoint: vectors need 4 positive entries")
            if abs(sum(v) - 1.0) > 1e-12:
                raise EnvironmentError_("twopoint: vector does not sum to 1")
        kappa = min(min(v0), min(v1))
        return replace(spec, elliptic=True, uniformly_elliptic=True, kappa=kappa)
    if fam == "logpareto":
        theta, v_min = p
        if theta <= 2:
            raise EnvironmentError_(
                "logpareto: theta <= 2 gives moment order <= 2, violates A2")
        if v_min <= 0:
            raise EnvironmentError_("logpareto: v_min must be positive")
        return replace(spec, elliptic=True, uniformly_elliptic=False, kappa=0.0)
    raise EnvironmentError_(f"unknown family {fam!r}")


def env_stats(spec: EnvironmentSpec) -> EnvStats:
    """Closed-form mu, sigma and moment order of log omega(0, e1).

    All four families admit exact expressions: the Beta/Dirichlet marginals
    use digamma/trigamma, TwoPoint is a two-atom mixture, and LogPareto is
    a Pareto variable with flipped sign.
    """
    fam, p = spec.family, spec.params
    if fam == "beta":
        a, b = p
        mu = special.digamma(a) - special.digamma(a + b)
        var = special.polygamma(1, a) - special.polygamma(1, a + b)
        return EnvStats(float(mu), math.sqrt(float(var)), math.inf)
    if fam == "dirichlet":
        # p(E1) is marginally Beta(a1, a2+a3+a4).
        a1 = p[0]
        rest = sum(p[1:])
        mu = special.digamma(a1) - special.digamma(a1 + rest)
        var = special.polygamma(1, a1) - special.polygamma(1, a1 + rest)
        return EnvStats(float(mu), math.sqrt(float(var)), math.inf)
    if fam == "twopoint":
        v0, v1, q = p
        l0, l1 = math.log(v0[E1]), math.log(v1[E1])
        mu = (1 - q) * l0 + q * l1
        var = (1 - q) * (l0 - mu) ** 2 + q * (l1 - mu) ** 2
        return EnvStats(mu, math.sqrt(var), math.inf)
    if fam == "logpareto":
        theta, v_min = p
        # log p(E1) = -V with V ~ Pareto(theta, v_min), theta > 2.
        mean_v = theta * v_min / (theta - 1)
        var_v = v_min**2 * theta / ((theta - 1) ** 2 * (theta - 2))
        return EnvStats(-mean_v, math.sqrt(var_v), float(theta))
    raise EnvironmentError_(f"unknown family {fam!r}")


# ---------------------------------------------------------------------------
# Compact text form (CLI flag syntax)
# ---------------------------------------------------------------------------

def parse_env_spec(text: str) -> EnvironmentSpec:
    """Parse e.g. 'beta:1,1' or 'twopoint:0.4,0.3,0.2,0.1|0.1,0.2,0.3,0.4|0.5'."""
    try:
        fam, _, rest = text.partition(":")
        fam = fam.strip().lower()
        if fam == "twopoint":
            s0, s1, sq = rest.split("|")
            v0 = tuple(float(x) for x in s0.split(","))
            v1 = tuple(float(x) for x in s1.split(","))
            params = (v0, v1, float(sq))
        else:
            params = tuple(float(x) for x in rest.split(","))
    except (ValueError, AttributeError) as exc:
        raise EnvironmentError_(f"cannot parse environment spec {text!r}") from exc
    return validate_spec(EnvironmentSpec(fam, params))


def format_env_spec(spec: EnvironmentSpec) -> str:
    """Inverse of parse_env_spec."""
    if spec.family == "twopoint":
        v0, v1, q = spec.params
        return "twopoint:{}|{}|{:g}".format(
            ",".join(f"{x:g}" for x in v0), ",".join(f"{x:g}" for x in v1), q)
    return spec.family + ":" + ",".join(f"{x:g}" for x in spec.params)


# ---------------------------------------------------------------------------
# Counter-based site hashing
# ---------------------------------------------------------------------------

_C1 = np.uint64(0x9E3779B97F4A7C15)
_C2 = np.uint64(0xC2B2AE3D27D4EB4F)
_C3 = np.uint64(0xD6E8FEB86659FD93)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_INV53 = float(2.0**-53)


def _mix64(z):
    """SplitMix64 finalizer; vectorized over uint64 arrays (wrapping mod 2^64)."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _MUL1
        z = (z ^ (z >> _S27)) * _MUL2
        return z ^ (z >> _S31)


def _as_u64(x):
    a = np.asarray(x)
    if a.dtype == np.uint64:
        return a
    return a.astype(np.int64).view(np.uint64)


def site_hash(seed, x1, x2, draw=0):
    """64-bit hash of (seed, site, draw index); all arguments broadcast."""
    with np.errstate(over="ignore"):
        h = _mix64(_as_u64(seed) ^ _C1)
        h = _mix64(h ^ (_as_u64(x1) * _C2))
        h = _mix64(h ^ (_as_u64(x2) * _C3))
        return _mix64(h ^ (_as_u64(draw) * _C1))


def site_uniform(seed, x1, x2, draw=0):
    """Uniform in the open interval (0,1), keyed by (seed, site, draw)."""
    h = site_hash(seed, x1, x2, draw)
    return ((h >> _S11).astype(np.float64) + 0.5) * _INV53


def split_seed(master_seed, index):
    """Derive an independent 64-bit substream seed (replica splitting)."""
    with np.errstate(over="ignore"):
        h = _mix64(_as_u64(master_seed) ^ _C3)
        h = _mix64(h ^ (_as_u64(index) + np.uint64(1)) * _C1)
    return h


# ---------------------------------------------------------------------------
# Weight oracle
# ---------------------------------------------------------------------------

def _weights_from_uniforms(spec: EnvironmentSpec, seed, x1, x2):
    """Broadcast jump-probability 4-vectors at the given sites."""
    fam, p = spec.family, spec.params
    if fam == "beta":
        a, b = p
        u = site_uniform(seed, x1, x2, 0)
        bval = u if (a == 1.0 and b == 1.0) else special.betaincinv(a, b, u)
        out = np.zeros(np.shape(bval) + (4,))
        out[..., E1] = bval
        out[..., E2] = 1.0 - bval
        return out
    if fam == "dirichlet":
        g = [special.gammaincinv(p[i], site_uniform(seed, x1, x2, i))
             for i in range(4)]
        g = np.stack(np.broadcast_arrays(*g), axis=-1)
        return g / g.sum(axis=-1, keepdims=True)
    if fam == "twopoint":
        v0, v1, q = p
        u = site_uniform(seed, x1, x2, 0)
        pick = (u < q)[..., None]
        return np.where(pick, np.asarray(v1, float), np.asarray(v0, float))
    if fam == "logpareto":
        theta, v_min = p
        u = site_uniform(seed, x1, x2, 0)
        w1 = np.exp(-v_min * u ** (-1.0 / theta))
        out = np.empty(np.shape(w1) + (4,))
        out[..., E1] = w1
        out[..., E2:] = ((1.0 - w1) / 3.0)[..., None]
        return out
    raise EnvironmentError_(f"unknown family {fam!r}")


def _log_w12(spec: EnvironmentSpec, seed, x1, x2):
    """(log omega(.,e1), log omega(.,e2)) without building the 4-vector.

    This is the hot path of the lattice DP; every branch works in terms that
    stay accurate when the E1 weight is close to 0 or 1.
    """
    fam, p = spec.family, spec.params
    if fam == "beta":
        a, b = p
        u = site_uniform(seed, x1, x2, 0)
        bval = u if (a == 1.0 and b == 1.0) else special.betaincinv(a, b, u)
        return np.log(bval), np.log1p(-bval)
    if fam == "logpareto":
        theta, v_min = p
        u = site_uniform(seed, x1, x2, 0)
        v = v_min * u ** (-1.0 / theta)
        # log((1 - e^{-v})/3); -expm1(-v) = 1 - e^{-v}
        return -v, np.log(-np.expm1(-v)) - math.log(3.0)
    w = _weights_from_uniforms(spec, seed, x1, x2)
    return np.log(w[..., E1]), np.log(w[..., E2])


@dataclass(frozen=True)
class WeightOracle:
    """Deterministic map (spec, master seed, site) -> jump probabilities.

    Immutable; all methods are pure and broadcast over site arrays, so the
    oracle is safe for unrestricted concurrent reads.
    """

    spec: EnvironmentSpec
    master_seed: int

    def weights(self, x1, x2):
        return _weights_from_uniforms(self.spec, self.master_seed, x1, x2)

    def log_w12(self, x1, x2, seed=None):
        """Hot-path (log w_E1, log w_E2); `seed` overrides for replica batches."""
        s = self.master_seed if seed is None else seed
        return _log_w12(self.spec, s, x1, x2)

    def abs_tau_w2(self, x1, x2, seed=None):
        """|log w_E1| + |log w_E2| per site (row-maxima summand)."""
        lw1, lw2 = self.log_w12(x1, x2, seed)
        return np.abs(lw1) + np.abs(lw2)


def weight_at(oracle: WeightOracle, x) -> np.ndarray:
    """omega(x, .) as a length-4 array in direction order E1,E2,W1,W2."""
    return np.asarray(oracle.weights(x[0], x[1]), dtype=float)


def log_weight(oracle: WeightOracle, x, e: int) -> float:
    """log omega(x, e); -inf sentinel when the direction carries no mass."""
    w = float(weight_at(oracle, x)[e])
    return math.log(w) if w > 0.0 else NEG_INF

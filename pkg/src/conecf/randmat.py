"""Random generation on the positive definite cone.

Wishart-type matrices are sampled through the triangular (Bartlett)
construction, and the beta distribution of the second kind is realized as
the quadratic-representation quotient of two independent Wishart draws
(the matrix-F construction), which reduces to the classical beta prime at
rank one.  Densities are evaluated in log space throughout; the
multivariate gamma normalizer overflows fast in both the rank and the
shape.

All randomness flows through ``RngStream`` values: distinct
(master_seed, stream_id) pairs give independent, reproducible streams,
and ``split_stream`` derives child streams deterministically, so parallel
consumers never share a mutable generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .jordan import ConeElement, ConeMembershipError, SymMatrix, in_cone, spectral_decomposition

__all__ = [
    "Beta2Params",
    "RngStream",
    "split_stream",
    "gamma_omega",
    "beta_omega",
    "beta2_log_density",
    "sample_wishart",
    "sample_beta2",
]

_MASK64 = (1 << 64) - 1
# A degenerate draw (inside the cone margin) has probability ~0; a handful of
# retries separates that from a broken configuration.
_MAX_REDRAWS = 5


def _mix64(z: int) -> int:
    """SplitMix64 finalizer; used to derive child stream ids."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class Beta2Params:
    """Shape pair (p, q) for the rank-r beta distribution of the second kind.

    Both shapes must exceed (r - 1)/2 so that every gamma factor of the
    normalizer has a positive argument.
    """

    p: float
    q: float
    r: int

    def __post_init__(self) -> None:
        edge = (self.r - 1) / 2.0
        if self.r < 1:
            raise ValueError(f"rank must be at least 1, got {self.r}")
        if not (self.p > edge and self.q > edge):
            raise ValueError(
                f"shapes must exceed (r-1)/2 = {edge}, got p={self.p}, q={self.q}"
            )


@dataclass(eq=False)
class RngStream:
    """A reproducible random stream identified by (master_seed, stream_id)."""

    master_seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        seq = np.random.SeedSequence(
            entropy=self.master_seed & _MASK64, spawn_key=(self.stream_id & _MASK64,)
        )
        self._gen = np.random.default_rng(seq)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def fork(self) -> "RngStream":
        """A copy that continues from the current position independently."""
        child = RngStream(self.master_seed, self.stream_id)
        child._gen.bit_generator.state = self._gen.bit_generator.state
        return child


def split_stream(rng: RngStream, index: int) -> RngStream:
    """Deterministically derive an independent child stream.

    The same (parent, index) always yields the same child, and distinct
    indices yield statistically independent streams.
    """
    child_id = _mix64((rng.stream_id & _MASK64) ^ _mix64(index & _MASK64))
    return RngStream(rng.master_seed, child_id)


def gamma_omega(p: float, r: int) -> float:
    """log of the rank-r cone gamma function,

        (2 pi)^{r(r-1)/4} * prod_{k=1}^{r} Gamma(p - (k-1)/2).
    """
    if r < 1:
        raise ValueError(f"rank must be at least 1, got {r}")
    if not p > (r - 1) / 2.0:
        raise ValueError(f"shape must exceed (r-1)/2 = {(r - 1) / 2.0}, got {p}")
    ks = np.arange(r)
    return float(0.25 * r * (r - 1) * np.log(2.0 * np.pi) + gammaln(p - 0.5 * ks).sum())


def beta_omega(p: float, q: float, r: int) -> float:
    """log of the cone beta function Gamma(p) Gamma(q) / Gamma(p+q); symmetric in (p, q)."""
    return gamma_omega(p, r) + gamma_omega(q, r) - gamma_omega(p + q, r)


def beta2_log_density(x: ConeElement, params: Beta2Params) -> float:
    """Log density of the beta distribution of the second kind at x,

        -log B(p, q) + (p - (r+1)/2) log det(x) - (p+q) log det(e+x),

    with both determinants evaluated from the spectrum of x.
    """
    if x.r != params.r:
        raise ValueError(f"dimension mismatch: {x.r} vs {params.r}")
    lam = np.array(spectral_decomposition(x.m).eigenvalues)
    logdet = float(np.log(lam).sum())
    logdet1p = float(np.log1p(lam).sum())
    r = params.r
    return (
        -beta_omega(params.p, params.q, r)
        + (params.p - (r + 1) / 2.0) * logdet
        - (params.p + params.q) * logdet1p
    )


def _wishart_arrays(s: float, r: int, gen: np.random.Generator, n: int) -> np.ndarray:
    """n Bartlett-constructed draws with density prop. to det(x)^{s-(r+1)/2} exp(-tr x).

    X = L L^T with L lower triangular, L_ii^2 ~ Gamma(s - (i-1)/2, scale 1)
    and L_ij ~ Normal(0, 1/2) below the diagonal, all independent.
    """
    L = np.zeros((n, r, r))
    for i in range(r):
        L[:, i, i] = np.sqrt(gen.gamma(shape=s - 0.5 * i, scale=1.0, size=n))
    if r > 1:
        il, jl = np.tril_indices(r, -1)
        L[:, il, jl] = gen.normal(0.0, np.sqrt(0.5), size=(n, il.size))
    return L @ np.transpose(L, (0, 2, 1))


def _beta2_arrays(p: float, q: float, r: int, gen: np.random.Generator, n: int) -> np.ndarray:
    """n draws of the quadratic-representation quotient of Wishart(p) by Wishart(q).

    The quotient is W^{-1/2} S W^{-1/2} with the symmetric inverse square
    root, the classical matrix-F construction; its law has exactly the
    stated density.  The triangular quotient does not: congruence by a
    Cholesky factor is not orthogonally invariant, and the resulting law
    fails the density cross-checks at rank 2 (unequal diagonal means).
    """
    S = _wishart_arrays(p, r, gen, n)
    W = _wishart_arrays(q, r, gen, n)
    w, v = np.linalg.eigh(W)
    isq = (v * (w**-0.5)[:, None, :]) @ np.transpose(v, (0, 2, 1))
    X = isq @ S @ isq
    return (X + np.transpose(X, (0, 2, 1))) / 2.0


def _certified(draw, rng: RngStream, what: str) -> ConeElement:
    for _ in range(_MAX_REDRAWS):
        c = in_cone(SymMatrix(draw(rng.generator)))
        if c is not None:
            return c
    raise ConeMembershipError(
        f"{what}: {_MAX_REDRAWS} consecutive draws failed cone certification; "
        "the shape parameters are too close to the domain edge"
    )


def sample_wishart(s: float, r: int, rng: RngStream) -> ConeElement:
    """One certified Wishart-type draw; the mean of the law is s times the identity."""
    if not s > (r - 1) / 2.0:
        raise ValueError(f"shape must exceed (r-1)/2 = {(r - 1) / 2.0}, got {s}")
    return _certified(lambda g: _wishart_arrays(s, r, g, 1)[0], rng, "sample_wishart")


def sample_beta2(params: Beta2Params, rng: RngStream) -> ConeElement:
    """One certified draw of the beta distribution of the second kind.

    Construction: S ~ Wishart(p), W ~ Wishart(q) independently, and the
    sample is the quadratic-representation quotient of S by W (divide S
    by W).  At rank one this is exactly the beta prime law with mean
    p/(q-1); that scalar reduction fixes the quotient orientation.
    """
    return _certified(
        lambda g: _beta2_arrays(params.p, params.q, params.r, g, 1)[0],
        rng,
        "sample_beta2",
    )

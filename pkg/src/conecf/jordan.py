"""Euclidean Jordan algebra structure on dense real symmetric matrices.

The algebra is Sym(r) with product x.y = (xy + yx)/2 and the trace inner
product; its cone of squares is the set of positive definite matrices,
ordered by the Loewner order.  Everything is small and dense (workflows
stay at rank <= 16), and every operation is a pure function over
immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "EIG_TOL",
    "MAX_SWEEPS",
    "CONE_TOL",
    "ASSERT_TOL",
    "ConeMembershipError",
    "EigenConvergenceError",
    "SymMatrix",
    "ConeElement",
    "Spectrum",
    "identity",
    "zero",
    "jordan_product",
    "inner",
    "quad_rep_apply",
    "spectral_decomposition",
    "power",
    "inverse",
    "in_cone",
    "cone",
    "cone_less",
    "frob_norm",
    "rel_residual",
    "to_json_dict",
    "from_json_dict",
]

EIG_TOL = 1e-12     # relative off-diagonal target of the eigensolver
MAX_SWEEPS = 64     # cyclic Jacobi sweep cap
CONE_TOL = 1e-10    # relative margin for open-cone membership
ASSERT_TOL = 1e-8   # looser margin for "lies in the closed cone" assertions

# Constructors reject this much asymmetry as user error rather than round-off.
_SYM_REJECT_TOL = 1e-9
# Inverting a symmetric matrix fails below this relative eigenvalue magnitude.
_SINGULAR_TOL = 1e-13


class ConeMembershipError(ValueError):
    """A value that must be positive definite is not, within the cone margin."""


class EigenConvergenceError(RuntimeError):
    """The Jacobi sweep cap was hit before the off-diagonal target."""


def _as_square_float(entries) -> np.ndarray:
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Dense real symmetric r x r matrix, symmetrized once at construction.

    Inputs whose asymmetry exceeds 1e-9 relative are rejected: that is a
    caller error, not round-off.  The stored array is read-only.
    """

    mat: np.ndarray

    def __post_init__(self) -> None:
        a = _as_square_float(self.mat)
        if not np.isfinite(a).all():
            raise ValueError("matrix entries must be finite")
        scale = 1.0 + np.abs(a).max()
        skew = np.abs(a - a.T).max()
        if skew > _SYM_REJECT_TOL * scale:
            raise ValueError(
                f"matrix is not symmetric: max asymmetry {skew:.3e} at scale {scale:.3e}"
            )
        a = (a + a.T) / 2.0
        a.flags.writeable = False
        object.__setattr__(self, "mat", a)

    @property
    def r(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True, eq=False)
class ConeElement:
    """A SymMatrix certified positive definite, with its smallest eigenvalue cached.

    Build these through ``in_cone``/``cone``; a hand-made certificate that
    does not match the matrix will surface as a non-positive Cholesky pivot
    downstream.
    """

    m: SymMatrix
    min_eig: float

    def __post_init__(self) -> None:
        if not self.min_eig > 0.0:
            raise ConeMembershipError(
                f"certified smallest eigenvalue must be positive, got {self.min_eig}"
            )

    @property
    def r(self) -> int:
        return self.m.r

    @property
    def mat(self) -> np.ndarray:
        return self.m.mat


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues (descending) and orthonormal eigenvector columns."""

    eigenvalues: tuple[float, ...]
    basis: np.ndarray

    def reconstruct(self) -> np.ndarray:
        lam = np.asarray(self.eigenvalues)
        return (self.basis * lam) @ self.basis.T


def identity(r: int) -> ConeElement:
    """The unit element e, certified with all eigenvalues one."""
    return ConeElement(SymMatrix(np.eye(r)), 1.0)


def zero(r: int) -> SymMatrix:
    return SymMatrix(np.zeros((r, r)))


def _check_same_rank(x: SymMatrix, y: SymMatrix) -> None:
    if x.r != y.r:
        raise ValueError(f"dimension mismatch: {x.r} vs {y.r}")


def _mat_of(x) -> np.ndarray:
    return x.mat if isinstance(x, (SymMatrix, ConeElement)) else np.asarray(x, dtype=float)


def jordan_product(x: SymMatrix, y: SymMatrix) -> SymMatrix:
    """x.y = (xy + yx)/2 with ordinary matrix products."""
    _check_same_rank(x, y)
    m = x.mat @ y.mat
    return SymMatrix((m + m.T) / 2.0)


def inner(x: SymMatrix, y: SymMatrix) -> float:
    """Trace inner product <x, y> = trace(xy)."""
    _check_same_rank(x, y)
    return float(np.einsum("ij,ij->", x.mat, y.mat))


def quad_rep_apply(x: SymMatrix, y: SymMatrix) -> SymMatrix:
    """Quadratic representation P(x)y, realized as x y x."""
    _check_same_rank(x, y)
    return SymMatrix(x.mat @ y.mat @ x.mat)


def _jacobi(a: np.ndarray, tol: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once every off-diagonal magnitude is at most
    tol * (1 + max absolute entry of the input); ``tol`` defaults to
    EIG_TOL, or to the dtype's own resolution for wider floats (extended
    precision is used by oracle-grade evaluations).  Returns the raw
    (unsorted) eigenvalue vector and the orthogonal column basis,
    dtype-preserving.
    """
    n = a.shape[0]
    dtype = a.dtype if a.dtype in (np.dtype(np.float64), np.dtype(np.longdouble)) else np.dtype(np.float64)
    if tol is None:
        tol = EIG_TOL if dtype == np.dtype(np.float64) else 100.0 * float(np.finfo(dtype).eps)
    if n == 1:
        return np.array([a[0, 0]], dtype=dtype), np.ones((1, 1), dtype=dtype)
    if n == 2:
        # one rotation diagonalizes a 2x2 exactly
        app, apq, aqq = dtype.type(a[0, 0]), dtype.type(a[0, 1]), dtype.type(a[1, 1])
        if apq == 0.0:
            return np.array([app, aqq], dtype=dtype), np.eye(2, dtype=dtype)
        theta = (aqq - app) / (2.0 * apq)
        t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
        c = 1.0 / np.sqrt(t * t + 1.0)
        s = t * c
        vals = np.array([app - t * apq, aqq + t * apq], dtype=dtype)
        vecs = np.array([[c, s], [-s, c]], dtype=dtype)
        return vals, vecs
    d = np.array(a, dtype=dtype)
    v = np.eye(n, dtype=dtype)
    thresh = tol * (1.0 + np.abs(d).max())
    skip = 0.01 * thresh  # rotations this small cannot move the sweep target
    iu, ju = np.triu_indices(n, 1)
    for _ in range(MAX_SWEEPS):
        if np.abs(d[iu, ju]).max() <= thresh:
            return np.diagonal(d).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = d[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (d[q, q] - d[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = d[:, p].copy()
                col_q = d[:, q].copy()
                d[:, p] = c * col_p - s * col_q
                d[:, q] = s * col_p + c * col_q
                row_p = d[p, :].copy()
                row_q = d[q, :].copy()
                d[p, :] = c * row_p - s * row_q
                d[q, :] = s * row_p + c * row_q
                d[p, q] = 0.0
                d[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    if np.abs(d[iu, ju]).max() <= thresh:
        return np.diagonal(d).copy(), v
    raise EigenConvergenceError(
        f"Jacobi sweeps did not reach the off-diagonal target in {MAX_SWEEPS} sweeps"
    )


def spectral_decomposition(x: SymMatrix) -> Spectrum:
    """Spectral decomposition with eigenvalues sorted descending."""
    w, v = _jacobi(x.mat)
    order = np.argsort(-w, kind="stable")
    return Spectrum(tuple(float(t) for t in w[order]), v[:, order])


def power(x: ConeElement, alpha: float) -> ConeElement:
    """Spectral power x^alpha; covers inverse (-1), sqrt (1/2), inverse sqrt (-1/2)."""
    w, v = _jacobi(x.mat)
    if w.min() <= 0.0:
        raise ConeMembershipError(
            f"cone element has non-positive eigenvalue {w.min():.3e}; certificate is stale"
        )
    pw = w**alpha
    rec = (v * pw) @ v.T
    return ConeElement(SymMatrix(rec), float(pw.min()))


def inverse(x: ConeElement) -> ConeElement:
    return power(x, -1.0)


def frob_norm(x: SymMatrix) -> float:
    """sqrt(trace(x^2)), the norm induced by the trace inner product."""
    a = x.mat
    return float(np.sqrt(np.einsum("ij,ij->", a, a)))


def in_cone(x: SymMatrix) -> Optional[ConeElement]:
    """Certify x as positive definite, or return None.

    Membership needs the smallest eigenvalue to clear CONE_TOL * (1 + ||x||),
    a strict margin that keeps downstream Cholesky factorizations
    well-conditioned.
    """
    w, _ = _jacobi(x.mat)
    mn = float(w.min())
    if mn > CONE_TOL * (1.0 + frob_norm(x)):
        return ConeElement(x, mn)
    return None


def cone(x: SymMatrix) -> ConeElement:
    """Like in_cone but raising ConeMembershipError on the negative answer."""
    c = in_cone(x)
    if c is None:
        w, _ = _jacobi(x.mat)
        raise ConeMembershipError(
            f"matrix is not positive definite within the cone margin "
            f"(smallest eigenvalue {w.min():.3e})"
        )
    return c


def cone_less(x: SymMatrix, y: SymMatrix) -> bool:
    """Loewner order: x < y iff y - x is positive definite."""
    _check_same_rank(x, y)
    return in_cone(SymMatrix(y.mat - x.mat)) is not None


def rel_residual(a, b) -> float:
    """Frobenius distance scaled by 1 + the larger operand norm."""
    am = _mat_of(a)
    bm = _mat_of(b)
    diff = float(np.sqrt(((am - bm) ** 2).sum()))
    na = float(np.sqrt((am * am).sum()))
    nb = float(np.sqrt((bm * bm).sum()))
    return diff / (1.0 + max(na, nb))


def to_json_dict(x) -> dict:
    """JSON matrix encoding: {"r": size, "data": row-major entries}."""
    a = _mat_of(x)
    return {"r": int(a.shape[0]), "data": [[float(t) for t in row] for row in a]}


def from_json_dict(d: dict) -> SymMatrix:
    r = int(d["r"])
    data = d["data"]
    if len(data) != r or any(len(row) != r for row in data):
        raise ValueError(f"matrix data does not match declared size r={r}")
    return SymMatrix(np.array(data, dtype=float))

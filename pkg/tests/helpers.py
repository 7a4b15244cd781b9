"""Shared test helpers: small random cone elements with controlled spectra."""

import numpy as np

from conecf import ConeElement, SymMatrix, cone


def make_spd(r: int, rng: np.random.Generator, scale: float = 1.0) -> ConeElement:
    """Random positive definite matrix built directly from a triangular square."""
    L = np.tril(rng.normal(size=(r, r)) * 0.6)
    np.fill_diagonal(L, np.abs(rng.normal(size=r)) + 0.4)
    return cone(SymMatrix(L @ L.T * scale))


def make_sym(r: int, rng: np.random.Generator, scale: float = 1.0) -> SymMatrix:
    a = rng.normal(size=(r, r)) * scale
    return SymMatrix((a + a.T) / 2.0)

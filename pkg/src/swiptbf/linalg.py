"""Dense complex linear algebra used by every other module.

Hermitian eigendecomposition, numerical null spaces, orthogonal-complement
projectors and right-null bases from the SVD.  All routines are pure
functions over immutable arrays and apply a fixed eigenvector phase
convention (largest-magnitude entry made real positive, first index on
ties) so that beams derived from them are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SchemeInapplicableError, ValidationError

__all__ = [
    "HermitianEvd",
    "NullspaceBasis",
    "hermitian_evd",
    "nullspace",
    "orth_complement_projector",
    "svd_right_null",
]

DEFAULT_NULL_RTOL = 1e-7


def _as_complex_matrix(a, name="matrix", square=False):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ValidationError(f"{name} must be 2-d, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValidationError(f"{name} contains non-finite entries")
    if square and a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    return a


def fix_phase(vectors):
    """Rotate each column so its largest-magnitude entry is real positive.

    Ties in magnitude resolve to the first (lowest) index via argmax.
    Zero columns are returned unchanged.
    """
    v = np.array(vectors, dtype=np.complex128, copy=True)
    if v.ndim == 1:
        v = v[:, None]
        squeeze = True
    else:
        squeeze = False
    mags = np.abs(v)
    for j in range(v.shape[1]):
        i = int(np.argmax(mags[:, j]))
        pivot = v[i, j]
        if np.abs(pivot) > 0.0:
            v[:, j] *= np.conj(pivot) / np.abs(pivot)
            # force the pivot exactly real
            v[i, j] = np.abs(pivot)
    if squeeze:
        return v[:, 0]
    return v


@dataclass(frozen=True)
class HermitianEvd:
    """Eigenvalues in descending order; unit eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def top_value(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def top_vector(self) -> np.ndarray:
        return self.eigenvectors[:, 0]


@dataclass(frozen=True)
class NullspaceBasis:
    """Orthonormal columns spanning a numerical null space.

    ``basis`` has shape (n, c) with c possibly zero; ``rel_tol`` is the
    relative singular-value cutoff that was applied.
    """

    basis: np.ndarray
    rel_tol: float

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    @property
    def ambient_dim(self) -> int:
        return int(self.basis.shape[0])


def hermitian_evd(a, sym_tol: float = 1e-12) -> HermitianEvd:
    """Eigendecomposition of a Hermitian matrix with deterministic output.

    Eigenvalues are returned in descending order (stable sort, so exact
    ties keep LAPACK's ascending-order positions reversed consistently)
    and eigenvector phases are fixed by :func:`fix_phase`.
    """
    a = _as_complex_matrix(a, "A", square=True)
    scale = np.linalg.norm(a)
    herm_err = np.linalg.norm(a - a.conj().T)
    if herm_err > sym_tol * max(1.0, scale):
        raise ValidationError(
            f"matrix is not Hermitian: asymmetry {herm_err:.3e} exceeds "
            f"{sym_tol:.1e} relative tolerance"
        )
    w, v = np.linalg.eigh((a + a.conj().T) / 2.0)
    order = np.argsort(-w, kind="stable")
    w = np.ascontiguousarray(w[order].real)
    v = fix_phase(v[:, order])
    return HermitianEvd(eigenvalues=w, eigenvectors=v)


def nullspace(a, rel_tol: float = DEFAULT_NULL_RTOL) -> NullspaceBasis:
    """Orthonormal basis of {x : ||Ax|| <= rel_tol * sigma_max * ||x||}.

    Returns an empty (n, 0) basis when A has numerically full rank.  The
    default cutoff 1e-7 matches the residual floor of the interior-point
    duals this is applied to.
    """
    a = _as_complex_matrix(a, "A")
    if not (0.0 < rel_tol < 1.0):
        raise ValidationError(f"rel_tol must be in (0, 1), got {rel_tol}")
    n = a.shape[1]
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        keep = np.arange(n)
    else:
        keep = [i for i in range(n) if i >= s.size or s[i] <= rel_tol * smax]
        keep = np.asarray(keep, dtype=int)
    basis = vh[keep].conj().T if len(keep) else np.zeros((n, 0), dtype=np.complex128)
    return NullspaceBasis(basis=basis, rel_tol=rel_tol)


def orth_complement_projector(basis: NullspaceBasis) -> np.ndarray:
    """P = I - B B^H for an orthonormal basis B; Hermitian and idempotent."""
    b = basis.basis if isinstance(basis, NullspaceBasis) else np.asarray(basis)
    b = np.asarray(b, dtype=np.complex128)
    n = b.shape[0]
    if b.shape[1] == 0:
        return np.eye(n, dtype=np.complex128)
    gram_err = np.linalg.norm(b.conj().T @ b - np.eye(b.shape[1]))
    if gram_err > 1e-10:
        raise ValidationError(
            f"basis columns are not orthonormal (Gram error {gram_err:.3e})"
        )
    p = np.eye(n, dtype=np.complex128) - b @ b.conj().T
    return (p + p.conj().T) / 2.0


def svd_right_null(g) -> NullspaceBasis:
    """Right null space of a wide K x M matrix from its SVD.

    The returned basis V has orthonormal columns with G V = 0 and
    dimension M - rank(G).  Rank uses the conventional cutoff
    max(K, M) * eps relative to the largest singular value.
    """
    g = _as_complex_matrix(g, "G")
    k, m = g.shape
    if k >= m:
        raise SchemeInapplicableError(
            f"right null space requires K < M, got K={k}, M={m}"
        )
    _, s, vh = np.linalg.svd(g, full_matrices=True)
    rel = max(k, m) * np.finfo(np.float64).eps
    smax = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > rel * smax)) if smax > 0.0 else 0
    basis = vh[rank:].conj().T
    return NullspaceBasis(basis=basis, rel_tol=rel)

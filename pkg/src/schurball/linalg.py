"""Rank-tolerant dense complex linear algebra used by every other module.

All rank decisions use a cutoff relative to the largest singular value
(``sigma <= rank_tol * sigma_max`` is treated as zero); absolute cutoffs
misbehave across scales.  All factorizations are deterministic for identical
input bits, and basis columns returned here are phase-normalized (the entry
of largest modulus is made real positive) so downstream fixtures are
reproducible entry by entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Inconsistent, NotPSD, Singular

__all__ = [
    "Subspace",
    "orthonormal_range",
    "null_space",
    "psd_sqrt",
    "restricted_solve",
    "nearest_unitary",
    "spectral_norm",
    "complement_basis",
    "subtract_subspace",
    "principal_angles",
    "haar_unitary",
]


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-d complex array and insist on finite entries."""
    a = np.atleast_2d(np.asarray(m, dtype=complex))
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _phase_normalize(basis: np.ndarray) -> np.ndarray:
    """Scale each column so its largest-modulus entry is real positive."""
    out = basis.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        i = int(np.argmax(np.abs(col)))
        piv = col[i]
        if np.abs(piv) > 0:
            out[:, k] = col * (np.conj(piv) / np.abs(piv))
    return out


@dataclass(frozen=True)
class Subspace:
    """A subspace of C^ambient_dim carried by an orthonormal column basis."""

    ambient_dim: int
    basis: np.ndarray  # ambient_dim x dim, orthonormal columns

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def orthonormality_defect(self) -> float:
        g = self.basis.conj().T @ self.basis
        return float(np.linalg.norm(g - np.eye(self.dim), 2)) if self.dim else 0.0


def orthonormal_range(m, rank_tol: float) -> Subspace:
    """Orthonormal basis of the numerical column space of ``m``.

    Singular values at or below ``rank_tol * sigma_max`` are dropped; the
    zero matrix yields an empty basis.
    """
    a = as_matrix(m)
    if a.size == 0:
        return Subspace(a.shape[0], np.zeros((a.shape[0], 0), dtype=complex))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return Subspace(a.shape[0], np.zeros((a.shape[0], 0), dtype=complex))
    r = int(np.sum(s > rank_tol * s[0]))
    return Subspace(a.shape[0], _phase_normalize(u[:, :r]))


def null_space(m, rank_tol: float) -> Subspace:
    """Orthonormal basis of the numerical kernel of ``m``."""
    a = as_matrix(m)
    cols = a.shape[1]
    if a.size == 0:
        return Subspace(cols, np.eye(cols, dtype=complex))
    _, s, vh = np.linalg.svd(a)
    if s.size == 0 or s[0] == 0.0:
        return Subspace(cols, np.eye(cols, dtype=complex))
    r = int(np.sum(s > rank_tol * s[0]))
    return Subspace(cols, _phase_normalize(vh[r:].conj().T))


def psd_sqrt(h, rank_tol: float) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in ``[-rank_tol * scale, 0)`` are clamped to zero; anything
    more negative raises :class:`NotPSD` instead of being silently repaired.
    """
    a = as_matrix(h)
    if a.shape[0] != a.shape[1]:
        raise ValueError("psd_sqrt requires a square matrix")
    if a.size == 0:
        return np.zeros_like(a)
    a = (a + a.conj().T) / 2.0
    w, v = np.linalg.eigh(a)
    scale = max(float(np.max(np.abs(w))), 1.0)
    if np.min(w) < -rank_tol * scale:
        raise NotPSD(f"minimum eigenvalue {np.min(w):.3e} below -rank_tol*scale")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def restricted_solve(s, t, rank_tol: float) -> np.ndarray:
    """The operator G with ``G s = t`` on ran(s) and G = 0 on ran(s)^perp.

    This realizes maps that are defined only on generators: the columns of
    ``s`` are generator vectors and the columns of ``t`` their prescribed
    images.  Raises :class:`Inconsistent` when ``t`` does not factor through
    ``s`` (the generator relations are not respected by the targets).
    """
    a = as_matrix(s)
    b = as_matrix(t)
    if a.shape[1] != b.shape[1]:
        raise ValueError("s and t need matching column counts")
    if a.shape[1] == 0 or a.shape[0] == 0:
        if np.linalg.norm(b) > rank_tol:
            raise Inconsistent("nonzero targets over an empty generator set")
        return np.zeros((b.shape[0], a.shape[0]), dtype=complex)
    u, sv, vh = np.linalg.svd(a, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        if np.linalg.norm(b) > rank_tol * max(1.0, float(np.linalg.norm(a))):
            raise Inconsistent("targets nonzero while generators vanish")
        return np.zeros((b.shape[0], a.shape[0]), dtype=complex)
    r = int(np.sum(sv > rank_tol * sv[0]))
    g = (b @ vh[:r].conj().T / sv[:r]) @ u[:, :r].conj().T
    resid = spectral_norm(g @ a - b)
    if resid > 100 * rank_tol * (1.0 + spectral_norm(b)):
        raise Inconsistent(f"targets do not factor through generators (residual {resid:.3e})")
    return g


def nearest_unitary(m) -> np.ndarray:
    """Polar factor of a square full-rank matrix: the closest unitary in
    Frobenius distance."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError("nearest_unitary requires a square matrix")
    if a.size == 0:
        return np.zeros_like(a)
    u, s, vh = np.linalg.svd(a)
    if s[-1] <= 1e-14 * max(s[0], 1.0):
        raise Singular("matrix is numerically rank deficient")
    return u @ vh


def spectral_norm(m) -> float:
    """Largest singular value (0 for empty matrices)."""
    a = np.atleast_2d(np.asarray(m, dtype=complex))
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def complement_basis(basis: np.ndarray, ambient: int) -> np.ndarray:
    """Orthonormal basis of the orthocomplement of ran(basis) in C^ambient.

    Works through the orthogonal projector, whose spectrum is split {0, 1},
    so the rank decision is unambiguous even when ``basis`` came out of an
    ill-conditioned computation.
    """
    k = basis.shape[1] if basis.size else 0
    if k == 0:
        return np.eye(ambient, dtype=complex)
    p = np.eye(ambient, dtype=complex) - basis @ basis.conj().T
    u, s, _ = np.linalg.svd(p)
    return _phase_normalize(u[:, : ambient - k])


def subtract_subspace(big: np.ndarray, small: np.ndarray) -> np.ndarray:
    """Orthonormal basis of (ran big) minus (ran small), with ran small
    assumed contained in ran big.  Computed in big-coordinates so that a
    numerically-zero difference does not resurrect noise columns."""
    kb = big.shape[1] if big.size else 0
    if kb == 0:
        return big.reshape(big.shape[0], 0)
    coords = big.conj().T @ small  # kb x ks
    if coords.size == 0 or np.linalg.norm(coords) < 1e-12:
        inner = np.zeros((kb, 0), dtype=complex)
    else:
        inner = orthonormal_range(coords, 1e-9).basis
    return big @ complement_basis(inner, kb)


def principal_angles(b1: np.ndarray, b2: np.ndarray) -> np.ndarray:
    """Principal angles between two subspaces given by orthonormal bases."""
    if b1.shape[1] == 0 or b2.shape[1] == 0:
        return np.zeros(0)
    sv = np.linalg.svd(b1.conj().T @ b2, compute_uv=False)
    return np.arccos(np.clip(sv, -1.0, 1.0))


def haar_unitary(rng: np.random.Generator, m: int) -> np.ndarray:
    """Seeded random unitary: QR of a complex Gaussian with the phase fix
    that makes the factor Haar distributed and the output deterministic."""
    if m == 0:
        return np.zeros((0, 0), dtype=complex)
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))

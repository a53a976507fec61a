"""Ball kernel, multiplier kernel Grams, and kernel-section state vectors.

The reproducing kernel of the ambient space is ``1 / (1 - <z, w>)`` with
``<z, w> = sum_j z_j conj(w_j)``; a contractive-multiplier candidate phi gets
the kernel ``k_phi(z, w) = (I - phi(z) phi(w)*) / (1 - <z, w>)``, and its
positivity on finite samples is the membership test implemented here.

For a coisometric colligation the kernel factors through the state space:
``k_phi(z, w) = C (I - Z_z A)^{-1} (I - A* Z_w*)^{-1} C*``, so the section
``k_phi(., w) y`` is carried by the state ``g_{w,y} = (I - A* Z_w*)^{-1} C* y``
with matching Gram matrices.  ``check_realization_identity`` certifies that
identification numerically instead of assuming it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .colligation import Colligation, as_point, eval_transfer
from .errors import Pole, SingularResolvent
from .linalg import spectral_norm

__all__ = [
    "da_kernel",
    "kphi_value",
    "GramReport",
    "kphi_gram",
    "kernel_state",
    "check_realization_identity",
    "monomial_norm_sq",
    "ball_points",
]


def ball_inner(z, w) -> complex:
    """<z, w> = sum z_j conj(w_j)."""
    zz = np.asarray(z, dtype=complex).reshape(-1)
    ww = np.asarray(w, dtype=complex).reshape(-1)
    return complex(np.sum(zz * np.conj(ww)))


def da_kernel(z, w) -> complex:
    """Scalar ball kernel 1 / (1 - <z, w>)."""
    denom = 1.0 - ball_inner(z, w)
    if abs(denom) <= 1e-14:
        raise Pole("kernel pole: <z, w> = 1")
    return 1.0 / denom


def kphi_value(u: Colligation, z, w) -> np.ndarray:
    """k_phi(z, w) = (I - phi(z) phi(w)*) / (1 - <z, w>) as a q x q matrix."""
    denom = 1.0 - ball_inner(z, w)
    if abs(denom) <= 1e-14:
        raise Pole("kernel pole: <z, w> = 1")
    num = np.eye(u.q) - eval_transfer(u, z) @ eval_transfer(u, w).conj().T
    return num / denom


@dataclass(frozen=True)
class GramReport:
    gram: np.ndarray
    min_eigenvalue: float
    psd: bool
    tol: float


def kphi_gram(u: Colligation, points, vectors=None, tol: float = 1e-9) -> GramReport:
    """Gram matrix of kernel sections k_phi(., w_i) y_i.

    ``vectors`` holds one output-space vector per point; omitting it expands
    every point over the full standard basis of Y, making the Gram the block
    kernel matrix.  The PSD verdict is an eigenvalue test on the assembled
    (symmetrized) Gram, not an entrywise check.
    """
    pts = [as_point(w, u.d) for w in points]
    if vectors is None:
        pairs = [(w, np.eye(u.q, dtype=complex)[:, i]) for w in pts for i in range(u.q)]
    else:
        if len(vectors) != len(pts):
            from .errors import DimensionMismatch

            raise DimensionMismatch("need one vector per point")
        pairs = [(w, np.asarray(y, dtype=complex).reshape(u.q)) for w, y in zip(pts, vectors)]
    m = len(pairs)
    gram = np.zeros((m, m), dtype=complex)
    values: dict[tuple[int, int], np.ndarray] = {}
    for i in range(len(pts)):
        for j in range(len(pts)):
            values[(i, j)] = kphi_value(u, pts[i], pts[j])
    if vectors is None:
        point_idx = [k for k in range(len(pts)) for _ in range(u.q)]
    else:
        point_idx = list(range(len(pts)))
    for a in range(m):
        for b in range(m):
            wa, ya = pairs[a]
            wb, yb = pairs[b]
            kv = values[(point_idx[a], point_idx[b])]
            gram[a, b] = ya.conj() @ kv @ yb
    gram = (gram + gram.conj().T) / 2.0
    eig_min = float(np.min(np.linalg.eigvalsh(gram))) if m else 0.0
    return GramReport(gram=gram, min_eigenvalue=eig_min, psd=bool(eig_min >= -tol), tol=tol)


def kernel_state(u: Colligation, w) -> np.ndarray:
    """States of the kernel sections at w: the n x q matrix
    ``(I - A* Z_w*)^{-1} C*`` whose columns are g_{w, e_i}."""
    ww = as_point(w, u.d)
    if u.n == 0:
        return np.zeros((0, u.q), dtype=complex)
    zwa = sum(np.conj(ww[j]) * u.A[j].conj().T for j in range(u.d))
    res = np.eye(u.n) - zwa
    sv = np.linalg.svd(res, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        raise SingularResolvent("I - A* Z_w* is numerically singular")
    return np.linalg.solve(res, u.C.conj().T)


def check_realization_identity(u: Colligation, points, tol: float = 1e-10) -> float:
    """Max over point pairs of || k_phi(z, w) - C R_z R_w* C* ||.

    Small for genuinely coisometric colligations; the residual itself is the
    result so callers can use it as a positive or negative control.
    """
    pts = [as_point(w, u.d) for w in points]
    states = [kernel_state(u, w) for w in pts]
    worst = 0.0
    for i, z in enumerate(pts):
        for j, w in enumerate(pts):
            lhs = kphi_value(u, z, w)
            rhs = states[i].conj().T @ states[j]
            worst = max(worst, spectral_norm(lhs - rhs))
    return worst


def monomial_norm_sq(alpha) -> float:
    """Squared norm of the monomial z^alpha in the ball space: alpha!/|alpha|!."""
    a = [int(x) for x in alpha]
    if any(x < 0 for x in a):
        raise ValueError("multi-index entries must be >= 0")
    total = sum(a)
    num = 1.0
    for x in a:
        num *= math.factorial(x)
    return num / math.factorial(total)


def ball_points(d: int, count: int, seed: int, rmax: float = 0.9) -> list[np.ndarray]:
    """Seeded sample of interior points: uniform direction, radius drawn as
    rmax * u^(1/(2d)) to stay clear of the boundary pole."""
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(count):
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        nv = np.linalg.norm(v)
        if nv == 0:
            v, nv = np.ones(d, dtype=complex), float(np.sqrt(d))
        r = rmax * rng.random() ** (1.0 / (2 * d))
        pts.append(r * v / nv)
    return pts

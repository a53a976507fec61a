"""Colligations (block operators), transfer functions, Taylor coefficients.

A colligation is the block operator

    U = (A  B; C  D) : X (+) U  ->  X^d (+) Y

with A stacked from d square blocks A_1..A_d and B from blocks B_1..B_d.
Its transfer function is ``phi(z) = D + C (I - ZA)^{-1} Z B`` where
``Z = (z_1 I, ..., z_d I)`` is the row tuple of a point in the unit ball.
State dimension 0 is fully supported and degenerates to ``phi == D``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InputError, SingularResolvent
from .linalg import haar_unitary, spectral_norm

__all__ = [
    "Colligation",
    "ColligationClass",
    "classify",
    "eval_transfer",
    "taylor_coeffs",
    "pad_input",
    "random_colligation",
    "multi_indices",
    "as_point",
]

CLASS_ORDER = ["Unitary", "Coisometric", "Isometric", "Contractive", "None"]


def multi_indices(d: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices alpha with |alpha| <= order, graded lexicographic."""
    out: list[tuple[int, ...]] = []
    for m in range(order + 1):
        for comb in itertools.combinations_with_replacement(range(d), m):
            alpha = [0] * d
            for j in comb:
                alpha[j] += 1
            out.append(tuple(alpha))
    return out


def as_point(z, d: int) -> np.ndarray:
    """Coerce a point of C^d; callers may pass boundary/exterior points for
    negative tests, so no ball-membership check happens here."""
    arr = np.asarray(z, dtype=complex).reshape(-1)
    if arr.shape[0] != d:
        raise DimensionMismatch(f"point has {arr.shape[0]} coordinates, expected {d}")
    return arr


@dataclass(frozen=True)
class Colligation:
    """Immutable value type for the block operator (A B; C D)."""

    d: int
    n: int
    p: int
    q: int
    A: tuple[np.ndarray, ...]
    B: tuple[np.ndarray, ...]
    C: np.ndarray
    D: np.ndarray

    @staticmethod
    def create(d, n, p, q, A, B, C, D) -> "Colligation":
        if d < 1:
            raise InputError("d must be >= 1")
        if min(n, p, q) < 0:
            raise InputError("dimensions must be nonnegative")
        A = tuple(np.asarray(a, dtype=complex).reshape(n, n) for a in A)
        B = tuple(np.asarray(b, dtype=complex).reshape(n, p) for b in B)
        C = np.asarray(C, dtype=complex).reshape(q, n)
        D = np.asarray(D, dtype=complex).reshape(q, p)
        if len(A) != d or len(B) != d:
            raise DimensionMismatch("need exactly d blocks in A and B")
        u = Colligation(d, n, p, q, A, B, C, D)
        if not np.all(np.isfinite(u.matrix)):
            raise InputError("colligation entries must be finite")
        return u

    @property
    def matrix(self) -> np.ndarray:
        """The stacked (dn+q) x (n+p) operator X (+) U -> X^d (+) Y."""
        rows = [np.hstack([self.A[j], self.B[j]]) for j in range(self.d)]
        rows.append(np.hstack([self.C, self.D]))
        return np.vstack(rows)

    def a_stack(self) -> np.ndarray:
        """A as a dn x n column of blocks."""
        return np.vstack(self.A) if self.n else np.zeros((0, 0), dtype=complex)

    def b_stack(self) -> np.ndarray:
        """B as a dn x p column of blocks."""
        return np.vstack(self.B) if self.n else np.zeros((0, self.p), dtype=complex)

    def to_dict(self) -> dict:
        from .serialize import encode_matrix

        return {
            "d": self.d,
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "A": [encode_matrix(a) for a in self.A],
            "B": [encode_matrix(b) for b in self.B],
            "C": encode_matrix(self.C),
            "D": encode_matrix(self.D),
        }

    @staticmethod
    def from_dict(data: dict) -> "Colligation":
        from .serialize import decode_matrix

        try:
            d, n, p, q = (int(data[k]) for k in ("d", "n", "p", "q"))
            A = [decode_matrix(a, (n, n)) for a in data["A"]]
            B = [decode_matrix(b, (n, p)) for b in data["B"]]
            C = decode_matrix(data["C"], (q, n))
            D = decode_matrix(data["D"], (q, p))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad colligation payload: {exc}") from exc
        return Colligation.create(d, n, p, q, A, B, C, D)


@dataclass(frozen=True)
class ColligationClass:
    """Classification verdict with the defect norms it was based on."""

    verdict: str
    residuals: dict = field(default_factory=dict)


def classify(u: Colligation, tol: float) -> ColligationClass:
    """Strongest of Unitary / Coisometric / Isometric / Contractive whose
    defect norm is within ``tol``; enlarging ``tol`` never weakens the verdict."""
    m = u.matrix
    rows, cols = u.d * u.n + u.q, u.n + u.p
    co = spectral_norm(m @ m.conj().T - np.eye(rows))
    iso = spectral_norm(m.conj().T @ m - np.eye(cols))
    sig = spectral_norm(m)
    contr = max(0.0, sig - 1.0)
    residuals = {
        "coisometry": co,
        "isometry": iso,
        "contraction": contr,
        "norm": sig,
    }
    if co <= tol and iso <= tol:
        verdict = "Unitary"
    elif co <= tol:
        verdict = "Coisometric"
    elif iso <= tol:
        verdict = "Isometric"
    elif contr <= tol:
        verdict = "Contractive"
    else:
        verdict = "None"
    return ColligationClass(verdict, residuals)


def eval_transfer(u: Colligation, z) -> np.ndarray:
    """phi(z) = D + C (I - ZA)^{-1} ZB, the q x p transfer value at z."""
    zz = as_point(z, u.d)
    if u.n == 0:
        return u.D.copy()
    za = sum(zz[j] * u.A[j] for j in range(u.d))
    zb = sum(zz[j] * u.B[j] for j in range(u.d))
    res = np.eye(u.n) - za
    # cheap conditioning guard; the resolvent is safe for contractions on the ball
    sv = np.linalg.svd(res, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        raise SingularResolvent("I - ZA is numerically singular at this point")
    return u.D + u.C @ np.linalg.solve(res, zb)


def taylor_coeffs(u: Colligation, order: int) -> dict[tuple[int, ...], np.ndarray]:
    """Taylor coefficients of the transfer function through |alpha| <= order.

    The coefficient of z^alpha is D at alpha = 0 and otherwise the word sum
    C A_{w_1}...A_{w_{m-1}} B_{w_m} over words of type alpha, accumulated by
    the degree recursion M_alpha = sum_j A_j M_{alpha - e_j} (never by
    enumerating words).
    """
    if order < 0:
        raise InputError("order must be >= 0")
    coeffs: dict[tuple[int, ...], np.ndarray] = {}
    partial: dict[tuple[int, ...], np.ndarray] = {}
    for alpha in multi_indices(u.d, order):
        m = sum(alpha)
        if m == 0:
            coeffs[alpha] = u.D.copy()
            continue
        if u.n == 0:
            coeffs[alpha] = np.zeros((u.q, u.p), dtype=complex)
            continue
        if m == 1:
            partial[alpha] = u.B[alpha.index(1)].astype(complex)
        else:
            acc = np.zeros((u.n, u.p), dtype=complex)
            for j in range(u.d):
                if alpha[j]:
                    prev = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
                    acc += u.A[j] @ partial[prev]
            partial[alpha] = acc
        coeffs[alpha] = u.C @ partial[alpha]
    return coeffs


def pad_input(u: Colligation, m_dim: int) -> Colligation:
    """Append ``m_dim`` zero input columns: transfer becomes [phi(z) | 0].

    Zero columns leave U U* untouched, so a coisometric verdict survives.
    """
    if m_dim < 0:
        raise InputError("m_dim must be >= 0")
    if m_dim == 0:
        return u
    B = [np.hstack([b, np.zeros((u.n, m_dim))]) for b in u.B]
    D = np.hstack([u.D, np.zeros((u.q, m_dim))])
    return Colligation.create(u.d, u.n, u.p + m_dim, u.q, u.A, B, u.C, D)


def random_colligation(d: int, n: int, p: int, q: int, class_target: str,
                       seed: int) -> Colligation:
    """Seeded generator reaching ``class_target`` by orthonormalizing a
    complex Gaussian: a full square unitary, its first dn+q rows for a
    coisometry, or its first n+p columns for an isometry."""
    rows, cols = d * n + q, n + p
    rng = np.random.default_rng(seed)
    if class_target == "Unitary":
        if rows != cols:
            raise DimensionMismatch(f"unitary needs n+p = dn+q, got {cols} != {rows}")
        m = haar_unitary(rng, rows)
    elif class_target == "Coisometric":
        if cols < rows:
            raise DimensionMismatch(f"coisometric needs n+p >= dn+q, got {cols} < {rows}")
        m = haar_unitary(rng, cols)[:rows, :]
    elif class_target == "Isometric":
        if cols > rows:
            raise DimensionMismatch(f"isometric needs n+p <= dn+q, got {cols} > {rows}")
        m = haar_unitary(rng, rows)[:, :cols]
    elif class_target == "Contractive":
        g = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
        m = 0.9 * g / max(spectral_norm(g), 1e-12)
    else:
        raise InputError(f"unknown class target {class_target!r}")
    A = [m[j * n:(j + 1) * n, :n] for j in range(d)]
    B = [m[j * n:(j + 1) * n, n:] for j in range(d)]
    return Colligation.create(d, n, p, q, A, B, m[d * n:, :n], m[d * n:, n:])

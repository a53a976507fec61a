"""State-coordinate model apparatus for functional-model colligations.

The model space of a multiplier is represented by the state space of an
observable coisometric (or weakly coisometric) realization, with the
Euclidean inner product.  That identification is never assumed: it is
certified by :func:`verify_functional_model` (observability plus the
backward-shift compatibility of the A-blocks, checked in Taylor
coordinates) together with the kernel factorization test in
:mod:`schurball.kernels`.

On top of the certified identification we construct, entirely in
coordinates:

* the span closure ``D`` of the shifted kernel-section tuples inside X^d
  and its orthocomplement, via exact Taylor-coefficient generators;
* the generator-defined map ``R`` on ``D`` (images are adjoint transfer
  differences) and the block operators T11, T12, T22;
* the defect-solved contractions G1, G2;
* the input kernel subspace U0 (joint null space of the coefficients);
* the colligation parameter (the contraction carried by the non-unique
  part of B) and its isometric embedding;
* the input-space reduction that converts any functional-model
  realization into a coisometric one with enlarged input space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .colligation import Colligation, multi_indices, taylor_coeffs
from .config import DEFAULT, Tolerances
from .errors import (Inconsistent, NotContraction, NotObservable,
                     ParameterNotIsometric, SaturationFailure)
from .linalg import (Subspace, complement_basis, orthonormal_range, psd_sqrt,
                     restricted_solve, spectral_norm)

__all__ = [
    "kernel_space",
    "FunctionalModelReport",
    "verify_functional_model",
    "ModelApparatus",
    "build_apparatus",
    "ParameterExtraction",
    "extract_parameter",
    "build_xi_iso",
    "JReduction",
    "j_reduction",
    "difference_quotient_defect",
    "observability_coeffs",
]


def observability_coeffs(u: Colligation, order: int) -> dict[tuple[int, ...], np.ndarray]:
    """Taylor coefficient maps of x -> C (I - ZA)^{-1} x.

    Returns alpha -> q x n matrix C W_alpha with W_alpha the word sum of
    type alpha, built by the degree recursion.
    """
    words: dict[tuple[int, ...], np.ndarray] = {}
    out: dict[tuple[int, ...], np.ndarray] = {}
    for alpha in multi_indices(u.d, order):
        m = sum(alpha)
        if m == 0:
            words[alpha] = np.eye(u.n, dtype=complex)
        else:
            acc = np.zeros((u.n, u.n), dtype=complex)
            for j in range(u.d):
                if alpha[j]:
                    prev = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
                    acc += u.A[j] @ words[prev]
            words[alpha] = acc
        out[alpha] = u.C @ words[alpha]
    return out


def kernel_space(u: Colligation, order: int, rank_tol: float = 1e-9) -> Subspace:
    """Input vectors annihilated by the transfer function at every point:
    the joint null space of all Taylor coefficients through ``order``."""
    coeffs = taylor_coeffs(u, order)
    stack = np.vstack([coeffs[a] for a in coeffs]) if coeffs else np.zeros((0, u.p))
    from .linalg import null_space

    return null_space(stack, rank_tol)


@dataclass(frozen=True)
class FunctionalModelReport:
    passed: bool
    observability_rank: int
    shift_residual: float
    order: int


def verify_functional_model(u: Colligation, order: int, tol: float) -> FunctionalModelReport:
    """Certify that the A-blocks act as the coordinate backward shifts.

    In Taylor coordinates the requirement is, for every state x and every
    direction j, that the coefficients of the image of A_j x equal the
    shifted coefficients of the image of x with weight
    ``(alpha_j + 1) / (|alpha| + 1)`` through degree ``order - 1``.  The
    observability matrix must have full column rank n, otherwise the state
    space carries directions invisible to the model space and the
    identification is invalid.
    """
    if u.n == 0:
        return FunctionalModelReport(True, 0, 0.0, order)
    oc = observability_coeffs(u, order)
    obs = np.vstack([oc[a] for a in oc])
    sv = np.linalg.svd(obs, compute_uv=False)
    rank = int(np.sum(sv > 1e-9 * sv[0])) if sv.size and sv[0] > 0 else 0
    if rank < u.n:
        raise NotObservable(f"observability rank {rank} < state dimension {u.n}")
    worst = 0.0
    for alpha in multi_indices(u.d, order - 1):
        m = sum(alpha)
        for j in range(u.d):
            ae = alpha[:j] + (alpha[j] + 1,) + alpha[j + 1:]
            lhs = oc[alpha] @ u.A[j]
            rhs = (alpha[j] + 1) / (m + 1) * oc[ae]
            worst = max(worst, spectral_norm(lhs - rhs))
    return FunctionalModelReport(worst <= tol, u.n, worst, order)


def difference_quotient_defect(u: Colligation) -> float:
    """Largest eigenvalue of sum_j A_j* A_j + C* C - I (<= 0 means the
    difference-quotient operator inequality holds)."""
    if u.n == 0:
        return 0.0
    acc = u.C.conj().T @ u.C
    for a in u.A:
        acc = acc + a.conj().T @ a
    return float(np.max(np.linalg.eigvalsh(acc - np.eye(u.n))))


def _adjoint_word_blocks(u: Colligation, order: int) -> dict[tuple[int, ...], np.ndarray]:
    """S_gamma = word sums A*_{w_1}...A*_{w_m} C* of type gamma (n x q)."""
    S: dict[tuple[int, ...], np.ndarray] = {}
    for alpha in multi_indices(u.d, order):
        if sum(alpha) == 0:
            S[alpha] = u.C.conj().T.astype(complex)
            continue
        acc = np.zeros((u.n, u.q), dtype=complex)
        for j in range(u.d):
            if alpha[j]:
                prev = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
                acc += u.A[j].conj().T @ S[prev]
        S[alpha] = acc
    return S


@dataclass(frozen=True)
class ModelApparatus:
    """All model operators of one colligation, in fixed coordinates.

    Coordinates: ``D`` and its orthocomplement inside X^d carry the
    orthonormal bases Q1 / Q0; the defect subspace of G1 carries the basis
    ``defect1`` expressed in Q0-coordinates.  Ambient lifts (operators on
    X^d, vanishing off their domain) are provided for basis-independent
    comparisons.
    """

    source: Colligation
    d_phi: Subspace          # subspace of X^d
    d_phi_perp: Subspace
    R_amb: np.ndarray        # p x dn, zero on D_perp
    T11: np.ndarray          # n x m0
    T12: np.ndarray          # n x (m1+q)
    T22: np.ndarray          # p x (m1+q)
    S1: np.ndarray           # n x n defect sqrt (I - T12 T12*)^{1/2}
    S2: np.ndarray           # (m1+q) x (m1+q) defect sqrt (I - T12* T12)^{1/2}
    G1: np.ndarray           # m0 x n
    G2: np.ndarray           # p x (m1+q)
    Delta: np.ndarray        # m0 x m0, (I - G1 G1*)^{1/2}
    defect1: np.ndarray      # m0 x e basis of ran Delta (Q0-coordinates)
    U0: Subspace             # subspace of C^p
    residuals: dict = field(default_factory=dict)

    @property
    def dim_d(self) -> int:
        return self.d_phi.dim

    @property
    def dim_defect(self) -> int:
        return self.defect1.shape[1]

    @property
    def Q1(self) -> np.ndarray:
        return self.d_phi.basis

    @property
    def Q0(self) -> np.ndarray:
        return self.d_phi_perp.basis

    def _embed(self) -> np.ndarray:
        """(m1+q) x (dn+q) coordinate map for the D (+) Y domain."""
        dn = self.source.d * self.source.n
        q = self.source.q
        m1 = self.dim_d
        top = np.hstack([self.Q1.conj().T, np.zeros((m1, q))])
        bot = np.hstack([np.zeros((q, dn)), np.eye(q)])
        return np.vstack([top, bot])

    def t11_ambient(self) -> np.ndarray:
        return self.T11 @ self.Q0.conj().T

    def t12_ambient(self) -> np.ndarray:
        return self.T12 @ self._embed()

    def t22_ambient(self) -> np.ndarray:
        return self.T22 @ self._embed()

    def g1_ambient(self) -> np.ndarray:
        return self.Q0 @ self.G1

    def g2_ambient(self) -> np.ndarray:
        return self.G2 @ self._embed()

    def delta_ambient(self) -> np.ndarray:
        return self.Q0 @ self.Delta @ self.Q0.conj().T

    def defect1_ambient(self) -> np.ndarray:
        return self.Q0 @ self.defect1


def _span_generators(u: Colligation, budget: int, rank_tol: float):
    """Exact generators of D: Taylor coefficients (in conj(w)) of the
    shifted kernel-section states, one dn x q block per multi-index delta
    with |delta| >= 1, slot j carrying S_{delta - e_j}.

    Returns (generator matrix, aligned R-target matrix).  Sweeps degree by
    degree until three degrees in a row add no dimension.
    """
    d, n, p, q = u.d, u.n, u.p, u.q
    dn = d * n
    if n == 0:
        return np.zeros((0, 0), dtype=complex), np.zeros((p, 0), dtype=complex)
    max_deg = max(2, n * d) + 3
    S = _adjoint_word_blocks(u, max_deg)
    coeffs = taylor_coeffs(u, max_deg)
    gen_cols: list[np.ndarray] = []
    tar_cols: list[np.ndarray] = []
    dim_prev, stagnant = 0, 0
    used = 0
    for deg in range(1, max_deg + 1):
        for delta in multi_indices(d, deg):
            if sum(delta) != deg:
                continue
            block = np.zeros((dn, q), dtype=complex)
            for j in range(d):
                if delta[j]:
                    prev = delta[:j] + (delta[j] - 1,) + delta[j + 1:]
                    block[j * n:(j + 1) * n, :] = S[prev]
            gen_cols.append(block)
            tar_cols.append(coeffs[delta].conj().T)  # p x q
            used += 1
        gens = np.hstack(gen_cols)
        dim_now = orthonormal_range(gens, rank_tol).dim
        if dim_now == dim_prev:
            stagnant += 1
            if stagnant >= 3:
                break
        else:
            stagnant = 0
        dim_prev = dim_now
        if used > budget * max(q, 1) * 4 and stagnant == 0 and deg == max_deg:
            raise SaturationFailure("span closure still growing at generation budget")
    else:
        if stagnant == 0:
            raise SaturationFailure("span closure still growing at generation budget")
    return np.hstack(gen_cols), np.hstack(tar_cols)


def build_apparatus(u: Colligation, tolerances: Tolerances = DEFAULT,
                    seed: int = 0) -> ModelApparatus:
    """Assemble the full model apparatus of a certified functional model.

    The seed argument is accepted for interface stability; the span
    construction uses exact coefficient generators and is deterministic.
    """
    rank_tol = tolerances.rank_tol
    report = verify_functional_model(u, max(tolerances.order, 4), tolerances.tol)
    if not report.passed:
        raise Inconsistent(
            f"A-blocks are not the model backward shifts (residual {report.shift_residual:.3e})")
    d, n, p, q = u.d, u.n, u.p, u.q
    dn = d * n
    gens, targets = _span_generators(u, tolerances.samples, rank_tol)
    d_phi = orthonormal_range(gens, rank_tol)
    q0 = complement_basis(d_phi.basis, dn)
    d_perp = Subspace(dn, q0)
    astar = np.hstack([a.conj().T for a in u.A]) if n else np.zeros((0, 0), dtype=complex)
    R_amb = restricted_solve(gens, targets, rank_tol) if n else np.zeros((p, 0), dtype=complex)
    T11 = astar @ q0
    T12 = np.hstack([astar @ d_phi.basis, u.C.conj().T])
    T22 = np.hstack([R_amb @ d_phi.basis, u.D.conj().T])
    S1 = psd_sqrt(np.eye(n) - T12 @ T12.conj().T, rank_tol)
    G1 = restricted_solve(S1, T11.conj().T, rank_tol)
    m1q = T12.shape[1]
    S2 = psd_sqrt(np.eye(m1q) - T12.conj().T @ T12, rank_tol)
    G2 = restricted_solve(S2, T22, rank_tol)
    m0 = q0.shape[1]
    Delta = psd_sqrt(np.eye(m0) - G1 @ G1.conj().T, rank_tol)
    defect1 = orthonormal_range(Delta, rank_tol).basis
    u0 = kernel_space(u, max(2, n * d), rank_tol)
    residuals = {
        "solve_g1": spectral_norm(G1 @ S1 - T11.conj().T),
        "solve_g2": spectral_norm(G2 @ S2 - T22),
        "g1_contraction": max(0.0, spectral_norm(G1) - 1.0),
        "g2_contraction": max(0.0, spectral_norm(G2) - 1.0),
        "t22_perp_u0": spectral_norm(u0.basis.conj().T @ T22),
        "difference_quotient": max(0.0, difference_quotient_defect(u)),
        "shift_residual": report.shift_residual,
    }
    return ModelApparatus(
        source=u, d_phi=d_phi, d_phi_perp=d_perp, R_amb=R_amb,
        T11=T11, T12=T12, T22=T22, S1=S1, S2=S2, G1=G1, G2=G2,
        Delta=Delta, defect1=defect1, U0=u0, residuals=residuals,
    )


@dataclass(frozen=True)
class ParameterExtraction:
    """The non-unique part of B, solved on the G1-defect range."""

    zeta: np.ndarray          # p x m0 (Q0-coordinates), supported on ran Delta
    zeta_defect: np.ndarray   # p x e, action on the defect basis
    isometric: bool
    defect: float             # || zeta* zeta - I || on the defect range
    residuals: dict = field(default_factory=dict)


def extract_parameter(u: Colligation, app: ModelApparatus,
                      rank_tol: float = 1e-9, tol: float = 1e-8) -> ParameterExtraction:
    """Solve ``zeta (I - G1 G1*)^{1/2} = B*|_{D_perp} + G2 T12* G1*``.

    Raises :class:`Inconsistent` when the colligation's B is not of the
    functional-model form: the second block of B* must agree with R on D,
    the right-hand side must factor through the defect square root, and the
    solved parameter must take values in U0.
    """
    bstar = u.b_stack().conj().T  # p x dn
    r_match = spectral_norm((bstar - app.R_amb) @ app.Q1)
    if r_match > 100 * tol * (1.0 + spectral_norm(app.R_amb)):
        raise Inconsistent(f"B*|_D differs from R (residual {r_match:.3e})")
    rhs = bstar @ app.Q0 + app.G2 @ app.T12.conj().T @ app.G1.conj().T
    zeta = restricted_solve(app.Delta, rhs, rank_tol)
    out_of_u0 = spectral_norm(zeta - app.U0.projector() @ zeta)
    if out_of_u0 > 100 * tol * (1.0 + spectral_norm(zeta)):
        raise Inconsistent(f"parameter leaves the input kernel space ({out_of_u0:.3e})")
    ze = zeta @ app.defect1
    e = ze.shape[1]
    defect = spectral_norm(ze.conj().T @ ze - np.eye(e)) if e else 0.0
    residuals = {
        "b_matches_r": r_match,
        "range_in_u0": out_of_u0,
        "solve": spectral_norm(zeta @ app.Delta - rhs),
    }
    return ParameterExtraction(zeta=zeta, zeta_defect=ze, isometric=bool(defect <= tol),
                               defect=defect, residuals=residuals)


def build_xi_iso(xi: np.ndarray, tol: float = 1e-8, rank_tol: float = 1e-9) -> np.ndarray:
    """Isometric embedding of a contraction: h -> xi h (+) (I - xi* xi)^{1/2} h.

    The result stacks xi on top of its defect square root and satisfies
    iota* iota = I.  Raises :class:`NotContraction` when ||xi|| > 1 + tol.
    """
    x = np.atleast_2d(np.asarray(xi, dtype=complex))
    if spectral_norm(x) > 1.0 + tol:
        raise NotContraction(f"||xi|| = {spectral_norm(x):.6f} exceeds 1")
    e = x.shape[1]
    gram = x.conj().T @ x
    dx = psd_sqrt(np.eye(e) - gram, max(rank_tol, tol))
    return np.vstack([x, dx])


@dataclass(frozen=True)
class JReduction:
    """Input-space reduction of a functional-model realization.

    ``J`` maps the enlarged input space N = U (+) defect1 onto the
    orthocomplement of U0 inside U (a partial isometry); the reduced
    colligation realizes phi(z) J coisometrically on the same state and
    output spaces.
    """

    n_space_dim: int
    J: np.ndarray            # p x (p+e)
    xi_iso: np.ndarray       # (p+e) x e: isometry defect1 -> N
    reduced: Colligation


def j_reduction(u: Colligation, app: ModelApparatus, params: ParameterExtraction,
                rank_tol: float = 1e-9) -> JReduction:
    """Build the coisometric realization of the reduced multiplier.

    B of the reduced colligation is assembled from the displayed formula:
    on the D-orthocomplement it is ``-J* G2 T12* G1* + xi_iso (I - G1 G1*)^{1/2}``
    and on D it is ``J* R``, everything expressed in ambient coordinates.
    """
    d, n, p, q = u.d, u.n, u.p, u.q
    dn = d * n
    e = app.dim_defect
    pu0_perp = np.eye(p) - app.U0.projector()
    J = np.hstack([pu0_perp, np.zeros((p, e))])
    # values of the parameter live in U0 inside C^p; the defect rows form the
    # e-dimensional tail of N, so the isometric embedding is (p+e) x e
    xi_iso = build_xi_iso(params.zeta_defect, rank_tol=rank_tol) if e else \
        np.zeros((p, 0), dtype=complex)
    chain = app.G2 @ app.T12.conj().T @ app.G1.conj().T      # p x m0, values in U0-perp
    term_perp = np.vstack([-pu0_perp @ chain, np.zeros((e, app.Q0.shape[1]))]) \
        + xi_iso @ app.defect1.conj().T @ app.Delta          # (p+e) x m0
    r_part = np.vstack([pu0_perp @ app.R_amb, np.zeros((e, dn))])
    bj_star = term_perp @ app.Q0.conj().T + r_part @ (app.Q1 @ app.Q1.conj().T)
    bj = bj_star.conj().T                                    # dn x (p+e)
    Bs = [bj[j * n:(j + 1) * n, :] for j in range(d)] if n else \
        [np.zeros((0, p + e), dtype=complex) for _ in range(d)]
    reduced = Colligation.create(d, n, p + e, q, u.A, Bs, u.C, u.D @ J)
    return JReduction(n_space_dim=p + e, J=J, xi_iso=xi_iso, reduced=reduced)

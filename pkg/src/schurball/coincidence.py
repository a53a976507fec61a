"""Coincidence of two multipliers and unitary coincidence of colligations.

Two transfer functions phi, psi coincide when unitary input/output rotations
alpha, beta satisfy ``beta phi(z) = psi(z) alpha`` on the whole ball; two
colligations are unitarily coincident when three unitaries (Lambda on
states, Omega1 on inputs, Omega2 on outputs) intertwine their block
operators.  This module decides the first notion by linear algebra on
Taylor coefficients plus an alternating unitary projection, constructs
witnesses for the second from the model apparatus, and converts witnesses
both ways.

The existential search is a heuristic: ``unknown`` is an honest verdict.
Everything returned as a witness has been re-verified; nothing is returned
on trust.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .colligation import Colligation, classify, eval_transfer, multi_indices, taylor_coeffs
from .config import DEFAULT, Tolerances
from .errors import (DimensionMismatch, Inconsistent, KernelDimMismatch,
                     NotCoisometric, NotUnitary, ParameterNotIsometric)
from .kernels import ball_points
from .linalg import (complement_basis, haar_unitary, nearest_unitary,
                     orthonormal_range, principal_angles, restricted_solve,
                     spectral_norm, subtract_subspace)
from .model import (ModelApparatus, ParameterExtraction, _adjoint_word_blocks,
                    build_apparatus, extract_parameter, j_reduction, kernel_space)

__all__ = [
    "CoincidenceWitness",
    "UnitaryCoincidenceWitness",
    "GammaMap",
    "verify_coincidence",
    "solve_coincidence",
    "build_gamma",
    "verify_intertwinings",
    "verify_unitary_coincidence",
    "construct_unitary_coincidence",
    "coincidence_from_unitary",
    "coincide_pipeline",
    "PipelineReport",
    "seeded_tau",
]


@dataclass(frozen=True)
class CoincidenceWitness:
    alpha: np.ndarray   # input rotation U -> V
    beta: np.ndarray    # output rotation Y -> W
    residual: float


@dataclass(frozen=True)
class UnitaryCoincidenceWitness:
    """Witness for the block intertwining of two colligations.

    The certified identity is ``(Lambda^d (+) Omega2) U1' = U2' (Lambda (+)
    Omega1)`` where (U1', U2') equals (pad(u1, pad_dim), u2) when
    padded_side == "left" and (u1, pad(u2, pad_dim)) otherwise.
    """

    Lambda: np.ndarray
    Omega1: np.ndarray
    Omega2: np.ndarray
    pad_dim: int
    padded_side: str  # "left" | "right"
    residual: float


@dataclass(frozen=True)
class GammaMap:
    """The canonical model-space isomorphism determined by beta."""

    gamma: np.ndarray
    gram_deviation: float
    unitarity_defect: float


def _unitarity_defect(m: np.ndarray) -> float:
    k = m.shape[1]
    if k == 0:
        return 0.0
    return spectral_norm(m.conj().T @ m - np.eye(k))


def verify_coincidence(uphi: Colligation, upsi: Colligation, alpha, beta,
                       tolerances: Tolerances = DEFAULT, n_points: int = 20,
                       seed: int = 0) -> CoincidenceWitness:
    """Residual of ``beta phi - psi alpha`` over Taylor coefficients through
    the configured order and over seeded sample points."""
    if uphi.d != upsi.d or uphi.p != upsi.p or uphi.q != upsi.q:
        raise DimensionMismatch("coincidence needs matching d, p, q")
    a = np.asarray(alpha, dtype=complex).reshape(upsi.p, uphi.p)
    b = np.asarray(beta, dtype=complex).reshape(upsi.q, uphi.q)
    if _unitarity_defect(a) > 1e-6 or _unitarity_defect(b) > 1e-6:
        raise NotUnitary("alpha and beta must be unitary")
    order = max(tolerances.order, _kernel_order(uphi), _kernel_order(upsi))
    cphi = taylor_coeffs(uphi, order)
    cpsi = taylor_coeffs(upsi, order)
    res = 0.0
    for idx in cphi:
        res = max(res, spectral_norm(b @ cphi[idx] - cpsi[idx] @ a))
    for z in ball_points(uphi.d, n_points, seed):
        res = max(res, spectral_norm(b @ eval_transfer(uphi, z) - eval_transfer(upsi, z) @ a))
    return CoincidenceWitness(alpha=a, beta=b, residual=res)


def _kernel_order(u: Colligation) -> int:
    return max(2, u.n * u.d)


def _coefficient_system(uphi, upsi, order):
    """Stack beta phi_g - psi_g alpha = 0 into a matrix acting on
    (vec beta, vec alpha), column-major vec convention."""
    p, q = uphi.p, uphi.q
    cphi = taylor_coeffs(uphi, order)
    cpsi = taylor_coeffs(upsi, order)
    rows = []
    for idx in cphi:
        ph, ps = cphi[idx], cpsi[idx]
        rows.append(np.hstack([np.kron(ph.T, np.eye(q)), -np.kron(np.eye(p), ps)]))
    return np.vstack(rows) if rows else np.zeros((0, q * q + p * p)), cphi, cpsi


def solve_coincidence(uphi: Colligation, upsi: Colligation,
                      tolerances: Tolerances = DEFAULT, max_iter: int = 400,
                      seed: int = 0):
    """Decide coincidence. Returns (verdict, witness-or-None) with verdict
    one of "coincident", "not_coincident", "unknown".

    The coefficient constraints are linear in (beta, alpha); their null
    space is computed once, then candidates are driven to the unitary pair
    manifold by alternating nearest-unitary projection and null-space
    re-projection.  Candidates are only accepted after re-verification, and
    an exhausted iteration budget is reported as unknown, never as a
    verdict.
    """
    p, q = uphi.p, uphi.q
    if uphi.d != upsi.d or p != upsi.p or q != upsi.q:
        return "not_coincident", None
    # necessary conditions first: kernel dimensions and pointwise singular values
    u0_phi = kernel_space(uphi, _kernel_order(uphi), tolerances.rank_tol)
    u0_psi = kernel_space(upsi, _kernel_order(upsi), tolerances.rank_tol)
    if u0_phi.dim != u0_psi.dim:
        return "not_coincident", None
    for z in ball_points(uphi.d, 5, seed + 17):
        sv1 = np.linalg.svd(eval_transfer(uphi, z), compute_uv=False)
        sv2 = np.linalg.svd(eval_transfer(upsi, z), compute_uv=False)
        if sv1.size and np.max(np.abs(sv1 - sv2)) > 1e-6:
            return "not_coincident", None
    order = max(tolerances.order, _kernel_order(uphi), _kernel_order(upsi))
    system, cphi, cpsi = _coefficient_system(uphi, upsi, order)
    if q * q + p * p == 0:
        return "coincident", CoincidenceWitness(np.zeros((0, 0)), np.zeros((0, 0)), 0.0)
    if system.size:
        _, sv, vh = np.linalg.svd(system)
        rank = int(np.sum(sv > 1e-10 * sv[0])) if sv.size and sv[0] > 0 else 0
        null = vh[rank:].conj().T  # (q^2+p^2) x nullity
    else:
        null = np.eye(q * q + p * p, dtype=complex)
    if null.shape[1] == 0:
        return "not_coincident", None

    def split(vec):
        b = vec[: q * q].reshape(q, q, order="F")
        a = vec[q * q:].reshape(p, p, order="F")
        return b, a

    def merge(b, a):
        return np.concatenate([b.flatten(order="F"), a.flatten(order="F")])

    def coeff_residual(a, b):
        worst = 0.0
        for idx in cphi:
            worst = max(worst, spectral_norm(b @ cphi[idx] - cpsi[idx] @ a))
        return worst

    rng = np.random.default_rng(seed)
    starts = [merge(np.eye(q, dtype=complex), np.eye(p, dtype=complex))]
    for _ in range(3):
        starts.append(merge(haar_unitary(rng, q), haar_unitary(rng, p)))
    per_start = max(1, max_iter // len(starts))
    for start in starts:
        vec = null @ (null.conj().T @ start)
        found = None
        for _ in range(per_start):
            b, a = split(vec)
            if (q and np.linalg.svd(b, compute_uv=False)[-1] < 1e-12) or \
               (p and np.linalg.svd(a, compute_uv=False)[-1] < 1e-12):
                fresh = merge(haar_unitary(rng, q), haar_unitary(rng, p))
                vec = null @ (null.conj().T @ fresh)
                continue
            b = nearest_unitary(b) if q else b
            a = nearest_unitary(a) if p else a
            r = coeff_residual(a, b)
            if found is None or r < found[0]:
                found = (r, a, b)
            if r <= tolerances.tol:
                break
            vec = null @ (null.conj().T @ merge(b, a))
        if found is None or found[0] > tolerances.tol:
            continue
        # converged: keep polishing while the alternating step still helps
        r, a, b = found
        stale = 0
        cur_a, cur_b = a, b
        for _ in range(400):
            vec = null @ (null.conj().T @ merge(cur_b, cur_a))
            cur_b, cur_a = split(vec)
            cur_b, cur_a = nearest_unitary(cur_b), nearest_unitary(cur_a)
            r2 = coeff_residual(cur_a, cur_b)
            if r2 < r:
                r, a, b = r2, cur_a, cur_b
                stale = 0
            else:
                stale += 1
                if stale >= 10:
                    break
            if r < 1e-14:
                break
        witness = verify_coincidence(uphi, upsi, a, b, tolerances, seed=seed)
        if witness.residual <= tolerances.tol:
            return "coincident", witness
    return "unknown", None


def build_gamma(uphi: Colligation, upsi: Colligation, beta,
                tolerances: Tolerances = DEFAULT, seed: int = 0) -> GammaMap:
    """Solve for the model-space map sending kernel sections of phi to the
    beta-rotated kernel sections of psi.

    Exact generators: the Taylor coefficient families of the kernel states
    on both sides.  The Gram-preservation deviation is the coincidence norm
    identity; a wrong beta shows up either there or as an inconsistent
    solve.
    """
    if uphi.q != upsi.q:
        raise DimensionMismatch("output dimensions differ")
    b = np.asarray(beta, dtype=complex).reshape(upsi.q, uphi.q)
    order = max(_kernel_order(uphi), _kernel_order(upsi), 2)
    s_phi = _adjoint_word_blocks(uphi, order)
    s_psi = _adjoint_word_blocks(upsi, order)
    gens = np.hstack([s_phi[g] for g in s_phi]) if uphi.n else np.zeros((0, 0), dtype=complex)
    tars = np.hstack([s_psi[g] @ b for g in s_psi]) if upsi.n else \
        np.zeros((0, gens.shape[1] if gens.size else 0), dtype=complex)
    if uphi.n == 0 and upsi.n == 0:
        return GammaMap(np.zeros((0, 0), dtype=complex), 0.0, 0.0)
    gram_dev = spectral_norm(gens.conj().T @ gens - tars.conj().T @ tars)
    if gram_dev > 1e-6 * max(1.0, spectral_norm(gens) ** 2):
        raise Inconsistent(f"kernel Grams disagree under beta ({gram_dev:.3e})")
    gamma = restricted_solve(gens, tars, tolerances.rank_tol)
    return GammaMap(gamma=gamma, gram_deviation=gram_dev,
                    unitarity_defect=_unitarity_defect(gamma))


def _gamma_d(gamma: np.ndarray, d: int) -> np.ndarray:
    return np.kron(np.eye(d), gamma)


def verify_intertwinings(gamma: np.ndarray, app_phi: ModelApparatus,
                         app_psi: ModelApparatus, alpha, beta,
                         tol: float = 1e-8) -> dict:
    """Residuals of every intertwining the model apparatus must satisfy for
    a coincident pair, in ambient (basis-independent) form."""
    uphi, upsi = app_phi.source, app_psi.source
    d = uphi.d
    a = np.asarray(alpha, dtype=complex).reshape(upsi.p, uphi.p)
    b = np.asarray(beta, dtype=complex).reshape(upsi.q, uphi.q)
    gd = _gamma_d(gamma, d)
    p0_phi = app_phi.d_phi_perp.projector()
    res: dict[str, float] = {}
    shift = 0.0
    for j in range(d):
        shift = max(shift, spectral_norm(gamma @ uphi.A[j] - upsi.A[j] @ gamma))
    res["backward_shift"] = shift
    angles = principal_angles(gd @ app_phi.Q1, app_psi.Q1)
    res["gamma_maps_d"] = float(np.max(angles)) if angles.size else 0.0
    res["t11"] = spectral_norm(gamma @ app_phi.t11_ambient()
                               - app_psi.t11_ambient() @ gd @ p0_phi)
    dn_phi, q_phi = d * uphi.n, uphi.q
    blk = np.block([
        [gd, np.zeros((d * upsi.n, q_phi))],
        [np.zeros((upsi.q, dn_phi)), b],
    ])
    res["t12"] = spectral_norm(gamma @ app_phi.t12_ambient() - app_psi.t12_ambient() @ blk)
    res["t22"] = spectral_norm(a @ app_phi.t22_ambient() - app_psi.t22_ambient() @ blk)
    res["g1"] = spectral_norm(gd @ app_phi.g1_ambient() - app_psi.g1_ambient() @ gamma)
    res["g2"] = spectral_norm(a @ app_phi.g2_ambient() - app_psi.g2_ambient() @ blk)
    res["defect"] = spectral_norm((gd @ app_phi.delta_ambient()
                                   - app_psi.delta_ambient() @ gd) @ p0_phi)
    res["kernel_map"] = spectral_norm(
        (np.eye(upsi.p) - app_psi.U0.projector()) @ a @ app_phi.U0.projector())
    res["passed"] = all(v <= tol for k, v in res.items() if k != "passed")
    return res


def verify_unitary_coincidence(u1: Colligation, u2: Colligation,
                               w: UnitaryCoincidenceWitness,
                               tolerances: Tolerances = DEFAULT,
                               n_points: int = 20, seed: int = 0) -> dict:
    """Residual of the block intertwining identity, plus the transfer
    agreement it implies at seeded points."""
    from .colligation import pad_input

    left = pad_input(u1, w.pad_dim) if w.padded_side == "left" else u1
    right = u2 if w.padded_side == "left" else pad_input(u2, w.pad_dim)
    lam = np.asarray(w.Lambda, dtype=complex).reshape(right.n, left.n)
    o1 = np.asarray(w.Omega1, dtype=complex).reshape(right.p, left.p)
    o2 = np.asarray(w.Omega2, dtype=complex).reshape(right.q, left.q)
    if left.d != right.d:
        raise DimensionMismatch("variable counts differ")
    for m in (lam, o1, o2):
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatch("witness blocks must be square after padding")
    d = left.d
    lhs = np.block([
        [np.kron(np.eye(d), lam), np.zeros((d * right.n, left.q))],
        [np.zeros((right.q, d * left.n)), o2],
    ]) @ left.matrix
    rhs = right.matrix @ np.block([
        [lam, np.zeros((right.n, left.p))],
        [np.zeros((right.p, left.n)), o1],
    ])
    block_res = spectral_norm(lhs - rhs)
    transfer_res = 0.0
    for z in ball_points(d, n_points, seed):
        transfer_res = max(transfer_res, spectral_norm(
            o2 @ eval_transfer(left, z) - eval_transfer(right, z) @ o1))
    return {
        "block": block_res,
        "transfer": transfer_res,
        "residual": max(block_res, transfer_res),
        "passed": max(block_res, transfer_res) <= tolerances.tol,
    }


def _require_coisometric(u: Colligation, tol: float):
    verdict = classify(u, tol * 100)
    if verdict.verdict not in ("Unitary", "Coisometric"):
        raise NotCoisometric(
            f"colligation is {verdict.verdict} (coisometry defect "
            f"{verdict.residuals['coisometry']:.3e})")


def construct_unitary_coincidence(uphi: Colligation, upsi: Colligation, alpha, beta,
                                  tolerances: Tolerances = DEFAULT, seed: int = 0):
    """Build a unitary-coincidence witness from a coincidence witness.

    Steps: certify both colligations, build the model-space map and both
    apparatuses, extract the (necessarily isometric) parameters, reconcile
    the kernel-space coranks by zero-column padding, transport the
    parameter ranges through the defect intertwining, and fill the
    orthocomplement with a deterministic basis-to-basis unitary.  The
    witness is re-verified before being returned.

    Returns (padded colligation, witness).
    """
    _require_coisometric(uphi, tolerances.tol)
    _require_coisometric(upsi, tolerances.tol)
    pre = verify_coincidence(uphi, upsi, alpha, beta, tolerances, seed=seed)
    if pre.residual > 100 * tolerances.tol:
        raise Inconsistent(f"(alpha, beta) is not a coincidence witness ({pre.residual:.3e})")
    a, b = pre.alpha, pre.beta
    gm = build_gamma(uphi, upsi, b, tolerances, seed)
    app1 = build_apparatus(uphi, tolerances, seed)
    app2 = build_apparatus(upsi, tolerances, seed)
    par1 = extract_parameter(uphi, app1, tolerances.rank_tol, tolerances.tol)
    par2 = extract_parameter(upsi, app2, tolerances.rank_tol, tolerances.tol)
    if not par1.isometric or not par2.isometric:
        raise ParameterNotIsometric(
            "a colligation parameter is a strict contraction; run the "
            "reduction pipeline instead")
    ran1 = orthonormal_range(par1.zeta_defect, tolerances.rank_tol).basis
    ran2 = orthonormal_range(par2.zeta_defect, tolerances.rank_tol).basis
    c1 = app1.U0.dim - ran1.shape[1]
    c2 = app2.U0.dim - ran2.shape[1]
    if c1 > c2:
        # pad the other side: same construction with roles swapped, then
        # take adjoints of all three witness blocks
        padded, wsw = construct_unitary_coincidence(
            upsi, uphi, a.conj().T, b.conj().T, tolerances, seed)
        witness = UnitaryCoincidenceWitness(
            Lambda=wsw.Lambda.conj().T, Omega1=wsw.Omega1.conj().T,
            Omega2=wsw.Omega2.conj().T, pad_dim=wsw.pad_dim,
            padded_side="right", residual=wsw.residual)
        check = verify_unitary_coincidence(uphi, upsi, witness, tolerances, seed=seed)
        if not check["passed"]:
            raise Inconsistent(f"witness verification failed ({check['residual']:.3e})")
        return padded, witness
    pad = c2 - c1
    from .colligation import pad_input

    u1p = pad_input(uphi, pad)
    p1, p2 = uphi.p, upsi.p
    # kernel space and parameter of the padded colligation: U0 (+) M, zeta (+) 0
    u0_1p = np.block([
        [app1.U0.basis, np.zeros((p1, pad))],
        [np.zeros((pad, app1.U0.dim)), np.eye(pad)],
    ])
    ran1p = np.vstack([ran1, np.zeros((pad, ran1.shape[1]))])
    ze1p = np.vstack([par1.zeta_defect, np.zeros((pad, par1.zeta_defect.shape[1]))])
    gd = _gamma_d(gm.gamma, uphi.d)
    e1amb = app1.defect1_ambient()
    e2amb = app2.defect1_ambient()
    gd_e = e2amb.conj().T @ gd @ e1amb   # defect1(phi)-coords -> defect1(psi)-coords
    # transported parameter block: forced by the commuting square
    delta = par2.zeta_defect @ gd_e @ ze1p.conj().T @ (ran1p @ ran1p.conj().T)
    comp1 = subtract_subspace(u0_1p, ran1p)
    comp2 = subtract_subspace(app2.U0.basis, ran2)
    if comp1.shape[1] != comp2.shape[1]:
        raise Inconsistent("kernel-space coranks disagree after padding")
    delta_prime = comp2 @ comp1.conj().T
    pu0perp_1p = np.eye(p1 + pad) - u0_1p @ u0_1p.conj().T
    alpha_ext = np.hstack([a, np.zeros((p2, pad))])
    atilde = alpha_ext @ pu0perp_1p + delta + delta_prime
    if _unitarity_defect(atilde) > 1e-6:
        raise Inconsistent("assembled input rotation is not unitary; the pair "
                           "does not satisfy the construction hypotheses")
    witness = UnitaryCoincidenceWitness(
        Lambda=gm.gamma, Omega1=atilde, Omega2=b, pad_dim=pad,
        padded_side="left", residual=0.0)
    check = verify_unitary_coincidence(uphi, upsi, witness, tolerances, seed=seed)
    if check["residual"] > 100 * tolerances.tol:
        raise Inconsistent(f"witness verification failed ({check['residual']:.3e})")
    witness = UnitaryCoincidenceWitness(
        Lambda=gm.gamma, Omega1=atilde, Omega2=b, pad_dim=pad,
        padded_side="left", residual=check["residual"])
    return u1p, witness


def seeded_tau(u1: Colligation, u2: Colligation, seed: int,
               rank_tol: float = 1e-9) -> np.ndarray:
    """Deterministic unitary between the two kernel spaces, as an ambient
    p2 x p1 matrix supported on them."""
    k1 = kernel_space(u1, _kernel_order(u1), rank_tol)
    k2 = kernel_space(u2, _kernel_order(u2), rank_tol)
    if k1.dim != k2.dim:
        raise KernelDimMismatch(f"kernel dims {k1.dim} != {k2.dim}")
    core = haar_unitary(np.random.default_rng(seed), k1.dim)
    return k2.basis @ core @ k1.basis.conj().T


def coincidence_from_unitary(u1: Colligation, u2: Colligation,
                             w: UnitaryCoincidenceWitness, tau=None,
                             tolerances: Tolerances = DEFAULT,
                             seed: int = 0) -> CoincidenceWitness:
    """Recover a coincidence witness from a unitary-coincidence witness.

    The input rotation is assembled blockwise: the witness's input block
    restricted to the orthocomplement of the kernel space, plus an
    arbitrary unitary ``tau`` between the (equal-dimensional) kernel
    spaces.  ``tau`` may be given as an ambient matrix supported on the
    kernel spaces; omitted, a seeded one is used.
    """
    check = verify_unitary_coincidence(u1, u2, w, tolerances, seed=seed)
    if check["residual"] > 100 * tolerances.tol:
        raise Inconsistent(f"unitary-coincidence witness fails ({check['residual']:.3e})")
    k1 = kernel_space(u1, _kernel_order(u1), tolerances.rank_tol)
    k2 = kernel_space(u2, _kernel_order(u2), tolerances.rank_tol)
    if k1.dim != k2.dim:
        raise KernelDimMismatch(f"kernel dims {k1.dim} != {k2.dim}")
    if tau is None:
        tau_m = seeded_tau(u1, u2, seed, tolerances.rank_tol)
    else:
        tau_m = np.asarray(tau, dtype=complex).reshape(u2.p, u1.p)
        sup = spectral_norm(tau_m - k2.projector() @ tau_m @ k1.projector())
        core = k2.basis.conj().T @ tau_m @ k1.basis
        if sup > 1e-8 or _unitarity_defect(core) > 1e-6:
            raise NotUnitary("tau must be unitary between the kernel spaces")
    o1 = np.asarray(w.Omega1, dtype=complex)
    p1_perp = np.eye(u1.p) - k1.projector()
    if w.padded_side == "left":
        emb = np.vstack([np.eye(u1.p), np.zeros((w.pad_dim, u1.p))])
        alpha = o1 @ emb @ p1_perp + tau_m
        beta = np.asarray(w.Omega2, dtype=complex)
    else:
        proj = np.hstack([np.eye(u2.p), np.zeros((u2.p, w.pad_dim))])
        alpha = proj @ o1 @ p1_perp + tau_m
        beta = np.asarray(w.Omega2, dtype=complex)
    witness = verify_coincidence(u1, u2, alpha, beta, tolerances, seed=seed)
    if witness.residual > 100 * tolerances.tol:
        raise Inconsistent(f"recovered witness fails verification ({witness.residual:.3e})")
    return witness


@dataclass(frozen=True)
class PipelineReport:
    verdict: str                       # coincident | not_coincident | unknown
    kernel_dims: tuple[int, int]
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    reduced: bool = False
    witness: UnitaryCoincidenceWitness | None = None
    residuals: dict = field(default_factory=dict)


def coincide_pipeline(uphi: Colligation, upsi: Colligation,
                      tolerances: Tolerances = DEFAULT, seed: int = 0) -> PipelineReport:
    """Full decision pipeline for two functional-model colligations.

    1. decide coincidence of the transfer functions;
    2. when a colligation parameter is a strict contraction, reduce both
       sides to coisometric realizations of the reduced multipliers and
       transport the witness to the enlarged input spaces;
    3. construct and verify the unitary-coincidence witness.
    """
    k1 = kernel_space(uphi, _kernel_order(uphi), tolerances.rank_tol)
    k2 = kernel_space(upsi, _kernel_order(upsi), tolerances.rank_tol)
    verdict, cw = solve_coincidence(uphi, upsi, tolerances, seed=seed)
    if verdict != "coincident":
        return PipelineReport(verdict=verdict, kernel_dims=(k1.dim, k2.dim))
    app1 = build_apparatus(uphi, tolerances, seed)
    app2 = build_apparatus(upsi, tolerances, seed)
    par1 = extract_parameter(uphi, app1, tolerances.rank_tol, tolerances.tol)
    par2 = extract_parameter(upsi, app2, tolerances.rank_tol, tolerances.tol)
    residuals = {"coincidence": cw.residual}
    if par1.isometric and par2.isometric:
        # both already coisometric functional models: no reduction needed
        _, witness = construct_unitary_coincidence(uphi, upsi, cw.alpha, cw.beta,
                                                   tolerances, seed)
        residuals["witness"] = witness.residual
        return PipelineReport(verdict="coincident", kernel_dims=(k1.dim, k2.dim),
                              alpha=cw.alpha, beta=cw.beta, reduced=False,
                              witness=witness, residuals=residuals)
    red1 = j_reduction(uphi, app1, par1, tolerances.rank_tol)
    red2 = j_reduction(upsi, app2, par2, tolerances.rank_tol)
    gm = build_gamma(uphi, upsi, cw.beta, tolerances, seed)
    gd = _gamma_d(gm.gamma, uphi.d)
    gd_e = app2.defect1_ambient().conj().T @ gd @ app1.defect1_ambient()
    e1, e2 = app1.dim_defect, app2.dim_defect
    alpha_lift = np.block([
        [cw.alpha, np.zeros((upsi.p, e1))],
        [np.zeros((e2, uphi.p)), gd_e],
    ])
    lifted = verify_coincidence(red1.reduced, red2.reduced, alpha_lift, cw.beta,
                                tolerances, seed=seed)
    residuals["lifted_coincidence"] = lifted.residual
    _, witness = construct_unitary_coincidence(red1.reduced, red2.reduced,
                                               alpha_lift, cw.beta, tolerances, seed)
    residuals["witness"] = witness.residual
    return PipelineReport(verdict="coincident", kernel_dims=(k1.dim, k2.dim),
                          alpha=cw.alpha, beta=cw.beta, reduced=True,
                          witness=witness, residuals=residuals)

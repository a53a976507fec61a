"""Operation layer: JSON-dict in, JSON-dict out.

Both front ends (the HTTP service and the CLI) call these handlers, so wire
behaviour is defined exactly once.  All handlers take parsed JSON payloads,
a :class:`Tolerances` bundle, and a seed, and return JSON-ready dicts.
"""

from __future__ import annotations

import numpy as np

from .coincidence import (UnitaryCoincidenceWitness, coincide_pipeline,
                          coincidence_from_unitary, verify_unitary_coincidence)
from .colligation import Colligation, classify, eval_transfer, pad_input, random_colligation
from .config import DEFAULT, Tolerances
from .errors import InputError
from .instances import rotated_pair, scalar_shift, truncated_shift, z_squared
from .kernels import kphi_gram
from .model import build_apparatus, extract_parameter, j_reduction, kernel_space
from .serialize import decode_matrix, decode_points, encode_matrix

__all__ = [
    "op_gen", "op_eval", "op_classify", "op_gram", "op_model", "op_jreduce",
    "op_coincide", "op_witness_verify", "op_suite",
    "witness_to_dict", "witness_from_dict",
]


def witness_to_dict(w: UnitaryCoincidenceWitness, reduced: bool) -> dict:
    return {
        "Lambda": encode_matrix(w.Lambda),
        "Omega1": encode_matrix(w.Omega1),
        "Omega2": encode_matrix(w.Omega2),
        "pad_dim": w.pad_dim,
        "padded_side": w.padded_side,
        "reduced": reduced,
        "residual": w.residual,
    }


def witness_from_dict(data: dict) -> tuple[UnitaryCoincidenceWitness, bool]:
    try:
        w = UnitaryCoincidenceWitness(
            Lambda=decode_matrix(data["Lambda"]),
            Omega1=decode_matrix(data["Omega1"]),
            Omega2=decode_matrix(data["Omega2"]),
            pad_dim=int(data.get("pad_dim", 0)),
            padded_side=str(data.get("padded_side", "left")),
            residual=float(data.get("residual", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad witness payload: {exc}") from exc
    if w.padded_side not in ("left", "right"):
        raise InputError("padded_side must be 'left' or 'right'")
    return w, bool(data.get("reduced", False))


def op_gen(kind: str, params: dict, seed: int) -> dict:
    """Fixture generator behind ``gen``: seeded colligations and pairs."""
    d = int(params.get("d", 2))
    if kind in ("unitary", "coisometric", "isometric", "contractive"):
        u = random_colligation(d, int(params.get("n", 1)), int(params.get("p", 1)),
                               int(params.get("q", 1)), kind.capitalize(), seed)
        return u.to_dict()
    if kind == "shift":
        return scalar_shift().to_dict()
    if kind == "zsquared":
        return z_squared().to_dict()
    if kind == "ballshift":
        u = truncated_shift(d, int(params.get("degree", 1)), seed=seed,
                            extra_pad=int(params.get("pad", 0)))
        return u.to_dict()
    if kind == "pair":
        if d == 1:
            base = random_colligation(1, int(params.get("n", 3)), 1, 1, "Unitary", seed)
        else:
            base = truncated_shift(d, int(params.get("degree", 1)), seed=seed,
                                   extra_pad=int(params.get("pad", 0)))
        u, psi, alpha, beta = rotated_pair(base, seed)
        return {
            "phi": u.to_dict(),
            "psi": psi.to_dict(),
            "alpha": encode_matrix(alpha),
            "beta": encode_matrix(beta),
        }
    raise InputError(f"unknown gen kind {kind!r}")


def op_eval(colligation: dict, z, tolerances: Tolerances = DEFAULT) -> dict:
    u = Colligation.from_dict(colligation)
    value = eval_transfer(u, np.asarray(z, dtype=complex))
    return {"value": encode_matrix(value)}


def op_classify(colligation: dict, tolerances: Tolerances = DEFAULT) -> dict:
    u = Colligation.from_dict(colligation)
    verdict = classify(u, tolerances.tol)
    return {"verdict": verdict.verdict,
            "residuals": {k: float(v) for k, v in verdict.residuals.items()}}


def op_gram(colligation: dict, points, vectors=None,
            tolerances: Tolerances = DEFAULT) -> dict:
    u = Colligation.from_dict(colligation)
    pts = decode_points(points, u.d)
    vecs = None
    if vectors is not None:
        vecs = [decode_matrix(v, (u.q, 1)).reshape(u.q) for v in vectors]
    report = kphi_gram(u, pts, vecs, tolerances.tol)
    return {
        "gram": encode_matrix(report.gram),
        "min_eigenvalue": report.min_eigenvalue,
        "psd": report.psd,
        "tol": report.tol,
    }


def op_model(colligation: dict, tolerances: Tolerances = DEFAULT, seed: int = 0) -> dict:
    u = Colligation.from_dict(colligation)
    app = build_apparatus(u, tolerances, seed)
    par = extract_parameter(u, app, tolerances.rank_tol, tolerances.tol)
    return {
        "dims": {
            "d": u.d, "n": u.n, "p": u.p, "q": u.q,
            "d_phi": app.dim_d,
            "d_phi_perp": app.d_phi_perp.dim,
            "defect1": app.dim_defect,
            "u0": app.U0.dim,
        },
        "isometric": par.isometric,
        "parameter_defect": par.defect,
        "residuals": {k: float(v) for k, v in {**app.residuals, **par.residuals}.items()},
    }


def op_jreduce(colligation: dict, tolerances: Tolerances = DEFAULT, seed: int = 0) -> dict:
    u = Colligation.from_dict(colligation)
    app = build_apparatus(u, tolerances, seed)
    par = extract_parameter(u, app, tolerances.rank_tol, tolerances.tol)
    red = j_reduction(u, app, par, tolerances.rank_tol)
    return {
        "reduced": red.reduced.to_dict(),
        "J": encode_matrix(red.J),
        "n_space_dim": red.n_space_dim,
        "xi_iso": encode_matrix(red.xi_iso),
    }


def op_coincide(phi: dict, psi: dict, tolerances: Tolerances = DEFAULT,
                seed: int = 0) -> dict:
    u1 = Colligation.from_dict(phi)
    u2 = Colligation.from_dict(psi)
    report = coincide_pipeline(u1, u2, tolerances, seed)
    out = {
        "verdict": report.verdict,
        "kernel_dims": list(report.kernel_dims),
        "residuals": {k: float(v) for k, v in report.residuals.items()},
    }
    if report.verdict == "coincident":
        out["alpha"] = encode_matrix(report.alpha)
        out["beta"] = encode_matrix(report.beta)
        out["witness"] = witness_to_dict(report.witness, report.reduced)
        out["pad_dim"] = report.witness.pad_dim
        out["padded_side"] = report.witness.padded_side
    return out


def op_witness_verify(left: dict, right: dict, witness: dict,
                      tolerances: Tolerances = DEFAULT, seed: int = 0) -> dict:
    u1 = Colligation.from_dict(left)
    u2 = Colligation.from_dict(right)
    w, reduced = witness_from_dict(witness)
    if reduced:
        app1 = build_apparatus(u1, tolerances, seed)
        par1 = extract_parameter(u1, app1, tolerances.rank_tol, tolerances.tol)
        u1 = j_reduction(u1, app1, par1, tolerances.rank_tol).reduced
        app2 = build_apparatus(u2, tolerances, seed)
        par2 = extract_parameter(u2, app2, tolerances.rank_tol, tolerances.tol)
        u2 = j_reduction(u2, app2, par2, tolerances.rank_tol).reduced
    res = verify_unitary_coincidence(u1, u2, w, tolerances, seed=seed)
    return {"residuals": {k: (float(v) if not isinstance(v, bool) else v)
                          for k, v in res.items()},
            "verified": bool(res["passed"])}


def op_suite(tolerances: Tolerances = DEFAULT, seed: int = 0,
             cases=None) -> dict:
    from .suite import run_suite

    results = run_suite(tolerances, seed=seed, only=cases)
    return {
        "results": [
            {"criterion": r.name, "passed": r.passed, "detail": r.detail}
            for r in results
        ],
        "all_passed": all(r.passed for r in results),
    }

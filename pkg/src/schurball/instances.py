"""Generator families for test instances and CLI fixtures.

Random orthonormalized colligations are functional models only in one
variable: for d >= 2 the backward-shift compatibility of the A-blocks is a
genuine constraint that a Haar unitary misses.  Multivariable functional
models are generated here structurally, as truncated ball shifts on
monomial lower sets (states = monomials, A-blocks = the weighted index
lowering maps, C = evaluation at 0), completed to unitaries by a seeded
orthonormal basis of the remaining rows.  Direct sums, input/output/state
rotations, zero-column input padding and parameter changes then produce
the rest of the zoo: vector outputs, nontrivial input kernels, strict
contraction parameters.
"""

from __future__ import annotations

import numpy as np

from .colligation import Colligation, multi_indices
from .errors import InputError
from .linalg import complement_basis, haar_unitary
from .model import ModelApparatus

__all__ = [
    "truncated_shift",
    "lower_set_shift",
    "rotate_colligation",
    "direct_sum",
    "with_parameter",
    "rotated_pair",
    "fm_instance",
    "scalar_shift",
    "z_squared",
    "constant_colligation",
    "identity_three_by_three",
    "z1_line",
    "z1z2_mix",
    "unobservable_example",
]


def lower_set_shift(d: int, alphas, seed: int = 0, extra_pad: int = 0) -> Colligation:
    """Functional-model colligation whose state space is spanned by the
    monomials of a downward-closed multi-index set.

    A_j lowers the j-th index with weight sqrt(alpha_j / |alpha|) (the
    backward shift in normalized monomial coordinates), C evaluates at 0,
    and the B/D block is a seeded orthonormal completion of the isometric
    first block column, so the result is unitary (plus optional zero input
    columns, which make it strictly coisometric and enlarge the input
    kernel).
    """
    S = [tuple(int(x) for x in a) for a in alphas]
    if len(set(S)) != len(S):
        raise InputError("duplicate multi-indices")
    sset = set(S)
    for a in S:
        if len(a) != d or any(x < 0 for x in a):
            raise InputError(f"bad multi-index {a}")
        for j in range(d):
            if a[j] > 0:
                down = a[:j] + (a[j] - 1,) + a[j + 1:]
                if down not in sset:
                    raise InputError(f"{a} lacks its downward neighbour {down}")
    if tuple([0] * d) not in sset:
        raise InputError("lower set must contain the zero index")
    n = len(S)
    idx = {a: i for i, a in enumerate(S)}
    A = [np.zeros((n, n), dtype=complex) for _ in range(d)]
    for a in S:
        m = sum(a)
        if m == 0:
            continue
        for j in range(d):
            if a[j] > 0:
                down = a[:j] + (a[j] - 1,) + a[j + 1:]
                A[j][idx[down], idx[a]] = np.sqrt(a[j] / m)
    C = np.zeros((1, n), dtype=complex)
    C[0, idx[tuple([0] * d)]] = 1.0
    rows = d * n + 1
    col = np.vstack([*A, C])  # rows x n isometry
    comp = complement_basis(col, rows)
    mix = haar_unitary(np.random.default_rng(seed), rows - n)
    bd = np.hstack([comp @ mix, np.zeros((rows, extra_pad))])
    p = rows - n + extra_pad
    B = [bd[j * n:(j + 1) * n, :] for j in range(d)]
    return Colligation.create(d, n, p, 1, A, B, C, bd[d * n:, :])


def truncated_shift(d: int, degree: int, seed: int = 0, extra_pad: int = 0) -> Colligation:
    """lower_set_shift on all monomials of total degree <= degree."""
    alphas = [a for a in multi_indices(d, degree)]
    return lower_set_shift(d, alphas, seed, extra_pad)


def rotate_colligation(u: Colligation, alpha, beta, state=None) -> Colligation:
    """The colligation of ``beta phi alpha*`` with an optional unitary change
    of state basis: (V A V*, V B alpha*, beta C V*, beta D alpha*)."""
    a = np.asarray(alpha, dtype=complex).reshape(u.p, u.p)
    b = np.asarray(beta, dtype=complex).reshape(u.q, u.q)
    v = np.eye(u.n, dtype=complex) if state is None else \
        np.asarray(state, dtype=complex).reshape(u.n, u.n)
    A = [v @ m @ v.conj().T for m in u.A]
    B = [v @ m @ a.conj().T for m in u.B]
    return Colligation.create(u.d, u.n, u.p, u.q, A, B, b @ u.C @ v.conj().T,
                              b @ u.D @ a.conj().T)


def direct_sum(u1: Colligation, u2: Colligation) -> Colligation:
    """Block-diagonal sum; realizes phi1 (+) phi2 and preserves the
    functional-model property."""
    if u1.d != u2.d:
        raise InputError("need matching variable counts")
    d = u1.d
    n, p, q = u1.n + u2.n, u1.p + u2.p, u1.q + u2.q

    def blk(x, y):
        return np.block([
            [x, np.zeros((x.shape[0], y.shape[1]))],
            [np.zeros((y.shape[0], x.shape[1])), y],
        ])

    A = [blk(u1.A[j], u2.A[j]) for j in range(d)]
    B = [blk(u1.B[j], u2.B[j]) for j in range(d)]
    return Colligation.create(d, n, p, q, A, B, blk(u1.C, u2.C), blk(u1.D, u2.D))


def with_parameter(u: Colligation, app: ModelApparatus, xi: np.ndarray) -> Colligation:
    """Replace B by the functional-model formula with a new parameter.

    ``xi`` is a p x e contraction on the defect basis with values in U0.
    Every choice yields a realization of the same transfer function; strict
    contractions yield weakly coisometric (non-coisometric) ones.
    """
    d, n, p = u.d, u.n, u.p
    chain = app.G2 @ app.T12.conj().T @ app.G1.conj().T
    bstar_perp = -chain + np.asarray(xi, dtype=complex) @ app.defect1.conj().T @ app.Delta
    bstar = bstar_perp @ app.Q0.conj().T + app.R_amb @ (app.Q1 @ app.Q1.conj().T)
    bfull = bstar.conj().T
    B = [bfull[j * n:(j + 1) * n, :] for j in range(d)] if n else \
        [np.zeros((0, p), dtype=complex) for _ in range(d)]
    return Colligation.create(d, n, p, u.q, u.A, B, u.C, u.D)


def rotated_pair(u: Colligation, seed: int, mix_state: bool = True):
    """(u, psi, alpha, beta) with psi the block-substituted rotation of u:
    the canonical coincident pair used throughout the test batteries."""
    rng = np.random.default_rng(seed)
    alpha = haar_unitary(rng, u.p)
    beta = haar_unitary(rng, u.q)
    state = haar_unitary(rng, u.n) if mix_state else None
    return u, rotate_colligation(u, alpha, beta, state), alpha, beta


def fm_instance(index: int, seed: int = 0) -> Colligation:
    """Catalog of functional-model colligations cycling through d in
    {1, 2, 3}, scalar and vector outputs, trivial and nontrivial input
    kernels.  Deterministic in (index, seed)."""
    from .colligation import pad_input, random_colligation

    kind = index % 6
    s = 1000 * seed + index
    if kind == 0:
        return random_colligation(1, 2 + index % 3, 2 + (index // 2) % 2, 2, "Coisometric", s)
    if kind == 1:
        return random_colligation(1, 1 + index % 4, 1, 1, "Unitary", s)
    if kind == 2:
        return truncated_shift(2, 1 + (index // 6) % 2, seed=s)
    if kind == 3:
        return truncated_shift(3, 1, seed=s)
    if kind == 4:
        rng = np.random.default_rng(s)
        u = direct_sum(truncated_shift(2, 1, seed=s), truncated_shift(2, 1, seed=s + 1))
        return rotate_colligation(u, haar_unitary(rng, u.p), haar_unitary(rng, u.q),
                                  haar_unitary(rng, u.n))
    return pad_input(truncated_shift(2, 1, seed=s), 1 + index % 2)


# -- small worked fixtures ------------------------------------------------

def scalar_shift() -> Colligation:
    """d=1 colligation of phi(z) = z: the 2x2 swap matrix."""
    return Colligation.create(1, 1, 1, 1, [[[0.0]]], [[[1.0]]], [[1.0]], [[0.0]])


def z_squared() -> Colligation:
    """d=1 colligation of phi(z) = z^2: a 3x3 permutation."""
    return Colligation.create(
        1, 2, 1, 1,
        [np.array([[0.0, 0.0], [1.0, 0.0]])],
        [np.array([[1.0], [0.0]])],
        np.array([[0.0, 1.0]]),
        [[0.0]],
    )


def constant_colligation(d: int, D) -> Colligation:
    """State dimension 0: phi == D."""
    Dm = np.atleast_2d(np.asarray(D, dtype=complex))
    q, p = Dm.shape
    zero = np.zeros((0, 0), dtype=complex)
    return Colligation.create(d, 0, p, q, [zero] * d,
                              [np.zeros((0, p), dtype=complex)] * d,
                              np.zeros((q, 0), dtype=complex), Dm)


def identity_three_by_three() -> Colligation:
    """d=2 colligation whose stacked matrix is the 3x3 identity: phi == [0, 1].

    Unitary but unobservable (C = 0); used for transfer and kernel-space
    examples and as a NotObservable control.
    """
    return Colligation.create(
        2, 1, 2, 1,
        [np.array([[1.0]]), np.array([[0.0]])],
        [np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]])],
        np.array([[0.0]]),
        np.array([[0.0, 1.0]]),
    )


def z1_line() -> Colligation:
    """d=2 colligation of phi(z) = z_1 (scalar multiplier, one input)."""
    return Colligation.create(
        2, 1, 1, 1,
        [np.zeros((1, 1)), np.zeros((1, 1))],
        [np.array([[1.0]]), np.array([[0.0]])],
        np.array([[1.0]]),
        np.array([[0.0]]),
    )


def z1z2_mix() -> Colligation:
    """d=2 colligation of phi(z) = (z_1 + z_2) / sqrt(2)."""
    r = 2.0 ** -0.5
    return Colligation.create(
        2, 1, 1, 1,
        [np.zeros((1, 1)), np.zeros((1, 1))],
        [np.array([[r]]), np.array([[r]])],
        np.array([[1.0]]),
        np.array([[0.0]]),
    )


def unobservable_example() -> Colligation:
    """Coisometric d=1 colligation with a decoupled state invisible to C."""
    lam = 0.5
    mu = np.sqrt(1 - lam ** 2)
    return Colligation.create(
        1, 2, 2, 1,
        [np.array([[0.0, 0.0], [0.0, lam]])],
        [np.array([[1.0, 0.0], [0.0, mu]])],
        np.array([[1.0, 0.0]]),
        np.array([[0.0, 0.0]]),
    )

"""Hermitian PSD feasibility with affine coefficient-matching constraints.

The solver is project-and-refine: alternate between the least-norm
projection onto the affine constraint set (via a precomputed pseudoinverse
of the compiled real constraint matrix) and eigenvalue clipping onto the
PSD cone, with a face-based refinement step that solves the affine system
restricted to the current positive eigenspace.  Infeasibility is declared
when the distance between the two sets stalls above tolerance; such an
outcome always means "infeasible at this precision", never mathematical
nonexistence.

Hermitian n x n variables are handled in isometric real coordinates
("hvec"): the diagonal (real), then sqrt(2) * real and sqrt(2) * imaginary
parts of the upper triangle.  The Frobenius inner product carries over to
the Euclidean one, so projections commute with the encoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SQRT2 = np.sqrt(2.0)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 50_000
DEFAULT_RANK_TOL = 1e-9


# -- complex embedding ---------------------------------------------------


def embed_complex(H, tol=1e-12):
    """Real symmetric embedding [[Re H, -Im H], [Im H, Re H]].

    Positive semidefiniteness is preserved in both directions, with every
    eigenvalue of H appearing twice in the embedding.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("embed_complex expects a square matrix")
    scale = max(1.0, float(np.linalg.norm(H)))
    if np.linalg.norm(H - H.conj().T) > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    re, im = H.real, H.imag
    return np.block([[re, -im], [im, re]])


def unembed_complex(S):
    """Inverse of embed_complex; round trip is exact."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        raise ValueError("expected an even-sized square matrix")
    n = S.shape[0] // 2
    return S[:n, :n] + 1j * S[n:, :n]


# -- hvec coordinates ----------------------------------------------------


class _BlockLayout:
    """Index bookkeeping for one Hermitian block inside the real vector."""

    def __init__(self, size, offset):
        self.size = size
        self.offset = offset
        self.iu = np.triu_indices(size, 1)
        self.npairs = size * (size - 1) // 2
        self.dim = size * size

    def pair_index(self, i, j):
        # row-major upper-triangle position of (i, j), i < j
        return i * self.size - i * (i + 1) // 2 + (j - i - 1)

    def hvec(self, X):
        out = np.empty(self.dim)
        n = self.size
        out[:n] = X.diagonal().real
        upper = X[self.iu]
        out[n:n + self.npairs] = SQRT2 * upper.real
        out[n + self.npairs:] = SQRT2 * upper.imag
        return out

    def unhvec(self, x):
        n = self.size
        X = np.zeros((n, n), dtype=complex)
        X[np.arange(n), np.arange(n)] = x[:n]
        upper = (x[n:n + self.npairs] + 1j * x[n + self.npairs:]) / SQRT2
        X[self.iu] = upper
        X[self.iu[1], self.iu[0]] = upper.conj()
        return X


def _layouts(block_sizes):
    layouts, offset = [], 0
    for s in block_sizes:
        lay = _BlockLayout(s, offset)
        layouts.append(lay)
        offset += lay.dim
    return layouts, offset


# -- problem statement ---------------------------------------------------


@dataclass
class LinearConstraint:
    """sum of coef * X_block[row, col] over terms == rhs (complex)."""
    terms: list
    rhs: complex
    label: str = ""


@dataclass
class PsdFeasibilityProblem:
    """Find Hermitian PSD blocks X_j satisfying all linear constraints."""
    block_sizes: list
    constraints: list = field(default_factory=list)

    def validate(self):
        for c in self.constraints:
            for blk, i, j, _ in c.terms:
                if not 0 <= blk < len(self.block_sizes):
                    raise ValueError(f"constraint {c.label!r}: block {blk} out of range")
                s = self.block_sizes[blk]
                if not (0 <= i < s and 0 <= j < s):
                    raise ValueError(f"constraint {c.label!r}: entry ({i},{j}) outside {s}x{s}")


@dataclass
class PsdSolution:
    blocks: list
    slack: float
    residual: float
    iterations: int


@dataclass
class SolveResult:
    """Outcome of a feasibility solve.

    status is one of 'feasible', 'infeasible', 'iteration_budget'.
    Infeasible results carry the stalled inter-set distance in ``gap``.
    """
    status: str
    solution: PsdSolution | None
    iterations: int
    gap: float
    message: str = ""

    @property
    def feasible(self):
        return self.status == "feasible"


# -- compilation ---------------------------------------------------------


def _compile(problem, layouts, total_dim):
    """Real rows for Re/Im parts of every complex constraint."""
    rows, rhs = [], []
    inconsistent = None
    for c in problem.constraints:
        row_re = np.zeros(total_dim)
        row_im = np.zeros(total_dim)
        for blk, i, j, coef in c.terms:
            lay = layouts[blk]
            base = lay.offset
            n = lay.size
            cre, cim = coef.real, coef.imag
            if i == j:
                row_re[base + i] += cre
                row_im[base + i] += cim
            else:
                if i < j:
                    t = lay.pair_index(i, j)
                    sgn = 1.0
                else:
                    t = lay.pair_index(j, i)
                    sgn = -1.0
                pre = base + n + t
                pim = base + n + lay.npairs + t
                # X[i,j] = (a + sgn * 1j * b) / sqrt(2) with a, b the stored
                # real coordinates of the canonical (min, max) pair
                row_re[pre] += cre / SQRT2
                row_re[pim] += -sgn * cim / SQRT2
                row_im[pre] += cim / SQRT2
                row_im[pim] += sgn * cre / SQRT2
        for row, val in ((row_re, c.rhs.real), (row_im, c.rhs.imag)):
            nz = np.any(row)
            if nz:
                rows.append(row)
                rhs.append(val)
            elif abs(val) > 1e-12:
                inconsistent = c.label or "constant constraint"
    if rows:
        return np.array(rows), np.array(rhs), inconsistent
    return np.zeros((0, total_dim)), np.zeros(0), inconsistent


def _constraint_residual(problem, blocks):
    """Max violation of the original complex constraints."""
    worst = 0.0
    for c in problem.constraints:
        val = sum(coef * blocks[blk][i, j] for blk, i, j, coef in c.terms)
        worst = max(worst, abs(val - c.rhs))
    return float(worst)


# -- solver --------------------------------------------------------------


def _polish(x, layouts, M, Mp, b, tol, min_eig, problem):
    """Solve the affine system on the face spanned by the currently
    positive eigenspace; returns (blocks, residual, slack) or None."""
    mats = [lay.unhvec(x[lay.offset:lay.offset + lay.dim]) for lay in layouts]
    eigs = [np.linalg.eigh(0.5 * (X + X.conj().T)) for X in mats]
    scale = max(1.0, max((vals.max(initial=0.0) for vals, _ in eigs), default=0.0))

    for cut in (1e-7, 1e-5, 1e-3):
        faces = []
        for vals, vecs in eigs:
            keep = vals > min_eig + cut * scale
            faces.append(vecs[:, keep])
        red_dim = sum(f.shape[1] ** 2 for f in faces)
        base = np.concatenate([
            lay.hvec(min_eig * np.eye(lay.size, dtype=complex)) for lay in layouts
        ]) if min_eig else np.zeros(sum(lay.dim for lay in layouts))

        if red_dim == 0:
            cand = base
            res = np.linalg.norm(M @ cand - b, np.inf) if M.shape[0] else 0.0
            if res <= tol:
                blocks = [lay.unhvec(cand[lay.offset:lay.offset + lay.dim])
                          for lay in layouts]
                return blocks, _constraint_residual(problem, blocks), min_eig
            continue

        cols = []
        for lay, U in zip(layouts, faces):
            r = U.shape[1]
            sub = _BlockLayout(r, 0)
            for t in range(r * r):
                e = np.zeros(r * r)
                e[t] = 1.0
                E = sub.unhvec(e)
                col = np.zeros(sum(l.dim for l in layouts))
                col[lay.offset:lay.offset + lay.dim] = lay.hvec(U @ E @ U.conj().T)
                cols.append(col)
        L = np.array(cols).T

        target = b - M @ base if M.shape[0] else np.zeros(0)
        A_red = M @ L if M.shape[0] else np.zeros((0, L.shape[1]))
        zvec = np.linalg.lstsq(A_red, target, rcond=None)[0] if M.shape[0] else np.zeros(L.shape[1])

        for _round in range(2):
            cand = base + L @ zvec
            blocks = [lay.unhvec(cand[lay.offset:lay.offset + lay.dim]) for lay in layouts]
            lam_min = min(np.linalg.eigvalsh(0.5 * (X + X.conj().T)).min()
                          for X in blocks)
            res = np.linalg.norm(M @ cand - b, np.inf) if M.shape[0] else 0.0
            if res <= tol and lam_min >= min_eig - tol:
                return blocks, _constraint_residual(problem, blocks), float(lam_min)
            # clip the reduced variables onto the cone and retry once
            pos = 0
            clipped = np.zeros_like(zvec)
            for U in faces:
                r = U.shape[1]
                sub = _BlockLayout(r, 0)
                Z = sub.unhvec(zvec[pos:pos + r * r])
                vals, vecs = np.linalg.eigh(0.5 * (Z + Z.conj().T))
                Z = (vecs * np.clip(vals, 0.0, None)) @ vecs.conj().T
                clipped[pos:pos + r * r] = sub.hvec(Z)
                pos += r * r
            if np.allclose(clipped, zvec):
                break
            zvec = clipped
    return None


def solve_psd_feasibility(problem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                          min_eig=0.0, polish_every=50, stall_window=400):
    """Search for Hermitian blocks X_j >= min_eig * I meeting all constraints.

    Returns a SolveResult; 'feasible' guarantees constraint residual <= tol
    and eigenvalue slack >= min_eig - tol.  The solve is deterministic:
    identical problems give bitwise-identical iterates.
    """
    problem.validate()
    layouts, total_dim = _layouts(problem.block_sizes)
    M, b, inconsistent = _compile(problem, layouts, total_dim)
    if inconsistent is not None:
        return SolveResult("infeasible", None, 0, np.inf,
                           f"constraint {inconsistent} is unsatisfiable for every variable")

    if M.shape[0]:
        Mp = np.linalg.pinv(M, rcond=1e-12)
        x = Mp @ b
        aff_res = np.linalg.norm(M @ x - b, np.inf)
        if aff_res > max(10 * tol, 1e-9 * (1.0 + np.linalg.norm(b, np.inf))):
            return SolveResult("infeasible", None, 0, float(aff_res),
                               "affine constraint system is inconsistent")
    else:
        Mp = None
        x = np.zeros(total_dim)

    def proj_affine(v):
        if M.shape[0] == 0:
            return v
        return v - Mp @ (M @ v - b)

    gap = np.inf
    window_best = np.inf
    prev_window_best = np.inf
    for it in range(max_iter):
        if it % polish_every == 0:
            polished = _polish(x, layouts, M, Mp, b, tol, min_eig, problem)
            if polished is not None:
                blocks, residual, slack = polished
                return SolveResult(
                    "feasible",
                    PsdSolution(blocks=blocks, slack=slack, residual=residual,
                                iterations=it),
                    it, float(gap))
        # project onto the (shifted) PSD cone
        y = np.empty_like(x)
        for lay in layouts:
            X = lay.unhvec(x[lay.offset:lay.offset + lay.dim])
            vals, vecs = np.linalg.eigh(0.5 * (X + X.conj().T))
            Xp = (vecs * np.clip(vals, min_eig, None)) @ vecs.conj().T
            y[lay.offset:lay.offset + lay.dim] = lay.hvec(Xp)
        gap = float(np.linalg.norm(y - x))
        x = proj_affine(y)

        window_best = min(window_best, gap)
        if (it + 1) % stall_window == 0:
            improved = window_best < prev_window_best * (1.0 - 1e-3)
            if not improved and window_best > max(100 * tol, 1e-7):
                return SolveResult(
                    "infeasible", None, it + 1, window_best,
                    f"inter-set distance stalled at {window_best:.3e} "
                    f"(infeasible at this precision)")
            prev_window_best, window_best = window_best, np.inf

    polished = _polish(x, layouts, M, Mp, b, tol, min_eig, problem)
    if polished is not None:
        blocks, residual, slack = polished
        return SolveResult("feasible",
                           PsdSolution(blocks, slack, residual, max_iter),
                           max_iter, float(gap))
    return SolveResult("iteration_budget", None, max_iter, float(gap),
                       f"no decision after {max_iter} iterations (gap {gap:.3e})")


def maximize_slack(problem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                   slack_tol=1e-4, slack_cap=2.0 ** 20):
    """Largest t such that the problem is feasible with X >= t*I, by
    bisection over feasibility solves.  Returns (t, SolveResult)."""
    base = solve_psd_feasibility(problem, tol=tol, max_iter=max_iter, min_eig=0.0)
    if not base.feasible:
        return 0.0, base
    lo, best = 0.0, base
    hi = 1.0
    while hi < slack_cap:
        res = solve_psd_feasibility(problem, tol=tol, max_iter=max_iter, min_eig=hi)
        if res.feasible:
            lo, best = hi, res
            hi *= 2.0
        else:
            break
    if hi >= slack_cap:
        return lo, best
    while hi - lo > slack_tol:
        mid = 0.5 * (lo + hi)
        res = solve_psd_feasibility(problem, tol=tol, max_iter=max_iter, min_eig=mid)
        if res.feasible:
            lo, best = mid, res
        else:
            hi = mid
    return lo, best


# -- PSD factorization ---------------------------------------------------


def psd_factor(W, rank_tol=DEFAULT_RANK_TOL, scale=None):
    """Factor a Hermitian PSD matrix as V* V with V of full row rank.

    Eigenvalues above rank_tol * max(lambda_max, scale) are kept; the
    count is the numerical rank.  Raises if W is indefinite beyond the
    tolerance.
    """
    W = np.asarray(W, dtype=complex)
    n = W.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex), 0
    vals, vecs = np.linalg.eigh(0.5 * (W + W.conj().T))
    lam_max = float(vals.max(initial=0.0))
    base = lam_max if scale is None else max(lam_max, float(scale))
    if vals.min() < -rank_tol * max(base, 1.0):
        raise ValueError(
            f"matrix is indefinite beyond tolerance (lambda_min = {vals.min():.3e})")
    if base <= 0.0:
        return np.zeros((0, n), dtype=complex), 0
    thr = rank_tol * base
    keep = np.where(vals > thr)[0][::-1]  # descending eigenvalue order
    V = (np.sqrt(vals[keep])[:, None] * vecs[:, keep].conj().T)
    return V, len(keep)

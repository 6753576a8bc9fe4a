"""Membership certificates for the Hermitian quadratic module generated by
the domain defects.

A certificate for a target P of size gamma consists of witnesses
H_0, ..., H_k with

    P(w, z) = H_0*(w) H_0(z)
              + sum_j H_j*(w) (D_j(w, z) (x) I_{n_j}) H_j(z),

where D_j are the defect generators of the domain.  The search is a Gram
matrix SDP at a fixed witness degree, escalated one degree at a time;
feasibility at degree D implies feasibility at D + 1, so the linear scan
loses nothing.  Every returned certificate is re-verified by exact
coefficient arithmetic, independently of the solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateNotFound, ShapeMismatchError
from .polynomials import (
    HermPoly,
    MatPoly,
    bivar_outer,
    grlex_key,
    grlex_monomials,
    herm_congruence,
)
from .sdp import (
    DEFAULT_RANK_TOL,
    LinearConstraint,
    PsdFeasibilityProblem,
    psd_factor,
    solve_psd_feasibility,
)


@dataclass
class CertTerm:
    """One defect witness: multiplicity n and the stacked polynomial H
    (gamma_j * n rows, gamma columns); H is None when n = 0."""
    n: int
    h: MatPoly | None


@dataclass
class Certificate:
    h0: MatPoly
    terms: list
    degree: int
    residual: float
    provenance: dict = field(default_factory=dict)

    @property
    def n0(self):
        return self.h0.rows

    def multiplicities(self):
        return tuple(t.n for t in self.terms)

    def reconstruct(self, defects):
        """The right-hand side polynomial implied by the witnesses."""
        rhs = bivar_outer(self.h0, self.h0) if self.h0.rows else None
        gamma = self.h0.cols
        d = self.h0.d
        if rhs is None:
            rhs = HermPoly.zero(d, gamma)
        for defect, term in zip(defects, self.terms):
            if term.n == 0:
                continue
            rhs = rhs + herm_congruence(defect.kron_identity(term.n), term.h)
        return rhs


@dataclass
class GramProblem:
    """Assembled coefficient-matching SDP for one witness degree."""
    target: HermPoly
    defects: list
    degree: int
    basis: list
    problem: PsdFeasibilityProblem
    structurally_infeasible: bool
    gamma: int

    @property
    def block_sizes(self):
        return self.problem.block_sizes


def _exp_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _exp_sub(a, b):
    out = tuple(x - y for x, y in zip(a, b))
    return out if all(x >= 0 for x in out) else None


def build_gram_problem(target, defects, degree):
    """Coefficient-matching problem for witnesses of degree <= degree.

    Variables: the Gram matrix of H_0 (indexed by basis monomial x target
    column) and, per defect j, the Gram matrix of the row blocks of H_j
    (indexed by defect row x basis monomial x target column).  Constraints
    match every exponent pair the ansatz can reach, including zero matching
    where the target has no coefficient.  If the target is supported
    outside the reachable window the problem is marked structurally
    infeasible.
    """
    if degree < 0:
        raise ValueError("witness degree must be nonnegative")
    d, gamma = target.d, target.size
    for defect in defects:
        if defect.d != d:
            raise ShapeMismatchError("defect and target disagree on variable count")
    basis = grlex_monomials(d, degree)
    nb = len(basis)
    bindex = {m: i for i, m in enumerate(basis)}

    sizes = [gamma * nb]
    for defect in defects:
        sizes.append(gamma * defect.size * nb)

    reachable = set()
    for lam in basis:
        for mu in basis:
            reachable.add((lam, mu))
    for defect in defects:
        for (alpha, beta) in defect.coeffs:
            for lam in basis:
                for mu in basis:
                    reachable.add((_exp_add(alpha, lam), _exp_add(beta, mu)))

    structurally_infeasible = any(pair not in reachable for pair in target.coeffs)

    constraints = []
    if not structurally_infeasible:
        zero = np.zeros((gamma, gamma), dtype=complex)
        for (lam, mu) in sorted(reachable, key=lambda p: (grlex_key(p[0]), grlex_key(p[1]))):
            if grlex_key(lam) > grlex_key(mu):
                continue  # adjoint of an emitted constraint
            tmat = target.coeffs.get((lam, mu), zero)
            diag_pair = lam == mu
            for a in range(gamma):
                for b in range(a if diag_pair else 0, gamma):
                    terms = []
                    if lam in bindex and mu in bindex:
                        terms.append((0, bindex[lam] * gamma + a,
                                      bindex[mu] * gamma + b, 1.0 + 0j))
                    for j, defect in enumerate(defects):
                        gj = defect.size
                        for (alpha, beta), dmat in defect.coeffs.items():
                            lam_p = _exp_sub(lam, alpha)
                            mu_p = _exp_sub(mu, beta)
                            if lam_p is None or mu_p is None:
                                continue
                            il = bindex.get(lam_p)
                            im = bindex.get(mu_p)
                            if il is None or im is None:
                                continue
                            for r in range(gj):
                                for s in range(gj):
                                    coef = complex(dmat[r, s])
                                    if coef == 0:
                                        continue
                                    p = (r * nb + il) * gamma + a
                                    q = (s * nb + im) * gamma + b
                                    terms.append((j + 1, p, q, coef))
                    constraints.append(LinearConstraint(
                        terms=terms, rhs=complex(tmat[a, b]),
                        label=f"({lam},{mu})[{a},{b}]"))

    problem = PsdFeasibilityProblem(block_sizes=sizes, constraints=constraints)
    return GramProblem(target=target, defects=defects, degree=degree, basis=basis,
                       problem=problem, structurally_infeasible=structurally_infeasible,
                       gamma=gamma)


def _extract_witnesses(gram, solution, rank_tol=DEFAULT_RANK_TOL):
    """Factor the Gram blocks into witness polynomials."""
    d, gamma = gram.target.d, gram.gamma
    basis, nb = gram.basis, len(gram.basis)
    scale = max([float(np.linalg.eigvalsh(B).max(initial=0.0))
                 for B in solution.blocks] + [1.0])

    V0, n0 = psd_factor(solution.blocks[0], rank_tol, scale=scale)
    h0_coeffs = {}
    for i, mu in enumerate(basis):
        h0_coeffs[mu] = V0[:, i * gamma:(i + 1) * gamma]
    h0 = MatPoly(d, n0, gamma, h0_coeffs if n0 else {})

    terms = []
    for j, defect in enumerate(gram.defects):
        gj = defect.size
        Vj, nj = psd_factor(solution.blocks[j + 1], rank_tol, scale=scale)
        if nj == 0:
            terms.append(CertTerm(n=0, h=None))
            continue
        coeffs = {}
        for im, mu in enumerate(basis):
            block = np.vstack([
                Vj[:, (r * nb + im) * gamma:(r * nb + im) * gamma + gamma]
                for r in range(gj)
            ])
            coeffs[mu] = block
        terms.append(CertTerm(n=nj, h=MatPoly(d, gj * nj, gamma, coeffs)))
    return h0, terms


def certificate_residual(target, cert, domain):
    """Max coefficient deviation between the target and the witness
    reconstruction, by exact polynomial arithmetic."""
    rhs = cert.reconstruct(domain.defect_polys())
    diff = target - rhs
    return diff.max_coeff_norm()


def try_certify_at_degree(target, defects, degree, tol=1e-8,
                          max_iter=50_000, rank_tol=DEFAULT_RANK_TOL):
    """One Gram solve at a fixed degree; returns a Certificate or None.

    The residual check is exact coefficient arithmetic on the extracted
    witnesses, so a returned certificate is sound regardless of solver
    quality.
    """
    gram = build_gram_problem(target, defects, degree)
    if gram.structurally_infeasible:
        return None
    res = solve_psd_feasibility(gram.problem, tol=tol / 10, max_iter=max_iter)
    if not res.feasible:
        return None
    h0, terms = _extract_witnesses(gram, res.solution, rank_tol)
    cert = Certificate(h0=h0, terms=terms, degree=degree, residual=0.0,
                       provenance={"iterations": res.solution.iterations,
                                   "solver_residual": res.solution.residual})
    rhs = cert.reconstruct(defects)
    cert.residual = (target - rhs).max_coeff_norm()
    if cert.residual > tol:
        return None
    return cert


def necessity_screen(target, domain, samples=40, seed=0, tol=1e-8):
    """Look for a point of the closed domain where the target evaluated at
    (conj(z), z) has an eigenvalue below -tol; membership is impossible
    there.  Returns the witness point or None."""
    pts = [np.zeros(domain.d)]
    for margin in (0.5, 0.2, 0.05, 1e-3):
        pts.extend(domain.sample_interior(max(2, samples // 4), margin=margin,
                                          seed=seed + int(1000 * margin)))
    near_boundary = []
    for z in pts[1:1 + samples // 4]:
        zb = domain.push_to_boundary(z)
        if zb is not None:
            near_boundary.append(zb)
    for z in pts + near_boundary:
        val = target.eval(np.conj(z), z)
        lam = np.linalg.eigvalsh(0.5 * (val + val.conj().T)).min()
        if lam < -tol:
            return np.asarray(z), float(lam)
    return None


def certify(target, domain, d_min=0, d_max=4, tol=1e-8, screen=True,
            screen_samples=40, seed=0, max_iter=50_000):
    """Degree-escalating certificate search for membership of the target in
    the module generated by the domain defects.

    Raises CertificateNotFound when the necessity screen finds a witness
    point or when escalation is exhausted; the exception carries per-degree
    diagnostics.  Success guarantees certificate_residual <= tol.
    """
    if target.size < 1:
        raise ShapeMismatchError("empty target")
    if target.d != domain.d:
        raise ShapeMismatchError("target and domain disagree on variable count")
    herm_dev = target.herm_defect()
    if herm_dev > 1e-10 * max(1.0, target.max_coeff_norm()):
        raise ShapeMismatchError(
            f"target is not Hermitian-symmetric (deviation {herm_dev:.3e})")

    diagnostics = {}
    if screen:
        hit = necessity_screen(target, domain, samples=screen_samples,
                               seed=seed, tol=tol)
        if hit is not None:
            point, lam = hit
            diagnostics["screen"] = {"point": point.tolist(), "lambda_min": lam}
            raise CertificateNotFound(
                f"target is negative ({lam:.3e}) at a domain point; no certificate exists",
                degrees_tried=[], diagnostics=diagnostics, witness=point)

    defects = domain.defect_polys()
    tried = []
    for degree in range(d_min, d_max + 1):
        tried.append(degree)
        gram = build_gram_problem(target, defects, degree)
        if gram.structurally_infeasible:
            diagnostics[degree] = {"status": "structurally_infeasible"}
            continue
        res = solve_psd_feasibility(gram.problem, tol=tol / 10, max_iter=max_iter)
        if not res.feasible:
            diagnostics[degree] = {"status": res.status, "gap": res.gap,
                                   "iterations": res.iterations}
            continue
        h0, terms = _extract_witnesses(gram, res.solution)
        cert = Certificate(
            h0=h0, terms=terms, degree=degree, residual=0.0,
            provenance={"iterations": res.solution.iterations,
                        "solver_residual": res.solution.residual,
                        "seed": seed})
        cert.residual = (target - cert.reconstruct(defects)).max_coeff_norm()
        if cert.residual > tol:
            diagnostics[degree] = {"status": "reconstruction_residual",
                                   "residual": cert.residual}
            continue
        return cert
    raise CertificateNotFound(
        f"no certificate up to degree {d_max} (tried {tried})",
        degrees_tried=tried, diagnostics=diagnostics)


# -- closure operations (cone structure of the module) --------------------


def cert_sum(c1, c2):
    """Witnesses for P1 + P2 by concatenating multiplicities blockwise."""
    if c1.h0.cols != c2.h0.cols or len(c1.terms) != len(c2.terms):
        raise ShapeMismatchError("certificates are not compatible")
    h0 = MatPoly.vstack([c1.h0, c2.h0]) if (c1.h0.rows or c2.h0.rows) else c1.h0
    terms = []
    for t1, t2 in zip(c1.terms, c2.terms):
        if t1.n == 0 and t2.n == 0:
            terms.append(CertTerm(0, None))
            continue
        if t1.n == 0:
            terms.append(CertTerm(t2.n, t2.h))
            continue
        if t2.n == 0:
            terms.append(CertTerm(t1.n, t1.h))
            continue
        gj = t1.h.rows // t1.n
        blocks = []
        for r in range(gj):
            blocks.append(_row_block(t1.h, r, t1.n))
            blocks.append(_row_block(t2.h, r, t2.n))
        terms.append(CertTerm(t1.n + t2.n, MatPoly.vstack(blocks)))
    return Certificate(h0=h0, terms=terms, degree=max(c1.degree, c2.degree),
                       residual=c1.residual + c2.residual)


def _row_block(h, r, n):
    """Rows [r*n, (r+1)*n) of the stacked witness polynomial."""
    coeffs = {}
    for exp, mat in h.coeffs.items():
        coeffs[exp] = mat[r * n:(r + 1) * n, :]
    return MatPoly(h.d, n, h.cols, coeffs)


def cert_congruence(cert, F):
    """Witnesses for F*(w) P(w,z) F(z): multiply every H on the right."""
    h0 = cert.h0 @ F if cert.h0.rows else MatPoly.zero(F.d, 0, F.cols)
    terms = [CertTerm(t.n, t.h @ F if t.n else None) for t in cert.terms]
    degree = max([h0.degree] + [t.h.degree for t in terms if t.n], default=0)
    return Certificate(h0=h0, terms=terms, degree=max(cert.degree, degree),
                       residual=cert.residual)


def cert_direct_sum(c1, c2):
    """Witnesses for P1 (+) P2 on the block-diagonal target."""
    if len(c1.terms) != len(c2.terms):
        raise ShapeMismatchError("certificates are not compatible")
    g1, g2 = c1.h0.cols, c2.h0.cols
    parts = []
    if c1.h0.rows:
        parts.append(c1.h0.pad_cols(0, g2))
    if c2.h0.rows:
        parts.append(c2.h0.pad_cols(g1, 0))
    h0 = MatPoly.vstack(parts) if parts else MatPoly.zero(c1.h0.d, 0, g1 + g2)
    terms = []
    for t1, t2 in zip(c1.terms, c2.terms):
        if t1.n == 0 and t2.n == 0:
            terms.append(CertTerm(0, None))
            continue
        gj = (t1.h.rows // t1.n) if t1.n else (t2.h.rows // t2.n)
        blocks = []
        for r in range(gj):
            if t1.n:
                blocks.append(_row_block(t1.h, r, t1.n).pad_cols(0, g2))
            if t2.n:
                blocks.append(_row_block(t2.h, r, t2.n).pad_cols(g1, 0))
        terms.append(CertTerm(t1.n + t2.n, MatPoly.vstack(blocks)))
    return Certificate(h0=h0, terms=terms, degree=max(c1.degree, c2.degree),
                       residual=c1.residual + c2.residual)


# -- hereditary spot check -------------------------------------------------


@dataclass
class SpotCheckReport:
    trials: int
    max_mismatch: float
    min_defect_eig: float
    min_target_eig: float
    failures: list = field(default_factory=list)
    seed: int = 0

    @property
    def ok(self):
        return not self.failures


def hereditary_spot_check(target, cert, domain, trials=20, matrix_size=3,
                          seed=0, tol=1e-8):
    """Falsification test on random commuting diagonal tuples drawn from the
    domain interior: defects must evaluate PSD, the target evaluation must
    match the witness reconstruction, and the target evaluation must be PSD
    up to tolerance."""
    from .polynomials import CommutingTuple, hereditary_eval

    defects = domain.defect_polys()
    rhs = cert.reconstruct(defects)
    report = SpotCheckReport(trials=trials, max_mismatch=0.0,
                             min_defect_eig=np.inf, min_target_eig=np.inf,
                             seed=seed)
    if trials == 0:
        report.min_defect_eig = report.min_target_eig = 0.0
        return report
    rng = np.random.default_rng(seed)
    for t in range(trials):
        sub = int(rng.integers(0, 2 ** 31))
        pts = np.array(domain.sample_interior(matrix_size, margin=1e-3, seed=sub))
        T = CommutingTuple.joint_diagonal(pts)
        for j, defect in enumerate(defects):
            val = hereditary_eval(defect, T)
            lam = float(np.linalg.eigvalsh(0.5 * (val + val.conj().T)).min())
            report.min_defect_eig = min(report.min_defect_eig, lam)
            if lam < -tol:
                report.failures.append((t, f"defect {j} eigenvalue {lam:.3e}"))
        lhs = hereditary_eval(target, T)
        rhs_val = hereditary_eval(rhs, T)
        mismatch = float(np.linalg.norm(lhs - rhs_val, 2))
        report.max_mismatch = max(report.max_mismatch, mismatch)
        if mismatch > 1e-8 * max(1.0, np.linalg.norm(lhs, 2)):
            report.failures.append((t, f"reconstruction mismatch {mismatch:.3e}"))
        lam_t = float(np.linalg.eigvalsh(0.5 * (lhs + lhs.conj().T)).min())
        report.min_target_eig = min(report.min_target_eig, lam_t)
        if lam_t < -tol:
            report.failures.append((t, f"target eigenvalue {lam_t:.3e}"))
    return report

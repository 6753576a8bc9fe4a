"""Multivariate matrix polynomials and Hermitian bivariate polynomials.

Two coefficient containers drive everything downstream:

* ``MatPoly`` -- a polynomial in z = (z_1, ..., z_d) whose coefficients are
  complex rectangular matrices, stored as a map from exponent tuples to
  arrays.
* ``HermPoly`` -- a bivariate polynomial in (w, z) with square matrix
  coefficients, stored as a map from exponent-tuple pairs to arrays.  When
  coeff(mu, lam) == coeff(lam, mu)* for every stored pair the polynomial is
  Hermitian-symmetric; ``herm_defect`` measures the deviation.

Monomial order is graded lexicographic throughout: sort key
``(total degree, exponent tuple)``.  All operations return new, normalized
values; nothing mutates in place, so values are safe to share across
threads.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import CommutationError, ShapeMismatchError

# Coefficients with Frobenius norm below DROP_REL * (largest coefficient
# norm) are dropped during normalization to keep supports finite under
# floating arithmetic.
DROP_REL = 1e-14


def grlex_key(exponents):
    """Sort key realizing the graded lexicographic order."""
    return (sum(exponents), tuple(exponents))


def grlex_monomials(d, max_degree):
    """All exponent tuples in d variables of total degree <= max_degree,
    in graded lexicographic order."""
    if d < 1:
        raise ValueError("need at least one variable")
    if max_degree < 0:
        raise ValueError("max_degree must be nonnegative")
    out = []
    for deg in range(max_degree + 1):
        out.extend(sorted(_compositions(deg, d)))
    return out


def _compositions(total, d):
    """All tuples of d nonnegative integers summing to total."""
    if d == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, d - 1):
            yield (first,) + rest


def _check_exponent(exp, d):
    exp = tuple(int(e) for e in exp)
    if len(exp) != d:
        raise ShapeMismatchError(f"exponent {exp} has length {len(exp)}, expected {d}")
    if any(e < 0 for e in exp):
        raise ShapeMismatchError(f"negative exponent in {exp}")
    return exp


def monomial_value(z, exp):
    """z^exp for a point z in C^d."""
    val = 1.0 + 0.0j
    for zi, e in zip(z, exp):
        if e:
            val *= zi ** e
    return val


def _normalize(coeffs):
    """Drop relatively negligible coefficients; return a plain dict."""
    if not coeffs:
        return {}
    top = max(np.linalg.norm(m) for m in coeffs.values())
    if top == 0.0:
        return {}
    keep = {}
    for key, mat in coeffs.items():
        if np.linalg.norm(mat) > DROP_REL * top:
            m = np.array(mat, dtype=complex)
            m.setflags(write=False)
            keep[key] = m
    return keep


class MatPoly:
    """Polynomial in z with complex rows x cols matrix coefficients."""

    def __init__(self, d, rows, cols, coeffs=None):
        d, rows, cols = int(d), int(rows), int(cols)
        if d < 1:
            raise ShapeMismatchError("variable count must be positive")
        if rows < 0 or cols < 0:
            raise ShapeMismatchError("matrix dimensions must be nonnegative")
        self.d = d
        self.rows = rows
        self.cols = cols
        clean = {}
        for exp, mat in (coeffs or {}).items():
            exp = _check_exponent(exp, d)
            mat = np.asarray(mat, dtype=complex)
            if mat.shape != (rows, cols):
                raise ShapeMismatchError(
                    f"coefficient at {exp} has shape {mat.shape}, expected {(rows, cols)}"
                )
            clean[exp] = clean.get(exp, 0) + mat
        self.coeffs = _normalize(clean)

    # -- constructors ------------------------------------------------

    @classmethod
    def zero(cls, d, rows, cols):
        return cls(d, rows, cols, {})

    @classmethod
    def constant(cls, mat, d):
        mat = np.atleast_2d(np.asarray(mat, dtype=complex))
        return cls(d, mat.shape[0], mat.shape[1], {(0,) * d: mat})

    @classmethod
    def variable(cls, i, d):
        """The scalar monomial z_i."""
        if not 0 <= i < d:
            raise ShapeMismatchError(f"variable index {i} out of range for d={d}")
        exp = tuple(1 if j == i else 0 for j in range(d))
        return cls(d, 1, 1, {exp: np.eye(1)})

    @classmethod
    def vstack(cls, parts):
        parts = list(parts)
        if not parts:
            raise ShapeMismatchError("vstack of nothing")
        d, cols = parts[0].d, parts[0].cols
        if any(p.d != d or p.cols != cols for p in parts):
            raise ShapeMismatchError("vstack parts disagree on d or cols")
        rows = sum(p.rows for p in parts)
        coeffs = {}
        support = set().union(*(p.coeffs.keys() for p in parts))
        for exp in support:
            coeffs[exp] = np.vstack([
                p.coeffs.get(exp, np.zeros((p.rows, cols))) for p in parts
            ])
        return cls(d, rows, cols, coeffs)

    # -- queries -----------------------------------------------------

    @property
    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.coeffs), default=-1)

    def support(self):
        return sorted(self.coeffs.keys(), key=grlex_key)

    def is_zero(self):
        return not self.coeffs

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        """Evaluate at a point z in C^d."""
        z = np.asarray(z, dtype=complex).reshape(-1)
        if z.shape[0] != self.d:
            raise ShapeMismatchError(f"point has dimension {z.shape[0]}, expected {self.d}")
        out = np.zeros((self.rows, self.cols), dtype=complex)
        for exp, mat in self.coeffs.items():
            out += monomial_value(z, exp) * mat
        return out

    def allclose(self, other, tol=1e-12):
        diff = self - other
        return all(np.linalg.norm(m) <= tol for m in diff.coeffs.values())

    # -- arithmetic --------------------------------------------------

    def _require_same_shape(self, other):
        if (self.d, self.rows, self.cols) != (other.d, other.rows, other.cols):
            raise ShapeMismatchError(
                f"shape ({self.d},{self.rows},{self.cols}) vs "
                f"({other.d},{other.rows},{other.cols})"
            )

    def __add__(self, other):
        self._require_same_shape(other)
        coeffs = dict(self.coeffs)
        for exp, mat in other.coeffs.items():
            coeffs[exp] = coeffs.get(exp, 0) + mat
        return MatPoly(self.d, self.rows, self.cols, coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return MatPoly(self.d, self.rows, self.cols,
                       {e: -m for e, m in self.coeffs.items()})

    def __mul__(self, scalar):
        scalar = complex(scalar)
        return MatPoly(self.d, self.rows, self.cols,
                       {e: scalar * m for e, m in self.coeffs.items()})

    __rmul__ = __mul__

    def __matmul__(self, other):
        """Polynomial matrix product."""
        if self.d != other.d or self.cols != other.rows:
            raise ShapeMismatchError(
                f"cannot multiply ({self.rows}x{self.cols}) by ({other.rows}x{other.cols})"
            )
        coeffs = {}
        for e1, m1 in self.coeffs.items():
            for e2, m2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = m1 @ m2
                coeffs[e] = coeffs.get(e, 0) + prod
        return MatPoly(self.d, self.rows, other.cols, coeffs)

    def kron_identity(self, n):
        """Tensor each coefficient with I_n on the right (P -> P (x) I_n)."""
        n = int(n)
        if n < 0:
            raise ShapeMismatchError("multiplicity must be nonnegative")
        eye = np.eye(n)
        return MatPoly(self.d, self.rows * n, self.cols * n,
                       {e: np.kron(m, eye) for e, m in self.coeffs.items()})

    def scale_vars(self, s):
        """Substitute z -> s*z."""
        s = complex(s)
        return MatPoly(self.d, self.rows, self.cols,
                       {e: (s ** sum(e)) * m for e, m in self.coeffs.items()})

    def pad_cols(self, left, right):
        """Embed into a wider column space: [0 | self | 0]."""
        cols = left + self.cols + right
        coeffs = {}
        for e, m in self.coeffs.items():
            wide = np.zeros((self.rows, cols), dtype=complex)
            wide[:, left:left + self.cols] = m
            coeffs[e] = wide
        return MatPoly(self.d, self.rows, cols, coeffs)

    def __repr__(self):
        return (f"MatPoly(d={self.d}, shape=({self.rows},{self.cols}), "
                f"terms={len(self.coeffs)}, degree={self.degree})")


class HermPoly:
    """Bivariate polynomial in (w, z) with square gamma x gamma coefficients.

    Built to hold Hermitian-symmetric values (coeff(mu, lam) equal to
    coeff(lam, mu)*), but the constructor does not force symmetry:
    ``bivar_outer(f, g)`` with f != g legitimately produces asymmetric
    values.  Use ``herm_defect`` to measure symmetry where it matters.
    """

    def __init__(self, d, size, coeffs=None):
        d, size = int(d), int(size)
        if d < 1:
            raise ShapeMismatchError("variable count must be positive")
        if size < 1:
            raise ShapeMismatchError("coefficient size must be positive")
        self.d = d
        self.size = size
        clean = {}
        for (wexp, zexp), mat in (coeffs or {}).items():
            key = (_check_exponent(wexp, d), _check_exponent(zexp, d))
            mat = np.asarray(mat, dtype=complex)
            if mat.shape != (size, size):
                raise ShapeMismatchError(
                    f"coefficient at {key} has shape {mat.shape}, expected {(size, size)}"
                )
            clean[key] = clean.get(key, 0) + mat
        self.coeffs = _normalize(clean)

    @classmethod
    def zero(cls, d, size):
        return cls(d, size, {})

    @classmethod
    def constant(cls, mat, d):
        mat = np.atleast_2d(np.asarray(mat, dtype=complex))
        if mat.shape[0] != mat.shape[1]:
            raise ShapeMismatchError("constant coefficient must be square")
        zero = (0,) * d
        return cls(d, mat.shape[0], {(zero, zero): mat})

    @property
    def degrees(self):
        """(max w-degree, max z-degree); (-1, -1) for zero."""
        if not self.coeffs:
            return (-1, -1)
        return (max(sum(w) for w, _ in self.coeffs),
                max(sum(z) for _, z in self.coeffs))

    def support(self):
        return sorted(self.coeffs.keys(), key=lambda p: (grlex_key(p[0]), grlex_key(p[1])))

    def is_zero(self):
        return not self.coeffs

    def herm_defect(self):
        """Largest norm of coeff(lam, mu) - coeff(mu, lam)*; 0 when Hermitian."""
        worst = 0.0
        for (w, z), mat in self.coeffs.items():
            other = self.coeffs.get((z, w))
            if other is None:
                worst = max(worst, float(np.linalg.norm(mat)))
            else:
                worst = max(worst, float(np.linalg.norm(mat - other.conj().T)))
        return worst

    def eval(self, w, z):
        """Evaluate at (w, z); pass w = conj(z) for the diagonal restriction."""
        w = np.asarray(w, dtype=complex).reshape(-1)
        z = np.asarray(z, dtype=complex).reshape(-1)
        if w.shape[0] != self.d or z.shape[0] != self.d:
            raise ShapeMismatchError("point dimension mismatch")
        out = np.zeros((self.size, self.size), dtype=complex)
        for (wexp, zexp), mat in self.coeffs.items():
            out += monomial_value(w, wexp) * monomial_value(z, zexp) * mat
        return out

    def _require_same_shape(self, other):
        if (self.d, self.size) != (other.d, other.size):
            raise ShapeMismatchError(
                f"shape (d={self.d}, size={self.size}) vs (d={other.d}, size={other.size})"
            )

    def __add__(self, other):
        self._require_same_shape(other)
        coeffs = dict(self.coeffs)
        for key, mat in other.coeffs.items():
            coeffs[key] = coeffs.get(key, 0) + mat
        return HermPoly(self.d, self.size, coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return HermPoly(self.d, self.size, {k: -m for k, m in self.coeffs.items()})

    def __mul__(self, scalar):
        scalar = complex(scalar)
        return HermPoly(self.d, self.size, {k: scalar * m for k, m in self.coeffs.items()})

    __rmul__ = __mul__

    def kron_identity(self, n):
        """Coefficientwise P -> P (x) I_n."""
        n = int(n)
        eye = np.eye(n)
        return HermPoly(self.d, self.size * n,
                        {k: np.kron(m, eye) for k, m in self.coeffs.items()})

    def allclose(self, other, tol=1e-12):
        diff = self - other
        return all(np.linalg.norm(m) <= tol for m in diff.coeffs.values())

    def max_coeff_norm(self):
        return max((float(np.linalg.norm(m)) for m in self.coeffs.values()), default=0.0)

    def __repr__(self):
        return (f"HermPoly(d={self.d}, size={self.size}, terms={len(self.coeffs)}, "
                f"degrees={self.degrees})")


def eval_matpoly(p, z):
    """Sum of p_mu z^mu at a point."""
    return p.eval(z)


def bivar_outer(f, g):
    """f*(w) g(z) as a bivariate polynomial: coeff(lam, mu) = f_lam* g_mu.

    Requires matching shapes; the result has size f.cols and satisfies the
    Hermitian symmetry invariant exactly when f is g.
    """
    if f.d != g.d:
        raise ShapeMismatchError("variable count mismatch")
    if f.rows != g.rows or f.cols != g.cols:
        raise ShapeMismatchError(
            f"bivar_outer needs equal shapes, got ({f.rows}x{f.cols}) and ({g.rows}x{g.cols})"
        )
    coeffs = {}
    if f is g:
        # Build adjoint pairs from one product so the Hermitian symmetry
        # invariant holds exactly, not merely to rounding.
        support = sorted(f.coeffs.keys(), key=grlex_key)
        for i, lam in enumerate(support):
            fh = f.coeffs[lam].conj().T
            for mu in support[i:]:
                prod = fh @ f.coeffs[mu]
                if mu == lam:
                    coeffs[(lam, lam)] = 0.5 * (prod + prod.conj().T)
                else:
                    coeffs[(lam, mu)] = prod
                    coeffs[(mu, lam)] = prod.conj().T
        return HermPoly(f.d, f.cols, coeffs)
    for lam, fmat in f.coeffs.items():
        fh = fmat.conj().T
        for mu, gmat in g.coeffs.items():
            coeffs[(lam, mu)] = coeffs.get((lam, mu), 0) + fh @ gmat
    return HermPoly(f.d, f.cols, coeffs)


def herm_congruence(P, F):
    """F*(w) P(w, z) F(z) for a matrix polynomial F with F.rows == P.size."""
    if P.d != F.d:
        raise ShapeMismatchError("variable count mismatch")
    if F.rows != P.size:
        raise ShapeMismatchError(f"F has {F.rows} rows, P has size {P.size}")
    coeffs = {}
    for (alpha, beta), mid in P.coeffs.items():
        for lam, fl in F.coeffs.items():
            left = fl.conj().T @ mid
            for mu, fm in F.coeffs.items():
                key = (tuple(a + b for a, b in zip(alpha, lam)),
                       tuple(a + b for a, b in zip(beta, mu)))
                coeffs[key] = coeffs.get(key, 0) + left @ fm
    return HermPoly(P.d, F.cols, coeffs)


class CommutingTuple:
    """A d-tuple of commuting N x N complex matrices.

    Construction verifies pairwise commutators against a tolerance
    (default 1e-10 * max ||T_i||^2) and fails loudly beyond it, since
    hereditary evaluation is order-dependent on non-commuting tuples.
    """

    def __init__(self, mats, tol=None):
        mats = [np.asarray(m, dtype=complex) for m in mats]
        if not mats:
            raise ShapeMismatchError("empty tuple")
        n = mats[0].shape[0]
        for m in mats:
            if m.ndim != 2 or m.shape != (n, n):
                raise ShapeMismatchError("tuple entries must be square and same size")
        self.mats = mats
        self.d = len(mats)
        self.n = n
        norms = [np.linalg.norm(m, 2) for m in mats]
        top = max(norms) if norms else 0.0
        if tol is None:
            tol = 1e-10 * top * top
        self.tol = tol
        worst = 0.0
        for i in range(self.d):
            for j in range(i + 1, self.d):
                comm = mats[i] @ mats[j] - mats[j] @ mats[i]
                worst = max(worst, np.linalg.norm(comm, 2))
        if worst > tol:
            raise CommutationError(
                f"commutator norm {worst:.3e} exceeds tolerance {tol:.3e}"
            )
        self.commutator_norm = worst

    @classmethod
    def joint_diagonal(cls, points):
        """Diagonal tuple with joint spectrum at the given points.

        points: array-like of shape (N, d); T_i = diag(points[:, i]).
        """
        pts = np.asarray(points, dtype=complex)
        if pts.ndim != 2:
            raise ShapeMismatchError("points must be a 2-d array (N, d)")
        return cls([np.diag(pts[:, i]) for i in range(pts.shape[1])])

    def monomial(self, exp, _cache=None):
        """T^exp = T_1^e1 ... T_d^ed in fixed variable order."""
        exp = _check_exponent(exp, self.d)
        out = np.eye(self.n, dtype=complex)
        for i, e in enumerate(exp):
            if e:
                out = out @ np.linalg.matrix_power(self.mats[i], e)
        return out


def hereditary_eval(P, T):
    """Hereditary evaluation sum_{lam,mu} P_{lam,mu} (x) T*^lam T^mu.

    The result is Hermitian up to floating error whenever P is
    Hermitian-symmetric.
    """
    if P.d != T.d:
        raise ShapeMismatchError(f"polynomial has d={P.d}, tuple has d={T.d}")
    size = P.size * T.n
    out = np.zeros((size, size), dtype=complex)
    cache = {}

    def power(exp):
        if exp not in cache:
            cache[exp] = T.monomial(exp)
        return cache[exp]

    for (lam, mu), mat in P.coeffs.items():
        out += np.kron(mat, power(lam).conj().T @ power(mu))
    return out


def coeff_matrix(f, basis):
    """Vertical stack of the coefficients of f in the given monomial order.

    The basis must cover the support of f; missing monomials are an error.
    """
    basis = [_check_exponent(b, f.d) for b in basis]
    missing = set(f.coeffs) - set(basis)
    if missing:
        raise ShapeMismatchError(f"basis misses support monomials {sorted(missing)}")
    if not basis:
        return np.zeros((0, f.cols), dtype=complex)
    blocks = [f.coeffs.get(b, np.zeros((f.rows, f.cols), dtype=complex)) for b in basis]
    return np.vstack(blocks)


def coeff_hstack(f, basis):
    """Horizontal stack [f_{mu_1} | f_{mu_2} | ...] over the basis.

    Its column space equals span{f(z) y : z, y}, which is the space the
    lurking-contraction construction works in.
    """
    basis = [_check_exponent(b, f.d) for b in basis]
    missing = set(f.coeffs) - set(basis)
    if missing:
        raise ShapeMismatchError(f"basis misses support monomials {sorted(missing)}")
    if not basis:
        return np.zeros((f.rows, 0), dtype=complex)
    blocks = [f.coeffs.get(b, np.zeros((f.rows, f.cols), dtype=complex)) for b in basis]
    return np.hstack(blocks)

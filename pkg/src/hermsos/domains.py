"""Polynomially defined domains D = {z : ||P(z)|| < 1} with P a block
direct sum, plus the preset catalog (polydisk, matrix/symmetric/skew
matrix unit balls) and the per-variable Archimedean radius search."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ShapeMismatchError
from .polynomials import HermPoly, MatPoly, bivar_outer

_PRESET_RE = re.compile(r"^(polydisk|cartan1|cartan2|cartan3):(\d+)(?:x(\d+))?$")


class DomainSpec:
    """Block list of matrix polynomials P_1, ..., P_k defining the domain.

    Membership: z is interior iff the largest singular value of the block
    diagonal of the P_i(z) is below 1.
    """

    def __init__(self, blocks, name=None):
        blocks = list(blocks)
        if not blocks:
            raise ShapeMismatchError("a domain needs at least one block")
        d = blocks[0].d
        if any(b.d != d for b in blocks):
            raise ShapeMismatchError("blocks disagree on the variable count")
        self.blocks = blocks
        self.d = d
        self.name = name

    @property
    def k(self):
        return len(self.blocks)

    def block_shapes(self):
        """[(l_i, m_i)] for the blocks."""
        return [(b.rows, b.cols) for b in self.blocks]

    def assembled_shape(self):
        return (sum(b.rows for b in self.blocks), sum(b.cols for b in self.blocks))

    def p_at(self, z):
        """The assembled block-diagonal value of P at z."""
        return scipy.linalg.block_diag(*[b.eval(z) for b in self.blocks])

    def p_norm_at(self, z):
        """Largest singular value of P(z); interior iff < 1."""
        return float(np.linalg.norm(self.p_at(z), 2))

    def defect_polys(self):
        """The generators I_{m_i} - P_i*(w) P_i(z), one per block."""
        out = []
        for b in self.blocks:
            eye = HermPoly.constant(np.eye(b.cols), self.d)
            out.append(eye - bivar_outer(b, b))
        return out

    def scale_vars(self, s):
        """Domain with every block precomposed with z -> s*z."""
        return DomainSpec([b.scale_vars(s) for b in self.blocks], name=None)

    # -- sampling ------------------------------------------------------

    def axis_radii(self, limit=2.0 ** 30):
        """Per-variable box radii for sampling, found by doubling along
        each coordinate axis until the block norm reaches 1.

        Raises for directions along which the norm never reaches 1 (the
        domain is unbounded there and no sampling box exists).
        """
        radii = []
        for i in range(self.d):
            e = np.zeros(self.d)
            e[i] = 1.0
            t = 1.0
            if self.p_norm_at(t * e) < 1.0:
                while self.p_norm_at(t * e) < 1.0:
                    t *= 2.0
                    if t > limit:
                        raise ShapeMismatchError(
                            f"no bounding box: ||P|| stays below 1 along variable {i}"
                        )
            else:
                while t > 1.0 / limit and self.p_norm_at(t * e) >= 1.0:
                    t /= 2.0
                t *= 2.0
            radii.append(t)
        return radii

    def sample_interior(self, count, margin=1e-3, seed=0):
        """count points with ||P(z)|| <= 1 - margin, reproducible by seed.

        Points are drawn uniformly from the bounding box and shrunk toward
        the origin until the norm condition holds; the margin is a hard
        postcondition.
        """
        if not 0 < margin < 1:
            raise ValueError("margin must lie in (0, 1)")
        if count == 0:
            return []
        radii = np.asarray(self.axis_radii())
        rng = np.random.default_rng(seed)
        points = []
        for _ in range(count):
            z = None
            for _attempt in range(40):
                cand = radii * (rng.uniform(-1, 1, self.d) + 1j * rng.uniform(-1, 1, self.d))
                if self.p_norm_at(cand) <= 1.0 - margin:
                    z = cand
                    break
                z = cand
            steps = 0
            while self.p_norm_at(z) > 1.0 - margin:
                z = 0.9 * z
                steps += 1
                if steps > 600:
                    raise ShapeMismatchError(
                        "shrink toward the origin never reached the margin; "
                        f"||P(0)|| = {self.p_norm_at(np.zeros(self.d)):.3f}"
                    )
            points.append(z)
        return points

    def push_to_boundary(self, z, target=1.0 - 1e-6, limit=2.0 ** 20):
        """Scale z outward/inward along its ray until ||P|| is near target."""
        z = np.asarray(z, dtype=complex)
        lo, hi = 0.0, 1.0
        while self.p_norm_at(hi * z) < target:
            lo, hi = hi, hi * 2.0
            if hi > limit:
                return None
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self.p_norm_at(mid * z) < target:
                lo = mid
            else:
                hi = mid
        return lo * z

    def describe(self):
        return {
            "name": self.name,
            "d": self.d,
            "blocks": [{"rows": b.rows, "cols": b.cols, "degree": b.degree}
                       for b in self.blocks],
        }

    def __repr__(self):
        label = self.name or "custom"
        return f"DomainSpec({label}, d={self.d}, k={self.k})"


# -- presets -----------------------------------------------------------


def polydisk(d):
    """Unit polydisk: d scalar blocks (z_1), ..., (z_d)."""
    if d < 1:
        raise ValueError("polydisk needs d >= 1")
    return DomainSpec([MatPoly.variable(i, d) for i in range(d)], name=f"polydisk:{d}")


def cartan1(l, m):
    """Matrix unit ball: one l x m block [z_{rs}], row-major, d = l*m."""
    if l < 1 or m < 1:
        raise ValueError("cartan1 needs positive dimensions")
    d = l * m
    coeffs = {}
    for r in range(l):
        for s in range(m):
            exp = [0] * d
            exp[r * m + s] = 1
            mat = np.zeros((l, m), dtype=complex)
            mat[r, s] = 1.0
            coeffs[tuple(exp)] = mat
    return DomainSpec([MatPoly(d, l, m, coeffs)], name=f"cartan1:{l}x{m}")


def cartan2(m):
    """Symmetric matrix unit ball: m x m with z_{rs} = z_{sr},
    d = m(m+1)/2 independent entries indexed row-major over r <= s."""
    if m < 1:
        raise ValueError("cartan2 needs m >= 1")
    d = m * (m + 1) // 2
    index = {}
    pos = 0
    for r in range(m):
        for s in range(r, m):
            index[(r, s)] = pos
            pos += 1
    coeffs = {}
    for (r, s), i in index.items():
        exp = [0] * d
        exp[i] = 1
        mat = np.zeros((m, m), dtype=complex)
        mat[r, s] = 1.0
        if r != s:
            mat[s, r] = 1.0
        coeffs[tuple(exp)] = mat
    return DomainSpec([MatPoly(d, m, m, coeffs)], name=f"cartan2:{m}")


def cartan3(m):
    """Skew-symmetric matrix unit ball: z_{sr} = -z_{rs}, zero diagonal,
    d = m(m-1)/2 independent entries indexed row-major over r < s."""
    if m < 2:
        raise ValueError("cartan3 needs m >= 2")
    d = m * (m - 1) // 2
    index = {}
    pos = 0
    for r in range(m):
        for s in range(r + 1, m):
            index[(r, s)] = pos
            pos += 1
    coeffs = {}
    for (r, s), i in index.items():
        exp = [0] * d
        exp[i] = 1
        mat = np.zeros((m, m), dtype=complex)
        mat[r, s] = 1.0
        mat[s, r] = -1.0
        coeffs[tuple(exp)] = mat
    return DomainSpec([MatPoly(d, m, m, coeffs)], name=f"cartan3:{m}")


def make_preset(spec):
    """Parse a preset string: polydisk:d, cartan1:LxM, cartan2:m, cartan3:m."""
    m = _PRESET_RE.match(spec.strip())
    if not m:
        raise ValueError(f"unrecognized domain preset {spec!r}")
    kind, a, b = m.group(1), int(m.group(2)), m.group(3)
    if kind == "polydisk":
        if b is not None:
            raise ValueError("polydisk takes a single parameter")
        return polydisk(a)
    if kind == "cartan1":
        if b is None:
            raise ValueError("cartan1 takes LxM, e.g. cartan1:1x3")
        return cartan1(a, int(b))
    if b is not None:
        raise ValueError(f"{kind} takes a single parameter")
    return cartan2(a) if kind == "cartan2" else cartan3(a)


# -- Archimedean check ---------------------------------------------------


@dataclass
class VariableRadius:
    """Per-variable outcome of the Archimedean search."""
    variable: int
    radius: float | None
    degree: int | None
    certificate: object | None
    message: str = ""

    @property
    def ok(self):
        return self.radius is not None


@dataclass
class ArchimedeanReport:
    entries: list[VariableRadius]
    max_degree: int
    r_max: float
    r_tol: float
    notes: list[str] = field(default_factory=list)

    @property
    def all_ok(self):
        return all(e.ok for e in self.entries)

    def radii(self):
        return [e.radius for e in self.entries]


def archimedean_check(spec, max_degree=2, r_max=4.0, r_tol=1e-3, tol=1e-8):
    """Smallest radius r_i <= r_max per variable such that r_i^2 - w_i z_i
    lies in the quadratic module generated by the domain defects, with a
    witness certificate at some degree <= max_degree.

    Feasibility is monotone upward in r (adding the PSD constant
    r'^2 - r^2 keeps a witness a witness), so bisection applies.  Failures
    are reported per variable, not raised.
    """
    from .certificates import try_certify_at_degree

    defects = spec.defect_polys()
    zero = (0,) * spec.d
    entries = []
    for i in range(spec.d):
        e_i = tuple(1 if j == i else 0 for j in range(spec.d))

        hint = {"degree": 0}

        def probe(r):
            target = HermPoly(spec.d, 1, {
                (zero, zero): [[r * r]],
                (e_i, e_i): [[-1.0]],
            })
            order = [hint["degree"]] + [D for D in range(max_degree + 1)
                                        if D != hint["degree"]]
            for D in order:
                cert = try_certify_at_degree(target, defects, D, tol=tol)
                if cert is not None:
                    hint["degree"] = D
                    return cert
            return None

        top = probe(r_max)
        if top is None:
            entries.append(VariableRadius(
                variable=i, radius=None, degree=None, certificate=None,
                message=f"no witness up to degree {max_degree} at r_max={r_max}"))
            continue
        lo, hi, best = 0.0, r_max, top
        while hi - lo > r_tol:
            mid = 0.5 * (lo + hi)
            cert = probe(mid)
            if cert is not None:
                hi, best = mid, cert
            else:
                lo = mid
        entries.append(VariableRadius(
            variable=i, radius=hi, degree=best.degree, certificate=best))

    notes = []
    if spec.name is None:
        notes.append(
            "custom domain: the standing approximation hypothesis (tuples with "
            "||P(T)|| <= 1 are norm limits of strict ones) is not checked by this tool"
        )
    return ArchimedeanReport(entries=entries, max_degree=max_degree,
                             r_max=r_max, r_tol=r_tol, notes=notes)

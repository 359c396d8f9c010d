"""Canonical-form arithmetic on matrix-valued rational functions of the
spectral parameter, plus the rational functions of the broadening frequency
that feed them.

A loop element is stored as a polynomial part (coefficients for lambda^0..d)
plus first-to-j-th order pole terms at a finite pole set.  All products are
re-expanded into this canonical form by exact partial fractions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DomainError, NearPole, OrderOverflow, PoleCollision
from .su2 import Gl2Vector, ZERO_GL2, gl2_mul, to_matrix

MERGE_TOL = 1e-9       # relative pole-identity tolerance
PRUNE_TOL = 1e-14      # relative coefficient prune threshold
DEFAULT_MAX_ORDER = 4


def _pole_scale(poles) -> float:
    return max([1.0] + [abs(p) for p in poles])


@dataclass(frozen=True)
class PoleSet:
    """Ordered pole locations of the algebra, closed under negation when
    built from soliton data: first the n+2 base points i*m_k, w0-i*s, w0+i*s,
    then their negatives."""

    poles: tuple
    merge_tol: float = MERGE_TOL

    @classmethod
    def from_soliton(cls, m_list, omega0, sigma):
        base = [1j * m for m in m_list]
        base += [omega0 - 1j * sigma, omega0 + 1j * sigma]
        poles = tuple(base + [-p for p in base])
        ps = cls(poles)
        ps.validate()
        return ps

    @property
    def base(self):
        return self.poles[: len(self.poles) // 2]

    def validate(self):
        scale = _pole_scale(self.poles)
        for i, p in enumerate(self.poles):
            for q in self.poles[i + 1:]:
                if abs(p - q) <= self.merge_tol * scale:
                    raise PoleCollision(f"poles {p} and {q} coincide")


class LoopElement:
    """Matrix-valued rational function in canonical form.

    poly   -- tuple of Gl2Vector coefficients for lambda^0..lambda^d
    poles  -- tuple of (pole, coeffs) with coeffs[j-1] the order-j Gl2Vector
    """

    __slots__ = ("poly", "poles", "max_order")

    def __init__(self, poly=(), poles=(), max_order=DEFAULT_MAX_ORDER):
        poly = list(poly)
        merged = {}
        locs = []
        for pole, coeffs in poles:
            pole = complex(pole)
            if pole in merged:
                cur = merged[pole]
                for j, c in enumerate(coeffs):
                    if j < len(cur):
                        cur[j] = cur[j] + c
                    else:
                        cur.append(c)
            else:
                merged[pole] = list(coeffs)
                locs.append(pole)
        scale = _pole_scale(locs)
        for i, p in enumerate(locs):
            for q in locs[i + 1:]:
                if abs(p - q) <= MERGE_TOL * scale:
                    raise PoleCollision(f"poles {p} and {q} collide in element")

        # prune relative dust, trim trailing zeros
        mags = [c.max_abs() for c in poly]
        mags += [c.max_abs() for cs in merged.values() for c in cs]
        ref = max(mags) if mags else 0.0
        tol = PRUNE_TOL * ref

        def clean(c):
            return Gl2Vector(
                c.id if abs(c.id) > tol else 0.0,
                c.h if abs(c.h) > tol else 0.0,
                c.f if abs(c.f) > tol else 0.0,
                c.e if abs(c.e) > tol else 0.0,
            )

        poly = [clean(c) for c in poly]
        while poly and poly[-1].max_abs() == 0.0:
            poly.pop()
        out_poles = []
        for pole in sorted(locs, key=lambda z: (z.real, z.imag)):
            cs = [clean(c) for c in merged[pole]]
            while cs and cs[-1].max_abs() == 0.0:
                cs.pop()
            if not cs:
                continue
            if len(cs) > max_order:
                raise OrderOverflow(
                    f"pole order {len(cs)} at {pole} exceeds bound {max_order}")
            out_poles.append((pole, tuple(cs)))
        object.__setattr__(self, "poly", tuple(poly))
        object.__setattr__(self, "poles", tuple(out_poles))
        object.__setattr__(self, "max_order", max_order)

    def __setattr__(self, *a):  # immutable after construction
        raise AttributeError("LoopElement is immutable")

    # -- introspection -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.poly and not self.poles

    def poly_degree(self) -> int:
        return len(self.poly) - 1

    def pole_locations(self):
        return tuple(p for p, _ in self.poles)

    def pole_order(self, pole) -> int:
        for p, cs in self.poles:
            if p == pole:
                return len(cs)
        return 0

    def coeff_scale(self) -> float:
        mags = [c.max_abs() for c in self.poly]
        mags += [c.max_abs() for _, cs in self.poles for c in cs]
        return max(mags) if mags else 0.0

    def __repr__(self):
        return (f"LoopElement(deg={self.poly_degree()}, "
                f"poles={[(p, len(cs)) for p, cs in self.poles]})")


def zero(max_order=DEFAULT_MAX_ORDER) -> LoopElement:
    return LoopElement((), (), max_order)


def from_poly(coeffs, max_order=DEFAULT_MAX_ORDER) -> LoopElement:
    """Polynomial element from Gl2Vector coefficients lambda^0..d."""
    return LoopElement(tuple(coeffs), (), max_order)


def pole_element(pole, coeff, order=1, max_order=DEFAULT_MAX_ORDER) -> LoopElement:
    """Single pole term coeff/(lambda-pole)^order."""
    coeffs = [ZERO_GL2] * order
    coeffs[order - 1] = coeff
    return LoopElement((), ((pole, tuple(coeffs)),), max_order)


# -- linear structure ---------------------------------------------------


def add(x: LoopElement, y: LoopElement) -> LoopElement:
    mo = max(x.max_order, y.max_order)
    poly = list(x.poly) + [ZERO_GL2] * max(0, len(y.poly) - len(x.poly))
    for d, c in enumerate(y.poly):
        poly[d] = poly[d] + c
    return LoopElement(poly, x.poles + y.poles, mo)


def scale(x: LoopElement, s) -> LoopElement:
    return LoopElement(
        tuple(c.scaled(s) for c in x.poly),
        tuple((p, tuple(c.scaled(s) for c in cs)) for p, cs in x.poles),
        x.max_order,
    )


def sub(x: LoopElement, y: LoopElement) -> LoopElement:
    return add(x, scale(y, -1.0))


# -- multiplication by partial fractions --------------------------------


def _monomial_times_pole(p, alpha, j):
    """lambda^p/(lambda-alpha)^j as (poly coeffs in lambda, pole coeffs).

    Uses lambda^p = sum_s C(p,s) alpha^(p-s) (lambda-alpha)^s; s >= j gives
    the polynomial part, s < j a pole of order j-s.
    """
    poly = [0.0] * max(0, p - j + 1)
    pole = [0.0] * j
    for s in range(p + 1):
        c = comb(p, s) * alpha ** (p - s)
        if s >= j:
            d = s - j  # degree in mu = lambda - alpha; re-expand into lambda
            for t in range(d + 1):
                poly[t] += c * comb(d, t) * (-alpha) ** (d - t)
        else:
            pole[j - s - 1] += c
    return poly, pole


def _pole_times_pole(alpha, i, beta, j, scale_ref):
    """1/((lambda-alpha)^i (lambda-beta)^j) -> {pole: order coeffs}."""
    if alpha == beta:
        return {alpha: [0.0] * (i + j - 1) + [1.0]}
    if abs(alpha - beta) <= MERGE_TOL * scale_ref:
        raise PoleCollision(f"pole collision between {alpha} and {beta}")
    out = {alpha: [0.0] * i, beta: [0.0] * j}
    d = alpha - beta
    for t in range(i):  # order i-t at alpha
        out[alpha][i - t - 1] += (-1) ** t * comb(j + t - 1, t) * d ** (-j - t)
    d = beta - alpha
    for t in range(j):  # order j-t at beta
        out[beta][j - t - 1] += (-1) ** t * comb(i + t - 1, t) * d ** (-i - t)
    return out


def multiply(x: LoopElement, y: LoopElement) -> LoopElement:
    """Exact product re-expanded into canonical form."""
    mo = max(x.max_order, y.max_order)
    scale_ref = _pole_scale(list(x.pole_locations()) + list(y.pole_locations()))
    poly_acc = {}
    pole_acc = {}

    def add_poly(d, c):
        poly_acc[d] = poly_acc.get(d, ZERO_GL2) + c

    def add_pole(p, order, c):
        if order > mo:
            raise OrderOverflow(f"pole order {order} at {p} exceeds bound {mo}")
        cur = pole_acc.setdefault(p, [])
        while len(cur) < order:
            cur.append(ZERO_GL2)
        cur[order - 1] = cur[order - 1] + c

    # poly x poly
    for dx, cx in enumerate(x.poly):
        if cx.max_abs() == 0.0:
            continue
        for dy, cy in enumerate(y.poly):
            if cy.max_abs() == 0.0:
                continue
            add_poly(dx + dy, gl2_mul(cx, cy))

    # poly x pole and pole x poly (matrix order preserved)
    def poly_pole(poly_side, pole_side, left):
        for d, cp in enumerate(poly_side):
            if cp.max_abs() == 0.0:
                continue
            for pole, coeffs in pole_side:
                for jm1, cq in enumerate(coeffs):
                    if cq.max_abs() == 0.0:
                        continue
                    mat = gl2_mul(cp, cq) if left else gl2_mul(cq, cp)
                    pc, oc = _monomial_times_pole(d, pole, jm1 + 1)
                    for dd, s in enumerate(pc):
                        if s != 0.0:
                            add_poly(dd, mat.scaled(s))
                    for om1, s in enumerate(oc):
                        if s != 0.0:
                            add_pole(pole, om1 + 1, mat.scaled(s))

    poly_pole(x.poly, y.poles, left=True)
    poly_pole(y.poly, x.poles, left=False)

    # pole x pole
    for pa, csa in x.poles:
        for ia, ca in enumerate(csa):
            if ca.max_abs() == 0.0:
                continue
            for pb, csb in y.poles:
                for ib, cb in enumerate(csb):
                    if cb.max_abs() == 0.0:
                        continue
                    mat = gl2_mul(ca, cb)
                    parts = _pole_times_pole(pa, ia + 1, pb, ib + 1, scale_ref)
                    for pp, orders in parts.items():
                        for om1, s in enumerate(orders):
                            if s != 0.0:
                                add_pole(pp, om1 + 1, mat.scaled(s))

    deg = max(poly_acc) if poly_acc else -1
    poly = [poly_acc.get(d, ZERO_GL2) for d in range(deg + 1)]
    poles = tuple((p, tuple(cs)) for p, cs in pole_acc.items())
    return LoopElement(poly, poles, mo)


def commutator(x: LoopElement, y: LoopElement) -> LoopElement:
    """multiply(x, y) - multiply(y, x); identity parts cancel exactly."""
    return sub(multiply(x, y), multiply(y, x))


def inner_product(x: LoopElement, y: LoopElement) -> complex:
    """Trace of the lambda^0 polynomial coefficient of the product."""
    prod = multiply(x, y)
    if not prod.poly:
        return 0.0 + 0.0j
    return prod.poly[0].trace()


# -- projections and translation -----------------------------------------


def proj_a(x: LoopElement) -> LoopElement:
    """Pure pole part (the subalgebra of strictly proper elements)."""
    return LoopElement((), x.poles, x.max_order)


def proj_b(x: LoopElement) -> LoopElement:
    """Polynomial part."""
    return LoopElement(x.poly, (), x.max_order)


def proj_a_perp(x: LoopElement) -> LoopElement:
    """Pole part plus the lambda^0 polynomial coefficient."""
    poly = x.poly[:1]
    return LoopElement(poly, x.poles, x.max_order)


def translate(x: LoopElement, x1: Gl2Vector) -> LoopElement:
    """x + lambda*x1 for x with no polynomial terms of degree >= 1."""
    for c in x.poly[1:]:
        if c.max_abs() != 0.0:
            raise DomainError("translate requires an element of a-perp")
    poly = [x.poly[0] if x.poly else ZERO_GL2, x1]
    return LoopElement(poly, x.poles, x.max_order)


def evaluate(x: LoopElement, lam) -> np.ndarray:
    """Pointwise evaluation; NearPole when lam is too close to a pole."""
    lam = complex(lam)
    scale_ref = _pole_scale(x.pole_locations())
    for p, _ in x.poles:
        if abs(lam - p) <= MERGE_TOL * scale_ref:
            raise NearPole(f"evaluation at {lam} too close to pole {p}")
    out = np.zeros((2, 2), dtype=complex)
    for d, c in enumerate(x.poly):
        out += to_matrix(c) * lam ** d
    for p, cs in x.poles:
        for jm1, c in enumerate(cs):
            out += to_matrix(c) / (lam - p) ** (jm1 + 1)
    return out


def allclose(x: LoopElement, y: LoopElement, tol=1e-11) -> bool:
    d = sub(x, y)
    ref = max(x.coeff_scale(), y.coeff_scale(), 1e-300)
    return d.coeff_scale() <= tol * ref


# -- serialization --------------------------------------------------------

_SCHEMA = "loop-element-v1"


def _c2pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _pair2c(p):
    return complex(p[0], p[1])


def to_document(x: LoopElement) -> dict:
    return {
        "schema": _SCHEMA,
        "max_order": x.max_order,
        "poly": [[_c2pair(c.id), _c2pair(c.h), _c2pair(c.f), _c2pair(c.e)]
                 for c in x.poly],
        "poles": [
            {
                "pole": _c2pair(p),
                "terms": [[_c2pair(c.id), _c2pair(c.h), _c2pair(c.f), _c2pair(c.e)]
                          for c in cs],
            }
            for p, cs in x.poles
        ],
    }


def from_document(doc: dict) -> LoopElement:
    if doc.get("schema") != _SCHEMA:
        raise DomainError(f"unknown serialization schema: {doc.get('schema')}")

    def vec(q):
        return Gl2Vector(_pair2c(q[0]), _pair2c(q[1]), _pair2c(q[2]), _pair2c(q[3]))

    poly = [vec(q) for q in doc["poly"]]
    poles = [(_pair2c(rec["pole"]), tuple(vec(q) for q in rec["terms"]))
             for rec in doc["poles"]]
    return LoopElement(poly, poles, doc["max_order"])


def to_text(x: LoopElement) -> str:
    return json.dumps(to_document(x), indent=1)


def from_text(text: str) -> LoopElement:
    return from_document(json.loads(text))


# -- rational functions of the broadening frequency ----------------------


@dataclass(frozen=True)
class OmegaPotential:
    """Rational function of the broadening frequency w with the fixed
    denominator ((w-w0)^2 + s^2) * prod_k (w^2 + m_k^2) and an odd numerator
    w * sum_k coeffs[k] * w^(2k)."""

    coeffs: tuple           # complex coefficients of w^1, w^3, ...
    m_list: tuple
    omega0: float
    sigma: float

    def __post_init__(self):
        if len(self.coeffs) != len(self.m_list) + 1:
            raise DomainError("numerator degree must be 2n+1 for n pole factors")

    def numerator(self, w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros_like(w)
        for k, c in enumerate(self.coeffs):
            out = out + c * w ** (2 * k + 1)
        return out

    def denominator(self, w):
        w = np.asarray(w, dtype=complex)
        out = (w - self.omega0) ** 2 + self.sigma ** 2
        for m in self.m_list:
            out = out * (w ** 2 + m ** 2)
        return out

    def __call__(self, w):
        return self.numerator(w) / self.denominator(w)

    def denominator_roots(self):
        """All simple roots of the denominator (upper and lower half plane)."""
        roots = [self.omega0 + 1j * self.sigma, self.omega0 - 1j * self.sigma]
        for m in self.m_list:
            roots += [1j * m, -1j * m]
        return roots

    def is_zero(self, tol=0.0) -> bool:
        return all(abs(c) <= tol for c in self.coeffs)


def omega_potential_zero(m_list, omega0, sigma) -> OmegaPotential:
    return OmegaPotential((0.0,) * (len(m_list) + 1), tuple(m_list), omega0, sigma)


def _check_omega_poles(m_list, omega0, sigma):
    pts = [1j * m for m in m_list] + [omega0 + 1j * sigma]
    scale_ref = _pole_scale(pts)
    for i, p in enumerate(pts):
        for q in pts[i + 1:]:
            if abs(p - q) <= MERGE_TOL * scale_ref:
                raise PoleCollision(f"broadening poles {p} and {q} coincide")


def omega_integral_to_loop(h: OmegaPotential, f: OmegaPotential,
                           e: OmegaPotential,
                           max_order=DEFAULT_MAX_ORDER) -> LoopElement:
    """Closed form of int [lam*(h*H + f*F) + e*E] / (w^2 - lam^2) dw.

    Computed by closing the contour in the upper half w-plane (valid for
    Im lam > 0) and collecting residues; the result is the rational function
    of lam obtained by analytic continuation.  Denominator poles contribute
    through 1/(w_p^2 - lam^2); the w = lam pole contributes the partial
    fractions of pi*i*[numer_h(lam)*H + numer_f(lam)*F + numer_e(lam)/lam*E]
    over the denominator evaluated in lam.
    """
    if not (h.m_list == f.m_list == e.m_list
            and h.omega0 == f.omega0 == e.omega0
            and h.sigma == f.sigma == e.sigma):
        raise DomainError("potentials must share one denominator")
    _check_omega_poles(h.m_list, h.omega0, h.sigma)

    roots = h.denominator_roots()
    den = np.polynomial.polynomial.polyfromroots(roots)
    dden = np.polynomial.polynomial.polyder(den)

    def dprime(r):
        return np.polynomial.polynomial.polyval(r, dden)

    terms = []
    upper = [r for r in roots if r.imag > 0.0]
    for r in upper:
        fac = 2j * np.pi / dprime(r)
        ch = complex(h.numerator(r)) * fac
        cf = complex(f.numerator(r)) * fac
        ce = complex(e.numerator(r)) * fac
        # lam/(r^2-lam^2) = -(1/2)[1/(lam-r) + 1/(lam+r)]
        # 1 /(r^2-lam^2) = -(1/(2r))[1/(lam-r) - 1/(lam+r)]
        hf = Gl2Vector(0.0, ch, cf, 0.0)
        terms.append(pole_element(r, hf.scaled(-0.5) + Gl2Vector(e=-ce / (2 * r)),
                                  1, max_order))
        terms.append(pole_element(-r, hf.scaled(-0.5) + Gl2Vector(e=ce / (2 * r)),
                                  1, max_order))

    # w = lam residue: proper rational of lam, partial fractions over all roots
    for r in roots:
        fac = 1j * np.pi / dprime(r)
        coeff = Gl2Vector(
            0.0,
            complex(h.numerator(r)) * fac,
            complex(f.numerator(r)) * fac,
            complex(e.numerator(r)) / r * fac,
        )
        terms.append(pole_element(r, coeff, 1, max_order))

    out = zero(max_order)
    for t in terms:
        out = add(out, t)
    return out

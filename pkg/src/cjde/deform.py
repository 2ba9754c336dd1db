"""Deformation workflow over point-base instances.

Over a point base the L-valued form spaces are finite dimensional, so the
de Rham complex becomes a family of exact rational matrices.  This module
computes kernels, images and cohomology representatives by fraction-free
Gaussian elimination, evaluates the Kuranishi map, and extends infinitesimal
deformations order by order in a formal parameter, reporting the first
obstructed order together with its cohomology class.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .cjalg import (
    DeformationForm,
    SplitCJInstance,
    check_cj_axioms,
    de_rham,
    derived_bracket_sections,
    m2_closed,
    m3_closed,
)
from .contact import Section

__all__ = [
    "rref",
    "solve_linear",
    "nullspace",
    "ComplexMatrices",
    "Cohomology",
    "cohomology",
    "kuranishi",
    "FormalCurve",
    "extend_mc",
    "mc_residual_coefficients",
    "search_obstructed_instance",
    "search_unobstructed_dgla",
]

Matrix = List[List[Fraction]]
Vec = List[Fraction]


# --- exact linear algebra ---------------------------------------------------


def rref(matrix: Matrix) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form over Q; returns (R, pivot column list)."""
    m = [row[:] for row in matrix]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        pivot_row = None
        for i in range(r, rows):
            if m[i][c]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def nullspace(matrix: Matrix, cols: int) -> List[Vec]:
    """Basis of the right kernel, deterministic (free columns in order)."""
    if not matrix:
        return [[Fraction(1) if j == i else Fraction(0) for j in range(cols)]
                for i in range(cols)]
    red, pivots = rref(matrix)
    free = [c for c in range(cols) if c not in pivots]
    basis: List[Vec] = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve_linear(matrix: Matrix, rhs: Vec) -> Optional[Vec]:
    """One solution of M x = rhs with free variables set to zero, or None.

    Deterministic: the particular solution is supported on the
    lexicographically first pivot columns of the reduced matrix.
    """
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    if rows == 0:
        return [Fraction(0)] * cols if not any(rhs) else None
    aug = [matrix[i][:] + [rhs[i]] for i in range(rows)]
    red, pivots = rref(aug)
    if cols in pivots:
        return None
    x = [Fraction(0)] * cols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][cols]
    return x


def _columns(matrix: Matrix) -> List[Vec]:
    if not matrix:
        return []
    return [[row[j] for row in matrix] for j in range(len(matrix[0]))]


# --- the complex as matrices --------------------------------------------


class UnsupportedBase(ValueError):
    """Cohomology requires a point base (m = 0)."""


class NotFlat(ValueError):
    """The de Rham square is nonzero: the A side is not a Jacobi algebroid."""


class ComplexMatrices:
    """Matrices of d on L-valued forms over a point base, degree by degree."""

    def __init__(self, inst: SplitCJInstance):
        if inst.m != 0:
            raise UnsupportedBase("cohomology is only computed over a point base")
        self.inst = inst
        self.n = inst.n
        ctx = inst.context
        self.basis: List[List[Tuple[int, ...]]] = [
            list(itertools.combinations(range(self.n), k)) for k in range(self.n + 1)
        ]
        self.matrices: List[Matrix] = []
        for k in range(self.n + 1):
            rows = len(self.basis[k + 1]) if k + 1 <= self.n else 0
            mat: Matrix = [[Fraction(0)] * len(self.basis[k]) for _ in range(rows)]
            for j, combo in enumerate(self.basis[k]):
                image = de_rham(inst, self._monomial_section(combo))
                coords = self._coords(image, k + 1)
                for i, val in enumerate(coords):
                    if val:
                        mat[i][j] = val
            self.matrices.append(mat)
        for k in range(self.n - 1):
            comp = _mat_mul(self.matrices[k + 1], self.matrices[k])
            if any(any(x for x in row) for row in comp):
                raise NotFlat("d^2 != 0: the A side is not flat")

    def _monomial_section(self, combo: Tuple[int, ...]) -> Section:
        ctx = self.inst.context
        body = ctx.algebra.one()
        for a in combo:
            body = body * ctx.u(a)
        return Section(ctx, body)

    def _coords(self, s: Section, k: int) -> Vec:
        ctx = self.inst.context
        out = []
        for combo in self.basis[k] if k <= self.n else []:
            body = s.body
            # leading-position left derivatives, so the sign is always +1
            for a in combo:
                body = body.partial(ctx.ix_u[a])
            out.append(body.coefficient(()))
        return out

    def form_to_coords(self, s: Section, k: int) -> Vec:
        coords = self._coords(s, k)
        if self.coords_to_form(coords, k) != s:
            raise ValueError("section is not a homogeneous degree-k form")
        return coords

    def coords_to_form(self, coords: Vec, k: int) -> Section:
        ctx = self.inst.context
        body = ctx.algebra.zero()
        for val, combo in zip(coords, self.basis[k]):
            if val:
                mono = ctx.algebra.one()
                for a in combo:
                    mono = mono * ctx.u(a)
                body = body + mono.scale(val)
        return Section(ctx, body)


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if not a or not b:
        return []
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0))
             for j in range(len(b[0]))] for i in range(len(a))]


# --- cohomology ---------------------------------------------------------


@dataclass
class Cohomology:
    """H^k of the complex: dimension, representatives, and a decision procedure."""

    complex: ComplexMatrices
    k: int
    dimension: int
    representatives: List[Section]
    _rep_coords: List[Vec]
    _image_basis: List[Vec]

    def class_coordinates(self, s: Section) -> Vec:
        """Coordinates of [s] on the representative basis; requires a cocycle."""
        cm = self.complex
        if self.k > cm.n:
            if not s.is_zero():
                raise ValueError("nonzero form above the top degree")
            return []
        z = cm.form_to_coords(s, self.k)
        dk = cm.matrices[self.k] if self.k < len(cm.matrices) else []
        if dk and any(_apply(dk, z)):
            raise ValueError("not a cocycle")
        cols = self._image_basis + self._rep_coords
        if not cols:
            if any(z):
                raise ValueError("nonzero cocycle in zero space")
            return []
        mat = [[cols[j][i] for j in range(len(cols))] for i in range(len(z))]
        sol = solve_linear(mat, z)
        if sol is None:
            raise ValueError("cocycle not in span of image and representatives")
        return sol[len(self._image_basis):]

    def is_exact(self, s: Section) -> bool:
        return not any(self.class_coordinates(s))

    def primitive(self, s: Section) -> Optional[Section]:
        """A deterministic primitive of an exact cocycle, else None."""
        if self.k == 0:
            raise ValueError("0-forms have no primitives")
        cm = self.complex
        z = cm.form_to_coords(s, self.k)
        d_prev = cm.matrices[self.k - 1]
        sol = solve_linear(d_prev, z)
        if sol is None:
            return None
        return cm.coords_to_form(sol, self.k - 1)


def _apply(mat: Matrix, v: Vec) -> Vec:
    return [sum((row[j] * v[j] for j in range(len(v))), Fraction(0)) for row in mat]


def cohomology(inst: SplitCJInstance, k: int,
               cm: Optional[ComplexMatrices] = None) -> Cohomology:
    """Exact H^k with representative basis completing the image inside the kernel."""
    cm = cm or ComplexMatrices(inst)
    if not 0 <= k <= cm.n:
        return Cohomology(cm, k, 0, [], [], [])
    dim_k = len(cm.basis[k])
    dk = cm.matrices[k] if k < len(cm.matrices) else []
    kernel = nullspace(dk, dim_k) if dk else [
        [Fraction(1) if j == i else Fraction(0) for j in range(dim_k)] for i in range(dim_k)
    ]
    if k == cm.n:
        kernel = [[Fraction(1) if j == i else Fraction(0) for j in range(dim_k)]
                  for i in range(dim_k)]
    image = _columns(cm.matrices[k - 1]) if k >= 1 else []

    # image columns first, then kernel vectors: new pivots from the kernel
    # part are the representatives
    combined = image + kernel
    reps: List[Vec] = []
    if combined:
        mat = [[combined[j][i] for j in range(len(combined))] for i in range(dim_k)]
        _, pivots = rref(mat)
        for p in pivots:
            if p >= len(image):
                reps.append(kernel[p - len(image)])
    rep_secs = [cm.coords_to_form(v, k) for v in reps]
    img_red: List[Vec] = []
    if image:
        mat = [[image[j][i] for j in range(len(image))] for i in range(dim_k)]
        _, pivots = rref(mat)
        img_red = [image[p] for p in pivots]
    return Cohomology(cm, k, len(reps), rep_secs, reps, img_red)


# --- Kuranishi map ------------------------------------------------------


def kuranishi(inst: SplitCJInstance, eta: DeformationForm | Section,
              h3: Optional[Cohomology] = None) -> Tuple[Vec, Section]:
    """Class of m_2(eta,eta) in H^3; eta must be d-closed.

    Returns (coordinates on the H^3 representatives, reduced representative).
    """
    sec = eta.to_section() if isinstance(eta, DeformationForm) else eta
    if not de_rham(inst, sec).is_zero():
        raise ValueError("eta is not closed")
    h3 = h3 or cohomology(inst, 3)
    w = derived_bracket_sections(inst, [sec, sec])
    coords = h3.class_coordinates(w)
    rep = inst.context.zero_section()
    for c, r in zip(coords, h3.representatives):
        rep = rep + r.scale(c)
    return coords, rep


# --- order-by-order extension --------------------------------------------


@dataclass
class FormalCurve:
    """Coefficients eta_1..eta_N of a formal MC curve, or the obstruction."""

    inst: SplitCJInstance
    coefficients: List[Section]
    obstructed_at: Optional[int] = None
    obstruction_class: Optional[Vec] = None
    obstruction_representative: Optional[Section] = None

    @property
    def ok(self) -> bool:
        return self.obstructed_at is None

    def order(self) -> int:
        return len(self.coefficients)


def mc_residual_coefficients(inst: SplitCJInstance, coeffs: Sequence[Section],
                             order: int) -> List[Section]:
    """t-expansion of the MC residual of sum_k t^k eta_k through t^order.

    Index r of the returned list is the coefficient of t^r (r >= 1); computed
    symbolically in the formal parameter, exactly.
    """
    out = []
    for r in range(1, order + 1):
        acc = inst.context.zero_section()
        if r <= len(coeffs):
            acc = acc + de_rham(inst, coeffs[r - 1])
        for i in range(1, r):
            j = r - i
            if i <= len(coeffs) and j <= len(coeffs):
                acc = acc + m2_closed(inst, coeffs[i - 1], coeffs[j - 1]).scale(Fraction(1, 2))
        for i in range(1, r - 1):
            for j in range(1, r - i):
                k = r - i - j
                if k >= 1 and all(q <= len(coeffs) for q in (i, j, k)):
                    acc = acc + m3_closed(inst, coeffs[i - 1], coeffs[j - 1],
                                          coeffs[k - 1]).scale(Fraction(1, 6))
        out.append(acc)
    return out


def extend_mc(inst: SplitCJInstance, eta1: DeformationForm | Section, order: int,
              h2: Optional[Cohomology] = None, h3: Optional[Cohomology] = None) -> FormalCurve:
    """Solve the MC equation order by order starting from a closed 2-form.

    At order r the cumulative residual must be exact; its primitive (with the
    deterministic pivot choice) gives -eta_r.  A non-exact residual stops the
    extension and is reported as the obstruction class at that order.
    """
    sec = eta1.to_section() if isinstance(eta1, DeformationForm) else eta1
    if not de_rham(inst, sec).is_zero():
        raise ValueError("eta_1 must be an infinitesimal deformation (closed)")
    h3 = h3 or cohomology(inst, 3)
    coeffs = [sec]
    for r in range(2, order + 1):
        residual = inst.context.zero_section()
        for i in range(1, r):
            j = r - i
            if i <= len(coeffs) and j <= len(coeffs):
                residual = residual + m2_closed(inst, coeffs[i - 1], coeffs[j - 1]) \
                    .scale(Fraction(1, 2))
        for i in range(1, r - 1):
            for j in range(1, r - i):
                k = r - i - j
                if k >= 1 and all(q <= len(coeffs) for q in (i, j, k)):
                    residual = residual + m3_closed(inst, coeffs[i - 1], coeffs[j - 1],
                                                    coeffs[k - 1]).scale(Fraction(1, 6))
        if residual.is_zero():
            coeffs.append(inst.context.zero_section())
            continue
        cls = h3.class_coordinates(residual)
        if any(cls):
            rep = inst.context.zero_section()
            for c, rr in zip(cls, h3.representatives):
                rep = rep + rr.scale(c)
            return FormalCurve(inst, coeffs, obstructed_at=r,
                               obstruction_class=cls, obstruction_representative=rep)
        prim = h3.primitive(residual)
        if prim is None:
            raise RuntimeError("exact residual without primitive")
        coeffs.append(-prim)
    return FormalCurve(inst, coeffs)


# --- seeded fixture searches -----------------------------------------------


def _random_point_instance(rng: random.Random, n: int, *,
                           allow_psi: bool, name: str) -> SplitCJInstance:
    """A random small-coefficient candidate with flat (phi = 0) A side."""
    def val(lo=-1, hi=1):
        return rng.randint(lo, hi)

    kw = dict(c={}, lam={}, c_dual={}, lam_dual={}, psi={})
    for a in range(n):
        if rng.random() < 0.4:
            kw["lam"][a] = val()
        if rng.random() < 0.4:
            kw["lam_dual"][a] = val()
    for cc in range(n):
        for a, b in itertools.combinations(range(n), 2):
            if rng.random() < 0.35:
                kw["c"][(cc, a, b)] = val()
            if rng.random() < 0.35:
                kw["c_dual"][(cc, a, b)] = val()
    if allow_psi:
        for a, b, cc in itertools.combinations(range(n), 3):
            if rng.random() < 0.3:
                kw["psi"][(a, b, cc)] = val()
    return SplitCJInstance(0, n, name=name, **kw)


def search_obstructed_instance(seed: int = 42, tries: int = 400, n: int = 3
                               ) -> Tuple[SplitCJInstance, DeformationForm, Vec]:
    """Seeded search for a valid instance with an obstructed 2-cocycle.

    Scans small rational instances with flat A side, keeps those satisfying
    the structure equation exactly, and returns the first one where some
    cohomology representative (or a small combination) has nonzero Kuranishi
    class.  Deterministic for a fixed seed.
    """
    rng = random.Random(seed)
    for attempt in range(tries):
        inst = _random_point_instance(rng, n, allow_psi=True,
                                      name=f"search-{seed}-{attempt}")
        theta = inst.theta
        from .contact import jacobi_bracket
        if not jacobi_bracket(theta, theta).is_zero():
            continue
        try:
            cm = ComplexMatrices(inst)
        except NotFlat:
            continue
        h2 = cohomology(inst, 2, cm)
        h3 = cohomology(inst, 3, cm)
        if h2.dimension == 0 or h3.dimension == 0:
            continue
        candidates = list(h2.representatives)
        for r1, r2 in itertools.combinations(h2.representatives, 2):
            candidates.append(r1 + r2)
        for cand in candidates:
            coords, rep = kuranishi(inst, cand, h3)
            if any(coords):
                if not check_cj_axioms(inst).ok:
                    break
                eta = DeformationForm.from_section(inst, cand)
                inst.name = f"OBST1(seed={seed})"
                return inst, eta, coords
    raise RuntimeError(f"no obstructed instance found in {tries} tries (seed {seed})")


def search_unobstructed_dgla(n: int = 3) -> Tuple[SplitCJInstance, DeformationForm]:
    """Deterministic search for a dgLa fixture: m_3 = 0, m_2 != 0, H^3 = 0.

    Enumerates solvable A-side brackets against single small dual-side slots,
    keeping the first combination that satisfies the structure equation, has
    vanishing H^3, and carries a closed 2-form with a genuinely nonzero
    binary bracket.  On such an instance every closed eta_1 extends to any
    order since the obstructions live in H^3.
    """
    from .contact import jacobi_bracket
    aside_variants = [
        {"c": {(1, 0, 1): 1, (2, 0, 2): 1}, "lam": {}},
        {"c": {(1, 0, 1): 1, (2, 0, 2): 2}, "lam": {}},
        {"c": {(1, 0, 1): 1, (2, 0, 2): 1}, "lam": {0: 1}},
    ]
    dual_slots = [("c_dual", (cc, a, b)) for cc in range(n)
                  for a, b in itertools.combinations(range(n), 2)]
    dual_slots += [("lam_dual", (a,)) for a in range(n)]
    for aside in aside_variants:
        base = SplitCJInstance(0, n, **aside)
        if not jacobi_bracket(base.theta, base.theta).is_zero():
            continue
        try:
            cm_base = ComplexMatrices(base)
        except NotFlat:
            continue
        if cohomology(base, n, cm_base).dimension != 0:
            continue
        for slot, key in dual_slots:
            for v in (1, -1):
                kw = {"c": dict(aside["c"]), "lam": dict(aside["lam"]),
                      "c_dual": {}, "lam_dual": {}}
                if slot == "c_dual":
                    kw["c_dual"][key] = v
                else:
                    kw["lam_dual"][key[0]] = v
                inst = SplitCJInstance(0, n, name="DGLA1", **kw)
                if not jacobi_bracket(inst.theta, inst.theta).is_zero():
                    continue
                cm = ComplexMatrices(inst)
                kern = nullspace(cm.matrices[2], len(cm.basis[2]))
                for kv in kern:
                    cand = cm.coords_to_form(kv, 2)
                    if m2_closed(inst, cand, cand).is_zero():
                        continue
                    if not check_cj_axioms(inst).ok:
                        break
                    return inst, DeformationForm.from_section(inst, cand)
    raise RuntimeError("no dgLa fixture found in the structured family")

"""The degree-2 contact manifold attached to a vector bundle over a polynomial base.

Generators of the coordinate algebra, with bidegrees:

    x^1..x^m   (0,0)   base coordinates
    u^1..u^n   (0,1)   fiber coordinates of A[1]
    pa_1..pa_n (1,0)   momenta conjugate to the u's
    pi_1..pi_m (1,1)   momenta conjugate to the x's
    p          (1,1)   the jet momentum

The line bundle is trivialized by a global frame mu, so a section is just a
polynomial coefficient.  The canonical Jacobi bracket is implemented verbatim
from its Darboux-coordinate formula with D_i = d/dx^i + pi_i d/dp and
D_a = d/du^a + pa_a d/dp; everything else (Reeb fields, Hamiltonian lifts,
the Legendre transform) is checked against it.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple, Union

from .gca import Algebra, ContextMismatch, Derivation, Poly, Scalar

__all__ = [
    "ContactContext",
    "Section",
    "LineDerivation",
    "ContactVectorField",
    "jacobi_bracket",
    "hamiltonian_lift",
    "project_P",
    "legendre_pullback",
    "legendre_pushforward",
    "reeb_field",
    "contract_theta",
    "bidegree_decompose",
]


class ContactContext:
    """Coordinate algebra of J^1[2] of the trivialized line bundle over A[1]."""

    def __init__(self, m: int, n: int, label: str = "", _mirror_of: "ContactContext" = None):
        self.m = m
        self.n = n
        gens: List[Tuple[str, Tuple[int, int]]] = []
        gens += [(f"x{i+1}", (0, 0)) for i in range(m)]
        gens += [(f"u{a+1}", (0, 1)) for a in range(n)]
        gens += [(f"pa{a+1}", (1, 0)) for a in range(n)]
        gens += [(f"pi{i+1}", (1, 1)) for i in range(m)]
        gens += [("p", (1, 1))]
        self.algebra = Algebra(gens, label=label or f"contact(m={m},n={n})")
        self.ix_x = list(range(0, m))
        self.ix_u = list(range(m, m + n))
        self.ix_pa = list(range(m + n, m + 2 * n))
        self.ix_pi = list(range(m + 2 * n, 2 * m + 2 * n))
        self.ix_p = 2 * m + 2 * n
        self._mirror = _mirror_of

    @property
    def mirror(self) -> "ContactContext":
        """The context built from the twisted dual bundle (same m and n)."""
        if self._mirror is None:
            self._mirror = ContactContext(
                self.m, self.n, label=self.algebra.label + "|mirror", _mirror_of=self
            )
        return self._mirror

    # convenience constructors ------------------------------------------

    def x(self, i: int) -> Poly:
        return self.algebra.gen(self.ix_x[i])

    def u(self, a: int) -> Poly:
        return self.algebra.gen(self.ix_u[a])

    def pa(self, a: int) -> Poly:
        return self.algebra.gen(self.ix_pa[a])

    def pi(self, i: int) -> Poly:
        return self.algebra.gen(self.ix_pi[i])

    @property
    def p(self) -> Poly:
        return self.algebra.gen(self.ix_p)

    def zero_section(self) -> "Section":
        return Section(self, self.algebra.zero())

    def section(self, body: Union[Poly, Scalar]) -> "Section":
        if not isinstance(body, Poly):
            body = self.algebra.scalar(body)
        return Section(self, body)

    def base_indices(self) -> List[int]:
        return list(self.ix_x) + list(self.ix_u)

    def is_base_poly(self, f: Poly) -> bool:
        """True when f only involves the x and u generators."""
        return f.uses_only(self.base_indices())


class Section:
    """A section of the contact line bundle: `body` is the coefficient of mu."""

    __slots__ = ("context", "body")

    def __init__(self, context: ContactContext, body: Poly):
        if body.algebra is not context.algebra:
            raise ContextMismatch("section body from a different context")
        self.context = context
        self.body = body

    def _check(self, other: "Section") -> None:
        if self.context is not other.context:
            raise ContextMismatch("sections from different contexts")

    def __add__(self, other: "Section") -> "Section":
        self._check(other)
        return Section(self.context, self.body + other.body)

    def __sub__(self, other: "Section") -> "Section":
        self._check(other)
        return Section(self.context, self.body - other.body)

    def __neg__(self) -> "Section":
        return Section(self.context, -self.body)

    def scale(self, c: Scalar) -> "Section":
        return Section(self.context, self.body.scale(c))

    def mul_function(self, f: Poly) -> "Section":
        """Module action of a coordinate function, multiplying from the left."""
        return Section(self.context, f * self.body)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Section):
            return NotImplemented
        return self.context is other.context and self.body == other.body

    def __hash__(self) -> int:
        return hash((id(self.context), self.body))

    def is_zero(self) -> bool:
        return self.body.is_zero()

    def degree(self) -> Optional[int]:
        return self.body.degree()

    def __str__(self) -> str:
        return f"({self.body})*mu"

    __repr__ = __str__


def bidegree_decompose(s: Section) -> Dict[Tuple[int, int], Section]:
    """Split a section into its bidegree-homogeneous components."""
    return {bd: Section(s.context, f) for bd, f in s.body.bidegree_components().items()}


def project_P(s: Section) -> Section:
    """Restriction to the zero section: kills every monomial with eps >= 1."""
    ctx = s.context
    keep = {m: c for m, c in s.body.terms.items() if ctx.algebra.monomial_bidegree(m)[0] == 0}
    return Section(ctx, Poly(ctx.algebra, keep))


# --- the canonical Jacobi bracket -------------------------------------


def _D_i(ctx: ContactContext, i: int, f: Poly) -> Poly:
    return f.partial(ctx.ix_x[i]) + ctx.pi(i) * f.partial(ctx.ix_p)


def _D_a(ctx: ContactContext, a: int, f: Poly) -> Poly:
    return f.partial(ctx.ix_u[a]) + ctx.pa(a) * f.partial(ctx.ix_p)


def _bracket_homogeneous(ctx: ContactContext, f1: Poly, parity1: int, f2: Poly) -> Poly:
    dp1 = f1.partial(ctx.ix_p)
    dp2 = f2.partial(ctx.ix_p)
    out = f1 * dp2 - dp1 * f2
    for i in range(ctx.m):
        out = out + _D_i(ctx, i, f1) * f2.partial(ctx.ix_pi[i])
        out = out - f1.partial(ctx.ix_pi[i]) * _D_i(ctx, i, f2)
    sign = -1 if parity1 else 1
    for a in range(ctx.n):
        term = _D_a(ctx, a, f1) * f2.partial(ctx.ix_pa[a])
        term = term + f1.partial(ctx.ix_pa[a]) * _D_a(ctx, a, f2)
        out = out + term.scale(sign)
    return out


def jacobi_bracket(s: Section, t: Section) -> Section:
    """Canonical degree -2 Jacobi bracket in Darboux coordinates.

    Bilinear; the sign in the odd-momentum block only depends on the parity
    of the first argument, so the first body is split by parity.
    """
    s._check(t)
    ctx = s.context
    out = ctx.algebra.zero()
    for parity, f1 in s.body.parity_components().items():
        out = out + _bracket_homogeneous(ctx, f1, parity, t.body)
    return Section(ctx, out)


# --- derivations of the line bundle over A[1] --------------------------


class LineDerivation:
    """A derivation of the trivialized line bundle over A[1].

    Acts on sections as f*(-) + sum_i f^i d/dx^i + sum_a f^a d/du^a; the
    coefficients must only involve base (x, u) generators.
    """

    def __init__(self, context: ContactContext, degree: int, f: Poly,
                 f_x: Sequence[Poly], f_u: Sequence[Poly]):
        for coeff in [f, *f_x, *f_u]:
            if coeff.algebra is not context.algebra:
                raise ContextMismatch("coefficient from a different context")
            if not context.is_base_poly(coeff):
                raise ValueError("line derivation coefficients mention fiber momenta")
        if len(f_x) != context.m or len(f_u) != context.n:
            raise ValueError("coefficient arrays do not match the context dimensions")
        self.context = context
        self.degree = degree
        self.f = f
        self.f_x = list(f_x)
        self.f_u = list(f_u)

    @classmethod
    def zero(cls, context: ContactContext, degree: int = 0) -> "LineDerivation":
        z = context.algebra.zero()
        return cls(context, degree, z, [z] * context.m, [z] * context.n)

    def __call__(self, s: Union[Section, Poly]) -> Union[Section, Poly]:
        body = s.body if isinstance(s, Section) else s
        out = self.f * body
        for i in range(self.context.m):
            out = out + self.f_x[i] * body.partial(self.context.ix_x[i])
        for a in range(self.context.n):
            out = out + self.f_u[a] * body.partial(self.context.ix_u[a])
        return Section(self.context, out) if isinstance(s, Section) else out

    def add(self, other: "LineDerivation") -> "LineDerivation":
        return LineDerivation(
            self.context, self.degree, self.f + other.f,
            [a + b for a, b in zip(self.f_x, other.f_x)],
            [a + b for a, b in zip(self.f_u, other.f_u)],
        )

    def commutator(self, other: "LineDerivation") -> "LineDerivation":
        """[d, d'] = d d' - (-1)^{|d||d'|} d' d, re-extracted from its action."""
        ctx = self.context
        sign = -1 if (self.degree % 2) and (other.degree % 2) else 1

        def act(body: Poly) -> Poly:
            return self(other(body)) - sign * other(self(body))

        f = act(ctx.algebra.one())
        f_x = [act(ctx.x(i)) - f * ctx.x(i) for i in range(ctx.m)]
        f_u = [act(ctx.u(a)) - f * ctx.u(a) for a in range(ctx.n)]
        return LineDerivation(ctx, self.degree + other.degree, f, f_x, f_u)


def hamiltonian_lift(d: LineDerivation) -> Section:
    """Fiberwise-linear section (f p + f^i pi_i + f^a pa_a) mu encoding d."""
    ctx = d.context
    body = d.f * ctx.p
    for i in range(ctx.m):
        body = body + d.f_x[i] * ctx.pi(i)
    for a in range(ctx.n):
        body = body + d.f_u[a] * ctx.pa(a)
    return Section(ctx, body)


# --- Legendre transform ------------------------------------------------


def _legendre_images(src: ContactContext, dst: ContactContext) -> Dict[int, Poly]:
    """Generator images of F*: functions on the mirror pull back to `dst`."""
    images: Dict[int, Poly] = {}
    for i in range(src.m):
        images[src.ix_x[i]] = dst.x(i)
    for a in range(src.n):
        images[src.ix_u[a]] = dst.pa(a)       # u~^a -> pa_a
        images[src.ix_pa[a]] = dst.u(a)       # p~_a -> u^a
    for i in range(src.m):
        images[src.ix_pi[i]] = dst.pi(i)      # p~_i -> pi_i
    ptilde = dst.p
    for a in range(src.n):
        ptilde = ptilde - dst.u(a) * dst.pa(a)
    images[src.ix_p] = ptilde                 # p~ -> p - u^a pa_a
    return images


def legendre_pullback(t: Section, into: ContactContext) -> Section:
    """Pull a mirror-side section back through the Legendre contactomorphism.

    `t` must live over the mirror of `into` (matching dimensions); the frame
    mu is shared, so only the body is substituted.
    """
    src = t.context
    if src.m != into.m or src.n != into.n or into.mirror is not src:
        raise ContextMismatch("section does not live over the mirror context")
    body = t.body.substitute(into.algebra, _legendre_images(src, into))
    return Section(into, body)


def legendre_pushforward(X: "ContactVectorField", into: ContactContext) -> "ContactVectorField":
    """Push a vector field to the mirror side: (F_* X)(g) = (F^-1)^* X(F^* g)."""
    src = X.context
    if into is not src.mirror:
        raise ContextMismatch("pushforward must land on the mirror context")
    pull = _legendre_images(into, src)        # F^*: mirror poly -> src poly
    pull_inv = _legendre_images(src, into)    # (F^-1)^* = mirror Legendre
    values: Dict[int, Poly] = {}
    for idx in range(len(into.algebra.gens)):
        g_img = into.algebra.gen(idx).substitute(src.algebra, pull)
        values[idx] = X.as_derivation()(g_img).substitute(into.algebra, pull_inv)
    return ContactVectorField(into, X.degree, values)


# --- Reeb vector fields --------------------------------------------------


class ContactVectorField:
    """A graded vector field, stored by its values on coordinate generators."""

    def __init__(self, context: ContactContext, degree: int, values: Dict[int, Poly]):
        self.context = context
        self.degree = degree
        self.values = values

    def as_derivation(self) -> Derivation:
        return Derivation(self.context.algebra, self.degree, self.values)

    def __call__(self, f: Poly) -> Poly:
        return self.as_derivation()(f)

    def value(self, idx: int) -> Poly:
        return self.values.get(idx, self.context.algebra.zero())

    def commutator(self, other: "ContactVectorField") -> "ContactVectorField":
        d = self.as_derivation().commutator(other.as_derivation())
        return ContactVectorField(self.context, d.degree, d.values)


def reeb_field(lam: Section) -> ContactVectorField:
    """Reeb vector field of a homogeneous section, by its coordinate formula."""
    ctx = lam.context
    f = lam.body
    deg = f.degree()
    if deg is None:
        return ContactVectorField(ctx, -2, {i: ctx.algebra.zero() for i in range(len(ctx.algebra.gens))})
    sign = -1 if deg % 2 else 1
    values: Dict[int, Poly] = {}
    on_p = f
    for i in range(ctx.m):
        dpi = f.partial(ctx.ix_pi[i])
        values[ctx.ix_x[i]] = -dpi
        values[ctx.ix_pi[i]] = _D_i(ctx, i, f)
        on_p = on_p - dpi * ctx.pi(i)
    for a in range(ctx.n):
        dpa = f.partial(ctx.ix_pa[a])
        values[ctx.ix_u[a]] = dpa.scale(sign)
        values[ctx.ix_pa[a]] = _D_a(ctx, a, f).scale(sign)
        on_p = on_p + (dpa * ctx.pa(a)).scale(sign)
    values[ctx.ix_p] = on_p
    return ContactVectorField(ctx, deg - 2, values)


def contract_theta(X: ContactVectorField) -> Section:
    """Contraction of a vector field against the Cartan contact form.

    theta = (dp - pi_i dx^i - pa_a du^a) mu; the Koszul signs follow the
    convention iota_{fX} = (-1)^{|f|} f iota_X used throughout, under which
    iota_{X_lam} theta = (-1)^{|lam|} lam holds exactly.
    """
    ctx = X.context
    sign = -1 if X.degree % 2 else 1
    out = X.value(ctx.ix_p)
    for i in range(ctx.m):
        out = out - ctx.pi(i) * X.value(ctx.ix_x[i])
    out = out.scale(sign)
    for a in range(ctx.n):
        out = out + ctx.pa(a) * X.value(ctx.ix_u[a])
    return Section(ctx, out)

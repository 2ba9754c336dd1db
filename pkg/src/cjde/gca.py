"""Exact graded-commutative polynomial arithmetic with Koszul signs.

Everything downstream (sections of the contact line bundle, brackets,
structure tensors) is built on the classes here.  Coefficients are
arbitrary-precision rationals and all equality checks are exact: the
identities being verified are algebraic, so there is no tolerance anywhere.

Conventions:
  * each generator carries a bidegree (eps, delta); its parity is
    (eps + delta) mod 2 and odd generators square to zero,
  * monomials are kept in a fixed canonical generator order, with the
    Koszul sign produced by counting odd-odd inversions,
  * derivatives with respect to odd generators are left derivatives.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple, Union

Scalar = Union[int, Fraction]

__all__ = [
    "ContextMismatch",
    "UnknownGenerator",
    "Generator",
    "Algebra",
    "Poly",
    "Derivation",
    "koszul_sign",
    "normalize_word",
]


class ContextMismatch(ValueError):
    """Operands live in different algebra contexts."""


class UnknownGenerator(KeyError):
    """A generator name or index is not part of the algebra."""


class Generator:
    """A single generator: name, canonical position and bidegree."""

    __slots__ = ("name", "index", "eps", "delta")

    def __init__(self, name: str, index: int, eps: int, delta: int):
        self.name = name
        self.index = index
        self.eps = eps
        self.delta = delta

    @property
    def degree(self) -> int:
        return self.eps + self.delta

    @property
    def parity(self) -> int:
        return (self.eps + self.delta) % 2

    @property
    def is_odd(self) -> bool:
        return self.parity == 1

    def __repr__(self) -> str:
        return f"Generator({self.name!r}, deg={self.degree}, bideg=({self.eps},{self.delta}))"


# A monomial is a tuple of (generator index, exponent) pairs, sorted by
# generator index, exponents positive, odd generators with exponent 1.
Monomial = Tuple[Tuple[int, int], ...]

ONE: Monomial = ()


def koszul_sign(permutation: Sequence[int], degrees: Sequence[int]) -> int:
    """Koszul sign of reordering v_1..v_n into v_{sigma(1)}..v_{sigma(n)}.

    ``permutation[k] = i`` means slot k of the output holds input i (0-based).
    The sign is -1 to the number of inversions involving two odd entries,
    so transposing two odd elements gives -1 and anything else gives +1.
    """
    if len(permutation) != len(degrees):
        raise ValueError("permutation length does not match degree list")
    if sorted(permutation) != list(range(len(degrees))):
        raise ValueError("not a permutation of 0..n-1")
    sign = 1
    for k, l in itertools.combinations(range(len(permutation)), 2):
        i, j = permutation[k], permutation[l]
        if i > j and degrees[i] % 2 == 1 and degrees[j] % 2 == 1:
            sign = -sign
    return sign


class Algebra:
    """A graded-commutative polynomial algebra with a fixed generator order."""

    def __init__(self, generators: Sequence[Tuple[str, Tuple[int, int]]], label: str = ""):
        self.label = label
        self.gens: Tuple[Generator, ...] = tuple(
            Generator(name, i, eps, delta) for i, (name, (eps, delta)) in enumerate(generators)
        )
        self._by_name: Dict[str, Generator] = {}
        for g in self.gens:
            if g.name in self._by_name:
                raise ValueError(f"duplicate generator name {g.name!r}")
            self._by_name[g.name] = g

    def generator(self, key: Union[str, int]) -> Generator:
        if isinstance(key, str):
            try:
                return self._by_name[key]
            except KeyError:
                raise UnknownGenerator(key) from None
        if not 0 <= key < len(self.gens):
            raise UnknownGenerator(key)
        return self.gens[key]

    # --- polynomial constructors -------------------------------------

    def zero(self) -> "Poly":
        return Poly(self, {})

    def one(self) -> "Poly":
        return Poly(self, {ONE: Fraction(1)})

    def scalar(self, c: Scalar) -> "Poly":
        c = Fraction(c)
        return Poly(self, {ONE: c} if c else {})

    def gen(self, key: Union[str, int]) -> "Poly":
        g = self.generator(key)
        return Poly(self, {((g.index, 1),): Fraction(1)})

    def monomial(self, mono: Monomial, coeff: Scalar = 1) -> "Poly":
        c = Fraction(coeff)
        return Poly(self, {mono: c} if c else {})

    # --- monomial-level helpers --------------------------------------

    def monomial_bidegree(self, mono: Monomial) -> Tuple[int, int]:
        eps = delta = 0
        for idx, exp in mono:
            g = self.gens[idx]
            eps += g.eps * exp
            delta += g.delta * exp
        return eps, delta

    def monomial_degree(self, mono: Monomial) -> int:
        eps, delta = self.monomial_bidegree(mono)
        return eps + delta

    def monomial_weight(self, mono: Monomial) -> int:
        return sum(exp for _, exp in mono)

    def monomial_str(self, mono: Monomial) -> str:
        if not mono:
            return "1"
        parts = []
        for idx, exp in mono:
            name = self.gens[idx].name
            parts.append(name if exp == 1 else f"{name}^{exp}")
        return "*".join(parts)

    def normalize_word(self, word: Sequence[Union[str, int]]) -> Tuple[int, Union[Monomial, None]]:
        """Reduce a generator word to (sign, canonical monomial).

        Returns (1, None) when the word contains a repeated odd generator,
        i.e. when it is zero in the algebra.
        """
        letters = [self.generator(k) for k in word]
        sign = 1
        # insertion sort, counting odd-odd transpositions
        arr = list(letters)
        for i in range(1, len(arr)):
            j = i
            while j > 0 and arr[j - 1].index > arr[j].index:
                if arr[j - 1].is_odd and arr[j].is_odd:
                    sign = -sign
                arr[j - 1], arr[j] = arr[j], arr[j - 1]
                j -= 1
        mono: List[Tuple[int, int]] = []
        for g in arr:
            if mono and mono[-1][0] == g.index:
                if g.is_odd:
                    return 1, None
                mono[-1] = (g.index, mono[-1][1] + 1)
            else:
                mono.append((g.index, 1))
        return sign, tuple(mono)

    def mul_monomials(self, a: Monomial, b: Monomial) -> Tuple[int, Union[Monomial, None]]:
        """Product of two canonical monomials: (sign, monomial) or (1, None) if zero."""
        if not a:
            return 1, b
        if not b:
            return 1, a
        # count odd letters of a to the right of each odd letter of b
        odd_positions_a = [idx for idx, exp in a if self.gens[idx].is_odd]
        sign = 1
        for idx, exp in b:
            if self.gens[idx].is_odd:
                crossings = sum(1 for ja in odd_positions_a if ja > idx)
                if crossings % 2:
                    sign = -sign
        merged: List[Tuple[int, int]] = []
        ia = ib = 0
        while ia < len(a) or ib < len(b):
            if ib >= len(b) or (ia < len(a) and a[ia][0] <= b[ib][0]):
                idx, exp = a[ia]
                ia += 1
            else:
                idx, exp = b[ib]
                ib += 1
            if merged and merged[-1][0] == idx:
                if self.gens[idx].is_odd:
                    return 1, None
                merged[-1] = (idx, merged[-1][1] + exp)
            else:
                merged.append((idx, exp))
        return sign, tuple(merged)


def normalize_word(algebra: Algebra, word: Sequence[Union[str, int]]):
    """Module-level alias for :meth:`Algebra.normalize_word`."""
    return algebra.normalize_word(word)


class Poly:
    """A graded-commutative polynomial: finite map monomial -> nonzero rational."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: Algebra, terms: Dict[Monomial, Fraction]):
        self.algebra = algebra
        self.terms = {m: c for m, c in terms.items() if c}

    # --- ring structure ----------------------------------------------

    def _check(self, other: "Poly") -> None:
        if self.algebra is not other.algebra:
            raise ContextMismatch(
                f"operands in different algebras: {self.algebra.label!r} vs {other.algebra.label!r}"
            )

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            nc = terms.get(m, Fraction(0)) + c
            if nc:
                terms[m] = nc
            else:
                terms.pop(m, None)
        return Poly(self.algebra, terms)

    def __neg__(self) -> "Poly":
        return Poly(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, c: Scalar) -> "Poly":
        c = Fraction(c)
        if not c:
            return self.algebra.zero()
        return Poly(self.algebra, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other: Union["Poly", Scalar]) -> "Poly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        alg = self.algebra
        terms: Dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                sign, mono = alg.mul_monomials(ma, mb)
                if mono is None:
                    continue
                nc = terms.get(mono, Fraction(0)) + sign * ca * cb
                if nc:
                    terms[mono] = nc
                else:
                    terms.pop(mono, None)
        return Poly(alg, terms)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.algebra is other.algebra and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((id(self.algebra), frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    # --- grading ------------------------------------------------------

    def bidegree_components(self) -> Dict[Tuple[int, int], "Poly"]:
        out: Dict[Tuple[int, int], Dict[Monomial, Fraction]] = {}
        for m, c in self.terms.items():
            out.setdefault(self.algebra.monomial_bidegree(m), {})[m] = c
        return {bd: Poly(self.algebra, t) for bd, t in sorted(out.items())}

    def degree_components(self) -> Dict[int, "Poly"]:
        out: Dict[int, Dict[Monomial, Fraction]] = {}
        for m, c in self.terms.items():
            out.setdefault(self.algebra.monomial_degree(m), {})[m] = c
        return {d: Poly(self.algebra, t) for d, t in sorted(out.items())}

    def parity_components(self) -> Dict[int, "Poly"]:
        out: Dict[int, Dict[Monomial, Fraction]] = {0: {}, 1: {}}
        for m, c in self.terms.items():
            out[self.algebra.monomial_degree(m) % 2][m] = c
        return {p: Poly(self.algebra, t) for p, t in out.items() if t}

    def is_homogeneous(self) -> bool:
        return len(self.degree_components()) <= 1

    def degree(self) -> Union[int, None]:
        """Total degree of a homogeneous polynomial (None for 0)."""
        comps = self.degree_components()
        if not comps:
            return None
        if len(comps) > 1:
            raise ValueError(f"inhomogeneous polynomial: {self}")
        return next(iter(comps))

    def weight(self) -> int:
        """Largest number of generator letters in any monomial."""
        if not self.terms:
            return 0
        return max(self.algebra.monomial_weight(m) for m in self.terms)

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def uses_only(self, allowed: Iterable[int]) -> bool:
        allowed = set(allowed)
        return all(idx in allowed for m in self.terms for idx, _ in m)

    # --- calculus -----------------------------------------------------

    def partial(self, key: Union[str, int]) -> "Poly":
        """Left partial derivative with respect to one generator."""
        g = self.algebra.generator(key)
        alg = self.algebra
        terms: Dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            for pos, (idx, exp) in enumerate(mono):
                if idx != g.index:
                    continue
                # parity of the prefix (letters strictly before this generator)
                prefix_parity = sum(
                    alg.gens[i].parity * e for i, e in mono[:pos]
                ) % 2
                sign = -1 if (g.is_odd and prefix_parity) else 1
                if exp == 1:
                    new = mono[:pos] + mono[pos + 1:]
                else:
                    new = mono[:pos] + ((idx, exp - 1),) + mono[pos + 1:]
                nc = terms.get(new, Fraction(0)) + sign * exp * c
                if nc:
                    terms[new] = nc
                else:
                    terms.pop(new, None)
                break
        return Poly(alg, terms)

    def substitute(self, target: Algebra, images: Dict[int, "Poly"]) -> "Poly":
        """Algebra morphism: replace each generator by its image in `target`.

        Images must be given for every generator occurring in self; being an
        even morphism, letters are substituted in word order and the target
        algebra supplies all Koszul signs.
        """
        out = target.zero()
        for mono, c in self.terms.items():
            term = target.scalar(c)
            for idx, exp in mono:
                if idx not in images:
                    raise UnknownGenerator(self.algebra.gens[idx].name)
                img = images[idx]
                for _ in range(exp):
                    term = term * img
            out = out + term
        return out

    # --- presentation ---------------------------------------------------

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        def key(item):
            mono, _ = item
            return (self.algebra.monomial_degree(mono), mono)
        return sorted(self.terms.items(), key=key)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            s = self.algebra.monomial_str(mono)
            if mono == ONE:
                parts.append(str(c))
            elif c == 1:
                parts.append(s)
            elif c == -1:
                parts.append(f"-{s}")
            else:
                parts.append(f"{c}*{s}")
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    __repr__ = __str__


class Derivation:
    """A graded derivation of an Algebra, given by its values on generators.

    `degree` is the total degree shift; the sign rule only uses its parity.
    Generators without an assigned value are treated as errors when hit,
    matching the requirement that D be defined on every generator in use.
    """

    def __init__(self, algebra: Algebra, degree: int, values: Dict[int, Poly]):
        self.algebra = algebra
        self.degree = degree
        self.values = values

    def __call__(self, f: Poly) -> Poly:
        if f.algebra is not self.algebra:
            raise ContextMismatch("derivation applied outside its algebra")
        alg = self.algebra
        out = alg.zero()
        dpar = self.degree % 2
        for mono, c in f.terms.items():
            # expand the monomial into letters and apply the Leibniz rule
            letters: List[int] = []
            for idx, exp in mono:
                letters.extend([idx] * exp)
            prefix_parity = 0
            for i, idx in enumerate(letters):
                if idx not in self.values:
                    raise UnknownGenerator(alg.gens[idx].name)
                val = self.values[idx]
                if not val.is_zero():
                    sign = -1 if (dpar and prefix_parity) else 1
                    left = alg.one()
                    for j in letters[:i]:
                        left = left * alg.gen(j)
                    right = alg.one()
                    for j in letters[i + 1:]:
                        right = right * alg.gen(j)
                    out = out + (left * val * right).scale(sign * c)
                prefix_parity = (prefix_parity + alg.gens[idx].parity) % 2
        return out

    def commutator(self, other: "Derivation") -> "Derivation":
        """Graded commutator [D, D'] as a derivation (values on generators)."""
        if self.algebra is not other.algebra:
            raise ContextMismatch("derivations on different algebras")
        alg = self.algebra
        sign = -1 if (self.degree % 2) and (other.degree % 2) else 1
        values: Dict[int, Poly] = {}
        for idx in set(self.values) | set(other.values):
            dg = other.values.get(idx)
            gd = self.values.get(idx)
            if dg is None or gd is None:
                raise UnknownGenerator(alg.gens[idx].name)
            values[idx] = self(dg) - other(gd).scale(sign)
        return Derivation(alg, self.degree + other.degree, values)

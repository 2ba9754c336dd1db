"""Symmetric-coalgebra machinery: coderivations, morphisms, MC elements, decalage.

A graded space is described by a degree function on hashable, orderable basis
keys; vectors are finite rational combinations of keys and words are canonical
tuples of keys.  Taylor coefficients are callables on canonical words, and
coderivations/morphisms are rebuilt from them by the usual unshuffle and
partition sums.  Every computation carries an explicit arity truncation since
the symmetric coalgebra is infinite-dimensional.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .gca import koszul_sign

Vector = Dict[object, Fraction]
Word = Tuple[object, ...]
SVector = Dict[Word, Fraction]

__all__ = [
    "GradedSpace",
    "TaylorCoderivation",
    "TaylorMorphism",
    "LInftyStructure",
    "ResidualReport",
    "check_codifferential",
    "check_morphism",
    "exp_coderivation",
    "mc_residual",
    "decalage_down",
    "decalage_up",
    "vec_add",
    "vec_scale",
    "svec_add",
    "svec_scale",
]


def vec_add(a: Vector, b: Vector) -> Vector:
    out = dict(a)
    for k, c in b.items():
        nc = out.get(k, Fraction(0)) + c
        if nc:
            out[k] = nc
        else:
            out.pop(k, None)
    return out


def vec_scale(a: Vector, c: Union[int, Fraction]) -> Vector:
    c = Fraction(c)
    return {k: c * v for k, v in a.items()} if c else {}


def svec_add(a: SVector, b: SVector) -> SVector:
    out = dict(a)
    for w, c in b.items():
        nc = out.get(w, Fraction(0)) + c
        if nc:
            out[w] = nc
        else:
            out.pop(w, None)
    return out


def svec_scale(a: SVector, c: Union[int, Fraction]) -> SVector:
    c = Fraction(c)
    return {w: c * v for w, v in a.items()} if c else {}


class GradedSpace:
    """Degrees (and hence Koszul parities) for basis keys of a graded space."""

    def __init__(self, degree: Union[Callable[[object], int], Dict[object, int]], name: str = ""):
        if isinstance(degree, dict):
            self._table = dict(degree)
            self._fn = None
        else:
            self._table = None
            self._fn = degree
        self.name = name

    def degree(self, key: object) -> int:
        if self._table is not None:
            return self._table[key]
        return self._fn(key)

    def basis(self) -> List[object]:
        if self._table is None:
            raise ValueError("space has no enumerated basis")
        return sorted(self._table)

    # --- words ----------------------------------------------------------

    def normalize_letters(self, letters: Sequence[object]) -> Tuple[int, Optional[Word]]:
        """Canonical word for a sequence of keys: (koszul sign, word) or (1, None)=0."""
        arr = list(letters)
        sign = 1
        for i in range(1, len(arr)):
            j = i
            while j > 0 and arr[j - 1] > arr[j]:
                if self.degree(arr[j - 1]) % 2 and self.degree(arr[j]) % 2:
                    sign = -sign
                arr[j - 1], arr[j] = arr[j], arr[j - 1]
                j -= 1
        for a, b in zip(arr, arr[1:]):
            if a == b and self.degree(a) % 2:
                return 1, None
        return sign, tuple(arr)

    def word_degree(self, word: Word) -> int:
        return sum(self.degree(k) for k in word)

    def words(self, basis: Sequence[object], max_len: int, min_len: int = 0) -> List[Word]:
        """All canonical words over `basis` with length in [min_len, max_len]."""
        basis = sorted(basis)
        out: List[Word] = []
        for L in range(min_len, max_len + 1):
            for combo in itertools.combinations_with_replacement(basis, L):
                if any(a == b and self.degree(a) % 2
                       for a, b in zip(combo, combo[1:])):
                    continue
                out.append(tuple(combo))
        return out

    def symmetric_insert(self, vec: Vector, word: Word) -> SVector:
        """Expand v (+) word multilinearly into canonical words."""
        out: SVector = {}
        for key, c in vec.items():
            sign, w = self.normalize_letters((key,) + tuple(word))
            if w is None:
                continue
            nc = out.get(w, Fraction(0)) + sign * c
            if nc:
                out[w] = nc
            else:
                out.pop(w, None)
        return out

    def expand_word_of_vectors(self, vectors: Sequence[Vector]) -> SVector:
        """Multilinear expansion of v_1 (+) ... (+) v_k into canonical words."""
        out: SVector = {(): Fraction(1)}
        for vec in vectors:
            nxt: SVector = {}
            for word, cw in out.items():
                for key, c in vec.items():
                    sign, w = self.normalize_letters(tuple(word) + (key,))
                    if w is None:
                        continue
                    nc = nxt.get(w, Fraction(0)) + sign * cw * c
                    if nc:
                        nxt[w] = nc
                    else:
                        nxt.pop(w, None)
            out = nxt
        return out


def _unshuffles(n: int, i: int) -> Iterable[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    positions = range(n)
    for sel in itertools.combinations(positions, i):
        rest = tuple(p for p in positions if p not in sel)
        yield sel, rest


class TaylorCoderivation:
    """A coderivation of the symmetric coalgebra, by its Taylor coefficients.

    `coefficients[k]` maps a canonical k-word to a Vector; arity 0, when
    present, is the curvature element (a Vector).  Arities missing from the
    dict are zero maps.
    """

    def __init__(self, space: GradedSpace, degree: int,
                 coefficients: Dict[int, Union[Callable[[Word], Vector], Vector]],
                 name: str = ""):
        self.space = space
        self.degree = degree
        self.coefficients = dict(coefficients)
        self.name = name

    def arities(self) -> List[int]:
        return sorted(self.coefficients)

    def coefficient(self, k: int, word: Word) -> Vector:
        if k not in self.coefficients:
            return {}
        entry = self.coefficients[k]
        if k == 0:
            return dict(entry) if not callable(entry) else entry(())
        return entry(word)

    def taylor(self, word: Word) -> Vector:
        """Evaluate the arity-|word| Taylor coefficient on an arbitrary word."""
        sign, w = self.space.normalize_letters(word)
        if w is None:
            return {}
        return vec_scale(self.coefficient(len(w), w), sign)

    def apply_word(self, word: Word) -> SVector:
        """Full coderivation on one canonical word, via the unshuffle sum."""
        n = len(word)
        degs = [self.space.degree(k) for k in word]
        out: SVector = {}
        for i in self.arities():
            if i > n:
                continue
            for sel, rest in _unshuffles(n, i):
                perm = list(sel) + list(rest)
                sign = koszul_sign(perm, degs)
                # subwords of a canonical word are canonical
                sub = tuple(word[p] for p in sel)
                head = self.coefficient(i, sub)
                if not head:
                    continue
                tail = tuple(word[p] for p in rest)
                piece = self.space.symmetric_insert(vec_scale(head, sign), tail)
                out = svec_add(out, piece)
        return out

    def apply(self, sv: SVector) -> SVector:
        out: SVector = {}
        for word, c in sv.items():
            out = svec_add(out, svec_scale(self.apply_word(word), c))
        return out


class TaylorMorphism:
    """A degree-0 coalgebra morphism, by its Taylor coefficients."""

    def __init__(self, space_src: GradedSpace, space_dst: GradedSpace,
                 coefficients: Dict[int, Callable[[Word], Vector]], name: str = ""):
        self.space_src = space_src
        self.space_dst = space_dst
        self.coefficients = dict(coefficients)
        self.name = name

    def coefficient(self, k: int, word: Word) -> Vector:
        if k not in self.coefficients:
            return {}
        return self.coefficients[k](word)

    def apply_word(self, word: Word) -> SVector:
        """Partition sum over unordered set partitions of the word positions."""
        n = len(word)
        if n == 0:
            return {(): Fraction(1)}
        degs = [self.space_src.degree(k) for k in word]
        out: SVector = {}
        for partition in _set_partitions(n):
            blocks = [sorted(b) for b in partition]
            blocks.sort(key=lambda b: b[0])
            perm = [p for b in blocks for p in b]
            sign = koszul_sign(perm, degs)
            factors: List[Vector] = []
            dead = False
            for b in blocks:
                sub = tuple(word[p] for p in b)
                val = self.coefficient(len(b), sub)
                if not val:
                    dead = True
                    break
                factors.append(val)
            if dead:
                continue
            piece = self.space_dst.expand_word_of_vectors(factors)
            out = svec_add(out, svec_scale(piece, sign))
        return out

    def apply(self, sv: SVector) -> SVector:
        out: SVector = {}
        for word, c in sv.items():
            out = svec_add(out, svec_scale(self.apply_word(word), c))
        return out


def _set_partitions(n: int) -> Iterable[List[List[int]]]:
    """All set partitions of {0..n-1}."""
    if n == 0:
        yield []
        return
    if n == 1:
        yield [[0]]
        return
    for smaller in _set_partitions(n - 1):
        for i, block in enumerate(smaller):
            yield smaller[:i] + [block + [n - 1]] + smaller[i + 1:]
        yield smaller + [[n - 1]]


class ResidualReport:
    """Outcome of an exactness check: the nonzero residuals, with witnesses."""

    def __init__(self, label: str):
        self.label = label
        self.entries: List[Tuple[Word, SVector]] = []

    def add(self, word: Word, residual: SVector) -> None:
        if residual:
            self.entries.append((word, residual))

    @property
    def ok(self) -> bool:
        return not self.entries

    def __bool__(self) -> bool:
        return self.ok

    def witness(self) -> Optional[Tuple[Word, SVector]]:
        return self.entries[0] if self.entries else None

    def __repr__(self) -> str:
        state = "empty" if self.ok else f"{len(self.entries)} nonzero"
        return f"ResidualReport({self.label}: {state})"


def check_codifferential(Q: TaylorCoderivation, words: Sequence[Word],
                         label: str = "Q^2") -> ResidualReport:
    """Residuals pr_1(Q(Q(w))) over the given words; empty iff the relations hold.

    Q^2 is again a coderivation, so it vanishes iff its Taylor coefficients
    (the arity-1 projections) vanish on every word.
    """
    report = ResidualReport(label)
    for w in words:
        qq = Q.apply(Q.apply_word(w))
        residual = {wd: c for wd, c in qq.items() if len(wd) == 1}
        report.add(w, residual)
    return report


def check_morphism(phi: TaylorMorphism, Q: TaylorCoderivation, Qp: TaylorCoderivation,
                   words: Sequence[Word], label: str = "morphism") -> ResidualReport:
    """Residuals Q'(phi(w)) - phi(Q(w)) on the given words."""
    report = ResidualReport(label)
    for w in words:
        lhs = Qp.apply(phi.apply_word(w))
        rhs = phi.apply(Q.apply_word(w))
        residual = svec_add(lhs, svec_scale(rhs, -1))
        report.add(w, residual)
    return report


def exp_coderivation(M: TaylorCoderivation, max_words: int = 0) -> TaylorMorphism:
    """Exponential of a word-length-lowering coderivation, as a Taylor morphism.

    Requires every Taylor coefficient of M to have arity >= 2, which makes
    e^M(word) a finite sum.  The returned morphism also exposes the exact
    series action as `apply_series`.
    """
    if any(k < 2 for k in M.arities()):
        raise ValueError("exponential needs a coderivation that lowers word length (arities >= 2)")
    space = M.space

    def apply_series(sv: SVector) -> SVector:
        total: SVector = dict(sv)
        term = dict(sv)
        j = 1
        while term:
            term = M.apply(term)
            if not term:
                break
            total = svec_add(total, svec_scale(term, Fraction(1, math.factorial(j))))
            j += 1
            if j > 64:
                raise RuntimeError("exp series did not terminate")
        return total

    def make_coeff(k: int):
        def coeff(word: Word) -> Vector:
            full = apply_series({tuple(word): Fraction(1)})
            return {w[0]: c for w, c in full.items() if len(w) == 1}
        return coeff

    coeffs = {k: make_coeff(k) for k in range(1, 9)}
    phi = TaylorMorphism(space, space, coeffs, name=f"exp({M.name})")
    phi.apply_series = apply_series
    return phi


class LInftyStructure:
    """A curved L-infinity[1] structure: curvature plus multibrackets."""

    def __init__(self, space: GradedSpace, curvature: Optional[Vector],
                 brackets: Dict[int, Callable[[Word], Vector]], name: str = ""):
        self.space = space
        self.curvature = curvature or {}
        self.brackets = dict(brackets)
        self.name = name

    @property
    def is_curved(self) -> bool:
        return bool(self.curvature)

    def bracket(self, k: int, word: Word) -> Vector:
        if k == 0:
            return dict(self.curvature)
        if k not in self.brackets:
            return {}
        return self.brackets[k](word)

    def to_coderivation(self) -> TaylorCoderivation:
        coeffs: Dict[int, object] = {}
        if self.curvature:
            coeffs[0] = dict(self.curvature)
        for k, fn in self.brackets.items():
            coeffs[k] = fn
        return TaylorCoderivation(self.space, 1, coeffs, name=self.name)


def mc_residual(L: LInftyStructure, eta: Vector, max_arity: int = None) -> Vector:
    """m0 + sum_k (1/k!) m_k(eta,...,eta) for a degree-0 element eta."""
    for key in eta:
        if L.space.degree(key) % 2 != 0:
            raise ValueError("MC candidate must have degree 0 in the shifted grading")
    arities = sorted(L.brackets)
    if max_arity is not None:
        arities = [k for k in arities if k <= max_arity]
    out: Vector = dict(L.curvature)
    for k in arities:
        power = L.space.expand_word_of_vectors([eta] * k)
        contrib: Vector = {}
        for word, c in power.items():
            contrib = vec_add(contrib, vec_scale(L.bracket(k, word), c))
        out = vec_add(out, vec_scale(contrib, Fraction(1, math.factorial(k))))
    return out


# --- decalage ------------------------------------------------------------


def _decalage_sign(k: int, unshifted_degrees: Sequence[int]) -> int:
    """(-1)^k (-1)^{sum_i (k-i)|v_i|} with 1-based i."""
    s = k + sum((k - (i + 1)) * d for i, d in enumerate(unshifted_degrees))
    return -1 if s % 2 else 1


def decalage_down(mk: Callable[[Word], Vector], k: int,
                  unshifted_degree: Callable[[object], int]) -> Callable[[Word], Vector]:
    """Turn an L-infinity[1] bracket on V[1] into the L-infinity bracket on V.

    Keys are shared between V and V[1]; `unshifted_degree` gives degrees in V.
    """
    def mu(word: Word) -> Vector:
        degs = [unshifted_degree(key) for key in word]
        return vec_scale(mk(word), _decalage_sign(k, degs))
    return mu


def decalage_up(mu: Callable[[Word], Vector], k: int,
                unshifted_degree: Callable[[object], int]) -> Callable[[Word], Vector]:
    """Inverse of :func:`decalage_down`."""
    def mk(word: Word) -> Vector:
        degs = [unshifted_degree(key) for key in word]
        return vec_scale(mu(word), _decalage_sign(k, degs))
    return mk

"""Loading and saving instance files.

An instance file is UTF-8 JSON carrying the structure functions of a split
Courant-Jacobi algebroid, plus optional named deformations (2-forms on the
A side) and epsilon tensors (2-forms on the dual side).  Rational numbers
are "num/den" strings, bit-exact; polynomial entries are either such a
string (a constant) or a map from comma-separated exponent vectors to
rationals.  Declared skew-symmetries are validated on load.
"""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from typing import Dict, Optional, Tuple

from .cjalg import DeformationForm, SplitCJInstance
from .gca import Poly

__all__ = ["InstanceFileError", "InstanceDocument", "load_instance", "save_instance"]

SCHEMA_VERSION = 1


class InstanceFileError(ValueError):
    """Malformed or inconsistent instance file (CLI exit code 2)."""


def _parse_rational(s) -> Fraction:
    if isinstance(s, str):
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceFileError(f"bad rational {s!r}: {exc}") from None
    if isinstance(s, int):
        return Fraction(s)
    raise InstanceFileError(f"rational must be a 'num/den' string, got {s!r}")


def _format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def _parse_poly(entry, m: int) -> Dict[Tuple[int, ...], Fraction]:
    """Polynomial as an exponent-vector dict (exponents over the x variables)."""
    if isinstance(entry, (str, int)):
        q = _parse_rational(entry)
        return {(0,) * m: q} if q else {}
    if isinstance(entry, dict):
        out: Dict[Tuple[int, ...], Fraction] = {}
        for key, val in entry.items():
            if key == "":
                exps: Tuple[int, ...] = (0,) * m
            else:
                try:
                    exps = tuple(int(p) for p in key.split(","))
                except ValueError:
                    raise InstanceFileError(f"bad exponent vector {key!r}") from None
            if len(exps) != m or any(e < 0 for e in exps):
                raise InstanceFileError(f"exponent vector {key!r} does not match base dim {m}")
            q = _parse_rational(val)
            if q:
                out[exps] = out.get(exps, Fraction(0)) + q
        return out
    raise InstanceFileError(f"bad polynomial entry {entry!r}")


def _format_poly(p: Poly, inst: SplitCJInstance):
    ctx = inst.context
    coeffs: Dict[Tuple[int, ...], Fraction] = {}
    for mono, c in p.terms.items():
        exps = [0] * inst.m
        for idx, e in mono:
            exps[ctx.ix_x.index(idx)] = e
        coeffs[tuple(exps)] = c
    if not coeffs:
        return "0"
    if list(coeffs) == [(0,) * inst.m]:
        return _format_rational(coeffs[(0,) * inst.m])
    return {",".join(str(e) for e in exps): _format_rational(c)
            for exps, c in sorted(coeffs.items())}


def _expect_array(data, key: str, shape: Tuple[int, ...], m: int):
    """Parse a nested array of polynomials with the given shape (or all-zero)."""
    if key not in data:
        return None
    arr = data[key]

    def recurse(a, sh):
        if not sh:
            return _parse_poly(a, m)
        if not isinstance(a, list) or len(a) != sh[0]:
            raise InstanceFileError(f"{key}: expected array of length {sh[0]}")
        return [recurse(x, sh[1:]) for x in a]

    return recurse(arr, shape)


class InstanceDocument:
    """A parsed instance file: the instance plus named deformations/epsilons."""

    def __init__(self, instance: SplitCJInstance,
                 deformations: Dict[str, DeformationForm],
                 epsilons: Dict[str, Dict[Tuple[int, int], Dict]]):
        self.instance = instance
        self.deformations = deformations
        self.epsilons = epsilons


def load_instance(path: str) -> InstanceDocument:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InstanceFileError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InstanceFileError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InstanceFileError("top level must be a JSON object")
    if data.get("schema") != SCHEMA_VERSION:
        raise InstanceFileError(f"unsupported schema version {data.get('schema')!r}")
    try:
        m = int(data["base_dim"])
        n = int(data["rank"])
    except (KeyError, TypeError, ValueError):
        raise InstanceFileError("base_dim and rank must be integers") from None
    if m < 0 or n < 1:
        raise InstanceFileError("base_dim must be >= 0 and rank >= 1")

    anchor = _expect_array(data, "anchor", (m, n), m)
    bracket = _expect_array(data, "bracket", (n, n, n), m)
    rep = _expect_array(data, "rep", (n,), m)
    anchor_d = _expect_array(data, "anchor_dual", (m, n), m)
    bracket_d = _expect_array(data, "bracket_dual", (n, n, n), m)
    rep_d = _expect_array(data, "rep_dual", (n,), m)
    ups = _expect_array(data, "upsilon", (n, n, n), m)
    ups_d = _expect_array(data, "upsilon_dual", (n, n, n), m)

    def check_skew_ab(arr, label):
        if arr is None:
            return
        for cc in range(n):
            for a in range(n):
                for b in range(n):
                    ab = arr[cc][a][b]
                    ba = {k: -v for k, v in arr[cc][b][a].items()}
                    if ab != ba:
                        raise InstanceFileError(
                            f"{label}[{cc}] is not skew in ({a},{b})")

    def check_antisym(arr, label):
        if arr is None:
            return
        for a in range(n):
            for b in range(n):
                for cc in range(n):
                    v = arr[a][b][cc]
                    for perm in itertools.permutations((a, b, cc)):
                        sgn = _list_perm_sign((a, b, cc), perm)
                        if sgn is None:
                            if any(v.values()):
                                raise InstanceFileError(
                                    f"{label} has a nonzero entry with repeated index")
                            continue
                        w = arr[perm[0]][perm[1]][perm[2]]
                        expect = {k: sgn * q for k, q in v.items()}
                        if {k: q for k, q in expect.items() if q} != {k: q for k, q in w.items() if q}:
                            raise InstanceFileError(f"{label} is not fully antisymmetric")

    check_skew_ab(bracket, "bracket")
    check_skew_ab(bracket_d, "bracket_dual")
    check_antisym(ups, "upsilon")
    check_antisym(ups_d, "upsilon_dual")

    def sparse2(arr):
        if arr is None:
            return {}
        return {(i, a): arr[i][a] for i in range(m) for a in range(n) if arr[i][a]}

    def sparse1(arr):
        if arr is None:
            return {}
        return {a: arr[a] for a in range(n) if arr[a]}

    def sparse_c(arr):
        if arr is None:
            return {}
        return {(cc, a, b): arr[cc][a][b] for cc in range(n)
                for a, b in itertools.combinations(range(n), 2) if arr[cc][a][b]}

    def sparse_anti(arr):
        if arr is None:
            return {}
        return {(a, b, cc): arr[a][b][cc]
                for a, b, cc in itertools.combinations(range(n), 3) if arr[a][b][cc]}

    inst = SplitCJInstance(
        m, n,
        rho=sparse2(anchor), c=sparse_c(bracket), lam=sparse1(rep),
        rho_dual=sparse2(anchor_d), c_dual=sparse_c(bracket_d), lam_dual=sparse1(rep_d),
        phi=sparse_anti(ups), psi=sparse_anti(ups_d),
        name=str(data.get("name", "")),
    )

    deformations: Dict[str, DeformationForm] = {}
    for dname, arr in (data.get("deformations") or {}).items():
        parsed = _expect_array({"d": arr}, "d", (n, n), m)
        _check_skew2(parsed, f"deformation {dname!r}", n)
        deformations[dname] = DeformationForm.from_dict(
            inst, {(a, b): parsed[a][b] for a, b in itertools.combinations(range(n), 2)
                   if parsed[a][b]})

    epsilons: Dict[str, Dict[Tuple[int, int], Dict]] = {}
    for ename, arr in (data.get("epsilons") or {}).items():
        parsed = _expect_array({"e": arr}, "e", (n, n), m)
        _check_skew2(parsed, f"epsilon {ename!r}", n)
        epsilons[ename] = {(a, b): parsed[a][b]
                           for a, b in itertools.combinations(range(n), 2) if parsed[a][b]}

    return InstanceDocument(inst, deformations, epsilons)


def _check_skew2(arr, label: str, n: int) -> None:
    for a in range(n):
        for b in range(n):
            ab = {k: v for k, v in arr[a][b].items() if v}
            ba = {k: -v for k, v in arr[b][a].items() if v}
            if ab != ba:
                raise InstanceFileError(f"{label} is not skew-symmetric")


def _list_perm_sign(base, perm) -> Optional[int]:
    if len(set(base)) != len(base):
        return None
    order = [base.index(p) for p in perm]
    sgn = 1
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j]:
                sgn = -sgn
    return sgn


def save_instance(path: str, doc: InstanceDocument) -> None:
    inst = doc.instance
    m, n = inst.m, inst.n

    def arr2(rows):
        return [[_format_poly(rows[i][a], inst) for a in range(n)] for i in range(m)]

    def arr1(row):
        return [_format_poly(row[a], inst) for a in range(n)]

    def arr3(t):
        return [[[_format_poly(t[i][j][k], inst) for k in range(n)]
                 for j in range(n)] for i in range(n)]

    data = {
        "schema": SCHEMA_VERSION,
        "name": inst.name,
        "base_dim": m,
        "rank": n,
        "anchor": arr2(inst.rho),
        "bracket": arr3(inst.c),
        "rep": arr1(inst.lam),
        "anchor_dual": arr2(inst.rho_dual),
        "bracket_dual": arr3(inst.c_dual),
        "rep_dual": arr1(inst.lam_dual),
        "upsilon": arr3(inst.phi),
        "upsilon_dual": arr3(inst.psi),
    }
    if doc.deformations:
        data["deformations"] = {
            name: [[_format_poly(form.entries[a][b], inst) for b in range(n)]
                   for a in range(n)]
            for name, form in doc.deformations.items()
        }
    if doc.epsilons:
        from .cjalg import _as_xpoly
        eps_out = {}
        for name, eps in doc.epsilons.items():
            full = [[inst.context.algebra.zero() for _ in range(n)] for _ in range(n)]
            for (a, b), v in eps.items():
                p = _as_xpoly(inst.context, v)
                full[a][b] = full[a][b] + p
                full[b][a] = full[b][a] - p
            eps_out[name] = [[_format_poly(full[a][b], inst) for b in range(n)]
                             for a in range(n)]
        data["epsilons"] = eps_out
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")

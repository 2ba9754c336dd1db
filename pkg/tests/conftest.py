"""Shared fixtures and seeded random generators for the test suite."""

import itertools
from fractions import Fraction

import pytest

from cjde.cjalg import SplitCJInstance
from cjde.contact import ContactContext, Section
from cjde.gca import Poly


def random_poly(ctx, rng, weight=4, terms=4, indices=None, coeff_range=3):
    """Random polynomial over the given generator indices (default: all)."""
    pool = list(indices) if indices is not None else list(range(len(ctx.algebra.gens)))
    out = {}
    for _ in range(terms):
        k = rng.randint(0, weight)
        word = [rng.choice(pool) for _ in range(k)]
        _, mono = ctx.algebra.normalize_word(word)
        if mono is None:
            continue
        out[mono] = Fraction(rng.randint(-coeff_range, coeff_range))
    return Poly(ctx.algebra, out)


def random_section(ctx, rng, weight=4, terms=4):
    return Section(ctx, random_poly(ctx, rng, weight, terms))


def random_homogeneous_section(ctx, rng, weight=4, terms=5):
    """Random section concentrated in one total degree (possibly zero)."""
    by_degree = {}
    for _ in range(terms):
        k = rng.randint(0, weight)
        word = [rng.randrange(len(ctx.algebra.gens)) for _ in range(k)]
        _, mono = ctx.algebra.normalize_word(word)
        if mono is None:
            continue
        by_degree.setdefault(ctx.algebra.monomial_degree(mono), {})[mono] = \
            Fraction(rng.randint(-2, 2))
    if not by_degree:
        return ctx.zero_section()
    pick = rng.choice(sorted(by_degree))
    return Section(ctx, Poly(ctx.algebra, by_degree[pick]))


def random_base_poly(ctx, rng, weight=2, terms=3):
    return random_poly(ctx, rng, weight, terms, indices=ctx.base_indices())


def random_x_poly(ctx, rng, maxdeg=1):
    """Exponent-dict polynomial in the base coordinates only."""
    out = {}
    for _ in range(2):
        exps = tuple(rng.randint(0, maxdeg) for _ in range(ctx.m))
        out[exps] = out.get(exps, 0) + rng.randint(-2, 2)
    return out


def random_form_section(inst, rng, density=0.45):
    """Random pullback form (mixed degrees) with polynomial x-coefficients."""
    ctx = inst.context
    out = ctx.algebra.zero()
    for k in range(0, inst.n + 1):
        for combo in itertools.combinations(range(inst.n), k):
            if rng.random() < density:
                word = [ctx.ix_u[a] for a in combo]
                for i in range(ctx.m):
                    word += [ctx.ix_x[i]] * rng.randint(0, 1)
                _, mono = ctx.algebra.normalize_word(word)
                out = out + Poly(ctx.algebra, {mono: Fraction(rng.randint(-2, 2))})
    return ctx.section(out)


def random_instance(rng, m, n, name="rand"):
    """Fully random structure functions (no integrability expected)."""
    kw = dict(rho={}, c={}, lam={}, rho_dual={}, c_dual={}, lam_dual={}, phi={}, psi={})
    ctx = ContactContext(m, n)
    for i in range(m):
        for a in range(n):
            if rng.random() < 0.7:
                kw["rho"][(i, a)] = random_x_poly(ctx, rng)
            if rng.random() < 0.7:
                kw["rho_dual"][(i, a)] = random_x_poly(ctx, rng)
    for a in range(n):
        if rng.random() < 0.7:
            kw["lam"][a] = random_x_poly(ctx, rng)
        if rng.random() < 0.7:
            kw["lam_dual"][a] = random_x_poly(ctx, rng)
    for cc in range(n):
        for a, b in itertools.combinations(range(n), 2):
            if rng.random() < 0.6:
                kw["c"][(cc, a, b)] = random_x_poly(ctx, rng)
            if rng.random() < 0.6:
                kw["c_dual"][(cc, a, b)] = random_x_poly(ctx, rng)
    for a, b, cc in itertools.combinations(range(n), 3):
        if rng.random() < 0.7:
            kw["phi"][(a, b, cc)] = random_x_poly(ctx, rng)
        if rng.random() < 0.7:
            kw["psi"][(a, b, cc)] = random_x_poly(ctx, rng)
    return SplitCJInstance(m, n, context=ctx, name=name, **kw)


def basis_keys(inst):
    """Monomial keys of the u-form basis of the deformation space."""
    ctx = inst.context
    keys = []
    for k in range(0, inst.n + 1):
        for combo in itertools.combinations(range(inst.n), k):
            _, mono = ctx.algebra.normalize_word([ctx.ix_u[a] for a in combo])
            keys.append(mono)
    return keys


@pytest.fixture
def heis2():
    return SplitCJInstance(0, 2, lam={0: 1}, name="HEIS2")


@pytest.fixture
def omni1():
    return SplitCJInstance(1, 2, lam={0: 1}, rho={(0, 1): 1}, name="OMNI1")


@pytest.fixture
def obst1():
    # frozen output of search_obstructed_instance(seed=42)
    return SplitCJInstance(0, 3, c_dual={(0, 0, 2): -1, (0, 1, 2): -1}, name="OBST1")


@pytest.fixture
def dgla1():
    return SplitCJInstance(0, 3, c={(1, 0, 1): 1, (2, 0, 2): 1},
                           c_dual={(1, 0, 2): 1}, name="DGLA1")


@pytest.fixture
def djmix():
    return SplitCJInstance(0, 3, c_dual={(2, 0, 1): 1}, psi={(0, 1, 2): 1}, name="DJMIX")


@pytest.fixture
def curv1():
    return SplitCJInstance(0, 3, lam={0: 1}, phi={(0, 1, 2): Fraction(2, 3)}, name="CURV1")


@pytest.fixture
def curvmix():
    # curved with a nonzero binary bracket: exercises the curvature column
    return SplitCJInstance(0, 3, c_dual={(2, 0, 1): 1},
                           phi={(0, 1, 2): Fraction(1, 2)}, name="CURVMIX")

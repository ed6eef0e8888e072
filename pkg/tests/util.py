"""Shared generators for the test suite: seeded random closed morphisms
and random iterated-cone complexes."""

import random

from dgcat.linalg import Matrix, kernel_basis
from dgcat.twisted import TwistedMorphism, cone, one_term, twisted_hom_complex


def closed_basis(x, y, degree):
    """Basis (as morphisms) of the closed degree-d part of Hom(x, y)."""
    H = twisted_hom_complex(x, y)
    f = H.space.field
    idx = [t for t in range(H.dim) if H.space.degrees[t] == degree]
    if not idx:
        return H, []
    dmat = Matrix.zero(f, H.dim, len(idx))
    for c, t in enumerate(idx):
        for r in range(H.dim):
            dmat.data[r][c] = H.diff[r, t]
    out = []
    for v in kernel_basis(dmat):
        coefs = [f.zero()] * H.dim
        for p, t in enumerate(idx):
            coefs[t] = v[p]
        out.append(H.to_morphism(coefs, degree))
    return H, out


def random_closed_morphism(x, y, degree, rng, span=2):
    """A random combination of the closed degree-d morphisms (may be zero)."""
    H, basis = closed_basis(x, y, degree)
    f = H.space.field
    out = TwistedMorphism.zero(x, y, degree)
    for b in basis:
        c = f.of_int(rng.randint(-span, span))
        if not f.is_zero(c):
            out = out + b.scale(c)
    return out


def random_cone_complex(gens, rng, steps=2, shifts=(-1, 0, 1)):
    """A random iterated cone of closed degree-0 maps between one-terms."""
    x = one_term(gens[rng.randrange(len(gens))], rng.choice(shifts))
    for _ in range(steps):
        y = one_term(gens[rng.randrange(len(gens))], rng.choice(shifts))
        fmor = random_closed_morphism(y, x, 0, rng)
        if fmor.is_zero():
            continue
        x = cone(fmor).complex
    return x

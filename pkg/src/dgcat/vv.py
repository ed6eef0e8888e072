"""The arrow category of compact dg modules over a concrete base.

Objects are diagrams X1 -> X0 of twisted complexes (modeling the
cokernel of the induced map of representable modules); morphisms are
commuting squares (phi0, phi1) modulo those with phi0 factoring through
y.  Hom spaces are therefore computed as explicit linear quotients, with
canonical coset representatives.
"""

from __future__ import annotations

from .algebra import StructuralError
from .bimodule import cokernel as bimodule_cokernel
from .graded import DgSpace, GradedSpace
from .linalg import Matrix, kernel_basis, rref, solve_linear
from .twisted import (
    TwistedComplex, TwistedMorphism, compose, direct_sum, hcompose_left,
    hcompose_right, totalize, totalize_morphism, twisted_hom_complex,
    zero_complex,
)


class ArrowObject:
    """x1 --x--> x0 with x a closed degree-0 twisted morphism."""

    def __init__(self, x: TwistedMorphism):
        if x.degree != 0:
            raise StructuralError("arrow map must have degree 0")
        if not x.is_closed():
            raise StructuralError("arrow map must be closed")
        self.x1 = x.source
        self.x0 = x.target
        self.x = x

    @staticmethod
    def free(x0: TwistedComplex) -> "ArrowObject":
        z = zero_complex(x0.left_alg, x0.right_alg)
        return ArrowObject(TwistedMorphism(z, x0, 0, {}))

    @property
    def left_alg(self):
        return self.x0.left_alg

    @property
    def right_alg(self):
        return self.x0.right_alg

    def __repr__(self):
        return f"Arrow({self.x1!r} -> {self.x0!r})"


class ArrowMorphism:
    """A pair (phi0, phi1) with phi0 x = y phi1, stored with the witness."""

    def __init__(self, source: ArrowObject, target: ArrowObject,
                 phi0: TwistedMorphism, phi1: TwistedMorphism | None = None):
        self.source = source
        self.target = target
        self.phi0 = phi0
        self.phi1 = phi1

    @property
    def degree(self):
        return self.phi0.degree

    def compose(self, other: "ArrowMorphism") -> "ArrowMorphism":
        phi1 = None
        if self.phi1 is not None and other.phi1 is not None:
            phi1 = self.phi1.compose(other.phi1)
        return ArrowMorphism(other.source, self.target,
                             self.phi0.compose(other.phi0), phi1)


class VvHom:
    """The quotient Hom space between two arrow objects.

    S = {phi0 | phi0 x lies in the image of y o (-)}, modulo
    F = {y eta | eta : X0 -> Y1}; basis vectors are canonical coset
    representatives (echelon complements), the differential descends.
    """

    def __init__(self, a: ArrowObject, b: ArrowObject):
        self.a = a
        self.b = b
        f = a.x0.field
        self.H00 = twisted_hom_complex(a.x0, b.x0)
        self.H10 = twisted_hom_complex(a.x1, b.x0)
        self.H01 = twisted_hom_complex(a.x0, b.x1)
        self.H11 = twisted_hom_complex(a.x1, b.x1)
        self._cx = self._lin(self.H00, self.H10, lambda m: m.compose(a.x))
        self._y = self._lin(self.H11, self.H10, lambda m: b.x.compose(m))
        self._yp = self._lin(self.H01, self.H00, lambda m: b.x.compose(m))

        # S per degree via ker [Cx | -Y]; F = im(Yp)
        reps = []
        degrees = sorted(set(self.H00.space.degrees))
        fe_rows, fe_pivs = self._image_echelon(self._yp)
        self._f_rows, self._f_pivs = fe_rows, fe_pivs
        for d in degrees:
            i00 = [t for t in range(self.H00.dim) if self.H00.space.degrees[t] == d]
            i11 = [t for t in range(self.H11.dim) if self.H11.space.degrees[t] == d]
            if not i00:
                continue
            rows = []
            nrows = self.H10.dim
            cols = []
            for t in i00:
                cols.append([self._cx[r][t] for r in range(nrows)])
            for t in i11:
                cols.append([f.neg(self._y[r][t]) for r in range(nrows)])
            big = Matrix.from_rows(f, cols).transpose() if cols else Matrix.zero(f, nrows, 0)
            span = []
            for v in kernel_basis(big):
                w = [f.zero()] * self.H00.dim
                for pos, t in enumerate(i00):
                    w[t] = v[pos]
                if any(not f.is_zero(c) for c in w):
                    span.append(w)
            # reduce the S-span modulo F and echelonize for canonical reps
            reduced = [self._reduce_mod_f(w) for w in span]
            reduced = [w for w in reduced if any(not f.is_zero(c) for c in w)]
            if reduced:
                rr, piv = rref(Matrix.from_rows(f, reduced))
                for i in range(len(piv)):
                    reps.append((d, rr.row(i)))
        self.reps = reps
        self.space = GradedSpace(f, [(f"q{t}", d) for t, (d, _) in enumerate(reps)])
        self.diff = self._differential()

    @staticmethod
    def _lin(src, tgt, fn):
        f = src.space.field
        out = [[f.zero()] * src.dim for _ in range(tgt.dim)]
        for t in range(src.dim):
            coefs = [f.zero()] * src.dim
            coefs[t] = f.one()
            mor = src.to_morphism(coefs, src.space.degrees[t])
            img = fn(mor)
            for s, c in enumerate(tgt.coords(img)):
                out[s][t] = c
        return out

    def _image_echelon(self, mat_cols):
        f = self.H00.space.field
        vecs = []
        for t in range(len(mat_cols[0]) if mat_cols else 0):
            v = [mat_cols[r][t] for r in range(len(mat_cols))]
            if any(not f.is_zero(c) for c in v):
                vecs.append(v)
        if not vecs:
            return None, []
        rr, piv = rref(Matrix.from_rows(f, vecs))
        return rr, piv

    def _reduce_mod_f(self, vec):
        f = self.H00.space.field
        if self._f_rows is None:
            return list(vec)
        v = list(vec)
        for r, pc in enumerate(self._f_pivs):
            c0 = v[pc]
            if not f.is_zero(c0):
                row = self._f_rows.data[r]
                v = [f.sub(a, f.mul(c0, b)) for a, b in zip(v, row)]
        return v

    @property
    def dim(self):
        return len(self.reps)

    def dims_by_degree(self):
        out = {}
        for d, _ in self.reps:
            out[d] = out.get(d, 0) + 1
        return out

    def coords(self, phi0: TwistedMorphism):
        """Coset coordinates of a morphism given by its phi0 component."""
        f = self.H00.space.field
        v = self._reduce_mod_f(self.H00.coords(phi0))
        out = [f.zero()] * self.dim
        d = phi0.degree
        idx = [t for t, (dd, _) in enumerate(self.reps) if dd == d]
        if not idx:
            if any(not f.is_zero(c) for c in v):
                raise StructuralError("morphism does not lie in the quotient span")
            return out
        cols = [list(self.reps[t][1]) for t in idx]
        big = Matrix.from_rows(f, cols).transpose()
        sol = solve_linear(big, v)
        if sol is None:
            raise StructuralError("morphism does not reduce into the canonical basis")
        for t, c in zip(idx, sol):
            out[t] = c
        return out

    def rep_morphism(self, t) -> TwistedMorphism:
        d, v = self.reps[t]
        return self.H00.to_morphism(v, d)

    def _differential(self):
        f = self.H00.space.field
        dmat = Matrix.zero(f, self.dim, self.dim)
        for t in range(self.dim):
            d, v = self.reps[t]
            mor = self.H00.to_morphism(v, d)
            dm = mor.differential()
            coefs = self.coords(dm) if not dm.is_zero() else [f.zero()] * self.dim
            for s, c in enumerate(coefs):
                dmat.data[s][t] = c
        return dmat

    def dg_space(self) -> DgSpace:
        return DgSpace(self.space, self.diff, check=False)


def vv_hom(a: ArrowObject, b: ArrowObject) -> VvHom:
    if a.left_alg.uid != b.left_alg.uid or a.right_alg.uid != b.right_alg.uid:
        raise StructuralError("vv_hom needs a common ambient category")
    return VvHom(a, b)


def vv_compose(g: ArrowObject, h: ArrowObject) -> ArrowObject:
    """(G1 -> G0)(H1 -> H0) = (G1 H0 + G0 H1 -> G0 H0), strictly associative."""
    if g.right_alg.uid != h.left_alg.uid:
        raise StructuralError("non-composable arrow objects")
    top = direct_sum(compose(g.x1, h.x0), compose(g.x0, h.x1))
    bottom = compose(g.x0, h.x0)
    left = hcompose_left(g.x, h.x0)     # G1 H0 -> G0 H0
    right = hcompose_right(g.x0, h.x)   # G0 H1 -> G0 H0
    off = left.source.n_summands
    comps = {}
    for (n, m), mat in left.components.items():
        comps[(n, m)] = mat
    for (n, m), mat in right.components.items():
        key = (n, m + off)
        comps[key] = comps[key] + mat if key in comps else mat
    total = TwistedMorphism(top, bottom, 0, comps)
    return ArrowObject(total)


def vv_action(g: ArrowObject, m: ArrowObject) -> ArrowObject:
    """The extension of the 2-representation to arrow 1-morphisms acting on
    arrow module objects: (G1 X0 + G0 X1 -> G0 X0)."""
    return vv_compose(g, m)


def vv_cokernel(f: ArrowMorphism):
    """Cokernel of a closed degree-0 arrow morphism: (Y1 + X0 -> Y0).

    Returns (cokernel object, projection ArrowMorphism from the target).
    """
    if f.degree != 0:
        raise StructuralError("vv_cokernel needs degree 0")
    if not f.phi0.is_closed():
        raise StructuralError("vv_cokernel needs a closed morphism")
    a, b = f.source, f.target
    top = direct_sum(b.x1, a.x0)
    comps = {}
    for (n, m), mat in b.x.components.items():
        comps[(n, m)] = mat
    off = b.x1.n_summands
    for (n, m), mat in f.phi0.components.items():
        key = (n, m + off)
        comps[key] = comps[key] + mat if key in comps else mat
    total = TwistedMorphism(top, b.x0, 0, comps)
    cok = ArrowObject(total)
    # projection: identity on Y0, inclusion Y1 -> Y1 + X0
    incl = {}
    for i in range(b.x1.n_summands):
        incl[(i, i)] = Matrix.identity(b.x0.field, b.x1.summand(i).dim)
    proj = ArrowMorphism(b, cok, TwistedMorphism.identity(b.x0),
                         TwistedMorphism(b.x1, top, 0, incl))
    return cok, proj


def concretize(a: ArrowObject):
    """The honest bimodule cokernel realizing the arrow object."""
    if a.x1.n_summands == 0:
        return totalize(a.x0)
    bm = totalize_morphism(a.x)
    q, _ = bimodule_cokernel(bm, name=f"conc({a!r})")
    return q

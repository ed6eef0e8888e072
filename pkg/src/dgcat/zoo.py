"""Constructors for the worked examples: zigzag algebras with their braid
complexes, the Gaussian-integer quotient data, and matrix dg algebras.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import DgAlgebra, Quiver, StructuralError, path_algebra, trivial_algebra
from .bimodule import (
    BimoduleMap, DgBimodule, ground, left_regular, regular_bimodule,
    right_regular, submodule_from_indices, tensor_over_k,
)
from .graded import GradedSpace
from .linalg import Matrix, invert
from .twisted import (
    TwistedComplex, TwistedMorphism, compose, cone, identity_complex,
    one_term, shift_twisted,
)


@dataclass(frozen=True)
class BraidWord:
    """A word in the braid generators: signed indices with 1 <= |letter| <= n."""
    n: int
    letters: tuple

    def __post_init__(self):
        for l in self.letters:
            if not isinstance(l, int) or l == 0 or abs(l) > self.n:
                raise StructuralError(f"letter {l} out of range for {self.n} generators")

    @staticmethod
    def parse(n, text):
        letters = tuple(int(t) for t in text.replace(",", " ").split())
        return BraidWord(n, letters)


def zigzag(n: int, field=None, name=None) -> DgAlgebra:
    """The symmetric zigzag algebra Z_n on n >= 2 vertices; dim 4n-2.

    Trivial differential and trivial grading; the loops span the socle
    and carry the symmetric trace form (trace = coefficient of the loop).
    """
    if n < 2:
        raise StructuralError("zigzag needs n >= 2 (the n = 1 convention differs)")
    from .field import QQ
    field = field or QQ
    vertices = list(range(1, n + 1))
    arrows = []
    for i in range(1, n):
        arrows.append((f"u{i}", i, i + 1))   # i -> i+1
        arrows.append((f"d{i}", i + 1, i))   # i+1 -> i
    quiver = Quiver(vertices, arrows)
    arrow_of = {(s, t): nm for nm, s, t in arrows}

    relations = []
    # through paths of length 2 vanish
    for i in range(1, n - 1):
        relations.append([(1, (arrow_of[(i, i + 1)], arrow_of[(i + 1, i + 2)]))])
        relations.append([(1, (arrow_of[(i + 2, i + 1)], arrow_of[(i + 1, i)]))])
    # interior loops agree
    for i in range(2, n):
        relations.append([(1, (arrow_of[(i, i + 1)], arrow_of[(i + 1, i)])),
                          (-1, (arrow_of[(i, i - 1)], arrow_of[(i - 1, i)]))])
    # the radical cubed vanishes: all composable arrow triples
    names = {nm: (s, t) for nm, s, t in arrows}
    for a1, (s1, t1) in names.items():
        for a2, (s2, t2) in names.items():
            if t1 != s2:
                continue
            for a3, (s3, t3) in names.items():
                if t2 == s3:
                    relations.append([(1, (a1, a2, a3))])

    z = path_algebra(quiver, relations=relations, field=field,
                     name=name or f"Z{n}")
    if z.dim != 4 * n - 2:
        raise StructuralError(f"zigzag dimension {z.dim} != {4 * n - 2}")
    return z


def zigzag_trace(z: DgAlgebra):
    """The symmetric trace: 1 on loops (paths of length 2), 0 elsewhere."""
    f = z.field
    tr = [f.one() if lbl.count("|") == 2 else f.zero() for lbl in z.space.labels]

    def trace(vec):
        s = f.zero()
        for c, t in zip(vec, tr):
            if not f.is_zero(c) and not f.is_zero(t):
                s = f.add(s, f.mul(c, t))
        return s

    return trace


class ZigzagAmbient:
    """Generator 1-morphisms over a zigzag algebra: Z and R_i = Ze_i (x) e_iZ.

    Carries the multiplication maps R_i -> Z and the derived trace-form
    coevaluations Z -> R_i, both verified on construction.
    """

    def __init__(self, z: DgAlgebra):
        self.algebra = z
        self.identity = regular_bimodule(z)
        self.trace = zigzag_trace(z)
        self._ze = {}
        self._ez = {}
        self._r = {}
        self._mult = {}
        self._coev = {}

    @property
    def n(self):
        return (self.algebra.dim + 2) // 4

    def _truncation_indices(self, i, side):
        z = self.algebra
        e = z.idempotents[i - 1]
        out = []
        for j in range(z.dim):
            b = z.basis_vector(j)
            v = z.mul_vec(b, e) if side == "right" else z.mul_vec(e, b)
            if v == b:
                out.append(j)
            elif any(not z.field.is_zero(c) for c in v):
                raise StructuralError("idempotent does not split the basis")
        return out

    def Ze(self, i):
        """Z e_i as a (Z, k)-bimodule, with its algebra-element indices."""
        if i not in self._ze:
            idx = self._truncation_indices(i, "right")
            piece = submodule_from_indices(left_regular(self.algebra), idx,
                                           name=f"Ze{i}")
            self._ze[i] = (piece, idx)
        return self._ze[i]

    def eZ(self, i):
        """e_i Z as a (k, Z)-bimodule, with its algebra-element indices."""
        if i not in self._ez:
            idx = self._truncation_indices(i, "left")
            piece = submodule_from_indices(right_regular(self.algebra), idx,
                                           name=f"e{i}Z")
            self._ez[i] = (piece, idx)
        return self._ez[i]

    def R(self, i) -> DgBimodule:
        if i not in self._r:
            self._r[i] = tensor_over_k(self.Ze(i)[0], self.eZ(i)[0], name=f"R{i}")
        return self._r[i]

    def mult_map(self, i) -> BimoduleMap:
        """Multiplication Z e_i (x) e_i Z -> Z."""
        if i in self._mult:
            return self._mult[i]
        z = self.algebra
        f = z.field
        r = self.R(i)
        _, zidx = self.Ze(i)
        _, eidx = self.eZ(i)
        mat = Matrix.zero(f, z.dim, r.dim)
        for a, ja in enumerate(zidx):
            for b, jb in enumerate(eidx):
                prod = z.mul_basis(ja, jb)
                col = a * len(eidx) + b
                for k, c in prod.items():
                    mat.data[k][col] = f.add(mat.data[k][col], c)
        bm = BimoduleMap(r, self.identity, 0, mat)
        if not (bm.is_bimodule_map() and bm.is_closed()):
            raise StructuralError("multiplication map failed verification")
        self._mult[i] = bm
        return bm

    def _dual_basis(self, i):
        """Dual basis of e_iZ against Ze_i under the trace pairing.

        Returns, per basis element p_a of Ze_i, the vector of q^a over the
        e_iZ basis with trace(p_a q^b) = delta.  Verifies nondegeneracy
        and the two reproducing identities.
        """
        z = self.algebra
        f = z.field
        _, zidx = self.Ze(i)
        _, eidx = self.eZ(i)
        gram = Matrix.zero(f, len(zidx), len(eidx))
        for a, ja in enumerate(zidx):
            for b, jb in enumerate(eidx):
                prod = [f.zero()] * z.dim
                for k, c in z.mul_basis(ja, jb).items():
                    prod[k] = c
                gram.data[a][b] = self.trace(prod)
        ginv = invert(gram)
        if ginv is None:
            raise StructuralError("trace pairing is degenerate; no dual basis")
        duals = [ginv.col(a) for a in range(len(zidx))]  # q^a over e_iZ basis

        # reproducing identities on both sides
        for a, ja in enumerate(zidx):
            for ap in range(len(zidx)):
                # trace(q^a . p_ap) should be delta_{a, ap} (trace symmetry)
                s = f.zero()
                for b, jb in enumerate(eidx):
                    prod = [f.zero()] * z.dim
                    for k, c in z.mul_basis(jb, zidx[ap]).items():
                        prod[k] = c
                    s = f.add(s, f.mul(duals[a][b], self.trace(prod)))
                want = f.one() if a == ap else f.zero()
                if not f.is_zero(f.sub(s, want)):
                    raise StructuralError("dual basis fails the symmetric reproducing identity")
        return duals

    def coev_map(self, i) -> BimoduleMap:
        """Coevaluation Z -> Ze_i (x) e_iZ, z -> sum z p_a (x) q^a."""
        if i in self._coev:
            return self._coev[i]
        z = self.algebra
        f = z.field
        r = self.R(i)
        _, zidx = self.Ze(i)
        _, eidx = self.eZ(i)
        duals = self._dual_basis(i)
        pos_in_ze = {j: a for a, j in enumerate(zidx)}
        mat = Matrix.zero(f, r.dim, z.dim)
        for j in range(z.dim):
            for a, ja in enumerate(zidx):
                prod = z.mul_basis(j, ja)  # z b_j * p_a in Z, lands in Ze_i
                for k, c in prod.items():
                    if k not in pos_in_ze:
                        raise StructuralError("left multiple left the truncation")
                    ap = pos_in_ze[k]
                    for b, qc in enumerate(duals[a]):
                        if f.is_zero(qc):
                            continue
                        row = ap * len(eidx) + b
                        mat.data[row][j] = f.add(mat.data[row][j], f.mul(c, qc))
        bm = BimoduleMap(self.identity, r, 0, mat)
        if not (bm.is_bimodule_map() and bm.is_closed()):
            raise StructuralError("coevaluation failed bimodule verification")
        self._coev[i] = bm
        return bm

    # -- braid complexes ------------------------------------------------

    def positive_generator(self, i) -> TwistedComplex:
        """T_i: Z in position 0, Ze_i (x) e_iZ in position <1>."""
        m = self.mult_map(i)
        f = TwistedMorphism(one_term(self.R(i)), one_term(self.identity), 0,
                            {(0, 0): m.matrix})
        return cone(f).complex

    def negative_generator(self, i) -> TwistedComplex:
        """T_i': the coevaluation complex, shifted to be degree-balanced."""
        c = self.coev_map(i)
        f = TwistedMorphism(one_term(self.identity), one_term(self.R(i)), 0,
                            {(0, 0): c.matrix})
        return shift_twisted(cone(f).complex, -1)

    def ks_complex(self, word: BraidWord) -> TwistedComplex:
        """The Khovanov-Seidel complex of a braid word, by composition."""
        if word.n != self.n:
            raise StructuralError("braid word over the wrong zigzag algebra")
        out = identity_complex(self.identity)
        for letter in word.letters:
            t = self.positive_generator(letter) if letter > 0 \
                else self.negative_generator(-letter)
            out = compose(out, t)
        return out


_AMBIENTS = {}


def zigzag_ambient(n, field=None) -> ZigzagAmbient:
    from .field import QQ
    field = field or QQ
    key = (n, str(field))
    if key not in _AMBIENTS:
        _AMBIENTS[key] = ZigzagAmbient(zigzag(n, field=field))
    return _AMBIENTS[key]


def ks_complex(word: BraidWord, n=None, field=None) -> TwistedComplex:
    amb = zigzag_ambient(n or word.n, field=field)
    return amb.ks_complex(word)


# -- the Gaussian-integer quotient data ---------------------------------


def tian_quotient(field=None):
    """(R', M'): R' = k e_x x k e_y and M' = k e_y(x)e_x + k e_x(x)e_y<1>.

    M' o_{R'} M' is R'<1>, categorifying i^2 = -1 on the level of the
    quotient data.
    """
    from .field import QQ
    field = field or QQ
    f = field
    one = f.one()
    rspace = GradedSpace(field, [("e_x", 0), ("e_y", 0)])
    rp = DgAlgebra("R'", rspace, [one, one],
                   {(0, 0): {0: one}, (1, 1): {1: one}},
                   Matrix.zero(field, 2, 2),
                   idempotents=[[one, f.zero()], [f.zero(), one]])
    space = GradedSpace(field, [("ey⊗ex", 0), ("ex⊗ey", -1)])
    # left action: e_x fixes w = ex(x)ey, e_y fixes u = ey(x)ex
    left = {(0, 1): {1: f.one()}, (1, 0): {0: f.one()}}
    # right action: u.e_x = u, w.e_y = w
    right = {(0, 0): {0: f.one()}, (1, 1): {1: f.one()}}
    mp = DgBimodule("M'", rp, rp, space, left, right, Matrix.zero(field, 2, 2))
    return rp, mp


def tian_defining_rep(field=None, budget=6):
    """Probe data for the defining 2-representation of the quotient example:
    the 2-category generated by the identity and M' acting on its own
    1-morphisms.

    The weight-component 2-morphisms of the identity 1-morphism generate a
    proper nonzero dg ideal (the M'-action and all compositions preserve
    idempotent weights), witnessing that the action is not
    quotient-simple on these probes.
    """
    from .field import QQ
    from .twocat import RepData
    field = field or QQ
    rp, mp = tian_quotient(field)
    return RepData("Z[i] defining action", [regular_bimodule(rp), mp], [mp],
                   budget=budget)


# -- matrix dg algebras ---------------------------------------------------


def matrix_dg_algebra(space: GradedSpace, diff: Matrix, name=None) -> DgAlgebra:
    """End(V) = V* (x) V for a nonzero dg space V, via the evaluation pairing.

    Basis E_{i,j} (v_j -> v_i), composition product, commutator
    differential; dim = (dim V)^2.
    """
    if space.dim == 0:
        raise StructuralError("matrix_dg_algebra needs a nonzero space")
    f = space.field
    n = space.dim
    from .graded import DgSpace
    DgSpace(space, diff)  # validates d^2 = 0, degree +1
    basis = []
    for i in range(n):
        for j in range(n):
            basis.append((f"E{i},{j}", space.degrees[i] - space.degrees[j]))
    aspace = GradedSpace(f, basis)

    def flat(i, j):
        return i * n + j

    mult = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                # E_{i,j} E_{j,k} = E_{i,k}
                mult[(flat(i, j), flat(j, k))] = {flat(i, k): f.one()}
    unit = [f.zero()] * (n * n)
    for i in range(n):
        unit[flat(i, i)] = f.one()
    dmat = Matrix.zero(f, n * n, n * n)
    for i in range(n):
        for j in range(n):
            deg = space.degrees[i] - space.degrees[j]
            sign = f.one() if deg % 2 == 0 else f.neg(f.one())
            # d(E_{i,j}) = sum_k d_{k,i} E_{k,j} - (-1)^{|E|} sum_k d_{j,k} E_{i,k}
            for k in range(n):
                c = diff[k, i]
                if not f.is_zero(c):
                    dmat.data[flat(k, j)][flat(i, j)] = f.add(
                        dmat.data[flat(k, j)][flat(i, j)], c)
                c = diff[j, k]
                if not f.is_zero(c):
                    dmat.data[flat(i, k)][flat(i, j)] = f.sub(
                        dmat.data[flat(i, k)][flat(i, j)], f.mul(sign, c))
    return DgAlgebra(name or f"End(V{n})", aspace, unit, mult, dmat)


def matrix_algebra_module(alg: DgAlgebra, space: GradedSpace, diff: Matrix):
    """V as a left module over End(V), carrier a (End(V), k)-bimodule."""
    f = space.field
    n = space.dim
    k = ground(f)
    left = {}
    for i in range(n):
        for j in range(n):
            left[(i * n + j, j)] = {i: f.one()}
    right = {(0, j): {j: f.one()} for j in range(n)}
    return DgBimodule("V", alg, k, space, left, right, diff)


def matrix_morita_data(ca, i, space: GradedSpace, diff: Matrix):
    """Full Morita data over C_k: (A = End(V), 1, X = V, Y = V*).

    X carries the matrix action of A on the left; Y = V* the dual action
    on the right; both verified as bimodule 1-morphisms by the caller.
    """
    from .twocat import (AlgebraOneMorphism, BimoduleOneMorphism,
                         algebra_1mor_over_ground, trivial_algebra_1mor)
    from .words import merge_iso, realize
    f = space.field
    n = space.dim
    kk = ca.factors[i]
    endv = matrix_dg_algebra(space, diff)
    A = algebra_1mor_over_ground(ca, i, endv, name="V*⊗V")
    one = trivial_algebra_1mor(ca, i)
    carA = A.carrier
    left = {(0, j): {j: f.one()} for j in range(n)}
    right = {(0, j): {j: f.one()} for j in range(n)}
    V = DgBimodule("V", kk, kk, space, left, right, diff)
    rw = realize(((carA, 0), (V, 0)))
    lam = Matrix.zero(f, n, rw.module.dim)
    for col in range(rw.module.dim):
        for flat, cc in enumerate(rw.sigma.col(col)):
            if f.is_zero(cc):
                continue
            e, j = divmod(flat, n)
            i2, j2 = divmod(e, n)
            if j2 == j:
                lam.data[i2][col] = f.add(lam.data[i2][col], cc)
    lamX = BimoduleMap(rw.module, V, 0, lam)
    _, iso_vk = merge_iso(((V, 0), (one.carrier, 0)))
    rhoX = BimoduleMap(realize(((V, 0), (one.carrier, 0))).module, V, 0, iso_vk)
    X = BimoduleOneMorphism(A, one, V, lamX, rhoX, name="V")

    from .bimodule import dual_bimodule
    Vd = dual_bimodule(V)
    _, iso_kv = merge_iso(((one.carrier, 0), (Vd, 0)))
    lamY = BimoduleMap(realize(((one.carrier, 0), (Vd, 0))).module, Vd, 0, iso_kv)
    rwd = realize(((Vd, 0), (carA, 0)))
    rho = Matrix.zero(f, n, rwd.module.dim)
    for col in range(rwd.module.dim):
        for flat, cc in enumerate(rwd.sigma.col(col)):
            if f.is_zero(cc):
                continue
            k3, e = divmod(flat, n * n)
            i2, j2 = divmod(e, n)
            if k3 == i2:
                rho.data[j2][col] = f.add(rho.data[j2][col], cc)
    rhoY = BimoduleMap(rwd.module, Vd, 0, rho)
    Y = BimoduleOneMorphism(one, A, Vd, lamY, rhoY, name="V*")
    return A, one, X, Y

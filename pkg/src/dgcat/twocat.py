"""The concrete dg 2-category built from a finite product of dg algebras,
its natural 2-representation, internal endomorphism algebra 1-morphisms,
module categories, Morita verification and dg-ideal closure probes.

Objects are the factors A_1 .. A_n; 1-morphisms between i and j are
bimodules in the thick closure of A_j (x)_k A_i (plus the identity when
i = j); module objects over A_i are (A_i, k)-bimodules.  The internal
hom [x, y] is computed concretely as y (x)_k x* and representability is
verified against the probe generators afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import AlgebraReport, DgAlgebra, StructuralError
from .bimodule import (
    BimoduleMap, DgBimodule, cokernel, dual_bimodule, ground, hom_complex,
    left_regular, regular_bimodule, right_regular, tensor_over_algebra,
    tensor_over_k,
)
from .linalg import Matrix, invert, kernel_basis
from .twisted import (
    TwistedComplex, TwistedMorphism, _eq_morphism, compose, hcompose_left,
    hcompose_right, identity_complex, one_term, twisted_hom_complex,
)
from .words import apply_prefix, apply_suffix, merge_iso, realize


class TwoCategoryCA:
    """C_A for A = A_1 x ... x A_n; generators F_{j,i} = A_j (x)_k A_i."""

    def __init__(self, factors):
        self.factors = list(factors)
        field = self.factors[0].field
        if any(str(a.field) != str(field) for a in self.factors):
            raise StructuralError("all factors must share the field")
        self._identity = {}
        self._gen = {}
        self._free = {}

    @property
    def field(self):
        return self.factors[0].field

    def identity_bimodule(self, i) -> DgBimodule:
        if i not in self._identity:
            self._identity[i] = regular_bimodule(self.factors[i])
        return self._identity[i]

    def generator(self, j, i) -> DgBimodule:
        """F_{j,i} = A_j (x)_k A_i, an (A_j, A_i)-bimodule."""
        if (j, i) not in self._gen:
            aj, ai = self.factors[j], self.factors[i]
            self._gen[(j, i)] = tensor_over_k(
                left_regular(aj), right_regular(ai), name=f"F({aj.name},{ai.name})")
        return self._gen[(j, i)]

    def free_module(self, i) -> DgBimodule:
        """The regular module A_i as an object of the natural 2-representation."""
        if i not in self._free:
            self._free[i] = left_regular(self.factors[i], name=f"{self.factors[i].name}reg")
        return self._free[i]

    def probe_generators(self, i, j):
        gens = [self.generator(j, i)]
        if i == j:
            gens.append(self.identity_bimodule(i))
        return gens


def evaluation(f, x):
    """Ev_x(f) = M(f) x, realized by the relative tensor product."""
    if isinstance(f, TwistedComplex):
        xc = x if isinstance(x, TwistedComplex) else one_term(x)
        return compose(f, xc)
    if isinstance(x, TwistedComplex):
        return compose(one_term(f), x)
    return tensor_over_algebra(f, x)


# -- internal hom -------------------------------------------------------


class InternalHom:
    """[x, y] = y (x)_k x* with its verified evaluation 2-morphism.

    curry / uncurry realize the adjunction Hom(Ev_x(G), y) = Hom(G, [x,y])
    explicitly for any 1-morphism word G.
    """

    def __init__(self, x: DgBimodule, y: DgBimodule, name=None):
        self.x = x
        self.y = y
        self.carrier = tensor_over_k(y, dual_bimodule(x),
                                     name=name or f"[{x.name},{y.name}]")
        self.ev = self._build_ev()

    def _build_ev(self) -> BimoduleMap:
        f = self.x.field
        x, y, H = self.x, self.y, self.carrier
        rw = realize(((H, 0), (x, 0)))
        # tuple-level evaluation: (y_b (x) xi_c) (x) v_d -> delta_{c,d} y_b
        ev_t = Matrix.zero(f, y.dim, H.dim * x.dim)
        for b in range(y.dim):
            for c in range(x.dim):
                col = (b * x.dim + c) * x.dim + c
                ev_t.data[b][col] = f.one()
        # well-definedness on the quotient: ev_t must agree through sigma.pi
        if not (ev_t * rw.sigma * rw.pi == ev_t):
            raise StructuralError("evaluation is not balanced over the algebra")
        ev = BimoduleMap(rw.module, y, 0, ev_t * rw.sigma)
        if not (ev.is_bimodule_map() and ev.is_closed()):
            raise StructuralError("evaluation failed bimodule verification")
        return ev

    def uncurry(self, word_g, psi: Matrix) -> BimoduleMap:
        """psi: realize(word_g) -> [x,y]  gives  Ev_x(word_g) -> y."""
        pre = apply_prefix(word_g, ((self.carrier, 0),), ((self.x, 0),), psi)
        src = realize(tuple(word_g) + ((self.x, 0),)).module
        return BimoduleMap(src, self.y, _matrix_degree(psi, realize(word_g).module,
                                                       self.carrier),
                           self.ev.matrix * pre)

    def curry(self, word_g, phi: BimoduleMap) -> BimoduleMap:
        """phi: realize(word_g ++ (x,)) -> y  gives  realize(word_g) -> [x,y]."""
        f = self.x.field
        rG = realize(tuple(word_g))
        G = rG.module
        rw = realize(tuple(word_g) + ((self.x, 0),))
        out = Matrix.zero(f, self.carrier.dim, G.dim)
        xd = self.x.dim
        for a in range(G.dim):
            for tpos, gc in rG.sigma_cols[a]:
                for c in range(xd):
                    pcol = rw.pi_cols[tpos * xd + c]
                    if pcol is None:
                        continue
                    for q, w in pcol:
                        gw = f.mul(gc, w)
                        for b in range(self.y.dim):
                            v = phi.matrix[b, q]
                            if not f.is_zero(v):
                                row = b * xd + c
                                out.data[row][a] = f.add(out.data[row][a],
                                                         f.mul(gw, v))
        return BimoduleMap(G, self.carrier, phi.degree, out)

    def verify_representability(self, word_g) -> bool:
        """The adjunction map is a degreewise bijective chain map for this probe."""
        G = realize(tuple(word_g)).module
        gx = realize(tuple(word_g) + ((self.x, 0),)).module
        h_left = hom_complex(gx, self.y)
        h_right = hom_complex(G, self.carrier)
        if h_left.dim != h_right.dim:
            return False
        f = self.x.field
        theta = Matrix.zero(f, h_left.dim, h_right.dim)
        for t in range(h_right.dim):
            deg, mat = h_right.entries[t]
            img = self.uncurry(word_g, mat)
            coefs = h_left.coords(img)
            for s, c in enumerate(coefs):
                theta.data[s][t] = c
        if invert(theta) is None:
            return False
        # chain map against the two Hom differentials
        return theta * h_right.diff == h_left.diff * theta


def _matrix_degree(mat: Matrix, src: DgBimodule, tgt: DgBimodule):
    f = src.field
    for j in range(src.dim):
        for i in range(tgt.dim):
            if not f.is_zero(mat[i, j]):
                return tgt.space.degrees[i] - src.space.degrees[j]
    return 0


def internal_hom(ca: TwoCategoryCA, i, j, x: DgBimodule, y: DgBimodule) -> InternalHom:
    """[x, y] for modules x over A_i, y over A_j, with representability checks."""
    ih = InternalHom(x, y)
    for g in ca.probe_generators(i, j):
        if not ih.verify_representability(((g, 0),)):
            raise StructuralError(
                f"representability failed at probe generator {g.name}")
    return ih


# -- algebra and module 1-morphisms --------------------------------------


class AlgebraOneMorphism:
    """A 1-morphism A in C(i,i) with closed degree-0 unit and multiplication.

    unit: identity bimodule -> A;  mult: realize((A, A)) -> A.
    """

    def __init__(self, ca, i, carrier: DgBimodule, unit: BimoduleMap,
                 mult: BimoduleMap, name=None):
        self.ca = ca
        self.i = i
        self.carrier = carrier
        self.unit = unit
        self.mult = mult
        self.name = name or carrier.name

    def check(self) -> AlgebraReport:
        violations = []
        c = self.carrier
        ident = self.ca.identity_bimodule(self.i)
        if self.unit.degree != 0 or not self.unit.is_closed():
            violations.append(("unit-closed-degree0", ()))
        if self.mult.degree != 0 or not self.mult.is_closed():
            violations.append(("mult-closed-degree0", ()))
        w = ((c, 0),)
        m = self.mult.matrix
        # associativity on realize((A, A, A))
        m_left = apply_prefix(w + w, w, w, m)     # (AA)A -> AA
        m_right = apply_suffix(w, w + w, w, m, 0)  # A(AA) -> AA
        if not (m * m_left == m * m_right):
            violations.append(("associativity", ()))
        # unit laws through the identity-merge isos
        u = self.unit.matrix
        left_u = apply_prefix(((ident, 0),), w, w, u)   # realize(1,A) -> realize(A,A)
        _, iso_l = merge_iso(((ident, 0),) + w)
        lu = m * left_u * invert(iso_l)
        if not (lu == Matrix.identity(c.field, c.dim)):
            violations.append(("left-unit", ()))
        right_u = apply_suffix(w, ((ident, 0),), w, u, 0)
        _, iso_r = merge_iso(w + ((ident, 0),))
        ru = m * right_u * invert(iso_r)
        if not (ru == Matrix.identity(c.field, c.dim)):
            violations.append(("right-unit", ()))
        return AlgebraReport(passed=not violations, violations=violations)


def trivial_algebra_1mor(ca: TwoCategoryCA, i) -> AlgebraOneMorphism:
    """The identity bimodule with its regular algebra structure."""
    ident = ca.identity_bimodule(i)
    f = ca.field
    unit = BimoduleMap.identity(ident)
    rw = realize(((ident, 0), (ident, 0)))
    _, iso = merge_iso(((ident, 0), (ident, 0)))
    mult = BimoduleMap(rw.module, ident, 0, iso)
    return AlgebraOneMorphism(ca, i, ident, unit, mult, name=f"1_{i}")


def algebra_1mor_over_ground(ca: TwoCategoryCA, i, alg: DgAlgebra,
                             name=None) -> AlgebraOneMorphism:
    """A finite-dimensional dg algebra as an algebra 1-morphism over C_k.

    Only valid when the object i is the ground field: the carrier is the
    underlying complex of alg with trivial outer actions, and unit/mult
    come from the algebra structure.
    """
    kk = ca.factors[i]
    if kk.dim != 1:
        raise StructuralError("algebra_1mor_over_ground needs the ground-field object")
    f = alg.field
    left = {(0, j): {j: f.one()} for j in range(alg.dim)}
    right = {(0, j): {j: f.one()} for j in range(alg.dim)}
    car = DgBimodule(name or alg.name, kk, kk, alg.space, left, right, alg.diff)
    u = Matrix.zero(f, car.dim, 1)
    for t, c in enumerate(alg.unit):
        u.data[t][0] = c
    unit = BimoduleMap(ca.identity_bimodule(i), car, 0, u)
    rw = realize(((car, 0), (car, 0)))
    m = Matrix.zero(f, car.dim, rw.module.dim)
    for col in range(rw.module.dim):
        tup = rw.sigma.col(col)
        out = [f.zero()] * car.dim
        for flat, cc in enumerate(tup):
            if f.is_zero(cc):
                continue
            a, b = divmod(flat, car.dim)
            for t, c2 in alg.mul_basis(a, b).items():
                out[t] = f.add(out[t], f.mul(cc, c2))
        for r, v in enumerate(out):
            m.data[r][col] = v
    mult = BimoduleMap(rw.module, car, 0, m)
    out = AlgebraOneMorphism(ca, i, car, unit, mult, name=name or alg.name)
    rep = out.check()
    if not rep.passed:
        raise StructuralError(f"algebra 1-morphism failed axioms: {rep.violations}")
    return out


def internal_end_algebra(ca: TwoCategoryCA, i, x: DgBimodule) -> AlgebraOneMorphism:
    """A_X = [x, x] with unit and multiplication transported through the
    explicit adjunction (no formula is assumed)."""
    ih = internal_hom(ca, i, i, x, x)
    A = ih.carrier
    ident = ca.identity_bimodule(i)
    # unit: adjunct of the canonical iso Ev_x(1) -> x
    _, phi_u = merge_iso(((ident, 0), (x, 0)))
    src_u = realize(((ident, 0), (x, 0))).module
    unit = ih.curry(((ident, 0),), BimoduleMap(src_u, x, 0, phi_u))
    # multiplication: adjunct of ev o (id_A o_0 ev) on realize((A, A, x))
    w = ((A, 0),)
    inner = apply_suffix(w, w + ((x, 0),), ((x, 0),), ih.ev.matrix, 0)
    src_m = realize(w + w + ((x, 0),)).module
    ev2 = BimoduleMap(src_m, x, 0, ih.ev.matrix * inner)
    mult = ih.curry(w + w, ev2)
    out = AlgebraOneMorphism(ca, i, A, unit, mult, name=f"A_[{x.name}]")
    rep = out.check()
    if not rep.passed:
        raise StructuralError(f"internal end algebra failed axioms: {rep.violations}")
    out.internal_hom = ih
    return out


class ModuleOneMorphism:
    """A right module over an algebra 1-morphism: twisted-complex carrier
    plus a closed degree-0 action rho: Y o A -> Y."""

    def __init__(self, algebra: AlgebraOneMorphism, carrier: TwistedComplex,
                 rho: TwistedMorphism, name=None):
        self.algebra = algebra
        self.carrier = carrier
        self.rho = rho
        self.name = name or f"mod({carrier!r})"

    def check(self) -> AlgebraReport:
        violations = []
        A = self.algebra
        a_term = one_term(A.carrier)
        if self.rho.degree != 0 or not self.rho.is_closed():
            violations.append(("rho-closed-degree0", ()))
        # associativity: rho o (rho o_0 id_A) = rho o (id_Y o_0 m)
        lhs = self.rho.compose(hcompose_left(self.rho, a_term))
        m_tw = TwistedMorphism(compose(a_term, a_term), a_term, 0,
                               {(0, 0): A.mult.matrix})
        rhs = self.rho.compose(hcompose_right(self.carrier, m_tw))
        if not _eq_morphism(lhs, rhs):
            violations.append(("rho-associativity", ()))
        # unitality: rho o (id_Y o_0 u) = id (Y o 1 is strictly Y)
        ident_term = identity_complex(self.algebra.ca.identity_bimodule(self.algebra.i))
        u_tw = TwistedMorphism(ident_term, a_term, 0, {(0, 0): A.unit.matrix})
        unit_comp = self.rho.compose(hcompose_right(self.carrier, u_tw))
        if not _eq_morphism(unit_comp, TwistedMorphism.identity(self.carrier)):
            violations.append(("rho-unitality", ()))
        return AlgebraReport(passed=not violations, violations=violations)


def free_module(algebra: AlgebraOneMorphism, g: TwistedComplex) -> ModuleOneMorphism:
    """g A with the action induced by the multiplication."""
    a_term = one_term(algebra.carrier)
    carrier = compose(g, a_term)
    m_tw = TwistedMorphism(compose(a_term, a_term), a_term, 0,
                           {(0, 0): algebra.mult.matrix})
    rho = hcompose_right(g, m_tw)
    return ModuleOneMorphism(algebra, carrier, rho, name=f"({g!r}){algebra.name}")


def module_category_objects(ca: TwoCategoryCA, algebra: AlgebraOneMorphism, j,
                            budget=8):
    """Free-module generators of the module category at object j."""
    i = algebra.i
    gens = [one_term(ca.generator(j, i))]
    if i == j:
        gens.insert(0, identity_complex(ca.identity_bimodule(i)))
    out = []
    for g in gens[:budget]:
        out.append(free_module(algebra, g))
    return out


def cone_module(f: TwistedMorphism, src: ModuleOneMorphism,
                tgt: ModuleOneMorphism) -> ModuleOneMorphism:
    """The cone of a closed degree-0 map of modules, with blockwise action."""
    from .twisted import cone as _cone
    if not _eq_morphism(f.compose(src.rho),
                        tgt.rho.compose(hcompose_left(f, one_term(src.algebra.carrier)))):
        raise StructuralError("not a module map")
    cd = _cone(f)
    C = cd.complex
    A = src.algebra
    a_term = one_term(A.carrier)
    CA = compose(C, a_term)
    # CA summand (i, 0) sits at position i since the algebra term is 1-summand
    off = tgt.carrier.n_summands
    comps = {}
    for (n, m), mat in tgt.rho.components.items():
        comps[(n, m)] = mat
    for (n, m), mat in src.rho.components.items():
        comps[(n + off, m + off)] = mat
    rho = TwistedMorphism(CA, C, 0, comps)
    mod = ModuleOneMorphism(A, C, rho, name="cone-module")
    rep = mod.check()
    if not rep.passed:
        raise StructuralError(f"cone module failed axioms: {rep.violations}")
    return mod


class AlgebraMap:
    """A 2-morphism of algebra 1-morphisms, checked against unit and mult."""

    def __init__(self, source: AlgebraOneMorphism, target: AlgebraOneMorphism,
                 matrix: Matrix):
        self.source = source
        self.target = target
        self.map = BimoduleMap(source.carrier, target.carrier, 0, matrix)
        if not (self.map.is_closed() and self.map.is_bimodule_map()):
            raise StructuralError("algebra map must be a closed degree-0 2-morphism")
        # unit compatibility
        if not (matrix * source.unit.matrix == target.unit.matrix):
            raise StructuralError("algebra map does not respect the unit")
        # multiplication compatibility: alpha o m_A = m_B o (alpha o_0 alpha)
        wA = ((source.carrier, 0),)
        wB = ((target.carrier, 0),)
        step1 = apply_prefix(wA, wB, wA, matrix)
        step2 = apply_suffix(wB, wA, wB, matrix, 0)
        lhs = matrix * source.mult.matrix
        rhs = target.mult.matrix * (step2 * step1)
        if not (lhs == rhs):
            raise StructuralError("algebra map does not respect multiplication")


def pushforward_algebra_map(alpha: AlgebraMap, module: ModuleOneMorphism
                            ) -> ModuleOneMorphism:
    """Push a right A-module forward along alpha: A -> B to m o_A B.

    Restricted to 1-term module carriers; the result is again 1-term.
    """
    A = alpha.source
    B = alpha.target
    if module.carrier.n_summands != 1 or module.carrier.alpha:
        raise StructuralError("pushforward implemented for 1-term carriers")
    mword = module.carrier.words[0]
    M = realize(mword).module
    rhoM = module.rho.component(0, 0)  # realize(mword + A) -> M
    wB = ((B.carrier, 0),)
    wA = ((A.carrier, 0),)
    # lambda_B: A o B -> B through alpha then multiplication
    lamB = B.mult.matrix * apply_prefix(wA, wB, wB, alpha.map.matrix)
    # kappa: M A B -> M B
    k1 = apply_prefix(mword + wA, mword, wB, rhoM)
    k2 = apply_suffix(mword, wA + wB, wB, lamB, 0)
    src = realize(mword + wA + wB).module
    tgt = realize(mword + wB).module
    kappa = BimoduleMap(src, tgt, 0, k1 - k2)
    Q, proj = cokernel(kappa, name=f"{module.name}∘B")
    # induced right B-action on Q via a linear section of the projection
    sect = _section_of(proj.matrix)
    rhoQB_top = proj.matrix * apply_suffix(mword, wB + wB, wB, B.mult.matrix, 0)
    # realize(mword + (B,B)) -> Q ; precompose with section (x) id_B
    lift = _tensor_section_left(sect, mword, wB, Q)
    rho_mat = rhoQB_top * lift
    qc = one_term(Q)
    rw = realize(((Q, 0), (B.carrier, 0)))
    rho = TwistedMorphism(compose(qc, one_term(B.carrier)), qc, 0,
                          {(0, 0): rho_mat})
    out = ModuleOneMorphism(B, qc, rho, name=f"{module.name}∘{B.name}")
    rep = out.check()
    if not rep.passed:
        raise StructuralError(f"pushforward module failed axioms: {rep.violations}")
    return out


def _section_of(proj: Matrix):
    """A right inverse of a surjective matrix (echelon choice)."""
    from .linalg import solve_many
    sect = solve_many(proj, Matrix.identity(proj.field, proj.rows))
    if sect is None:
        raise StructuralError("projection is not surjective")
    return sect


def _tensor_section_left(sect: Matrix, mword, wB, Q: DgBimodule):
    """realize((Q ,) + wB) -> realize(mword + wB + wB)-style lift.

    sect: Q -> realize(mword + wB).module; returns the matrix of
    (sect o_0 id_B) from realize((Q,) + wB) to realize(mword + wB + wB).
    """
    return apply_prefix(((Q, 0),), tuple(mword) + tuple(wB), tuple(wB), sect)


# -- bimodule 1-morphisms and Morita verification -------------------------


class BimoduleOneMorphism:
    """An A-B-bimodule 1-morphism: carrier with commuting internal actions."""

    def __init__(self, left: AlgebraOneMorphism, right: AlgebraOneMorphism,
                 carrier: DgBimodule, lam: BimoduleMap, rho: BimoduleMap,
                 name=None):
        self.left = left
        self.right = right
        self.carrier = carrier
        self.lam = lam    # realize((A, X)) -> X
        self.rho = rho    # realize((X, B)) -> X
        self.name = name or carrier.name

    def check(self) -> AlgebraReport:
        violations = []
        A, B, X = self.left, self.right, self.carrier
        wA = ((A.carrier, 0),)
        wB = ((B.carrier, 0),)
        wX = ((X, 0),)
        f = X.field
        for bm, tag in ((self.lam, "lambda"), (self.rho, "rho")):
            if bm.degree != 0 or not bm.is_closed():
                violations.append((f"{tag}-closed-degree0", ()))
        # lambda associativity on realize((A,A,X))
        lhs = self.lam.matrix * apply_prefix(wA + wA, wA, wX, A.mult.matrix)
        rhs = self.lam.matrix * apply_suffix(wA, wA + wX, wX, self.lam.matrix, 0)
        if not (lhs == rhs):
            violations.append(("lambda-associative", ()))
        # rho associativity on realize((X,B,B))
        lhs = self.rho.matrix * apply_prefix(wX + wB, wX, wB, self.rho.matrix)
        rhs = self.rho.matrix * apply_suffix(wX, wB + wB, wB, B.mult.matrix, 0)
        if not (lhs == rhs):
            violations.append(("rho-associative", ()))
        # unit laws
        identA = A.ca.identity_bimodule(A.i)
        _, isoA = merge_iso(((identA, 0),) + wX)
        lu = self.lam.matrix * apply_prefix(((identA, 0),), wA, wX, A.unit.matrix) * invert(isoA)
        if not (lu == Matrix.identity(f, X.dim)):
            violations.append(("lambda-unital", ()))
        identB = B.ca.identity_bimodule(B.i)
        _, isoB = merge_iso(wX + ((identB, 0),))
        ru = self.rho.matrix * apply_suffix(wX, ((identB, 0),), wB, B.unit.matrix, 0) * invert(isoB)
        if not (ru == Matrix.identity(f, X.dim)):
            violations.append(("rho-unital", ()))
        # actions commute on realize((A,X,B))
        left_then_right = self.rho.matrix * apply_prefix(wA + wX, wX, wB, self.lam.matrix)
        right_then_left = self.lam.matrix * apply_suffix(wA, wX + wB, wX, self.rho.matrix, 0)
        if not (left_then_right == right_then_left):
            violations.append(("actions-commute", ()))
        return AlgebraReport(passed=not violations, violations=violations)


def relative_tensor_1mor(x: BimoduleOneMorphism, y: BimoduleOneMorphism):
    """x o_B y for an A-B- and a B-C-bimodule 1-morphism.

    Returns (Q, lamQ, rhoQ, proj) with the induced internal actions.
    """
    if x.right is not y.left:
        raise StructuralError("middle algebra 1-morphisms differ")
    A, B, C = x.left, x.right, y.right
    X, Y = x.carrier, y.carrier
    wX, wY = ((X, 0),), ((Y, 0),)
    wB = ((B.carrier, 0),)
    k1 = apply_prefix(wX + wB, wX, wY, x.rho.matrix)
    k2 = apply_suffix(wX, wB + wY, wY, y.lam.matrix, 0)
    src = realize(wX + wB + wY).module
    tgt = realize(wX + wY).module
    kappa = BimoduleMap(src, tgt, 0, k1 - k2)
    Q, proj = cokernel(kappa, name=f"{x.name}∘{y.name}")
    sect = _section_of(proj.matrix)
    # induced actions through the section
    wQ = ((Q, 0),)
    wA = ((A.carrier, 0),)
    wC = ((C.carrier, 0),)
    # lambda on realize((A, Q)): lift to realize((A, X, Y)), act, project
    lift_l = apply_suffix(wA, wQ, wX + wY, sect, 0)
    act_l = apply_prefix(wA + wX, wX, wY, x.lam.matrix)
    lamQ = BimoduleMap(realize(wA + wQ).module, Q, 0, proj.matrix * act_l * lift_l)
    lift_r = apply_prefix(wQ, wX + wY, wC, sect)
    act_r = apply_suffix(wX, wY + wC, wY, y.rho.matrix, 0)
    rhoQ = BimoduleMap(realize(wQ + wC).module, Q, 0, proj.matrix * act_r * lift_r)
    return Q, lamQ, rhoQ, proj


def find_structured_iso(src: DgBimodule, tgt: DgBimodule, residuals=(),
                        seed=0, budget=64):
    """Search a closed degree-0 bimodule iso src -> tgt with extra linear
    constraints.

    residuals: callables Matrix -> Matrix that must vanish on the solution
    (all linear in the map).  Candidates from the constraint kernel are
    tested for exact invertibility, basis elements first, then seeded
    random combinations.
    """
    import random as _random
    f = src.field
    if src.dim != tgt.dim:
        return None
    H = hom_complex(src, tgt)
    idx = [t for t in range(H.dim) if H.entries[t][0] == 0]
    if not idx:
        return None
    cols = []
    for t in idx:
        _, mat = H.entries[t]
        bm = BimoduleMap(src, tgt, 0, mat)
        col = []
        d = bm.differential().matrix
        col.extend(d.data[i][j] for i in range(d.rows) for j in range(d.cols))
        for res in residuals:
            r = res(mat)
            col.extend(r.data[i][j] for i in range(r.rows) for j in range(r.cols))
        cols.append(col)
    big = Matrix.from_rows(f, cols).transpose()
    solutions = []
    for v in kernel_basis(big):
        m = Matrix.zero(f, tgt.dim, src.dim)
        for t, c in zip(idx, v):
            if not f.is_zero(c):
                _, em = H.entries[t]
                m = m + em.scale(c)
        solutions.append(m)
    rng = _random.Random(seed)
    candidates = list(solutions)
    for _ in range(budget):
        m = Matrix.zero(f, tgt.dim, src.dim)
        nz = False
        for cm in solutions:
            c = f.of_int(rng.randint(-2, 2))
            if not f.is_zero(c):
                nz = True
                m = m + cm.scale(c)
        if nz:
            candidates.append(m)
    for m in candidates:
        if invert(m) is not None:
            return m
    return None


@dataclass
class MoritaReport:
    equivalent: bool
    reason: str = ""
    witness_xy: Matrix | None = None
    witness_yx: Matrix | None = None


def _algebra_as_bimodule_1mor(A: AlgebraOneMorphism) -> BimoduleOneMorphism:
    """A as an A-A-bimodule 1-morphism via its own multiplication."""
    return BimoduleOneMorphism(A, A, A.carrier, A.mult, A.mult, name=A.name)


def _equivariant_iso_to_algebra(Q, lamQ, rhoQ, A: AlgebraOneMorphism,
                                seed=0, budget=64):
    """Closed degree-0 iso Q -> A.carrier commuting with both internal actions."""
    wA = ((A.carrier, 0),)
    wQ = ((Q, 0),)

    def res_left(mat):
        # phi o lamQ = m_A o (id_A o_0 phi)
        lhs = mat * lamQ.matrix
        rhs = A.mult.matrix * apply_suffix(wA, wQ, wA, mat, 0)
        return lhs - rhs

    def res_right(mat):
        lhs = mat * rhoQ.matrix
        rhs = A.mult.matrix * apply_prefix(wQ, wA, wA, mat)
        return lhs - rhs

    return find_structured_iso(Q, A.carrier, (res_left, res_right),
                               seed=seed, budget=budget)


def morita_verify(A: AlgebraOneMorphism, B: AlgebraOneMorphism,
                  X: BimoduleOneMorphism, Y: BimoduleOneMorphism,
                  seed=0, budget=64) -> MoritaReport:
    """Check X o_B Y = A and Y o_A X = B with explicit witness isos.

    Bimodule axioms are checked first; failures are reported before any
    equivalence search.
    """
    for bm, tag in ((X, "X"), (Y, "Y")):
        rep = bm.check()
        if not rep.passed:
            return MoritaReport(False, f"bimodule axioms fail for {tag}: {rep.violations}")
    if X.left is not A or X.right is not B or Y.left is not B or Y.right is not A:
        return MoritaReport(False, "bimodule sides do not match the algebras")
    QXY, lam1, rho1, _ = relative_tensor_1mor(X, Y)
    if QXY.dim != A.carrier.dim:
        return MoritaReport(False,
                            f"dimension obstruction: dim X∘Y = {QXY.dim} != dim A = {A.carrier.dim}")
    w1 = _equivariant_iso_to_algebra(QXY, lam1, rho1, A, seed=seed, budget=budget)
    if w1 is None:
        return MoritaReport(False, "no equivariant iso X∘Y -> A found")
    QYX, lam2, rho2, _ = relative_tensor_1mor(Y, X)
    if QYX.dim != B.carrier.dim:
        return MoritaReport(False,
                            f"dimension obstruction: dim Y∘X = {QYX.dim} != dim B = {B.carrier.dim}")
    w2 = _equivariant_iso_to_algebra(QYX, lam2, rho2, B, seed=seed, budget=budget)
    if w2 is None:
        return MoritaReport(False, "no equivariant iso Y∘X -> B found")
    return MoritaReport(True, witness_xy=w1, witness_yx=w2)


# -- the free-module adjunction and the commutation iso ------------------


class AdjunctionData:
    """Explicit mutually inverse maps between Hom_{mod-A}(gA, y) and Hom(g, y)."""

    def __init__(self, algebra, g: TwistedComplex, y: ModuleOneMorphism):
        self.algebra = algebra
        self.g = g
        self.y = y
        self.ga = free_module(algebra, g)
        self._H_plain = twisted_hom_complex(g, y.carrier)
        self._H_free = twisted_hom_complex(self.ga.carrier, y.carrier)
        self._module_basis = self._compute_module_hom_basis()

    def _compute_module_hom_basis(self):
        """Basis (coordinates in Hom(gA, y)) of right-A-module maps."""
        A = self.algebra
        a_term = one_term(A.carrier)
        f = self.g.field
        cols = []
        H = self._H_free
        Hbig = twisted_hom_complex(self.ga.rho.source, self.y.carrier)
        for t in range(H.dim):
            coefs = [f.zero()] * H.dim
            coefs[t] = f.one()
            mor = H.to_morphism(coefs, H.space.degrees[t])
            # residual: mor o rho_{gA} - rho_y o (mor o_0 id_A)
            lhs = mor.compose(self.ga.rho)
            rhs = self.y.rho.compose(hcompose_left(mor, a_term))
            cols.append(Hbig.coords(lhs - rhs))
        big = Matrix.from_rows(f, cols).transpose() if cols else None
        return kernel_basis(big) if cols else []

    def module_hom_basis(self):
        return list(self._module_basis)

    def to_plain(self, fmor: TwistedMorphism) -> TwistedMorphism:
        """f in Hom_{mod-A}(gA, y) -> f o (id_g o_0 u): Hom(g, y)."""
        A = self.algebra
        ident_term = identity_complex(A.ca.identity_bimodule(A.i))
        u_tw = TwistedMorphism(ident_term, one_term(A.carrier), 0,
                               {(0, 0): A.unit.matrix})
        # g o 1 is strictly g, so the composite lands on g directly
        return fmor.compose(hcompose_right(self.g, u_tw))

    def to_module(self, h: TwistedMorphism) -> TwistedMorphism:
        """h in Hom(g, y) -> rho_y o (h o_0 id_A): Hom_{mod-A}(gA, y)."""
        A = self.algebra
        return self.y.rho.compose(hcompose_left(h, one_term(A.carrier)))

    def verify_round_trips(self) -> bool:
        """Both composites are the identity on the respective hom bases."""
        f = self.g.field
        H = self._H_free
        for v in self._module_basis:
            deg = None
            for t, c in enumerate(v):
                if not f.is_zero(c):
                    deg = H.space.degrees[t]
                    break
            if deg is None:
                continue
            mor = H.to_morphism(v, deg)
            back = self.to_module(self.to_plain(mor))
            if not _eq_morphism(back, mor):
                return False
        Hp = self._H_plain
        for t in range(Hp.dim):
            coefs = [f.zero()] * Hp.dim
            coefs[t] = f.one()
            mor = Hp.to_morphism(coefs, Hp.space.degrees[t])
            back = self.to_plain(self.to_module(mor))
            if not _eq_morphism(back, mor):
                return False
        return True


def free_module_adjunction(algebra: AlgebraOneMorphism, g: TwistedComplex,
                           y: ModuleOneMorphism) -> AdjunctionData:
    return AdjunctionData(algebra, g, y)


def commutation_iso(ca: TwoCategoryCA, g: DgBimodule, x: DgBimodule,
                    y: DgBimodule):
    """The explicit iso G [x, y] -> [x, Ev_y(G)] as a closed bimodule map.

    Both sides are quotients of G (x) y (x) x*; the map is index
    reassociation and is verified to be a closed degree-0 iso.
    """
    f = x.field
    hom_xy = tensor_over_k(y, dual_bimodule(x))
    lhs_rw = realize(((g, 0), (hom_xy, 0)))          # G o [x,y]
    gy = tensor_over_algebra(g, y)
    rhs = tensor_over_k(gy, dual_bimodule(x))        # [x, G y]
    gy_rw = realize(((g, 0), (y, 0)))
    xd = x.dim
    yd = y.dim
    mat = Matrix.zero(f, rhs.dim, lhs_rw.module.dim)
    for col in range(lhs_rw.module.dim):
        tup = lhs_rw.sigma.col(col)
        for flat, c in enumerate(tup):
            if f.is_zero(c):
                continue
            a, rest = divmod(flat, yd * xd)
            b, cdx = divmod(rest, xd)
            # (g_a, (y_b, xi_c)) -> (class(g_a (x) y_b), xi_c)
            q = gy_rw.pi.col(a * yd + b)
            for k, qc in enumerate(q):
                if f.is_zero(qc):
                    continue
                row = k * xd + cdx
                mat.data[row][col] = f.add(mat.data[row][col], f.mul(c, qc))
    bm = BimoduleMap(lhs_rw.module, rhs, 0, mat)
    if not (bm.is_bimodule_map() and bm.is_closed() and invert(mat) is not None):
        raise StructuralError("commutation iso failed verification")
    return bm


# -- dg ideals on finite probe sets ---------------------------------------


@dataclass
class RepData:
    """A finite probe of a 2-representation: module objects and generator
    1-morphisms acting on them by relative tensor."""
    name: str
    probes: list
    generators: list
    budget: int = 12


class IdealClosure:
    """Least fixed point of span, differential, two-sided composition and
    the generator action, on the Hom spaces among the (generated) probes.

    All closure operations are precomputed once as linear operators on Hom
    coordinates, so running many seeds is cheap.
    """

    def __init__(self, rep: RepData):
        self.rep = rep
        self.objects = []
        self._obj_ids = set()
        self.partial = False
        for p in rep.probes:
            self._add_object(p)
        frontier = list(self.objects)
        while frontier:
            nxt = []
            for g in rep.generators:
                for p in frontier:
                    if len(self.objects) >= rep.budget:
                        self.partial = True
                        break
                    q = tensor_over_algebra(g, p)
                    if self._add_object(q):
                        nxt.append(q)
            frontier = nxt
        self.homs = {}
        for a, pa in enumerate(self.objects):
            for b, pb in enumerate(self.objects):
                self.homs[(a, b)] = hom_complex(pa, pb)
        self._ops = {key: [] for key in self.homs}  # key -> [(target key, matrix)]
        self._build_operators()

    def _add_object(self, p):
        key = p.uid
        if key in self._obj_ids:
            return False
        self._obj_ids.add(key)
        self.objects.append(p)
        return True

    def _obj_index(self, module):
        for t, o in enumerate(self.objects):
            if o.uid == module.uid:
                return t
        return None

    def _add_op(self, src_key, tgt_key, columns):
        """columns: per src basis element, the coordinate vector in tgt."""
        f = self.rep.probes[0].field
        tgt_dim = self.homs[tgt_key].dim
        if not columns or tgt_dim == 0:
            return
        mat = Matrix.from_rows(f, columns).transpose()
        if not mat.is_zero():
            self._ops[src_key].append((tgt_key, mat))

    def _build_operators(self):
        f = self.rep.probes[0].field
        nobj = len(self.objects)
        for (a, b), H in self.homs.items():
            if H.dim == 0:
                continue
            # differential
            self._add_op((a, b), (a, b),
                         [H.diff.col(t) for t in range(H.dim)])
            # post composition with each basis map Hom(b, c)
            for c in range(nobj):
                Hpost = self.homs[(b, c)]
                Hout = self.homs[(a, c)]
                for t in range(Hpost.dim):
                    post = Hpost.map_at(t)
                    cols = []
                    for s in range(H.dim):
                        comp = post.compose(H.map_at(s))
                        cols.append(Hout.coords(comp) if not comp.matrix.is_zero()
                                    else [f.zero()] * Hout.dim)
                    self._add_op((a, b), (a, c), cols)
                Hpre = self.homs[(c, a)]
                Hout2 = self.homs[(c, b)]
                for t in range(Hpre.dim):
                    pre = Hpre.map_at(t)
                    cols = []
                    for s in range(H.dim):
                        comp = H.map_at(s).compose(pre)
                        cols.append(Hout2.coords(comp) if not comp.matrix.is_zero()
                                    else [f.zero()] * Hout2.dim)
                    self._add_op((a, b), (c, b), cols)
            # generator action
            for g in self.rep.generators:
                ga = self._obj_index(tensor_over_algebra(g, self.objects[a]))
                gb = self._obj_index(tensor_over_algebra(g, self.objects[b]))
                if ga is None or gb is None:
                    self.partial = True
                    continue
                Hout = self.homs[(ga, gb)]
                pa, pb = self.objects[a], self.objects[b]
                cols = []
                for s in range(H.dim):
                    deg, mat = H.entries[s]
                    acted = apply_suffix(((g, 0),), ((pa, 0),), ((pb, 0),), mat, deg)
                    bm = BimoduleMap(self.objects[ga], self.objects[gb], deg, acted)
                    cols.append(Hout.coords(bm) if not acted.is_zero()
                                else [f.zero()] * Hout.dim)
                self._add_op((a, b), (ga, gb), cols)

    def closure(self, seeds):
        """seeds: list of (a, b, BimoduleMap); returns spans per Hom pair."""
        f = self.rep.probes[0].field
        spans = {key: [] for key in self.homs}

        def add(key, vec):
            basis = spans[key]
            v = list(vec)
            for b in basis:
                piv = next((i for i, c in enumerate(b) if not f.is_zero(c)), None)
                if piv is not None and not f.is_zero(v[piv]):
                    coef = v[piv]
                    v = [f.sub(x, f.mul(coef, y)) for x, y in zip(v, b)]
            piv = next((i for i, c in enumerate(v) if not f.is_zero(c)), None)
            if piv is None:
                return False
            inv = f.inv(v[piv])
            basis.append([f.mul(inv, c) for c in v])
            return True

        agenda = []
        for (a, b, bm) in seeds:
            key = (a, b)
            vec = self.homs[key].coords(bm)
            if add(key, vec):
                agenda.append((key, vec))
        while agenda:
            key, vec = agenda.pop()
            for tgt_key, op in self._ops[key]:
                out = op.apply(vec)
                if any(not f.is_zero(c) for c in out) and add(tgt_key, out):
                    agenda.append((tgt_key, out))
        return spans

    def is_zero(self, spans):
        return all(not v for v in spans.values())

    def is_everything(self, spans):
        """An ideal is full iff it contains every identity morphism."""
        f = self.rep.probes[0].field
        for a, obj in enumerate(self.objects):
            if obj.dim == 0:
                continue
            H = self.homs[(a, a)]
            vec = H.coords(BimoduleMap.identity(obj))
            basis = spans[(a, a)]
            v = list(vec)
            for b in basis:
                piv = next((i for i, c in enumerate(b) if not f.is_zero(c)), None)
                if piv is not None and not f.is_zero(v[piv]):
                    coef = v[piv]
                    v = [f.sub(x, f.mul(coef, y)) for x, y in zip(v, b)]
            if any(not f.is_zero(c) for c in v):
                return False
        return True


def ideal_closure(rep: RepData, seeds):
    """Smallest dg ideal on the probes containing the seeds.

    seeds: list of (probe index, probe index, BimoduleMap).  Returns
    (IdealClosure, spans); IdealClosure.partial flags budget exhaustion.
    """
    ic = IdealClosure(rep)
    spans = ic.closure(seeds)
    return ic, spans


@dataclass
class ProbeOutcome:
    proper_found: bool
    witness: tuple | None = None
    detail: str = ""
    partial: bool = False


def quotient_simple_probe(rep: RepData) -> ProbeOutcome:
    """Run ideal_closure from every basis morphism among the probes.

    ProperIdeal iff some closure is neither zero nor everything; the
    negative answer is explicitly not a completeness claim.
    """
    ic = IdealClosure(rep)
    for (a, b), H in sorted(ic.homs.items()):
        for t in range(H.dim):
            bm = H.map_at(t)
            if bm.matrix.is_zero():
                continue
            spans = ic.closure([(a, b, bm)])
            if not ic.is_zero(spans) and not ic.is_everything(spans):
                return ProbeOutcome(True, witness=(a, b, t),
                                    detail=f"seed morphism {t}: {ic.objects[a].name} -> {ic.objects[b].name}",
                                    partial=ic.partial)
    return ProbeOutcome(False, detail="no proper nonzero dg ideal found on the probes "
                                      "(not a completeness claim)", partial=ic.partial)

"""One-sided twisted complexes over a base category of dg bimodules.

An object is an ordered list of summands, each a tensor word of shifted
generator bimodules, plus a strictly upper-triangular twist alpha of
componentwise bimodule maps of (realized) degree +1 satisfying the
Maurer-Cartan equation: the matrix diag(d) + alpha squares to zero.

Because summands are realized words, all shift signs live inside the
realized differentials; twist entries and morphism components are plain
homogeneous bimodule maps between realized summands.
"""

from __future__ import annotations

from .algebra import AlgebraReport, StructuralError
from .bimodule import BimoduleMap, DgBimodule, GradedSpace, hom_complex
from .graded import DgSpace
from .linalg import Matrix, invert
from .words import apply_prefix, apply_suffix, merge_iso, realize, word_key, word_name

_HOM_CACHE = {}


def _hom(m: DgBimodule, n: DgBimodule):
    key = (m.uid, n.uid)
    hit = _HOM_CACHE.get(key)
    if hit is None:
        hit = hom_complex(m, n)
        _HOM_CACHE[key] = hit
    return hit


class TwistedComplex:
    """(⊕ F_m, alpha) with summands realized tensor words."""

    def __init__(self, left_alg, right_alg, words, alpha, check_shape=True):
        self.left_alg = left_alg
        self.right_alg = right_alg
        self.words = tuple(tuple(w) for w in words)
        self.alpha = dict(alpha)
        if check_shape:
            for (k, l) in self.alpha:
                if not (0 <= k < l < len(self.words)):
                    raise StructuralError(f"twist entry ({k},{l}) is not strictly upper triangular")

    @property
    def field(self):
        return self.left_alg.field

    @property
    def n_summands(self):
        return len(self.words)

    def summand(self, i) -> DgBimodule:
        return realize(self.words[i]).module

    def summand_dims(self):
        return [self.summand(i).dim for i in range(self.n_summands)]

    def entry(self, k, l):
        return self.alpha.get((k, l))

    def summand_signature(self, i):
        """Graded-content label used for multiset comparison of summands."""
        w = self.words[i]
        mod = self.summand(i)
        degs = tuple(sorted(mod.space.degrees))
        return (tuple((g.name, s) for g, s in w), degs)

    def is_zero_object(self):
        return all(self.summand(i).dim == 0 for i in range(self.n_summands))

    def key(self):
        return (tuple(word_key(w) for w in self.words),
                tuple(sorted(self.alpha.keys())))

    def __repr__(self):
        names = ", ".join(word_name(w) for w in self.words)
        return f"TwistedComplex[{names}]"


def one_term(gen: DgBimodule, shift=0) -> TwistedComplex:
    return TwistedComplex(gen.left_alg, gen.right_alg, (((gen, shift),),), {})


def identity_complex(reg_bimodule: DgBimodule) -> TwistedComplex:
    if reg_bimodule.identity_of is None:
        raise StructuralError("identity_complex needs a regular bimodule")
    return one_term(reg_bimodule, 0)


def zero_complex(left_alg, right_alg) -> TwistedComplex:
    return TwistedComplex(left_alg, right_alg, (), {})


class TwistedMorphism:
    """Matrix of bimodule maps between the summands of two complexes."""

    def __init__(self, source: TwistedComplex, target: TwistedComplex,
                 degree: int, components):
        self.source = source
        self.target = target
        self.degree = degree
        f = source.field
        self.components = {k: v for k, v in components.items() if not v.is_zero()}

    def component(self, n, m):
        c = self.components.get((n, m))
        if c is not None:
            return c
        return Matrix.zero(self.source.field, self.target.summand(n).dim,
                           self.source.summand(m).dim)

    def is_zero(self):
        return not self.components

    def __add__(self, other):
        assert self.degree == other.degree
        out = dict(self.components)
        f = self.source.field
        for k, v in other.components.items():
            out[k] = out[k] + v if k in out else v
        return TwistedMorphism(self.source, self.target, self.degree, out)

    def __neg__(self):
        return TwistedMorphism(self.source, self.target, self.degree,
                               {k: -v for k, v in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return TwistedMorphism(self.source, self.target, self.degree,
                               {k: v.scale(c) for k, v in self.components.items()})

    def compose(self, other: "TwistedMorphism") -> "TwistedMorphism":
        """self after other (matrix block product, no extra signs)."""
        if other.target is not self.source and other.target.key() != self.source.key():
            raise StructuralError("twisted morphism composition mismatch")
        out = {}
        f = self.source.field
        for (n, m), a in self.components.items():
            for (m2, p), b in other.components.items():
                if m2 != m:
                    continue
                prod = a * b
                if prod.is_zero():
                    continue
                out[(n, p)] = out[(n, p)] + prod if (n, p) in out else prod
        return TwistedMorphism(other.source, self.target,
                               self.degree + other.degree, out)

    def differential(self) -> "TwistedMorphism":
        """d(gamma) = d_base(gamma) + beta gamma - (-1)^{|gamma|} gamma alpha."""
        f = self.source.field
        sign = f.one() if self.degree % 2 == 0 else f.neg(f.one())
        out = {}

        def acc(key, mat):
            if mat.is_zero():
                return
            out[key] = out[key] + mat if key in out else mat

        for (n, m), g in self.components.items():
            dn = self.target.summand(n).diff
            dm = self.source.summand(m).diff
            acc((n, m), dn * g - (g * dm).scale(sign))
        for (n, m), g in self.components.items():
            for (k, n2), b in self.target.alpha.items():
                if n2 == n:
                    acc((k, m), b * g)
            for (m2, q), a in self.source.alpha.items():
                if m2 == m:
                    acc((n, q), (g * a).scale(f.neg(sign)))
        return TwistedMorphism(self.source, self.target, self.degree + 1, out)

    def is_closed(self):
        return self.differential().is_zero()

    def validate(self):
        """Structural validity: shapes, degree homogeneity, bimodule maps."""
        for (n, m), g in self.components.items():
            tgt = self.target.summand(n)
            src = self.source.summand(m)
            bm = BimoduleMap(src, tgt, self.degree, g)
            if not bm.is_degree_homogeneous():
                raise StructuralError(f"component ({n},{m}) not homogeneous of degree {self.degree}")
            if not bm.is_bimodule_map():
                raise StructuralError(f"component ({n},{m}) is not a bimodule map")
        return True

    @staticmethod
    def identity(x: TwistedComplex):
        comps = {}
        for i in range(x.n_summands):
            comps[(i, i)] = Matrix.identity(x.field, x.summand(i).dim)
        return TwistedMorphism(x, x, 0, comps)

    @staticmethod
    def zero(source, target, degree=0):
        return TwistedMorphism(source, target, degree, {})


# -- structural operations ----------------------------------------------


def mc_check(x: TwistedComplex) -> AlgebraReport:
    """Strict upper triangularity, componentwise validity and Maurer-Cartan."""
    violations = []
    f = x.field
    for (k, l), mat in x.alpha.items():
        if k >= l:
            violations.append(("upper-triangular", (k, l)))
            continue
        src, tgt = x.summand(l), x.summand(k)
        if (mat.rows, mat.cols) != (tgt.dim, src.dim):
            violations.append(("entry-shape", (k, l)))
            continue
        bm = BimoduleMap(src, tgt, 1, mat)
        if not bm.is_degree_homogeneous():
            violations.append(("entry-degree", (k, l)))
        if not bm.is_bimodule_map():
            violations.append(("entry-not-morphism", (k, l)))
    if violations:
        return AlgebraReport(passed=False, violations=violations)
    n = x.n_summands
    for k in range(n):
        dk = x.summand(k).diff
        for l in range(k, n):
            dl = x.summand(l).diff
            acc = Matrix.zero(f, x.summand(k).dim, x.summand(l).dim)
            a_kl = x.entry(k, l)
            if a_kl is not None:
                acc = acc + dk * a_kl + a_kl * dl
            for j in range(k + 1, l):
                a_kj, a_jl = x.entry(k, j), x.entry(j, l)
                if a_kj is not None and a_jl is not None:
                    acc = acc + a_kj * a_jl
            if k == l and not (dk * dk).is_zero():
                violations.append(("summand-d-squared", (k,)))
            elif k != l and not acc.is_zero():
                violations.append(("maurer-cartan", (k, l)))
    return AlgebraReport(passed=not violations, violations=violations)


def direct_sum(x: TwistedComplex, y: TwistedComplex) -> TwistedComplex:
    """Strict concatenation; block-diagonal twist."""
    if x.left_alg.uid != y.left_alg.uid or x.right_alg.uid != y.right_alg.uid:
        raise StructuralError("direct sum across different ambient categories")
    off = x.n_summands
    alpha = dict(x.alpha)
    for (k, l), m in y.alpha.items():
        alpha[(k + off, l + off)] = m
    return TwistedComplex(x.left_alg, x.right_alg, x.words + y.words, alpha)


def shift_twisted(x: TwistedComplex, k: int) -> TwistedComplex:
    """Shift all summands; twist entries scale by (-1)^k."""
    if k == 0:
        return x
    words = tuple(((w[0][0], w[0][1] + k),) + w[1:] for w in x.words)
    if k % 2 == 0:
        alpha = dict(x.alpha)
    else:
        alpha = {kl: -m for kl, m in x.alpha.items()}
    return TwistedComplex(x.left_alg, x.right_alg, words, alpha)


def shift_morphism(f: TwistedMorphism, k: int) -> TwistedMorphism:
    """The same components viewed between shifted complexes."""
    return TwistedMorphism(shift_twisted(f.source, k), shift_twisted(f.target, k),
                           f.degree, dict(f.components))


class ConeData:
    __slots__ = ("complex", "into", "outof", "h_into", "h_outof")

    def __init__(self, complex, into, outof, h_into, h_outof):
        self.complex = complex
        self.into = into       # Y -> C_f
        self.outof = outof     # C_f<-1> -> X
        self.h_into = h_into   # d(h_into) = into o f
        self.h_outof = h_outof  # d(h_outof) = f o outof


def cone(f: TwistedMorphism) -> ConeData:
    """C_f = (Y ⊕ X<1>, [[beta, -f], [0, alpha<1>]]) for closed degree-0 f.

    Structure maps and explicit null-homotopies of their composites with f
    are returned and verified.
    """
    if f.degree != 0:
        raise StructuralError("cone needs a degree-0 morphism")
    if not f.is_closed():
        raise StructuralError("cone needs a closed morphism")
    X, Y = f.source, f.target
    Xs = shift_twisted(X, 1)
    off = Y.n_summands
    words = Y.words + Xs.words
    alpha = dict(Y.alpha)
    for (k, l), m in Xs.alpha.items():
        alpha[(k + off, l + off)] = m
    for (n, m), mat in f.components.items():
        alpha[(n, m + off)] = -mat
    C = TwistedComplex(X.left_alg, X.right_alg, words, alpha)

    into = TwistedMorphism(Y, C, 0, {
        (i, i): Matrix.identity(Y.field, Y.summand(i).dim) for i in range(off)})
    Cm1 = shift_twisted(C, -1)
    outof = TwistedMorphism(Cm1, X, 0, {
        (m, m + off): Matrix.identity(X.field, X.summand(m).dim)
        for m in range(X.n_summands)})

    # h: X -> C with d(h) = +- into o f ; components are identities into X<1>
    h = TwistedMorphism(X, C, -1, {
        (m + off, m): Matrix.identity(X.field, X.summand(m).dim)
        for m in range(X.n_summands)})
    target = into.compose(f)
    dh = h.differential()
    if _eq_morphism(dh, target):
        h_into = h
    elif _eq_morphism(dh, -target):
        h_into = -h
    else:
        raise StructuralError("cone homotopy (into) failed to verify")

    h2 = TwistedMorphism(Cm1, Y, -1, {
        (i, i): Matrix.identity(Y.field, Y.summand(i).dim) for i in range(off)})
    target2 = f.compose(outof)
    dh2 = h2.differential()
    if _eq_morphism(dh2, target2):
        h_outof = h2
    elif _eq_morphism(dh2, -target2):
        h_outof = -h2
    else:
        raise StructuralError("cone homotopy (outof) failed to verify")
    return ConeData(C, into, outof, h_into, h_outof)


def _eq_morphism(a: TwistedMorphism, b: TwistedMorphism):
    if a.degree != b.degree:
        return False
    keys = set(a.components) | set(b.components)
    return all(a.component(*k) == b.component(*k) for k in keys)


# -- composition of 1-morphisms (Eq.-style lexicographic product) -------


def compose(x: TwistedComplex, y: TwistedComplex) -> TwistedComplex:
    """Horizontal composition: summands F_m F'_n in lexicographic order.

    The twist is delta alpha^x o_0 id + delta id o_0 alpha^y; shift-0
    identity slots are stripped so composing with an identity 1-morphism
    is literally the identity.
    """
    if x.right_alg.uid != y.left_alg.uid:
        raise StructuralError("non-composable 1-morphisms")
    pairs = [(k, kp) for k in range(x.n_summands) for kp in range(y.n_summands)]
    pos = {p: t for t, p in enumerate(pairs)}
    words = []
    isos = []      # merge iso realize(raw) -> realize(norm)
    isos_inv = []
    for (k, kp) in pairs:
        raw = x.words[k] + y.words[kp]
        norm, iso = merge_iso(raw)
        words.append(norm)
        isos.append(iso)
        inv = invert(iso)
        if inv is None:
            raise StructuralError("identity-merge iso is not invertible")
        isos_inv.append(inv)
    alpha = {}
    for (k, l), m in x.alpha.items():
        for kp in range(y.n_summands):
            t_tgt, t_src = pos[(k, kp)], pos[(l, kp)]
            rawmat = apply_prefix(x.words[l], x.words[k], y.words[kp], m)
            mat = isos[t_tgt] * rawmat * isos_inv[t_src]
            if not mat.is_zero():
                alpha[(t_tgt, t_src)] = mat
    for (kp, lp), m in y.alpha.items():
        for k in range(x.n_summands):
            t_tgt, t_src = pos[(k, kp)], pos[(k, lp)]
            rawmat = apply_suffix(x.words[k], y.words[lp], y.words[kp], m, 1)
            mat = isos[t_tgt] * rawmat * isos_inv[t_src]
            if not mat.is_zero():
                alpha[(t_tgt, t_src)] = mat
    return TwistedComplex(x.left_alg, y.right_alg, words, alpha)


def hcompose_left(f: TwistedMorphism, y: TwistedComplex) -> TwistedMorphism:
    """f o_0 id_y : (src f) o y -> (tgt f) o y."""
    X, Xp = f.source, f.target
    src = compose(X, y)
    tgt = compose(Xp, y)
    comps = {}
    for (n, m), mat in f.components.items():
        for kp in range(y.n_summands):
            t_tgt = n * y.n_summands + kp
            t_src = m * y.n_summands + kp
            raw = apply_prefix(X.words[m], Xp.words[n], y.words[kp], mat)
            _, iso_s = merge_iso(X.words[m] + y.words[kp])
            _, iso_t = merge_iso(Xp.words[n] + y.words[kp])
            out = iso_t * raw * invert(iso_s)
            if not out.is_zero():
                comps[(t_tgt, t_src)] = out
    return TwistedMorphism(src, tgt, f.degree, comps)


def hcompose_right(x: TwistedComplex, g: TwistedMorphism) -> TwistedMorphism:
    """id_x o_0 g with the Koszul sign (-1)^{|g| deg(x-part)}."""
    Y, Yp = g.source, g.target
    src = compose(x, Y)
    tgt = compose(x, Yp)
    comps = {}
    for (n, m), mat in g.components.items():
        for k in range(x.n_summands):
            t_tgt = k * Yp.n_summands + n
            t_src = k * Y.n_summands + m
            raw = apply_suffix(x.words[k], Y.words[m], Yp.words[n], mat, g.degree)
            _, iso_s = merge_iso(x.words[k] + Y.words[m])
            _, iso_t = merge_iso(x.words[k] + Yp.words[n])
            out = iso_t * raw * invert(iso_s)
            if not out.is_zero():
                comps[(t_tgt, t_src)] = out
    return TwistedMorphism(src, tgt, g.degree, comps)


# -- Hom complexes of twisted complexes ---------------------------------


class TwistedHom:
    """The Hom complex between two twisted complexes.

    Basis elements are single components (n, m, basis map of the bimodule
    Hom); the differential includes the twist terms.
    """

    def __init__(self, x: TwistedComplex, y: TwistedComplex):
        self.x = x
        self.y = y
        f = x.field
        self.index = []  # (n, m, t) -> flat position
        self.homs = {}
        basis = []
        for n in range(y.n_summands):
            for m in range(x.n_summands):
                h = _hom(x.summand(m), y.summand(n))
                self.homs[(n, m)] = h
                for t, (d, _) in enumerate(h.entries):
                    self.index.append((n, m, t))
                    basis.append((f"g{len(basis)}", d))
        self.pos = {nmt: i for i, nmt in enumerate(self.index)}
        self.space = GradedSpace(f, basis)
        self.diff = self._differential()

    @property
    def dim(self):
        return len(self.index)

    def _differential(self):
        f = self.x.field
        d = Matrix.zero(f, self.dim, self.dim)
        for col, (n, m, t) in enumerate(self.index):
            h = self.homs[(n, m)]
            deg, mat = h.entries[t]
            sign = f.one() if deg % 2 == 0 else f.neg(f.one())
            # base differential within the same component
            for s, c in enumerate(h.diff.col(t)):
                if not f.is_zero(c):
                    d.data[self.pos[(n, m, s)]][col] = f.add(
                        d.data[self.pos[(n, m, s)]][col], c)
            # beta gamma
            for (k, n2), b in self.y.alpha.items():
                if n2 != n:
                    continue
                prod = b * mat
                if prod.is_zero():
                    continue
                hk = self.homs[(k, m)]
                coefs = hk.coords(BimoduleMap(self.x.summand(m), self.y.summand(k),
                                              deg + 1, prod))
                for s, c in enumerate(coefs):
                    if not f.is_zero(c):
                        d.data[self.pos[(k, m, s)]][col] = f.add(
                            d.data[self.pos[(k, m, s)]][col], c)
            # -(-1)^{|gamma|} gamma alpha
            for (m2, q), a in self.x.alpha.items():
                if m2 != m:
                    continue
                prod = mat * a
                if prod.is_zero():
                    continue
                hq = self.homs[(n, q)]
                coefs = hq.coords(BimoduleMap(self.x.summand(q), self.y.summand(n),
                                              deg + 1, prod))
                mult = f.neg(sign)
                for s, c in enumerate(coefs):
                    if not f.is_zero(c):
                        d.data[self.pos[(n, q, s)]][col] = f.add(
                            d.data[self.pos[(n, q, s)]][col], f.mul(mult, c))
        return d

    def dg_space(self) -> DgSpace:
        return DgSpace(self.space, self.diff, check=False)

    def to_morphism(self, coefs, degree) -> TwistedMorphism:
        f = self.x.field
        comps = {}
        for i, c in enumerate(coefs):
            if f.is_zero(c):
                continue
            n, m, t = self.index[i]
            h = self.homs[(n, m)]
            d, mat = h.entries[t]
            if d != degree:
                raise StructuralError("coefficient outside requested degree")
            add = mat.scale(c)
            comps[(n, m)] = comps[(n, m)] + add if (n, m) in comps else add
        return TwistedMorphism(self.x, self.y, degree, comps)

    def coords(self, g: TwistedMorphism):
        f = self.x.field
        out = [f.zero()] * self.dim
        for (n, m), mat in g.components.items():
            h = self.homs[(n, m)]
            coefs = h.coords(BimoduleMap(self.x.summand(m), self.y.summand(n),
                                         g.degree, mat))
            for t, c in enumerate(coefs):
                if not f.is_zero(c):
                    out[self.pos[(n, m, t)]] = c
        return out


def twisted_hom_complex(x: TwistedComplex, y: TwistedComplex) -> TwistedHom:
    if x.left_alg.uid != y.left_alg.uid or x.right_alg.uid != y.right_alg.uid:
        raise StructuralError("twisted hom needs a common ambient category")
    return TwistedHom(x, y)


def totalize(x: TwistedComplex, name=None) -> DgBimodule:
    """The direct sum of summands with total differential diag(d) + alpha."""
    f = x.field
    mods = [x.summand(i) for i in range(x.n_summands)]
    offs = []
    off = 0
    for m in mods:
        offs.append(off)
        off += m.dim
    basis = []
    for i, m in enumerate(mods):
        for l, d in m.space.basis():
            basis.append((f"s{i}.{l}", d))
    space = GradedSpace(f, basis)
    left = {}
    right = {}
    for i, m in enumerate(mods):
        for (a, j), terms in m.left_action.items():
            left[(a, j + offs[i])] = {k + offs[i]: c for k, c in terms.items()}
        for (b, j), terms in m.right_action.items():
            right[(b, j + offs[i])] = {k + offs[i]: c for k, c in terms.items()}
    diff = Matrix.zero(f, space.dim, space.dim)
    for i, m in enumerate(mods):
        for j in range(m.dim):
            for k in range(m.dim):
                c = m.diff[k, j]
                if not f.is_zero(c):
                    diff.data[k + offs[i]][j + offs[i]] = c
    for (k, l), mat in x.alpha.items():
        for j in range(mat.cols):
            for i2 in range(mat.rows):
                c = mat[i2, j]
                if not f.is_zero(c):
                    diff.data[i2 + offs[k]][j + offs[l]] = f.add(
                        diff.data[i2 + offs[k]][j + offs[l]], c)
    return DgBimodule(name or f"Tot({x!r})", x.left_alg, x.right_alg, space,
                      left, right, diff)


def totalize_morphism(g: TwistedMorphism):
    src = totalize(g.source)
    tgt = totalize(g.target)
    f = g.source.field
    mat = Matrix.zero(f, tgt.dim, src.dim)
    soffs, off = [], 0
    for i in range(g.source.n_summands):
        soffs.append(off)
        off += g.source.summand(i).dim
    toffs, off = [], 0
    for i in range(g.target.n_summands):
        toffs.append(off)
        off += g.target.summand(i).dim
    for (n, m), comp in g.components.items():
        for j in range(comp.cols):
            for i2 in range(comp.rows):
                c = comp[i2, j]
                if not f.is_zero(c):
                    mat.data[i2 + toffs[n]][j + soffs[m]] = c
    return BimoduleMap(src, tgt, g.degree, mat)

"""Finite-dimensional dg bimodules over dg algebras.

Carries the bimodule calculus everything else is built from: Hom
complexes (as constraint kernels), tensor products over the ground field
and over an algebra (the latter as an explicit cokernel), duals, shifts,
cokernels and idempotent splitting.

Sign conventions, fixed once for the whole package:
  * (f (x) g)(x (x) y) = (-1)^{|g||x|} f(x) (x) g(y)
  * d(x (x) y) = dx (x) y + (-1)^{|x|} x (x) dy
  * Hom differential d(f) = d_N f - (-1)^{|f|} f d_M
  * a degree-d bimodule map satisfies f(a.x) = (-1)^{d|a|} a.f(x) and
    f(x.b) = f(x).b
  * shifting by k negates the differential k times and leaves actions alone
"""

from __future__ import annotations

import itertools

from .algebra import DgAlgebra, AlgebraReport, StructuralError, trivial_algebra
from .graded import GradedSpace
from .linalg import Matrix, Solver, image_basis, kernel_basis, rref

_uid_counter = itertools.count()

_GROUND_CACHE = {}


def ground(field):
    """The canonical copy of the field as a trivial algebra (shared per field)."""
    key = str(field)
    if key not in _GROUND_CACHE:
        _GROUND_CACHE[key] = trivial_algebra(field, name="k")
    return _GROUND_CACHE[key]


class DgBimodule:
    """A graded space with commuting left/right dg algebra actions.

    Action tables are sparse:
      left_action[(a, j)]  = {k: c}  meaning  b_a . x_j = sum c x_k
      right_action[(b, j)] = {k: c}  meaning  x_j . b_b = sum c x_k
    """

    def __init__(self, name, left_alg: DgAlgebra, right_alg: DgAlgebra,
                 space: GradedSpace, left_action, right_action, diff: Matrix,
                 identity_of=None):
        self.uid = next(_uid_counter)
        self.name = name
        self.left_alg = left_alg
        self.right_alg = right_alg
        self.space = space
        self.left_action = left_action
        self.right_action = right_action
        self.diff = diff
        self.identity_of = identity_of  # algebra uid when this is a regular bimodule used as 1
        if (diff.rows, diff.cols) != (space.dim, space.dim):
            raise StructuralError("bimodule differential shape mismatch")
        f = space.field
        self._monomial = all(
            sum(1 for c in t.values() if not f.is_zero(c)) <= 1
            for t in left_action.values()) and all(
            sum(1 for c in t.values() if not f.is_zero(c)) <= 1
            for t in right_action.values())
        self._left_weights = None
        self._right_weights = None
        self._weights_done = False

    @property
    def field(self):
        return self.space.field

    @property
    def dim(self):
        return self.space.dim

    @property
    def is_monomial(self):
        return self._monomial

    def act_left(self, a_idx, vec):
        f = self.field
        out = [f.zero()] * self.dim
        for j, c in enumerate(vec):
            if f.is_zero(c):
                continue
            for k, d in self.left_action.get((a_idx, j), {}).items():
                out[k] = f.add(out[k], f.mul(c, d))
        return out

    def act_right(self, b_idx, vec):
        f = self.field
        out = [f.zero()] * self.dim
        for j, c in enumerate(vec):
            if f.is_zero(c):
                continue
            for k, d in self.right_action.get((b_idx, j), {}).items():
                out[k] = f.add(out[k], f.mul(c, d))
        return out

    def act_left_vec(self, avec, vec):
        f = self.field
        out = [f.zero()] * self.dim
        for a_idx, ac in enumerate(avec):
            if f.is_zero(ac):
                continue
            t = self.act_left(a_idx, vec)
            out = [f.add(x, f.mul(ac, y)) for x, y in zip(out, t)]
        return out

    def act_right_vec(self, vec, bvec):
        f = self.field
        out = [f.zero()] * self.dim
        for b_idx, bc in enumerate(bvec):
            if f.is_zero(bc):
                continue
            t = self.act_right(b_idx, vec)
            out = [f.add(x, f.mul(bc, y)) for x, y in zip(out, t)]
        return out

    def left_matrix(self, a_idx):
        f = self.field
        m = Matrix.zero(f, self.dim, self.dim)
        for j in range(self.dim):
            for k, c in self.left_action.get((a_idx, j), {}).items():
                m.data[k][j] = f.add(m.data[k][j], c)
        return m

    def right_matrix(self, b_idx):
        f = self.field
        m = Matrix.zero(f, self.dim, self.dim)
        for j in range(self.dim):
            for k, c in self.right_action.get((b_idx, j), {}).items():
                m.data[k][j] = f.add(m.data[k][j], c)
        return m

    def basis_vector(self, i):
        f = self.field
        v = [f.zero()] * self.dim
        v[i] = f.one()
        return v

    def _weights(self):
        """Per-basis (left idempotent, right idempotent) weights, or None.

        Valid when the algebra idempotent lists split every basis vector;
        used to block Hom computations.
        """
        if self._weights_done:
            return self._left_weights, self._right_weights
        self._weights_done = True
        f = self.field

        def compute(idems, act):
            if idems is None:
                return None
            out = []
            for j in range(self.dim):
                x = self.basis_vector(j)
                w = None
                for t, e in enumerate(idems):
                    y = act(e, x)
                    if y == x:
                        if w is not None:
                            return None
                        w = t
                    elif any(not f.is_zero(c) for c in y):
                        return None
                if w is None:
                    return None
                out.append(w)
            return out

        self._left_weights = compute(self.left_alg.idempotents,
                                     lambda e, x: self.act_left_vec(e, x))
        self._right_weights = compute(self.right_alg.idempotents,
                                      lambda e, x: self.act_right_vec(x, e))
        return self._left_weights, self._right_weights

    def __repr__(self):
        return f"DgBimodule({self.name}, {self.left_alg.name}-{self.right_alg.name}, dim={self.dim})"


# -- basic constructors ------------------------------------------------


def regular_bimodule(a: DgAlgebra, name=None):
    """The algebra over itself; the identity 1-morphism of the ambient 2-category."""
    left = {}
    right = {}
    for (i, j), terms in a.mult.items():
        left[(i, j)] = dict(terms)
        right[(j, i)] = dict(terms)
    return DgBimodule(name or a.name, a, a, a.space, left, right, a.diff,
                      identity_of=a.uid)


def left_regular(a: DgAlgebra, name=None):
    """The algebra as an (A, k)-bimodule (a left module)."""
    k = ground(a.field)
    left = {}
    right = {}
    for (i, j), terms in a.mult.items():
        left[(i, j)] = dict(terms)
    for j in range(a.dim):
        right[(0, j)] = {j: a.field.one()}
    return DgBimodule(name or f"{a.name}_left", a, k, a.space, left, right, a.diff)


def right_regular(a: DgAlgebra, name=None):
    """The algebra as a (k, A)-bimodule (a right module)."""
    k = ground(a.field)
    left = {}
    right = {}
    for (i, j), terms in a.mult.items():
        right[(j, i)] = dict(terms)
    for j in range(a.dim):
        left[(0, j)] = {j: a.field.one()}
    return DgBimodule(name or f"{a.name}_right", k, a, a.space, left, right, a.diff)


def direct_sum_bimodule(m: DgBimodule, n: DgBimodule, name=None):
    """Block direct sum of two bimodules over the same algebra pair."""
    if m.left_alg.uid != n.left_alg.uid or m.right_alg.uid != n.right_alg.uid:
        raise StructuralError("direct sum across different algebra pairs")
    f = m.field
    basis = [(f"L.{l}", d) for l, d in m.space.basis()] + \
            [(f"R.{l}", d) for l, d in n.space.basis()]
    space = GradedSpace(f, basis)
    off = m.dim

    def block(t1, t2):
        out = {}
        for (a, j), terms in t1.items():
            out[(a, j)] = dict(terms)
        for (a, j), terms in t2.items():
            out[(a, j + off)] = {k + off: c for k, c in terms.items()}
        return out

    diff = Matrix.zero(f, space.dim, space.dim)
    for j in range(m.dim):
        for k in range(m.dim):
            diff.data[k][j] = m.diff[k, j]
    for j in range(n.dim):
        for k in range(n.dim):
            diff.data[k + off][j + off] = n.diff[k, j]
    return DgBimodule(name or f"{m.name}⊕{n.name}", m.left_alg, m.right_alg,
                      space, block(m.left_action, n.left_action),
                      block(m.right_action, n.right_action), diff)


def zero_bimodule(left_alg, right_alg, name="0"):
    f = left_alg.field
    return DgBimodule(name, left_alg, right_alg, GradedSpace(f, []), {}, {},
                      Matrix.zero(f, 0, 0))


def submodule_from_indices(m: DgBimodule, indices, name=None):
    """The span of a set of basis coordinates, when it is action/diff stable."""
    f = m.field
    idx = sorted(indices)
    pos = {j: t for t, j in enumerate(idx)}
    space = GradedSpace(f, [(m.space.labels[j], m.space.degrees[j]) for j in idx])

    def restrict(table):
        out = {}
        for (a, j), terms in table.items():
            if j not in pos:
                continue
            nt = {}
            for k, c in terms.items():
                if f.is_zero(c):
                    continue
                if k not in pos:
                    raise StructuralError("coordinate set is not action-stable")
                nt[pos[k]] = c
            if nt:
                out[(a, pos[j])] = nt
        return out

    diff = Matrix.zero(f, len(idx), len(idx))
    for j in idx:
        for k in range(m.dim):
            c = m.diff[k, j]
            if f.is_zero(c):
                continue
            if k not in pos:
                raise StructuralError("coordinate set is not differential-stable")
            diff.data[pos[k]][pos[j]] = c
    return DgBimodule(name or f"{m.name}|{idx}", m.left_alg, m.right_alg, space,
                      restrict(m.left_action), restrict(m.right_action), diff)


def coordinate_components(m: DgBimodule):
    """Partition of the basis into connected components of the structure maps.

    Components are subspaces closed under both actions and the
    differential, so the bimodule is their direct sum.
    """
    parent = list(range(m.dim))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)

    f = m.field
    for table in (m.left_action, m.right_action):
        for (a, j), terms in table.items():
            for k, c in terms.items():
                if not f.is_zero(c):
                    union(j, k)
    for j in range(m.dim):
        for k in range(m.dim):
            if not f.is_zero(m.diff[k, j]):
                union(j, k)
    comps = {}
    for j in range(m.dim):
        comps.setdefault(find(j), []).append(j)
    return [sorted(v) for _, v in sorted(comps.items())]


# -- axiom checking ----------------------------------------------------


def check_dg_bimodule(m: DgBimodule) -> AlgebraReport:
    f = m.field
    A, B = m.left_alg, m.right_alg
    lab = m.space.labels
    alab = A.space.labels
    blab = B.space.labels
    deg = m.space.degrees
    violations = []

    def report(axiom, witness):
        if not any(v[0] == axiom for v in violations):
            violations.append((axiom, witness))

    # graded actions
    for (a, j), terms in m.left_action.items():
        for k, c in terms.items():
            if not f.is_zero(c) and deg[k] != A.space.degrees[a] + deg[j]:
                report("left-action-graded", (alab[a], lab[j], lab[k]))
    for (b, j), terms in m.right_action.items():
        for k, c in terms.items():
            if not f.is_zero(c) and deg[k] != deg[j] + B.space.degrees[b]:
                report("right-action-graded", (blab[b], lab[j], lab[k]))

    # unitality
    for j in range(m.dim):
        x = m.basis_vector(j)
        if m.act_left_vec(A.unit, x) != x:
            report("left-unital", (lab[j],))
        if m.act_right_vec(x, B.unit) != x:
            report("right-unital", (lab[j],))

    # associativity of each action and commutation between them
    for i in range(A.dim):
        for j in range(A.dim):
            prod = A.mul_basis(i, j)
            for t in range(m.dim):
                x = m.basis_vector(t)
                lhs = [f.zero()] * m.dim
                for k, c in prod.items():
                    tmp = m.act_left(k, x)
                    lhs = [f.add(u, f.mul(c, v)) for u, v in zip(lhs, tmp)]
                rhs = m.act_left(i, m.act_left(j, x))
                if lhs != rhs:
                    report("left-associative", (alab[i], alab[j], lab[t]))
    for i in range(B.dim):
        for j in range(B.dim):
            prod = B.mul_basis(i, j)
            for t in range(m.dim):
                x = m.basis_vector(t)
                lhs = [f.zero()] * m.dim
                for k, c in prod.items():
                    tmp = m.act_right(k, x)
                    lhs = [f.add(u, f.mul(c, v)) for u, v in zip(lhs, tmp)]
                rhs = m.act_right(j, m.act_right(i, x))
                if lhs != rhs:
                    report("right-associative", (blab[i], blab[j], lab[t]))
    for i in range(A.dim):
        for j in range(B.dim):
            for t in range(m.dim):
                x = m.basis_vector(t)
                lhs = m.act_right(j, m.act_left(i, x))
                rhs = m.act_left(i, m.act_right(j, x))
                if lhs != rhs:
                    report("actions-commute", (alab[i], blab[j], lab[t]))

    # differential
    for j in range(m.dim):
        for k in range(m.dim):
            if not f.is_zero(m.diff[k, j]) and deg[k] != deg[j] + 1:
                report("differential-degree", (lab[j], lab[k]))
    if not (m.diff * m.diff).is_zero():
        report("differential-squared", ())

    # Leibniz against both actions
    for i in range(A.dim):
        da = A.diff.col(i)
        sign = f.one() if A.space.degrees[i] % 2 == 0 else f.neg(f.one())
        for t in range(m.dim):
            x = m.basis_vector(t)
            lhs = m.diff.apply(m.act_left(i, x))
            rhs = m.act_left_vec(da, x)
            tmp = m.act_left(i, m.diff.apply(x))
            rhs = [f.add(u, f.mul(sign, v)) for u, v in zip(rhs, tmp)]
            if lhs != rhs:
                report("left-leibniz", (alab[i], lab[t]))
    for i in range(B.dim):
        db = B.diff.col(i)
        for t in range(m.dim):
            x = m.basis_vector(t)
            sign = f.one() if deg[t] % 2 == 0 else f.neg(f.one())
            lhs = m.diff.apply(m.act_right(i, x))
            rhs = m.act_right_vec(x, db)
            rhs = [f.mul(sign, v) for v in rhs]
            tmp = m.act_right(i, m.diff.apply(x))
            rhs = [f.add(u, v) for u, v in zip(tmp, rhs)]
            if lhs != rhs:
                report("right-leibniz", (blab[i], lab[t]))

    return AlgebraReport(passed=not violations, violations=violations)


# -- morphisms ---------------------------------------------------------


class BimoduleMap:
    """A homogeneous linear map between bimodules over the same algebra pair."""

    def __init__(self, source: DgBimodule, target: DgBimodule, degree: int,
                 matrix: Matrix):
        if source.left_alg.uid != target.left_alg.uid or source.right_alg.uid != target.right_alg.uid:
            raise StructuralError("bimodule map across different algebra pairs")
        if (matrix.rows, matrix.cols) != (target.dim, source.dim):
            raise StructuralError("bimodule map matrix shape mismatch")
        self.source = source
        self.target = target
        self.degree = degree
        self.matrix = matrix

    def differential(self):
        """d(f) = d_N f - (-1)^{|f|} f d_M."""
        f = self.source.field
        sign = f.one() if self.degree % 2 == 0 else f.neg(f.one())
        mat = self.target.diff * self.matrix - (self.matrix * self.source.diff).scale(sign)
        return BimoduleMap(self.source, self.target, self.degree + 1, mat)

    def is_closed(self):
        return self.differential().matrix.is_zero()

    def is_degree_homogeneous(self):
        sdeg, tdeg = self.source.space.degrees, self.target.space.degrees
        f = self.source.field
        return all(
            f.is_zero(self.matrix[k, j]) or tdeg[k] == sdeg[j] + self.degree
            for k in range(self.target.dim) for j in range(self.source.dim))

    def is_bimodule_map(self):
        """Checks f(a.x) = (-1)^{d|a|} a.f(x) and f(x.b) = f(x).b on bases."""
        f = self.source.field
        d = self.degree
        A, B = self.source.left_alg, self.source.right_alg
        for i in range(A.dim):
            sign = f.one() if (d * A.space.degrees[i]) % 2 == 0 else f.neg(f.one())
            for j in range(self.source.dim):
                x = self.source.basis_vector(j)
                lhs = self.matrix.apply(self.source.act_left(i, x))
                rhs = [f.mul(sign, v) for v in self.target.act_left(i, self.matrix.apply(x))]
                if lhs != rhs:
                    return False
        for i in range(B.dim):
            for j in range(self.source.dim):
                x = self.source.basis_vector(j)
                lhs = self.matrix.apply(self.source.act_right(i, x))
                rhs = self.target.act_right(i, self.matrix.apply(x))
                if lhs != rhs:
                    return False
        return True

    def compose(self, other):
        """self after other."""
        if other.target.uid != self.source.uid:
            raise StructuralError("composition mismatch")
        return BimoduleMap(other.source, self.target, self.degree + other.degree,
                           self.matrix * other.matrix)

    def __add__(self, other):
        assert self.degree == other.degree
        return BimoduleMap(self.source, self.target, self.degree,
                           self.matrix + other.matrix)

    def __neg__(self):
        return BimoduleMap(self.source, self.target, self.degree, -self.matrix)

    def scale(self, c):
        return BimoduleMap(self.source, self.target, self.degree, self.matrix.scale(c))

    @staticmethod
    def identity(m: DgBimodule):
        return BimoduleMap(m, m, 0, Matrix.identity(m.field, m.dim))

    @staticmethod
    def zero(source, target, degree=0):
        return BimoduleMap(source, target, degree,
                           Matrix.zero(source.field, target.dim, source.dim))


# -- shift, dual, plain tensor ----------------------------------------


def shift_bimodule(m: DgBimodule, k: int, name=None):
    """m<k>: degrees drop by k, differential scales by (-1)^k.

    The left action twists by (-1)^{k|a|} (shift = tensoring with k[k] on
    the left); the right action is unchanged.  This keeps both Leibniz
    rules exact and makes Hom(M, N<k>) = Hom(M, N)<k> on the nose.
    """
    if k == 0:
        return m
    f = m.field
    space = m.space.shifted(k)
    diff = m.diff if k % 2 == 0 else -m.diff
    if k % 2 == 0:
        left = m.left_action
    else:
        left = {}
        for (a, j), terms in m.left_action.items():
            if m.left_alg.space.degrees[a] % 2 == 0:
                left[(a, j)] = terms
            else:
                left[(a, j)] = {t: f.neg(c) for t, c in terms.items()}
    return DgBimodule(name or f"{m.name}<{k}>", m.left_alg, m.right_alg, space,
                      left, m.right_action, diff)


def dual_bimodule(m: DgBimodule, name=None):
    """The k-linear dual, a (B, A)-bimodule with Koszul-signed actions.

    (b.xi)(x) = (-1)^{|b|} xi(x.b);  (xi.a)(x) = xi(a.x);
    (d xi)(x) = -(-1)^{|xi|} xi(dx).
    """
    f = m.field
    space = GradedSpace(f, [(l + "*", -d) for l, d in m.space.basis()])
    left = {}
    for (b, j), terms in m.right_action.items():
        bdeg = m.right_alg.space.degrees[b]
        sign = f.one() if bdeg % 2 == 0 else f.neg(f.one())
        for k, c in terms.items():
            # x_j . b has coefficient c at x_k  =>  b . xi_k has (-1)^{|b|} c at xi_j
            left.setdefault((b, k), {})[j] = f.mul(sign, c)
    right = {}
    for (a, j), terms in m.left_action.items():
        for k, c in terms.items():
            right.setdefault((a, k), {})[j] = c
    diff = Matrix.zero(f, m.dim, m.dim)
    for j in range(m.dim):
        sign = f.one() if m.space.degrees[j] % 2 == 0 else f.neg(f.one())
        for k in range(m.dim):
            c = m.diff[k, j]
            if not f.is_zero(c):
                # (d xi_k)(x_j) = -(-1)^{|xi_k|} c ; |xi_k| = -deg(x_k) = -(deg x_j + 1)
                s = f.one() if (m.space.degrees[k]) % 2 == 0 else f.neg(f.one())
                diff.data[j][k] = f.neg(f.mul(s, c))
    return DgBimodule(name or f"{m.name}*", m.right_alg, m.left_alg, space,
                      left, right, diff)


def tensor_over_k(m: DgBimodule, n: DgBimodule, name=None):
    """m (x)_k n as a (left_alg(m), right_alg(n))-bimodule.

    The inner actions (right of m, left of n) are forgotten; the
    differential follows the Koszul rule.
    """
    f = m.field
    if str(m.field) != str(n.field):
        raise StructuralError("tensor over different fields")
    dim_n = n.dim
    basis = []
    for i, (li, di) in enumerate(m.space.basis()):
        for j, (lj, dj) in enumerate(n.space.basis()):
            basis.append((f"{li}⊗{lj}", di + dj))
    space = GradedSpace(f, basis)

    def flat(i, j):
        return i * dim_n + j

    left = {}
    for (a, i), terms in m.left_action.items():
        for k, c in terms.items():
            for j in range(dim_n):
                left.setdefault((a, flat(i, j)), {})[flat(k, j)] = c
    right = {}
    for (b, j), terms in n.right_action.items():
        for k, c in terms.items():
            for i in range(m.dim):
                right.setdefault((b, flat(i, j)), {})[flat(i, k)] = c
    diff = Matrix.zero(f, space.dim, space.dim)
    for i in range(m.dim):
        for k in range(m.dim):
            c = m.diff[k, i]
            if not f.is_zero(c):
                for j in range(dim_n):
                    diff.data[flat(k, j)][flat(i, j)] = f.add(diff.data[flat(k, j)][flat(i, j)], c)
    for i in range(m.dim):
        sign = f.one() if m.space.degrees[i] % 2 == 0 else f.neg(f.one())
        for j in range(dim_n):
            for k in range(dim_n):
                c = n.diff[k, j]
                if not f.is_zero(c):
                    diff.data[flat(i, k)][flat(i, j)] = f.add(
                        diff.data[flat(i, k)][flat(i, j)], f.mul(sign, c))
    return DgBimodule(name or f"{m.name}⊗{n.name}", m.left_alg, n.right_alg,
                      space, left, right, diff)


# -- quotients ---------------------------------------------------------


class QuotientData:
    """A quotient bimodule with its projection and a fixed linear section."""

    __slots__ = ("module", "proj", "section")

    def __init__(self, module, proj, section):
        self.module = module
        self.proj = proj          # (dim Q) x (dim M)
        self.section = section    # (dim M) x (dim Q)


def quotient_by_span(m: DgBimodule, vectors, name=None) -> QuotientData:
    """Quotient of m by the span of the given vectors.

    The span must be stable under both actions and the differential; the
    quotient basis is the set of non-pivot coordinates of the echelonized
    span, which makes the construction deterministic.
    """
    f = m.field
    if not vectors:
        ident = Matrix.identity(f, m.dim)
        return QuotientData(m, ident, ident)
    span = Matrix.from_rows(f, vectors) if vectors else Matrix.zero(f, 0, m.dim)
    red, pivots = rref(span)
    pivset = set(pivots)
    keep = [j for j in range(m.dim) if j not in pivset]
    pos = {j: t for t, j in enumerate(keep)}
    # projection: e_j -> e_j for kept coords; pivot coord -> minus the rest of its row
    proj = Matrix.zero(f, len(keep), m.dim)
    for j in keep:
        proj.data[pos[j]][j] = f.one()
    for r, pc in enumerate(pivots):
        for j in keep:
            c = red[r, j]
            if not f.is_zero(c):
                proj.data[pos[j]][pc] = f.neg(c)
    section = Matrix.zero(f, m.dim, len(keep))
    for j in keep:
        section.data[j][pos[j]] = f.one()

    space = GradedSpace(f, [(m.space.labels[j], m.space.degrees[j]) for j in keep])

    # induced tables: act on the section basis (the kept coordinates), project
    def push(table):
        out = {}
        for (a, j), terms in table.items():
            if j not in pos:
                continue
            vec = [f.zero()] * m.dim
            for k, c in terms.items():
                vec[k] = c
            q = proj.apply(vec)
            entry = {t: c for t, c in enumerate(q) if not f.is_zero(c)}
            if entry:
                out[(a, pos[j])] = entry
        return out

    left = push(m.left_action)
    right = push(m.right_action)
    diff = proj * m.diff * section
    q = DgBimodule(name or f"{m.name}/~", m.left_alg, m.right_alg, space,
                   left, right, diff)
    return QuotientData(q, proj, section)


def _monomial_tensor_quotient(ndim_flat, relations, field):
    """Union-find with scalings for binomial relations.

    relations: iterable of sparse dicts {flat index: coeff} with at most
    two entries.  Returns (kept indices, proj entries, dead set) where
    proj maps each flat index to (kept position, coeff) or None.
    """
    parent = list(range(ndim_flat))
    weight = [field.one()] * ndim_flat  # elem = weight * value(parent)
    dead = [False] * ndim_flat

    def find2(x):
        acc = field.one()
        while parent[x] != x:
            acc = field.mul(acc, weight[x])
            x = parent[x]
        return x, acc

    def union(x, cx, y, cy):
        # relation cx * x + cy * y = 0  =>  x = (-cy/cx) * y
        rx, wx = find2(x)
        ry, wy = find2(y)
        lam = field.neg(field.mul(field.inv(cx), cy))  # x = lam y
        # wx * rx-value: x = wx * rx ; y = wy * ry
        if rx == ry:
            # wx * rx = lam * wy * rx -> (wx - lam wy) rx = 0
            if not field.is_zero(field.sub(wx, field.mul(lam, wy))):
                dead[rx] = True
            return
        # attach larger root under smaller for determinism
        if rx < ry:
            # ry = (wy^{-1} lam^{-1} wx) rx
            parent[ry] = rx
            weight[ry] = field.mul(field.inv(field.mul(lam, wy)), wx)
            if dead[ry]:
                dead[rx] = True
        else:
            parent[rx] = ry
            weight[rx] = field.mul(field.inv(wx), field.mul(lam, wy))
            if dead[rx]:
                dead[ry] = True

    def kill(x):
        r, _ = find2(x)
        dead[r] = True

    for rel in relations:
        items = [(k, c) for k, c in rel.items() if not field.is_zero(c)]
        if not items:
            continue
        if len(items) == 1:
            kill(items[0][0])
        elif len(items) == 2:
            (x, cx), (y, cy) = items
            union(x, cx, y, cy)
        else:
            return None  # not binomial after all
    kept = []
    for x in range(ndim_flat):
        r, _ = find2(x)
        if r == x and not dead[r]:
            kept.append(x)
    posmap = {x: t for t, x in enumerate(kept)}
    proj_entries = []
    for x in range(ndim_flat):
        r, w = find2(x)
        if dead[r]:
            proj_entries.append(None)
        else:
            proj_entries.append((posmap[r], w))
    return kept, proj_entries


def tensor_over_algebra(m: DgBimodule, n: DgBimodule, name=None):
    """Relative composition m o_B n over the shared middle algebra B.

    Computed as the cokernel of  m(x)B(x)n -> m(x)n,
    x(x)b(x)y -> xb(x)y - x(x)by, never via resolutions.
    """
    q = tensor_over_algebra_data(m, n, name)
    return q.module


def tensor_over_algebra_data(m: DgBimodule, n: DgBimodule, name=None) -> QuotientData:
    if m.right_alg.uid != n.left_alg.uid:
        raise StructuralError(
            f"middle algebras differ: {m.right_alg.name} vs {n.left_alg.name}")
    from .words import realize
    rw = realize(((m, 0), (n, 0)))
    return QuotientData(rw.module, rw.pi, rw.sigma)


def cokernel(fmap: BimoduleMap, name=None):
    """Cokernel of a closed degree-0 map, with the projection.

    Returns (Q, proj: BimoduleMap target -> Q).
    """
    if fmap.degree != 0:
        raise StructuralError("cokernel needs a degree-0 map")
    if not fmap.is_closed():
        raise StructuralError("cokernel needs a closed map")
    f = fmap.source.field
    vectors = [fmap.matrix.col(j) for j in range(fmap.source.dim)]
    vectors = [v for v in vectors if any(not f.is_zero(c) for c in v)]
    qd = quotient_by_span(fmap.target, vectors, name=name or f"coker({fmap.source.name}->{fmap.target.name})")
    proj = BimoduleMap(fmap.target, qd.module, 0, qd.proj)
    return qd.module, proj


def split_idempotent(e: BimoduleMap, name=None):
    """Split a closed degree-0 idempotent: returns (image, incl, proj)."""
    if e.source.uid != e.target.uid or e.degree != 0:
        raise StructuralError("idempotent must be a degree-0 endomorphism")
    if not e.is_closed():
        raise StructuralError("idempotent must be closed")
    if e.matrix * e.matrix != e.matrix:
        raise StructuralError("not an idempotent")
    m = e.source
    f = m.field
    im = image_basis(e.matrix)
    r = len(im)
    u = Matrix.from_rows(f, im).transpose() if r else Matrix.zero(f, m.dim, 0)
    # e = U W with U injective; then W U = id
    from .linalg import solve_many
    w = solve_many(u, e.matrix) if r else Matrix.zero(f, 0, m.dim)
    if w is None:
        raise StructuralError("failed to factor idempotent")
    # each echelon image vector must be degree-homogeneous
    degs = []
    labels = []
    for t in range(r):
        col = [im[t][j] for j in range(m.dim)]
        nz = [j for j, c in enumerate(col) if not f.is_zero(c)]
        dset = {m.space.degrees[j] for j in nz}
        if len(dset) != 1:
            raise StructuralError("idempotent image basis is not homogeneous")
        degs.append(dset.pop())
        labels.append(f"{m.name}.e{t}")
    space = GradedSpace(f, list(zip(labels, degs)))
    left = {}
    right = {}
    for a in range(m.left_alg.dim):
        mat = w * m.left_matrix(a) * u
        for j in range(r):
            entry = {k: mat[k, j] for k in range(r) if not f.is_zero(mat[k, j])}
            if entry:
                left[(a, j)] = entry
    for b in range(m.right_alg.dim):
        mat = w * m.right_matrix(b) * u
        for j in range(r):
            entry = {k: mat[k, j] for k in range(r) if not f.is_zero(mat[k, j])}
            if entry:
                right[(b, j)] = entry
    diff = w * m.diff * u
    q = DgBimodule(name or f"{m.name}_e", m.left_alg, m.right_alg, space, left, right, diff)
    incl = BimoduleMap(q, m, 0, u)
    proj = BimoduleMap(m, q, 0, w)
    return q, incl, proj


# -- Hom complexes ------------------------------------------------------


class HomComplex:
    """The complex of bimodule maps m -> n, with a chosen ordered basis.

    Basis elements are BimoduleMap-compatible matrices; coords() expresses
    an arbitrary map of the right degree in this basis.
    """

    def __init__(self, source, target, entries):
        # entries: list of (degree, Matrix)
        self.source = source
        self.target = target
        self.entries = entries
        f = source.field
        self.space = GradedSpace(f, [(f"h{t}", d) for t, (d, _) in enumerate(entries)])
        self._solvers = {}
        self.diff = self._differential_matrix()

    @property
    def dim(self):
        return len(self.entries)

    def map_at(self, t) -> BimoduleMap:
        d, mat = self.entries[t]
        return BimoduleMap(self.source, self.target, d, mat)

    def indices_in_degree(self, d):
        return [t for t, (dd, _) in enumerate(self.entries) if dd == d]

    def from_coords(self, coefs) -> BimoduleMap | None:
        f = self.source.field
        nz = [(t, c) for t, c in enumerate(coefs) if not f.is_zero(c)]
        if not nz:
            return None
        d = self.entries[nz[0][0]][0]
        mat = Matrix.zero(f, self.target.dim, self.source.dim)
        for t, c in nz:
            dd, em = self.entries[t]
            if dd != d:
                raise StructuralError("mixing degrees in from_coords")
            mat = mat + em.scale(c)
        return BimoduleMap(self.source, self.target, d, mat)

    def coords(self, bmap: BimoduleMap):
        """Coefficient vector of a map in this basis (zeros outside its degree)."""
        f = self.source.field
        d = bmap.degree
        idx = self.indices_in_degree(d)
        out = [f.zero()] * self.dim
        if bmap.matrix.is_zero():
            return out
        if d not in self._solvers:
            cols = []
            for t in idx:
                _, em = self.entries[t]
                cols.append([em[i, j] for i in range(self.target.dim)
                             for j in range(self.source.dim)])
            big = Matrix.from_rows(f, cols).transpose() if cols else Matrix.zero(
                f, self.target.dim * self.source.dim, 0)
            self._solvers[d] = Solver(big)
        vec = [bmap.matrix[i, j] for i in range(self.target.dim)
               for j in range(self.source.dim)]
        sol = self._solvers[d].solve(vec)
        if sol is None:
            raise StructuralError("map is not in the Hom basis span (not a bimodule map?)")
        for t, c in zip(idx, sol):
            out[t] = c
        return out

    def _differential_matrix(self):
        f = self.source.field
        d = Matrix.zero(f, self.dim, self.dim)
        for t in range(self.dim):
            img = self.map_at(t).differential()
            if img.matrix.is_zero():
                continue
            coefs = self.coords(img)
            for s, c in enumerate(coefs):
                d.data[s][t] = c
        return d

    def dg_space(self):
        from .graded import DgSpace
        return DgSpace(self.space, self.diff, check=False)


def hom_complex(m: DgBimodule, n: DgBimodule) -> HomComplex:
    """All bimodule maps m -> n, degree by degree, as a dg space.

    Solved as a constraint kernel; when both algebras carry idempotent
    weight data the unknowns are restricted to weight-diagonal entries.
    """
    if m.left_alg.uid != n.left_alg.uid or m.right_alg.uid != n.right_alg.uid:
        raise StructuralError("hom_complex needs matching algebra pairs")
    f = m.field
    A, B = m.left_alg, m.right_alg
    mw_l, mw_r = m._weights()
    nw_l, nw_r = n._weights()
    use_weights = all(w is not None for w in (mw_l, mw_r, nw_l, nw_r))

    entries = []
    if m.dim == 0 or n.dim == 0:
        return HomComplex(m, n, entries)
    degrees = sorted({dn - dm for dm in m.space.degrees for dn in n.space.degrees})
    for d in degrees:
        unknowns = []
        for q in range(m.dim):
            for p in range(n.dim):
                if n.space.degrees[p] != m.space.degrees[q] + d:
                    continue
                if use_weights and (mw_l[q] != nw_l[p] or mw_r[q] != nw_r[p]):
                    continue
                unknowns.append((p, q))
        if not unknowns:
            continue
        upos = {u: t for t, u in enumerate(unknowns)}
        rows = []

        # constraint: f(a.x_q) - sign * a.f(x_q) = 0, one row per target index
        def add_rows(alg, act_m, act_n, is_left):
            for a in range(alg.dim):
                adeg = alg.space.degrees[a]
                sgn = f.one()
                if is_left and (d * adeg) % 2 != 0:
                    sgn = f.neg(f.one())
                for q in range(m.dim):
                    row_by_r = {}
                    for qq, c in act_m(a, q).items():  # a.x_q = sum c x_qq
                        for p in range(n.dim):
                            t = upos.get((p, qq))
                            if t is not None:
                                row_by_r.setdefault(p, {})
                                row_by_r[p][t] = f.add(row_by_r[p].get(t, f.zero()), c)
                    for p in range(n.dim):
                        t = upos.get((p, q))
                        if t is None:
                            continue
                        for r, c in act_n(a, p).items():  # a.y_p = sum c y_r
                            row_by_r.setdefault(r, {})
                            row_by_r[r][t] = f.sub(row_by_r[r].get(t, f.zero()), f.mul(sgn, c))
                    for r in sorted(row_by_r):
                        if row_by_r[r]:
                            rows.append(row_by_r[r])

        add_rows(A, lambda a, q: m.left_action.get((a, q), {}),
                 lambda a, p: n.left_action.get((a, p), {}), True)
        add_rows(B, lambda b, q: m.right_action.get((b, q), {}),
                 lambda b, p: n.right_action.get((b, p), {}), False)

        if rows:
            mat = Matrix.zero(f, len(rows), len(unknowns))
            for ridx, rowmap in enumerate(rows):
                for t, c in rowmap.items():
                    mat.data[ridx][t] = c
            ker = kernel_basis(mat)
        else:
            ker = [[f.one() if s == t else f.zero() for s in range(len(unknowns))]
                   for t in range(len(unknowns))]
        for v in ker:
            em = Matrix.zero(f, n.dim, m.dim)
            for t, c in enumerate(v):
                if not f.is_zero(c):
                    p, q = unknowns[t]
                    em.data[p][q] = c
            entries.append((d, em))
    return HomComplex(m, n, entries)

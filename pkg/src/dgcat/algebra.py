"""Finite-dimensional dg algebras with validated axioms.

An algebra is a labeled graded basis, a sparse multiplication table, a
unit vector and a degree +1 differential.  Constructors cover path
algebras with relations (fixed-order noncommutative rewriting) and
finite products.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

from .graded import GradedSpace
from .linalg import Matrix

_uid_counter = itertools.count()


class StructuralError(ValueError):
    """Malformed tables; distinct from an axiom failure."""


@dataclass
class AlgebraReport:
    passed: bool
    violations: list = dc_field(default_factory=list)

    def first(self):
        return self.violations[0] if self.violations else None


class DgAlgebra:
    """space + unit + multiplication table + differential.

    mult is sparse: mult[(i, j)] = {k: coeff} meaning b_i * b_j = sum coeff * b_k.
    idempotents, when present, is a list of degree-0 closed orthogonal
    idempotent vectors used to block Hom computations (vertex idempotents
    for path algebras, central idempotents for products).
    """

    def __init__(self, name, space: GradedSpace, unit, mult, diff: Matrix,
                 idempotents=None):
        self.uid = next(_uid_counter)
        self.name = name
        self.space = space
        self.unit = list(unit)
        self.mult = mult
        self.diff = diff
        self.idempotents = idempotents
        f = space.field
        if len(self.unit) != space.dim:
            raise StructuralError("unit vector length mismatch")
        if (diff.rows, diff.cols) != (space.dim, space.dim):
            raise StructuralError("differential shape mismatch")
        for (i, j), terms in mult.items():
            if not (0 <= i < space.dim and 0 <= j < space.dim):
                raise StructuralError("multiplication index out of range")
            for k in terms:
                if not (0 <= k < space.dim):
                    raise StructuralError("multiplication target out of range")
        self._monomial = all(
            sum(1 for c in terms.values() if not f.is_zero(c)) <= 1
            for terms in mult.values())

    # -- basic structure ---------------------------------------------

    @property
    def field(self):
        return self.space.field

    @property
    def dim(self):
        return self.space.dim

    @property
    def is_monomial(self):
        """True when every product of basis elements is a scalar times a basis element."""
        return self._monomial

    def mul_basis(self, i, j):
        return self.mult.get((i, j), {})

    def mul_vec(self, u, v):
        f = self.field
        out = [f.zero()] * self.dim
        for i, a in enumerate(u):
            if f.is_zero(a):
                continue
            for j, b in enumerate(v):
                if f.is_zero(b):
                    continue
                ab = f.mul(a, b)
                for k, c in self.mul_basis(i, j).items():
                    out[k] = f.add(out[k], f.mul(ab, c))
        return out

    def basis_vector(self, i):
        f = self.field
        v = [f.zero()] * self.dim
        v[i] = f.one()
        return v

    def left_mult_matrix(self, i):
        """Matrix of left multiplication by basis element i."""
        f = self.field
        m = Matrix.zero(f, self.dim, self.dim)
        for j in range(self.dim):
            for k, c in self.mul_basis(i, j).items():
                m.data[k][j] = f.add(m.data[k][j], c)
        return m

    def right_mult_matrix(self, i):
        f = self.field
        m = Matrix.zero(f, self.dim, self.dim)
        for j in range(self.dim):
            for k, c in self.mul_basis(j, i).items():
                m.data[k][j] = f.add(m.data[k][j], c)
        return m

    def __repr__(self):
        return f"DgAlgebra({self.name}, dim={self.dim})"


def check_dg_algebra(a: DgAlgebra) -> AlgebraReport:
    """Exhaustive axiom check over the basis; first witness per axiom."""
    f = a.field
    deg = a.space.degrees
    lab = a.space.labels
    violations = []

    def report(axiom, witness):
        if not any(v[0] == axiom for v in violations):
            violations.append((axiom, witness))

    # graded multiplication
    for (i, j), terms in sorted(a.mult.items()):
        for k, c in terms.items():
            if not f.is_zero(c) and deg[k] != deg[i] + deg[j]:
                report("graded-multiplication", (lab[i], lab[j], lab[k]))

    # unit: degree 0, closed, two-sided
    for i, c in enumerate(a.unit):
        if not f.is_zero(c) and deg[i] != 0:
            report("unit-degree", (lab[i],))
    du = a.diff.apply(a.unit)
    if any(not f.is_zero(c) for c in du):
        report("unit-closed", ())
    for i in range(a.dim):
        e = a.basis_vector(i)
        if a.mul_vec(a.unit, e) != e:
            report("unit-left", (lab[i],))
        if a.mul_vec(e, a.unit) != e:
            report("unit-right", (lab[i],))

    # associativity
    for i in range(a.dim):
        ei = a.basis_vector(i)
        for j in range(a.dim):
            ej = a.basis_vector(j)
            ij = a.mul_vec(ei, ej)
            for k in range(a.dim):
                ek = a.basis_vector(k)
                lhs = a.mul_vec(ij, ek)
                rhs = a.mul_vec(ei, a.mul_vec(ej, ek))
                if lhs != rhs:
                    report("associativity", (lab[i], lab[j], lab[k]))
                    break
            else:
                continue
            break
        else:
            continue
        break

    # differential: degree +1 and square zero
    for i in range(a.dim):
        for j in range(a.dim):
            if not f.is_zero(a.diff[i, j]) and deg[i] != deg[j] + 1:
                report("differential-degree", (lab[j], lab[i]))
    if not (a.diff * a.diff).is_zero():
        report("differential-squared", ())

    # Leibniz on basis pairs
    for i in range(a.dim):
        ei = a.basis_vector(i)
        dei = a.diff.apply(ei)
        sign = f.one() if deg[i] % 2 == 0 else f.neg(f.one())
        for j in range(a.dim):
            ej = a.basis_vector(j)
            lhs = a.diff.apply(a.mul_vec(ei, ej))
            rhs = a.mul_vec(dei, ej)
            term2 = a.mul_vec(ei, a.diff.apply(ej))
            rhs = [f.add(x, f.mul(sign, y)) for x, y in zip(rhs, term2)]
            if lhs != rhs:
                report("leibniz", (lab[i], lab[j]))

    return AlgebraReport(passed=not violations, violations=violations)


# -- constructors ------------------------------------------------------


def trivial_algebra(field, name="k"):
    """The ground field as a one-dimensional dg algebra."""
    space = GradedSpace(field, [("e", 0)])
    return DgAlgebra(name, space, [field.one()], {(0, 0): {0: field.one()}},
                     Matrix.zero(field, 1, 1), idempotents=[[field.one()]])


class Quiver:
    def __init__(self, vertices, arrows):
        """arrows: list of (name, source_vertex, target_vertex)."""
        self.vertices = list(vertices)
        self.arrows = list(arrows)
        names = [a[0] for a in arrows]
        if len(set(names)) != len(names):
            raise StructuralError("duplicate arrow names")
        for _, s, t in arrows:
            if s not in self.vertices or t not in self.vertices:
                raise StructuralError("arrow endpoint not a vertex")


def _path_start_end(quiver, path, start):
    v = start
    for a in path:
        name, s, t = quiver.arrows[a]
        if s != v:
            return None
        v = t
    return v


def path_algebra(quiver: Quiver, relations=(), degrees=None, field=None,
                 name="path", max_length=16):
    """Quotient of the path algebra of a quiver by homogeneous relations.

    Paths compose by concatenation: for paths p ending where q starts, the
    product p*q is the path running first through p, then through q.
    relations: list of [(coeff, (arrow_name, ...)), ...]; each relation is
    oriented so its largest path (length, then arrow order) rewrites to
    the rest.  The quotient must be finite-dimensional; path enumeration
    is capped at max_length.
    """
    from .field import QQ
    if field is None:
        field = QQ
    degrees = degrees or {}
    arrow_index = {a[0]: i for i, a in enumerate(quiver.arrows)}
    arrow_deg = [int(degrees.get(a[0], 0)) for a in quiver.arrows]

    def path_deg(path):
        return sum(arrow_deg[a] for a in path)

    def path_key(path):
        return (len(path), path)

    # orient relations into rewrite rules: leading word -> lower terms
    rules = {}
    for rel in relations:
        terms = [(field.of_int(c) if isinstance(c, int) else c, tuple(arrow_index[n] for n in p))
                 for c, p in rel]
        terms = [(c, p) for c, p in terms if not field.is_zero(c)]
        if not terms:
            continue
        starts = set()
        ends = set()
        degs = set()
        for _, p in terms:
            if not p:
                raise StructuralError("relations must involve paths of length >= 1")
            starts.add(quiver.arrows[p[0]][1])
            ends.add(quiver.arrows[p[-1]][2])
            degs.add(path_deg(p))
        if len(starts) > 1 or len(ends) > 1 or len(degs) > 1:
            raise StructuralError("relation is not homogeneous")
        terms.sort(key=lambda t: path_key(t[1]), reverse=True)
        lead_c, lead_p = terms[0]
        inv = field.inv(lead_c)
        rhs = [(field.neg(field.mul(inv, c)), p) for c, p in terms[1:]]
        if lead_p in rules:
            raise StructuralError("conflicting relations with the same leading word")
        rules[lead_p] = rhs

    def reduce_path(path):
        """Rewrite one path to a dict {normal path: coeff}."""
        agenda = [(field.one(), tuple(path))]
        out = {}
        while agenda:
            c, p = agenda.pop()
            hit = False
            for i in range(len(p)):
                for lead, rhs in rules.items():
                    L = len(lead)
                    if p[i:i + L] == lead:
                        for rc, rp in rhs:
                            agenda.append((field.mul(c, rc), p[:i] + rp + p[i + L:]))
                        hit = True
                        break
                if hit:
                    break
            if not hit:
                out[p] = field.add(out.get(p, field.zero()), c)
        return {p: c for p, c in out.items() if not field.is_zero(c)}

    # enumerate normal-form paths by length
    basis_paths = []  # (start_vertex, path tuple)
    for v in quiver.vertices:
        basis_paths.append((v, ()))
    frontier = [(v, ()) for v in quiver.vertices]
    length = 0
    while frontier:
        length += 1
        if length > max_length:
            raise StructuralError(
                f"path length cap {max_length} exceeded; quotient looks infinite-dimensional")
        new_frontier = []
        for v, p in frontier:
            end = _path_start_end(quiver, p, v)
            for ai, (an, s, t) in enumerate(quiver.arrows):
                if s != end:
                    continue
                q = p + (ai,)
                red = reduce_path(q)
                if list(red.keys()) == [q]:
                    new_frontier.append((v, q))
        basis_paths.extend(sorted(new_frontier, key=lambda vp: (vp[1],)))
        frontier = new_frontier

    def label(v, p):
        if not p:
            return f"e{v}"
        verts = [v] + [quiver.arrows[a][2] for a in p]
        return "(" + "|".join(str(u) for u in verts) + ")"

    space = GradedSpace(field, [(label(v, p), path_deg(p)) for v, p in basis_paths])
    index = {(v, p): i for i, (v, p) in enumerate(basis_paths)}

    mult = {}
    for i, (v1, p) in enumerate(basis_paths):
        end1 = _path_start_end(quiver, p, v1)
        for j, (v2, q) in enumerate(basis_paths):
            if end1 != v2:
                continue
            red = reduce_path(p + q)
            terms = {}
            for rp, c in red.items():
                key = (v1, rp)
                if key not in index:
                    raise StructuralError("reduction produced a non-basis path; relations not confluent")
                terms[index[key]] = c
            if terms:
                mult[(i, j)] = terms

    unit = [field.zero()] * space.dim
    idem = []
    for v in quiver.vertices:
        ev = [field.zero()] * space.dim
        ev[index[(v, ())]] = field.one()
        unit[index[(v, ())]] = field.one()
        idem.append(ev)

    return DgAlgebra(name, space, unit, mult, Matrix.zero(field, space.dim, space.dim),
                     idempotents=idem)


def with_diff(a: DgAlgebra, entries, name=None):
    """Copy of a with differential given by (source_label, target_label, coeff)."""
    f = a.field
    d = Matrix.zero(f, a.dim, a.dim)
    for src, dst, c in entries:
        i = a.space.index(src)
        k = a.space.index(dst)
        d.data[k][i] = f.add(d.data[k][i], c if not isinstance(c, int) else f.of_int(c))
    return DgAlgebra(name or a.name, a.space, a.unit, a.mult, d, idempotents=a.idempotents)


def product_algebra(factors, name=None):
    """Finite product, block-diagonal multiplication and differential.

    The per-factor units become central orthogonal idempotents.
    """
    if not factors:
        raise StructuralError("empty product")
    field = factors[0].field
    if any(a.field != field for a in factors):
        raise StructuralError("product factors over different fields")
    if len(factors) == 1:
        return factors[0]
    basis = []
    offsets = []
    off = 0
    for idx, a in enumerate(factors):
        offsets.append(off)
        for lbl, d in a.space.basis():
            basis.append((f"{a.name}.{lbl}" if len(factors) > 1 else lbl, d))
        off += a.dim
    space = GradedSpace(field, basis)
    dim = space.dim
    mult = {}
    diff = Matrix.zero(field, dim, dim)
    unit = [field.zero()] * dim
    idem = []
    for a, off in zip(factors, offsets):
        for (i, j), terms in a.mult.items():
            mult[(i + off, j + off)] = {k + off: c for k, c in terms.items()}
        for i in range(a.dim):
            for k in range(a.dim):
                v = a.diff[k, i]
                if not field.is_zero(v):
                    diff.data[k + off][i + off] = v
        ev = [field.zero()] * dim
        for i, c in enumerate(a.unit):
            unit[i + off] = c
            ev[i + off] = c
        idem.append(ev)
    pname = name or ("x".join(a.name for a in factors))
    return DgAlgebra(pname, space, unit, mult, diff, idempotents=idem)


def dual_numbers(field, degree=0, name="k[x]/(x2)", differential=False):
    """k[x]/(x^2) with |x| = degree; optionally with d(x) = 1.

    With degree=-1 and differential=True this is the acyclic algebra D.
    """
    space = GradedSpace(field, [("e", 0), ("x", degree)])
    one = field.one()
    mult = {(0, 0): {0: one}, (0, 1): {1: one}, (1, 0): {1: one}}
    diff = Matrix.zero(field, 2, 2)
    if differential:
        if degree != -1:
            raise StructuralError("d(x)=1 needs |x| = -1")
        diff.data[0][1] = one
    return DgAlgebra(name, space, [one, field.zero()], mult, diff,
                     idempotents=[[one, field.zero()]])

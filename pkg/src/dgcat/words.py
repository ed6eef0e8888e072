"""Flattened tensor words of shifted bimodules.

Horizontal composition of 1-morphisms is tensoring over the middle
algebra.  To make it strictly associative on the nose, a composite
summand is stored as a *word*: a tuple of (generator bimodule, shift)
slots.  The realization of a word is the quotient of the full tuple
tensor space by all adjacent balancing relations, computed in one go;
since concatenation of words is associative, so is composition of the
realized summands, bytewise.

Words are normalized by deleting shift-0 identity slots, which makes
composition with an identity 1-morphism literally the identity.

The tuple space can be large, so the projection/section pair is stored
sparsely; dense matrices are materialized only on demand for small
instances.
"""

from __future__ import annotations

import itertools

from .algebra import StructuralError
from .bimodule import (
    DgBimodule, _monomial_tensor_quotient, quotient_by_span, shift_bimodule,
    tensor_over_k,
)
from .graded import GradedSpace
from .linalg import Matrix


def word_key(word):
    return tuple((g.uid, s) for g, s in word)


def normalize_word(word):
    """Drop shift-0 identity slots; keep a single one if nothing remains."""
    word = tuple(word)
    kept = tuple((g, s) for g, s in word if not (g.identity_of is not None and s == 0))
    if kept:
        return kept
    return (word[0],)


def word_name(word):
    parts = []
    for g, s in word:
        parts.append(g.name if s == 0 else f"{g.name}<{s}>")
    return "∘".join(parts)


class RealizedWord:
    """Quotient module of a word with sparse projection/section data.

    sigma_cols[q] = [(flat tuple index, coeff)]  (a section of pi)
    pi_cols[flat] = [(q, coeff)] or None when the class is dead
    """

    __slots__ = ("word", "module", "dims", "tdim", "sigma_cols", "pi_cols",
                 "_dense_pi", "_dense_sigma")

    def __init__(self, word, module, dims, sigma_cols, pi_cols):
        self.word = word
        self.module = module
        self.dims = dims
        self.tdim = 1
        for d in dims:
            self.tdim *= d
        self.sigma_cols = sigma_cols
        self.pi_cols = pi_cols
        self._dense_pi = None
        self._dense_sigma = None

    @property
    def qdim(self):
        return self.module.dim

    def pi_apply(self, sparse):
        """Project a sparse tuple-space vector {flat: coeff} to the quotient."""
        f = self.module.field
        out = [f.zero()] * self.qdim
        for flat, c in sparse.items():
            if f.is_zero(c):
                continue
            col = self.pi_cols[flat]
            if col is None:
                continue
            for q, w in col:
                out[q] = f.add(out[q], f.mul(w, c))
        return out

    @property
    def pi(self) -> Matrix:
        if self._dense_pi is None:
            f = self.module.field
            m = Matrix.zero(f, self.qdim, self.tdim)
            for flat, col in enumerate(self.pi_cols):
                if col is None:
                    continue
                for q, w in col:
                    m.data[q][flat] = f.add(m.data[q][flat], w)
            self._dense_pi = m
        return self._dense_pi

    @property
    def sigma(self) -> Matrix:
        if self._dense_sigma is None:
            f = self.module.field
            m = Matrix.zero(f, self.tdim, self.qdim)
            for q, col in enumerate(self.sigma_cols):
                for flat, w in col:
                    m.data[flat][q] = f.add(m.data[flat][q], w)
            self._dense_sigma = m
        return self._dense_sigma


_REALIZE_CACHE = {}


def realize(word) -> RealizedWord:
    word = tuple(word)
    if not word:
        raise StructuralError("empty tensor word")
    key = word_key(word)
    hit = _REALIZE_CACHE.get(key)
    if hit is not None:
        return hit
    out = _realize_uncached(word)
    _REALIZE_CACHE[key] = out
    return out


def _check_composable(word):
    for (g1, _), (g2, _) in zip(word, word[1:]):
        if g1.right_alg.uid != g2.left_alg.uid:
            raise StructuralError(
                f"non-composable word: {g1.name} ends at {g1.right_alg.name}, "
                f"{g2.name} starts at {g2.left_alg.name}")


def _strides_of(dims):
    strides = [1] * len(dims)
    for t in range(len(dims) - 2, -1, -1):
        strides[t] = strides[t + 1] * dims[t + 1]
    return strides


def _relations(shifted, dims, strides, field):
    """Adjacent balancing relations as sparse dicts {flat: coeff}."""
    relations = []
    nslots = len(shifted)
    for t in range(nslots - 1):
        mL, mR = shifted[t], shifted[t + 1]
        B = mL.right_alg
        other = [r for r in range(nslots) if r not in (t, t + 1)]
        ranges = [range(dims[r]) for r in other]
        pair_rels = []
        for b in range(B.dim):
            for i in range(mL.dim):
                xb = mL.right_action.get((b, i), {})
                for j in range(mR.dim):
                    by = mR.left_action.get((b, j), {})
                    if not xb and not by:
                        continue
                    base = {}
                    for k, c in xb.items():
                        base[(k, j)] = field.add(base.get((k, j), field.zero()), c)
                    for l, c in by.items():
                        base[(i, l)] = field.sub(base.get((i, l), field.zero()), c)
                    base = {kk: c for kk, c in base.items() if not field.is_zero(c)}
                    if base:
                        pair_rels.append(base)
        if not pair_rels:
            continue
        for rest in itertools.product(*ranges):
            tup = [0] * nslots
            for r, v in zip(other, rest):
                tup[r] = v
            offset = sum(v * strides[r] for r, v in zip(other, rest))
            st, su = strides[t], strides[t + 1]
            for base in pair_rels:
                rel = {}
                for (k, l), c in base.items():
                    rel[offset + k * st + l * su] = c
                relations.append(rel)
    return relations


def _realize_uncached(word):
    _check_composable(word)
    f = word[0][0].field
    shifted = [shift_bimodule(g, s) for g, s in word]
    if len(shifted) == 1:
        m = shifted[0]
        sigma_cols = [[(i, f.one())] for i in range(m.dim)]
        pi_cols = [[(i, f.one())] for i in range(m.dim)]
        return RealizedWord(word, m, (m.dim,), sigma_cols, pi_cols)

    dims = tuple(m.dim for m in shifted)
    strides = _strides_of(dims)
    total = 1
    for d in dims:
        total *= d

    def unflat(x):
        out = []
        for s in strides:
            out.append(x // s)
            x %= s
        return tuple(out)

    relations = _relations(shifted, dims, strides, f)
    monomial = all(m.is_monomial for m in shifted) and all(len(r) <= 2 for r in relations)

    if monomial:
        mono = _monomial_tensor_quotient(total, relations, f)
    else:
        mono = None
    if mono is None:
        if total > 40000:
            raise StructuralError(
                f"non-monomial tensor word of size {total} exceeds the dense fallback cap")
        return _realize_dense(word, shifted, dims, strides, total, relations, f)

    kept, proj_entries = mono
    pi_cols = [None if pe is None else [pe] for pe in proj_entries]
    sigma_cols = [[(x, f.one())] for x in kept]

    labels = []
    degrees = []
    seen = {}
    for x in kept:
        tup = unflat(x)
        lbl = "⊗".join(shifted[t].space.labels[i] for t, i in enumerate(tup))
        if lbl in seen:
            seen[lbl] += 1
            lbl = f"{lbl}#{seen[lbl]}"
        else:
            seen[lbl] = 0
        labels.append(lbl)
        degrees.append(sum(shifted[t].space.degrees[i] for t, i in enumerate(tup)))
    space = GradedSpace(f, list(zip(labels, degrees)))

    def project(sparse):
        out = {}
        for flat, c in sparse.items():
            pe = proj_entries[flat]
            if pe is None:
                continue
            pos, w = pe
            out[pos] = f.add(out.get(pos, f.zero()), f.mul(w, c))
        return {q: c for q, c in out.items() if not f.is_zero(c)}

    # structure maps assembled on the kept representatives
    left = {}
    right = {}
    A = shifted[0].left_alg
    C = shifted[-1].right_alg
    last = len(shifted) - 1
    for q, x in enumerate(kept):
        tup = unflat(x)
        base = x - tup[0] * strides[0]
        for a in range(A.dim):
            terms = shifted[0].left_action.get((a, tup[0]), {})
            if not terms:
                continue
            entry = project({base + k * strides[0]: c for k, c in terms.items()})
            if entry:
                left[(a, q)] = entry
        base_r = x - tup[last]
        for b in range(C.dim):
            terms = shifted[last].right_action.get((b, tup[last]), {})
            if not terms:
                continue
            entry = project({base_r + k: c for k, c in terms.items()})
            if entry:
                right[(b, q)] = entry

    diff = Matrix.zero(f, len(kept), len(kept))
    for q, x in enumerate(kept):
        tup = unflat(x)
        sparse = {}
        sign = f.one()
        for t in range(len(shifted)):
            dmat = shifted[t].diff
            col = tup[t]
            for k in range(dims[t]):
                c = dmat[k, col]
                if not f.is_zero(c):
                    y = x + (k - col) * strides[t]
                    sparse[y] = f.add(sparse.get(y, f.zero()), f.mul(sign, c))
            if shifted[t].space.degrees[col] % 2 != 0:
                sign = f.neg(sign)
        for qq, c in project(sparse).items():
            diff.data[qq][q] = c

    module = DgBimodule(word_name(word), A, C, space, left, right, diff)
    return RealizedWord(word, module, dims, sigma_cols, pi_cols)


def _realize_dense(word, shifted, dims, strides, total, relations, f):
    """rref-based fallback for non-monomial words (kept small)."""
    t_mod = shifted[0]
    for s in shifted[1:]:
        t_mod = tensor_over_k(t_mod, s)
    vectors = []
    for rel in relations:
        v = [f.zero()] * total
        for k, c in rel.items():
            v[k] = c
        vectors.append(v)
    qd = quotient_by_span(t_mod, vectors, name=word_name(word))
    sigma_cols = []
    for q in range(qd.module.dim):
        col = [(flat, qd.section[flat, q]) for flat in range(total)
               if not f.is_zero(qd.section[flat, q])]
        sigma_cols.append(col)
    pi_cols = []
    for flat in range(total):
        col = [(q, qd.proj[q, flat]) for q in range(qd.module.dim)
               if not f.is_zero(qd.proj[q, flat])]
        pi_cols.append(col if col else None)
    return RealizedWord(word, qd.module, dims, sigma_cols, pi_cols)


class _Lift:
    """sigma_tgt o f o pi_src between tuple spaces, computed columnwise."""

    def __init__(self, sub_src, sub_tgt, fmat: Matrix):
        self.rs = realize(tuple(sub_src))
        self.rt = realize(tuple(sub_tgt))
        self.f = fmat
        self.field = fmat.field
        self._cols = {}

    @property
    def src_tdim(self):
        return self.rs.tdim

    @property
    def tgt_tdim(self):
        return self.rt.tdim

    def col(self, i):
        """Sparse column: image of tuple-basis element i as [(flat, coeff)]."""
        hit = self._cols.get(i)
        if hit is not None:
            return hit
        f = self.field
        pcol = self.rs.pi_cols[i]
        out = {}
        if pcol is not None:
            for q, w in pcol:
                for r in range(self.f.rows):
                    c = self.f[r, q]
                    if f.is_zero(c):
                        continue
                    for flat, sw in self.rt.sigma_cols[r]:
                        out[flat] = f.add(out.get(flat, f.zero()),
                                          f.mul(f.mul(w, c), sw))
        res = [(flat, c) for flat, c in out.items() if not f.is_zero(c)]
        self._cols[i] = res
        return res


def apply_prefix(u_src, u_tgt, w, fmat: Matrix) -> Matrix:
    """Matrix of f (x) id_w : realize(u_src ++ w) -> realize(u_tgt ++ w).

    f is a matrix realize(u_src).module -> realize(u_tgt).module; no sign
    since nothing stands left of f.
    """
    src = tuple(u_src) + tuple(w)
    tgt = tuple(u_tgt) + tuple(w)
    r_src, r_tgt = realize(src), realize(tgt)
    lift = _Lift(tuple(u_src), tuple(u_tgt), fmat)
    f = fmat.field
    wdims = 1
    for g, s in w:
        wdims *= shift_bimodule(g, s).dim
    out = Matrix.zero(f, r_tgt.module.dim, r_src.module.dim)
    for col in range(r_src.module.dim):
        sparse = {}
        for x, c in r_src.sigma_cols[col]:
            i, j = divmod(x, wdims)
            for flat, v in lift.col(i):
                y = flat * wdims + j
                sparse[y] = f.add(sparse.get(y, f.zero()), f.mul(v, c))
        for r, c in enumerate(r_tgt.pi_apply(sparse)):
            out.data[r][col] = c
    return out


def apply_suffix(u, w_src, w_tgt, gmat: Matrix, gdeg: int) -> Matrix:
    """Matrix of id_u (x) g with the Koszul sign (-1)^{|g| deg(u-part)}."""
    src = tuple(u) + tuple(w_src)
    tgt = tuple(u) + tuple(w_tgt)
    r_src, r_tgt = realize(src), realize(tgt)
    lift = _Lift(tuple(w_src), tuple(w_tgt), gmat)
    f = gmat.field
    u_shifted = [shift_bimodule(g, s) for g, s in u]
    u_dims = [m.dim for m in u_shifted]
    u_strides = _strides_of(u_dims)

    parity_cache = {}

    def parity(x):
        hit = parity_cache.get(x)
        if hit is not None:
            return hit
        rest, par = x, 0
        for t, s in enumerate(u_strides):
            idx = rest // s
            rest %= s
            par += u_shifted[t].space.degrees[idx]
        par %= 2
        parity_cache[x] = par
        return par

    ws_total = lift.src_tdim
    wt_total = lift.tgt_tdim
    out = Matrix.zero(f, r_tgt.module.dim, r_src.module.dim)
    for col in range(r_src.module.dim):
        sparse = {}
        for x, c in r_src.sigma_cols[col]:
            i, j = divmod(x, ws_total)
            neg = (gdeg * parity(i)) % 2 != 0
            for flat, v in lift.col(j):
                y = i * wt_total + flat
                vv = f.mul(v, c)
                if neg:
                    vv = f.neg(vv)
                sparse[y] = f.add(sparse.get(y, f.zero()), vv)
        for r, c in enumerate(r_tgt.pi_apply(sparse)):
            out.data[r][col] = c
    return out


def merge_iso(raw):
    """Canonical iso realize(raw).module -> realize(normalize(raw)).module.

    Folds each dropped shift-0 identity slot into the next kept slot by
    the left action (trailing runs fold into the last kept slot by the
    right action); the balancing relations make this the identity on
    quotient classes, so no signs arise.
    """
    raw = tuple(raw)
    norm = normalize_word(raw)
    r_raw = realize(raw)
    if norm == raw:
        return norm, Matrix.identity(r_raw.module.field, r_raw.module.dim)
    r_norm = realize(norm)
    f = r_raw.module.field
    shifted = [shift_bimodule(g, s) for g, s in raw]
    dims = [m.dim for m in shifted]
    strides = _strides_of(dims)
    dropped = [t for t, (g, s) in enumerate(raw)
               if g.identity_of is not None and s == 0]
    keep = [t for t in range(len(raw)) if t not in dropped]
    if not keep:
        keep = [0]
        dropped = dropped[1:]
    norm_shifted = [shift_bimodule(g, s) for g, s in norm]
    norm_strides = _strides_of([m.dim for m in norm_shifted])
    last_kept = max(keep)
    interior = sorted([t for t in dropped if t < last_kept], reverse=True)
    trailing = sorted([t for t in dropped if t > last_kept])

    out = Matrix.zero(f, r_norm.module.dim, r_raw.module.dim)
    for col in range(r_raw.module.dim):
        sparse = {}
        for x, c0 in r_raw.sigma_cols[col]:
            rest = x
            tup = []
            for s in strides:
                tup.append(rest // s)
                rest %= s
            vec = {tuple(tup[t] for t in keep): c0}
            for t in interior:
                nxt = min(t2 for t2 in keep if t2 > t)
                kpos = keep.index(nxt)
                mod = shifted[nxt]
                newvec = {}
                for ktup, c in vec.items():
                    for k2, c2 in mod.left_action.get((tup[t], ktup[kpos]), {}).items():
                        nt = ktup[:kpos] + (k2,) + ktup[kpos + 1:]
                        newvec[nt] = f.add(newvec.get(nt, f.zero()), f.mul(c, c2))
                vec = newvec
            for t in trailing:
                kpos = keep.index(last_kept)
                mod = shifted[last_kept]
                newvec = {}
                for ktup, c in vec.items():
                    for k2, c2 in mod.right_action.get((tup[t], ktup[kpos]), {}).items():
                        nt = ktup[:kpos] + (k2,) + ktup[kpos + 1:]
                        newvec[nt] = f.add(newvec.get(nt, f.zero()), f.mul(c, c2))
                vec = newvec
            for ktup, c in vec.items():
                if f.is_zero(c):
                    continue
                y = sum(i * s for i, s in zip(ktup, norm_strides))
                sparse[y] = f.add(sparse.get(y, f.zero()), c)
        for r, c in enumerate(r_norm.pi_apply(sparse)):
            out.data[r][col] = c
    return norm, out

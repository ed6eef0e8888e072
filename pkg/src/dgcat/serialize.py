"""JSON (de)serialization for algebras, bimodules, twisted complexes,
morphisms and certificates.

Everything lives in a workspace: {"field": ..., "objects": {name: obj}}.
Coefficients are decimal strings ("a/b" rationals or residues), sparse
tables drop zeros, keys are emitted sorted; serialize(parse(file)) is
idempotent on the canonical form.
"""

from __future__ import annotations

import json

from .algebra import DgAlgebra, StructuralError
from .bimodule import DgBimodule
from .field import field_from_json, field_to_json
from .graded import GradedSpace
from .homotopy import Certificate
from .linalg import Matrix
from .twisted import TwistedComplex, TwistedMorphism


class ParseError(ValueError):
    pass


def _fmt(field, c):
    return field.format(c)


def _sparse_matrix(field, m: Matrix):
    out = []
    for j in range(m.cols):
        for i in range(m.rows):
            v = m[i, j]
            if not field.is_zero(v):
                out.append([j, i, _fmt(field, v)])
    return sorted(out)


def _matrix_from_sparse(field, rows, cols, entries):
    m = Matrix.zero(field, rows, cols)
    for j, i, c in entries:
        if not (0 <= i < rows and 0 <= j < cols):
            raise ParseError(f"matrix entry ({j},{i}) out of range")
        m.data[i][j] = field.add(m.data[i][j], field.parse(c))
    return m


def algebra_to_json(a: DgAlgebra):
    f = a.field
    mult = []
    for (i, j), terms in sorted(a.mult.items()):
        for k, c in sorted(terms.items()):
            if not f.is_zero(c):
                mult.append([i, j, k, _fmt(f, c)])
    out = {
        "kind": "algebra",
        "name": a.name,
        "basis": [{"name": l, "degree": d} for l, d in a.space.basis()],
        "unit": sorted([i, _fmt(f, c)] for i, c in enumerate(a.unit) if not f.is_zero(c)),
        "mult": mult,
        "diff": _sparse_matrix(f, a.diff),
    }
    if a.idempotents is not None:
        out["idempotents"] = [
            sorted([i, _fmt(f, c)] for i, c in enumerate(e) if not f.is_zero(c))
            for e in a.idempotents]
    return out


def algebra_from_json(field, data, name=None) -> DgAlgebra:
    try:
        space = GradedSpace(field, [(b["name"], int(b["degree"])) for b in data["basis"]])
        dim = space.dim
        unit = [field.zero()] * dim
        for i, c in data["unit"]:
            unit[i] = field.parse(c)
        mult = {}
        for i, j, k, c in data["mult"]:
            mult.setdefault((i, j), {})[k] = field.parse(c)
        diff = _matrix_from_sparse(field, dim, dim, data["diff"])
        idem = None
        if "idempotents" in data:
            idem = []
            for e in data["idempotents"]:
                v = [field.zero()] * dim
                for i, c in e:
                    v[i] = field.parse(c)
                idem.append(v)
        return DgAlgebra(name or data.get("name", "algebra"), space, unit, mult,
                         diff, idempotents=idem)
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ParseError(f"bad algebra data: {e}") from e


def bimodule_to_json(m: DgBimodule, algebra_names):
    f = m.field
    la = []
    for (a, j), terms in sorted(m.left_action.items()):
        for k, c in sorted(terms.items()):
            if not f.is_zero(c):
                la.append([a, j, k, _fmt(f, c)])
    ra = []
    for (b, j), terms in sorted(m.right_action.items()):
        for k, c in sorted(terms.items()):
            if not f.is_zero(c):
                ra.append([b, j, k, _fmt(f, c)])
    return {
        "kind": "bimodule",
        "name": m.name,
        "left": algebra_names[m.left_alg.uid],
        "right": algebra_names[m.right_alg.uid],
        "basis": [{"name": l, "degree": d} for l, d in m.space.basis()],
        "left_action": la,
        "right_action": ra,
        "diff": _sparse_matrix(f, m.diff),
        "identity_of": m.identity_of is not None,
    }


def bimodule_from_json(field, data, algebras, name=None) -> DgBimodule:
    try:
        left = algebras[data["left"]]
        right = algebras[data["right"]]
        space = GradedSpace(field, [(b["name"], int(b["degree"])) for b in data["basis"]])
        la = {}
        for a, j, k, c in data["left_action"]:
            la.setdefault((a, j), {})[k] = field.parse(c)
        ra = {}
        for b, j, k, c in data["right_action"]:
            ra.setdefault((b, j), {})[k] = field.parse(c)
        diff = _matrix_from_sparse(field, space.dim, space.dim, data["diff"])
        ident = left.uid if data.get("identity_of") and left.uid == right.uid else None
        return DgBimodule(name or data.get("name", "bimodule"), left, right,
                          space, la, ra, diff, identity_of=ident)
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ParseError(f"bad bimodule data: {e}") from e


def twisted_to_json(x: TwistedComplex, bimodule_names):
    f = x.field
    summands = []
    for w in x.words:
        if len(w) == 1:
            summands.append({"gen": bimodule_names[w[0][0].uid], "shift": w[0][1]})
        else:
            summands.append({"word": [{"gen": bimodule_names[g.uid], "shift": s}
                                      for g, s in w]})
    alpha = []
    for (k, l), m in sorted(x.alpha.items()):
        alpha.append([k, l, _sparse_matrix(f, m)])
    return {"kind": "twisted", "summands": summands, "alpha": alpha}


def twisted_from_json(field, data, bimodules) -> TwistedComplex:
    try:
        words = []
        for s in data["summands"]:
            if "word" in s:
                words.append(tuple((bimodules[t["gen"]], int(t["shift"]))
                                   for t in s["word"]))
            else:
                words.append(((bimodules[s["gen"]], int(s.get("shift", 0))),))
        if not words:
            raise ParseError("twisted complex needs a left/right algebra or a summand")
        left = words[0][0][0].left_alg
        right = words[0][-1][0].right_alg
        from .words import realize
        dims = [realize(w).module.dim for w in words]
        alpha = {}
        for k, l, entries in data["alpha"]:
            if not (0 <= k < l < len(words)):
                raise ParseError(f"alpha entry ({k},{l}) violates k < l")
            alpha[(k, l)] = _matrix_from_sparse(field, dims[k], dims[l], entries)
        return TwistedComplex(left, right, words, alpha)
    except ParseError:
        raise
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ParseError(f"bad twisted complex data: {e}") from e


def morphism_to_json(g: TwistedMorphism, bimodule_names):
    f = g.source.field
    comps = []
    for (n, m), mat in sorted(g.components.items()):
        comps.append([n, m, _sparse_matrix(f, mat)])
    return {
        "kind": "twisted_map",
        "degree": g.degree,
        "source": twisted_to_json(g.source, bimodule_names),
        "target": twisted_to_json(g.target, bimodule_names),
        "components": comps,
    }


def morphism_from_json(field, data, bimodules) -> TwistedMorphism:
    try:
        src = twisted_from_json(field, data["source"], bimodules)
        tgt = twisted_from_json(field, data["target"], bimodules)
        comps = {}
        for n, m, entries in data["components"]:
            comps[(n, m)] = _matrix_from_sparse(
                field, tgt.summand(n).dim, src.summand(m).dim, entries)
        return TwistedMorphism(src, tgt, int(data["degree"]), comps)
    except ParseError:
        raise
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise ParseError(f"bad morphism data: {e}") from e


def certificate_to_json(c: Certificate, bimodule_names):
    return {
        "kind": "certificate",
        "f": morphism_to_json(c.f, bimodule_names),
        "g": morphism_to_json(c.g, bimodule_names),
        "h_src": morphism_to_json(c.h_src, bimodule_names),
        "h_tgt": morphism_to_json(c.h_tgt, bimodule_names),
    }


def certificate_from_json(field, data, bimodules) -> Certificate:
    f = morphism_from_json(field, data["f"], bimodules)
    g = morphism_from_json(field, data["g"], bimodules)
    h_src = morphism_from_json(field, data["h_src"], bimodules)
    h_tgt = morphism_from_json(field, data["h_tgt"], bimodules)
    return Certificate(f, g, h_src, h_tgt)


# -- workspaces ----------------------------------------------------------


class Workspace:
    """Named algebras, bimodules, complexes and certificates over one field."""

    def __init__(self, field):
        self.field = field
        self.algebras = {}
        self.bimodules = {}
        self.twisted = {}
        self.morphisms = {}
        self.certificates = {}

    def names(self):
        out = []
        for kind, d in (("algebra", self.algebras), ("bimodule", self.bimodules),
                        ("twisted", self.twisted), ("twisted_map", self.morphisms),
                        ("certificate", self.certificates)):
            out.extend((name, kind) for name in sorted(d))
        return out

    def add_algebra(self, name, a):
        if name in self.algebras:
            raise StructuralError(f"duplicate algebra name {name}")
        self.algebras[name] = a

    def add_bimodule(self, name, m):
        if name in self.bimodules:
            raise StructuralError(f"duplicate bimodule name {name}")
        self.bimodules[name] = m


def _collect_bimodules(ws: Workspace, complexes):
    """Ensure every generator of the complexes is registered; return name maps."""
    algebra_names = {a.uid: n for n, a in ws.algebras.items()}
    bimodule_names = {m.uid: n for n, m in ws.bimodules.items()}

    def add_algebra(a):
        if a.uid in algebra_names:
            return
        base = a.name
        name = base
        t = 0
        while name in ws.algebras:
            t += 1
            name = f"{base}#{t}"
        ws.algebras[name] = a
        algebra_names[a.uid] = name

    def add_bimodule(m):
        if m.uid in bimodule_names:
            return
        add_algebra(m.left_alg)
        add_algebra(m.right_alg)
        base = m.name
        name = base
        t = 0
        while name in ws.bimodules:
            t += 1
            name = f"{base}#{t}"
        ws.bimodules[name] = m
        bimodule_names[m.uid] = name

    for x in complexes:
        for w in x.words:
            for g, _ in w:
                add_bimodule(g)
    return algebra_names, bimodule_names


def workspace_to_json(ws: Workspace):
    complexes = list(ws.twisted.values())
    for g in ws.morphisms.values():
        complexes.extend([g.source, g.target])
    for c in ws.certificates.values():
        complexes.extend([c.source, c.target])
    algebra_names, bimodule_names = _collect_bimodules(ws, complexes)
    objects = {}
    for name, a in ws.algebras.items():
        objects[name] = algebra_to_json(a)
    for name, m in ws.bimodules.items():
        objects[name] = bimodule_to_json(m, algebra_names)
    for name, x in ws.twisted.items():
        objects[name] = twisted_to_json(x, bimodule_names)
    for name, g in ws.morphisms.items():
        objects[name] = morphism_to_json(g, bimodule_names)
    for name, c in ws.certificates.items():
        objects[name] = certificate_to_json(c, bimodule_names)
    return {"field": field_to_json(ws.field), "objects": objects}


def workspace_from_json(data) -> Workspace:
    try:
        field = field_from_json(data["field"])
        objects = data.get("objects", {})
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"bad workspace: {e}") from e
    ws = Workspace(field)
    for name, obj in sorted(objects.items()):
        if obj.get("kind") == "algebra":
            ws.algebras[name] = algebra_from_json(field, obj, name=name)
    for name, obj in sorted(objects.items()):
        if obj.get("kind") == "bimodule":
            ws.bimodules[name] = bimodule_from_json(field, obj, ws.algebras, name=name)
    for name, obj in sorted(objects.items()):
        kind = obj.get("kind")
        if kind == "twisted":
            ws.twisted[name] = twisted_from_json(field, obj, ws.bimodules)
        elif kind == "twisted_map":
            ws.morphisms[name] = morphism_from_json(field, obj, ws.bimodules)
        elif kind == "certificate":
            ws.certificates[name] = certificate_from_json(field, obj, ws.bimodules)
        elif kind == "algebra" or kind == "bimodule":
            pass
        else:
            raise ParseError(f"object {name}: unknown kind {kind!r}")
    return ws


def load_workspace(path) -> Workspace:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e}") from e
    return workspace_from_json(data)


def dump_workspace(ws: Workspace, path=None):
    data = workspace_to_json(ws)
    text = json.dumps(data, indent=1, sort_keys=True, ensure_ascii=False)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text

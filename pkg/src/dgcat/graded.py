"""Graded vector spaces with labeled bases, and plain complexes.

A GradedSpace is an ordered basis of (label, degree) pairs over an exact
field.  A DgSpace adds a differential matrix; this is the carrier for
Hom-complexes and cohomology computations.
"""

from __future__ import annotations

from .linalg import Matrix


class GradedSpace:
    __slots__ = ("field", "labels", "degrees", "_index")

    def __init__(self, field, basis):
        """basis: iterable of (label, degree)."""
        self.field = field
        self.labels = tuple(lbl for lbl, _ in basis)
        self.degrees = tuple(int(d) for _, d in basis)
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("basis labels must be unique")
        self._index = {lbl: i for i, lbl in enumerate(self.labels)}

    @property
    def dim(self):
        return len(self.labels)

    def basis(self):
        return list(zip(self.labels, self.degrees))

    def index(self, label):
        return self._index[label]

    def degree(self, i):
        return self.degrees[i]

    def indices_in_degree(self, n):
        return [i for i, d in enumerate(self.degrees) if d == n]

    def degree_support(self):
        return sorted(set(self.degrees))

    def shifted(self, k, relabel=None):
        """Shift: element degrees drop by k ((V<1>)^n = V^(n+1))."""
        lab = self.labels if relabel is None else tuple(relabel(l) for l in self.labels)
        return GradedSpace(self.field, [(l, d - k) for l, d in zip(lab, self.degrees)])

    def __eq__(self, other):
        if not isinstance(other, GradedSpace):
            return NotImplemented
        return (self.field == other.field and self.labels == other.labels
                and self.degrees == other.degrees)

    def __repr__(self):
        return f"GradedSpace(dim={self.dim}, degrees={sorted(set(self.degrees))})"


class DgSpace:
    """A graded space together with a degree +1 differential."""

    __slots__ = ("space", "diff")

    def __init__(self, space: GradedSpace, diff: Matrix, check=True):
        self.space = space
        self.diff = diff
        if check:
            self.validate()

    def validate(self):
        n = self.space.dim
        f = self.space.field
        if (self.diff.rows, self.diff.cols) != (n, n):
            raise ValueError("differential shape mismatch")
        for i in range(n):
            for j in range(n):
                v = self.diff[i, j]
                if not f.is_zero(v) and self.space.degrees[i] != self.space.degrees[j] + 1:
                    raise ValueError(
                        f"differential entry {self.space.labels[j]} -> {self.space.labels[i]} "
                        f"does not raise degree by 1")
        if not (self.diff * self.diff).is_zero():
            raise ValueError("differential does not square to zero")

    @property
    def dim(self):
        return self.space.dim

    def restriction_to_degree(self, n):
        """Indices of basis elements in degree n."""
        return self.space.indices_in_degree(n)


def degree_selector(space: GradedSpace, n):
    """Inclusion matrix of the degree-n piece into the whole space."""
    idx = space.indices_in_degree(n)
    m = Matrix.zero(space.field, space.dim, len(idx))
    o = space.field.one()
    for col, i in enumerate(idx):
        m.data[i][col] = o
    return m

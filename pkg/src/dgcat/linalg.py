"""Dense exact matrices and Gaussian elimination.

Every question in the package bottoms out here.  Pivoting is
deterministic (first nonzero entry in column order), so kernels, images
and solutions are reproducible for a fixed input.
"""

from __future__ import annotations


class Matrix:
    """A rows x cols matrix over an exact field.

    Treated as immutable after construction; all operations return new
    matrices.
    """

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field, rows, cols, data):
        self.field = field
        self.rows = rows
        self.cols = cols
        self.data = data  # list of row lists
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ValueError("matrix data shape mismatch")

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(field, rows, cols):
        z = field.zero()
        return Matrix(field, rows, cols, [[z] * cols for _ in range(rows)])

    @staticmethod
    def identity(field, n):
        z, o = field.zero(), field.one()
        return Matrix(field, n, n, [[o if i == j else z for j in range(n)] for i in range(n)])

    @staticmethod
    def from_rows(field, rows_list):
        rows = len(rows_list)
        cols = len(rows_list[0]) if rows else 0
        return Matrix(field, rows, cols, [list(r) for r in rows_list])

    @staticmethod
    def from_entries(field, rows, cols, entries):
        """Sparse constructor: entries is an iterable of (i, j, value)."""
        m = [[field.zero()] * cols for _ in range(rows)]
        for i, j, v in entries:
            m[i][j] = field.add(m[i][j], v)
        return Matrix(field, rows, cols, m)

    @staticmethod
    def column(field, vec):
        return Matrix(field, len(vec), 1, [[v] for v in vec])

    # -- basic access --------------------------------------------------

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def row(self, i):
        return list(self.data[i])

    def col(self, j):
        return [self.data[i][j] for i in range(self.rows)]

    def is_zero(self):
        f = self.field
        return all(f.is_zero(v) for r in self.data for v in r)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        if (self.rows, self.cols) != (other.rows, other.cols):
            return False
        f = self.field
        return all(
            f.is_zero(f.sub(self.data[i][j], other.data[i][j]))
            for i in range(self.rows)
            for j in range(self.cols)
        )

    def __hash__(self):
        raise TypeError("matrices are not hashable")

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols} over {self.field})"

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        f = self.field
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in +")
        return Matrix(f, self.rows, self.cols,
                      [[f.add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)])

    def __sub__(self, other):
        f = self.field
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in -")
        return Matrix(f, self.rows, self.cols,
                      [[f.sub(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.data, other.data)])

    def __neg__(self):
        f = self.field
        return Matrix(f, self.rows, self.cols, [[f.neg(a) for a in r] for r in self.data])

    def scale(self, c):
        f = self.field
        return Matrix(f, self.rows, self.cols, [[f.mul(c, a) for a in r] for r in self.data])

    def __mul__(self, other):
        """Matrix product self * other."""
        f = self.field
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch in *: {self.cols} vs {other.rows}")
        zero = f.zero()
        out = [[zero] * other.cols for _ in range(self.rows)]
        for i in range(self.rows):
            ri = self.data[i]
            oi = out[i]
            for k in range(self.cols):
                a = ri[k]
                if f.is_zero(a):
                    continue
                rk = other.data[k]
                for j in range(other.cols):
                    b = rk[j]
                    if not f.is_zero(b):
                        oi[j] = f.add(oi[j], f.mul(a, b))
        return Matrix(f, self.rows, other.cols, out)

    def apply(self, vec):
        """Matrix-vector product (vec as list)."""
        f = self.field
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        out = []
        for i in range(self.rows):
            s = f.zero()
            ri = self.data[i]
            for j, v in enumerate(vec):
                if not f.is_zero(v) and not f.is_zero(ri[j]):
                    s = f.add(s, f.mul(ri[j], v))
            out.append(s)
        return out

    def transpose(self):
        return Matrix(self.field, self.cols, self.rows,
                      [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def hstack(self, other):
        if self.rows != other.rows:
            raise ValueError("hstack row mismatch")
        return Matrix(self.field, self.rows, self.cols + other.cols,
                      [self.data[i] + other.data[i] for i in range(self.rows)])

    def vstack(self, other):
        if self.cols != other.cols:
            raise ValueError("vstack col mismatch")
        return Matrix(self.field, self.rows + other.rows, self.cols,
                      [list(r) for r in self.data] + [list(r) for r in other.data])

    @staticmethod
    def block(field, blocks):
        """Assemble from a 2D list of matrices (None for zero blocks).

        Row heights / column widths are inferred; each row of blocks must
        contain at least one non-None entry per column position overall.
        """
        nbr = len(blocks)
        nbc = len(blocks[0]) if nbr else 0
        heights = [None] * nbr
        widths = [None] * nbc
        for i in range(nbr):
            for j in range(nbc):
                b = blocks[i][j]
                if b is not None:
                    if heights[i] is None:
                        heights[i] = b.rows
                    elif heights[i] != b.rows:
                        raise ValueError("inconsistent block heights")
                    if widths[j] is None:
                        widths[j] = b.cols
                    elif widths[j] != b.cols:
                        raise ValueError("inconsistent block widths")
        if any(h is None for h in heights) or any(w is None for w in widths):
            raise ValueError("cannot infer all block sizes")
        total_r, total_c = sum(heights), sum(widths)
        out = Matrix.zero(field, total_r, total_c)
        r0 = 0
        for i in range(nbr):
            c0 = 0
            for j in range(nbc):
                b = blocks[i][j]
                if b is not None:
                    for r in range(b.rows):
                        out.data[r0 + r][c0:c0 + b.cols] = list(b.data[r])
                c0 += widths[j]
            r0 += heights[i]
        return out


# -- elimination ------------------------------------------------------


def rref(m: Matrix):
    """Reduced row echelon form.

    Returns (R, pivots) where pivots is the list of pivot column indices.
    Deterministic: within a column the first nonzero row is the pivot.
    """
    f = m.field
    a = [list(r) for r in m.data]
    rows, cols = m.rows, m.cols
    pivots = []
    pr = 0
    for pc in range(cols):
        pivot_row = None
        for r in range(pr, rows):
            if not f.is_zero(a[r][pc]):
                pivot_row = r
                break
        if pivot_row is None:
            continue
        a[pr], a[pivot_row] = a[pivot_row], a[pr]
        inv = f.inv(a[pr][pc])
        a[pr] = [f.mul(inv, v) for v in a[pr]]
        for r in range(rows):
            if r != pr and not f.is_zero(a[r][pc]):
                c = a[r][pc]
                arow, prow = a[r], a[pr]
                for j in range(pc, cols):
                    if not f.is_zero(prow[j]):
                        arow[j] = f.sub(arow[j], f.mul(c, prow[j]))
        pivots.append(pc)
        pr += 1
        if pr == rows:
            break
    return Matrix(f, rows, cols, a), pivots


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def kernel_basis(m: Matrix):
    """Echelon-normalized basis of the right kernel, as a list of vectors."""
    f = m.field
    r, pivots = rref(m)
    free = [j for j in range(m.cols) if j not in pivots]
    basis = []
    for fc in free:
        v = [f.zero()] * m.cols
        v[fc] = f.one()
        for i, pc in enumerate(pivots):
            v[pc] = f.neg(r.data[i][fc])
        basis.append(v)
    return basis


def image_basis(m: Matrix):
    """Echelon-normalized basis of the column space, as a list of vectors."""
    r, pivots = rref(m.transpose())
    return [r.row(i) for i in range(len(pivots))]


def rref_rank_kernel(m: Matrix):
    """The spec-facing bundle: (rank, kernel basis, image basis)."""
    k = kernel_basis(m)
    im = image_basis(m)
    return len(im), k, im


def solve_linear(m: Matrix, b):
    """Solve m x = b exactly; returns the solution vector or None.

    The solution is the echelon one: free variables are set to zero.
    """
    f = m.field
    if len(b) != m.rows:
        raise ValueError("rhs length mismatch")
    aug = m.hstack(Matrix.column(f, b))
    r, pivots = rref(aug)
    if m.cols in pivots:
        return None  # b not in the column span
    x = [f.zero()] * m.cols
    for i, pc in enumerate(pivots):
        x[pc] = r.data[i][m.cols]
    return x


def solve_many(m: Matrix, b_mat: Matrix):
    """Solve m X = B columnwise; returns X or None if any column fails."""
    f = m.field
    aug = m.hstack(b_mat)
    r, pivots = rref(aug)
    if any(p >= m.cols for p in pivots):
        return None
    out = Matrix.zero(f, m.cols, b_mat.cols)
    for i, pc in enumerate(pivots):
        for j in range(b_mat.cols):
            out.data[pc][j] = r.data[i][m.cols + j]
    return out


def invert(m: Matrix):
    """Exact inverse, or None if m is not square/invertible."""
    if m.rows != m.cols:
        return None
    x = solve_many(m, Matrix.identity(m.field, m.rows))
    if x is None:
        return None
    if m * x == Matrix.identity(m.field, m.rows) and x * m == Matrix.identity(m.field, m.rows):
        return x
    return None


class Solver:
    """Reusable elimination data for solving m X = b against a fixed m.

    Caches the rref of [m | I] so repeated solves cost one matrix-vector
    product each.
    """

    def __init__(self, m: Matrix):
        self.m = m
        self.field = m.field
        aug = m.hstack(Matrix.identity(m.field, m.rows))
        self._r, self._pivots = rref(aug)
        self._rank = len([p for p in self._pivots if p < m.cols])

    def solve(self, b):
        f = self.field
        if len(b) != self.m.rows:
            raise ValueError("rhs length mismatch")
        # y = L b where L is the recorded row transform
        x = [f.zero()] * self.m.cols
        for i, pc in enumerate(self._pivots):
            if pc >= self.m.cols:
                continue
            s = f.zero()
            row = self._r.data[i]
            for j in range(self.m.rows):
                c = row[self.m.cols + j]
                if not f.is_zero(c) and not f.is_zero(b[j]):
                    s = f.add(s, f.mul(c, b[j]))
            x[pc] = s
        # consistency check: rhs must lie in the column span
        for u, v in zip(self.m.apply(x), b):
            if not f.is_zero(f.sub(u, v)):
                return None
        return x


def random_matrix(field, rows, cols, rng, span=3):
    data = [[field.of_int(rng.randint(-span, span)) for _ in range(cols)] for _ in range(rows)]
    return Matrix(field, rows, cols, data)

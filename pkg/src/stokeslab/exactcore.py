"""Exact arithmetic: Gaussian rationals, directions on the circle, rational matrices.

Everything here is a pure value type.  Matrices are small and dense; the one
place where size matters (cellular differentials) goes through
:func:`rref_rows`, which works on sparse rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .errors import ParseError, ValidationError

__all__ = [
    "GaussianRational",
    "GR",
    "I_UNIT",
    "Ray",
    "QMatrix",
    "as_fraction",
    "parse_rational",
    "format_rational",
    "ray_normalize",
    "ray_cyclic_position",
    "dominance",
    "ccw_strictly_between",
    "rank_and_kernel",
    "solve_or_invert",
    "rref_rows",
    "column_basis",
    "coordinates",
    "intersect_spaces",
    "preimage_space",
    "extend_basis",
]


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``; ints are accepted as-is."""
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"rational must be a string, got {text!r}")
    s = text.strip()
    num, sep, den = s.partition("/")
    try:
        p = int(num)
        q = int(den) if sep else 1
    except ValueError:
        raise ParseError(f"malformed rational {text!r}") from None
    if q == 0:
        raise ParseError(f"zero denominator in {text!r}")
    return Fraction(p, q)


def format_rational(x) -> str:
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# Gaussian rationals


@dataclass(frozen=True)
class GaussianRational:
    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", as_fraction(self.re))
        object.__setattr__(self, "im", as_fraction(self.im))

    @classmethod
    def of(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            raise TypeError("floating complex numbers are not exact")
        if isinstance(value, (tuple, list)):
            if len(value) != 2:
                raise ParseError(f"Gaussian rational needs two parts, got {value!r}")
            return cls(as_fraction(value[0]), as_fraction(value[1]))
        return cls(as_fraction(value), Fraction(0))

    def __add__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.of(other) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        o = GaussianRational.of(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.of(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        q = self * o.conj()
        return GaussianRational(q.re / n, q.im / n)

    def conj(self):
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def sup_norm(self) -> Fraction:
        return max(abs(self.re), abs(self.im))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def to_doc(self):
        return [format_rational(self.re), format_rational(self.im)]

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def __repr__(self):
        if self.im == 0:
            return f"GR({self.re})"
        return f"GR({self.re}, {self.im})"


GR = GaussianRational
I_UNIT = GaussianRational(0, 1)


# ---------------------------------------------------------------------------
# Rays


@dataclass(frozen=True, order=False)
class Ray:
    """A direction e^{i theta}, stored as a primitive integer vector."""

    x: int
    y: int

    def __post_init__(self):
        if self.x == 0 and self.y == 0:
            raise ValidationError("zero direction")
        g = gcd(abs(self.x), abs(self.y))
        if g != 1:
            object.__setattr__(self, "x", self.x // g)
            object.__setattr__(self, "y", self.y // g)

    def antipode(self) -> "Ray":
        return Ray(-self.x, -self.y)

    def rot90(self) -> "Ray":
        return Ray(-self.y, self.x)

    def as_gr(self) -> GaussianRational:
        return GaussianRational(self.x, self.y)

    def key(self):
        return ray_cyclic_position(self)

    def sup_norm(self) -> int:
        return max(abs(self.x), abs(self.y))

    def to_doc(self):
        return [self.x, self.y]

    def __repr__(self):
        return f"Ray({self.x}, {self.y})"


def ray_normalize(z) -> Ray:
    """Primitive integer direction positively proportional to ``z``."""
    z = GaussianRational.of(z)
    if z.is_zero():
        raise ValidationError("zero direction")
    den = z.re.denominator * z.im.denominator // gcd(z.re.denominator, z.im.denominator)
    return Ray(int(z.re * den), int(z.im * den))


def ray_cyclic_position(u: Ray):
    """Exact sort key: counterclockwise angle from (1, 0), no floats."""
    x, y = u.x, u.y
    if x > 0 and y >= 0:
        return (0, Fraction(y, x))
    if x <= 0 and y > 0:
        return (1, Fraction(-x, y))
    if x < 0 and y <= 0:
        return (2, Fraction(y, x))
    return (3, Fraction(x, -y))


def ccw_strictly_between(a: Ray, w: Ray, b: Ray) -> bool:
    """True iff ``w`` lies in the open counterclockwise arc from ``a`` to ``b``.

    For ``a == b`` the arc is the whole circle minus ``a``.
    """
    ka, kw, kb = a.key(), w.key(), b.key()
    if kw == ka or kw == kb:
        return False
    if ka < kb:
        return ka < kw < kb
    return kw > ka or kw < kb


def dominance(c, c2, u: Ray) -> int:
    """Sign of Re[(c - c2) * conj(u)]; -1 means c <_u c2."""
    d = GaussianRational.of(c) - GaussianRational.of(c2)
    v = d.re * u.x + d.im * u.y
    return (v > 0) - (v < 0)


# ---------------------------------------------------------------------------
# Matrices


class QMatrix:
    """Immutable dense matrix over the rationals."""

    __slots__ = ("rows", "cols", "_data", "_hash")

    def __init__(self, data, rows=None, cols=None):
        if rows is not None and cols is not None and not data:
            if rows and cols:
                raise ValidationError("shape", "missing matrix entries")
            self.rows, self.cols = rows, cols
            self._data = tuple(() for _ in range(rows))
            self._hash = None
            return
        rows_t = tuple(tuple(as_fraction(x) for x in row) for row in data)
        r = len(rows_t)
        c = len(rows_t[0]) if r else (cols or 0)
        if any(len(row) != c for row in rows_t):
            raise ValidationError("shape", "ragged matrix rows")
        if rows is not None and rows != r:
            raise ValidationError("shape", f"expected {rows} rows, got {r}")
        if cols is not None and r and cols != c:
            raise ValidationError("shape", f"expected {cols} columns, got {c}")
        self.rows, self.cols = r, c
        self._data = rows_t
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, r, c):
        z = Fraction(0)
        if r == 0:
            return cls((), 0, c)
        return cls._raw(tuple(tuple(z for _ in range(c)) for _ in range(r)), r, c)

    @classmethod
    def identity(cls, n):
        one, z = Fraction(1), Fraction(0)
        if n == 0:
            return cls((), 0, 0)
        return cls._raw(tuple(tuple(one if i == j else z for j in range(n)) for i in range(n)), n, n)

    @classmethod
    def _raw(cls, rows_t, r, c):
        m = cls.__new__(cls)
        m.rows, m.cols, m._data, m._hash = r, c, rows_t, None
        return m

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int):
        columns = [tuple(as_fraction(x) for x in col) for col in columns]
        if not columns:
            return cls.zeros(nrows, 0)
        if any(len(col) != nrows for col in columns):
            raise ValidationError("shape", "column length mismatch")
        return cls._raw(tuple(tuple(col[i] for col in columns) for i in range(nrows)), nrows, len(columns))

    @classmethod
    def diag(cls, entries):
        entries = [as_fraction(e) for e in entries]
        n = len(entries)
        z = Fraction(0)
        return cls._raw(tuple(tuple(entries[i] if i == j else z for j in range(n)) for i in range(n)), n, n)

    @classmethod
    def block_diag(cls, blocks):
        blocks = list(blocks)
        r = sum(b.rows for b in blocks)
        c = sum(b.cols for b in blocks)
        out = [[Fraction(0)] * c for _ in range(r)]
        i0 = j0 = 0
        for b in blocks:
            for i in range(b.rows):
                out[i0 + i][j0:j0 + b.cols] = b._data[i]
            i0 += b.rows
            j0 += b.cols
        return cls._raw(tuple(tuple(row) for row in out), r, c)

    def hstack(self, other):
        if self.rows != other.rows:
            raise ValidationError("shape", "hstack row mismatch")
        return QMatrix._raw(tuple(a + b for a, b in zip(self._data, other._data)), self.rows, self.cols + other.cols)

    def vstack(self, other):
        if self.cols != other.cols:
            raise ValidationError("shape", "vstack column mismatch")
        return QMatrix._raw(self._data + other._data, self.rows + other.rows, self.cols)

    # access -------------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self._data[i][j]

    def row(self, i):
        return self._data[i]

    def col(self, j):
        return tuple(row[j] for row in self._data)

    def columns(self):
        return [self.col(j) for j in range(self.cols)]

    def tolist(self):
        return [list(row) for row in self._data]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]):
        return QMatrix._raw(tuple(tuple(self._data[i][j] for j in cols) for i in rows), len(rows), len(cols))

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def T(self):
        if self.rows == 0:
            return QMatrix.zeros(self.cols, 0)
        return QMatrix._raw(tuple(zip(*self._data)), self.cols, self.rows)

    # arithmetic ---------------------------------------------------------
    def __matmul__(self, other):
        if isinstance(other, QMatrix):
            if self.cols != other.cols and self.cols != other.rows:
                raise ValidationError("shape", f"cannot multiply {self.shape} by {other.shape}")
            if self.cols != other.rows:
                raise ValidationError("shape", f"cannot multiply {self.shape} by {other.shape}")
            if other.cols == 0 or self.rows == 0:
                return QMatrix.zeros(self.rows, other.cols)
            ocols = list(zip(*other._data)) if other.rows else [()] * other.cols
            z = Fraction(0)
            out = []
            for row in self._data:
                nz = [(k, a) for k, a in enumerate(row) if a]
                out.append(tuple(sum((a * col[k] for k, a in nz), z) for col in ocols))
            return QMatrix._raw(tuple(out), self.rows, other.cols)
        vec = tuple(as_fraction(x) for x in other)
        if len(vec) != self.cols:
            raise ValidationError("shape", "matrix-vector length mismatch")
        z = Fraction(0)
        return tuple(sum((a * v for a, v in zip(row, vec) if a and v), z) for row in self._data)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValidationError("shape", "addition shape mismatch")
        return QMatrix._raw(tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self._data, other._data)), self.rows, self.cols)

    def __sub__(self, other):
        if self.shape != other.shape:
            raise ValidationError("shape", "subtraction shape mismatch")
        return QMatrix._raw(tuple(tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(self._data, other._data)), self.rows, self.cols)

    def __neg__(self):
        return QMatrix._raw(tuple(tuple(-a for a in row) for row in self._data), self.rows, self.cols)

    def scale(self, s):
        s = as_fraction(s)
        return QMatrix._raw(tuple(tuple(s * a for a in row) for row in self._data), self.rows, self.cols)

    def __eq__(self, other):
        return isinstance(other, QMatrix) and self.shape == other.shape and self._data == other._data

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self._data))
        return self._hash

    def is_zero(self):
        return all(not a for row in self._data for a in row)

    def is_identity(self):
        return self.rows == self.cols and self == QMatrix.identity(self.rows)

    def __pow__(self, k: int):
        if self.rows != self.cols:
            raise ValidationError("shape", "power of non-square matrix")
        if k < 0:
            return self.inverse() ** (-k)
        out = QMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    # derived ------------------------------------------------------------
    def rank(self) -> int:
        return len(rref_rows(_sparse_rows(self), self.cols)[0])

    def det(self) -> Fraction:
        if self.rows != self.cols:
            raise ValidationError("shape", "determinant of non-square matrix")
        a = [list(r) for r in self._data]
        n = self.rows
        det = Fraction(1)
        for j in range(n):
            p = next((i for i in range(j, n) if a[i][j]), None)
            if p is None:
                return Fraction(0)
            if p != j:
                a[j], a[p] = a[p], a[j]
                det = -det
            piv = a[j][j]
            det *= piv
            for i in range(j + 1, n):
                f = a[i][j]
                if f:
                    f = f / piv
                    a[i] = [x - f * y for x, y in zip(a[i], a[j])]
        return det

    def inverse(self):
        return solve_or_invert(self)

    def is_invertible(self):
        return self.rows == self.cols and self.rank() == self.rows

    def to_doc(self):
        return [[format_rational(a) for a in row] for row in self._data]

    def __repr__(self):
        body = "; ".join(" ".join(str(a) for a in row) for row in self._data)
        return f"QMatrix({self.rows}x{self.cols}: [{body}])"


def _sparse_rows(m: QMatrix):
    return [{j: a for j, a in enumerate(row) if a} for row in m._data]


# ---------------------------------------------------------------------------
# Elimination


def rref_rows(rows: Iterable[dict], ncols: int):
    """Reduced row echelon form of sparse rows ``{col: value}``.

    Columns are scanned left to right; the pivot is the first remaining row
    (in input order) with a nonzero entry.  Returns ``(pivot_cols, pivot_rows)``
    with pivot rows normalized to 1 at their pivot and cleared elsewhere.
    """
    work = [dict(r) for r in rows if r]
    pivots = []
    prow = []
    # index column -> rows containing it for the remaining set
    remaining = work
    for col in range(ncols):
        idx = next((k for k, r in enumerate(remaining) if col in r), None)
        if idx is None:
            continue
        pr = remaining.pop(idx)
        inv = 1 / pr[col]
        if inv != 1:
            pr = {j: v * inv for j, v in pr.items()}
        for r in remaining:
            f = r.get(col)
            if f:
                for j, v in pr.items():
                    nv = r.get(j, 0) - f * v
                    if nv:
                        r[j] = nv
                    else:
                        r.pop(j, None)
        for r in prow:
            f = r.get(col)
            if f:
                for j, v in pr.items():
                    nv = r.get(j, 0) - f * v
                    if nv:
                        r[j] = nv
                    else:
                        r.pop(j, None)
        pivots.append(col)
        prow.append(pr)
        remaining = [r for r in remaining if r]
        if not remaining:
            break
    return pivots, prow


def kernel_from_rref(pivots, prow, ncols):
    piv_set = set(pivots)
    basis = []
    z = Fraction(0)
    for f in range(ncols):
        if f in piv_set:
            continue
        v = [z] * ncols
        v[f] = Fraction(1)
        for p, r in zip(pivots, prow):
            a = r.get(f)
            if a:
                v[p] = -a
        basis.append(tuple(v))
    return basis


def rank_and_kernel(m: QMatrix):
    """Exact rank and a right-kernel basis (one vector per free column)."""
    pivots, prow = rref_rows(_sparse_rows(m), m.cols)
    return len(pivots), kernel_from_rref(pivots, prow, m.cols)


def solve_or_invert(m: QMatrix, rhs: QMatrix | None = None):
    """Inverse of ``m`` (``rhs`` omitted) or ``(particular, kernel)`` for ``m X = rhs``.

    Raises :class:`ValidationError` with condition ``"singular"`` or
    ``"inconsistent"``.
    """
    if rhs is None:
        if m.rows != m.cols:
            raise ValidationError("singular", "inverse of a non-square matrix")
        n = m.rows
        aug = []
        for i, row in enumerate(m._data):
            d = {j: a for j, a in enumerate(row) if a}
            d[n + i] = Fraction(1)
            aug.append(d)
        pivots, prow = rref_rows(aug, 2 * n)
        if n and (len(pivots) < n or pivots[n - 1] >= n):
            raise ValidationError("singular", "matrix is not invertible")
        z = Fraction(0)
        return QMatrix._raw(tuple(tuple(r.get(n + j, z) for j in range(n)) for r in prow), n, n)
    if rhs.rows != m.rows:
        raise ValidationError("shape", "right-hand side row mismatch")
    c = m.cols
    aug = []
    for i in range(m.rows):
        d = {j: a for j, a in enumerate(m._data[i]) if a}
        for j in range(rhs.cols):
            b = rhs._data[i][j]
            if b:
                d[c + j] = b
        aug.append(d)
    pivots, prow = rref_rows(aug, c + rhs.cols)
    if any(p >= c for p in pivots):
        raise ValidationError("inconsistent", "linear system has no solution")
    z = Fraction(0)
    sol = [[z] * rhs.cols for _ in range(c)]
    for p, r in zip(pivots, prow):
        for j in range(rhs.cols):
            sol[p][j] = r.get(c + j, z)
    kernel = kernel_from_rref(pivots, [{k: v for k, v in r.items() if k < c} for r in prow], c)
    return QMatrix(sol, c, rhs.cols) if c else QMatrix.zeros(0, rhs.cols), kernel


# ---------------------------------------------------------------------------
# Subspaces, always given by matrices whose columns span them


def column_basis(m: QMatrix) -> QMatrix:
    """Columns of ``m`` forming a basis of its column space (pivot columns)."""
    pivots, _ = rref_rows(_sparse_rows(m), m.cols)
    return m.submatrix(range(m.rows), pivots)


def coordinates(basis: QMatrix, target: QMatrix) -> QMatrix:
    """Unique ``Y`` with ``basis @ Y == target``; ``basis`` has independent columns."""
    sol, _ = solve_or_invert(basis, target)
    return sol


def intersect_spaces(a: QMatrix, b: QMatrix) -> QMatrix:
    """Basis (columns) of span(a) ∩ span(b); inputs need independent columns."""
    if a.cols == 0 or b.cols == 0:
        return QMatrix.zeros(a.rows, 0)
    _, ker = rank_and_kernel(a.hstack(-b))
    vecs = [a @ k[: a.cols] for k in ker]
    return column_basis(QMatrix.from_columns(vecs, a.rows)) if vecs else QMatrix.zeros(a.rows, 0)


def preimage_space(t: QMatrix, b: QMatrix) -> QMatrix:
    """Basis of {x : t x ∈ span(b)}."""
    n = t.cols
    _, ker = rank_and_kernel(t.hstack(-b))
    vecs = [k[:n] for k in ker]
    if not vecs:
        return QMatrix.zeros(n, 0)
    return column_basis(QMatrix.from_columns(vecs, n))


def extend_basis(sub: QMatrix, ambient: QMatrix) -> QMatrix:
    """Columns of ``ambient`` that extend ``sub`` to a basis of span(ambient).

    Greedy in column order, so the choice is deterministic.
    """
    full = sub.hstack(ambient)
    pivots, _ = rref_rows(_sparse_rows(full), full.cols)
    extra = [p - sub.cols for p in pivots if p >= sub.cols]
    return ambient.submatrix(range(ambient.rows), extra)

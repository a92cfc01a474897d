"""Exact graded linear algebra over F2 and Q under a global degree truncation.

F2 matrices keep each row as a Python int (bit j is column j); Q matrices keep
rows as tuples of Fractions.  Every graded object is cut off at a degree bound
N: degrees above N are unknown rather than zero.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from dataclasses import field as dc_field
from enum import Enum
from fractions import Fraction
from functools import cached_property


class StructuralError(ValueError):
    """Malformed input: mismatched spaces, bad shapes, unknown names."""


class TruncationOverflow(StructuralError):
    """A requested degree lies above the available truncation."""


class InvariantViolation(RuntimeError):
    """An identity that must hold by construction failed."""


class NoSolution(ArithmeticError):
    """A linear system has no solution."""


class Field(Enum):
    F2 = "F2"
    Q = "Q"

    @property
    def zero(self):
        return 0 if self is Field.F2 else Fraction(0)

    @property
    def one(self):
        return 1 if self is Field.F2 else Fraction(1)

    def coerce(self, x) -> int | Fraction:
        if self is Field.F2:
            q = Fraction(x)
            if q.denominator % 2 == 0:
                raise StructuralError(f"{x} is not defined mod 2")
            return (q.numerator * q.denominator) % 2
        return Fraction(x)

    def parse(self, text) -> int | Fraction:
        if isinstance(text, (int, Fraction)):
            return self.coerce(text)
        try:
            return self.coerce(Fraction(str(text).strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise StructuralError(f"cannot read coefficient {text!r}") from exc

    def format(self, x) -> str | int:
        if self is Field.F2:
            return int(x)
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    def sign(self, k: int):
        """(-1)^k in the field."""
        if self is Field.F2:
            return 1
        return Fraction(-1) if k % 2 else Fraction(1)


# ---------------------------------------------------------------------------
# F2 bitset kernels


def f2_rref(rows: Sequence[int]) -> tuple[list[int], list[int]]:
    """Reduced row echelon form with pivots on the lowest set bits, ascending."""
    pivots: dict[int, int] = {}
    for r in rows:
        for p, pr in pivots.items():
            if (r >> p) & 1:
                r ^= pr
        if r:
            p = (r & -r).bit_length() - 1
            for q in list(pivots):
                if (pivots[q] >> p) & 1:
                    pivots[q] ^= r
            pivots[p] = r
    order = sorted(pivots)
    return [pivots[p] for p in order], order


def f2_rank(rows: Iterable[int]) -> int:
    """Rank of a list of bit-rows (echelon on the top bit, no back-substitution)."""
    lead: dict[int, int] = {}
    for r in rows:
        while r:
            h = r.bit_length() - 1
            pr = lead.get(h)
            if pr is None:
                lead[h] = r
                break
            r ^= pr
    return len(lead)


class F2Basis:
    """Incremental echelon basis of a row space over F2, keyed by top bit."""

    __slots__ = ("lead",)

    def __init__(self) -> None:
        self.lead: dict[int, int] = {}

    def reduce(self, r: int) -> int:
        lead = self.lead
        while r:
            pr = lead.get(r.bit_length() - 1)
            if pr is None:
                return r
            r ^= pr
        return 0

    def add(self, r: int) -> bool:
        r = self.reduce(r)
        if r:
            self.lead[r.bit_length() - 1] = r
            return True
        return False

    def __len__(self) -> int:
        return len(self.lead)


def _q_rref(rows: Sequence[Sequence[Fraction]], ncols: int):
    work = [list(r) for r in rows]
    pivots: list[int] = []
    top = 0
    for col in range(ncols):
        piv = next((i for i in range(top, len(work)) if work[i][col] != 0), None)
        if piv is None:
            continue
        work[top], work[piv] = work[piv], work[top]
        inv = 1 / work[top][col]
        work[top] = [v * inv for v in work[top]]
        prow = work[top]
        for i in range(len(work)):
            if i != top and work[i][col] != 0:
                c = work[i][col]
                work[i] = [a - c * b for a, b in zip(work[i], prow)]
        pivots.append(col)
        top += 1
        if top == len(work):
            break
    return [tuple(r) for r in work[:top]], pivots


# ---------------------------------------------------------------------------
# matrices


class Matrix:
    """Dense immutable matrix over F2 or Q acting on column vectors."""

    __slots__ = ("field", "ncols", "nrows", "rows")

    def __init__(self, fld: Field, nrows: int, ncols: int, rows) -> None:
        self.field = fld
        self.nrows = nrows
        self.ncols = ncols
        self.rows = tuple(rows)
        if len(self.rows) != nrows:
            raise StructuralError("row count does not match the declared shape")

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, fld: Field, nrows: int, ncols: int) -> Matrix:
        if fld is Field.F2:
            return cls(fld, nrows, ncols, [0] * nrows)
        return cls(fld, nrows, ncols, [(Fraction(0),) * ncols] * nrows)

    @classmethod
    def identity(cls, fld: Field, n: int) -> Matrix:
        if fld is Field.F2:
            return cls(fld, n, n, [1 << i for i in range(n)])
        return cls(fld, n, n, [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)])

    @classmethod
    def from_lists(cls, fld: Field, rows: Sequence[Sequence], ncols: int | None = None) -> Matrix:
        rows = [list(r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise StructuralError("ragged matrix rows")
        if fld is Field.F2:
            bits = []
            for r in rows:
                b = 0
                for j, v in enumerate(r):
                    if fld.coerce(v):
                        b |= 1 << j
                bits.append(b)
            return cls(fld, len(rows), ncols, bits)
        return cls(fld, len(rows), ncols, [tuple(Fraction(v) for v in r) for r in rows])

    @classmethod
    def from_entries(cls, fld: Field, nrows: int, ncols: int, entries: dict[tuple[int, int], object]) -> Matrix:
        if fld is Field.F2:
            bits = [0] * nrows
            for (i, j), v in entries.items():
                if fld.coerce(v):
                    bits[i] ^= 1 << j
            return cls(fld, nrows, ncols, bits)
        data = [[Fraction(0)] * ncols for _ in range(nrows)]
        for (i, j), v in entries.items():
            data[i][j] += Fraction(v)
        return cls(fld, nrows, ncols, [tuple(r) for r in data])

    @classmethod
    def from_columns(cls, fld: Field, nrows: int, columns: Sequence[Sequence]) -> Matrix:
        return cls.from_lists(fld, [list(c) for c in columns], nrows).transpose() if columns else cls.zeros(fld, nrows, 0)

    # access ---------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def entry(self, i: int, j: int):
        if self.field is Field.F2:
            return (self.rows[i] >> j) & 1
        return self.rows[i][j]

    def row(self, i: int) -> list:
        if self.field is Field.F2:
            r = self.rows[i]
            return [(r >> j) & 1 for j in range(self.ncols)]
        return list(self.rows[i])

    def column(self, j: int) -> list:
        return [self.entry(i, j) for i in range(self.nrows)]

    def to_lists(self) -> list[list]:
        return [self.row(i) for i in range(self.nrows)]

    def nonzero_entries(self) -> list[tuple[int, int, object]]:
        out = []
        for i, r in enumerate(self.rows):
            if self.field is Field.F2:
                while r:
                    low = r & -r
                    out.append((i, low.bit_length() - 1, 1))
                    r ^= low
            else:
                out.extend((i, j, v) for j, v in enumerate(r) if v != 0)
        return out

    # arithmetic -----------------------------------------------------------
    def _check_same(self, other: Matrix) -> None:
        if self.field is not other.field or self.shape != other.shape:
            raise StructuralError(f"matrix shapes differ: {self.shape} vs {other.shape}")

    def __add__(self, other: Matrix) -> Matrix:
        self._check_same(other)
        if self.field is Field.F2:
            return Matrix(self.field, self.nrows, self.ncols, [a ^ b for a, b in zip(self.rows, other.rows)])
        return Matrix(self.field, self.nrows, self.ncols,
                      [tuple(x + y for x, y in zip(a, b)) for a, b in zip(self.rows, other.rows)])

    def __neg__(self) -> Matrix:
        if self.field is Field.F2:
            return self
        return Matrix(self.field, self.nrows, self.ncols, [tuple(-x for x in r) for r in self.rows])

    def __sub__(self, other: Matrix) -> Matrix:
        return self + (-other)

    def scale(self, c) -> Matrix:
        c = self.field.coerce(c)
        if self.field is Field.F2:
            return self if c else Matrix.zeros(self.field, self.nrows, self.ncols)
        return Matrix(self.field, self.nrows, self.ncols, [tuple(c * x for x in r) for r in self.rows])

    def __matmul__(self, other: Matrix) -> Matrix:
        if self.field is not other.field or self.ncols != other.nrows:
            raise StructuralError(f"cannot multiply {self.shape} by {other.shape}")
        if self.field is Field.F2:
            brows = other.rows
            out = []
            for r in self.rows:
                acc = 0
                while r:
                    low = r & -r
                    acc ^= brows[low.bit_length() - 1]
                    r ^= low
                out.append(acc)
            return Matrix(self.field, self.nrows, other.ncols, out)
        cols = list(zip(*other.rows)) if other.nrows else [()] * other.ncols
        out = []
        for r in self.rows:
            nz = [(k, v) for k, v in enumerate(r) if v != 0]
            out.append(tuple(sum((v * c[k] for k, v in nz), Fraction(0)) for c in cols))
        return Matrix(self.field, self.nrows, other.ncols, out)

    def apply(self, vec: Sequence) -> list:
        if len(vec) != self.ncols:
            raise StructuralError("vector length does not match matrix width")
        if self.field is Field.F2:
            b = 0
            for j, v in enumerate(vec):
                if v % 2:
                    b |= 1 << j
            return [bin(r & b).count("1") & 1 for r in self.rows]
        return [sum((x * Fraction(v) for x, v in zip(r, vec) if v), Fraction(0)) for r in self.rows]

    def transpose(self) -> Matrix:
        if self.field is Field.F2:
            cols = [0] * self.ncols
            for i, r in enumerate(self.rows):
                bit = 1 << i
                while r:
                    low = r & -r
                    cols[low.bit_length() - 1] |= bit
                    r ^= low
            return Matrix(self.field, self.ncols, self.nrows, cols)
        if self.nrows == 0:
            return Matrix.zeros(self.field, self.ncols, 0)
        return Matrix(self.field, self.ncols, self.nrows, list(zip(*self.rows)))

    def is_zero(self) -> bool:
        if self.field is Field.F2:
            return not any(self.rows)
        return all(x == 0 for r in self.rows for x in r)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field is other.field and self.shape == other.shape and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.field, self.shape, self.rows))

    def __repr__(self) -> str:
        return f"Matrix({self.field.value}, {self.nrows}x{self.ncols}, {self.to_lists()})"

    def hstack(self, other: Matrix) -> Matrix:
        if self.nrows != other.nrows:
            raise StructuralError("hstack needs equal row counts")
        if self.field is Field.F2:
            return Matrix(self.field, self.nrows, self.ncols + other.ncols,
                          [a | (b << self.ncols) for a, b in zip(self.rows, other.rows)])
        return Matrix(self.field, self.nrows, self.ncols + other.ncols,
                      [a + b for a, b in zip(self.rows, other.rows)])

    def vstack(self, other: Matrix) -> Matrix:
        if self.ncols != other.ncols:
            raise StructuralError("vstack needs equal column counts")
        return Matrix(self.field, self.nrows + other.nrows, self.ncols, self.rows + other.rows)

    def select_rows(self, idx: Sequence[int]) -> Matrix:
        return Matrix(self.field, len(idx), self.ncols, [self.rows[i] for i in idx])

    def select_columns(self, idx: Sequence[int]) -> Matrix:
        return self.transpose().select_rows(idx).transpose()

    # elimination ----------------------------------------------------------
    def rref(self) -> tuple[Matrix, list[int]]:
        if self.field is Field.F2:
            rows, piv = f2_rref(self.rows)
        else:
            rows, piv = _q_rref(self.rows, self.ncols)
        return Matrix(self.field, len(rows), self.ncols, rows), piv

    def rank(self) -> int:
        if self.field is Field.F2:
            return f2_rank(self.rows)
        return len(_q_rref(self.rows, self.ncols)[1])

    def nullspace(self) -> list[list]:
        """Basis of {x : Ax = 0}, one vector per free column in ascending order."""
        red, piv = self.rref()
        pset = set(piv)
        if self.field is Field.F2:
            free = [f for f in range(self.ncols) if f not in pset]
            support = {f: [f] for f in free}
            for r, p in zip(red.rows, piv):
                rest = r & ~(1 << p)
                while rest:
                    low = rest & -rest
                    support[low.bit_length() - 1].append(p)
                    rest ^= low
            basis = []
            for f in free:
                x = [0] * self.ncols
                for k in support[f]:
                    x[k] = 1
                basis.append(x)
            return basis
        basis = []
        for f in range(self.ncols):
            if f in pset:
                continue
            x = [self.field.zero] * self.ncols
            x[f] = self.field.one
            for r, p in enumerate(piv):
                v = red.entry(r, f)
                if v:
                    x[p] = -v if self.field is Field.Q else 1
            basis.append(x)
        return basis

    def solve(self, b: Sequence) -> list:
        """Solution of Ax = b with every free variable set to zero."""
        if len(b) != self.nrows:
            raise StructuralError("right-hand side has the wrong length")
        aug = self.hstack(Matrix.from_lists(self.field, [[v] for v in b], 1))
        red, piv = aug.rref()
        if piv and piv[-1] == self.ncols:
            raise NoSolution("inconsistent linear system")
        x = [self.field.zero] * self.ncols
        for r, p in enumerate(piv):
            x[p] = red.entry(r, self.ncols)
        return x

    def inverse(self) -> Matrix:
        if self.nrows != self.ncols:
            raise NoSolution("non-square matrix has no inverse")
        n = self.nrows
        red, piv = self.hstack(Matrix.identity(self.field, n)).rref()
        if piv[:n] != list(range(n)):
            raise NoSolution("matrix is singular")
        if self.field is Field.F2:
            return Matrix(self.field, n, n, [r >> n for r in red.rows[:n]])
        return Matrix(self.field, n, n, [r[n:] for r in red.rows[:n]])


# ---------------------------------------------------------------------------
# graded spaces and maps


@dataclass(frozen=True)
class GradedSpace:
    """Finite-type graded vector space with named bases in degrees 0..trunc."""

    field: Field
    trunc: int
    basis: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if self.trunc < 0:
            raise StructuralError("truncation must be non-negative")
        basis = tuple(tuple(b) for b in self.basis)
        if len(basis) != self.trunc + 1:
            raise StructuralError(f"basis must list degrees 0..{self.trunc}, got {len(basis)} degrees")
        object.__setattr__(self, "basis", basis)
        seen: set[str] = set()
        for names in basis:
            for n in names:
                if n in seen:
                    raise StructuralError(f"duplicate basis name {n!r}")
                seen.add(n)

    @classmethod
    def from_degrees(cls, fld: Field, trunc: int, named: Iterable[tuple[str, int]]) -> GradedSpace:
        per: list[list[str]] = [[] for _ in range(trunc + 1)]
        for name, deg in named:
            if deg < 0:
                raise StructuralError(f"negative degree for {name!r}")
            if deg > trunc:
                raise TruncationOverflow(f"{name!r} has degree {deg} above truncation {trunc}")
            per[deg].append(name)
        return cls(fld, trunc, tuple(tuple(p) for p in per))

    @classmethod
    def from_dims(cls, fld: Field, dims: Sequence[int], prefix: str = "e") -> GradedSpace:
        return cls(fld, len(dims) - 1, tuple(tuple(f"{prefix}{d}_{i}" for i in range(n)) for d, n in enumerate(dims)))

    @classmethod
    def zero(cls, fld: Field, trunc: int) -> GradedSpace:
        return cls(fld, trunc, ((),) * (trunc + 1))

    @classmethod
    def ground(cls, fld: Field, trunc: int, name: str = "1") -> GradedSpace:
        return cls(fld, trunc, ((name,),) + ((),) * trunc)

    def dim(self, d: int) -> int:
        if d < 0:
            return 0
        if d > self.trunc:
            raise TruncationOverflow(f"degree {d} lies above truncation {self.trunc}")
        return len(self.basis[d])

    def dims(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.basis)

    @property
    def total_dim(self) -> int:
        return sum(self.dims())

    @cached_property
    def _where(self) -> dict[str, tuple[int, int]]:
        return {n: (d, i) for d, names in enumerate(self.basis) for i, n in enumerate(names)}

    def locate(self, name: str) -> tuple[int, int]:
        try:
            return self._where[name]
        except KeyError:
            raise StructuralError(f"{name!r} is not a basis element") from None

    def __contains__(self, name: str) -> bool:
        return name in self._where

    def names(self) -> list[str]:
        return [n for names in self.basis for n in names]

    def degree_of(self, name: str) -> int:
        return self.locate(name)[0]

    def truncate(self, trunc: int) -> GradedSpace:
        if trunc > self.trunc:
            raise TruncationOverflow(f"cannot raise truncation from {self.trunc} to {trunc}")
        return GradedSpace(self.field, trunc, self.basis[: trunc + 1])

    def describe(self) -> str:
        return f"GradedSpace({self.field.value}, N={self.trunc}, dims={list(self.dims())})"


def _map_degrees(src: GradedSpace, tgt: GradedSpace, shift: int) -> range:
    return range(max(0, -shift), min(src.trunc, tgt.trunc - shift) + 1)


@dataclass(frozen=True)
class GradedMap:
    """Degreewise matrices source_d -> target_{d+shift}."""

    source: GradedSpace
    target: GradedSpace
    shift: int
    blocks: dict[int, Matrix] = dc_field(compare=False)

    def __post_init__(self) -> None:
        if self.source.field is not self.target.field:
            raise StructuralError("source and target fields differ")
        fld = self.source.field
        full = {}
        for d in self.degrees():
            rows, cols = self.target.dim(d + self.shift), self.source.dim(d)
            m = self.blocks.get(d)
            if m is None:
                m = Matrix.zeros(fld, rows, cols)
            elif m.shape != (rows, cols) or m.field is not fld:
                raise StructuralError(f"block in degree {d} has shape {m.shape}, expected {(rows, cols)}")
            full[d] = m
        extra = set(self.blocks) - set(full)
        if any(not self.blocks[d].is_zero() for d in extra):
            raise StructuralError(f"blocks given outside the valid degree range: {sorted(extra)}")
        object.__setattr__(self, "blocks", full)

    def degrees(self) -> range:
        return _map_degrees(self.source, self.target, self.shift)

    @property
    def field(self) -> Field:
        return self.source.field

    def block(self, d: int) -> Matrix:
        try:
            return self.blocks[d]
        except KeyError:
            raise TruncationOverflow(f"degree {d} is outside the map's range") from None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedMap):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.shift == other.shift and self.blocks == other.blocks)

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: GradedMap) -> GradedMap:
        self._same_shape(other)
        return GradedMap(self.source, self.target, self.shift, {d: self.blocks[d] + other.blocks[d] for d in self.blocks})

    def __sub__(self, other: GradedMap) -> GradedMap:
        self._same_shape(other)
        return GradedMap(self.source, self.target, self.shift, {d: self.blocks[d] - other.blocks[d] for d in self.blocks})

    def __neg__(self) -> GradedMap:
        return GradedMap(self.source, self.target, self.shift, {d: -m for d, m in self.blocks.items()})

    def scale(self, c) -> GradedMap:
        return GradedMap(self.source, self.target, self.shift, {d: m.scale(c) for d, m in self.blocks.items()})

    def _same_shape(self, other: GradedMap) -> None:
        if self.source != other.source or self.target != other.target or self.shift != other.shift:
            raise StructuralError("maps have different sources, targets or shifts")

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.blocks.values())

    def apply(self, name_or_vec, degree: int | None = None) -> dict[str, object]:
        """Image of a basis element (by name) or of a {name: coeff} vector."""
        if isinstance(name_or_vec, str):
            name_or_vec = {name_or_vec: self.field.one}
        out: dict[str, object] = {}
        for name, c in name_or_vec.items():
            d, i = self.source.locate(name)
            m = self.block(d)
            for r in range(m.nrows):
                v = m.entry(r, i)
                if v:
                    tn = self.target.basis[d + self.shift][r]
                    out[tn] = self.field.coerce(out.get(tn, 0) + v * c)
        return {k: v for k, v in out.items() if v}

    def __matmul__(self, other: GradedMap) -> GradedMap:
        return compose(self, other)


def identity(V: GradedSpace) -> GradedMap:
    return GradedMap(V, V, 0, {d: Matrix.identity(V.field, V.dim(d)) for d in range(V.trunc + 1)})


def zero_map(V: GradedSpace, W: GradedSpace, shift: int = 0) -> GradedMap:
    return GradedMap(V, W, shift, {})


def map_from_function(V: GradedSpace, W: GradedSpace, shift: int, fn: Callable[[str], dict[str, object]]) -> GradedMap:
    """Build a map from the images of basis elements given as {name: coeff}."""
    fld = V.field
    blocks = {}
    for d in _map_degrees(V, W, shift):
        entries: dict[tuple[int, int], object] = {}
        for j, name in enumerate(V.basis[d]):
            for tname, c in fn(name).items():
                td, i = W.locate(tname)
                if td != d + shift:
                    raise StructuralError(f"image of {name!r} contains {tname!r} of the wrong degree")
                entries[(i, j)] = entries.get((i, j), 0) + c
        blocks[d] = Matrix.from_entries(fld, W.dim(d + shift), V.dim(d), entries)
    return GradedMap(V, W, shift, blocks)


def compose(g: GradedMap, f: GradedMap) -> GradedMap:
    """g after f."""
    if f.target != g.source:
        raise StructuralError(f"cannot compose: target {f.target.describe()} differs from source {g.source.describe()}")
    shift = f.shift + g.shift
    blocks = {}
    for d in _map_degrees(f.source, g.target, shift):
        if d in f.blocks and d + f.shift in g.blocks:
            blocks[d] = g.blocks[d + f.shift] @ f.blocks[d]
    return GradedMap(f.source, g.target, shift, blocks)


def kernel(f: GradedMap, prefix: str = "k") -> tuple[GradedSpace, GradedMap]:
    src = f.source
    per, blocks = [], {}
    for d in range(src.trunc + 1):
        if d in f.blocks:
            vecs = f.blocks[d].nullspace()
        else:
            raise TruncationOverflow(f"kernel in degree {d} depends on degrees above the target truncation")
        per.append(tuple(f"{prefix}{d}.{i}" for i in range(len(vecs))))
        blocks[d] = Matrix.from_lists(src.field, vecs, src.dim(d)).transpose() if vecs else Matrix.zeros(src.field, src.dim(d), 0)
    K = GradedSpace(src.field, src.trunc, tuple(per))
    return K, GradedMap(K, src, 0, blocks)


def image_complement(m: Matrix) -> tuple[list[int], Matrix]:
    """Target indices complementing the column space of m, and the projection onto them."""
    fld = m.field
    red, piv = m.transpose().rref()
    pset = set(piv)
    keep = [t for t in range(m.nrows) if t not in pset]
    pos = {t: k for k, t in enumerate(keep)}
    entries: dict[tuple[int, int], object] = {}
    for t in keep:
        entries[(pos[t], t)] = 1
    for r, p in enumerate(piv):
        for t in keep:
            v = red.entry(r, t)
            if v:
                entries[(pos[t], p)] = -v
    return keep, Matrix.from_entries(fld, len(keep), m.nrows, entries)


def cokernel(f: GradedMap) -> tuple[GradedSpace, GradedMap]:
    """Quotient whose basis is the target basis elements outside the pivot set of the image."""
    tgt = f.target
    per, blocks = [], {}
    for e in range(tgt.trunc + 1):
        d = e - f.shift
        if d in f.blocks:
            keep, proj = image_complement(f.blocks[d])
        elif d < 0:
            keep, proj = list(range(tgt.dim(e))), Matrix.identity(tgt.field, tgt.dim(e))
        else:
            raise TruncationOverflow(f"cokernel in degree {e} needs source degree {d} above truncation")
        per.append(tuple(tgt.basis[e][t] for t in keep))
        blocks[e] = proj
    Q = GradedSpace(tgt.field, tgt.trunc, tuple(per))
    return Q, GradedMap(tgt, Q, 0, blocks)


def tensor(V: GradedSpace, W: GradedSpace, sep: str = "⊗") -> GradedSpace:
    if V.field is not W.field:
        raise StructuralError("tensor factors live over different fields")
    N = min(V.trunc, W.trunc)
    per = []
    for d in range(N + 1):
        per.append(tuple(f"{v}{sep}{w}" for a in range(d + 1) for v in V.basis[a] for w in W.basis[d - a]))
    return GradedSpace(V.field, N, tuple(per))


def tensor_index(V: GradedSpace, W: GradedSpace, d: int) -> dict[tuple[tuple[int, int], tuple[int, int]], int]:
    """Position of (V_a basis i) ⊗ (W_b basis j) inside (V⊗W)_d."""
    out, k = {}, 0
    for a in range(d + 1):
        for i in range(V.dim(a)):
            for j in range(W.dim(d - a)):
                out[((a, i), (d - a, j))] = k
                k += 1
    return out


def direct_sum(V: GradedSpace, W: GradedSpace) -> GradedSpace:
    if V.field is not W.field or V.trunc != W.trunc:
        raise StructuralError("direct sum needs equal fields and truncations")
    return GradedSpace(V.field, V.trunc, tuple(a + b for a, b in zip(V.basis, W.basis)))


def solve_lift(f: GradedMap, thru: GradedMap, mode: str = "auto") -> GradedMap:
    """Extend f along thru (h∘thru = f) or factor f through thru (thru∘h = f).

    With mode "auto" the direction is read off from which end the two maps
    share; pass "extend" or "factor" when both ends agree.  Free variables are
    set to zero, so the answer is deterministic.
    """
    fld = f.field
    extend = f.source == thru.source and mode != "factor"
    factor = f.target == thru.target and mode != "extend"
    if extend and factor:
        extend = _is_monic(thru) or not _is_epic(thru)
    if extend:
        shift = f.shift - thru.shift
        blocks = {}
        for d in _map_degrees(thru.target, f.target, shift):
            src_deg = d - thru.shift
            T = thru.blocks.get(src_deg)
            F = f.blocks.get(src_deg)
            rows = f.target.dim(d + shift)
            if T is None or F is None:
                blocks[d] = Matrix.zeros(fld, rows, thru.target.dim(d))
                continue
            Tt = T.transpose()
            sol = [Tt.solve(F.row(r)) for r in range(rows)]
            blocks[d] = Matrix.from_lists(fld, sol, thru.target.dim(d))
        return GradedMap(thru.target, f.target, shift, blocks)
    if factor:
        shift = f.shift - thru.shift
        blocks = {}
        for d in _map_degrees(f.source, thru.source, shift):
            T = thru.blocks.get(d + shift)
            F = f.blocks.get(d)
            if T is None or F is None:
                blocks[d] = Matrix.zeros(fld, thru.source.dim(d + shift), f.source.dim(d))
                continue
            cols = [T.solve(F.column(c)) for c in range(F.ncols)]
            if cols:
                blocks[d] = Matrix.from_lists(fld, cols, T.ncols).transpose()
            else:
                blocks[d] = Matrix.zeros(fld, T.ncols, 0)
        return GradedMap(f.source, thru.source, shift, blocks)
    raise StructuralError("solve_lift needs maps sharing a source (extension) or a target (factorization)")


def _is_monic(m: GradedMap) -> bool:
    return all(b.rank() == b.ncols for b in m.blocks.values())


def _is_epic(m: GradedMap) -> bool:
    return all(b.rank() == b.nrows for b in m.blocks.values())


def is_monic(m: GradedMap) -> bool:
    return _is_monic(m)


def is_epic(m: GradedMap) -> bool:
    return _is_epic(m)


def rank_profile(m: GradedMap) -> dict[int, int]:
    return {d: b.rank() for d, b in m.blocks.items()}

"""Quillen cohomology of unstable coalgebras and the obstruction calculus.

Cochains.  For a resolution A• of K with fresh cogenerators Vˢ and a strictly
unstable K-comodule M, the cofree adjunctions identify

    Hom_K(M, (Āˢ)_coab ⊗ K)  =  Hom(M, Vˢ)        (degree-preserving maps),

so a cochain assigns to every fresh cogenerator w a functional on M_{|w|}.
The differential is read off from the attaching polynomials: a cochain c
defines a coalgebra map K ⊕ M -> Aˢ over the coaugmentation, dually an
algebra map FAₛ -> (K ⊕ M)*, and (δc)(w') is the M-part of the image of
att(w').  The M-parts are linear in c, so a single pass with a
derivative-tracking target computes the whole matrix.

δ raises the degree of the cogenerator but never the degree in M, so it
preserves the filtration by M_{≤d}; tables report H^s(K; M_{≤d}) for every d.

Obstructions.  Qˢ = R(Vˢ) ⊗ K with R(V) = P(G(V)) is the object-level
complex; its differential ∂ is recovered from δ applied to the universal
cochain.  Extensions, liftings λ and the classes χ, δ live there.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field as dc_field

from .coalg import (
    Comodule,
    UnstableCoalgebra,
    UnstableModule,
    ValidationReport,
    _tensor_act,
    cofree_coalgebra,
    cofree_comodule,
    comodule_hom,
    is_comodule_map,
    primitives,
    suspension_comodule,
)
from .cosimplicial import EdgeUndefined
from .freealg import AlgebraMap
from .galgebra import (
    F2Basis,
    Field,
    GradedMap,
    GradedSpace,
    InvariantViolation,
    Matrix,
    NoSolution,
    StructuralError,
    TruncationOverflow,
    cokernel,
    identity,
    solve_lift,
    tensor_index,
)
from .resolution import CWResolution, PreconditionError, build_resolution
from .steenrod import adem_terms

EDGE_S = "upper edge uncertain"
EDGE_N = "truncation edge"


# ---------------------------------------------------------------------------
# linear forms over cochain coordinates: ints (F2 bitsets) or {coord: Fraction}


def _fzero(fld: Field):
    return 0 if fld is Field.F2 else {}


def _fadd(fld: Field, f, g, c=1):
    if fld is Field.F2:
        return f ^ g if c % 2 else f
    if not c or not g:
        return f
    out = dict(f)
    for k, v in g.items():
        w = out.get(k, 0) + c * v
        if w:
            out[k] = w
        else:
            out.pop(k, None)
    return out


def _fnonzero(f) -> bool:
    return bool(f)


class DerivationTarget:
    """Dual of the square-zero extension K ⊕ M with M-parts linear in cochain coordinates.

    Elements are (deg, a, B): a is a functional on K_deg, B lists one linear
    form per basis element of M_deg.
    """

    def __init__(self, M: Comodule):
        self.K = M.base
        self.M = M
        self.field = M.field
        self.trunc = min(self.K.trunc, M.trunc)
        self._co: dict[int, list] = {}
        for (d, k), terms in M.coaction.items():
            for ((a, i), (b, j)), c in terms.items():
                self._co.setdefault(d, []).append((k, a, i, b, j, c))

    def _dims(self, deg):
        return self.K.space.dim(deg), self.M.space.dim(deg)

    def zero_like(self, deg):
        if deg > self.trunc:
            return (deg, [], [])
        nk, nm = self._dims(deg)
        return (deg, [self.field.zero] * nk, [_fzero(self.field)] * nm)

    def one(self):
        nk, nm = self._dims(0)
        return (0, [self.field.one] + [self.field.zero] * (nk - 1), [_fzero(self.field)] * nm)

    def add(self, x, y, c=1):
        (dx, ax, bx), (dy, ay, by) = x, y
        if dx != dy:
            raise StructuralError("adding elements of different degrees")
        fld = self.field
        if fld is Field.F2:
            a = [(u + c * v) % 2 for u, v in zip(ax, ay)]
        else:
            a = [u + c * v for u, v in zip(ax, ay)]
        return (dx, a, [_fadd(fld, f, g, c) for f, g in zip(bx, by)])

    def mul(self, x, y):
        (p, ax, bx), (q, ay, by) = x, y
        d = p + q
        if d > self.trunc:
            return (d, [], [])
        fld = self.field
        out = self.zero_like(d)
        a = out[1]
        if any(ax) and any(ay):
            for xi, i, j, c in self.K.diag_pairs(d, p):
                u, v = ax[i], ay[j]
                if u and v:
                    a[xi] += c * u * v
            if fld is Field.F2:
                a = [v % 2 for v in a]
        B = out[2]
        for k, ka, i, mb, j, c in self._co.get(d, ()):
            if ka == p and mb == q and ax[i] and _fnonzero(by[j]):
                B[k] = _fadd(fld, B[k], by[j], c * ax[i])
            if mb == p and ka == q and ay[i] and _fnonzero(bx[j]):
                B[k] = _fadd(fld, B[k], bx[j], c * fld.sign(ka * mb) * ay[i])
        return (d, a, B)

    def sq(self, i, x):
        if i == 0:
            return x
        deg, a, B = x
        if deg + i > self.trunc:
            return (deg + i, [], [])
        if self.field is not Field.F2:
            return self.zero_like(deg + i)
        a2 = self.K.action_matrix(i, deg + i).transpose().apply(a)
        act = self.M.module.action_matrix(i, deg + i)
        B2 = []
        for r in range(act.ncols):
            f = 0
            for s in range(act.nrows):
                if act.entry(s, r):
                    f ^= B[s]
            B2.append(f)
        return (deg + i, a2, B2)

    def sq_word(self, I, x):
        for i in reversed(I):
            x = self.sq(i, x)
        return x


# ---------------------------------------------------------------------------
# the cochain complex


def _require_strictly_unstable(M: Comodule) -> None:
    if M.field is not Field.F2:
        return
    for (i, d), m in M.module.action.items():
        if 2 * i >= d and not m.is_zero():
            raise StructuralError(
                f"coefficients must be strictly unstable: Sq{i} is nonzero on degree {d}")


@dataclass
class Coord:
    index: int  # position in Vˢ
    degree: int
    m: int  # basis index in M_degree


class QuillenComplex:
    """Normalized cochains Hom(M, Vˢ) of a resolution with coefficients in M."""

    def __init__(self, res: CWResolution, M: Comodule):
        if M.base.space != res.base.space:
            raise StructuralError("coefficients must be a comodule over the resolved coalgebra")
        if M.trunc > res.N:
            raise TruncationOverflow(
                f"coefficients reach degree {M.trunc} but the resolution stops at {res.N}; "
                f"increase --trunc to ≥ {M.trunc}")
        _require_strictly_unstable(M)
        self.res = res
        self.M = M
        self.field = M.field
        self.target = DerivationTarget(M)
        self.coords: list[list[Coord]] = []
        self._pos: list[dict[tuple[int, int], int]] = []
        for s in range(res.levels):
            cs = []
            for idx, v in enumerate(res.fresh[s]):
                if v.degree <= M.trunc:
                    for k in range(M.space.dim(v.degree)):
                        cs.append(Coord(idx, v.degree, k))
            cs.sort(key=lambda c: (c.degree, c.index, c.m))
            self.coords.append(cs)
            self._pos.append({(c.index, c.m): r for r, c in enumerate(cs)})
        self._delta: dict[int, list] = {}

    @property
    def D(self) -> int:
        return self.res.D

    def dim(self, s: int, upto: int | None = None) -> int:
        cs = self.coords[s]
        if upto is None:
            return len(cs)
        return sum(1 for c in cs if c.degree <= upto)

    def coord_label(self, s: int, r: int) -> str:
        c = self.coords[s][r]
        return f"{self.res.fresh[s][c.index].name}|{self.M.space.basis[c.degree][c.m]}"

    def _images(self, s: int) -> AlgebraMap:
        res, T, fld = self.res, self.target, self.field
        A = res.algebras[s]
        ident = tuple(range(s + 1))
        pos = self._pos[s]
        images = {}
        for u, (sigma, k, idx) in enumerate(res.keys[s]):
            deg = A.cogens[u][1]
            a = [fld.zero] * res.base.space.dim(deg)
            if k == 0:
                a = list(res.fresh[0][idx].attach[1])
            B = [_fzero(fld)] * self.M.space.dim(deg) if deg <= self.M.trunc else []
            if sigma == ident and deg <= self.M.trunc:
                for x in range(len(B)):
                    r = pos[(idx, x)]
                    B[x] = (1 << r) if fld is Field.F2 else {r: fld.one}
            images[u] = (deg, a, B)
        return AlgebraMap(A, T, images)

    def delta(self, s: int) -> list:
        """Rows of δˢ: one linear form over Cˢ per coordinate of Cˢ⁺¹."""
        if s + 1 > self.D:
            raise EdgeUndefined(f"δ^{s} needs level {s + 1} but the resolution stops at D = {self.D}")
        hit = self._delta.get(s)
        if hit is not None:
            return hit
        F = self._images(s)
        rows = []
        cache: dict[int, tuple] = {}
        for c in self.coords[s + 1]:
            img = cache.get(c.index)
            if img is None:
                v = self.res.fresh[s + 1][c.index]
                img = F.image(v.attach, v.degree)
                if any(img[1]):
                    raise InvariantViolation(
                        f"attaching polynomial of {v.name} does not vanish on K; the resolution is corrupt")
                cache[c.index] = img
            rows.append(img[2][c.m])
        self._delta[s] = rows
        return rows

    def apply(self, s: int, vec) -> object:
        """δˢ on a cochain given as a form (F2 bitset or {coord: c})."""
        fld = self.field
        out = _fzero(fld)
        for r, row in enumerate(self.delta(s)):
            if fld is Field.F2:
                if bin(row & vec).count("1") & 1:
                    out |= 1 << r
            else:
                v = sum((c * vec.get(k, 0) for k, c in row.items()), fld.zero)
                if v:
                    out[r] = v
        return out

    def check_square_zero(self) -> None:
        fld = self.field
        for s in range(self.D - 1):
            lower = self.delta(s)
            for r, row in enumerate(self.delta(s + 1)):
                acc = _fzero(fld)
                if fld is Field.F2:
                    bits = row
                    while bits:
                        low = bits & -bits
                        acc ^= lower[low.bit_length() - 1]
                        bits ^= low
                else:
                    for k, c in row.items():
                        acc = _fadd(fld, acc, lower[k], c)
                if _fnonzero(acc):
                    raise InvariantViolation(f"δ^{s + 1}∘δ^{s} ≠ 0 at {self.coord_label(s + 2, r)}")

    # ranks and cohomology ----------------------------------------------------
    def cumulative_ranks(self, s: int) -> list[int]:
        """rank δˢ restricted to M_{≤d}, for d = 0..N."""
        fld, N = self.field, self.M.trunc
        if s < 0:
            return [0] * (N + 1)
        rows = self.delta(s)
        target = self.coords[s + 1]
        out = []
        if fld is Field.F2:
            basis = F2Basis()
            r = 0
            for d in range(N + 1):
                while r < len(rows) and target[r].degree <= d:
                    basis.add(rows[r])
                    r += 1
                out.append(len(basis))
            return out
        width = len(self.coords[s])
        for d in range(N + 1):
            sel = [rows[r] for r in range(len(rows)) if target[r].degree <= d and rows[r]]
            if not sel:
                out.append(0)
                continue
            out.append(Matrix.from_entries(fld, len(sel), width,
                                           {(i, k): v for i, row in enumerate(sel) for k, v in row.items()}).rank())
        return out

    def cohomology_dims(self, s: int) -> list[int]:
        N = self.M.trunc
        out_r = self.cumulative_ranks(s)
        in_r = self.cumulative_ranks(s - 1)
        return [self.dim(s, d) - out_r[d] - in_r[d] for d in range(N + 1)]

    def _matrix(self, s: int) -> Matrix:
        rows = self.delta(s)
        width = len(self.coords[s])
        if self.field is Field.F2:
            return Matrix(self.field, len(rows), width, rows)
        return Matrix.from_entries(self.field, len(rows), width,
                                   {(i, k): v for i, row in enumerate(rows) for k, v in row.items()})

    def representatives(self, s: int) -> list:
        """Cocycles whose classes form a basis of Hˢ (full M), as forms."""
        fld = self.field
        width = len(self.coords[s])
        kernel = self._matrix(s).nullspace() if width else []
        image = self._matrix(s - 1).transpose() if s >= 1 else Matrix.zeros(fld, 0, width)
        reps = []
        if fld is Field.F2:
            span = F2Basis()
            for r in image.rows:
                span.add(r)
            for vec in kernel:
                b = sum(1 << k for k, v in enumerate(vec) if v)
                if span.add(b):
                    reps.append(b)
            return reps
        rows = [image.row(r) for r in range(image.nrows) if any(image.row(r))]
        rank = Matrix.from_lists(fld, rows, width).rank() if rows else 0
        for vec in kernel:
            trial = rows + [vec]
            new = Matrix.from_lists(fld, trial, width).rank()
            if new > rank:
                rows, rank = trial, new
                reps.append({k: v for k, v in enumerate(vec) if v})
        return reps

    def is_cocycle(self, s: int, vec) -> bool:
        return not _fnonzero(self.apply(s, vec))

    def is_coboundary(self, s: int, vec) -> tuple[bool, object]:
        """Solve δ^(s-1) ϑ = vec; returns (True, ϑ) or (False, None)."""
        fld = self.field
        if s + 1 <= self.D and not self.is_cocycle(s, vec):
            raise PreconditionError(f"the input is not a cocycle in degree s = {s}")
        if not _fnonzero(vec):
            return True, _fzero(fld)
        if s == 0:
            return False, None
        A = self._matrix(s - 1)
        rhs = _form_to_list(fld, vec, len(self.coords[s]))
        try:
            x = A.solve(rhs)
        except NoSolution:
            return False, None
        theta = _list_to_form(fld, x)
        if self.apply(s - 1, theta) != vec:
            raise InvariantViolation("coboundary witness does not reproduce the cocycle")
        return True, theta

    def form_to_dict(self, s: int, vec) -> dict[str, object]:
        fld = self.field
        items = _form_to_list(fld, vec, len(self.coords[s]))
        return {self.coord_label(s, r): fld.format(v) for r, v in enumerate(items) if v}


def _form_to_list(fld: Field, f, width: int) -> list:
    if fld is Field.F2:
        return [(f >> k) & 1 for k in range(width)]
    out = [fld.zero] * width
    for k, v in f.items():
        out[k] = v
    return out


def _list_to_form(fld: Field, vec: Sequence):
    if fld is Field.F2:
        return sum(1 << k for k, v in enumerate(vec) if v % 2)
    return {k: v for k, v in enumerate(vec) if v}


# ---------------------------------------------------------------------------
# tables


@dataclass
class CohomologyTable:
    """dims[s][d] = dim H^s(J; M_{≤d}); markers flag truncation edges."""

    title: str
    coefficient: str
    s_values: list[int]
    dims: dict[int, list[int]]
    N: int
    D: int
    representatives: dict[int, list[dict]] = dc_field(default_factory=dict)
    markers: dict[int, list[str]] = dc_field(default_factory=dict)

    def total(self, s: int) -> int:
        return self.dims[s][-1]

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "coefficients": self.coefficient,
            "D": self.D,
            "N": self.N,
            "rows": [
                {
                    "s": s,
                    "dims_by_degree": self.dims[s],
                    "dim": self.dims[s][-1],
                    "markers": self.markers.get(s, []),
                    "representatives": self.representatives.get(s, []),
                }
                for s in self.s_values
            ],
            "note": "entry d is dim H^s with coefficients truncated to degrees ≤ d; "
                    f"'{EDGE_S}' marks s = D-1, '{EDGE_N}' marks the top degree N",
        }


def _markers(s: int, D: int, dims: list[int]) -> list[str]:
    out = []
    if s == D - 1:
        out.append(EDGE_S)
    if len(dims) >= 2 and dims[-1] != dims[-2]:
        out.append(EDGE_N)
    return out


def support_top(X: Comodule | UnstableCoalgebra) -> int:
    """Highest degree carrying a basis element (0 for the zero space)."""
    return max((d for d in range(X.space.trunc + 1) if X.space.dim(d)), default=0)


def restrict_comodule(M: Comodule, base: UnstableCoalgebra, top: int) -> Comodule:
    """M_{≤top} as a comodule over base (a truncation of M's base through at least top)."""
    if top > M.trunc:
        raise TruncationOverflow(f"the coefficients are known only through degree {M.trunc}")
    if base.trunc < top or base.space.basis[: top + 1] != M.base.space.basis[: top + 1]:
        raise StructuralError("the new base does not agree with the coefficients' base through the needed degree")
    module = UnstableModule(M.space.truncate(top), {k: m for k, m in M.module.action.items() if k[1] <= top})
    coaction = {x: t for x, t in M.coaction.items() if x[0] <= top}
    return Comodule(base, module, coaction)


def _pad(dims: list[int], N: int) -> list[int]:
    return dims + [dims[-1]] * (N + 1 - len(dims))


def cohomology(J: UnstableCoalgebra, M: Comodule, s_max: int = 2, N: int | None = None,
               strategy: str = "gu", res: CWResolution | None = None, with_representatives: bool = True,
               title: str = "") -> CohomologyTable:
    """H^s(J; M_{≤d}) for 0 <= s <= s_max and d <= N, from a resolution with D = s_max + 1.

    Cochains only see fresh cogenerators in degrees where M is nonzero, so the
    resolution is built through the top degree of M; above it the cumulative
    values are constant.
    """
    N = M.trunc if N is None else N
    if N > M.trunc:
        raise TruncationOverflow(f"the coefficients are known only through degree {M.trunc}")
    top = min(N, support_top(M))
    if res is None:
        res = build_resolution(J, s_max + 1, max(top, 1), strategy)
    if res.D < s_max + 1:
        raise EdgeUndefined(f"H^{s_max} needs a resolution with D ≥ {s_max + 1}")
    cx = QuillenComplex(res, restrict_comodule(M, res.base, top))
    dims, reps, marks = {}, {}, {}
    for s in range(s_max + 1):
        dims[s] = _pad(cx.cohomology_dims(s), N)
        marks[s] = _markers(s, res.D, dims[s])
        if with_representatives:
            reps[s] = [cx.form_to_dict(s, r) for r in cx.representatives(s)]
    return CohomologyTable(title or "H^s(J; M)", "comodule", list(range(s_max + 1)), dims, N, res.D, reps, marks)


def _check_known(K: UnstableCoalgebra, N: int) -> None:
    if K.trunc < N:
        raise TruncationOverflow(f"the coalgebra is known only through degree {K.trunc}; "
                                 f"lower --trunc to ≤ {K.trunc} or extend the input")


def quillen_table(K: UnstableCoalgebra, s_max: int = 2, t_max: int = 2, N: int = 8, strategy: str = "gu",
                  res: CWResolution | None = None, with_representatives: bool = True,
                  D: int | None = None) -> dict[int, CohomologyTable]:
    """H^s(K; ΣᵗK) for 1 <= t <= t_max and s <= s_max, all from one resolution."""
    _check_known(K, N)
    K = K.truncate(N) if K.trunc > N else K
    if res is None:
        D = s_max + 1 if D is None else D
        res = build_resolution(K, D, max(1, min(N, support_top(K) + t_max)), strategy)
    out = {}
    for t in range(1, t_max + 1):
        M = suspension_comodule(K, t, trunc=N)
        tab = cohomology(res.base, M, s_max, N, strategy, res, with_representatives, f"H^s(K; Σ^{t}K)")
        tab.coefficient = f"Σ^{t}K"
        out[t] = tab
    return out


def obstruction_groups(K: UnstableCoalgebra, n_max: int = 1, N: int = 8, strategy: str = "gu",
                       res: CWResolution | None = None) -> dict:
    """Table A: H^(n+2)(K; ΣⁿK); table B: H^(n+1)(K; ΣⁿK), for 1 <= n <= n_max."""
    _check_known(K, N)
    K = K.truncate(N) if K.trunc > N else K
    D = n_max + 3
    if res is None:
        res = build_resolution(K, D, max(1, min(N, support_top(K) + n_max)), strategy)
    if res.D < D:
        raise EdgeUndefined(f"the obstruction tables need a resolution with D ≥ {D}")
    A, B = [], []
    for n in range(1, n_max + 1):
        M = suspension_comodule(K, n, trunc=N)
        top = min(N, support_top(M))
        cx = QuillenComplex(res, restrict_comodule(M, res.base, top))
        for s, table in ((n + 2, A), (n + 1, B)):
            dims = _pad(cx.cohomology_dims(s), N)
            zero = dims[-1] == 0
            table.append({
                "n": n,
                "s": s,
                "dims_by_degree": dims,
                "dim": dims[-1],
                "markers": _markers(s, res.D, dims),
                "verdict": (f"obstruction group zero ⇒ stage-{n} obstruction vanishes (within truncation)"
                            if zero else "group nonzero ⇒ indeterminate"),
            })
    return {"A": A, "B": B, "D": res.D, "N": N}


# ---------------------------------------------------------------------------
# the object-level cofree complex Qˢ = R(Vˢ) ⊗ K


def _fresh_space(res: CWResolution, s: int) -> GradedSpace:
    return GradedSpace.from_degrees(res.field, res.N, [(v.name, v.degree) for v in res.fresh[s]])


@dataclass
class CofreeTerm:
    V: GradedSpace
    R: UnstableModule  # P(G(V))
    inc: GradedMap  # R -> G(V), monomial-dual coordinates
    algebra: object  # FreeAlgebra dual to G(V)
    Q: Comodule  # R ⊗ K
    proj: GradedMap  # R -> V, evaluation on fundamental classes


def _cofree_term(res: CWResolution, s: int) -> CofreeTerm:
    V = _fresh_space(res, s)
    G, tag = cofree_coalgebra(V, res.N)
    R, inc = primitives(G)
    A = tag.algebra
    blocks = {}
    for d in range(res.N + 1):
        pos = A.mono_pos(d)
        entries = {}
        for r, name in enumerate(V.basis[d]):
            u = next(k for k, (l, _) in enumerate(A.cogens) if l == name)
            row = pos[(A.fund[u],)]
            for c in range(R.space.dim(d)):
                v = inc.block(d).entry(row, c)
                if v:
                    entries[(r, c)] = v
        blocks[d] = Matrix.from_entries(res.field, V.dim(d), R.space.dim(d), entries)
    proj = GradedMap(R.space, V, 0, blocks)
    return CofreeTerm(V, R, inc, A, cofree_comodule(R, res.base), proj)


class CofreeComplex:
    """Qˢ for 0 <= s <= top with comodule differentials ∂ˢ: Qˢ -> Qˢ⁺¹."""

    def __init__(self, res: CWResolution, top: int):
        if top > res.D:
            raise EdgeUndefined(f"Q^{top} needs level {top} of the resolution (D = {res.D})")
        self.res = res
        self.K = res.base
        self.field = res.field
        self.terms = [_cofree_term(res, s) for s in range(top + 1)]
        self._diff: dict[int, GradedMap] = {}

    @property
    def top(self) -> int:
        return len(self.terms) - 1

    def Q(self, s: int) -> Comodule:
        return self.terms[s].Q

    def adjoint(self, f: GradedMap, s: int) -> GradedMap:
        """X -> Qˢ  ↦  X -> Vˢ (counit on K, evaluation on fundamentals)."""
        T = self.terms[s]
        Qs = T.Q
        blocks = {}
        for d in range(Qs.trunc + 1):
            pos = tensor_index(T.R.space, self.K.space, d)
            entries = {}
            for ((a, r), (b, j)), k in pos.items():
                if b != 0:
                    continue
                for rr in range(T.V.dim(d)):
                    v = T.proj.block(d).entry(rr, r)
                    if v:
                        entries[(rr, k)] = v
            blocks[d] = Matrix.from_entries(self.field, T.V.dim(d), Qs.space.dim(d), entries)
        counit = GradedMap(Qs.space, T.V, 0, blocks)
        return counit @ f

    def lift(self, g: GradedMap, X: Comodule, s: int) -> GradedMap:
        """The comodule map X -> Qˢ whose adjoint is g: X -> Vˢ."""
        T = self.terms[s]
        fld = self.field
        A = T.algebra
        N = min(X.trunc, T.Q.trunc)
        hat: dict[tuple[int, int], list] = {}

        def ghat(d: int, k: int) -> list:
            key = (d, k)
            if key in hat:
                return hat[key]
            monos = A.monomials(d)
            vec = [fld.zero] * len(monos)
            pos = A.mono_pos(d)
            for gi, (u, I, deg) in enumerate(A.gens):
                if deg != d:
                    continue
                # value of ĝ(x) on Sq^I ι_u: coefficient of u in g(x·Sq^I)
                base = d - sum(I)
                img = X.module.act_word_index(I, d, {k: fld.one}) if I else {k: fld.one}
                if not img:
                    continue
                name = A.cogens[u][0]
                r = T.V.basis[base].index(name)
                val = fld.zero
                for kk, c in img.items():
                    val += c * g.block(base).entry(r, kk)
                if fld is Field.F2:
                    val %= 2
                if val:
                    vec[pos[(gi,)]] = val
            try:
                y = T.inc.block(d).solve(vec)
            except NoSolution as exc:
                raise InvariantViolation("the adjoint lift is not primitive; the source is not strictly unstable") from exc
            hat[key] = y
            return y

        blocks = {}
        for d in range(N + 1):
            pos = tensor_index(T.R.space, self.K.space, d)
            entries: dict = {}
            for k in range(X.space.dim(d)):
                for ((a, i), (b, j)), c in X.coaction[(d, k)].items():
                    y = ghat(b, j)
                    sign = fld.sign(a * b)
                    for r, v in enumerate(y):
                        if v:
                            key = (pos[((b, r), (a, i))], k)
                            entries[key] = entries.get(key, 0) + c * sign * v
            if fld is Field.F2:
                entries = {key: v % 2 for key, v in entries.items() if v % 2}
            blocks[d] = Matrix.from_entries(fld, T.Q.space.dim(d), X.space.dim(d), entries)
        return GradedMap(X.space, T.Q.space, 0, blocks)

    def cochain_of(self, g: GradedMap, cx: QuillenComplex, s: int):
        """A map M -> Vˢ as a form over the coordinates of cx at level s."""
        fld = self.field
        out = _fzero(fld)
        for r, c in enumerate(cx.coords[s]):
            row = self.terms[s].V.basis[c.degree].index(self.res.fresh[s][c.index].name)
            v = g.block(c.degree).entry(row, c.m)
            if v:
                out = _fadd(fld, out, (1 << r) if fld is Field.F2 else {r: fld.one}, v)
        return out

    def map_of(self, form, cx: QuillenComplex, s: int) -> GradedMap:
        """Inverse of cochain_of."""
        fld = self.field
        vec = _form_to_list(fld, form, len(cx.coords[s]))
        V = self.terms[s].V
        entries: dict[int, dict] = {}
        for r, v in enumerate(vec):
            if v:
                c = cx.coords[s][r]
                row = V.basis[c.degree].index(self.res.fresh[s][c.index].name)
                entries.setdefault(c.degree, {})[(row, c.m)] = v
        M = cx.M
        return GradedMap(M.space, V, 0, {d: Matrix.from_entries(fld, V.dim(d), M.space.dim(d), entries.get(d, {}))
                                         for d in range(M.trunc + 1)})

    def differential(self, s: int) -> GradedMap:
        """∂ˢ: Qˢ -> Qˢ⁺¹ from δ applied to the universal cochain."""
        hit = self._diff.get(s)
        if hit is not None:
            return hit
        if s + 1 > self.top:
            raise EdgeUndefined(f"∂^{s} needs Q^{s + 1}")
        Qs = self.Q(s)
        cx = QuillenComplex(self.res, Qs)
        u = self.cochain_of(self.adjoint(identity(Qs.space), s), cx, s)
        g = self.map_of(cx.apply(s, u), cx, s + 1)
        hit = self.lift(g, Qs, s + 1)
        self._diff[s] = hit
        return hit

    def check(self) -> ValidationReport:
        rep = ValidationReport("cofree complex")
        comod = rep.check("comodule-maps")
        sq = rep.check("square-zero")
        for s in range(self.top):
            f = self.differential(s)
            if not is_comodule_map(f, self.Q(s), self.Q(s + 1)):
                comod.fail(f"∂^{s}", "comodule map", "∂ does not commute with the coaction or the action")
            if s + 1 < self.top and not (self.differential(s + 1) @ f).is_zero():
                sq.fail(f"∂^{s + 1}∂^{s}", "square zero", "nonzero composite")
        return rep

    def quotient(self, s: int) -> tuple[Comodule, GradedMap]:
        """Bˢ = coker ∂ˢ⁻¹ with its projection qˢ: Qˢ -> Bˢ (B⁰ = Q⁰)."""
        Qs = self.Q(s)
        if s == 0:
            return Qs, identity(Qs.space)
        return quotient_comodule(Qs, self.differential(s - 1))

    def principal(self, s: int) -> GradedMap:
        """d⁰: Bˢ -> Qˢ⁺¹ induced by ∂ˢ."""
        B, q = self.quotient(s)
        return solve_lift(self.differential(s), q, mode="extend")


def quotient_comodule(Y: Comodule, f: GradedMap) -> tuple[Comodule, GradedMap]:
    """Y / im f for a comodule map f into Y, with the projection."""
    B, q = cokernel(f)
    fld = Y.field
    keep = {d: [Y.space.basis[d].index(n) for n in B.basis[d]] for d in range(B.trunc + 1)}
    coaction = {}
    for d in range(B.trunc + 1):
        for r, k in enumerate(keep[d]):
            terms: dict = {}
            for ((a, i), (b, j)), c in Y.coaction[(d, k)].items():
                col = q.block(b).column(j)
                for rr, v in enumerate(col):
                    if v:
                        key = ((a, i), (b, rr))
                        terms[key] = terms.get(key, 0) + c * v
            coaction[(d, r)] = terms
    action = {}
    if fld is Field.F2:
        for (i, d), m in Y.module.action.items():
            sel = Matrix.from_entries(fld, Y.space.dim(d), len(keep[d]), {(k, r): 1 for r, k in enumerate(keep[d])})
            blk = q.block(d - i) @ m @ sel
            if not blk.is_zero():
                action[(i, d)] = blk
    return Comodule(Y.base, UnstableModule(B, action), coaction), q


# ---------------------------------------------------------------------------
# extensions


@dataclass
class ExtensionData:
    """A semi-split extension Bⁿ -> E -> ΣⁿK of K-comodules at stage n."""

    n: int
    complex: CofreeComplex
    B: Comodule
    M: Comodule
    E: Comodule
    iota: GradedMap
    pi: GradedMap
    twist: list

    @property
    def field(self) -> Field:
        return self.E.field


def _twist_variables(B: Comodule, M: Comodule) -> list[tuple]:
    K = B.base
    out = []
    for d in range(M.trunc + 1):
        for k in range(M.space.dim(d)):
            for a in range(1, d + 1):
                for i in range(K.space.dim(a)):
                    for j in range(B.space.dim(d - a)):
                        out.append(("tau", d, k, a, i, j))
            if M.field is Field.F2:
                for i in range(1, d + 1):
                    if 2 * i >= d:
                        break
                    for j in range(B.space.dim(d - i)):
                        out.append(("alpha", d, k, i, j))
    return out


def extension_from_twist(cc: CofreeComplex, n: int, twist: Sequence | None = None) -> ExtensionData:
    """E = Bⁿ ⊕ ΣⁿK with the coaction and action on ΣⁿK twisted into Bⁿ."""
    if n < 1:
        raise StructuralError("extensions start at stage n = 1")
    B, _ = cc.quotient(n)
    N = B.trunc
    M = suspension_comodule(cc.K, n, trunc=N)
    variables = _twist_variables(B, M)
    twist = list(twist) if twist is not None else [0] * len(variables)
    if len(twist) != len(variables):
        raise StructuralError(f"twist has {len(twist)} entries, expected {len(variables)}")
    fld = B.field
    nb = [B.space.dim(d) for d in range(N + 1)]
    names = []
    for d in range(N + 1):
        bn, mn = B.space.basis[d], M.space.basis[d]
        if set(bn) & set(mn):
            raise StructuralError("basis names of Bⁿ and ΣⁿK collide")
        names.append(tuple(bn) + tuple(mn))
    sp = GradedSpace(fld, N, tuple(names))
    coaction = {}
    for d in range(N + 1):
        for k in range(nb[d]):
            coaction[(d, k)] = dict(B.coaction[(d, k)])
        for k in range(M.space.dim(d)):
            terms = {}
            for ((a, i), (b, j)), c in M.coaction[(d, k)].items():
                terms[((a, i), (b, nb[b] + j))] = c
            coaction[(d, nb[d] + k)] = terms
    alpha: dict[tuple[int, int], dict] = {}
    for var, c in zip(variables, twist):
        c = fld.coerce(c)
        if not c:
            continue
        if var[0] == "tau":
            _, d, k, a, i, j = var
            t = coaction[(d, nb[d] + k)]
            key = ((a, i), (d - a, j))
            t[key] = t.get(key, 0) + c
        else:
            _, d, k, i, j = var
            alpha.setdefault((i, d), {})[(j, nb[d] + k)] = c
    action = {}
    if fld is Field.F2:
        for d in range(N + 1):
            for i in range(1, d + 1):
                entries = {}
                for r, c, v in B.module.action_matrix(i, d).nonzero_entries():
                    entries[(r, c)] = v
                for r, c, v in M.module.action_matrix(i, d).nonzero_entries():
                    entries[(nb[d - i] + r, nb[d] + c)] = v
                entries.update(alpha.get((i, d), {}))
                if entries:
                    action[(i, d)] = Matrix.from_entries(fld, sp.dim(d - i), sp.dim(d), entries)
    E = Comodule(cc.K, UnstableModule(sp, action), coaction)
    iota = GradedMap(B.space, sp, 0, {d: Matrix.from_entries(fld, sp.dim(d), nb[d], {(r, r): 1 for r in range(nb[d])})
                                      for d in range(N + 1)})
    pi = GradedMap(sp, M.space, 0, {d: Matrix.from_entries(fld, M.space.dim(d), sp.dim(d),
                                                           {(r, nb[d] + r): 1 for r in range(M.space.dim(d))})
                                    for d in range(N + 1)})
    return ExtensionData(n, cc, B, M, E, iota, pi, twist)


def comodule_residual(E: Comodule) -> dict:
    """LHS - RHS of every comodule axiom (coassociativity, Adem, Cartan compatibility)."""
    K, fld = E.base, E.field
    out: dict = {}

    def put(key, v):
        out[key] = out.get(key, 0) + v

    for (d, k), terms in E.coaction.items():
        for ((a, i), (b, j)), c in terms.items():
            for ((a1, i1), (a2, i2)), c1 in K.diag[(a, i)].items():
                put(("coassoc", d, k, (a1, i1), (a2, i2), (b, j)), c * c1)
            for ((a2, i2), (b2, j2)), c2 in E.coaction[(b, j)].items():
                put(("coassoc", d, k, (a, i), (a2, i2), (b2, j2)), -c * c2)
    if fld is Field.F2:
        for d in range(E.trunc + 1):
            for k in range(E.space.dim(d)):
                for n in range(1, d + 1):
                    for kk, c in E.module.act_index(n, d, {k: 1}).items():
                        for key, v in E.coaction[(d - n, kk)].items():
                            put(("compat", d, k, n, key), c * v)
                    for key, v in _tensor_act(K, E.module, n, E.coaction[(d, k)]).items():
                        put(("compat", d, k, n, key), v)
                for b in range(1, d + 1):
                    for a in range(1, 2 * b):
                        if a + b > d:
                            break
                        for r, c in E.module.act_word_index((a, b), d, {k: 1}).items():
                            put(("adem", d, k, a, b, r), c)
                        for t in adem_terms(a, b):
                            for r, c in E.module.act_word_index(t, d, {k: 1}).items():
                                put(("adem", d, k, a, b, r), c)
                for (i, dd), m in E.module.action.items():
                    if dd == d and 2 * i >= d:
                        for r in range(m.nrows):
                            if m.entry(r, k):
                                put(("strict", d, k, i, r), 1)
    if fld is Field.F2:
        return {key: v % 2 for key, v in out.items() if v % 2}
    return {key: v for key, v in out.items() if v}


def twist_space(cc: CofreeComplex, n: int) -> list[list]:
    """Basis of the twists for which E is a strictly unstable comodule."""
    base = extension_from_twist(cc, n)
    variables = _twist_variables(base.B, base.M)
    fld = cc.field
    keys: dict = {}
    cols = []
    for v in range(len(variables)):
        t = [0] * len(variables)
        t[v] = 1
        res = comodule_residual(extension_from_twist(cc, n, t).E)
        col = {}
        for key, c in res.items():
            r = keys.setdefault(key, len(keys))
            col[r] = c
        cols.append(col)
    entries = {(r, c): v for c, col in enumerate(cols) for r, v in col.items()}
    if not variables:
        return []
    return Matrix.from_entries(fld, len(keys), len(variables), entries).nullspace()


def validate_extension(ext: ExtensionData) -> ValidationReport:
    rep = ValidationReport("extension")
    res = comodule_residual(ext.E)
    axioms = rep.check("comodule")
    if res:
        key = next(iter(sorted(res, key=repr)))
        axioms.fail(str(key[0]), "axiom", f"residual at {key}")
    exact = rep.check("exactness")
    if not (ext.pi @ ext.iota).is_zero():
        exact.fail("π∘ι", "zero", "π∘ι ≠ 0")
    for d in range(ext.E.trunc + 1):
        if ext.iota.block(d).rank() != ext.B.space.dim(d) or ext.pi.block(d).rank() != ext.M.space.dim(d):
            exact.fail(f"degree {d}", "split", "ι is not monic or π is not epic")
    maps = rep.check("comodule-maps")
    if not is_comodule_map(ext.iota, ext.B, ext.E):
        maps.fail("ι", "comodule map", "ι is not a comodule map")
    if not is_comodule_map(ext.pi, ext.E, ext.M):
        maps.fail("π", "comodule map", "π is not a comodule map")
    return rep


# ---------------------------------------------------------------------------
# characteristic and difference cocycles


def _retraction(ext: ExtensionData) -> GradedMap:
    """The graded splitting E -> Bⁿ onto the first block."""
    fld = ext.field
    B, E = ext.B.space, ext.E.space
    return GradedMap(E, B, 0, {d: Matrix.from_entries(fld, B.dim(d), E.dim(d), {(r, r): 1 for r in range(B.dim(d))})
                               for d in range(E.trunc + 1)})


def auto_lifting(ext: ExtensionData) -> GradedMap:
    """λ: E -> Qⁿ⁺¹ extending d⁰ by zero on the complement (adjoint side)."""
    cc, n = ext.complex, ext.n
    g0 = cc.adjoint(cc.principal(n), n + 1)
    return cc.lift(g0 @ _retraction(ext), ext.E, n + 1)


def _check_lifting(ext: ExtensionData, lam: GradedMap) -> None:
    cc, n = ext.complex, ext.n
    if lam @ ext.iota != cc.principal(n):
        raise PreconditionError("λ∘ι ≠ d⁰: the lifting does not extend the attaching data")
    if not is_comodule_map(lam, ext.E, cc.Q(n + 1)):
        raise PreconditionError("λ is not a comodule map")


@dataclass
class CocycleResult:
    s: int
    cochain: object
    is_zero_class: bool
    witness: object
    mu: GradedMap | None = None
    map: GradedMap | None = None
    complex: QuillenComplex | None = None

    def to_dict(self) -> dict:
        cx = self.complex
        return {
            "s": self.s,
            "cocycle": cx.form_to_dict(self.s, self.cochain),
            "class": "zero" if self.is_zero_class else "nonzero",
            "witness": cx.form_to_dict(self.s - 1, self.witness) if self.is_zero_class and self.s >= 1 else None,
        }


def _coeff_complex(ext: ExtensionData) -> QuillenComplex:
    return QuillenComplex(ext.complex.res, ext.M)


def mu_of(ext: ExtensionData, lam: GradedMap) -> GradedMap:
    cc, n = ext.complex, ext.n
    _, q = cc.quotient(n + 1)
    try:
        return solve_lift(q @ lam, ext.pi, mode="extend")
    except NoSolution as exc:
        raise InvariantViolation("q∘λ does not factor through π; the extension is not semi-split") from exc


def characteristic_cocycle(ext: ExtensionData, lam: GradedMap | None = None,
                           cx: QuillenComplex | None = None) -> CocycleResult:
    """ξ = d⁰∘μ with μ the factorization of q∘λ through π; class in H^(n+2)(K; ΣⁿK)."""
    cc, n = ext.complex, ext.n
    lam = auto_lifting(ext) if lam is None else lam
    _check_lifting(ext, lam)
    mu = mu_of(ext, lam)
    xi = cc.principal(n + 1) @ mu
    cx = cx or _coeff_complex(ext)
    c = cc.cochain_of(cc.adjoint(xi, n + 2), cx, n + 2)
    if cc.lift(cc.map_of(c, cx, n + 2), ext.M, n + 2) != xi:
        raise InvariantViolation("ξ is not determined by its adjoint")
    if n + 3 <= cx.D and not cx.is_cocycle(n + 2, c):
        raise InvariantViolation("ξ is not a cocycle")
    zero, witness = cx.is_coboundary(n + 2, c)
    return CocycleResult(n + 2, c, zero, witness, mu, xi, cx)


def difference_cocycle(ext: ExtensionData, lam: GradedMap, lam2: GradedMap,
                       cx: QuillenComplex | None = None) -> CocycleResult:
    """ζ with ζ∘π = λ - λ′ for two liftings with μ = μ′ = 0; class in H^(n+1)(K; ΣⁿK)."""
    cc, n = ext.complex, ext.n
    for name, f in (("λ", lam), ("λ′", lam2)):
        _check_lifting(ext, f)
        if not mu_of(ext, f).is_zero():
            raise PreconditionError(f"μ ≠ 0 for {name}; the difference obstruction needs μ = μ′ = 0")
    eta = lam - lam2
    if not (eta @ ext.iota).is_zero():
        raise InvariantViolation("λ - λ′ does not kill ι(Bⁿ)")
    zeta = solve_lift(eta, ext.pi, mode="extend")
    _, q = cc.quotient(n + 1)
    if not (q @ zeta).is_zero():
        raise InvariantViolation("q∘ζ ≠ 0")
    cx = cx or _coeff_complex(ext)
    c = cc.cochain_of(cc.adjoint(zeta, n + 1), cx, n + 1)
    if not cx.is_cocycle(n + 1, c):
        raise InvariantViolation("ζ is not a cocycle")
    zero, witness = cx.is_coboundary(n + 1, c)
    return CocycleResult(n + 1, c, zero, witness, None, zeta, cx)


def perturb(ext: ExtensionData, lam: GradedMap, form, cx: QuillenComplex | None = None) -> GradedMap:
    """λ + η∘π for the comodule map η: ΣⁿK -> Qⁿ⁺¹ with adjoint given by a cochain."""
    cc = ext.complex
    cx = cx or _coeff_complex(ext)
    eta = cc.lift(cc.map_of(form, cx, ext.n + 1), ext.M, ext.n + 1)
    return lam + eta @ ext.pi


def extension_comparison(ext: ExtensionData, lam: GradedMap, lam2: GradedMap, theta,
                         cx: QuillenComplex | None = None) -> GradedMap:
    """h = id + ι∘q∘ϑ∘π with λ′∘h = λ, h∘ι = ι, π∘h = π, from δϑ = ζ."""
    cc, n = ext.complex, ext.n
    cx = cx or _coeff_complex(ext)
    diff = difference_cocycle(ext, lam, lam2, cx)
    if cx.apply(n, theta) != diff.cochain:
        raise PreconditionError("ϑ is not a witness: δϑ differs from the difference cocycle")
    th = cc.lift(cc.map_of(theta, cx, n), ext.M, n)
    _, q = cc.quotient(n)
    phi = ext.iota @ q @ th @ ext.pi
    h = identity(ext.E.space) + phi
    checks = [
        (h @ ext.iota == ext.iota, "h∘ι = ι"),
        (ext.pi @ h == ext.pi, "π∘h = π"),
        (lam2 @ h == lam, "λ′∘h = λ"),
        (is_comodule_map(h, ext.E, ext.E), "h is a comodule map"),
    ]
    for ok, what in checks:
        if not ok:
            raise InvariantViolation(f"comparison map fails: {what}")
    inv = identity(ext.E.space) - phi
    if not (h @ inv == identity(ext.E.space)):
        raise InvariantViolation("comparison map is not invertible")
    return h


# ---------------------------------------------------------------------------
# brute force


def _flatten(f: GradedMap) -> list:
    return [v for d in sorted(f.blocks) for row in f.blocks[d].to_lists() for v in row]


def _combine(basis: list[GradedMap], coeffs: Sequence, start: GradedMap) -> GradedMap:
    out = start
    for c, f in zip(coeffs, basis):
        if c:
            out = out + f.scale(c)
    return out


def _affine_span(fld: Field, basis: list[GradedMap], constraint, target: GradedMap, limit: int) -> list[list]:
    """Coefficient vectors c with constraint(Σ cₖ fₖ) = target, enumerated over F2."""
    if fld is not Field.F2:
        raise StructuralError("exhaustive enumeration is only available over F2")
    rhs = _flatten(target)
    width = len(basis)
    if not width:
        return [[]] if not any(rhs) else []
    if not rhs:
        A = Matrix.zeros(fld, 0, width)
        x0 = [0] * width
    else:
        A = Matrix.from_lists(fld, [_flatten(constraint(f)) for f in basis], len(rhs)).transpose()
        try:
            x0 = A.solve(rhs)
        except NoSolution:
            return []
    null = A.nullspace()
    if len(null) > limit:
        raise StructuralError(f"2^{len(null)} candidates exceed the enumeration limit 2^{limit}")
    out = []
    for bits in range(1 << len(null)):
        c = list(x0)
        for k, v in enumerate(null):
            if bits >> k & 1:
                c = [(a + b) % 2 for a, b in zip(c, v)]
        out.append(c)
    return out


def all_liftings(ext: ExtensionData, limit: int = 16) -> list[GradedMap]:
    """Every comodule map λ: E -> Qⁿ⁺¹ with λ∘ι = d⁰, enumerated inside Hom_K(E, Qⁿ⁺¹)."""
    cc, n = ext.complex, ext.n
    Q = cc.Q(n + 1)
    hom = comodule_hom(ext.E, Q)
    zero = GradedMap(ext.E.space, Q.space, 0, {})
    sols = _affine_span(ext.field, hom.basis, lambda f: f @ ext.iota, cc.principal(n), limit)
    return [_combine(hom.basis, c, zero) for c in sols]


def brute_force_characteristic(ext: ExtensionData, limit: int = 16) -> bool:
    """True iff some lifting λ has ξ = 0; ξ∘π = d⁰∘q∘λ and π is onto."""
    cc, n = ext.complex, ext.n
    _, q = cc.quotient(n + 1)
    d1 = cc.principal(n + 1)
    return any((d1 @ q @ lam).is_zero() for lam in all_liftings(ext, limit))


def vanishing_liftings(ext: ExtensionData, limit: int = 16) -> list[GradedMap]:
    """All liftings λ with q∘λ = 0 (equivalently μ = 0)."""
    _, q = ext.complex.quotient(ext.n + 1)
    return [lam for lam in all_liftings(ext, limit) if (q @ lam).is_zero()]


def brute_force_difference(ext: ExtensionData, lam: GradedMap, lam2: GradedMap, limit: int = 16) -> bool:
    """True iff some h = id + ι∘q∘θ∘π with θ ∈ Hom_K(ΣⁿK, Qⁿ) satisfies λ′∘h = λ."""
    cc, n = ext.complex, ext.n
    _, q = cc.quotient(n)
    hom = comodule_hom(ext.M, cc.Q(n))
    shift = lam2 @ ext.iota @ q
    return bool(_affine_span(ext.field, hom.basis, lambda th: shift @ th @ ext.pi, lam - lam2, limit))


# ---------------------------------------------------------------------------
# named twists and liftings (document form)


def twist_terms(ext: ExtensionData) -> dict:
    """The twist of an extension as named coaction and action corrections."""
    K, B, M, fld = ext.complex.K, ext.B, ext.M, ext.field
    coaction: dict[str, list] = {}
    sq: dict[tuple[int, str], list] = {}
    for var, c in zip(_twist_variables(B, M), ext.twist):
        c = fld.coerce(c)
        if not c:
            continue
        if var[0] == "tau":
            _, d, k, a, i, j = var
            coaction.setdefault(M.space.basis[d][k], []).append(
                [K.space.basis[a][i], B.space.basis[d - a][j], fld.format(c)])
        else:
            _, d, k, i, j = var
            sq.setdefault((i, M.space.basis[d][k]), []).append([B.space.basis[d - i][j], fld.format(c)])
    return {
        "coaction": [{"on": on, "terms": t} for on, t in coaction.items()],
        "sq": [{"op": i, "on": on, "value": v} for (i, on), v in sq.items()],
    }


def twist_from_terms(cc: CofreeComplex, n: int, terms: dict) -> list:
    """Inverse of twist_terms; unknown names raise StructuralError."""
    B, _ = cc.quotient(n)
    M = suspension_comodule(cc.K, n, trunc=B.trunc)
    fld = cc.field
    variables = _twist_variables(B, M)
    index = {v: r for r, v in enumerate(variables)}
    vec = [fld.zero] * len(variables)

    def loc(space, name, what):
        if name not in space:
            raise StructuralError(f"twist: {name!r} is not a basis element of {what}")
        return space.locate(name)

    for entry in terms.get("coaction", []):
        d, k = loc(M.space, entry["on"], "ΣⁿK")
        for t in entry["terms"]:
            a, i = loc(cc.K.space, t[0], "K")
            b, j = loc(B.space, t[1], "Bⁿ")
            key = ("tau", d, k, a, i, j)
            if key not in index:
                raise StructuralError(f"twist: {t[0]}⊗{t[1]} is not an admissible coaction term of {entry['on']}")
            vec[index[key]] += fld.parse(t[2] if len(t) > 2 else 1)
    for entry in terms.get("sq", []):
        d, k = loc(M.space, entry["on"], "ΣⁿK")
        i = int(entry["op"])
        for name, c in entry["value"]:
            b, j = loc(B.space, name, "Bⁿ")
            key = ("alpha", d, k, i, j)
            if key not in index or b != d - i:
                raise StructuralError(f"twist: {entry['on']}·Sq{i} = {name} is not admissible")
            vec[index[key]] += fld.parse(c)
    return [fld.coerce(v) for v in vec]


def form_from_dict(cx: QuillenComplex, s: int, data: dict):
    """Inverse of QuillenComplex.form_to_dict."""
    fld = cx.field
    labels = {cx.coord_label(s, r): r for r in range(len(cx.coords[s]))}
    out = _fzero(fld)
    for label, c in data.items():
        if label not in labels:
            raise StructuralError(f"{label!r} is not a cochain coordinate at level {s}")
        r = labels[label]
        out = _fadd(fld, out, (1 << r) if fld is Field.F2 else {r: fld.one}, fld.parse(c))
    return out


def verify_representatives(table: CohomologyTable, cx: QuillenComplex) -> None:
    """Re-evaluate δ on every stored representative."""
    for s, reps in table.representatives.items():
        if s + 1 > cx.D:
            continue
        for rep in reps:
            if not cx.is_cocycle(s, form_from_dict(cx, s, rep)):
                raise InvariantViolation(f"stored representative at s = {s} is not a cocycle")


# ---------------------------------------------------------------------------
# the linearized complex Hom_K(M, Qˢ), assembled directly


@dataclass
class LinearizedComplex:
    """Hom_K(M, Qˢ) with δ given by post-composition with ∂ˢ."""

    cofree: CofreeComplex
    M: Comodule
    homs: list

    def delta_matrix(self, s: int) -> Matrix:
        src, tgt = self.homs[s], self.homs[s + 1]
        d = self.cofree.differential(s)
        cols = [tgt.coordinates(d @ f) for f in src.basis]
        fld = self.cofree.field
        if not cols:
            return Matrix.zeros(fld, tgt.dim, 0)
        return Matrix.from_lists(fld, cols, tgt.dim).transpose()

    def check_square_zero(self) -> None:
        for s in range(len(self.homs) - 2):
            if not (self.delta_matrix(s + 1) @ self.delta_matrix(s)).is_zero():
                raise InvariantViolation(f"δ^{s + 1}∘δ^{s} ≠ 0 in the linearized complex")

    def cohomology_dims(self) -> list[int]:
        ranks = [self.delta_matrix(s).rank() for s in range(len(self.homs) - 1)]
        return [self.homs[s].dim - ranks[s] - (ranks[s - 1] if s else 0) for s in range(len(self.homs) - 1)]


def linearized_complex(res: CWResolution, M: Comodule, top: int | None = None) -> LinearizedComplex:
    """The complex of comodule maps into the object-level terms (slow; an oracle)."""
    top = res.D if top is None else top
    cc = CofreeComplex(res, top)
    lc = LinearizedComplex(cc, M, [comodule_hom(M, cc.Q(s)) for s in range(top + 1)])
    lc.check_square_zero()
    return lc

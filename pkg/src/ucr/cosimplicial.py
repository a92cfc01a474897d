"""Cosimplicial objects over graded spaces, coalgebras and comodules.

Indexing: ``cofaces[(n, i)]`` is dⁱ: Xⁿ⁻¹ -> Xⁿ for 0 <= i <= n, and
``codegens[(n, j)]`` is sʲ: Xⁿ⁺¹ -> Xⁿ for 0 <= j <= n.  Everything here works
on the underlying graded spaces with explicit matrices; the large cofree
objects of the resolution module never pass through this file.
"""

from __future__ import annotations

import random
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field as dc_field
from itertools import combinations
from math import comb

from .coalg import Check, ValidationReport
from .galgebra import (
    Field,
    GradedMap,
    GradedSpace,
    InvariantViolation,
    Matrix,
    StructuralError,
    TruncationOverflow,
    cokernel,
    identity,
    kernel,
    solve_lift,
)


class EdgeUndefined(TruncationOverflow):
    """Raised for quantities that sit on the cosimplicial truncation edge."""


def _space(carrier) -> GradedSpace:
    return carrier if isinstance(carrier, GradedSpace) else carrier.space


@dataclass
class CosimplicialObject:
    levels: list
    cofaces: dict[tuple[int, int], GradedMap]
    codegens: dict[tuple[int, int], GradedMap]
    kind: str = "module"
    tags: list | None = None

    def __post_init__(self) -> None:
        D = self.D
        for n in range(1, D + 1):
            for i in range(n + 1):
                f = self.cofaces.get((n, i))
                if f is None or f.source != self.space(n - 1) or f.target != self.space(n) or f.shift:
                    raise StructuralError(f"coface d^{i} into level {n} is missing or has the wrong shape")
        for n in range(D):
            for j in range(n + 1):
                f = self.codegens.get((n, j))
                if f is None or f.source != self.space(n + 1) or f.target != self.space(n) or f.shift:
                    raise StructuralError(f"codegeneracy s^{j} out of level {n + 1} is missing or has the wrong shape")

    @property
    def D(self) -> int:
        return len(self.levels) - 1

    @property
    def field(self) -> Field:
        return self.space(0).field

    def space(self, n: int) -> GradedSpace:
        return _space(self.levels[n])

    def d(self, n: int, i: int) -> GradedMap:
        return self.cofaces[(n, i)]

    def s(self, n: int, j: int) -> GradedMap:
        return self.codegens[(n, j)]

    @classmethod
    def constant(cls, carrier, D: int) -> CosimplicialObject:
        V = _space(carrier)
        idm = identity(V)
        kind = "module" if isinstance(carrier, GradedSpace) else "coalgebra"
        return cls([carrier] * (D + 1),
                   {(n, i): idm for n in range(1, D + 1) for i in range(n + 1)},
                   {(n, j): idm for n in range(D) for j in range(n + 1)}, kind)

    def replace(self, cofaces=None, codegens=None) -> CosimplicialObject:
        return CosimplicialObject(list(self.levels), {**self.cofaces, **(cofaces or {})},
                                  {**self.codegens, **(codegens or {})}, self.kind, self.tags)


def linearize(X: CosimplicialObject) -> CosimplicialObject:
    return CosimplicialObject([X.space(n) for n in range(X.D + 1)], dict(X.cofaces), dict(X.codegens), "module")


# ---------------------------------------------------------------------------
# identities


def check_identities(X: CosimplicialObject) -> ValidationReport:
    rep = ValidationReport("cosimplicial identities")
    dd, sd, ss = rep.check("d-d"), rep.check("s-d"), rep.check("s-s")
    D = X.D

    def fail(c: Check, rel: str, n: int, i: int, j: int) -> None:
        first = c.passed
        c.fail(f"level {n}", rel, f"relation fails for (n, i, j) = ({n}, {i}, {j})")
        if first:
            c.witness.update({"relation": rel, "n": n, "i": i, "j": j})

    for n in range(2, D + 1):
        for j in range(n):
            for i in range(j, n):
                if X.d(n, j) @ X.d(n - 1, i) != X.d(n, i + 1) @ X.d(n - 1, j):
                    fail(dd, "d^j d^i = d^(i+1) d^j", n, i, j)
    for n in range(D):
        for j in range(n + 1):
            for i in range(n + 2):
                lhs = X.s(n, j) @ X.d(n + 1, i)
                if i in (j, j + 1):
                    rhs = identity(X.space(n))
                elif i < j:
                    rhs = X.d(n, i) @ X.s(n - 1, j - 1)
                else:
                    rhs = X.d(n, i - 1) @ X.s(n - 1, j)
                if lhs != rhs:
                    fail(sd, "s^j d^i", n, i, j)
    for n in range(D - 1):
        for j in range(n + 1):
            for i in range(j + 1):
                if X.s(n, j) @ X.s(n + 1, i) != X.s(n, i) @ X.s(n + 1, j + 1):
                    fail(ss, "s^j s^i = s^i s^(j+1)", n, i, j)
    return rep


# ---------------------------------------------------------------------------
# helpers on stacks of maps


def _hstack_map(maps: Sequence[GradedMap], target: GradedSpace) -> GradedMap:
    """[f_0 | f_1 | ...] from a direct sum of the sources into a common target."""
    fld = target.field
    N = target.trunc
    dims = [sum(f.source.dim(d) for f in maps) if d <= min((f.source.trunc for f in maps), default=N) else 0
            for d in range(N + 1)]
    src = GradedSpace.from_dims(fld, dims, prefix="u")
    blocks = {}
    for d in range(N + 1):
        M = Matrix.zeros(fld, target.dim(d), 0)
        for f in maps:
            M = M.hstack(f.block(d))
        blocks[d] = M
    return GradedMap(src, target, 0, blocks)


def _vstack_map(maps: Sequence[GradedMap], source: GradedSpace) -> GradedMap:
    fld = source.field
    N = source.trunc
    dims = [sum(f.target.dim(d + f.shift) for f in maps) for d in range(N + 1)]
    shifts = {f.shift for f in maps}
    if len(shifts) > 1:
        raise StructuralError("stacked maps must share a shift")
    tgt = GradedSpace.from_dims(fld, dims, prefix="w")
    blocks = {}
    for d in range(N + 1):
        M = Matrix.zeros(fld, 0, source.dim(d))
        for f in maps:
            M = M.vstack(f.block(d))
        blocks[d] = M
    return GradedMap(source, tgt, 0, blocks)


def _zero_space(X: CosimplicialObject) -> GradedSpace:
    return GradedSpace.zero(X.field, X.space(0).trunc)


def _check_level(X: CosimplicialObject, n: int) -> None:
    if n < 0 or n > X.D:
        raise StructuralError(f"level {n} outside 0..{X.D}")


# ---------------------------------------------------------------------------
# co-latching, co-matching, cochains


def colatching(X: CosimplicialObject, n: int) -> tuple[GradedSpace, GradedMap]:
    """LⁿX ⊆ (Xⁿ⁻¹)ⁿ cut out by sⁱx_j = s^(j-1)x_i, with ςⁿ = (s⁰, ..., sⁿ⁻¹)."""
    _check_level(X, n)
    if n == 0:
        Z = _zero_space(X)
        return Z, GradedMap(X.space(0), Z, 0, {})
    if n == 1:
        return X.space(0), X.s(0, 0)
    prev = X.space(n - 1)
    fld = X.field
    N = prev.trunc
    prod = GradedSpace.from_dims(fld, [n * prev.dim(d) for d in range(N + 1)], prefix="x")
    conds = []
    for i, j in combinations(range(n), 2):
        blocks = {}
        for d in range(N + 1):
            m = prev.dim(d)
            cols = Matrix.zeros(fld, X.space(n - 2).dim(d), 0)
            for k in range(n):
                if k == j:
                    piece = X.s(n - 2, i).block(d)
                elif k == i:
                    piece = -X.s(n - 2, j - 1).block(d)
                else:
                    piece = Matrix.zeros(fld, X.space(n - 2).dim(d), m)
                cols = cols.hstack(piece)
            blocks[d] = cols
        conds.append(GradedMap(prod, X.space(n - 2), 0, blocks))
    C = _vstack_map(conds, prod)
    L, inc = kernel(C, prefix="l")
    sig = _vstack_map([X.s(n - 1, j) for j in range(n)], X.space(n))
    sig = GradedMap(X.space(n), prod, 0, sig.blocks)
    return L, solve_lift(sig, inc, mode="factor")


def comatching(X: CosimplicialObject, n: int) -> tuple[GradedSpace, GradedMap]:
    """MⁿX = Σ_i im dⁱ ⊆ Xⁿ with its inclusion ξⁿ."""
    _check_level(X, n)
    if n == 0:
        Z = _zero_space(X)
        return Z, GradedMap(Z, X.space(0), 0, {})
    return _image(_hstack_map([X.d(n, i) for i in range(n + 1)], X.space(n)), "m")


def _image(f: GradedMap, prefix: str) -> tuple[GradedSpace, GradedMap]:
    fld = f.field
    per, blocks = [], {}
    for d in range(f.target.trunc + 1):
        B = f.block(d) if d in f.blocks else Matrix.zeros(fld, f.target.dim(d), 0)
        R, piv = B.transpose().rref()
        rows = [R.row(r) for r in range(len(piv))]
        per.append(tuple(f"{prefix}{d}.{k}" for k in range(len(rows))))
        blocks[d] = Matrix.from_lists(fld, rows, B.nrows).transpose() if rows else Matrix.zeros(fld, B.nrows, 0)
    S = GradedSpace(fld, f.target.trunc, tuple(per))
    return S, GradedMap(S, f.target, 0, blocks)


def cochains(X: CosimplicialObject, n: int, mode: str = "C") -> tuple[GradedSpace, GradedMap]:
    """CⁿX = Xⁿ/Σ_{i≥1} im dⁱ (mode C) or BⁿX = Xⁿ/Σ_{i≥0} im dⁱ (mode B)."""
    _check_level(X, n)
    if mode not in ("C", "B"):
        raise StructuralError("mode must be 'C' or 'B'")
    V = X.space(n)
    if n == 0:
        return V, identity(V)
    first = 1 if mode == "C" else 0
    return cokernel(_hstack_map([X.d(n, i) for i in range(first, n + 1)], V))


def _section(Q: GradedSpace, V: GradedSpace) -> GradedMap:
    """The inclusion of a cokernel basis (a subset of V's basis) back into V."""
    blocks = {}
    for d in range(Q.trunc + 1):
        entries = {(V.locate(name)[1], k): 1 for k, name in enumerate(Q.basis[d])}
        blocks[d] = Matrix.from_entries(V.field, V.dim(d), Q.dim(d), entries)
    return GradedMap(Q, V, 0, blocks)


def principal_face(X: CosimplicialObject, n: int) -> GradedMap:
    """The map d⁰: BⁿX -> Cⁿ⁺¹X induced by the zeroth coface."""
    if n + 1 > X.D:
        raise EdgeUndefined(f"principal face out of level {n} needs level {n + 1} > D = {X.D}")
    B, _ = cochains(X, n, "B")
    C, p = cochains(X, n + 1, "C")
    base = p @ X.d(n + 1, 0)
    if n >= 1:
        for i in range(n + 1):
            if not (base @ X.d(n, i)).is_zero():
                raise InvariantViolation(f"d^0 does not descend to B^{n}: p∘d^0∘d^{i} != 0")
    return base @ _section(B, X.space(n))


# ---------------------------------------------------------------------------
# Moore complex, normalization, cohomotopy


@dataclass
class CochainComplex:
    terms: list[GradedSpace]
    differentials: list[GradedMap]
    inclusions: list[GradedMap] = dc_field(default_factory=list)

    def check_square_zero(self) -> None:
        for n in range(len(self.differentials) - 1):
            if not (self.differentials[n + 1] @ self.differentials[n]).is_zero():
                raise InvariantViolation(f"δ∘δ != 0 at position {n}")

    def cohomology_dims(self, n: int) -> list[int]:
        """dim Hⁿ per degree; requires δⁿ to be known."""
        if n >= len(self.differentials):
            raise EdgeUndefined(f"H^{n} needs δ^{n}, which lies beyond the computed range")
        V = self.terms[n]
        out = []
        for d in range(V.trunc + 1):
            r_out = self.differentials[n].block(d).rank()
            r_in = self.differentials[n - 1].block(d).rank() if n > 0 else 0
            out.append(V.dim(d) - r_out - r_in)
        return out


def moore_complex(X: CosimplicialObject) -> CochainComplex:
    """Nⁿ = ∩_{j<n} Ker sʲ with δ = Σ (-1)ⁱ dⁱ."""
    terms, incs = [], []
    for n in range(X.D + 1):
        V = X.space(n)
        if n == 0:
            terms.append(V)
            incs.append(identity(V))
            continue
        N, inc = kernel(_vstack_map([X.s(n - 1, j) for j in range(n)], V), prefix=f"n{n}_")
        terms.append(N)
        incs.append(inc)
    fld = X.field
    diffs = []
    for n in range(X.D):
        total = None
        for i in range(n + 2):
            f = X.d(n + 1, i).scale(fld.sign(i))
            total = f if total is None else total + f
        diffs.append(solve_lift(total @ incs[n], incs[n + 1], mode="factor"))
    cx = CochainComplex(terms, diffs, incs)
    cx.check_square_zero()
    return cx


def normalization(X: CosimplicialObject, n: int) -> tuple[GradedMap, GradedMap]:
    """Φ: Nⁿ -> Cⁿ and its inverse."""
    _check_level(X, n)
    cx = moore_complex(X)
    C, p = cochains(X, n, "C")
    phi = p @ cx.inclusions[n]
    inv = {}
    for d in phi.degrees():
        B = phi.block(d)
        if B.nrows != B.ncols or B.rank() != B.nrows:
            raise InvariantViolation(f"normalization map is not invertible in level {n}, degree {d}")
        inv[d] = B.inverse()
    return phi, GradedMap(C, cx.terms[n], 0, inv)


def cohomotopy(X: CosimplicialObject, n: int) -> GradedSpace:
    """πⁿX = Ker(BⁿX -> Cⁿ⁺¹X); undefined at the truncation edge n = D."""
    if n > X.D or n < 0:
        raise StructuralError(f"cohomotopy in dimension {n} is outside 0..{X.D}")
    if n == X.D:
        raise EdgeUndefined(f"π^{n} is undefined at the truncation edge D = {X.D}")
    K, _ = kernel(principal_face(X, n), prefix=f"π{n}_")
    return K


# ---------------------------------------------------------------------------
# monotone maps and the CW construction


def surjections(n: int) -> list[tuple[int, ...]]:
    """All order-preserving surjections [n] -> [k], as value tuples, ordered by k then lexicographically."""
    out = []
    for k in range(n + 1):
        for cuts in combinations(range(1, n + 1), k):
            vals, c = [], 0
            for x in range(n + 1):
                if c < k and x == cuts[c]:
                    c += 1
                vals.append(c)
            out.append(tuple(vals))
    return out


def face_of(sigma: tuple[int, ...], i: int) -> tuple[tuple[int, ...], int | None]:
    """Write σ∘δⁱ as (τ, None) if it is onto, or as δᵐ∘τ returning (τ, m)."""
    t = sigma[:i] + sigma[i + 1:]
    k = sigma[-1]
    present = set(t)
    if len(present) == k + 1:
        return t, None
    m = next(v for v in range(k + 1) if v not in present)
    return tuple(v - 1 if v > m else v for v in t), m


def degen_of(sigma: tuple[int, ...], j: int) -> tuple[int, ...]:
    """σ∘σʲ: repeat entry j."""
    return sigma[: j + 1] + sigma[j:]


def compose_surj(rho: tuple[int, ...], tau: tuple[int, ...]) -> tuple[int, ...]:
    """ρ∘τ for surjections τ: [n] -> [k] and ρ: [k] -> [k']."""
    return tuple(rho[v] for v in tau)


def cw_module_object(fld: Field, trunc: int, fresh: Sequence[Sequence[int]],
                     attach: Sequence[Matrix | None], D: int) -> CosimplicialObject:
    """Cosimplicial graded space whose dual is the CW simplicial object on `fresh`.

    ``fresh[k][d]`` is the number of fresh generators in level k and degree d.
    ``attach[k]`` (k >= 1) sends fresh level-k generators to the dual level k-1,
    as a block-diagonal matrix over degrees: one Matrix per degree, given as a
    dict {d: Matrix(rows = dual level k-1 basis, cols = fresh)}.
    The dual level n has basis {(σ, k, d, idx)} for surjections σ: [n] -> [k].
    """
    bases = []
    for n in range(D + 1):
        per = [[] for _ in range(trunc + 1)]
        for sigma in surjections(n):
            k = sigma[-1]
            for d in range(trunc + 1):
                for idx in range(fresh[k][d] if k < len(fresh) else 0):
                    per[d].append((sigma, k, idx))
        bases.append(per)
    pos = [[{key: r for r, key in enumerate(per[d])} for d in range(trunc + 1)] for per in bases]

    def degeneracy_image(vec: dict, tau: tuple[int, ...], d: int, n: int) -> dict:
        out: dict = {}
        for (rho, k, idx), c in vec.items():
            key = (compose_surj(rho, tau), k, idx)
            out[key] = out.get(key, 0) + c
        return out

    def dual_face(n: int, i: int, d: int) -> Matrix:
        """dᵢ on the dual side: level n -> level n-1 in degree d."""
        src, tgt = bases[n][d], pos[n - 1][d]
        entries: dict = {}
        for col, (sigma, k, idx) in enumerate(src):
            tau, m = face_of(sigma, i)
            if m is None:
                entries[(tgt[(tau, k, idx)], col)] = 1
            elif m == 0:
                A = attach[k][d]
                lower = bases[k - 1][d]
                vec = {lower[r]: A.entry(r, idx) for r in range(A.nrows) if A.entry(r, idx)}
                for key, c in degeneracy_image(vec, tau, d, n).items():
                    r = tgt[key]
                    entries[(r, col)] = entries.get((r, col), 0) + c
        return Matrix.from_entries(fld, len(tgt), len(src), entries)

    def dual_degen(n: int, j: int, d: int) -> Matrix:
        """sⱼ on the dual side: level n -> level n+1."""
        src, tgt = bases[n][d], pos[n + 1][d]
        entries = {(tgt[(degen_of(sigma, j), k, idx)], col): 1 for col, (sigma, k, idx) in enumerate(src)}
        return Matrix.from_entries(fld, len(tgt), len(src), entries)

    spaces = [GradedSpace(fld, trunc, tuple(tuple(f"x{n}_{d}.{r}" for r in range(len(bases[n][d])))
                                             for d in range(trunc + 1))) for n in range(D + 1)]
    cofaces = {}
    for n in range(1, D + 1):
        for i in range(n + 1):
            cofaces[(n, i)] = GradedMap(spaces[n - 1], spaces[n], 0,
                                        {d: dual_face(n, i, d).transpose() for d in range(trunc + 1)})
    codegens = {}
    for n in range(D):
        for j in range(n + 1):
            codegens[(n, j)] = GradedMap(spaces[n + 1], spaces[n], 0,
                                         {d: dual_degen(n, j, d).transpose() for d in range(trunc + 1)})
    X = CosimplicialObject(spaces, cofaces, codegens)
    X.tags = [bases[n] for n in range(D + 1)]
    return X


def _random_invertible(fld: Field, n: int, rng: random.Random) -> Matrix:
    while True:
        if fld is Field.F2:
            M = Matrix(fld, n, n, [rng.getrandbits(n) for _ in range(n)])
        else:
            M = Matrix.from_lists(fld, [[rng.randrange(2) for _ in range(n)] for _ in range(n)], n)
        if M.rank() == n:
            return M


def conjugate(X: CosimplicialObject, rng: random.Random) -> CosimplicialObject:
    """Apply a random change of basis in every level and degree."""
    fld = X.field
    P = [{d: _random_invertible(fld, X.space(n).dim(d), rng) for d in range(X.space(n).trunc + 1)}
         for n in range(X.D + 1)]
    Pinv = [{d: m.inverse() for d, m in lvl.items()} for lvl in P]
    cof = {(n, i): GradedMap(f.source, f.target, 0, {d: P[n][d] @ f.block(d) @ Pinv[n - 1][d] for d in f.blocks})
           for (n, i), f in X.cofaces.items()}
    cod = {(n, j): GradedMap(f.source, f.target, 0, {d: P[n][d] @ f.block(d) @ Pinv[n + 1][d] for d in f.blocks})
           for (n, j), f in X.codegens.items()}
    return CosimplicialObject(list(X.levels), cof, cod, X.kind)


def random_module_object(rng: random.Random, D: int = 3, trunc: int = 2, max_total: int = 40,
                         scramble: bool = True) -> CosimplicialObject:
    """A random valid D-truncated cosimplicial F2-module object.

    Built from a random chain complex of fresh generators (∂∂ = 0) through the
    CW construction, then hidden behind a random change of basis.
    """
    fld = Field.F2
    while True:
        fresh = [[rng.randrange(0, 3 if k < 2 else 2) for _ in range(trunc + 1)] for k in range(D + 1)]
        total = sum(comb(n, k) * sum(fresh[k]) for n in range(D + 1) for k in range(n + 1))
        if 0 < total <= max_total:
            break
    compact: list[dict[int, Matrix] | None] = [None]
    attach: list = [None]
    for k in range(1, D + 1):
        comp, full = {}, {}
        for d in range(trunc + 1):
            rows, cols = fresh[k - 1][d], fresh[k][d]
            if k >= 2:
                null = compact[k - 1][d].nullspace()
                vecs = []
                for _ in range(cols):
                    v = [0] * rows
                    for b in null:
                        if rng.randrange(2):
                            v = [(x + y) % 2 for x, y in zip(v, b)]
                    vecs.append(v)
            else:
                vecs = [[rng.randrange(2) for _ in range(rows)] for _ in range(cols)]
            comp[d] = Matrix.from_columns(fld, rows, vecs) if cols else Matrix.zeros(fld, rows, 0)
            full[d] = _fresh_to_full(fld, comp[d], fresh, k - 1, d)
        compact.append(comp)
        attach.append(full)
    X = cw_module_object(fld, trunc, fresh, attach, D)
    return conjugate(X, rng) if scramble else X


def _fresh_to_full(fld: Field, comp: Matrix, fresh, k: int, d: int) -> Matrix:
    """Embed vectors over the fresh level-k generators into the full dual level k basis."""
    order = [sigma[-1] for sigma in surjections(k) for _ in range(fresh[sigma[-1]][d])]
    ids = [r for r, kk in enumerate(order) if kk == k]
    entries = {(ids[r], c): v for r, c, v in comp.nonzero_entries()}
    return Matrix.from_entries(fld, len(order), comp.ncols, entries)

"""Cofree CW cosimplicial resolutions of unstable coalgebras.

Level n of a resolution is the cofree coalgebra Aⁿ = G(Tⁿ) on

    Tⁿ = ⊕_{σ: [n] ->> [k]} Vᵏ_σ,

where Vᵏ holds the fresh cogenerators of level k.  Everything is computed on
the dual side: Aⁿ is the dual of the free algebra FAₙ on Tⁿ, a codegeneracy sʲ
is dual to the algebra map ι_(τ,v) ↦ ι_(τσʲ,v), and a coface dⁱ is dual to the
algebra map

    ι_(σ,v) ↦ ι_(σδⁱ,v)          if σδⁱ is onto,
              X(τ)*(att_k(v))     if σδⁱ = δ⁰τ,
              0                   otherwise,

with att_k(v) ∈ FA_{k-1} the attaching polynomial of v (at level 0 the
coaugmentation sends ι_v to a functional on K).  A coalgebra map into a cofree
object is determined by where the fundamental classes go, so all identities
are checked on fundamental generators only.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .coalg import UnstableCoalgebra, ValidationReport
from .cosimplicial import (
    CosimplicialObject,
    check_identities,
    cohomotopy,
    compose_surj,
    degen_of,
    face_of,
    linearize,
    surjections,
)
from .freealg import AlgebraMap, FreeAlgebra, FunctionalTarget, PolyTarget, poly_add
from .galgebra import (
    F2Basis,
    Field,
    GradedMap,
    GradedSpace,
    InvariantViolation,
    Matrix,
    StructuralError,
    TruncationOverflow,
    f2_rank,
    identity,
)

STRATEGIES = ("gu", "min", "padded")
Key = tuple[tuple[int, ...], int, int]  # (σ, k, index into Vᵏ)


class PreconditionError(StructuralError):
    pass


@dataclass
class Fresh:
    """A fresh cogenerator of level k with its attaching data."""

    name: str
    degree: int
    attach: object  # polynomial in FA_{k-1}, or (deg, functional on K) at level 0


class CWResolution:
    """A coaugmented cosimplicial cofree coalgebra with an explicit CW basis."""

    def __init__(self, base: UnstableCoalgebra, D: int, N: int, strategy: str, fresh: list[list[Fresh]]):
        self.base = base
        self.field = base.field
        self.D = D
        self.N = N
        self.strategy = strategy
        self.fresh: list[list[Fresh]] = []
        self.algebras: list[FreeAlgebra] = []
        self.keys: list[list[Key]] = []
        self._faces: dict[tuple[int, int], AlgebraMap] = {}
        self._degens: dict[tuple[int, int], AlgebraMap] = {}
        self._substitutions: dict[tuple[int, int, tuple], AlgebraMap] = {}
        for level in fresh:
            self._push(level)

    # construction ----------------------------------------------------------
    def _push(self, level: list[Fresh]) -> None:
        n = len(self.fresh)
        self.fresh.append(level)
        keys: list[Key] = []
        cogens = []
        for sigma in surjections(n):
            k = sigma[-1]
            for idx, v in enumerate(self.fresh[k]):
                keys.append((sigma, k, idx))
                cogens.append((self.cogen_label(sigma, k, idx), v.degree))
        self.keys.append(keys)
        self.algebras.append(FreeAlgebra(self.field, self.N, cogens))

    def cogen_label(self, sigma: tuple[int, ...], k: int, idx: int) -> str:
        return f"{self.fresh[k][idx].name}@{''.join(map(str, sigma))}"

    @property
    def levels(self) -> int:
        return len(self.fresh)

    def _build_key_index(self, n: int) -> dict[Key, int]:
        return {key: u for u, key in enumerate(self.keys[n])}

    # structure maps on the dual side ----------------------------------------
    def coaugmentation(self) -> AlgebraMap:
        """FA₀ -> K*, dual to K -> A⁰."""
        A = self.algebras[0]
        images = {u: self.fresh[0][idx].attach for u, (_, _, idx) in enumerate(self.keys[0])}
        return AlgebraMap(A, FunctionalTarget(self.base), images)

    def substitution(self, k: int, n: int, tau: tuple[int, ...]) -> AlgebraMap:
        """FA_k -> FA_n induced by a surjection τ: [n] ->> [k]."""
        key = (k, n, tau)
        hit = self._substitutions.get(key)
        if hit is None:
            src, tgt = self.algebras[k], self.algebras[n]
            idx = self._build_key_index(n)
            images = {}
            for u, (rho, kk, i) in enumerate(self.keys[k]):
                images[u] = tgt.gen_poly(tgt.fund[idx[(compose_surj(rho, tau), kk, i)]])
            hit = AlgebraMap(src, PolyTarget(tgt), images)
            self._substitutions[key] = hit
        return hit

    def degeneracy(self, n: int, j: int) -> AlgebraMap:
        """FAₙ -> FAₙ₊₁, dual to sʲ: Aⁿ⁺¹ -> Aⁿ."""
        key = (n, j)
        hit = self._degens.get(key)
        if hit is None:
            tgt = self.algebras[n + 1]
            idx = self._build_key_index(n + 1)
            images = {u: tgt.gen_poly(tgt.fund[idx[(degen_of(sigma, j), k, i)]])
                      for u, (sigma, k, i) in enumerate(self.keys[n])}
            hit = AlgebraMap(self.algebras[n], PolyTarget(tgt), images)
            self._degens[key] = hit
        return hit

    def face(self, n: int, i: int) -> AlgebraMap:
        """FAₙ -> FAₙ₋₁, dual to dⁱ: Aⁿ⁻¹ -> Aⁿ (n >= 1)."""
        key = (n, i)
        hit = self._faces.get(key)
        if hit is None:
            tgt = self.algebras[n - 1]
            idx = self._build_key_index(n - 1)
            images = {}
            for u, (sigma, k, j) in enumerate(self.keys[n]):
                tau, m = face_of(sigma, i)
                if m is None:
                    images[u] = tgt.gen_poly(tgt.fund[idx[(tau, k, j)]])
                elif m == 0:
                    images[u] = self.substitution(k - 1, n - 1, tau).image(self.fresh[k][j].attach,
                                                                          self.fresh[k][j].degree)
                else:
                    images[u] = {}
            hit = AlgebraMap(self.algebras[n], PolyTarget(tgt), images)
            self._faces[key] = hit
        return hit

    # summaries ---------------------------------------------------------------
    def fresh_dims(self) -> list[list[int]]:
        out = []
        for level in self.fresh:
            row = [0] * (self.N + 1)
            for v in level:
                row[v.degree] += 1
            out.append(row)
        return out

    def level_dims(self) -> list[list[int]]:
        return [A.dims() for A in self.algebras]

    def summary(self) -> dict:
        return {
            "D": self.D,
            "N": self.N,
            "strategy": self.strategy,
            "fresh_cogenerators": self.fresh_dims(),
            "cogenerators": [[sum(1 for _, d in A.cogens if d == e) for e in range(self.N + 1)] for A in self.algebras],
        }


# ---------------------------------------------------------------------------
# building


def _poly_from_vector(A: FreeAlgebra, d: int, vec: Sequence) -> dict:
    monos = A.monomials(d)
    return {monos[r]: c for r, c in enumerate(vec) if c}


def _coordinates(A: FreeAlgebra, d: int, p: dict) -> dict[int, object]:
    pos = A.mono_pos(d)
    return {pos[m]: c for m, c in p.items()}


def _face_constraints(res: CWResolution, n: int, d: int) -> Matrix:
    """Stacked matrix of all faces out of FAₙ in degree d (coaugmentation when n = 0)."""
    A = res.algebras[n]
    monos = A.monomials(d)
    fld = res.field
    entries: dict = {}
    if n == 0:
        co = res.coaugmentation()
        for c, m in enumerate(monos):
            _, f = co.mono_image(m)
            for r, v in enumerate(f):
                if v:
                    entries[(r, c)] = v
        return Matrix.from_entries(fld, res.base.space.dim(d), len(monos), entries)
    offset = 0
    B = res.algebras[n - 1]
    width = len(B.monomials(d))
    for i in range(n + 1):
        F = res.face(n, i)
        for c, m in enumerate(monos):
            for r, v in _coordinates(B, d, F.mono_image(m)).items():
                entries[(offset + r, c)] = v
        offset += width
    return Matrix.from_entries(fld, offset, len(monos), entries)


def attaching_kernel(res: CWResolution, n: int) -> dict[int, list[list]]:
    """Basis vectors (monomial coordinates of FAₙ) of the elements killed by every face, per degree."""
    return {d: _face_constraints(res, n, d).nullspace() for d in range(1, res.N + 1)}


def _level_zero(K: UnstableCoalgebra, N: int) -> list[Fresh]:
    fld = K.field
    out = []
    for d in range(1, N + 1):
        for k, name in enumerate(K.space.basis[d]):
            vec = [fld.zero] * K.space.dim(d)
            vec[k] = fld.one
            out.append(Fresh(name, d, (d, vec)))
    return out


def _minimal_generators(res: CWResolution, n: int, kernel: dict[int, list[list]]) -> list[tuple[int, list]]:
    """Greedy degree-by-degree generators of the face kernel as an unstable algebra."""
    A = res.algebras[n]
    chosen: list[tuple[int, list]] = []
    for d in range(1, res.N + 1):
        target = kernel[d]
        if not target:
            continue
        width = len(A.monomials(d))
        span = F2Basis() if res.field is Field.F2 else None
        rows_q: list[list] = []
        if chosen:
            G = FreeAlgebra(res.field, res.N, [(f"g{k}", deg) for k, (deg, _) in enumerate(chosen)])
            images = {k: _poly_from_vector(A, deg, vec) for k, (deg, vec) in enumerate(chosen)}
            F = AlgebraMap(G, PolyTarget(A), images)
            for m in G.monomials(d):
                coords = _coordinates(A, d, F.mono_image(m))
                _span_add(res.field, span, rows_q, coords, width)
        for vec in target:
            coords = {r: c for r, c in enumerate(vec) if c}
            if _span_add(res.field, span, rows_q, coords, width):
                chosen.append((d, vec))
    return chosen


def _span_add(fld: Field, span, rows_q: list[list], coords: dict, width: int) -> bool:
    """Add a vector to a growing span; report whether it was new."""
    if fld is Field.F2:
        bits = 0
        for r, c in coords.items():
            if c % 2:
                bits |= 1 << r
        return span.add(bits)
    row = [fld.zero] * width
    for r, c in coords.items():
        row[r] = c
    before = Matrix.from_lists(fld, rows_q, width).rank() if rows_q else 0
    rows_q.append(row)
    if Matrix.from_lists(fld, rows_q, width).rank() == before:
        rows_q.pop()
        return False
    return True


def extend_step(res: CWResolution, strategy: str = "gu") -> CWResolution:
    """Add level n = res.levels: fresh cogenerators embedding B^(n-1) into a cofree object."""
    if strategy not in STRATEGIES:
        raise StructuralError(f"unknown strategy {strategy!r}; use one of {', '.join(STRATEGIES)}")
    n = res.levels
    prev = n - 1
    A = res.algebras[prev]
    kernel = attaching_kernel(res, prev)
    if strategy == "min":
        picks = _minimal_generators(res, prev, kernel)
    else:
        picks = [(d, vec) for d in range(1, res.N + 1) for vec in kernel[d]]
    level: list[Fresh] = []
    count: dict[int, int] = {}
    for d, vec in picks:
        i = count.get(d, 0)
        count[d] = i + 1
        level.append(Fresh(f"v{n}.{d}.{i}", d, _poly_from_vector(A, d, vec)))
    if strategy == "padded":
        # a redundant copy of one cogenerator above N/2, whose products leave the truncation
        high = [k for k, v in enumerate(level) if 2 * v.degree > res.N]
        if high:
            v = level[high[0]]
            i = count[v.degree]
            level.insert(high[0] + 1, Fresh(f"v{n}.{v.degree}.{i}", v.degree, dict(v.attach)))
    res._push(level)
    return res


def build_resolution(K: UnstableCoalgebra, D: int = 3, N: int = 8, strategy: str = "gu") -> CWResolution:
    if strategy not in STRATEGIES:
        raise StructuralError(f"unknown strategy {strategy!r}; use one of {', '.join(STRATEGIES)}")
    if K.trunc < N:
        raise TruncationOverflow(f"the coalgebra is known only through degree {K.trunc}; lower N to ≤ {K.trunc}")
    if D < 1:
        raise StructuralError("resolutions need D >= 1")
    if K.trunc > N:
        K = K.truncate(N)
    level0 = _level_zero(K, N)
    res = CWResolution(K, D, N, strategy, [level0])
    for _ in range(D):
        extend_step(res, strategy)
    return res


# ---------------------------------------------------------------------------
# verification


def _nondegenerate(res: CWResolution, n: int, d: int) -> list[tuple[int, ...]]:
    A = res.algebras[n]
    if n == 0:
        return A.monomials(d)
    full = (1 << n) - 1
    masks = []
    for u, _I, _ in A.gens:
        sigma = res.keys[n][u][0]
        masks.append(sum(1 << j for j in range(n) if sigma[j] != sigma[j + 1]))
    out = []
    for m in A.monomials(d):
        acc = 0
        for g in m:
            acc |= masks[g]
        if acc == full:
            out.append(m)
    return out


def _rank(fld: Field, rows: list[dict[int, object]], width: int) -> int:
    if fld is Field.F2:
        bits = []
        for row in rows:
            b = 0
            for k, c in row.items():
                if c % 2:
                    b |= 1 << k
            bits.append(b)
        return f2_rank(bits)
    if not rows:
        return 0
    return Matrix.from_entries(fld, len(rows), width, {(r, k): c for r, row in enumerate(rows) for k, c in row.items()}).rank()


def moore_ranks(res: CWResolution, s: int, d: int) -> int:
    """Rank of δˢ: Nˢ -> Nˢ⁺¹ in degree d, computed from the dual faces."""
    fld = res.field
    cols = _nondegenerate(res, s, d)
    pos = {m: k for k, m in enumerate(cols)}
    rows = []
    for m in _nondegenerate(res, s + 1, d):
        acc: dict = {}
        for i in range(s + 2):
            for mm, c in res.face(s + 1, i).mono_image(m).items():
                k = pos.get(mm)
                if k is not None:
                    poly_add(fld, acc, k, c * fld.sign(i))
        if acc:
            rows.append(acc)
    return _rank(fld, rows, len(cols))


def _coaug_rank(res: CWResolution, d: int) -> int:
    co = res.coaugmentation()
    rows = []
    for m in res.algebras[0].monomials(d):
        f = co.mono_image(m)[1]
        rows.append({k: c for k, c in enumerate(f) if c})
    return _rank(res.field, rows, res.base.space.dim(d))


def _compose_on_fundamentals(maps: Sequence[AlgebraMap], A: FreeAlgebra) -> list[dict]:
    """Images of the fundamental classes of A under maps[0] then maps[1] ... (algebra maps)."""
    out = []
    for u, (_, deg) in enumerate(A.cogens):
        g = A.fund[u]
        if g is None:
            continue
        p = {(g,): 1}
        d = deg
        for F in maps:
            if isinstance(F.tgt, FunctionalTarget):
                p = F.image(p, d)
            else:
                p = F.image(p, d)
        out.append(p)
    return out


def _equal_images(a, b) -> bool:
    if isinstance(a, tuple):
        return a[0] == b[0] and [x for x in a[1]] == [x for x in b[1]]
    return a == b


def verify_resolution(res: CWResolution | CosimplicialObject, base: UnstableCoalgebra | None = None,
                      coaugmentation: GradedMap | None = None) -> ValidationReport:
    """Check the cosimplicial identities, the CW axioms and exactness within (D, N)."""
    if isinstance(res, CosimplicialObject):
        if base is None or coaugmentation is None:
            raise StructuralError("an explicit object needs its base coalgebra and coaugmentation")
        return verify_object(res, base, coaugmentation)
    rep = ValidationReport("resolution")
    D, N = res.D, res.N
    rep.check("cofree")  # every level is G(Tⁿ) by construction

    ident = rep.check("identities")
    for n in range(2, D + 1):
        A = res.algebras[n]
        for j in range(n):
            for i in range(j, n):
                lhs = _compose_on_fundamentals([res.face(n, j), res.face(n - 1, i)], A)
                rhs = _compose_on_fundamentals([res.face(n, i + 1), res.face(n - 1, j)], A)
                if lhs != rhs:
                    ident.fail(f"level {n}", "d^j d^i = d^(i+1) d^j", f"(i, j) = ({i}, {j})")
    for n in range(D):
        A = res.algebras[n]
        for j in range(n + 1):
            for i in range(n + 2):
                lhs = _compose_on_fundamentals([res.degeneracy(n, j), res.face(n + 1, i)], A)
                if i in (j, j + 1):
                    rhs = _compose_on_fundamentals([], A)
                elif i < j:
                    rhs = _compose_on_fundamentals([res.face(n, i), res.degeneracy(n - 1, j - 1)], A)
                else:
                    rhs = _compose_on_fundamentals([res.face(n, i - 1), res.degeneracy(n - 1, j)], A)
                if lhs != rhs:
                    ident.fail(f"level {n}", "s^j d^i", f"(i, j) = ({i}, {j})")
    for n in range(D - 1):
        A = res.algebras[n]
        for j in range(n + 1):
            for i in range(j + 1):
                lhs = _compose_on_fundamentals([res.degeneracy(n, j), res.degeneracy(n + 1, i)], A)
                rhs = _compose_on_fundamentals([res.degeneracy(n, i), res.degeneracy(n + 1, j + 1)], A)
                if lhs != rhs:
                    ident.fail(f"level {n}", "s^j s^i = s^i s^(j+1)", f"(i, j) = ({i}, {j})")
    # coaugmentation: d⁰ε = d¹ε
    co = res.coaugmentation()
    if D >= 1:
        A1 = res.algebras[1]
        for u, (_, deg) in enumerate(A1.cogens):
            g = A1.fund[u]
            a = co.image(res.face(1, 0).image({(g,): 1}, deg), deg)
            b = co.image(res.face(1, 1).image({(g,): 1}, deg), deg)
            if not _equal_images(a, b):
                ident.fail(A1.cogens[u][0], "d^0 ε = d^1 ε", "coaugmentation is not equalized")
                break

    cw = rep.check("cw-basis")
    for n in range(1, D + 1):
        A = res.algebras[n]
        ident_sigma = tuple(range(n + 1))
        for u, (sigma, k, idx) in enumerate(res.keys[n]):
            if sigma != ident_sigma:
                continue
            for i in range(1, n + 1):
                if res.face(n, i).gen_image(A.fund[u]):
                    cw.fail(A.cogens[u][0], f"d^{i}", "a positive face does not vanish on a fresh cogenerator")
    attach = rep.check("attaching")
    for n in range(1, D + 1):
        for v in res.fresh[n]:
            prev = n - 1
            if prev == 0:
                img = co.image(v.attach, v.degree)
                if any(img[1]):
                    attach.fail(v.name, "ε*", "attaching polynomial is not killed by the coaugmentation")
            else:
                for i in range(prev + 1):
                    if res.face(prev, i).image(v.attach, v.degree):
                        attach.fail(v.name, f"d_{i}", "attaching polynomial does not factor through B")
    exact = rep.check("exactness")
    table = []
    for s in range(D):
        row = []
        for d in range(N + 1):
            dimN = len(_nondegenerate(res, s, d))
            r_out = moore_ranks(res, s, d)
            r_in = _coaug_rank(res, d) if s == 0 else moore_ranks(res, s - 1, d)
            pi = dimN - r_out - r_in
            row.append(pi)
            if s == 0:
                kd = res.base.space.dim(d)
                if r_in != kd:
                    exact.fail(f"degree {d}", "coaugmentation", f"rank {r_in} but dim K_{d} = {kd}")
                if pi != 0:
                    exact.fail(f"(s, degree) = (0, {d})", "π^0 ≅ K", f"Ker δ^0 is larger than K by {pi}")
            elif pi != 0:
                exact.fail(f"(s, degree) = ({s}, {d})", f"π^{s} = 0", f"dim π^{s} = {pi}")
        table.append(row)
    rep.pi_table = table  # extra dims of π⁰ over K, then πˢ
    return rep


def unstable_generators(K: UnstableCoalgebra) -> list[tuple[int, list]]:
    """Greedy generators of the dual algebra K* as an unstable algebra, as functionals."""
    fld = K.field
    chosen: list[tuple[int, list]] = []
    for d in range(1, K.trunc + 1):
        m = K.space.dim(d)
        if not m:
            continue
        span = F2Basis() if fld is Field.F2 else None
        rows_q: list[list] = []
        if chosen:
            G = FreeAlgebra(fld, K.trunc, [(f"g{k}", deg) for k, (deg, _) in enumerate(chosen)])
            F = AlgebraMap(G, FunctionalTarget(K), dict(enumerate(chosen)))
            for mono in G.monomials(d):
                f = F.mono_image(mono)[1]
                _span_add(fld, span, rows_q, {r: c for r, c in enumerate(f) if c}, m)
        for r in range(m):
            if _span_add(fld, span, rows_q, {r: fld.one}, m):
                vec = [fld.zero] * m
                vec[r] = fld.one
                chosen.append((d, vec))
    return chosen


def is_cofree(K: UnstableCoalgebra) -> bool:
    """K ≅ G(V) within truncation: K* is free on its minimal unstable generators."""
    gens = unstable_generators(K)
    G = FreeAlgebra(K.field, K.trunc, [(f"g{k}", d) for k, (d, _) in enumerate(gens)])
    return tuple(G.dims()) == tuple(K.space.dims())


def verify_object(X: CosimplicialObject, K: UnstableCoalgebra, coaugmentation: GradedMap) -> ValidationReport:
    """verify_resolution for an explicit coaugmented cosimplicial coalgebra, e.g. a constant one."""
    rep = ValidationReport("resolution")
    cof = rep.check("cofree")
    for n, carrier in enumerate(X.levels):
        if not isinstance(carrier, UnstableCoalgebra):
            cof.fail(f"level {n}", "cofree", "level is not a coalgebra")
        elif not is_cofree(carrier):
            cof.fail(f"level {n}", "cofree", "dual algebra is not free on its unstable generators")
    ident = check_identities(linearize(X))
    rep.extend(ident)
    exact = rep.check("exactness")
    L = linearize(X)
    for d in range(K.trunc + 1):
        if coaugmentation.block(d).rank() != K.space.dim(d):
            exact.fail(f"degree {d}", "coaugmentation", "not injective")
    for s in range(X.D):
        dims = cohomotopy(L, s).dims()
        for d, v in enumerate(dims):
            want = K.space.dim(d) if s == 0 else 0
            if v != want:
                exact.fail(f"(s, degree) = ({s}, {d})", f"π^{s}", f"dim {v}, expected {want}")
    return rep


# ---------------------------------------------------------------------------
# the cogenerator-level object: T applied levelwise


def _fundamental_matrix(F: AlgebraMap, src: FreeAlgebra, tgt: FreeAlgebra, d: int, strict: bool) -> Matrix:
    """Coefficients of target fundamentals in the images of source fundamentals of degree d."""
    tfund = [tgt.fund[u] for u, (_, deg) in enumerate(tgt.cogens) if deg == d]
    trow = {g: r for r, g in enumerate(sorted(tfund))}
    scols = [src.fund[u] for u, (_, deg) in enumerate(src.cogens) if deg == d]
    entries = {}
    for c, g in enumerate(sorted(scols)):
        img = F.gen_image(g)
        for m, v in img.items():
            if len(m) == 1 and m[0] in trow:
                entries[(trow[m[0]], c)] = v
            elif strict:
                raise PreconditionError("a codegeneracy does not send cogenerators to cogenerators")
    return Matrix.from_entries(src.field, len(trow), len(scols), entries)


def _cogenerator_space(A: FreeAlgebra, N: int) -> GradedSpace:
    per = [[] for _ in range(N + 1)]
    for g in sorted(A.fund[u] for u in range(len(A.cogens))):
        u = A.gens[g][0]
        per[A.cogens[u][1]].append(A.cogens[u][0])
    return GradedSpace(A.field, N, tuple(tuple(x) for x in per))


def cogenerator_object(res: CWResolution) -> CosimplicialObject:
    """The cosimplicial graded space n ↦ Tⁿ with the maps induced on cogenerators."""
    N = res.N
    spaces = [_cogenerator_space(A, N) for A in res.algebras]
    cof, cod = {}, {}
    for n in range(1, res.D + 1):
        for i in range(n + 1):
            F = res.face(n, i)
            blocks = {d: _fundamental_matrix(F, res.algebras[n], res.algebras[n - 1], d, False).transpose()
                      for d in range(N + 1)}
            cof[(n, i)] = GradedMap(spaces[n - 1], spaces[n], 0, blocks)
    for n in range(res.D):
        for j in range(n + 1):
            F = res.degeneracy(n, j)
            blocks = {d: _fundamental_matrix(F, res.algebras[n], res.algebras[n + 1], d, True).transpose()
                      for d in range(N + 1)}
            cod[(n, j)] = GradedMap(spaces[n + 1], spaces[n], 0, blocks)
    return CosimplicialObject(spaces, cof, cod)


def fresh_differential_ranks(res: CWResolution, n: int) -> list[int]:
    """Per-degree rank of Σ(-1)ⁱ(dⁱ)* from fresh cogenerators of level n to those of level n - 1.

    Dual cogenerators (σ, v) with σ ≠ id are degenerate, so the normalized
    complex of T applied to the resolution is spanned by the fresh ones.
    """
    fld = res.field
    A, B = res.algebras[n], res.algebras[n - 1]
    top = tuple(range(n + 1))
    bottom = tuple(range(n))
    res._build_key_index(n - 1)
    rows: dict[int, list[dict]] = {d: [] for d in range(res.N + 1)}
    cols = {}
    for w, (_, kk, j) in enumerate(res.keys[n - 1]):
        if res.keys[n - 1][w][0] == bottom:
            cols[B.fund[w]] = j
    for u, (sigma, k, j) in enumerate(res.keys[n]):
        if sigma != top:
            continue
        acc: dict = {}
        for i in range(n + 1):
            for m, c in res.face(n, i).gen_image(A.fund[u]).items():
                if len(m) == 1 and m[0] in cols:
                    poly_add(fld, acc, cols[m[0]], c * fld.sign(i))
        rows[res.fresh[n][j].degree].append(acc)
    return [_rank(fld, rows[d], len(res.fresh[n - 1])) for d in range(res.N + 1)]


def derived_cobase(K: UnstableCoalgebra, D: int = 3, N: int = 8, strategy: str = "gu",
                   res: CWResolution | None = None) -> dict:
    """Dims of (LᵏT)K for k < D: the cohomology of T applied to a resolution."""
    if res is None:
        res = build_resolution(K, D, N, strategy)
    ranks = [fresh_differential_ranks(res, n) for n in range(1, res.D + 1)]
    fresh = res.fresh_dims()
    table = []
    for k in range(res.D):
        into = ranks[k - 1] if k >= 1 else [0] * (res.N + 1)
        table.append([fresh[k][d] - ranks[k][d] - into[d] for d in range(res.N + 1)])
    nonzero = [k for k, row in enumerate(table) if any(row)]
    return {
        "dims": table,
        "projective_dimension_within_truncation": max(nonzero) if nonzero else None,
        "qualifier": f"within truncation: k < {res.D}, degrees ≤ {res.N}",
    }


# ---------------------------------------------------------------------------
# ψⁿ and CW-basis extraction


def psi_index_set(n: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Pairs (I, J) with j_{k-t} >= i_t > j_{k+1-t} (j_0 = n), valid as words on level n.

    The printed index set uses strict inequalities throughout, which admits no
    term at n = 1.  Relaxing both upper bounds (j_0 = n and the inner j_{k-t})
    to >= is the unique choice among the strict/non-strict variants that agrees
    with the product formula 1 - (1 - dⁿsⁿ⁻¹)...(1 - d¹s⁰) for n <= 6; see
    ``psi_oracle_words``.
    """
    from itertools import product as iproduct

    out = []
    for k in range(1, (n + 1) // 2 + 1):
        for I in iproduct(range(n + 1), repeat=k):
            for J in iproduct(range(n), repeat=k):
                if not _valid_word(n, I, J):
                    continue
                jj = (n,) + J
                if all(jj[k - t] >= I[t - 1] > jj[k + 1 - t] for t in range(1, k + 1)):
                    out.append((I, J))
    return out


def _valid_word(n: int, I, J) -> bool:
    k = len(I)
    for pos, j in enumerate(reversed(J)):
        if j > n - 1 - pos:
            return False
    lvl = n - k
    for i in reversed(I):
        lvl += 1
        if i > lvl:
            return False
    return True


def _word_map(n: int, I, J) -> tuple[int, ...]:
    """The monotone map [n] -> [n] of dⁱ¹...dⁱᵏ s^j¹...s^jᵏ."""
    f = tuple(range(n + 1))
    cur = n
    for j in reversed(J):
        f = tuple(x if x <= j else x - 1 for x in f)
        cur -= 1
    for i in reversed(I):
        f = tuple(x if x < i else x + 1 for x in f)
        cur += 1
    return f


def psi_oracle_words(n: int) -> dict[tuple[int, ...], int]:
    """1 - (1 - dⁿsⁿ⁻¹)...(1 - d¹s⁰) as a formal sum of monotone maps [n] -> [n]."""
    ident = tuple(range(n + 1))
    P = {ident: 1}
    for k in range(1, n + 1):
        e = _word_map(n, (k,), (k - 1,))
        new: dict = {}
        for f, c in P.items():
            new[f] = new.get(f, 0) + c
            g = tuple(e[x] for x in f)
            new[g] = new.get(g, 0) - c
        P = {f: c for f, c in new.items() if c}
    out = {ident: 1}
    for f, c in P.items():
        out[f] = out.get(f, 0) - c
    return {f: c for f, c in out.items() if c}


def psi_formula_words(n: int) -> dict[tuple[int, ...], int]:
    out: dict = {}
    for I, J in psi_index_set(n):
        f = _word_map(n, I, J)
        out[f] = out.get(f, 0) + (-1) ** (sum(I) + sum(J) + 1)
    return {f: c for f, c in out.items() if c}


def psi_map(X: CosimplicialObject, n: int) -> GradedMap:
    """ψⁿ on level n of an explicit cosimplicial object, with its contract checked."""
    if n < 1 or n > X.D:
        raise StructuralError(f"ψ^{n} needs 1 <= n <= D = {X.D}")
    fld = X.field
    V = X.space(n)
    total = GradedMap(V, V, 0, {})
    for I, J in psi_index_set(n):
        f = identity(V)
        lvl = n
        for j in reversed(J):
            f = X.s(lvl - 1, j) @ f
            lvl -= 1
        for i in reversed(I):
            f = X.d(lvl + 1, i) @ f
            lvl += 1
        total = total + f.scale(fld.sign(sum(I) + sum(J) + 1))
    for j in range(n):
        if X.s(n - 1, j) @ total != X.s(n - 1, j):
            raise InvariantViolation(f"ψ contract s^j ψ^n = s^j fails at (n, j) = ({n}, {j})")
    return total


@dataclass
class ExtractedBasis:
    level: int
    vectors: dict[int, list[list]]  # degree -> basis of the fresh cogenerators, in level coordinates

    def dims(self) -> list[int]:
        return [len(self.vectors.get(d, [])) for d in range(max(self.vectors, default=-1) + 1)]


def extract_cw_basis(X: CosimplicialObject, start: dict[int, dict[int, Matrix | list[list]]] | None = None) -> list[ExtractedBasis]:
    """Fresh cogenerators x̂ = x - ψⁿ(x) of every level via x_{k+1} = x_k - d^(k+1) s^k x_k.

    X is the cogenerator-level object of a cofree cosimplicial coalgebra.  The
    iteration is applied to a spanning set of each level (the standard basis,
    or `start` if given) and the results are row reduced.
    """
    ident = check_identities(X)
    if not ident.ok:
        raise PreconditionError("codegeneracies violate the cosimplicial identities: " +
                                ", ".join(c.name for c in ident.failures()))
    fld = X.field
    out = [ExtractedBasis(0, {d: [[fld.one if r == c else fld.zero for r in range(X.space(0).dim(d))]
                                  for c in range(X.space(0).dim(d))] for d in range(X.space(0).trunc + 1)})]
    for n in range(1, X.D + 1):
        V = X.space(n)
        vectors = {}
        for d in range(V.trunc + 1):
            m = V.dim(d)
            if not m:
                vectors[d] = []
                continue
            seeds = (start or {}).get(n, {}).get(d)
            if seeds is None:
                H = Matrix.identity(fld, m)
            else:
                if not isinstance(seeds, Matrix):
                    seeds = Matrix.from_lists(fld, seeds, m)
                H = seeds.transpose()  # seeds as columns
            for k in range(n):
                H = H - X.d(n, k + 1).block(d) @ (X.s(n - 1, k).block(d) @ H)
            for j in range(n):
                if not (X.s(n - 1, j).block(d) @ H).is_zero():
                    raise InvariantViolation(f"x̂ is not killed by s^{j} at level {n}, degree {d}")
            R, piv = H.transpose().rref()
            vectors[d] = [R.row(r) for r in range(len(piv))]
        out.append(ExtractedBasis(n, vectors))
    return out


def forget_basis_seeds(X: CosimplicialObject, rng) -> dict[int, dict[int, Matrix]]:
    """A random basis (as matrix rows) of every level: the cogenerators with the CW split forgotten."""
    from .cosimplicial import _random_invertible

    seeds = {}
    for n in range(1, X.D + 1):
        per = {}
        for d in range(X.space(n).trunc + 1):
            m = X.space(n).dim(d)
            if m:
                per[d] = _random_invertible(X.field, m, rng)
        seeds[n] = per
    return seeds


# ---------------------------------------------------------------------------
# serialization


def _gen_json(A: FreeAlgebra, g: int) -> list:
    u, I, _ = A.gens[g]
    return [A.cogens[u][0], list(I)]


def poly_to_json(A: FreeAlgebra, p: dict, fld: Field) -> list:
    return [[[_gen_json(A, g) for g in m], fld.format(c)] for m, c in sorted(p.items())]


def poly_from_json(A: FreeAlgebra, data: list, fld: Field) -> dict:
    label_to_u = {label: u for u, (label, _) in enumerate(A.cogens)}
    out: dict = {}
    for mono, c in data:
        gens = []
        for label, I in mono:
            key = (label_to_u[label], tuple(I))
            if key not in A.gen_index:
                raise StructuralError(f"unknown generator {label} with word {I}")
            gens.append(A.gen_index[key])
        p = A.one()
        for g in gens:
            p = A.mul(p, A.gen_poly(g))
        for m, v in p.items():
            poly_add(fld, out, m, v * fld.parse(c))
    return out


def resolution_to_json(res: CWResolution, stamp: str | None = None) -> dict:
    fld = res.field
    levels = []
    for n, level in enumerate(res.fresh):
        entries = []
        for v in level:
            if n == 0:
                d, vec = v.attach
                att = {"functional": [fld.format(c) for c in vec]}
            else:
                att = {"polynomial": poly_to_json(res.algebras[n - 1], v.attach, fld)}
            entries.append({"name": v.name, "degree": v.degree, **att})
        levels.append({"level": n, "fresh": entries})
    return {
        "schema": "ucr/1",
        "kind": "resolution",
        "field": fld.value if hasattr(fld, "value") else str(fld),
        "D": res.D,
        "N": res.N,
        "strategy": res.strategy,
        "summary": res.summary(),
        "levels": levels,
        "verification": stamp,
    }


def resolution_from_json(data: dict, K: UnstableCoalgebra) -> CWResolution:
    if data.get("schema") != "ucr/1" or data.get("kind") != "resolution":
        raise StructuralError("not a ucr/1 resolution document")
    fld = K.field
    D, N = int(data["D"]), int(data["N"])
    if K.trunc < N:
        raise TruncationOverflow(f"the coalgebra is known only through degree {K.trunc}, the resolution needs {N}")
    if K.trunc > N:
        K = K.truncate(N)
    levels = data["levels"]
    if len(levels) != D + 1:
        raise StructuralError(f"expected {D + 1} levels, found {len(levels)}")
    res = CWResolution(K, D, N, data.get("strategy", "gu"), [])
    for n, lvl in enumerate(levels):
        fresh = []
        for e in lvl["fresh"]:
            deg = int(e["degree"])
            if n == 0:
                vec = [fld.parse(c) for c in e["functional"]]
                if len(vec) != K.space.dim(deg):
                    raise StructuralError(f"functional for {e['name']} has the wrong length")
                fresh.append(Fresh(e["name"], deg, (deg, vec)))
            else:
                fresh.append(Fresh(e["name"], deg, poly_from_json(res.algebras[n - 1], e["polynomial"], fld)))
        res._push(fresh)
    return res

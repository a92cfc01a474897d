"""Unstable modules, unstable coalgebras and comodules, with validators.

Elements are addressed by (degree, index) inside a GradedSpace.  Diagonals and
coactions are stored sparsely: for every basis element x a dict mapping
((a, i), (b, j)) to the coefficient of e_{a,i} ⊗ e_{b,j}.  The right Steenrod
action is stored as matrices A[i, d]: K_d -> K_{d-i} for single squares.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from dataclasses import field as dc_field
from functools import cached_property
from itertools import product

from .freealg import AlgebraMap, FreeAlgebra, FunctionalTarget, poly_add
from .galgebra import (
    Field,
    GradedMap,
    GradedSpace,
    Matrix,
    StructuralError,
    TruncationOverflow,
    solve_lift,
    tensor,
    tensor_index,
)
from .steenrod import adem_terms, binom2

Idx = tuple[int, int]
Terms = dict[tuple[Idx, Idx], object]


# ---------------------------------------------------------------------------
# reports


@dataclass
class Check:
    name: str
    passed: bool = True
    witness: dict | None = None
    count: int = 0

    def fail(self, element: str, operation: str, discrepancy: str) -> None:
        if self.passed:
            self.witness = {"element": element, "operation": operation, "discrepancy": discrepancy}
        self.passed = False


@dataclass
class ValidationReport:
    subject: str
    checks: list[Check] = dc_field(default_factory=list)

    def check(self, name: str) -> Check:
        c = Check(name)
        self.checks.append(c)
        return c

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def extend(self, other: ValidationReport, prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.witness, c.count))

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, **({"witness": c.witness} if c.witness else {})}
                for c in self.checks
            ],
        }


def _fmt_vec(space: GradedSpace, d: int, vec: dict[int, object]) -> str:
    if not vec:
        return "0"
    fld = space.field
    parts = []
    for i, c in sorted(vec.items()):
        name = space.basis[d][i]
        parts.append(name if c == 1 else f"{fld.format(c)}*{name}")
    return " + ".join(parts)


def _fmt_terms(L: GradedSpace, R: GradedSpace, terms: Terms) -> str:
    if not terms:
        return "0"
    parts = []
    for ((a, i), (b, j)), c in sorted(terms.items()):
        s = f"{L.basis[a][i]}⊗{R.basis[b][j]}"
        parts.append(s if c == 1 else f"{L.field.format(c)}*{s}")
    return " + ".join(parts)


def _clean(fld: Field, d: dict) -> dict:
    if fld is Field.F2:
        return {k: v % 2 for k, v in d.items() if v % 2}
    return {k: v for k, v in d.items() if v != 0}


# ---------------------------------------------------------------------------
# unstable modules


class UnstableModule:
    """Graded space with a right action of single squares, |x·Sq^i| = |x| - i."""

    def __init__(self, space: GradedSpace, action: dict[tuple[int, int], Matrix] | None = None):
        self.space = space
        self.field = space.field
        act = {}
        for (i, d), m in (action or {}).items():
            if i < 1 or d > space.trunc or d - i < 0:
                if m.is_zero():
                    continue
                raise StructuralError(f"Sq{i} on degree {d} is out of range")
            if m.shape != (space.dim(d - i), space.dim(d)):
                raise StructuralError(f"action matrix Sq{i} in degree {d} has shape {m.shape}")
            if self.field is Field.Q and not m.is_zero():
                raise StructuralError("modules over Q carry no Steenrod action")
            if not m.is_zero():
                act[(i, d)] = m
        self.action = act

    @property
    def trunc(self) -> int:
        return self.space.trunc

    def action_matrix(self, i: int, d: int) -> Matrix:
        m = self.action.get((i, d))
        if m is None:
            return Matrix.zeros(self.field, self.space.dim(d - i) if d - i >= 0 else 0, self.space.dim(d))
        return m

    def act_index(self, i: int, d: int, vec: dict[int, object]) -> dict[int, object]:
        """x·Sq^i for x = Σ vec[k] e_{d,k}; returns a vector in degree d - i."""
        if i == 0:
            return dict(vec)
        m = self.action.get((i, d))
        if m is None or not vec:
            return {}
        out: dict[int, object] = {}
        for k, c in vec.items():
            for r in range(m.nrows):
                v = m.entry(r, k)
                if v:
                    out[r] = out.get(r, 0) + v * c
        return _clean(self.field, out)

    def act_word_index(self, word: Sequence[int], d: int, vec: dict[int, object]) -> dict[int, object]:
        for i in word:
            vec = self.act_index(i, d, vec)
            d -= i
            if not vec:
                return {}
        return vec

    # steenrod.RightModule protocol
    def degree_of(self, name: str) -> int:
        return self.space.degree_of(name)

    def sq_vector(self, i: int, vec: dict[str, object]) -> dict[str, object]:
        out: dict[str, object] = {}
        by_deg: dict[int, dict[int, object]] = {}
        for name, c in vec.items():
            d, k = self.space.locate(name)
            by_deg.setdefault(d, {})[k] = c
        for d, v in by_deg.items():
            for r, c in self.act_index(i, d, v).items():
                name = self.space.basis[d - i][r]
                out[name] = out.get(name, 0) + c
        return _clean(self.field, out)

    def action_map(self, i: int) -> GradedMap:
        return GradedMap(self.space, self.space, -i, {d: self.action_matrix(i, d) for d in range(i, self.trunc + 1)})


def module_checks(M: UnstableModule, report: ValidationReport) -> None:
    if M.field is not Field.F2:
        return
    sp = M.space
    inst = report.check("instability")
    for (i, d), m in M.action.items():
        if 2 * i > d and not m.is_zero():
            col = next(j for j in range(m.ncols) if any(m.column(j)))
            inst.fail(sp.basis[d][col], f"Sq{i}", f"nonzero although 2*{i} > {d}")
    adem = report.check("adem")
    for d in range(sp.trunc + 1):
        for k in range(sp.dim(d)):
            for b in range(1, d + 1):
                for a in range(1, 2 * b):
                    if a + b > d:
                        break
                    lhs = M.act_word_index((a, b), d, {k: 1})
                    rhs: dict[int, int] = {}
                    for t in adem_terms(a, b):
                        for r, c in M.act_word_index(t, d, {k: 1}).items():
                            rhs[r] = rhs.get(r, 0) + c
                    rhs = _clean(M.field, rhs)
                    if lhs != rhs:
                        adem.fail(sp.basis[d][k], f"Sq{a}Sq{b}",
                                  f"{_fmt_vec(sp, d - a - b, lhs)} != {_fmt_vec(sp, d - a - b, rhs)}")


def validate_module(M: UnstableModule) -> ValidationReport:
    rep = ValidationReport("unstable module")
    module_checks(M, rep)
    return rep


# ---------------------------------------------------------------------------
# unstable coalgebras


class UnstableCoalgebra(UnstableModule):
    """Connected cocommutative coalgebra with an unstable right Steenrod action.

    `diag` holds the full diagonal; use `from_reduced` to supply only Δ̄.
    """

    def __init__(self, space: GradedSpace, diag: dict[Idx, Terms], action: dict[tuple[int, int], Matrix] | None = None):
        super().__init__(space, action)
        if space.dim(0) != 1:
            raise StructuralError("a connected coalgebra has exactly one class in degree 0")
        clean = {}
        for x, terms in diag.items():
            d = x[0]
            for (a, _), (b, _) in terms:
                if a + b != d:
                    raise StructuralError(f"diagonal of {space.basis[d][x[1]]} has a term of the wrong degree")
            clean[x] = _clean(self.field, dict(terms))
        for d in range(space.trunc + 1):
            for k in range(space.dim(d)):
                clean.setdefault((d, k), {})
        self.diag = clean

    @classmethod
    def from_reduced(cls, space: GradedSpace, reduced: dict[Idx, Terms], action=None) -> UnstableCoalgebra:
        one = space.field.one
        full: dict[Idx, Terms] = {(0, 0): {((0, 0), (0, 0)): one}}
        for d in range(1, space.trunc + 1):
            for k in range(space.dim(d)):
                t = dict(reduced.get((d, k), {}))
                for key, c in list(t.items()):
                    (a, _), (b, _) = key
                    if a == 0 or b == 0:
                        raise StructuralError("reduced diagonal terms must have both factors in positive degree")
                t[((d, k), (0, 0))] = t.get(((d, k), (0, 0)), 0) + one
                t[((0, 0), (d, k))] = t.get(((0, 0), (d, k)), 0) + one
                full[(d, k)] = t
        return cls(space, full, action)

    def reduced(self, x: Idx) -> Terms:
        return {k: v for k, v in self.diag[x].items() if k[0][0] != 0 and k[1][0] != 0}

    @cached_property
    def _pairs(self) -> dict[tuple[int, int], list]:
        out: dict[tuple[int, int], list] = {}
        for (d, x), terms in self.diag.items():
            for ((a, i), (_, j)), c in terms.items():
                out.setdefault((d, a), []).append((x, i, j, c))
        return out

    def diag_pairs(self, d: int, a: int) -> list:
        return self._pairs.get((d, a), [])

    def diagonal_map(self) -> GradedMap:
        KK = tensor(self.space, self.space)
        blocks = {}
        for d in range(self.trunc + 1):
            pos = tensor_index(self.space, self.space, d)
            entries = {}
            for k in range(self.space.dim(d)):
                for key, c in self.diag[(d, k)].items():
                    entries[(pos[key], k)] = c
            blocks[d] = Matrix.from_entries(self.field, KK.dim(d), self.space.dim(d), entries)
        return GradedMap(self.space, KK, 0, blocks)

    def truncate(self, trunc: int) -> UnstableCoalgebra:
        sp = self.space.truncate(trunc)
        diag = {x: t for x, t in self.diag.items() if x[0] <= trunc}
        act = {k: m for k, m in self.action.items() if k[1] <= trunc}
        return UnstableCoalgebra(sp, diag, act)


def _tensor_act(L: UnstableModule, R: UnstableModule, n: int, terms: Terms) -> Terms:
    """Cartan action of Sq^n on a sum of tensors: Σ_k (·Sq^k ⊗ ·Sq^{n-k})."""
    out: dict = {}
    for ((a, i), (b, j)), c in terms.items():
        for k in range(n + 1):
            left = L.act_index(k, a, {i: 1})
            if not left:
                continue
            right = R.act_index(n - k, b, {j: 1})
            for ii, u in left.items():
                for jj, v in right.items():
                    key = ((a - k, ii), (b - n + k, jj))
                    out[key] = out.get(key, 0) + c * u * v
    return _clean(L.field, out)


def _apply_vec_terms(K: UnstableCoalgebra, d: int, vec: dict[int, object]) -> Terms:
    out: dict = {}
    for k, c in vec.items():
        for key, v in K.diag[(d, k)].items():
            out[key] = out.get(key, 0) + c * v
    return _clean(K.field, out)


def validate(K: UnstableCoalgebra) -> ValidationReport:
    """Check every coalgebra axiom, keeping the first witness per axiom."""
    rep = ValidationReport("unstable coalgebra")
    sp, fld = K.space, K.field
    one = fld.one
    conn = rep.check("connected")
    if sp.dim(0) != 1 or sp.basis[0][0] != "1":
        conn.fail(",".join(sp.basis[0]), "degree 0", "degree 0 must be spanned by '1'")

    counit = rep.check("counit")
    coassoc = rep.check("coassociativity")
    cocomm = rep.check("cocommutativity")
    for (d, k), terms in sorted(K.diag.items()):
        name = sp.basis[d][k]
        left = {key: c for key, c in terms.items() if key[1][0] == 0}
        right = {key: c for key, c in terms.items() if key[0][0] == 0}
        if left != {((d, k), (0, 0)): one} or right != {((0, 0), (d, k)): one}:
            counit.fail(name, "counit", f"Δ{name} = {_fmt_terms(sp, sp, terms)}")
        # coassociativity
        lhs: dict = {}
        rhs: dict = {}
        for ((a, i), (b, j)), c in terms.items():
            for ((a1, i1), (a2, i2)), c1 in K.diag[(a, i)].items():
                key = ((a1, i1), (a2, i2), (b, j))
                lhs[key] = lhs.get(key, 0) + c * c1
            for ((b1, j1), (b2, j2)), c2 in K.diag[(b, j)].items():
                key = ((a, i), (b1, j1), (b2, j2))
                rhs[key] = rhs.get(key, 0) + c * c2
        lhs, rhs = _clean(fld, lhs), _clean(fld, rhs)
        if lhs != rhs:
            diff = {key: v for key, v in _clean(fld, {**{k2: 0 for k2 in rhs}, **lhs}).items()}
            bad = sorted(set(lhs.items()) ^ set(rhs.items()))[0][0]
            coassoc.fail(name, "(Δ⊗id)Δ - (id⊗Δ)Δ",
                         f"mismatch at {'⊗'.join(sp.basis[e][q] for e, q in bad)}")
            del diff
        for ((a, i), (b, j)), c in terms.items():
            other = terms.get(((b, j), (a, i)), 0)
            if fld.coerce(other) != fld.coerce(c * fld.sign(a * b)):
                cocomm.fail(name, "Δ∘τ - Δ", f"coefficient of {sp.basis[a][i]}⊗{sp.basis[b][j]} is {fld.format(c)}"
                            f" but its switch has {fld.format(other)}")
                break

    if fld is Field.F2:
        module_checks(K, rep)
        cartan = rep.check("cartan")
        for (d, k), terms in sorted(K.diag.items()):
            for n in range(1, d + 1):
                img = K.act_index(n, d, {k: 1})
                lhs = _apply_vec_terms(K, d - n, img)
                rhs = _tensor_act(K, K, n, terms)
                if lhs != rhs:
                    cartan.fail(sp.basis[d][k], f"Δ(x·Sq{n})",
                                f"{_fmt_terms(sp, sp, lhs)} != {_fmt_terms(sp, sp, rhs)}")
        vers = rep.check("verschiebung")
        for (d, k), terms in sorted(K.diag.items()):
            if d == 0 or d % 2:
                continue
            n = d // 2
            V = {}
            for ((a, i), (b, j)), c in terms.items():
                if a == n and i == j:
                    V[i] = V.get(i, 0) + c
            V = _clean(fld, V)
            act = K.act_index(n, d, {k: 1})
            if V != act:
                vers.fail(sp.basis[d][k], f"Sq{n}",
                          f"x·Sq{n} = {_fmt_vec(sp, n, act)} but V(x) = {_fmt_vec(sp, n, V)}")
    return rep


def primitives(K: UnstableCoalgebra) -> tuple[UnstableModule, GradedMap]:
    """P(K) with its inclusion; P_0 = 0."""
    sp, fld = K.space, K.field
    blocks = {}
    per = []
    for d in range(sp.trunc + 1):
        n = sp.dim(d)
        if d == 0:
            per.append(())
            blocks[0] = Matrix.zeros(fld, n, 0)
            continue
        keys = sorted({key for k in range(n) for key in K.reduced((d, k))})
        pos = {key: r for r, key in enumerate(keys)}
        entries = {}
        for k in range(n):
            for key, c in K.reduced((d, k)).items():
                entries[(pos[key], k)] = c
        null = Matrix.from_entries(fld, len(keys), n, entries).nullspace()
        names = []
        for r, v in enumerate(null):
            support = [i for i, c in enumerate(v) if c]
            names.append(sp.basis[d][support[0]] if len(support) == 1 and v[support[0]] == 1 else f"p{d}.{r}")
        per.append(tuple(names))
        blocks[d] = Matrix.from_lists(fld, null, n).transpose() if null else Matrix.zeros(fld, n, 0)
    P = GradedSpace(fld, sp.trunc, tuple(per))
    inc = GradedMap(P, sp, 0, blocks)
    action = {}
    if fld is Field.F2:
        for i in range(1, sp.trunc + 1):
            f = GradedMap(P, sp, -i, {d: K.action_matrix(i, d) @ blocks[d] for d in range(i, sp.trunc + 1)})
            h = solve_lift(f, inc, mode="factor")
            for d, m in h.blocks.items():
                if not m.is_zero():
                    action[(i, d)] = m
    return UnstableModule(P, action), inc


# ---------------------------------------------------------------------------
# cofree coalgebras


@dataclass
class CofreeBasisTag:
    """Cogenerators of a cofree coalgebra and the dual free algebra's generators."""

    cogenerators: GradedSpace
    algebra: FreeAlgebra

    def generators(self) -> list[dict]:
        A = self.algebra
        return [
            {"label": A.gen_label(g), "cogenerator": A.cogens[u][0], "word": list(I), "degree": deg}
            for g, (u, I, deg) in enumerate(A.gens)
        ]

    def generator_counts(self) -> list[int]:
        counts = [0] * (self.algebra.trunc + 1)
        for d in self.algebra.gen_deg:
            counts[d] += 1
        return counts


def _dual_space(A: FreeAlgebra) -> GradedSpace:
    per = []
    for d in range(A.trunc + 1):
        per.append(tuple(A.mono_label(m) for m in A.monomials(d)))
    return GradedSpace(A.field, A.trunc, tuple(per))


def dual_coalgebra(A: FreeAlgebra) -> UnstableCoalgebra:
    """Graded dual of a truncated free algebra, monomial-dual basis."""
    fld = A.field
    sp = _dual_space(A)
    diag: dict[Idx, Terms] = {}
    for d in range(A.trunc + 1):
        for k, m in enumerate(A.monomials(d)):
            terms: dict = {}
            seen = set()
            for mask in product(*[range(e + 1) for e in _exponents(m)]):
                left, right = _split(m, mask)
                if (left, right) in seen:
                    continue
                seen.add((left, right))
                r = A.mul_mono(left, right)
                if r is None:
                    continue
                c, mm = r
                if mm != m:
                    raise AssertionError("monomial split does not multiply back")
                a = A.mono_degree(left)
                key = ((a, A.mono_pos(a)[left]), (d - a, A.mono_pos(d - a)[right]))
                terms[key] = terms.get(key, 0) + c
            diag[(d, k)] = terms
    action: dict[tuple[int, int], Matrix] = {}
    if fld is Field.F2:
        for d in range(A.trunc + 1):
            for i in range(1, d // 2 + 1):
                src = A.monomials(d - i)
                pos = A.mono_pos(d)
                entries = {}
                for r, m2 in enumerate(src):
                    for mm in A.sq_mono(i, m2):
                        entries[(r, pos[mm])] = 1
                if entries:
                    action[(i, d)] = Matrix.from_entries(fld, len(src), len(pos), entries)
    return UnstableCoalgebra(sp, diag, action)


def _exponents(m: tuple[int, ...]) -> list[int]:
    out, k = [], 0
    while k < len(m):
        j = k
        while j < len(m) and m[j] == m[k]:
            j += 1
        out.append(j - k)
        k = j
    return out


def _split(m: tuple[int, ...], mask: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    distinct = sorted(set(m))
    exps = _exponents(m)
    left, right = [], []
    for g, e, take in zip(distinct, exps, mask):
        left += [g] * take
        right += [g] * (e - take)
    return tuple(left), tuple(right)


def cofree_coalgebra(V: GradedSpace, N: int | None = None) -> tuple[UnstableCoalgebra, CofreeBasisTag]:
    if N is None:
        N = V.trunc
    if V.dim(0):
        raise StructuralError("cogenerators must sit in positive degrees")
    cogens = [(name, d) for d in range(1, min(N, V.trunc) + 1) for name in V.basis[d]]
    A = FreeAlgebra(V.field, N, cogens)
    cogen_space = GradedSpace.from_degrees(V.field, N, cogens)
    return dual_coalgebra(A), CofreeBasisTag(cogen_space, A)


def cogenerator_projection(G: UnstableCoalgebra, tag: CofreeBasisTag) -> GradedMap:
    """Corestriction G -> V dual to the inclusion of the fundamental classes."""
    A = tag.algebra
    V = tag.cogenerators
    blocks = {}
    for d in range(G.trunc + 1):
        entries = {}
        pos = A.mono_pos(d)
        for r, name in enumerate(V.basis[d]):
            u = next(k for k, (l, _) in enumerate(A.cogens) if l == name)
            g = A.fund[u]
            entries[(r, pos[(g,)])] = 1
        blocks[d] = Matrix.from_entries(G.field, V.dim(d), G.space.dim(d), entries)
    return GradedMap(G.space, V, 0, blocks)


def cofree_extend(phi: GradedMap, G: UnstableCoalgebra, tag: CofreeBasisTag, C: UnstableCoalgebra) -> GradedMap:
    """The coalgebra map C -> G whose corestriction to the cogenerators is phi."""
    if phi.source != C.space:
        raise StructuralError("phi must start at the carrier of C")
    if phi.target != tag.cogenerators:
        raise StructuralError("phi must land in the cogenerators of G")
    A = tag.algebra
    T = FunctionalTarget(C)
    images = {}
    for u, (label, n) in enumerate(A.cogens):
        r = tag.cogenerators.basis[n].index(label)
        images[u] = (n, phi.block(n).row(r))
    F = AlgebraMap(A, T, images)
    blocks = {}
    for d in range(min(C.trunc, G.trunc) + 1):
        rows = [F.mono_image(m)[1] for m in A.monomials(d)]
        blocks[d] = Matrix.from_lists(C.field, rows, C.space.dim(d)) if rows else Matrix.zeros(C.field, 0, C.space.dim(d))
    return GradedMap(C.space, G.space, 0, blocks)


def is_coalgebra_map(f: GradedMap, C: UnstableCoalgebra, D: UnstableCoalgebra) -> ValidationReport:
    """Check that f commutes with diagonals and with the Steenrod action."""
    rep = ValidationReport("coalgebra map")
    fld = C.field
    diag = rep.check("diagonal")
    for d in f.degrees():
        B = f.block(d)
        for k in range(C.space.dim(d)):
            img = {r: B.entry(r, k) for r in range(B.nrows) if B.entry(r, k)}
            lhs = _apply_vec_terms(D, d, img)
            rhs: dict = {}
            for ((a, i), (b, j)), c in C.diag[(d, k)].items():
                fa, fb = f.block(a), f.block(b)
                for r1 in range(fa.nrows):
                    u = fa.entry(r1, i)
                    if not u:
                        continue
                    for r2 in range(fb.nrows):
                        v = fb.entry(r2, j)
                        if v:
                            key = ((a, r1), (b, r2))
                            rhs[key] = rhs.get(key, 0) + c * u * v
            if lhs != _clean(fld, rhs):
                diag.fail(C.space.basis[d][k], "Δf - (f⊗f)Δ", "diagonals differ")
                break
    if fld is Field.F2:
        st = rep.check("steenrod")
        for i in range(1, C.trunc + 1):
            for d in range(i, C.trunc + 1):
                if d not in f.blocks or d - i not in f.blocks:
                    continue
                if D.action_matrix(i, d) @ f.block(d) != f.block(d - i) @ C.action_matrix(i, d):
                    st.fail(f"degree {d}", f"Sq{i}", "f(x·Sq) != f(x)·Sq")
    return rep


# ---------------------------------------------------------------------------
# comodules


class Comodule:
    """A module M with a coassociative, counital coaction ψ: M -> J ⊗ M."""

    def __init__(self, base: UnstableCoalgebra, module: UnstableModule, coaction: dict[Idx, Terms]):
        if base.field is not module.field:
            raise StructuralError("comodule and base coalgebra live over different fields")
        self.base = base
        self.module = module
        self.space = module.space
        self.field = module.field
        low = next((d for d in range(self.space.trunc + 1) if self.space.dim(d)), self.space.trunc)
        if self.space.trunc - low > base.trunc:
            raise TruncationOverflow(
                f"coaction needs the base coalgebra through degree {self.space.trunc - low}, "
                f"but it is known only through {base.trunc}")
        clean = {}
        for x, terms in coaction.items():
            for (a, _), (b, _) in terms:
                if a + b != x[0]:
                    raise StructuralError("coaction term of the wrong degree")
            clean[x] = _clean(self.field, dict(terms))
        for d in range(self.space.trunc + 1):
            for k in range(self.space.dim(d)):
                clean.setdefault((d, k), {})
        self.coaction = clean

    @property
    def trunc(self) -> int:
        return self.space.trunc

    @classmethod
    def trivial(cls, base: UnstableCoalgebra, module: UnstableModule) -> Comodule:
        one = base.field.one
        co = {(d, k): {((0, 0), (d, k)): one} for d in range(module.trunc + 1) for k in range(module.space.dim(d))}
        return cls(base, module, co)

    def coaction_map(self) -> GradedMap:
        JM = tensor(self.base.space, self.space)
        blocks = {}
        for d in range(min(self.trunc, JM.trunc) + 1):
            pos = tensor_index(self.base.space, self.space, d)
            entries = {(pos[key], k): c for k in range(self.space.dim(d)) for key, c in self.coaction[(d, k)].items()}
            blocks[d] = Matrix.from_entries(self.field, JM.dim(d), self.space.dim(d), entries)
        return GradedMap(self.space, JM, 0, blocks)


def validate_comodule(M: Comodule) -> ValidationReport:
    rep = ValidationReport("comodule")
    J, sp, fld = M.base, M.space, M.field
    one = fld.one
    counit = rep.check("counit")
    coassoc = rep.check("coassociativity")
    for (d, k), terms in sorted(M.coaction.items()):
        name = sp.basis[d][k]
        unit_part = {key: c for key, c in terms.items() if key[0][0] == 0}
        if unit_part != {((0, 0), (d, k)): one}:
            counit.fail(name, "(ε⊗id)ψ", f"ψ({name}) = {_fmt_terms(J.space, sp, terms)}")
        lhs: dict = {}
        rhs: dict = {}
        for ((a, i), (b, j)), c in terms.items():
            for ((a1, i1), (a2, i2)), c1 in J.diag[(a, i)].items():
                key = ((a1, i1), (a2, i2), (b, j))
                lhs[key] = lhs.get(key, 0) + c * c1
            for ((a2, i2), (b2, j2)), c2 in M.coaction[(b, j)].items():
                key = ((a, i), (a2, i2), (b2, j2))
                rhs[key] = rhs.get(key, 0) + c * c2
        if _clean(fld, lhs) != _clean(fld, rhs):
            coassoc.fail(name, "(Δ⊗id)ψ - (id⊗ψ)ψ", "coaction is not coassociative")
    if fld is Field.F2:
        module_checks(M.module, rep)
        comp = rep.check("steenrod-compatibility")
        for (d, k), terms in sorted(M.coaction.items()):
            for n in range(1, d + 1):
                img = M.module.act_index(n, d, {k: 1})
                lhs: dict = {}
                for kk, c in img.items():
                    for key, v in M.coaction[(d - n, kk)].items():
                        lhs[key] = lhs.get(key, 0) + c * v
                rhs = _tensor_act(J, M.module, n, terms)
                if _clean(fld, lhs) != rhs:
                    comp.fail(sp.basis[d][k], f"ψ(x·Sq{n})",
                              f"{_fmt_terms(J.space, sp, _clean(fld, lhs))} != {_fmt_terms(J.space, sp, rhs)}")
    return rep


def cofree_comodule(V: GradedSpace | UnstableModule, J: UnstableCoalgebra) -> Comodule:
    """V ⊗ J with coaction from Δ_J and the diagonal Steenrod action."""
    Vm = V if isinstance(V, UnstableModule) else UnstableModule(V)
    if Vm.field is not J.field:
        raise StructuralError("field mismatch")
    fld = J.field
    N = min(Vm.trunc, J.trunc)
    sp = tensor(Vm.space.truncate(N), J.space.truncate(N))
    pos = {d: tensor_index(Vm.space, J.space, d) for d in range(N + 1)}
    coaction: dict[Idx, Terms] = {}
    for d in range(N + 1):
        for (va, vi), (jb, jj) in pos[d]:
            k = pos[d][((va, vi), (jb, jj))]
            terms = {}
            for ((a1, i1), (a2, i2)), c in J.diag[(jb, jj)].items():
                key = ((a1, i1), (va + a2, pos[va + a2][((va, vi), (a2, i2))]))
                terms[key] = terms.get(key, 0) + c * fld.sign(va * a1)
            coaction[(d, k)] = terms
    action = {}
    if fld is Field.F2:
        for d in range(N + 1):
            for i in range(1, d + 1):
                entries = {}
                for ((va, vi), (jb, jj)), k in pos[d].items():
                    for r, c in _tensor_act(Vm, J, i, {((va, vi), (jb, jj)): 1}).items():
                        (a2, i2), (b2, j2) = r
                        entries[(pos[d - i][((a2, i2), (b2, j2))], k)] = c
                if entries:
                    action[(i, d)] = Matrix.from_entries(fld, sp.dim(d - i), sp.dim(d), entries)
    return Comodule(J, UnstableModule(sp, action), coaction)


def suspension_comodule(K: UnstableCoalgebra, t: int, trunc: int | None = None) -> Comodule:
    """Σ^t K with ψ(σa) = Σ a' ⊗ σa'' and the suspended action."""
    if t < 1:
        raise StructuralError("suspension degree must be positive")
    top = K.trunc + t
    if trunc is None:
        trunc = K.trunc
    if trunc > top:
        raise TruncationOverflow(f"Σ^{t}K is known only through degree {top}; increase the truncation of K to ≥ {trunc - t}")
    fld = K.field
    prefix = "σ" if t == 1 else f"σ^{t}"
    per = [()] * t + [tuple(prefix + n for n in K.space.basis[d]) for d in range(K.trunc + 1)]
    sp = GradedSpace(fld, trunc, tuple(per[: trunc + 1]) + ((),) * max(0, trunc + 1 - len(per)))
    action = {}
    for (i, d), m in K.action.items():
        if d + t <= trunc:
            action[(i, d + t)] = m
    coaction = {}
    for d in range(t, trunc + 1):
        for k in range(sp.dim(d)):
            terms = {}
            for ((a, i), (b, j)), c in K.diag[(d - t, k)].items():
                key = ((a, i), (b + t, j))
                terms[key] = terms.get(key, 0) + c * fld.sign(t * a)
            coaction[(d, k)] = terms
    return Comodule(K, UnstableModule(sp, action), coaction)


def square_zero_extension(M: Comodule) -> UnstableCoalgebra:
    """The coalgebra J ⊕ M with Δm = ψ(m) + τψ(m) and the direct-sum action."""
    J = M.base
    fld = J.field
    N = min(J.trunc, M.trunc)
    nJ = [J.space.dim(d) for d in range(N + 1)]
    names = [tuple(J.space.basis[d]) + tuple(M.space.basis[d]) for d in range(N + 1)]
    sp = GradedSpace(fld, N, tuple(names))
    diag: dict[Idx, Terms] = {}
    for d in range(N + 1):
        for k in range(nJ[d]):
            diag[(d, k)] = dict(J.diag[(d, k)])
        for k in range(M.space.dim(d)):
            terms = {}
            for ((a, i), (b, j)), c in M.coaction[(d, k)].items():
                terms[((a, i), (b, nJ[b] + j))] = terms.get(((a, i), (b, nJ[b] + j)), 0) + c
                key = ((b, nJ[b] + j), (a, i))
                terms[key] = terms.get(key, 0) + c * fld.sign(a * b)
            diag[(d, nJ[d] + k)] = terms
    action = {}
    if fld is Field.F2:
        for d in range(N + 1):
            for i in range(1, d + 1):
                a = J.action_matrix(i, d)
                b = M.module.action_matrix(i, d)
                if a.is_zero() and b.is_zero():
                    continue
                entries = {(r, c): v for r, c, v in a.nonzero_entries()}
                entries.update({(nJ[d - i] + r, nJ[d] + c): v for r, c, v in b.nonzero_entries()})
                action[(i, d)] = Matrix.from_entries(fld, sp.dim(d - i), sp.dim(d), entries)
    return UnstableCoalgebra(sp, diag, action)


# ---------------------------------------------------------------------------
# comodule homomorphisms


class HomSpace:
    """Degree-0 maps M -> M' commuting with the action and the coaction."""

    def __init__(self, source: Comodule | UnstableModule, target: Comodule | UnstableModule, basis: list[GradedMap],
                 variables: list[tuple[int, int, int]]):
        self.source = source
        self.target = target
        self.basis = basis
        self._vars = variables

    @property
    def dim(self) -> int:
        return len(self.basis)

    def evaluate(self, coeffs: Sequence) -> GradedMap:
        src, tgt = self.source.space, self.target.space
        fld = src.field
        out = GradedMap(src, tgt, 0, {})
        for c, f in zip(coeffs, self.basis):
            if fld.coerce(c):
                out = out + f.scale(c)
        return out

    def coordinates(self, f: GradedMap) -> list:
        """Coordinates of f in the basis; raises NoSolution if f is not a morphism."""
        fld = self.source.space.field
        cols = [[b.block(d).entry(r, c) for (d, r, c) in self._vars] for b in self.basis]
        rhs = [f.block(d).entry(r, c) for (d, r, c) in self._vars]
        if not cols:
            if any(rhs):
                from .galgebra import NoSolution
                raise NoSolution("not a morphism")
            return []
        return Matrix.from_lists(fld, cols, len(self._vars)).transpose().solve(rhs)


def _module_of(X: Comodule | UnstableModule) -> UnstableModule:
    return X.module if isinstance(X, Comodule) else X


def comodule_hom(M: Comodule | UnstableModule, Mp: Comodule | UnstableModule) -> HomSpace:
    """Solve the linear constraints defining comodule (or module) morphisms M -> M'."""
    both = isinstance(M, Comodule) and isinstance(Mp, Comodule)
    if isinstance(M, Comodule) != isinstance(Mp, Comodule):
        raise StructuralError("cannot mix comodules and plain modules")
    if both and M.base is not Mp.base and M.base.space != Mp.base.space:
        raise StructuralError("comodules over different base coalgebras")
    A, B = _module_of(M), _module_of(Mp)
    fld = A.field
    N = min(A.trunc, B.trunc)
    variables = [(d, r, c) for d in range(N + 1) for r in range(B.space.dim(d)) for c in range(A.space.dim(d))]
    vix = {v: k for k, v in enumerate(variables)}
    rows: list[dict[int, object]] = []
    if fld is Field.F2:
        for i in range(1, N + 1):
            for d in range(i, N + 1):
                Ma, Mb = A.action_matrix(i, d), B.action_matrix(i, d)
                if Ma.is_zero() and Mb.is_zero():
                    continue
                # (Mb f_d - f_{d-i} Ma)[r, c] = 0
                for r in range(B.space.dim(d - i)):
                    for c in range(A.space.dim(d)):
                        row: dict[int, object] = {}
                        for s in range(B.space.dim(d)):
                            v = Mb.entry(r, s)
                            if v:
                                poly_add(fld, row, vix[(d, s, c)], v)
                        for s in range(A.space.dim(d - i)):
                            v = Ma.entry(s, c)
                            if v:
                                poly_add(fld, row, vix[(d - i, r, s)], -v)
                        if row:
                            rows.append(row)
    if both:
        # ψ' f(x) = (id ⊗ f) ψ(x), compared coefficientwise on J_a ⊗ M'_b
        for d in range(N + 1):
            for c in range(A.space.dim(d)):
                eqs: dict[tuple, dict[int, object]] = {}
                for s in range(B.space.dim(d)):
                    for ((a, i), (b, j)), v in Mp.coaction[(d, s)].items():
                        poly_add(fld, eqs.setdefault(((a, i), (b, j)), {}), vix[(d, s, c)], v)
                for ((a, i), (b, k)), v in M.coaction[(d, c)].items():
                    for j in range(B.space.dim(b)):
                        poly_add(fld, eqs.setdefault(((a, i), (b, j)), {}), vix[(b, j, k)], -v)
                rows.extend(e for e in eqs.values() if e)
    nvar = len(variables)
    if fld is Field.F2:
        bits = []
        for row in rows:
            b = 0
            for k in row:
                b |= 1 << k
            bits.append(b)
        C = Matrix(fld, len(bits), nvar, bits)
    else:
        C = Matrix.from_entries(fld, len(rows), nvar, {(r, k): v for r, row in enumerate(rows) for k, v in row.items()})
    null = C.nullspace() if nvar else []
    basis = []
    for vec in null:
        blocks: dict[int, dict] = {}
        for k, v in enumerate(vec):
            if v:
                d, r, c = variables[k]
                blocks.setdefault(d, {})[(r, c)] = v
        basis.append(GradedMap(A.space.truncate(N) if A.trunc != N else A.space,
                               B.space.truncate(N) if B.trunc != N else B.space, 0,
                               {d: Matrix.from_entries(fld, B.space.dim(d), A.space.dim(d), blocks.get(d, {}))
                                for d in range(N + 1)}))
    return HomSpace(M, Mp, basis, variables)


def is_comodule_map(f: GradedMap, M: Comodule | UnstableModule, Mp: Comodule | UnstableModule) -> bool:
    """Check f·Sq = Sq·f and ψ'f = (id⊗f)ψ directly, degree by degree."""
    if isinstance(M, Comodule) != isinstance(Mp, Comodule):
        raise StructuralError("cannot mix comodules and plain modules")
    A, B = _module_of(M), _module_of(Mp)
    fld = A.field
    N = min(A.trunc, B.trunc)
    if f.shift:
        return False
    if fld is Field.F2:
        for i in range(1, N + 1):
            for d in range(i, N + 1):
                if B.action_matrix(i, d) @ f.block(d) != f.block(d - i) @ A.action_matrix(i, d):
                    return False
    if isinstance(M, Comodule):
        for d in range(N + 1):
            fd = f.block(d)
            for c in range(A.space.dim(d)):
                lhs: dict = {}
                for s, v in enumerate(fd.column(c)):
                    if v:
                        for key, w in Mp.coaction[(d, s)].items():
                            lhs[key] = lhs.get(key, 0) + v * w
                rhs: dict = {}
                for ((a, i), (b, k)), v in M.coaction[(d, c)].items():
                    for j, w in enumerate(f.block(b).column(k)):
                        if w:
                            key = ((a, i), (b, j))
                            rhs[key] = rhs.get(key, 0) + v * w
                if _clean(fld, lhs) != _clean(fld, rhs):
                    return False
    return True


# ---------------------------------------------------------------------------
# small standard models


def coalgebra_from_names(fld: Field, trunc: int, generators: Iterable[tuple[str, int]],
                         reduced: dict[str, list[tuple[str, str, object]]] | None = None,
                         sq: dict[tuple[int, str], list[tuple[str, object]]] | None = None) -> UnstableCoalgebra:
    """Build a coalgebra from named generators, reduced diagonal and single-square action."""
    gens = list(generators)
    sp = GradedSpace.from_degrees(fld, trunc, [("1", 0)] + gens)
    red: dict[Idx, Terms] = {}
    for on, terms in (reduced or {}).items():
        x = sp.locate(on)
        t: dict = {}
        for left, right, c in terms:
            key = (sp.locate(left), sp.locate(right))
            if key[0][0] + key[1][0] != x[0]:
                raise StructuralError(f"diagonal term {left}⊗{right} of {on} has the wrong degree")
            t[key] = t.get(key, 0) + fld.coerce(c)
        red[x] = t
    action: dict[tuple[int, int], dict] = {}
    for (i, on), value in (sq or {}).items():
        d, k = sp.locate(on)
        for name, c in value:
            e, r = sp.locate(name)
            if e != d - i:
                raise StructuralError(f"{on}·Sq{i} must have degree {d - i}, got {name} in degree {e}")
            ent = action.setdefault((i, d), {})
            ent[(r, k)] = ent.get((r, k), 0) + c
    mats = {key: Matrix.from_entries(fld, sp.dim(key[1] - key[0]), sp.dim(key[1]), ent) for key, ent in action.items()}
    return UnstableCoalgebra.from_reduced(sp, red, mats)


def ground(fld: Field = Field.F2, trunc: int = 8) -> UnstableCoalgebra:
    return coalgebra_from_names(fld, trunc, [])


def sphere(n: int, fld: Field = Field.F2, trunc: int = 8, name: str | None = None) -> UnstableCoalgebra:
    return coalgebra_from_names(fld, trunc, [(name or f"i{n}", n)])


def rp2(trunc: int = 8) -> UnstableCoalgebra:
    return coalgebra_from_names(Field.F2, trunc, [("b1", 1), ("b2", 2)],
                                {"b2": [("b1", "b1", 1)]}, {(1, "b2"): [("b1", 1)]})


def trivial_coalgebra(degrees: Sequence[int], fld: Field = Field.F2, trunc: int = 8) -> UnstableCoalgebra:
    return coalgebra_from_names(fld, trunc, [(f"x{d}" if degrees.count(d) == 1 else f"x{d}_{k}", d)
                                             for k, d in enumerate(degrees)])


def divided_power(deg: int, trunc: int = 8) -> UnstableCoalgebra:
    """Dual of F2[t] with |t| in {1, 2}, the homology of RP^∞ or CP^∞."""
    if deg not in (1, 2):
        raise StructuralError("divided_power supports classes of degree 1 or 2")
    name = lambda m: f"b{m}" if m else "1"
    gens = [(name(k * deg), k * deg) for k in range(1, trunc // deg + 1)]
    red = {name(m): [(name(a), name(m - a), 1) for a in range(deg, m, deg)] for _, m in gens}
    # Sq^{j·deg} t^k = C(k, j) t^{k+j}, so b_m·Sq^{j·deg} = C(m/deg - j, j) b_{m - j·deg}
    sq = {}
    for _, m in gens:
        k = m // deg
        for j in range(1, k // 2 + 1):
            if binom2(k - j, j):
                sq[(j * deg, name(m))] = [(name(m - j * deg), 1)]
    return coalgebra_from_names(Field.F2, trunc, gens, red, sq)

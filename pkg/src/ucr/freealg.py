"""Free unstable algebras and algebra maps between duals of coalgebras.

The cofree unstable coalgebra G(V) is the graded dual of a free object:
over F2 the polynomial algebra on the classes Sq^I ι_v with I admissible and
excess(I) < |v|, over Q the free graded-commutative algebra on V.  Working on
the algebra side turns coalgebra maps into substitutions of polynomials, which
is what keeps resolutions cheap.

Monomials are sorted tuples of generator ids (repetition = powers).
Polynomials are dicts monomial -> coefficient.
"""

from __future__ import annotations

from bisect import bisect_left
from collections.abc import Sequence
from typing import Protocol

from .galgebra import Field, StructuralError, TruncationOverflow
from .steenrod import adem_reduce, admissible_sequences, excess

Mono = tuple[int, ...]
Poly = dict


def poly_add(fld: Field, acc: dict, key, c) -> None:
    """acc[key] += c, dropping zeros."""
    if fld is Field.F2:
        if c % 2:
            if key in acc:
                del acc[key]
            else:
                acc[key] = 1
        return
    v = acc.get(key, 0) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


def sq_word_label(I: Sequence[int]) -> str:
    return "".join(f"Sq{i}" for i in I)


class FreeAlgebra:
    """Truncated free unstable algebra (F2) or free graded-commutative algebra (Q).

    `cogens` lists (label, degree) of the cogenerators v; generator ids refer to
    the classes Sq^I ι_v inside the truncation.
    """

    def __init__(self, fld: Field, trunc: int, cogens: Sequence[tuple[str, int]]):
        self.field = fld
        self.trunc = trunc
        self.cogens = [(str(l), int(d)) for l, d in cogens]
        for label, d in self.cogens:
            if d < 1:
                raise StructuralError(f"cogenerator {label!r} must have positive degree, got {d}")
        self.gens: list[tuple[int, tuple[int, ...], int]] = []
        self.gen_index: dict[tuple[int, tuple[int, ...]], int] = {}
        self.fund: list[int | None] = []
        for u, (_, n) in enumerate(self.cogens):
            if n > trunc:
                self.fund.append(None)
                continue
            words = [()]
            if fld is Field.F2:
                words = [I for k in range(trunc - n + 1) for I in admissible_sequences(k) if excess(I) < n]
                words.sort(key=lambda I: (sum(I), len(I), I))
            for I in words:
                self.gen_index[(u, I)] = len(self.gens)
                self.gens.append((u, I, n + sum(I)))
            self.fund.append(self.gen_index[(u, ())])
        self.gen_deg = [g[2] for g in self.gens]
        self.odd = [fld is Field.Q and g[2] % 2 == 1 for g in self.gens]
        self._by_deg: list[list[int]] = [[] for _ in range(trunc + 1)]
        for g, d in enumerate(self.gen_deg):
            self._by_deg[d].append(g)
        self._monos: dict[int, list[Mono]] = {}
        self._mono_pos: dict[int, dict[Mono, int]] = {}
        self._sq_gen: dict[tuple[int, int], dict] = {}
        self._sq_mono: dict[tuple[int, Mono], dict] = {}

    # generators and monomials ---------------------------------------------
    @property
    def ngens(self) -> int:
        return len(self.gens)

    def gens_in_degree(self, d: int) -> list[int]:
        return self._by_deg[d] if 0 <= d <= self.trunc else []

    def gen_label(self, g: int) -> str:
        u, I, _ = self.gens[g]
        return f"{sq_word_label(I)}[{self.cogens[u][0]}]"

    def mono_degree(self, m: Mono) -> int:
        return sum(self.gen_deg[g] for g in m)

    def mono_label(self, m: Mono) -> str:
        if not m:
            return "1"
        parts, k = [], 0
        while k < len(m):
            j = k
            while j < len(m) and m[j] == m[k]:
                j += 1
            e = j - k
            parts.append(self.gen_label(m[k]) + (f"^{e}" if e > 1 else ""))
            k = j
        return "·".join(parts)

    def monomials(self, d: int) -> list[Mono]:
        if d < 0:
            return []
        if d > self.trunc:
            raise TruncationOverflow(f"degree {d} exceeds truncation {self.trunc}")
        hit = self._monos.get(d)
        if hit is None:
            hit = sorted(self._enumerate(d, 0))
            self._monos[d] = hit
            self._mono_pos[d] = {m: k for k, m in enumerate(hit)}
        return hit

    def mono_pos(self, d: int) -> dict[Mono, int]:
        self.monomials(d)
        return self._mono_pos[d]

    def dims(self) -> list[int]:
        return [len(self.monomials(d)) for d in range(self.trunc + 1)]

    def _enumerate(self, d: int, start: int) -> list[Mono]:
        if d == 0:
            return [()]
        out = []
        for e in range(1, d + 1):
            pool = self._by_deg[e]
            for g in pool[bisect_left(pool, start):]:
                nxt = g + 1 if self.odd[g] else g
                for rest in self._enumerate(d - e, nxt):
                    out.append((g,) + rest)
        return out

    # products ---------------------------------------------------------------
    def mul_mono(self, a: Mono, b: Mono):
        """(coefficient, monomial) of a·b, or None when zero or beyond truncation."""
        if not a:
            return 1, b
        if not b:
            return 1, a
        if self.mono_degree(a) + self.mono_degree(b) > self.trunc:
            return None
        if self.field is Field.F2:
            return 1, tuple(sorted(a + b))
        odd = self.odd
        sign = 1
        oa = [g for g in a if odd[g]]
        ob = [g for g in b if odd[g]]
        if set(oa) & set(ob):
            return None
        for y in ob:
            sign *= (-1) ** sum(1 for x in oa if x > y)
        return sign, tuple(sorted(a + b))

    def mul(self, p: dict, q: dict) -> dict:
        out: dict = {}
        fld = self.field
        for ma, ca in p.items():
            for mb, cb in q.items():
                r = self.mul_mono(ma, mb)
                if r is not None:
                    poly_add(fld, out, r[1], r[0] * ca * cb)
        return out

    def add(self, p: dict, q: dict, c=1) -> dict:
        out = dict(p)
        for m, v in q.items():
            poly_add(self.field, out, m, c * v)
        return out

    def gen_poly(self, g: int) -> dict:
        return {(g,): 1}

    def one(self) -> dict:
        return {(): 1}

    # Steenrod squares (cohomological, raising degree) ----------------------
    def sq_gen(self, a: int, g: int) -> dict:
        key = (a, g)
        hit = self._sq_gen.get(key)
        if hit is not None:
            return hit
        u, I, deg = self.gens[g]
        n = self.cogens[u][1]
        out: dict = {}
        if a == 0:
            out = {(g,): 1}
        elif a <= deg and deg + a <= self.trunc:
            for J in adem_reduce((a,) + I):
                ex = excess(J)
                if ex < n:
                    poly_add(self.field, out, (self.gen_index[(u, J)],), 1)
                elif ex == n:
                    h = self.gen_index[(u, J[1:])]
                    poly_add(self.field, out, (h, h), 1)
        self._sq_gen[key] = out
        return out

    def sq_mono(self, i: int, m: Mono) -> dict:
        if i == 0:
            return {m: 1}
        if not m:
            return {}
        key = (i, m)
        hit = self._sq_mono.get(key)
        if hit is not None:
            return hit
        out: dict = {}
        if self.mono_degree(m) + i <= self.trunc:
            g, rest = m[0], m[1:]
            if not rest:
                out = self.sq_gen(i, g)
            else:
                rdeg = self.mono_degree(rest)
                for a in range(max(0, i - rdeg), min(i, self.gen_deg[g]) + 1):
                    left = self.sq_gen(a, g)
                    if not left:
                        continue
                    right = self.sq_mono(i - a, rest)
                    if right:
                        for mm, c in self.mul(left, right).items():
                            poly_add(self.field, out, mm, c)
        self._sq_mono[key] = out
        return out

    def sq(self, i: int, p: dict) -> dict:
        if self.field is not Field.F2:
            return p if i == 0 else {}
        out: dict = {}
        for m in p:
            for mm in self.sq_mono(i, m):
                poly_add(self.field, out, mm, 1)
        return out

    def sq_word(self, I: Sequence[int], p: dict) -> dict:
        for i in reversed(I):
            if not p:
                break
            p = self.sq(i, p)
        return p

    # linear algebra helpers ---------------------------------------------------
    def linear_part(self, p: dict) -> dict[int, object]:
        """Coefficients of single generators (the indecomposable part)."""
        return {m[0]: c for m, c in p.items() if len(m) == 1}


class DualTarget(Protocol):
    """An algebra receiving generator images: the dual of some coalgebra."""

    field: Field

    def mul(self, x, y): ...

    def sq(self, i: int, x): ...

    def add(self, x, y, c=1): ...

    def one(self): ...


class AlgebraMap:
    """Algebra map out of a free algebra, fixed by the images of the ι_v.

    Dually this is the coalgebra map into G(V) given by the couniversal
    property, so evaluating it on monomials computes matrix entries of that
    coalgebra map.
    """

    def __init__(self, src: FreeAlgebra, tgt, fund_images: dict[int, object]):
        self.src = src
        self.tgt = tgt
        self.fund_images = fund_images
        self._gen: dict[int, object] = {}
        self._mono: dict[Mono, object] = {}

    def gen_image(self, g: int):
        hit = self._gen.get(g)
        if hit is None:
            u, I, _ = self.src.gens[g]
            base = self.fund_images.get(u)
            hit = self.tgt.zero_like(self.src.cogens[u][1] + sum(I)) if base is None else self.tgt.sq_word(I, base)
            self._gen[g] = hit
        return hit

    def mono_image(self, m: Mono):
        hit = self._mono.get(m)
        if hit is None:
            if not m:
                hit = self.tgt.one()
            elif len(m) == 1:
                hit = self.gen_image(m[0])
            else:
                hit = self.tgt.mul(self.mono_image(m[:-1]), self.gen_image(m[-1]))
            self._mono[m] = hit
        return hit

    def image(self, p: dict, deg: int):
        acc = self.tgt.zero_like(deg)
        for m, c in p.items():
            acc = self.tgt.add(acc, self.mono_image(m), c)
        return acc


class PolyTarget:
    """A FreeAlgebra viewed as a DualTarget (elements are polynomials)."""

    def __init__(self, alg: FreeAlgebra):
        self.alg = alg
        self.field = alg.field

    def mul(self, x, y):
        return self.alg.mul(x, y)

    def sq(self, i, x):
        return self.alg.sq(i, x)

    def sq_word(self, I, x):
        return self.alg.sq_word(I, x)

    def add(self, x, y, c=1):
        return self.alg.add(x, y, c)

    def one(self):
        return self.alg.one()

    def zero_like(self, deg):
        return {}


class FunctionalTarget:
    """Dual algebra of an explicit coalgebra: elements are (degree, coefficient list).

    The coalgebra must provide `space`, `diag_pairs(d, a)` listing
    (x, i, j, coeff) for the component of Δx in C_a ⊗ C_{d-a}, and
    `action_matrix(i, d)` for the right action C_d -> C_{d-i}.
    """

    def __init__(self, coalg):
        self.C = coalg
        self.field = coalg.space.field
        self.trunc = coalg.space.trunc

    def zero_like(self, deg):
        return (deg, [self.field.zero] * self.C.space.dim(deg)) if deg <= self.trunc else (deg, [])

    def one(self):
        return (0, [self.field.one])

    def add(self, x, y, c=1):
        (dx, vx), (dy, vy) = x, y
        if dx != dy:
            raise StructuralError("adding functionals of different degrees")
        if self.field is Field.F2:
            return (dx, [(a + c * b) % 2 for a, b in zip(vx, vy)])
        return (dx, [a + c * b for a, b in zip(vx, vy)])

    def mul(self, x, y):
        (a, fa), (b, fb) = x, y
        d = a + b
        if d > self.trunc:
            return (d, [])
        out = [self.field.zero] * self.C.space.dim(d)
        if not any(fa) or not any(fb):
            return (d, out)
        for xi, i, j, c in self.C.diag_pairs(d, a):
            u, v = fa[i], fb[j]
            if u and v:
                out[xi] += c * u * v
        if self.field is Field.F2:
            out = [v % 2 for v in out]
        return (d, out)

    def sq(self, i, x):
        if i == 0:
            return x
        if self.field is not Field.F2:
            return (x[0] + i, [self.field.zero] * self.C.space.dim(x[0] + i)) if x[0] + i <= self.trunc else (x[0] + i, [])
        deg, f = x
        if deg + i > self.trunc:
            return (deg + i, [])
        M = self.C.action_matrix(i, deg + i)
        return (deg + i, M.transpose().apply(f))

    def sq_word(self, I, x):
        for i in reversed(I):
            x = self.sq(i, x)
        return x


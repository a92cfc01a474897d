"""Mod-2 Steenrod algebra: Adem reduction, admissible bases, excess, right actions.

Monomials are tuples of positive integers, Sq^{i1}...Sq^{ik} written (i1, ..., ik);
the empty tuple is the unit.  Elements are frozensets of admissible tuples of
one degree (coefficients mod 2 are presence or absence).

Right actions: x·(Sq^a Sq^b) = (x·Sq^a)·Sq^b, so the letters of a word act on a
homology class from left to right.  This is the only reading under which a
right action respects the product of the algebra.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from functools import cache
from threading import Lock
from typing import Protocol

from .galgebra import StructuralError

SqMonomial = tuple[int, ...]


def binom2(n: int, k: int) -> int:
    """Binomial coefficient C(n, k) mod 2 by Lucas' theorem."""
    if k < 0 or n < 0 or k > n:
        return 0
    return int(k & ~n == 0)


def is_admissible(word: SqMonomial) -> bool:
    return all(word[j] >= 2 * word[j + 1] for j in range(len(word) - 1))


def degree(word: SqMonomial) -> int:
    return sum(word)


def excess(m: SqMonomial) -> int:
    if not is_admissible(m):
        raise StructuralError(f"excess is only defined on admissible monomials, got {m}")
    if not m:
        return 0
    return m[0] - sum(m[1:])


def adem_terms(a: int, b: int) -> list[SqMonomial]:
    """Admissible expansion of Sq^a Sq^b for 0 < a < 2b."""
    out = []
    for c in range(a // 2 + 1):
        if binom2(b - c - 1, a - 2 * c):
            out.append((a + b - c, c) if c else (a + b,))
    return out


_memo_lock = Lock()
_memo: dict[SqMonomial, frozenset[SqMonomial]] = {}


def adem_reduce(word: Iterable[int]) -> frozenset[SqMonomial]:
    """Admissible normal form of the product Sq^{w1}...Sq^{wk}.

    Rewrites the leftmost inadmissible pair first; results are memoized behind
    a lock so concurrent callers see the same table.
    """
    w = tuple(int(i) for i in word if i != 0)
    if any(i < 0 for i in w):
        raise StructuralError(f"Steenrod words have non-negative entries, got {w}")
    hit = _memo.get(w)
    if hit is not None:
        return hit
    res = _reduce(w)
    with _memo_lock:
        _memo.setdefault(w, res)
    return res


def _reduce(w: SqMonomial) -> frozenset[SqMonomial]:
    for j in range(len(w) - 1):
        a, b = w[j], w[j + 1]
        if a < 2 * b:
            acc: set[SqMonomial] = set()
            for t in adem_terms(a, b):
                acc ^= adem_reduce(w[:j] + t + w[j + 2:])
            return frozenset(acc)
    return frozenset([w])


def admissible_sequences(d: int, max_first: int | None = None) -> list[SqMonomial]:
    """All admissible monomials of degree d whose first entry is at most max_first."""
    if d == 0:
        return [()]
    top = d if max_first is None else min(d, max_first)
    out = []
    for first in range(1, top + 1):
        for rest in admissible_sequences(d - first, first // 2):
            if rest or d - first == 0:
                out.append((first,) + rest)
    return out


@cache
def admissible_basis(d: int) -> tuple[SqMonomial, ...]:
    """Admissible monomials of degree d, ordered by length then lexicographically."""
    if d < 0:
        return ()
    return tuple(sorted(admissible_sequences(d), key=lambda m: (len(m), m)))


@dataclass(frozen=True)
class SteenrodElement:
    terms: frozenset[SqMonomial]
    degree: int

    def __post_init__(self) -> None:
        for t in self.terms:
            if not is_admissible(t):
                raise StructuralError(f"{t} is not admissible")
            if sum(t) != self.degree:
                raise StructuralError(f"{t} does not have degree {self.degree}")

    @classmethod
    def of(cls, *word: int) -> SteenrodElement:
        w = tuple(i for i in word if i)
        return cls(adem_reduce(w), sum(w))

    @classmethod
    def unit(cls) -> SteenrodElement:
        return cls(frozenset([()]), 0)

    @classmethod
    def zero(cls, deg: int = 0) -> SteenrodElement:
        return cls(frozenset(), deg)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: SteenrodElement) -> SteenrodElement:
        if self.terms and other.terms and self.degree != other.degree:
            raise StructuralError("cannot add Steenrod elements of different degrees")
        deg = self.degree if self.terms else other.degree
        return SteenrodElement(self.terms ^ other.terms, deg)

    def __mul__(self, other: SteenrodElement) -> SteenrodElement:
        acc: set[SqMonomial] = set()
        for a in self.terms:
            for b in other.terms:
                acc ^= adem_reduce(a + b)
        return SteenrodElement(frozenset(acc), self.degree + other.degree)

    def sorted_terms(self) -> list[SqMonomial]:
        return sorted(self.terms, key=lambda m: (len(m), m))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join("".join(f"Sq{i}" for i in t) or "1" for t in self.sorted_terms())


class RightModule(Protocol):
    """Anything storing the action of single squares on named basis elements."""

    def sq_vector(self, i: int, vec: dict[str, object]) -> dict[str, object]: ...

    def degree_of(self, name: str) -> int: ...


def act_word(M: RightModule, vec: dict[str, object], word: SqMonomial) -> dict[str, object]:
    for i in word:
        if not vec:
            break
        vec = M.sq_vector(i, vec)
    return vec


def act(M: RightModule, x, e: SteenrodElement | SqMonomial) -> dict[str, object]:
    """x·e for a basis name or {name: coeff} vector x in an unstable right module."""
    vec = {x: 1} if isinstance(x, str) else dict(x)
    for name in vec:
        M.degree_of(name)
    if isinstance(e, tuple):
        e = SteenrodElement.of(*e)
    out: dict[str, int] = {}
    for t in e.terms:
        for name, c in act_word(M, vec, t).items():
            out[name] = (out.get(name, 0) + c) % 2
    return {k: v for k, v in out.items() if v}

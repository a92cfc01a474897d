"""JSON documents: coalgebra presentations, extensions, liftings and reports.

A coalgebra document lists named generators, the reduced diagonal and the
single-square action; counit terms are implicit.

    {"schema": "ucr/1", "kind": "coalgebra", "field": "F2", "truncation": 8,
     "generators": [{"name": "b1", "degree": 1}, {"name": "b2", "degree": 2}],
     "diagonal": [{"on": "b2", "terms": [["b1", "b1"]]}],
     "sq": [{"op": 1, "on": "b2", "value": [["b1", 1]]}]}

Over Q a diagonal term may carry a coefficient as a third entry ("3/2").
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .coalg import UnstableCoalgebra, coalgebra_from_names
from .galgebra import Field, StructuralError

SCHEMA = "ucr/1"


class DocumentError(ValueError):
    """Malformed input: unknown names, wrong types, inconsistent degrees."""


def _need(doc: dict, key: str, where: str, kind: type | tuple = object):
    if not isinstance(doc, dict):
        raise DocumentError(f"{where}: expected an object")
    if key not in doc:
        raise DocumentError(f"{where}: missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise DocumentError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def _check_schema(doc: Any, kind: str) -> None:
    if not isinstance(doc, dict):
        raise DocumentError("document root must be a JSON object")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise DocumentError(f"unsupported schema {doc.get('schema')!r}; expected {SCHEMA!r}")
    if doc.get("kind", kind) != kind:
        raise DocumentError(f"expected a {kind} document, got kind {doc.get('kind')!r}")


def parse_field(text: Any) -> Field:
    if text == "F2":
        return Field.F2
    if text == "Q":
        return Field.Q
    raise DocumentError(f"field: expected \"F2\" or \"Q\", got {text!r}")


def coalgebra_from_document(doc: Any) -> UnstableCoalgebra:
    _check_schema(doc, "coalgebra")
    fld = parse_field(_need(doc, "field", "coalgebra", str))
    trunc = _need(doc, "truncation", "coalgebra", int)
    if trunc < 0:
        raise DocumentError("coalgebra.truncation: must be non-negative")
    gens = []
    seen = {"1"}
    for k, g in enumerate(_need(doc, "generators", "coalgebra", list)):
        where = f"generators[{k}]"
        name = _need(g, "name", where, str)
        deg = _need(g, "degree", where, int)
        if deg < 1:
            raise DocumentError(f"{where}.degree: must be ≥ 1, got {deg}")
        if deg > trunc:
            raise DocumentError(f"{where}.degree: {deg} exceeds the truncation {trunc}")
        if name in seen:
            raise DocumentError(f"{where}.name: duplicate name {name!r}")
        seen.add(name)
        gens.append((name, deg))
    degree = dict(gens)
    reduced: dict[str, list] = {}
    for k, entry in enumerate(doc.get("diagonal", [])):
        where = f"diagonal[{k}]"
        on = _need(entry, "on", where, str)
        if on not in degree:
            raise DocumentError(f"{where}.on: unknown generator {on!r}")
        terms = []
        for j, t in enumerate(_need(entry, "terms", where, list)):
            tw = f"{where}.terms[{j}]"
            if not isinstance(t, list) or len(t) not in (2, 3):
                raise DocumentError(f"{tw}: expected [left, right] or [left, right, coeff]")
            left, right = t[0], t[1]
            for side in (left, right):
                if side not in degree:
                    raise DocumentError(f"{tw}: unknown generator {side!r}")
            if degree[left] + degree[right] != degree[on]:
                raise DocumentError(f"{tw}: |{left}| + |{right}| = {degree[left] + degree[right]} but |{on}| = {degree[on]}")
            c = _coeff(fld, t[2], tw) if len(t) == 3 else fld.one
            terms.append((left, right, c))
        reduced.setdefault(on, []).extend(terms)
    sq: dict[tuple[int, str], list] = {}
    for k, entry in enumerate(doc.get("sq", [])):
        where = f"sq[{k}]"
        if fld is not Field.F2:
            raise DocumentError(f"{where}: Steenrod operations are only allowed over F2")
        op = _need(entry, "op", where, int)
        on = _need(entry, "on", where, str)
        if op < 1:
            raise DocumentError(f"{where}.op: must be ≥ 1")
        if on not in degree:
            raise DocumentError(f"{where}.on: unknown generator {on!r}")
        value = []
        for j, v in enumerate(_need(entry, "value", where, list)):
            vw = f"{where}.value[{j}]"
            if not isinstance(v, list) or len(v) != 2:
                raise DocumentError(f"{vw}: expected [name, coeff]")
            name = v[0]
            if name != "1" and name not in degree:
                raise DocumentError(f"{vw}: unknown generator {name!r}")
            if degree.get(name, 0) != degree[on] - op:
                raise DocumentError(f"{vw}: |{name}| must be |{on}| - {op} = {degree[on] - op}")
            value.append((name, _coeff(fld, v[1], vw)))
        sq.setdefault((op, on), []).extend(value)
    try:
        return coalgebra_from_names(fld, trunc, gens, reduced, sq)
    except StructuralError as exc:
        raise DocumentError(str(exc)) from exc


def _coeff(fld: Field, c: Any, where: str):
    try:
        return fld.parse(c)
    except (StructuralError, TypeError) as exc:
        raise DocumentError(f"{where}: bad coefficient {c!r}") from exc


def coalgebra_to_document(K: UnstableCoalgebra) -> dict:
    """Canonical document: generators by degree, terms in basis order."""
    sp, fld = K.space, K.field
    gens = [{"name": n, "degree": d} for d in range(1, sp.trunc + 1) for n in sp.basis[d]]
    diagonal = []
    for d in range(1, sp.trunc + 1):
        for k, name in enumerate(sp.basis[d]):
            red = K.reduced((d, k))
            if not red:
                continue
            terms = []
            for ((a, i), (b, j)), c in sorted(red.items()):
                t = [sp.basis[a][i], sp.basis[b][j]]
                if c != fld.one:
                    t.append(fld.format(c))
                terms.append(t)
            diagonal.append({"on": name, "terms": terms})
    sq = []
    for (i, d), m in sorted(K.action.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        for k, name in enumerate(sp.basis[d]):
            value = [[sp.basis[d - i][r], fld.format(m.entry(r, k))] for r in range(m.nrows) if m.entry(r, k)]
            if value:
                sq.append({"op": i, "on": name, "value": value})
    sq.sort(key=lambda e: (sp.locate(e["on"]), e["op"]))
    return {"schema": SCHEMA, "kind": "coalgebra", "field": fld.value, "truncation": sp.trunc,
            "generators": gens, "diagonal": diagonal, "sq": sq}


def canonical_json(doc: Any) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=False) + "\n"


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()

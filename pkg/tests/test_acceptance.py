"""The eight acceptance criteria, each timed against its budget.

Every criterion records one PASS/FAIL line; pytest prints them in the
terminal summary, and running this file directly prints them as it goes.
"""

import itertools
import json
import random
import sys
from time import perf_counter

from conftest import ACCEPTANCE, COALGEBRAS, GOLDEN, acceptance_line, body, run_cli
from test_cli import CASES, FAULTS

from ucr.coalg import (
    cofree_coalgebra,
    divided_power,
    ground,
    rp2,
    sphere,
    suspension_comodule,
    trivial_coalgebra,
    validate,
)
from ucr.cosimplicial import (
    check_identities,
    cohomotopy,
    conjugate,
    moore_complex,
    normalization,
    random_module_object,
)
from ucr.documents import canonical_json
from ucr.galgebra import Field, GradedSpace, compose, identity
from ucr.quillen import (
    CofreeComplex,
    QuillenComplex,
    auto_lifting,
    brute_force_characteristic,
    brute_force_difference,
    characteristic_cocycle,
    cohomology,
    difference_cocycle,
    extension_comparison,
    extension_from_twist,
    perturb,
    quillen_table,
    twist_space,
    validate_extension,
    vanishing_liftings,
)
from ucr.resolution import (
    build_resolution,
    cogenerator_object,
    extract_cw_basis,
    forget_basis_seeds,
    psi_map,
    verify_resolution,
)
from ucr.steenrod import SteenrodElement, adem_reduce, admissible_basis


def _record(num, budget, fn):
    start = perf_counter()
    try:
        detail = fn()
        ok = True
    except AssertionError as exc:
        detail, ok = f"assertion failed: {exc}", False
    seconds = perf_counter() - start
    if ok and seconds >= budget:
        ok, detail = False, f"over budget; {detail}"
    ACCEPTANCE[num] = (ok, seconds, budget, detail)
    print(acceptance_line(num))
    assert ok, acceptance_line(num)


# 1 --------------------------------------------------------------------------------

def _steenrod():
    counts = [len(admissible_basis(d)) for d in range(8)]
    assert counts == [1, 1, 1, 2, 2, 2, 3, 4], counts
    assert adem_reduce((1, 1)) == frozenset()
    assert adem_reduce((2, 2)) == frozenset({(3, 1)})
    rng = random.Random(1)
    pairs = 0
    while pairs < 1000:
        u = tuple(rng.randint(1, 8) for _ in range(rng.randint(1, 4)))
        v = tuple(rng.randint(1, 8) for _ in range(rng.randint(1, 4)))
        if sum(u) + sum(v) > 20:
            continue
        assert SteenrodElement.of(*u) * SteenrodElement.of(*v) == SteenrodElement.of(*(u + v)), (u, v)
        pairs += 1
    return "admissible counts 1,1,1,2,2,2,3,4; Sq1Sq1 = 0; Sq2Sq2 = Sq3Sq1; 1000 products agree"


def test_criterion_1_steenrod_arithmetic():
    _record(1, 5, _steenrod)


# 2 --------------------------------------------------------------------------------

def _cofree():
    out = []
    for fld, expected in ((Field.F2, [1, 0, 1, 1, 1, 2, 2]), (Field.Q, [1, 0, 1, 0, 1, 0, 1])):
        G, _ = cofree_coalgebra(GradedSpace.from_degrees(fld, 6, [("i2", 2)]), 6)
        assert list(G.space.dims()) == expected, (fld, G.space.dims())
        rep = validate(G)
        assert rep.ok, [c.name for c in rep.failures()]
        names = {c.name for c in rep.checks}
        if fld is Field.F2:
            assert {"cartan", "verschiebung"} <= names
        out.append(f"{fld.value} {tuple(expected)}")
    return "G(ι₂) dims " + ", ".join(out) + "; full validation passes"


def test_criterion_2_cofree_dimensions():
    _record(2, 5, _cofree)


# 3 --------------------------------------------------------------------------------

def _normalization():
    rng = random.Random(3)
    compared = 0
    for _ in range(500):
        X = random_module_object(rng, D=3, max_total=40)
        assert sum(X.space(n).total_dim for n in range(4)) <= 40
        assert check_identities(X).ok
        for n in range(4):
            phi, inv = normalization(X, n)  # raises unless every degree block is invertible
            assert compose(inv, phi) == identity(phi.source)
        cx = moore_complex(X)
        for n in range(3):
            assert list(cohomotopy(X, n).dims()) == cx.cohomology_dims(n)
            compared += 1
    return f"500 objects; Φ invertible everywhere; {compared} cohomotopy/Moore comparisons agree"


def test_criterion_3_normalization_oracle():
    _record(3, 60, _normalization)


# 4 --------------------------------------------------------------------------------

_RESOLUTIONS = {}


def _resolutions():
    for name, make in COALGEBRAS.items():
        res = build_resolution(make(8), 3, 8, "gu")
        rep = verify_resolution(res)
        assert rep.ok, (name, [c.witness for c in rep.failures()])
        assert all(not any(row) for row in rep.pi_table), (name, rep.pi_table)
        _RESOLUTIONS[name] = res
    return "ground, S², RP², trivial(2,4): π⁰ ≅ K and π¹ = π² = 0 through degree 8"


def test_criterion_4_resolution_correctness():
    _record(4, 120, _resolutions)


# 5 --------------------------------------------------------------------------------

def _round_trip():
    rng = random.Random(5)
    for name, make in COALGEBRAS.items():
        res = _RESOLUTIONS.get(name) or build_resolution(make(8), 3, 8, "gu")
        X = cogenerator_object(res)
        for n in range(1, 4):
            psi_map(X, n)
        got = extract_cw_basis(X, forget_basis_seeds(X, rng))
        for b, want in zip(got, res.fresh_dims()):
            assert b.dims() + [0] * (len(want) - len(b.dims())) == list(want), (name, b.level)
    for _ in range(500):
        X = random_module_object(rng, scramble=False)
        want = [[sum(1 for (_, k, _) in X.tags[n][d] if k == n) for d in range(X.space(n).trunc + 1)]
                for n in range(X.D + 1)]
        Y = conjugate(X, rng) if rng.random() < 0.5 else X  # a basis change keeps the fresh dims
        for n in range(1, Y.D + 1):
            psi_map(Y, n)
        for b in extract_cw_basis(Y, forget_basis_seeds(Y, rng)):
            assert b.dims() + [0] * (len(want[b.level]) - len(b.dims())) == want[b.level]
    return "4 builder outputs and 500 random cofree objects: dims recovered, sʲψⁿ = sʲ"


def test_criterion_5_cw_round_trip():
    _record(5, 60, _round_trip)


# 6 --------------------------------------------------------------------------------

def _invariance():
    for name, make in COALGEBRAS.items():
        K = make(8)
        tabs = [quillen_table(K, res=build_resolution(K, 3, 8, st), with_representatives=False)
                for st in ("gu", "padded")]
        for t in (1, 2):
            assert tabs[0][t].dims == tabs[1][t].dims, (name, t)
    pairs = [([2], 1), ([1], 2), ([2, 3], 1)]
    for degrees, t in pairs:
        G, _ = cofree_coalgebra(GradedSpace.from_degrees(Field.F2, 6, [(f"a{d}", d) for d in degrees]), 6)
        tab = cohomology(G, suspension_comodule(G, t, trunc=6), s_max=2, N=6)
        assert not any(tab.dims[1]) and not any(tab.dims[2]), (degrees, t)
    return "GU and padded agree for 4 coalgebras, s ≤ 2, t ≤ 2, degrees ≤ 8; H^{1,2}(G(V); ΣᵗG(V)) = 0 on 3 pairs"


def test_criterion_6_quillen_invariance():
    _record(6, 120, _invariance)


# 7 --------------------------------------------------------------------------------

def _obstructions():
    rng = random.Random(7)
    counts = {"instances": 0, "nonzero": 0, "perturbations": 0, "comparisons": 0}
    micro = [("ground", ground(trunc=5)), ("s2", sphere(2, trunc=5)), ("rp2", rp2(5)),
             ("triv24", trivial_coalgebra([2, 4], trunc=5)), ("dp2", divided_power(2, trunc=5))]
    for name, K in micro:
        res = build_resolution(K, 4, 5)
        cc = CofreeComplex(res, 3)
        split = extension_from_twist(cc, 1)
        assert characteristic_cocycle(split).is_zero_class, name  # (a)
        space = twist_space(cc, 1)
        for bits in itertools.product((0, 1), repeat=len(space)):
            tw = [sum(b * x for b, x in zip(bits, col)) % 2 for col in zip(*space)] if space else None
            ext = extension_from_twist(cc, 1, tw)
            assert validate_extension(ext).ok
            cx = QuillenComplex(res, ext.M)
            r = characteristic_cocycle(ext, cx=cx)
            assert r.is_zero_class == brute_force_characteristic(ext), (name, bits)  # (b)
            counts["instances"] += 1
            counts["nonzero"] += not r.is_zero_class
            lam0 = auto_lifting(ext)
            for _ in range(50):  # (c)
                lam = perturb(ext, lam0, rng.getrandbits(len(cx.coords[2])), cx)
                r2 = characteristic_cocycle(ext, lam, cx)
                assert r2.is_zero_class == r.is_zero_class
                assert cx.is_coboundary(3, r.cochain ^ r2.cochain)[0]
                counts["perturbations"] += 1
            lifts = vanishing_liftings(ext)
            for a in lifts:  # (d)
                assert difference_cocycle(ext, a, a, cx).is_zero_class
                for b in lifts:
                    d = difference_cocycle(ext, a, b, cx)
                    assert d.is_zero_class == brute_force_difference(ext, a, b)
                    if d.is_zero_class:
                        extension_comparison(ext, a, b, d.witness, cx)
                        counts["comparisons"] += 1
    assert counts["nonzero"] > 0
    return (f"{counts['instances']} extensions ({counts['nonzero']} with nonzero class) match brute force; "
            f"{counts['perturbations']} perturbations invariant; {counts['comparisons']} comparisons verified")


def test_criterion_7_obstruction_calculus():
    _record(7, 60, _obstructions)


# 8 --------------------------------------------------------------------------------

def _cli():
    for name, args in CASES.items():
        first, second = run_cli(*args, seed=1), run_cli(*args, seed=2)
        assert first.returncode == 0 and second.returncode == 0, (name, first.stderr)
        b1 = body(first.stdout)
        assert canonical_json(b1) == canonical_json(body(second.stdout)), name
        assert b1 == json.loads((GOLDEN / f"{name}.json").read_text(encoding="utf-8")), name
    seen = set()
    for code, args in FAULTS:
        p = run_cli(*args)
        assert p.returncode == code, (args, p.returncode)
        seen.add(code)
    assert seen == {1, 2, 3}
    return f"{len(CASES)} golden reports byte-identical across runs; exit codes 1/2/3 on {len(FAULTS)} faults"


def test_criterion_8_cli_contract():
    _record(8, 30, _cli)


if __name__ == "__main__":
    failed = 0
    for num, fn in enumerate([test_criterion_1_steenrod_arithmetic, test_criterion_2_cofree_dimensions,
                              test_criterion_3_normalization_oracle, test_criterion_4_resolution_correctness,
                              test_criterion_5_cw_round_trip, test_criterion_6_quillen_invariance,
                              test_criterion_7_obstruction_calculus, test_criterion_8_cli_contract], 1):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)

"""Acceptance criteria 1 to 8, one pass/fail line each.

The lines are printed in the pytest terminal summary (see conftest.py) and
when this file is run directly with ``python3 tests/test_acceptance.py``.
"""
import os
import tempfile
import time
from dataclasses import replace


from relsteinberg.chevalley import verify_dl, verify_relative_dl
from relsteinberg.cli import PRESETS, RunConfig, run
from relsteinberg.oddform import check_axioms, check_family, identity_crossed
from relsteinberg.pairs import FF, admissible_crossed_pair, crossed_ofasymp, ofaorth, ofasymp
from relsteinberg.rings import FiniteRing
from relsteinberg.rootsys import RootSystem, saturated_special_subsets
from relsteinberg.steinberg import Context, lemma_form_pres, lemma_ring_pres, product_injectivity, verify

RESULTS: dict[int, str] = {}
CAP = 10**7
SAMPLE_FLOOR = 10**5


def _ff(n):
    return FF(FiniteRing.zmod(n))


def _line(k, title, ok, detail):
    RESULTS[k] = f"criterion {k} ({title}): {'PASS' if ok else 'FAIL'}  [{detail}]"
    return ok


def _exhaustive(rep, skip="[general]"):
    return all(it.mode == "exhaustive" for it in rep.items if skip not in it.name)


def test_criterion_1_axiom_suites():
    cases = [("ofasymp", 2, 2), ("ofasymp", 3, 2), ("ofasymp", 3, 3), ("ofaorth", 1, 2), ("ofaorth", 2, 2)]
    ok, notes = True, []
    for build, ell, n in cases:
        t = time.perf_counter()
        r = (ofasymp if build == "ofasymp" else ofaorth)(ell, _ff(n))
        ax, fam = check_axioms(r, budget=CAP), check_family(r)
        dt = time.perf_counter() - t
        good = ax.ok and fam.ok and _exhaustive(ax) and _exhaustive(fam) and dt <= 60
        ok &= good
        notes.append(f"{build}(ℓ={ell};Z/{n}) {ax.instances + fam.instances} inst {dt:.1f}s")
    assert _line(1, "axiom suites", ok, "; ".join(notes))


def test_criterion_2_unrelativized_presentation():
    cases = [("ofasymp", 3, 2), ("ofasymp", 3, 3), ("ofaorth", 2, 2), ("ofaorth", 3, 2)]
    ok, notes = True, []
    for build, ell, n in cases:
        ctx = Context(ofr=(ofasymp if build == "ofasymp" else ofaorth)(ell, _ff(n)))
        rep = verify(ctx, "unrel", budget=CAP, seed=0)
        fams = len(rep.items)
        good = rep.ok and (fams == 10 if ell == 3 else fams >= 9)
        ok &= good
        notes.append(f"{build}(ℓ={ell};Z/{n}) {fams} families {rep.instances} inst")
    assert _line(2, "unrelativized presentation", ok, "; ".join(notes))


def test_criterion_3_relative_presentation():
    mods = [("(2Z/4,0)", crossed_ofasymp(admissible_crossed_pair(_ff(4), [2], [0]), 3)),
            ("(2Z/4,2Z/4)", crossed_ofasymp(admissible_crossed_pair(_ff(4), [2], [2]), 3)),
            ("identity Z/2", identity_crossed(ofasymp(3, _ff(2))))]
    ok, notes = True, []
    for name, cm in mods:
        rep = verify(Context(cm=cm), "presentation", budget=CAP, seed=0)
        covered = all(it.mode == "exhaustive" or it.instances >= SAMPLE_FLOOR for it in rep.items)
        ok &= rep.ok and covered
        notes.append(f"{name} {rep.instances} inst {'exhaustive' if _exhaustive(rep) else 'sampled'}")
    assert _line(3, "relative presentation", ok, "; ".join(notes))


def test_criterion_4_lemma_suites():
    r3 = ofasymp(3, _ff(2))
    ring, form = lemma_ring_pres(r3), lemma_form_pres(r3)
    ctx = Context(ofr=ofasymp(2, _ff(2)))
    subsets = saturated_special_subsets(RootSystem("BC", 2))
    inj = [product_injectivity(ctx, s) for s in subsets]
    ok = ring.ok and form.ok and all(r.ok for r in inj)
    assert _line(4, "lemma suites", ok, f"ring-pres {ring.instances}, form-pres {form.instances}, "
                 f"injectivity {sum(r.ok for r in inj)}/{len(subsets)} Σ of BC2")


def test_criterion_5_doubly_laced():
    b3 = verify_dl(RootSystem("B", 3), _ff(2), budget=0)
    c3 = verify_dl(RootSystem("C", 3), _ff(3), budget=0)
    incons = (b3.meta["sign_inconsistencies"], c3.meta["sign_inconsistencies"])
    ok = b3.ok and c3.ok and _exhaustive(b3) and _exhaustive(c3) and incons == (0, 0)
    assert _line(5, "doubly laced", ok, f"B3/Z2 {b3.instances} inst, C3/Z3 {c3.instances} inst, "
                 f"sign inconsistencies {incons}")


def test_criterion_6_f4_dispatch():
    cp = admissible_crossed_pair(_ff(4), [2], [2])
    try:
        rep, records = verify_relative_dl(RootSystem("F", 4), cp, budget=5000, seed=0)
    except Exception as exc:  # the classifier-gap error must never fire
        _line(6, "F4 dispatch", False, f"{type(exc).__name__}: {exc}")
        raise
    cats = rep.meta["categories"]
    allowed = {"rank≤2", "A1xA2", "B3", "C3"}
    classified = sum(cats.values()) == rep.instances and set(cats) <= allowed
    ok = rep.ok and classified and set(cats) == allowed
    assert _line(6, "F4 dispatch", ok, f"{rep.instances} inst, categories {dict(sorted(cats.items()))}")


FAULT_CONFIGS = [
    RunConfig(name="faults-Z3", construction="ofasymp", rank=3, modulus=3, admissible=((1,), (1,)),
              suites=("axioms", "family", "crossed", "unrel", "presentation", "dl", "relative-dl", "lemmas"),
              budget=3000, fault="planted"),
    RunConfig(name="faults-Z3-injectivity", construction="ofasymp", rank=2, modulus=3,
              suites=("injectivity",), budget=0, fault="planted"),
]


def test_criterion_7_fault_injection():
    import json

    detected = {}
    with tempfile.TemporaryDirectory() as d:
        for cfg in FAULT_CONFIGS:
            out = os.path.join(d, cfg.name)
            with open(os.devnull, "w") as sink:
                status = run(replace(cfg, out=out), stream=sink)
            assert status == 1
            for s in cfg.suites:
                with open(os.path.join(out, f"{s}.jsonl"), encoding="utf-8") as fh:
                    rows = [json.loads(line) for line in fh]
                detected[s] = any(r["failures"] and r["witnesses"] for r in rows)
    ok = len(detected) == 9 and all(detected.values())
    assert _line(7, "fault injection", ok,
                 ", ".join(f"{s} {'caught' if v else 'MISSED'}" for s, v in detected.items()) + " (Z/3)")


def _snapshot(cfg, workers, root):
    out = os.path.join(root, f"{cfg.name}-w{workers}")
    with open(os.devnull, "w") as sink:
        run(replace(cfg, out=out, workers=workers), stream=sink)
    return {f: open(os.path.join(out, f), "rb").read() for f in sorted(os.listdir(out))}


def test_criterion_8_determinism():
    cfgs = [PRESETS["B2-smoke"], replace(PRESETS["C3-Z4-admissible-b0"], budget=1000)]
    notes, ok = [], True
    with tempfile.TemporaryDirectory() as d:
        for cfg in cfgs:
            same = _snapshot(cfg, 1, d) == _snapshot(cfg, 2, d)
            ok &= same
            notes.append(f"{cfg.name} workers 1 vs 2 {'identical' if same else 'DIFFER'}")
    assert _line(8, "determinism", ok, "; ".join(notes))


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    for t in tests:
        try:
            t()
        except Exception as exc:  # report and continue
            print(f"{t.__name__}: error {exc!r}")
    for k in sorted(RESULTS):
        print(RESULTS[k])

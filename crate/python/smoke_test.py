#!/usr/bin/env python3
"""Smoke test for the lexitag_py extension module.

Builds the cdylib if needed, imports it, and exercises every exposed
function and class. Exits non-zero on the first failure.

Usage: python3 python/smoke_test.py
"""
import json
import math
import shutil
import subprocess
import sys
import sysconfig
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_module() -> Path:
    subprocess.run(
        ["cargo", "build", "-p", "lexitag-py", "--release"],
        cwd=ROOT,
        check=True,
    )
    built = ROOT / "target" / "release" / "liblexitag_py.so"
    ext_suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    dest = ROOT / "target" / "release" / f"lexitag_py{ext_suffix}"
    shutil.copyfile(built, dest)
    return dest.parent


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    sys.path.insert(0, str(build_module()))
    import lexitag_py as lt

    # tokenize / canonicalize
    assert lt.tokenize("The Court's RULING, 2024!") == ["the", "court", "s", "ruling", "2024"]
    assert lt.canonicalize_label("  Tax   LAW ") == "tax law"
    try:
        lt.canonicalize_label("   ")
        raise AssertionError("empty label should raise")
    except ValueError:
        pass

    # label_sequence sorts and joins canonically
    assert lt.label_sequence(["Tax Law", "civil  law"]) == "civil law, tax law"

    # parse_generation: known, unknown, duplicates
    labels, unknown, duplicates = lt.parse_generation(
        "Labels: tax law, TAX LAW; maritime law", ["tax law", "civil law"]
    )
    assert labels == ["tax law"]
    assert unknown == ["maritime law"]
    assert duplicates == 1
    try:
        lt.parse_generation("maritime law", ["tax law"], strict=True)
        raise AssertionError("strict parse should raise on unknown label")
    except ValueError:
        pass

    # evaluate: hand-checked confusion case, micro = macro = 2/3
    gold = {"d1": ["a", "b"], "d2": ["c"]}
    pred = {"d1": ["a"], "d2": ["b", "c"]}
    micro, macro = lt.evaluate(gold, pred)
    approx(micro, 2 / 3, 1e-12)
    approx(macro, 2 / 3, 1e-12)
    perfect = lt.evaluate(gold, gold)
    approx(perfect[0], 1.0, 0)
    approx(perfect[1], 1.0, 0)

    # fixture generator is deterministic valid JSONL
    fixture = lt.make_fixture(20, 3, 7)
    assert fixture == lt.make_fixture(20, 3, 7)
    records = [json.loads(line) for line in fixture.splitlines()]
    assert len(records) == 20
    assert all(r["labels"] for r in records)

    # Tfidf: unit-norm vectors, cosine identity, JSON round trip
    docs = [lt.tokenize(t) for t in ("tax law ruling", "civil law appeal", "tax audit")]
    tfidf = lt.Tfidf(docs)
    assert tfidf.n_docs() == 3 and tfidf.n_terms() == 6
    vec = tfidf.transform(lt.tokenize("tax law"))
    approx(math.sqrt(sum(v * v for _, v in vec)), 1.0, 1e-12)
    approx(tfidf.cosine(docs[0], docs[0]), 1.0, 1e-12)
    assert tfidf.transform(lt.tokenize("quantum")) == []
    restored = lt.Tfidf.from_json(tfidf.to_json())
    assert restored.transform(docs[1]) == tfidf.transform(docs[1])

    # Bm25: single-doc closed form ln(4/3)
    bm25 = lt.Bm25([["law"]])
    approx(bm25.score(["law"], 0), math.log(4 / 3), 1e-9)
    assert bm25.score(["unseen"], 0) == 0.0
    try:
        bm25.score(["law"], 5)
        raise AssertionError("out-of-range doc id should raise")
    except ValueError:
        pass

    print("smoke test passed: all lexitag_py bindings behave as expected")


if __name__ == "__main__":
    main()

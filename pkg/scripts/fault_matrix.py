"""Plant one fault per suite and record whether it is detected, over Z/2 and Z/3.

Sign faults are invisible in characteristic 2; the table makes that visible.
"""
import argparse
import json
import os
import tempfile
from dataclasses import replace

from relsteinberg.cli import RunConfig, run

SUITES = ("axioms", "family", "crossed", "unrel", "presentation", "dl", "relative-dl", "lemmas")


def detect(cfg: RunConfig, root: str) -> dict:
    out = os.path.join(root, cfg.name)
    with open(os.devnull, "w") as sink:
        run(replace(cfg, out=out), stream=sink)
    res = {}
    for s in cfg.suites:
        with open(os.path.join(out, f"{s}.jsonl"), encoding="utf-8") as fh:
            res[s] = any(json.loads(line)["failures"] for line in fh)
    return res


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--budget", type=int, default=2000)
    args = ap.parse_args()
    table = {}
    with tempfile.TemporaryDirectory() as d:
        for n in (2, 3):
            base = RunConfig(name=f"Z{n}", construction="ofasymp", rank=3, modulus=n, admissible=((1,), (1,)),
                             suites=SUITES, budget=args.budget, fault="planted")
            table[n] = detect(base, d)
            inj = RunConfig(name=f"Z{n}-inj", rank=2, modulus=n, suites=("injectivity",), budget=0,
                            fault="planted")
            table[n].update(detect(inj, d))
    print(f"{'suite':14s} {'Z/2':>8s} {'Z/3':>8s}")
    for s in table[3]:
        print(f"{s:14s} {('caught' if table[2][s] else 'missed'):>8s} {('caught' if table[3][s] else 'missed'):>8s}")


if __name__ == "__main__":
    main()

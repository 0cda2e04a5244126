"""Dump derived structure constant tables and the oracle sign calibration."""
import argparse
import json
import os

from relsteinberg.chevalley import Dispatcher, PairOps, derive_structure_constants
from relsteinberg.pairs import FF
from relsteinberg.rings import FiniteRing
from relsteinberg.rootsys import RootSystem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--systems", default="B2,C2,B3,C3,F4")
    ap.add_argument("--out", default="results/structure_constants")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    pair = FF(FiniteRing.zmod(3))
    for name in args.systems.split(","):
        phi = RootSystem(name[0], int(name[1:]))
        sc = derive_structure_constants(phi)
        with open(os.path.join(args.out, f"{name}.json"), "w", encoding="utf-8") as fh:
            json.dump({"convention": sc.convention, "table": sc.table()}, fh, indent=1)
        line = f"{name}: {len(sc.N)} nonzero N, {len(sc.extraspecial)} extraspecial pairs"
        if phi.kind in "BC" and phi.rank >= 2:
            p = pair.as_B() if phi.kind == "B" else pair.as_C()
            disp = Dispatcher(phi, sc, PairOps(p), pair=p)
            line += f", oracle {disp._global.name} sign inconsistencies {disp._global.inconsistencies}"
        print(line)


if __name__ == "__main__":
    main()

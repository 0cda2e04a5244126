"""F4 relative run: instances per (family, dispatch category) and the oracle used."""
import argparse
import collections

from relsteinberg.chevalley import verify_relative_dl
from relsteinberg.pairs import FF, admissible_crossed_pair
from relsteinberg.rings import FiniteRing
from relsteinberg.rootsys import RootSystem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--budget", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--lifts", type=int, default=4)
    ap.add_argument("--jsonl", default=None)
    args = ap.parse_args()
    cp = admissible_crossed_pair(FF(FiniteRing.zmod(4)), [2], [2])
    rep, records = verify_relative_dl(RootSystem("F", 4), cp, budget=args.budget, seed=args.seed,
                                      workers=args.workers, lifts=args.lifts, jsonl=args.jsonl)
    print(rep.summary())
    grid = collections.Counter()
    oracles = collections.Counter()
    for r in records:
        grid[r["family"], r["category"]] += r["instances"]
        oracles[r["oracle"]] += r["instances"]
    cats = sorted({c for _, c in grid})
    fams = list(dict.fromkeys(f for f, _ in grid))
    print("\n" + f"{'family':16s}" + "".join(f"{c:>10s}" for c in cats))
    for f in fams:
        print(f"{f:16s}" + "".join(f"{grid[f, c]:>10d}" for c in cats))
    print("\noracles:")
    for o, n in oracles.most_common():
        print(f"  {n:>8d}  {o}")


if __name__ == "__main__":
    main()

"""The presentation suite at rank 4, where the four-index family Comm 1 is not vacuous."""
import argparse

from relsteinberg.oddform import identity_crossed
from relsteinberg.pairs import FF, ofasymp
from relsteinberg.rings import FiniteRing
from relsteinberg.steinberg import Context, verify


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--modulus", type=int, default=3)
    ap.add_argument("--budget", type=int, default=20000)
    ap.add_argument("--families", default="Comm 1,Comm 2")
    args = ap.parse_args()
    ctx = Context(cm=identity_crossed(ofasymp(4, FF(FiniteRing.zmod(args.modulus)))))
    rep = verify(ctx, "presentation", budget=args.budget, families=args.families.split(","))
    print(rep.summary())


if __name__ == "__main__":
    main()

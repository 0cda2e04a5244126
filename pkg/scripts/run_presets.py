"""Run built-in presets and tabulate outcome, instance counts and wall time."""
import argparse
import json
import os
import time
from dataclasses import replace

from relsteinberg.cli import PRESETS, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("presets", nargs="*", default=sorted(PRESETS))
    ap.add_argument("--out", default="results/presets")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--budget", type=int)
    args = ap.parse_args()
    rows = []
    for name in args.presets:
        cfg = replace(PRESETS[name], out=os.path.join(args.out, name), workers=args.workers)
        if args.budget is not None:
            cfg = replace(cfg, budget=args.budget)
        t = time.perf_counter()
        status = run(cfg)
        dt = time.perf_counter() - t
        with open(os.path.join(cfg.out, "summary.json"), encoding="utf-8") as fh:
            summary = json.load(fh)
        inst = sum(s["instances"] for s in summary["suites"].values())
        rows.append((name, "PASS" if status == 0 else "FAIL", inst, dt))
    print(f"\n{'preset':24s} {'status':6s} {'instances':>10s} {'seconds':>8s}")
    for r in rows:
        print(f"{r[0]:24s} {r[1]:6s} {r[2]:>10d} {r[3]:>8.1f}")


if __name__ == "__main__":
    main()

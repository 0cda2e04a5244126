"""Command line entry point: presets, declarative run configs, suite runner.

A run config is a line-based text file, one ``key value`` statement per line::

    # symplectic rank 3 over Z/4 with the admissible pair (2Z/4, 2Z/4)
    construction ofasymp
    rank 3
    pair FF K=Z/4
    admissible a=[2] b=[2]
    suites crossed,presentation,relative-dl
    budget 100000
    seed 0

``pair`` also accepts ``type=B|C|F K=Z/n`` (the pair (K, K) seen as that type).
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .report import Report, stable_hash

SUITE_NAMES = ("axioms", "family", "crossed", "unrel", "presentation", "dl", "relative-dl",
               "injectivity", "lemmas")
CONSTRUCTIONS = ("ofasymp", "ofaorth", "chevalley")
FAULTS = ("none", "planted", "relations", "rho", "family", "crossed-d", "pair-d", "sign", "drop-factor")
# the fault each suite receives under ``fault planted``
PLANTED = {"axioms": "rho", "family": "family", "crossed": "crossed-d", "unrel": "relations",
           "presentation": "relations", "dl": "sign", "relative-dl": "sign",
           "injectivity": "drop-factor", "lemmas": "rho"}


class ConfigError(ValueError):
    """A config that does not parse or does not validate."""


class ConstructionError(RuntimeError):
    """A construction that fails one of its defining axioms."""


@dataclass(frozen=True)
class RunConfig:
    construction: str = "ofasymp"
    rank: int = 2
    pair: str = "FF"
    modulus: int = 2
    root_kind: str | None = None
    admissible: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    suites: tuple[str, ...] = ("axioms", "family", "unrel")
    budget: int = 10**5
    seed: int = 0
    fault: str = "none"
    format: str = "json"
    out: str | None = None
    workers: int = 1
    name: str = "custom"

    @property
    def kind(self) -> str:
        """Root system letter: C for symplectic, B for orthogonal, else explicit."""
        if self.root_kind:
            return self.root_kind
        return "B" if self.construction == "ofaorth" else "C"

    def validate(self) -> "RunConfig":
        if self.construction not in CONSTRUCTIONS:
            raise ConfigError(f"unknown construction {self.construction!r}; expected one of {CONSTRUCTIONS}")
        if self.pair not in ("FF", "B", "C", "F"):
            raise ConfigError(f"unknown pair type {self.pair!r}")
        if self.modulus < 2:
            raise ConfigError(f"modulus must be ≥ 2, got {self.modulus}")
        if self.rank < 1:
            raise ConfigError(f"rank must be ≥ 1, got {self.rank}")
        if self.kind not in ("B", "C", "F"):
            raise ConfigError(f"root system {self.kind!r} is not doubly laced")
        if self.kind == "F" and self.rank != 4:
            raise ConfigError("F needs rank 4")
        bad = [s for s in self.suites if s not in SUITE_NAMES]
        if bad:
            raise ConfigError(f"unknown suite(s) {bad}; expected a subset of {SUITE_NAMES}")
        if "relative-dl" in self.suites and self.admissible is None:
            raise ConfigError("suite relative-dl needs a crossed pair (add an 'admissible' line)")
        if self.kind == "F" and set(self.suites) - {"dl", "relative-dl"}:
            raise ConfigError("F4 runs only the dl / relative-dl suites")
        if self.fault not in FAULTS:
            raise ConfigError(f"unknown fault {self.fault!r}; expected one of {FAULTS}")
        if self.format not in ("json", "text"):
            raise ConfigError(f"format must be json or text, got {self.format!r}")
        if self.budget < 0 or self.workers < 1:
            raise ConfigError("budget must be ≥ 0 and workers ≥ 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        return self

    # -- text form ----------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"name {self.name}", f"construction {self.construction}", f"rank {self.rank}"]
        if self.root_kind:
            lines.append(f"root {self.root_kind}")
        lines.append(f"pair FF K=Z/{self.modulus}" if self.pair == "FF"
                     else f"pair type={self.pair} K=Z/{self.modulus}")
        if self.admissible is not None:
            a, b = self.admissible
            lines.append(f"admissible a={list(a)} b={list(b)}")
        lines += [f"suites {','.join(self.suites)}", f"budget {self.budget}", f"seed {self.seed}",
                  f"fault {self.fault}", f"format {self.format}"]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        kw: dict = {}
        for no, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, rest = line.partition(" ")
            rest = rest.strip()
            try:
                kw.update(_STATEMENTS[key](rest))
            except KeyError:
                raise ConfigError(f"line {no}: unknown statement {key!r}: {raw.strip()}") from None
            except (ValueError, SyntaxError) as exc:
                raise ConfigError(f"line {no}: {exc}: {raw.strip()}") from None
        return cls(**kw).validate()


def _ints(s: str) -> tuple[int, ...]:
    m = re.fullmatch(r"\[\s*(-?\d+(\s*,\s*-?\d+)*)?\s*\]", s)
    if not m:
        raise ValueError(f"expected an integer list like [2], got {s!r}")
    return tuple(json.loads(s))


def _kv(rest: str) -> tuple[list[str], dict[str, str]]:
    pos, kv = [], {}
    for tok in re.findall(r"\S+=\[[^\]]*\]|\S+", rest):
        if "=" in tok:
            k, v = tok.split("=", 1)
            kv[k] = v
        else:
            pos.append(tok)
    return pos, kv


def _modulus(s: str) -> int:
    m = re.fullmatch(r"Z/(\d+)", s)
    if not m:
        raise ValueError(f"expected a ring Z/n, got {s!r}")
    return int(m.group(1))


def _pair(rest: str) -> dict:
    pos, kv = _kv(rest)
    unknown = set(kv) - {"type", "K", "L"}
    if unknown:
        raise ValueError(f"unsupported pair field(s) {sorted(unknown)}; only (K, K) pairs are built in")
    if "K" not in kv:
        raise ValueError("pair needs K=Z/n")
    n = _modulus(kv["K"])
    if "L" in kv and _modulus(kv["L"]) != n:
        raise ValueError("only pairs with L = K are built in")
    if pos == ["FF"] and "type" not in kv:
        return {"pair": "FF", "modulus": n}
    if pos or kv.get("type") not in ("B", "C", "F"):
        raise ValueError("pair is 'FF K=Z/n' or 'type=B|C|F K=Z/n'")
    return {"pair": kv["type"], "modulus": n}


def _admissible(rest: str) -> dict:
    pos, kv = _kv(rest)
    if pos or set(kv) != {"a", "b"}:
        raise ValueError("admissible needs exactly a=[..] b=[..]")
    return {"admissible": (_ints(kv["a"]), _ints(kv["b"]))}


def _int(key: str) -> Callable[[str], dict]:
    def parse(rest: str) -> dict:
        if not re.fullmatch(r"\d+", rest):
            raise ValueError(f"{key} must be a non-negative integer")
        return {key: int(rest)}
    return parse


_STATEMENTS: dict[str, Callable[[str], dict]] = {
    "name": lambda r: {"name": r},
    "construction": lambda r: {"construction": r},
    "rank": _int("rank"),
    "root": lambda r: {"root_kind": r},
    "pair": _pair,
    "admissible": _admissible,
    "suites": lambda r: {"suites": tuple(s for s in r.replace(" ", "").split(",") if s)},
    "budget": _int("budget"),
    "seed": _int("seed"),
    "workers": _int("workers"),
    "fault": lambda r: {"fault": r},
    "format": lambda r: {"format": r},
}


PRESETS: dict[str, RunConfig] = {
    p.name: p for p in (
        RunConfig(name="B2-smoke", construction="ofaorth", rank=2, modulus=2,
                  suites=("axioms", "family", "unrel", "dl", "injectivity"), budget=10**5),
        RunConfig(name="C3-Z2", construction="ofasymp", rank=3, modulus=2,
                  suites=("axioms", "family", "crossed", "unrel", "presentation", "dl", "lemmas"),
                  budget=10**7),
        RunConfig(name="C3-Z3", construction="ofasymp", rank=3, modulus=3,
                  suites=("axioms", "family", "unrel", "dl"), budget=10**6),
        RunConfig(name="B3-Z2", construction="ofaorth", rank=3, modulus=2,
                  suites=("family", "unrel", "dl"), budget=10**6),
        RunConfig(name="C3-Z4-admissible-b0", construction="ofasymp", rank=3, modulus=4,
                  admissible=((2,), (0,)), suites=("crossed", "presentation", "relative-dl"),
                  budget=10**5),
        RunConfig(name="C3-Z4-admissible-b2", construction="ofasymp", rank=3, modulus=4,
                  admissible=((2,), (2,)), suites=("crossed", "presentation", "relative-dl"),
                  budget=10**5),
        RunConfig(name="F4-Z4-admissible", construction="chevalley", rank=4, modulus=4, root_kind="F",
                  admissible=((2,), (2,)), suites=("relative-dl",), budget=2 * 10**4),
    )
}


def list_presets() -> str:
    rows = []
    for p in PRESETS.values():
        extra = f" admissible a={list(p.admissible[0])} b={list(p.admissible[1])}" if p.admissible else ""
        rows.append(f"{p.name:22s} {p.construction} {p.kind}{p.rank} over Z/{p.modulus}{extra}; "
                    f"suites {','.join(p.suites)}")
    return "\n".join(rows)


# -- instance assembly ------------------------------------------------------

class Instance:
    """Lazily built objects a config refers to."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._memo: dict = {}

    def _get(self, key, build):
        if key not in self._memo:
            self._memo[key] = build()
        return self._memo[key]

    @property
    def pair(self):
        def build():
            from .pairs import FF, check_pair, corrupt_pair_d
            from .rings import FiniteRing
            p = FF(FiniteRing.zmod(self.cfg.modulus))
            if self.cfg.pair == "B":
                p = p.as_B()
            elif self.cfg.pair == "C":
                p = p.as_C()
            if self.cfg.fault == "pair-d":
                p = corrupt_pair_d(p)
            rep = check_pair(p)
            if not rep.ok and self.cfg.fault != "pair-d":
                raise ConstructionError(f"pair {p.name} fails axiom(s) {rep.failed_names()}")
            return p
        return self._get("pair", build)

    @property
    def crossed_pair(self):
        def build():
            from .pairs import FF, admissible_crossed_pair
            from .rings import FiniteRing
            a, b = self.cfg.admissible
            try:
                return admissible_crossed_pair(FF(FiniteRing.zmod(self.cfg.modulus)), a, b)
            except ValueError as exc:
                raise ConstructionError(f"crossed pair a={list(a)} b={list(b)}: {exc}") from None
        return self._get("cp", build)

    @property
    def phi(self):
        from .rootsys import RootSystem
        return self._get("phi", lambda: RootSystem(self.cfg.kind, self.cfg.rank))

    @property
    def ofr(self):
        def build():
            from .oddform import corrupt_rho
            from .pairs import ofaorth, ofasymp
            r = (ofaorth if self.cfg.construction == "ofaorth" else ofasymp)(self.cfg.rank, self.pair)
            return corrupt_rho(r) if self.cfg.fault == "rho" else r
        return self._get("ofr", build)

    @property
    def crossed_module(self):
        def build():
            from .oddform import identity_crossed
            from .pairs import crossed_ofaorth, crossed_ofasymp
            if self.cfg.admissible is None:
                return identity_crossed(self.ofr)
            f = crossed_ofaorth if self.cfg.construction == "ofaorth" else crossed_ofasymp
            return f(self.crossed_pair, self.cfg.rank)
        cm = self._get("cm", build)
        if self.cfg.fault == "crossed-d":
            from .oddform import corrupt_crossed_d
            return self._get("cm-fault", lambda: corrupt_crossed_d(cm))
        return cm

    @property
    def context(self):
        from .steinberg import Context
        return self._get("ctx", lambda: Context(ofr=self.ofr))

    @property
    def relative_context(self):
        from .steinberg import Context
        return self._get("rctx", lambda: Context(cm=self.crossed_module))

    def structure_constants(self):
        from .chevalley import derive_structure_constants
        sc = derive_structure_constants(self.phi)
        if self.cfg.fault == "sign":
            a, b = sc.extraspecial[0]
            sc = sc.flipped(a, b)
        return sc


def _mutate(cfg: RunConfig, families) -> tuple[str, ...]:
    return tuple(sorted(set(families))) if cfg.fault == "relations" else ()


def _records_of(rep: Report) -> list[dict]:
    out = []
    for it in rep.items:
        wit = [f for f in rep.failures if f["name"] == it.name]
        out.append({"family": it.name, "instances": it.instances, "failures": it.failures,
                    "mode": it.mode, "pass": it.passed, "witnesses": wit})
    return out


def _merged(check: str, reports: list[Report]) -> Report:
    out = Report(check, seed=reports[0].seed if reports else 0, budget=reports[0].budget if reports else 0)
    for r in reports:
        out.merge(r, prefix=f"{r.check}: " if len(reports) > 1 else "")
        out.meta[r.check] = r.meta
    return out


def run_suite(name: str, inst: Instance) -> tuple[Report, list[dict]]:
    cfg = inst.cfg
    kw = dict(budget=cfg.budget, seed=cfg.seed)
    if name == "axioms":
        from .oddform import check_axioms
        rep = check_axioms(inst.ofr, **kw)
        return rep, _records_of(rep)
    if name == "family":
        from .oddform import check_family, check_peirce
        from .oddform import corrupt_family
        H = corrupt_family(inst.ofr) if cfg.fault == "family" else None
        rep = _merged("family", [check_family(inst.ofr, H), check_peirce(inst.ofr, H)])
        return rep, _records_of(rep)
    if name == "crossed":
        from .oddform import check_crossed
        from .pairs import check_crossed_pair
        parts = [check_crossed(inst.crossed_module, **kw)]
        if cfg.admissible is not None:
            parts.insert(0, check_crossed_pair(inst.crossed_pair))
        rep = _merged("crossed", parts)
        return rep, _records_of(rep)
    if name in ("unrel", "presentation"):
        from .steinberg import SUITES, run_patterns
        ctx = inst.context if name == "unrel" else inst.relative_context
        pats = SUITES[name](ctx)
        return run_patterns(ctx, pats, name, workers=cfg.workers,
                            mutate=_mutate(cfg, [p.family for p in pats]), **kw)
    if name == "dl":
        from .chevalley import DL_FAMILIES, verify_dl
        pair = inst.crossed_pair.target if cfg.admissible is not None else inst.pair
        path = os.path.join(cfg.out, "dl.jsonl.tmp") if cfg.out else None
        rep = verify_dl(inst.phi, pair, workers=cfg.workers, mutate=_mutate(cfg, DL_FAMILIES),
                        sc=inst.structure_constants(), jsonl=path, **kw)
        records = _read_jsonl(path) if path else _records_of(rep)
        return rep, records
    if name == "relative-dl":
        from .chevalley import RELATIVE_FAMILIES, verify_relative_dl
        fams = list(RELATIVE_FAMILIES) + [f"Lift {f}" for f in RELATIVE_FAMILIES]
        return verify_relative_dl(inst.phi, inst.crossed_pair, workers=cfg.workers, mutate=_mutate(cfg, fams),
                                  sc=inst.structure_constants(), **kw)
    if name == "injectivity":
        from .rootsys import RootSystem, saturated_special_subsets
        from .steinberg import product_injectivity
        bc = RootSystem("BC", inst.context.ell)
        reps = []
        for k, sigma in enumerate(saturated_special_subsets(bc)):
            n = len(sigma.without_doubles())
            # planted fault: the last factor is left out of every product
            orders = [list(range(n - 1))] * 2 if cfg.fault == "drop-factor" and n > 1 else None
            r = product_injectivity(inst.context, sigma, orders=orders, **kw)
            r.check = f"Σ{k} {sigma}"
            reps.append(r)
        rep = _merged("injectivity", reps)
        return rep, _records_of(rep)
    if name == "lemmas":
        from .steinberg import check_delta_square, check_diagonal_action, lemma_form_pres, lemma_ring_pres
        rep = _merged("lemmas", [lemma_ring_pres(inst.ofr), lemma_form_pres(inst.ofr),
                                 check_delta_square(inst.relative_context), check_diagonal_action(inst.ofr)])
        return rep, _records_of(rep)
    raise ConfigError(f"unknown suite {name!r}")


def _read_jsonl(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        rows = [json.loads(line) for line in fh]
    os.remove(path)
    return rows


def _plain(obj):
    """JSON-ready copy: string keys, lists for tuples and arrays, Python scalars."""
    if isinstance(obj, dict):
        return {k if isinstance(k, str) else str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, default=str)


def run(cfg: RunConfig, stream=sys.stdout) -> int:
    """Execute every suite of ``cfg``; returns the process exit status."""
    cfg.validate()
    base = Instance(cfg)
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
    summary = {"config": cfg.name, "seed": cfg.seed, "budget": cfg.budget, "fault": cfg.fault, "suites": {}}
    ok = True
    for name in cfg.suites:
        inst = Instance(replace(cfg, fault=PLANTED[name])) if cfg.fault == "planted" else base
        rep, records = run_suite(name, inst)
        records = [{**r, "pass": r["failures"] == 0} for r in _plain(records)]
        ok &= rep.ok
        d = _plain(rep.to_dict())
        d["digest"] = stable_hash(records)
        summary["suites"][name] = d
        if cfg.out:
            with open(os.path.join(cfg.out, f"{name}.jsonl"), "w", encoding="utf-8") as fh:
                for r in records:
                    fh.write(_dump(r) + "\n")
        if cfg.format == "text":
            print(rep.summary(), file=stream)
            for f in rep.failures[:3]:
                print(f"    witness {_dump(_plain(f))}", file=stream)
        else:
            print(_dump({"suite": name, "ok": rep.ok, "instances": rep.instances,
                         "failed": rep.failed_names()}), file=stream)
    summary["ok"] = ok
    if cfg.out:
        with open(os.path.join(cfg.out, "config.txt"), "w", encoding="utf-8") as fh:
            fh.write(cfg.to_text())
        if cfg.format == "text":
            with open(os.path.join(cfg.out, "summary.txt"), "w", encoding="utf-8") as fh:
                for name, d in summary["suites"].items():
                    fh.write(f"{name}: {'PASS' if d['ok'] else 'FAIL'} ({d['instances']} instances)\n")
                    for it in d["items"]:
                        fh.write(f"  {'ok  ' if it['passed'] else 'FAIL'} {it['name']}: "
                                 f"{it['instances']} [{it['mode']}] {it['failures']} failures\n")
        with open(os.path.join(cfg.out, "summary.json"), "w", encoding="utf-8") as fh:
            fh.write(_dump(summary) + "\n")
    print(f"{cfg.name}: {'PASS' if ok else 'FAIL'}", file=stream)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="verify", description="Verify odd form ring, Steinberg and "
                                 "doubly laced relation suites on finite instances.")
    ap.add_argument("--preset", choices=sorted(PRESETS))
    ap.add_argument("--config", help="declarative run config file")
    ap.add_argument("--suites", help="comma separated subset of " + ",".join(SUITE_NAMES))
    ap.add_argument("--budget", type=int, help="max instances per family (0: exhaustive)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--fault", choices=FAULTS, help="plant a fault to exercise failure detection")
    ap.add_argument("--out", help="directory for JSON-lines records and the summary")
    ap.add_argument("--format", choices=("json", "text"))
    ap.add_argument("--list-presets", action="store_true")
    ap.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    return ap


def resolve(args: argparse.Namespace) -> RunConfig:
    if args.preset and args.config:
        raise ConfigError("give at most one of --preset and --config")
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = RunConfig.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    elif args.preset:
        cfg = PRESETS[args.preset]
    else:
        raise ConfigError("give --preset or --config (see --list-presets)")
    over = {"workers": args.workers}
    if args.suites:
        over["suites"] = tuple(s for s in args.suites.split(",") if s)
    for k in ("budget", "seed", "fault", "out", "format"):
        if getattr(args, k) is not None:
            over[k] = getattr(args, k)
    return replace(cfg, **over).validate()


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.list_presets:
        print(list_presets())
        return 0
    try:
        cfg = resolve(args)
        if args.print_config:
            print(cfg.to_text(), end="")
            return 0
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Check reports and the batched property runner shared by all suites."""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field, asdict
from typing import Any, Callable, Sequence

import numpy as np

CHUNK = 16384


@dataclass
class Item:
    name: str
    instances: int = 0
    failures: int = 0
    mode: str = "exhaustive"
    space: int = 0

    @property
    def passed(self) -> bool:
        return self.failures == 0


@dataclass
class Report:
    """Outcome of one check; serializes as {check, instances, failures[], seed, budget}."""

    check: str
    seed: int = 0
    budget: int = 0
    items: list[Item] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    max_witnesses: int = 3

    @property
    def instances(self) -> int:
        return sum(i.instances for i in self.items)

    @property
    def ok(self) -> bool:
        return all(i.passed for i in self.items)

    def item(self, name: str) -> Item:
        for it in self.items:
            if it.name == name:
                return it
        it = Item(name)
        self.items.append(it)
        return it

    def failed_names(self) -> list[str]:
        return [i.name for i in self.items if not i.passed]

    def record(self, name: str, ok: bool, witness: Any = None) -> None:
        it = self.item(name)
        it.instances += 1
        if not ok:
            it.failures += 1
            if sum(1 for f in self.failures if f["name"] == name) < self.max_witnesses:
                self.failures.append({"name": name, "witness": witness})

    def merge(self, other: "Report", prefix: str = "") -> None:
        for it in other.items:
            mine = self.item(prefix + it.name)
            mine.instances += it.instances
            mine.failures += it.failures
            mine.mode = it.mode
            mine.space = max(mine.space, it.space)
        for f in other.failures:
            self.failures.append({**f, "name": prefix + f["name"]})

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "instances": self.instances,
            "failures": self.failures,
            "seed": self.seed,
            "budget": self.budget,
            "items": [asdict(i) | {"passed": i.passed} for i in self.items],
            "meta": self.meta,
            "ok": self.ok,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_jsonable)

    def summary(self) -> str:
        lines = [f"{self.check}: {'PASS' if self.ok else 'FAIL'} ({self.instances} instances)"]
        for it in self.items:
            lines.append(
                f"  {'ok  ' if it.passed else 'FAIL'} {it.name}: {it.instances} [{it.mode}]"
                + (f", {it.failures} failures" if it.failures else "")
            )
        return "\n".join(lines)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    return str(x)


def stable_hash(*parts: Any) -> str:
    """Hash independent of process, schedule and dict ordering."""
    h = hashlib.sha256(json.dumps(parts, sort_keys=True, default=_jsonable).encode())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# batched carriers


class Carrier:
    """A finite list of (possibly tuple-valued) elements stored as stacked arrays.

    ``data`` is either an array with leading axis over elements or a tuple
    of such arrays.
    """

    def __init__(self, name: str, data, describe: Callable[[Any], Any] | None = None):
        self.name = name
        self.data = data
        self.describe = describe or (lambda x: x)

    @classmethod
    def from_list(cls, name: str, elems: Sequence, describe=None) -> "Carrier":
        if not elems:
            raise ValueError(f"carrier {name} is empty")
        if isinstance(elems[0], tuple):
            data = tuple(np.stack([e[k] for e in elems]) for k in range(len(elems[0])))
        else:
            data = np.stack(elems)
        return cls(name, data, describe)

    def __len__(self) -> int:
        d = self.data[0] if isinstance(self.data, tuple) else self.data
        return int(d.shape[0])

    def take(self, idx: np.ndarray):
        if isinstance(self.data, tuple):
            return tuple(d[idx] for d in self.data)
        return self.data[idx]

    def get(self, i: int):
        return self.take(np.int64(i))


def index_tuples(sizes: Sequence[int], budget: int, rng: np.random.Generator):
    """Yield (mode, total, chunks of index arrays) over the product of ``sizes``.

    Exhaustive when the product fits the budget (budget 0 means unlimited),
    else ``budget`` seeded uniform samples.
    """
    total = math.prod(sizes)
    if budget and total > budget:
        mode, count = "sampled", budget
    else:
        mode, count = "exhaustive", total

    def chunks():
        for start in range(0, count, CHUNK):
            stop = min(count, start + CHUNK)
            if mode == "exhaustive":
                flat = np.arange(start, stop, dtype=np.int64)
                cols = np.unravel_index(flat, sizes) if sizes else ()
                yield [np.asarray(c, dtype=np.int64) for c in cols]
            else:
                yield [rng.integers(0, s, size=stop - start) for s in sizes]

    return mode, total, chunks()


def check_property(
    report: Report,
    name: str,
    carriers: Sequence[Carrier],
    fn: Callable[..., np.ndarray],
    budget: int,
    rng: np.random.Generator,
) -> Item:
    """Evaluate a batched predicate over the product of carriers."""
    mode, total, chunks = index_tuples([len(c) for c in carriers], budget, rng)
    it = report.item(name)
    it.mode, it.space = mode, max(it.space, total)
    for cols in chunks:
        args = [c.take(ix) for c, ix in zip(carriers, cols)]
        ok = np.asarray(fn(*args), dtype=bool)
        if not carriers:
            ok = ok.reshape(1)
        n = ok.shape[0] if ok.ndim else 1
        it.instances += n
        bad = np.nonzero(~ok.reshape(n))[0]
        it.failures += len(bad)
        for b in bad[: report.max_witnesses]:
            if sum(1 for f in report.failures if f["name"] == name) >= report.max_witnesses:
                break
            report.failures.append(
                {
                    "name": name,
                    "witness": {
                        c.name: c.describe(c.get(int(ix[b]))) for c, ix in zip(carriers, cols)
                    },
                }
            )
    return it

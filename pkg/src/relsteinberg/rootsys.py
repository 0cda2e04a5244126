"""Root systems BC_ℓ, B_ℓ, C_ℓ and F4 in doubled integer coordinates.

Every coordinate is doubled, so e_i is stored as ``2·unit_i`` and the F4
half-sum roots are integral.  Roots are ordered by height (with respect to
the Bourbaki simple roots) and then lexicographically; this order is used
wherever a product over a set of roots needs one.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

KINDS = ("BC", "B", "C", "F")

# squared length (doubled coordinates) -> class
_LENGTHS = {
    "BC": {4: "ultrashort", 8: "short", 16: "long"},
    "B": {4: "short", 8: "long"},
    "C": {8: "short", 16: "long"},
    "F": {4: "short", 8: "long"},
}


@dataclass(frozen=True, order=True)
class Root:
    coords: tuple[int, ...]
    lengthClass: str = field(compare=False)

    def __neg__(self) -> "Root":
        return Root(tuple(-c for c in self.coords), self.lengthClass)

    @property
    def norm2(self) -> int:
        return sum(c * c for c in self.coords)

    def __str__(self) -> str:
        return root_label(self.coords)


def _unit(l: int, i: int, v: int = 2) -> list[int]:
    c = [0] * l
    c[i] = v
    return c


def _vadd(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def _vsub(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b))


def root_label(coords: Sequence[int]) -> str:
    """Readable form, e.g. ``e2−e1`` or ``(e1−e2−e3−e4)/2``."""
    if any(c % 2 for c in coords):
        body = "".join(("+" if c > 0 else "−") + f"e{i + 1}" for i, c in enumerate(coords) if c)
        return "(" + body.lstrip("+") + ")/2"
    terms = []
    for i, c in enumerate(coords):
        h = c // 2
        if h:
            coef = "" if abs(h) == 1 else str(abs(h))
            terms.append(("+" if h > 0 else "−") + coef + f"e{i + 1}")
    return "".join(terms).lstrip("+") or "0"


def _simple_roots(kind: str, l: int) -> list[tuple[int, ...]]:
    if kind == "F":
        return [
            (0, 2, -2, 0),
            (0, 0, 2, -2),
            (0, 0, 0, 2),
            (1, -1, -1, -1),
        ]
    out = [tuple(_vsub(_unit(l, i), _unit(l, i + 1))) for i in range(l - 1)]
    out.append(tuple(_unit(l, l - 1, 4 if kind == "C" else 2)))
    return out


class RootSystem:
    """A finite root system with fixed order and length classification."""

    def __init__(self, kind: str, rank: int):
        if kind not in KINDS:
            raise ValueError(f"unsupported root system kind {kind!r}")
        if rank < 1 or (kind == "F" and rank != 4):
            raise ValueError(f"unsupported (kind, rank) = ({kind}, {rank})")
        self.kind, self.rank = kind, rank
        l = rank
        raw: set[tuple[int, ...]] = set()
        for i in range(l):
            for s in (1, -1):
                if kind in ("BC", "B", "F"):
                    raw.add(tuple(_unit(l, i, 2 * s)))
                if kind in ("BC", "C"):
                    raw.add(tuple(_unit(l, i, 4 * s)))
        for i, j in itertools.combinations(range(l), 2):
            for s, t in itertools.product((1, -1), repeat=2):
                raw.add(_vadd(_unit(l, i, 2 * s), _unit(l, j, 2 * t)))
        if kind == "F":
            for signs in itertools.product((1, -1), repeat=4):
                raw.add(tuple(signs))
        table = _LENGTHS[kind]
        self.simple = _simple_roots(kind, l)
        S = np.array(self.simple, dtype=float).T
        self._height = {}
        for c in raw:
            coef = np.linalg.solve(S, np.array(c, dtype=float))
            r = np.rint(coef)
            if not np.allclose(coef, r):
                raise AssertionError("root not an integral combination of simple roots")
            self._height[c] = int(r.sum())
        self.roots: list[Root] = sorted(
            (Root(c, table[sum(x * x for x in c)]) for c in raw),
            key=lambda r: (self._height[r.coords], r.coords),
        )
        self.by_coords = {r.coords: r for r in self.roots}
        self.order = {r.coords: k for k, r in enumerate(self.roots)}

    def __repr__(self) -> str:
        return f"{self.kind}{self.rank}"

    def __len__(self) -> int:
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def __contains__(self, c) -> bool:
        return _coords(c) in self.by_coords

    def root(self, c) -> Root:
        return self.by_coords[_coords(c)]

    def height(self, r) -> int:
        return self._height[_coords(r)]

    def get(self, c) -> Root | None:
        return self.by_coords.get(_coords(c))

    def sorted(self, roots: Iterable) -> list[Root]:
        return sorted((self.root(r) for r in roots), key=lambda r: self.order[r.coords])

    def e(self, i: int) -> Root:
        """e_i for signed 1 ≤ |i| ≤ ℓ (only for BC)."""
        return self.root(_unit(self.rank, abs(i) - 1, 2 if i > 0 else -2))

    @cached_property
    def ultrashort(self) -> list[Root]:
        return [r for r in self.roots if r.lengthClass == "ultrashort"]

    def positive(self) -> list[Root]:
        return [r for r in self.roots if self._height[r.coords] > 0]

    def dot(self, a, b) -> int:
        return sum(x * y for x, y in zip(_coords(a), _coords(b)))

    def serialize(self, roots: Iterable | None = None) -> str:
        roots = self.roots if roots is None else self.sorted(roots)
        return "\n".join(f"{self.kind} {self.rank} : " + " ".join(map(str, r.coords)) for r in roots)


def _coords(r) -> tuple[int, ...]:
    return r.coords if isinstance(r, Root) else tuple(int(x) for x in r)


def build_root_system(kind: str, rank: int) -> RootSystem:
    return RootSystem(kind, rank)


def parse_roots(text: str) -> tuple[RootSystem, list[Root]]:
    """Inverse of :meth:`RootSystem.serialize`."""
    phi, out = None, []
    for line in text.strip().splitlines():
        head, _, tail = line.partition(":")
        kind, rank = head.split()
        if phi is None:
            phi = RootSystem(kind, int(rank))
        elif (phi.kind, phi.rank) != (kind, int(rank)):
            raise ValueError("mixed root systems in one block")
        c = tuple(int(x) for x in tail.split())
        if c not in phi:
            raise ValueError(f"{c} is not a root of {phi}")
        out.append(phi.root(c))
    if phi is None:
        raise ValueError("empty root block")
    return phi, out


# ---------------------------------------------------------------------------
# subsets


class RootSubset:
    """A subset Σ ⊆ Φ with lazily computed flags."""

    def __init__(self, ambient: RootSystem, members: Iterable):
        self.ambient = ambient
        self.members = frozenset(_coords(m) for m in members)
        bad = [m for m in self.members if m not in ambient]
        if bad:
            raise ValueError(f"not roots of {ambient}: {bad}")

    def __iter__(self):
        return iter(self.ambient.sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, r) -> bool:
        return _coords(r) in self.members

    def __eq__(self, other) -> bool:
        return isinstance(other, RootSubset) and self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __repr__(self) -> str:
        return "{" + ", ".join(str(r) for r in self) + "}"

    @cached_property
    def closed(self) -> bool:
        phi = self.ambient
        for a, b in itertools.product(self.members, repeat=2):
            s = _vadd(a, b)
            if s in phi and s not in self.members:
                return False
        return True

    @cached_property
    def saturated(self) -> bool:
        if not self.closed:
            return False
        for a in self.members:
            if all(x % 2 == 0 for x in a):
                h = tuple(x // 2 for x in a)
                if h in self.ambient and h not in self.members:
                    return False
        return True

    @cached_property
    def special(self) -> bool:
        return self.closed and not any(tuple(-x for x in a) in self.members for a in self.members)

    @property
    def is_subsystem(self) -> bool:
        return all(tuple(-x for x in a) in self.members for a in self.members)

    def minus(self, other) -> "RootSubset":
        o = other.members if isinstance(other, RootSubset) else {_coords(r) for r in other}
        return RootSubset(self.ambient, self.members - o)

    def without_doubles(self) -> list[Root]:
        """Σ ∖ 2Σ in the fixed order."""
        return [r for r in self if not _is_double_in(r.coords, self.members)]

    def dimension(self) -> int:
        if not self.members:
            return 0
        return int(np.linalg.matrix_rank(np.array(sorted(self.members), dtype=float)))


def _dbl(c):
    return tuple(2 * x for x in c)


def _is_double_in(c, members) -> bool:
    if any(x % 2 for x in c):
        return False
    return tuple(x // 2 for x in c) in members


def saturate(phi: RootSystem, X: Iterable) -> RootSubset:
    """⟨X⟩: least fixpoint under sums that are roots and under halving."""
    cur = {_coords(x) for x in X}
    while True:
        new = set(cur)
        for a, b in itertools.product(cur, repeat=2):
            s = _vadd(a, b)
            if s in phi:
                new.add(s)
        for a in cur:
            if all(x % 2 == 0 for x in a):
                h = tuple(x // 2 for x in a)
                if h in phi:
                    new.add(h)
        if new == cur:
            return RootSubset(phi, cur)
        cur = new


def extreme_roots(sigma: RootSubset) -> list[Root]:
    """Roots of a saturated special Σ that are indecomposable in Σ (with the ultrashort caveat)."""
    if not (sigma.saturated and sigma.special):
        raise ValueError("extreme roots need a saturated special subset")
    phi, S = sigma.ambient, sigma.members
    out = []
    for a in S:
        if any(_vsub(a, b) in S for b in S):
            continue
        if phi.root(a).lengthClass == "ultrashort":
            d = _dbl(a)
            if any(_vsub(d, b) in S and _vsub(d, b) != b for b in S):
                continue
        out.append(a)
    return phi.sorted(out)


def positive_systems(phi: RootSystem) -> list[RootSubset]:
    """All systems of positive roots (W-images of the standard one), for BC/B/C."""
    pos = phi.positive()
    out = {}
    for w in weyl_elements(phi.rank):
        s = RootSubset(phi, [apply_weyl(w, r.coords) for r in pos])
        out[s.members] = s
    return list(out.values())


def saturated_special_subsets(phi: RootSystem, budget: int = 0, seed: int = 0) -> list[RootSubset]:
    """Every saturated special subset (each is contained in a positive system).

    With ``budget > 0`` and more candidates than the budget, a seeded sample
    of subsets of positive systems is examined instead.
    """
    found: dict[frozenset, RootSubset] = {}
    systems = positive_systems(phi)
    n = len(systems[0])
    if budget and len(systems) * 2**n > budget:
        rng = np.random.default_rng(seed)
        for _ in range(budget):
            P = systems[int(rng.integers(len(systems)))]
            mask = rng.integers(0, 2, size=n)
            s = saturate(phi, [r for r, m in zip(P, mask) if m])
            if s.special:
                found[s.members] = s
    else:
        for P in systems:
            roots = list(P)
            for mask in range(2**n):
                s = RootSubset(phi, [roots[k] for k in range(n) if mask >> k & 1])
                if s.saturated:
                    found[s.members] = s
    return sorted(found.values(), key=lambda s: (len(s), sorted(phi.order[m] for m in s.members)))


# ---------------------------------------------------------------------------
# Weyl group of BC_ℓ: signed permutations


def weyl_elements(l: int):
    """(perm, signs): e_i ↦ signs[i]·e_{perm[i]}."""
    for perm in itertools.permutations(range(l)):
        for signs in itertools.product((1, -1), repeat=l):
            yield perm, signs


def apply_weyl(w, c) -> tuple[int, ...]:
    perm, signs = w
    c = _coords(c)
    out = [0] * len(c)
    for i, x in enumerate(c):
        out[perm[i]] = signs[i] * x
    return tuple(out)


def weyl_index(w, i: int) -> int:
    """Action on signed indices: η_i ↦ η_{w(i)}."""
    perm, signs = w
    s = 1 if i > 0 else -1
    k = abs(i) - 1
    return s * signs[k] * (perm[k] + 1)


# ---------------------------------------------------------------------------
# BC root ↔ index dictionary


def root_indices(phi: RootSystem, r) -> tuple:
    """('ij', i, j) for e_j − e_i, ('j', j) for e_j, ('2j', j) for 2e_j (BC only)."""
    c = _coords(r)
    nz = [(k + 1, x) for k, x in enumerate(c) if x]
    if len(nz) == 1:
        k, x = nz[0]
        j = k if x > 0 else -k
        return ("j", j) if abs(x) == 2 else ("2j", j)
    (k1, x1), (k2, x2) = nz
    s1 = k1 if x1 > 0 else -k1
    s2 = k2 if x2 > 0 else -k2
    # e_{s1} + e_{s2} = e_j − e_i with j = s1, i = −s2
    return ("ij", -s2, s1)


def index_root(phi: RootSystem, key: tuple) -> Root:
    l = phi.rank

    def e(i, mult=1):
        return _unit(l, abs(i) - 1, 2 * mult if i > 0 else -2 * mult)

    if key[0] == "ij":
        _, i, j = key
        return phi.root(_vsub(e(j), e(i)))
    if key[0] == "j":
        return phi.root(e(key[1]))
    return phi.root(e(key[1], 2))


# ---------------------------------------------------------------------------
# quotients Φ/Ψ


def equivalence_classes(phi: RootSystem, psi: RootSubset) -> list[list[int]]:
    """Classes of ∼_Ψ on ultrashort roots, as lists of signed indices."""
    if phi.kind != "BC":
        raise ValueError("∼_Ψ is defined on BC systems")
    idx = [i for i in range(-phi.rank, phi.rank + 1) if i]
    inpsi = lambda i: phi.e(i).coords in psi.members

    def rel(i, j):
        if inpsi(j):
            return False
        d = _vsub(phi.e(i).coords, phi.e(j).coords)
        return all(x == 0 for x in d) or d in psi.members

    classes, seen = [], set()
    for i in idx:
        if i in seen or not rel(i, i):
            continue
        cls = [j for j in idx if rel(i, j)]
        seen.update(cls)
        classes.append(sorted(cls, key=lambda v: (abs(v), v)))
    return classes


def related(phi: RootSystem, psi: RootSubset, i: int, j: int) -> bool:
    return any(i in c and j in c for c in equivalence_classes(phi, psi))


@dataclass
class QuotientSystem:
    """Φ/Ψ realized as BC_{ℓ'} through the summed hyperbolic family.

    ``classes[k]`` is the ∼_Ψ class sent to f_{k+1}; its opposite goes to
    −f_{k+1}.  ``projection`` maps coords of Φ ∖ Ψ to coords of Φ/Ψ.
    """

    ambient: RootSystem
    kernel: RootSubset
    classes: list[list[int]]
    quotientSystem: RootSystem | None
    projection: dict

    def project(self, r) -> Root:
        return self.quotientSystem.root(self.projection[_coords(r)])

    def preimage(self, subset: Iterable) -> RootSubset:
        want = {_coords(s) for s in subset}
        return RootSubset(self.ambient, [c for c, v in self.projection.items() if v in want])

    def class_of(self, k: int) -> list[int]:
        """Signed quotient index k ↦ the class of base indices."""
        cls = self.classes[abs(k) - 1]
        return cls if k > 0 else [-i for i in cls]


def quotient(phi: RootSystem, psi: RootSubset) -> QuotientSystem:
    if not (psi.saturated and psi.is_subsystem):
        raise ValueError("Ψ must be a saturated root subsystem")
    if phi.kind != "BC":
        raise ValueError("quotients are taken in BC systems")
    classes = equivalence_classes(phi, psi)
    chosen = []
    for c in classes:
        if any(sorted(-i for i in c) == sorted(d) for d in chosen):
            continue
        chosen.append(c)
    # normal form: each chosen class is the one containing its smallest |i| with i > 0
    chosen = [c if max(c, key=lambda v: (-abs(v), v)) > 0 else [-i for i in c] for c in chosen]
    chosen = [sorted(c, key=lambda v: (abs(v), v)) for c in chosen]
    chosen.sort(key=lambda c: min(abs(v) for v in c))
    lq = len(chosen)
    lin = np.zeros((lq, phi.rank), dtype=np.int64)
    for k, c in enumerate(chosen):
        for i in c:
            lin[k, abs(i) - 1] = 1 if i > 0 else -1
    # each base e_i lies in at most one chosen class (up to sign); e_i ∈ Ψ maps to 0
    for i in range(1, phi.rank + 1):
        rows = np.nonzero(lin[:, i - 1])[0]
        if len(rows) > 1:
            raise AssertionError("classes overlap")
    Q = RootSystem("BC", lq) if lq else None
    proj = {}
    for r in phi.roots:
        if r.coords in psi.members:
            continue
        img = tuple(int(x) for x in lin @ np.array(r.coords))
        if Q is None or img not in Q:
            raise AssertionError(f"projection of {r} is not a root of the quotient")
        proj[r.coords] = img
    return QuotientSystem(phi, psi, chosen, Q, proj)


def subsystem(phi: RootSystem, roots: Iterable) -> RootSubset:
    """⟨X ∪ −X⟩."""
    roots = [_coords(r) for r in roots]
    return saturate(phi, roots + [tuple(-x for x in r) for r in roots])


def span_intersection(phi: RootSystem, roots: Iterable) -> RootSubset:
    """ℝX ∩ Φ."""
    M = np.array([_coords(r) for r in roots], dtype=float)
    rk = np.linalg.matrix_rank(M) if len(M) else 0
    out = []
    for r in phi.roots:
        if rk == 0:
            break
        if np.linalg.matrix_rank(np.vstack([M, np.array(r.coords, dtype=float)])) == rk:
            out.append(r.coords)
    return RootSubset(phi, out)

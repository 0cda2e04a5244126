"""Finite abelian groups and commutative rings with tabulated operations.

Elements are small integers ``0..n-1`` indexing a list of labels; all
arithmetic goes through precomputed numpy tables so that it vectorizes over
arrays of element indices.
"""
from __future__ import annotations

import itertools
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np


class FiniteGroup:
    """A finite abelian group given by its addition table."""

    def __init__(self, labels: Sequence[Hashable], add: np.ndarray, name: str = "G"):
        self.labels = list(labels)
        self.name = name
        self.add = np.asarray(add, dtype=np.int64)
        n = len(self.labels)
        if self.add.shape != (n, n):
            raise ValueError("addition table has wrong shape")
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        zeros = [i for i in range(n) if np.array_equal(self.add[i], np.arange(n))]
        if len(zeros) != 1:
            raise ValueError(f"{name}: addition table has no unique zero")
        self.zero = zeros[0]
        self.neg = np.empty(n, dtype=np.int64)
        for i in range(n):
            (j,) = np.nonzero(self.add[i] == self.zero)[0][:1]
            self.neg[i] = j
        self.sub = self.add[np.arange(n)[:, None], self.neg[None, :]]

    @property
    def order(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, order={self.order})"

    def elements(self) -> range:
        return range(self.order)

    def lab(self, i: int) -> Hashable:
        return self.labels[i]

    def smul(self, n: int, x: int) -> int:
        """Integer multiple n*x."""
        acc = self.zero
        base = x if n >= 0 else int(self.neg[x])
        for _ in range(abs(n)):
            acc = int(self.add[acc, base])
        return acc

    def generated(self, gens: Iterable[int]) -> list[int]:
        """Subgroup generated by ``gens`` (sorted element indices)."""
        seen = {self.zero}
        frontier = [self.zero]
        gens = list(gens)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = int(self.add[x, g])
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(seen)

    def is_subgroup(self, subset: Iterable[int]) -> bool:
        s = set(subset)
        if self.zero not in s:
            return False
        return all(int(self.add[a, b]) in s for a in s for b in s) and all(
            int(self.neg[a]) in s for a in s
        )

    @classmethod
    def from_ops(cls, labels, add: Callable, name: str = "G", **kw):
        labels = list(labels)
        index = {lab: i for i, lab in enumerate(labels)}
        n = len(labels)
        table = np.empty((n, n), dtype=np.int64)
        for i, a in enumerate(labels):
            for j, b in enumerate(labels):
                table[i, j] = index[add(a, b)]
        return cls(labels, table, name=name, **kw)

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        return cls.from_ops(range(n), lambda a, b: (a + b) % n, name=f"Z/{n}")


class FiniteRing(FiniteGroup):
    """A finite associative ring (commutative in every use here)."""

    def __init__(self, labels, add, mul, name: str = "K"):
        super().__init__(labels, add, name=name)
        self.mul = np.asarray(mul, dtype=np.int64)
        n = self.order
        ones = [
            i
            for i in range(n)
            if np.array_equal(self.mul[i], np.arange(n))
            and np.array_equal(self.mul[:, i], np.arange(n))
        ]
        self.one = ones[0] if ones else None

    @classmethod
    def from_ops(cls, labels, add: Callable, mul: Callable, name: str = "K"):
        labels = list(labels)
        index = {lab: i for i, lab in enumerate(labels)}
        n = len(labels)
        at = np.empty((n, n), dtype=np.int64)
        mt = np.empty((n, n), dtype=np.int64)
        for i, a in enumerate(labels):
            for j, b in enumerate(labels):
                at[i, j] = index[add(a, b)]
                mt[i, j] = index[mul(a, b)]
        return cls(labels, at, mt, name=name)

    @classmethod
    def zmod(cls, n: int) -> "FiniteRing":
        return cls.from_ops(
            range(n), lambda a, b: (a + b) % n, lambda a, b: (a * b) % n, name=f"Z/{n}"
        )

    def is_commutative(self) -> bool:
        return np.array_equal(self.mul, self.mul.T)

    def is_ideal(self, subset: Iterable[int]) -> bool:
        s = set(subset)
        return self.is_subgroup(s) and all(
            int(self.mul[k, a]) in s for k in self.elements() for a in s
        )

    def square(self, x: int) -> int:
        return int(self.mul[x, x])

    def from_int(self, n: int) -> int:
        return self.smul(n, self.one)


def fiber_product(K: FiniteGroup, sub: Iterable[int], name: str | None = None, ring: bool | None = None):
    """The subobject {(x, y) in K x K : x - y in sub} of K x K.

    For an ideal (resp. subgroup) ``sub`` this realizes the semidirect
    product sub ⋊ K with p1(x, y) = x, p2(x, y) = y and d(k) = (k, k); the
    kernel of p2 is {(a, 0)}.
    """
    sub = set(sub)
    labels = [
        (K.lab(x), K.lab(y))
        for x in K.elements()
        for y in K.elements()
        if int(K.sub[x, y]) in sub
    ]
    idx = K.index
    add = lambda a, b: (K.lab(K.add[idx[a[0]], idx[b[0]]]), K.lab(K.add[idx[a[1]], idx[b[1]]]))
    name = name or f"{K.name}x{K.name}"
    if ring is None:
        ring = isinstance(K, FiniteRing)
    if ring:
        mul = lambda a, b: (
            K.lab(K.mul[idx[a[0]], idx[b[0]]]),
            K.lab(K.mul[idx[a[1]], idx[b[1]]]),
        )
        return FiniteRing.from_ops(labels, add, mul, name=name)
    return FiniteGroup.from_ops(labels, add, name=name)


# ---------------------------------------------------------------------------
# finitely presented abelian groups (cokernels of integer matrices)


def hermite_rows(rows: list[list[int]], ncols: int) -> list[tuple[int, list[int]]]:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Returns a list of ``(pivot_column, row)`` with positive pivots, strictly
    increasing pivot columns and entries above each pivot reduced into
    ``[0, pivot)``.
    """
    work = [list(r) for r in rows if any(r)]
    basis: list[tuple[int, list[int]]] = []
    for c in range(ncols):
        cand = [r for r in work if r[c] != 0]
        rest = [r for r in work if r[c] == 0]
        if not cand:
            continue
        while len(cand) > 1:
            cand.sort(key=lambda r: abs(r[c]))
            p = cand[0]
            new = [p]
            for r in cand[1:]:
                q = r[c] // p[c]
                r2 = [a - q * b for a, b in zip(r, p)]
                if r2[c] != 0:
                    new.append(r2)
                elif any(r2):
                    rest.append(r2)
            cand = new
        p = cand[0]
        if p[c] < 0:
            p = [-a for a in p]
        basis.append((c, p))
        work = rest
    # reduce above pivots
    for k in range(len(basis)):
        c, p = basis[k]
        for m in range(k):
            c2, r = basis[m]
            q = r[c] // p[c]
            if q:
                basis[m] = (c2, [a - q * b for a, b in zip(r, p)])
    return basis


class AbelianQuotient:
    """Z^n modulo a relation lattice, with canonical representatives."""

    def __init__(self, ngens: int, relations: Iterable[Sequence[int]]):
        self.ngens = ngens
        self.basis = hermite_rows([list(r) for r in relations], ngens)
        pivots = {c for c, _ in self.basis}
        if pivots != set(range(ngens)):
            raise ValueError("quotient is infinite (free generator left)")
        self.diag = [p[c] for c, p in self.basis]

    def reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        v = list(v)
        for c, p in self.basis:
            q = v[c] // p[c]
            if q:
                v = [a - q * b for a, b in zip(v, p)]
        return tuple(v)

    def elements(self) -> list[tuple[int, ...]]:
        # reduced vectors have 0 <= v[c] < diag[c] at every pivot, and every
        # column is a pivot
        return [tuple(t) for t in itertools.product(*[range(d) for d in self.diag])]

    def order(self) -> int:
        return int(np.prod(self.diag)) if self.diag else 1

    def to_group(self, name: str = "Q") -> FiniteGroup:
        labels = self.elements()
        return FiniteGroup.from_ops(
            labels, lambda a, b: self.reduce([x + y for x, y in zip(a, b)]), name=name
        )


def group_orders(G: FiniteGroup) -> list[int]:
    out = []
    for x in G.elements():
        k, y = 1, x
        while y != G.zero:
            y = int(G.add[y, x])
            k += 1
        out.append(k)
    return out


def tensor_product(
    A: FiniteGroup,
    B: FiniteGroup,
    scalars: Iterable[int] = (),
    act_right: Callable[[int, int], int] | None = None,
    act_left: Callable[[int, int], int] | None = None,
    name: str = "AxB",
    extra: Iterable[Iterable[tuple[int, tuple[int, int]]]] = (),
):
    """A ⊗_Λ B for a right Λ-module A and a left Λ-module B.

    ``scalars`` enumerates Λ (or a generating set of it as a ring), and
    ``act_right(a, lam)``, ``act_left(lam, b)`` are the module actions.  With
    no scalars this is the tensor product over Z.  ``extra`` adds further
    relations, each a list of ``(coefficient, (a, b))`` terms.  Returns the
    group, a function ``(a, b) -> element index`` of the pure tensor, and
    ``expand(g) -> [(coefficient, (a, b)), ...]`` writing an element as a sum
    of pure tensors.
    """
    pairs = [(a, b) for a in A.elements() for b in B.elements()]
    col = {p: i for i, p in enumerate(pairs)}
    n = len(pairs)
    rels = []

    def vec(*terms):
        v = [0] * n
        for sign, p in terms:
            v[col[p]] += sign
        return v

    for a in A.elements():
        for a2 in A.elements():
            for b in B.elements():
                s = int(A.add[a, a2])
                rels.append(vec((1, (s, b)), (-1, (a, b)), (-1, (a2, b))))
    for a in A.elements():
        for b in B.elements():
            for b2 in B.elements():
                s = int(B.add[b, b2])
                rels.append(vec((1, (a, s)), (-1, (a, b)), (-1, (a, b2))))
    for lam in scalars:
        for a in A.elements():
            for b in B.elements():
                rels.append(vec((1, (act_right(a, lam), b)), (-1, (a, act_left(lam, b)))))
    for terms in extra:
        rels.append(vec(*terms))
    Q = AbelianQuotient(n, rels)
    G = Q.to_group(name=name)

    def pure(a: int, b: int) -> int:
        e = [0] * n
        e[col[(a, b)]] = 1
        return G.index[Q.reduce(e)]

    def expand(g: int) -> list[tuple[int, tuple[int, int]]]:
        v = G.lab(g)
        return [(c, pairs[i]) for i, c in enumerate(v) if c]

    return G, pure, expand

"""Generalized matrix rings over tabulated coefficient groups.

A :class:`BlockRing` is R = ⊕_{p,q} A_{pq} indexed by a signed index set,
with products A_{pq} × A_{qr} → A_{pr} and an involution A_{pq} → A_{-q,-p}.
Every slot's coefficient group is embedded into one global index space so
that addition, multiplication and the involution are single table lookups on
``(N, N)`` integer arrays.
"""
from __future__ import annotations

import itertools
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .rings import FiniteGroup

Elem = np.ndarray  # (N, N) array of global coefficient indices


class BlockRing:
    """Non-unital involution ring presented slotwise.

    Parameters
    ----------
    index:
        Signed indices, closed under negation (``0`` allowed).
    kinds:
        Mapping slot kind name -> coefficient group.
    slot_kind:
        Function ``(p, q) -> kind name`` on index values.
    products:
        Mapping ``(kind_a, kind_b) -> (kind_c, f)`` where ``f(x, y)`` takes and
        returns *local* element indices; used for every slot triple whose
        kinds match.
    conj:
        Function ``(p, q) -> g`` where ``g`` maps a local index of slot
        ``(p, q)`` to a local index of slot ``(-q, -p)``.
    """

    def __init__(
        self,
        index: Sequence[int],
        kinds: dict[str, FiniteGroup],
        slot_kind: Callable[[int, int], str],
        products: dict[tuple[str, str], tuple[str, Callable[[int, int], int]]],
        conj: Callable[[int, int], Callable[[int], int]],
        name: str = "R",
    ):
        self.index = tuple(index)
        self.name = name
        self.N = len(self.index)
        self.pos = {v: k for k, v in enumerate(self.index)}
        if set(self.index) != {-v for v in self.index}:
            raise ValueError("index set must be closed under negation")
        self.kinds = dict(kinds)
        self.kind_names = list(self.kinds)
        self.offset = {}
        off = 0
        for k in self.kind_names:
            self.offset[k] = off
            off += self.kinds[k].order
        self.M = off
        N, M = self.N, self.M
        self.slot = np.empty((N, N), dtype=object)
        for p, q in itertools.product(range(N), repeat=2):
            self.slot[p, q] = slot_kind(self.index[p], self.index[q])

        self.kind_of = np.empty(M, dtype=np.int64)
        add = np.full((M, M), -1, dtype=np.int64)
        neg = np.empty(M, dtype=np.int64)
        for ki, k in enumerate(self.kind_names):
            G, o = self.kinds[k], self.offset[k]
            self.kind_of[o : o + G.order] = ki
            add[o : o + G.order, o : o + G.order] = G.add + o
            neg[o : o + G.order] = G.neg + o
        self.add_t, self.neg_t = add, neg
        self.sub_t = add[np.arange(M)[:, None], neg[None, :]]

        mul = np.full((M, M), -1, dtype=np.int64)
        self._products = products
        for (ka, kb), (kc, f) in products.items():
            Ga, Gb = self.kinds[ka], self.kinds[kb]
            oa, ob, oc = self.offset[ka], self.offset[kb], self.offset[kc]
            for x in Ga.elements():
                for y in Gb.elements():
                    mul[oa + x, ob + y] = oc + f(x, y)
        self.mul_t = mul

        self.zero = np.empty((N, N), dtype=np.int64)
        for p, q in itertools.product(range(N), repeat=2):
            k = self.slot[p, q]
            self.zero[p, q] = self.offset[k] + self.kinds[k].zero
        # the involution: one global table per distinct slot map
        self.negpos = np.array([self.pos[-v] for v in self.index])
        tables, ids = [], {}
        self.conj_id = np.empty((N, N), dtype=np.int64)
        for p, q in itertools.product(range(N), repeat=2):
            # target slot (p, q) receives the conjugate of slot (-q, -p)
            sp, sq = self.negpos[q], self.negpos[p]
            src_kind, dst_kind = self.slot[sp, sq], self.slot[p, q]
            g = conj(self.index[sp], self.index[sq])
            G = self.kinds[src_kind]
            table = np.arange(M, dtype=np.int64)
            so, do = self.offset[src_kind], self.offset[dst_kind]
            for x in G.elements():
                table[so + x] = do + g(x)
            key = table.tobytes()
            if key not in ids:
                ids[key] = len(tables)
                tables.append(table)
            self.conj_id[p, q] = ids[key]
        self.conj_t = np.stack(tables)
        # flat gather: target (p, q) reads source (-q, -p)
        perm = np.empty((N, N), dtype=np.int64)
        for p, q in itertools.product(range(N), repeat=2):
            perm[p, q] = self.negpos[q] * N + self.negpos[p]
        self._conj_perm = perm.reshape(-1)
        self._conj_id_flat = self.conj_id.reshape(-1)
        self._conj_single = len(tables) == 1
        self._lin = _linear_encoding(self.kinds) if len(self.kinds) == 1 else None
        # slot triples where the product is defined must have a table entry
        for p, q, r in itertools.product(range(N), repeat=3):
            ka, kb = self.slot[p, q], self.slot[q, r]
            if (ka, kb) not in products:
                raise ValueError(f"no product rule for slots {ka} x {kb}")
            if products[(ka, kb)][0] != self.slot[p, r]:
                raise ValueError(f"product {ka} x {kb} lands in the wrong slot kind")

    # -- arithmetic --------------------------------------------------------
    def add(self, a: Elem, b: Elem) -> Elem:
        return self.add_t[a, b]

    def neg(self, a: Elem) -> Elem:
        return self.neg_t[a]

    def sub(self, a: Elem, b: Elem) -> Elem:
        return self.sub_t[a, b]

    def mul(self, a: Elem, b: Elem) -> Elem:
        if self._lin is not None:
            return self._lin_mul(a, b)
        prod = self.mul_t[a[..., :, :, None], b[..., None, :, :]]
        acc = prod[..., :, 0, :]
        for j in range(1, self.N):
            acc = self.add_t[acc, prod[..., :, j, :]]
        return acc

    def _lin_mul(self, a: Elem, b: Elem) -> Elem:
        enc, mods, strides, dec = self._lin
        # float matmul is exact at these sizes and much faster than int
        code = 0
        for e, n, st in zip(enc, mods, strides):
            code = code + (np.matmul(e[a], e[b]).astype(np.int64) % n) * st
        return dec[code]

    def conj(self, a: Elem) -> Elem:
        N = self.N
        src = a.reshape(a.shape[:-2] + (N * N,))[..., self._conj_perm]
        if self._conj_single:
            return self.conj_t[0][src].reshape(a.shape)
        return self.conj_t[self._conj_id_flat, src].reshape(a.shape)

    def sum(self, elems: Iterable[Elem]) -> Elem:
        acc = self.zero
        for e in elems:
            acc = self.add_t[acc, e]
        return acc

    def eq(self, a: Elem, b: Elem):
        """Equality, batched over leading axes."""
        return np.all(a == b, axis=(-2, -1))

    def is_zero(self, a: Elem):
        return np.all(a == self.zero, axis=(-2, -1))

    def key(self, a: Elem) -> bytes:
        return a.tobytes()

    # -- unitalization R ⋊ Z: elements written as (n, a) meaning n·1 + a ---
    def umul_left(self, n: int, x: Elem, a: Elem) -> Elem:
        """(n + x) a computed inside R."""
        return self.add(self.zmul(n, a), self.mul(x, a))

    def zmul(self, n: int, a: Elem) -> Elem:
        acc = self.zero
        base = a if n >= 0 else self.neg(a)
        for _ in range(abs(n)):
            acc = self.add_t[acc, base]
        return acc

    # -- slot-level helpers ------------------------------------------------
    def coeff_group(self, p: int, q: int) -> FiniteGroup:
        return self.kinds[self.slot[self.pos[p], self.pos[q]]]

    def single(self, p: int, q: int, x: int) -> Elem:
        """The element x·e_pq (x a local index of slot (p, q))."""
        a = self.zero.copy()
        pp, qq = self.pos[p], self.pos[q]
        a[pp, qq] = self.offset[self.slot[pp, qq]] + x
        return a

    def local(self, a: Elem, p: int, q: int) -> int:
        pp, qq = self.pos[p], self.pos[q]
        return int(a[pp, qq]) - self.offset[self.slot[pp, qq]]

    def slot_support(self, a: Elem) -> list[tuple[int, int]]:
        nz = np.nonzero(a != self.zero)
        return [(self.index[p], self.index[q]) for p, q in zip(*nz)]

    def idempotent(self, idx: Iterable[int], one: Callable[[str], int]) -> Elem:
        """Σ 1·e_ii over ``idx`` where ``one(kind)`` gives the local unit."""
        a = self.zero.copy()
        for i in idx:
            p = self.pos[i]
            k = self.slot[p, p]
            a[p, p] = self.offset[k] + one(k)
        return a

    def block(self, rows: Iterable[int], cols: Iterable[int]) -> Iterator[Elem]:
        """Enumerate all elements supported on the rows × cols slots."""
        slots = [(p, q) for p in rows for q in cols]
        groups = [self.coeff_group(p, q) for p, q in slots]
        for vals in itertools.product(*[G.elements() for G in groups]):
            a = self.zero.copy()
            for (p, q), v in zip(slots, vals):
                pp, qq = self.pos[p], self.pos[q]
                a[pp, qq] = self.offset[self.slot[pp, qq]] + v
            yield a

    def block_size(self, rows: Iterable[int], cols: Iterable[int]) -> int:
        n = 1
        for p in rows:
            for q in cols:
                n *= self.coeff_group(p, q).order
        return n

    def map_coeffs(self, target: "BlockRing", maps: dict[str, Callable[[int], int]]) -> Callable[[Elem], Elem]:
        """Slotwise coefficient map into ``target`` (same index set)."""
        table = np.empty(self.M, dtype=np.int64)
        for k in self.kind_names:
            G, o, to = self.kinds[k], self.offset[k], target.offset[k]
            for x in G.elements():
                table[o + x] = to + maps[k](x)
        return lambda a: table[a]

    def random(self, rng: np.random.Generator) -> Elem:
        a = np.empty((self.N, self.N), dtype=np.int64)
        for p, q in itertools.product(range(self.N), repeat=2):
            k = self.slot[p, q]
            a[p, q] = self.offset[k] + int(rng.integers(self.kinds[k].order))
        return a

    def labels(self, a: Elem) -> dict:
        """Human readable nonzero coefficients {(p, q): label}."""
        out = {}
        for p, q in itertools.product(range(self.N), repeat=2):
            if a[p, q] != self.zero[p, q]:
                k = self.slot[p, q]
                out[(self.index[p], self.index[q])] = self.kinds[k].lab(int(a[p, q]) - self.offset[k])
        return out


def _linear_encoding(kinds: dict[str, FiniteGroup]):
    """Detect a coefficient ring that is a subring of a product of Z/n's.

    Labels must be ints or tuples of ints with componentwise modular
    arithmetic; then matrix products reduce to integer matmuls.
    """
    (G,) = kinds.values()
    mul = getattr(G, "mul", None)
    if mul is None:
        return None
    labs = [l if isinstance(l, tuple) else (l,) for l in G.labels]
    if not all(isinstance(x, (int, np.integer)) for l in labs for x in l):
        return None
    c = len(labs[0])
    if any(len(l) != c for l in labs):
        return None
    enc = np.array(labs, dtype=np.int64)
    if enc.size and int(enc.max()) ** 2 * 64 >= 2**52:
        return None
    mods = []
    for k in range(c):
        # smallest modulus consistent with the addition table
        n = int(enc[:, k].max()) + 1
        mods.append(n)
    mods_a = np.array(mods)
    sums = (enc[:, None, :] + enc[None, :, :]) % mods_a
    prods = (enc[:, None, :] * enc[None, :, :]) % mods_a
    if not (np.array_equal(sums, enc[G.add]) and np.array_equal(prods, enc[mul])):
        return None
    strides = np.cumprod([1] + mods[:-1]).tolist()
    dec = np.full(int(np.prod(mods)), -1, dtype=np.int64)
    dec[enc @ np.array(strides)] = np.arange(G.order)
    cols = [np.ascontiguousarray(enc[:, k], dtype=np.float64) for k in range(c)]
    return cols, mods, strides, dec

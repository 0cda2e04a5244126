"""Pairs of type B, C, F, admissible pairs, and the odd form rings ofaorth / ofasymp.

A pair stores its structure maps as integer tables over element indices of
:class:`~relsteinberg.rings.FiniteRing` / :class:`~relsteinberg.rings.FiniteGroup`.
Semidirect pairs (𝔞⋊K, 𝔟⋊L) are realized as fiber products
{(x, y) : x − y ∈ 𝔞}, so the reflexive graph maps are coordinate projections
and the diagonal.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .blockring import BlockRing
from .oddform import (
    CrossedModule,
    HeisOddFormRing,
    HyperbolicFamily,
    Morphism,
    OddFormRing,
    heis_morphism,
    stack_delta,
)
from .report import Report
from .rings import FiniteGroup, FiniteRing, fiber_product, tensor_product


def _table(G: FiniteGroup, f: Callable) -> np.ndarray:
    return np.array([f(x) for x in G.elements()], dtype=np.int64)


def _table2(A: FiniteGroup, B: FiniteGroup, f: Callable) -> np.ndarray:
    return np.array([[f(x, y) for y in B.elements()] for x in A.elements()], dtype=np.int64)


# ---------------------------------------------------------------------------
# pairs


@dataclass
class PairB:
    """L a ring, K an L-module (k·l = smul[k, l]), s: K → L quadratic."""

    L: FiniteRing
    K: FiniteGroup
    smul: np.ndarray
    s: np.ndarray
    name: str = "B"
    kind: str = "B"

    def sbil(self, k, k2):
        L, K = self.L, self.K
        return L.sub[L.sub[self.s[K.add[k, k2]], self.s[k]], self.s[k2]]


@dataclass
class PairC:
    """K a ring, L a group; d: K → L, u: L → K, dot[l, k] = l·k."""

    K: FiniteRing
    L: FiniteGroup
    d: np.ndarray
    u: np.ndarray
    dot: np.ndarray
    name: str = "C"
    kind: str = "C"


@dataclass
class PairF:
    """K, L rings; u: L → K unital; d, s: K → L."""

    K: FiniteRing
    L: FiniteRing
    u: np.ndarray
    d: np.ndarray
    s: np.ndarray
    name: str = "F"
    kind: str = "F"

    def as_B(self) -> PairB:
        K, L = self.K, self.L
        smul = _table2(K, L, lambda k, l: int(K.mul[k, self.u[l]]))
        return PairB(L, K, smul, self.s.copy(), name=self.name + "→B")

    def as_C(self) -> PairC:
        K, L = self.K, self.L
        dot = _table2(L, K, lambda l, k: int(L.mul[l, self.s[k]]))
        return PairC(K, L, self.d.copy(), self.u.copy(), dot, name=self.name + "→C")


Pair = PairB | PairC | PairF


def FF(K: FiniteRing) -> PairF:
    """(K, K) with u = id, d(k) = 2k, s(k) = k²."""
    ident = np.arange(K.order, dtype=np.int64)
    d = _table(K, lambda k: int(K.add[k, k]))
    s = _table(K, lambda k: int(K.mul[k, k]))
    return PairF(K, K, ident, d, s, name=f"FF({K.name})")


def check_pair(p: Pair) -> Report:
    """Every axiom of the pair's type on all tuples of elements."""
    rep = Report(f"pair-{p.kind}", meta={"pair": p.name})
    if p.kind == "B":
        _check_B(p, rep)
    elif p.kind == "C":
        _check_C(p, rep)
    else:
        _check_F(p, rep)
    return rep


def _ring_axioms(rep: Report, L: FiniteRing, tag: str) -> None:
    e = L.elements()
    rep.record(f"{tag} unital", L.one is not None)
    rep.record(f"{tag} commutative", bool(np.array_equal(L.mul, L.mul.T)))
    for a, b, c in itertools.product(e, repeat=3):
        rep.record(f"{tag} associative", int(L.mul[L.mul[a, b], c]) == int(L.mul[a, L.mul[b, c]]), (a, b, c))
        rep.record(f"{tag} distributive", int(L.mul[a, L.add[b, c]]) == int(L.add[L.mul[a, b], L.mul[a, c]]), (a, b, c))


def _check_B(p: PairB, rep: Report) -> None:
    L, K, sm, s = p.L, p.K, p.smul, p.s
    _ring_axioms(rep, L, "L")
    for k in K.elements():
        rep.record("k·1 = k", int(sm[k, L.one]) == k, k)
        for l in L.elements():
            rep.record("s(kl) = s(k)l²", int(s[sm[k, l]]) == int(L.mul[s[k], L.mul[l, l]]), (k, l))
            for l2 in L.elements():
                rep.record("k(l+l′) = kl + kl′", int(sm[k, L.add[l, l2]]) == int(K.add[sm[k, l], sm[k, l2]]), (k, l, l2))
                rep.record("(kl)l′ = k(ll′)", int(sm[sm[k, l], l2]) == int(sm[k, L.mul[l, l2]]), (k, l, l2))
        for k2 in K.elements():
            for l in L.elements():
                rep.record("(k+k′)l = kl + k′l", int(sm[K.add[k, k2], l]) == int(K.add[sm[k, l], sm[k2, l]]), (k, k2, l))
                rep.record("s(·|·) L-bilinear", int(p.sbil(sm[k, l], k2)) == int(L.mul[p.sbil(k, k2), l]), (k, k2, l))
            for k3 in K.elements():
                rep.record(
                    "s(·|·) additive",
                    int(p.sbil(K.add[k, k3], k2)) == int(L.add[p.sbil(k, k2), p.sbil(k3, k2)]),
                    (k, k2, k3),
                )


def _check_C(p: PairC, rep: Report) -> None:
    K, L, d, u, dot = p.K, p.L, p.d, p.u, p.dot
    _ring_axioms(rep, K, "K")
    two = lambda x: int(K.add[x, x])
    for k in K.elements():
        rep.record("u(d(k)) = 2k", int(u[d[k]]) == two(k), k)
        for k2 in K.elements():
            rep.record("d additive", int(d[K.add[k, k2]]) == int(L.add[d[k], d[k2]]), (k, k2))
            rep.record("d(k)·k′ = d(kk′²)", int(dot[d[k], k2]) == int(d[K.mul[k, K.mul[k2, k2]]]), (k, k2))
    for l in L.elements():
        rep.record("d(u(l)) = 2l", int(d[u[l]]) == int(L.add[l, l]), l)
        rep.record("l·1 = l", int(dot[l, K.one]) == l, l)
        for l2 in L.elements():
            rep.record("u additive", int(u[L.add[l, l2]]) == int(K.add[u[l], u[l2]]), (l, l2))
        for k in K.elements():
            rep.record("u(l·k) = u(l)k²", int(u[dot[l, k]]) == int(K.mul[u[l], K.mul[k, k]]), (l, k))
            for l2 in L.elements():
                rep.record("(l+l′)·k = l·k + l′·k", int(dot[L.add[l, l2], k]) == int(L.add[dot[l, k], dot[l2, k]]), (l, l2, k))
            for k2 in K.elements():
                rep.record("(l·k)·k′ = l·kk′", int(dot[dot[l, k], k2]) == int(dot[l, K.mul[k, k2]]), (l, k, k2))
                rhs = L.add[L.add[dot[l, k], d[K.mul[K.mul[k, k2], u[l]]]], dot[l, k2]]
                rep.record("l·(k+k′) = l·k + d(kk′u(l)) + l·k′", int(dot[l, K.add[k, k2]]) == int(rhs), (l, k, k2))


def _check_F(p: PairF, rep: Report) -> None:
    K, L, u, d, s = p.K, p.L, p.u, p.d, p.s
    _ring_axioms(rep, K, "K")
    _ring_axioms(rep, L, "L")
    rep.record("u unital", int(u[L.one]) == K.one)
    for l in L.elements():
        rep.record("d(u(l)) = 2l", int(d[u[l]]) == int(L.add[l, l]), l)
        rep.record("s(u(l)) = l²", int(s[u[l]]) == int(L.mul[l, l]), l)
        for l2 in L.elements():
            rep.record("u additive", int(u[L.add[l, l2]]) == int(K.add[u[l], u[l2]]), (l, l2))
            rep.record("u multiplicative", int(u[L.mul[l, l2]]) == int(K.mul[u[l], u[l2]]), (l, l2))
    for k in K.elements():
        rep.record("u(d(k)) = 2k", int(u[d[k]]) == int(K.add[k, k]), k)
        rep.record("u(s(k)) = k²", int(u[s[k]]) == int(K.mul[k, k]), k)
        for l in L.elements():
            rep.record("d(ku(l)) = d(k)l", int(d[K.mul[k, u[l]]]) == int(L.mul[d[k], l]), (k, l))
        for k2 in K.elements():
            rep.record("d additive", int(d[K.add[k, k2]]) == int(L.add[d[k], d[k2]]), (k, k2))
            rep.record("s(k+k′) = s(k) + d(kk′) + s(k′)", int(s[K.add[k, k2]]) == int(L.add[L.add[s[k], d[K.mul[k, k2]]], s[k2]]), (k, k2))
            rep.record("s(kk′) = s(k)s(k′)", int(s[K.mul[k, k2]]) == int(L.mul[s[k], s[k2]]), (k, k2))


def corrupt_pair_d(p: PairC | PairF) -> PairC | PairF:
    """Planted table error: d(1) replaced by −d(1)."""
    import copy

    q = copy.deepcopy(p)
    one = p.K.one
    q.d[one] = int(p.L.neg[p.d[one]])
    q.name = p.name + "+fault"
    return q


# ---------------------------------------------------------------------------
# admissible pairs and crossed pairs


def ideal_from_generators(K: FiniteRing, gens: Iterable[int]) -> list[int]:
    """Ideal of K generated by the given element indices."""
    return K.generated(int(K.mul[k, g]) for k in K.elements() for g in gens)


def subgroup_from_generators(G: FiniteGroup, gens: Iterable[int]) -> list[int]:
    return G.generated(gens)


def admissible(K: FiniteRing, a: Iterable[int], b: Iterable[int], kind: str) -> bool:
    """2𝔞 + Σ_{a∈𝔞} Ka² ≤ 𝔟 ≤ 𝔞 plus 𝔟k² ≤ 𝔟 (type C) or 𝔟 an ideal (types B, F)."""
    a, b = set(a), set(b)
    if not K.is_ideal(a) or not K.is_subgroup(b):
        return False
    if not b <= a:
        return False
    lower = {int(K.add[x, x]) for x in a} | {int(K.mul[k, K.mul[x, x]]) for k in K.elements() for x in a}
    if not set(K.generated(lower)) <= b:
        return False
    if kind == "C":
        return all(int(K.mul[y, K.mul[k, k]]) in b for y in b for k in K.elements())
    return K.is_ideal(b)


@dataclass
class CrossedPair:
    """Reflexive graph ((K, L), (K′, L′), p1, p2, d) of pairs; (𝔞, 𝔟) = Ker p2.

    Maps are index tables: ``pK[i]: K′ → K``, ``pL[i]: L′ → L``,
    ``dK: K → K′``, ``dL: L → L′``.
    """

    target: Pair
    total: Pair
    p1K: np.ndarray
    p2K: np.ndarray
    p1L: np.ndarray
    p2L: np.ndarray
    dK: np.ndarray
    dL: np.ndarray
    name: str = "δ"
    a: list[int] = field(default_factory=list)
    b: list[int] = field(default_factory=list)


def _KL(p: Pair):
    return (p.K, p.L)


def semidirect_pair(p: Pair, a: Iterable[int], b: Iterable[int], name: str | None = None) -> CrossedPair:
    """(𝔞⋊K, 𝔟⋊L) as fiber products, with the componentwise structure maps.

    ``a`` lives in the short-root carrier K, ``b`` in the long-root carrier L.
    """
    a, b = sorted(set(a)), sorted(set(b))
    K, L = _KL(p)
    Kring = isinstance(K, FiniteRing) and p.kind != "B"
    Lring = isinstance(L, FiniteRing) and p.kind != "C"
    K2 = fiber_product(K, a, name=f"𝔞⋊{K.name}", ring=Kring)
    L2 = fiber_product(L, b, name=f"𝔟⋊{L.name}", ring=Lring)

    def pair_idx(G2, G, x, y):
        return G2.index[(G.lab(x), G.lab(y))]

    def comp(G2, G):
        c1 = np.array([G.index[G2.lab(i)[0]] for i in G2.elements()])
        c2 = np.array([G.index[G2.lab(i)[1]] for i in G2.elements()])
        return c1, c2

    k1, k2 = comp(K2, K)
    l1, l2 = comp(L2, L)
    dK = np.array([pair_idx(K2, K, x, x) for x in K.elements()])
    dL = np.array([pair_idx(L2, L, x, x) for x in L.elements()])

    def lift1(t, Dst2, Dst, src1, src2):
        return np.array([pair_idx(Dst2, Dst, t[src1[i]], t[src2[i]]) for i in range(len(src1))])

    def lift2(t, A2c, B2c, Dst2, Dst):
        (a1, a2), (b1, b2) = A2c, B2c
        return np.array(
            [[pair_idx(Dst2, Dst, t[a1[i], b1[j]], t[a2[i], b2[j]]) for j in range(len(b1))] for i in range(len(a1))]
        )

    nm = name or f"({p.name}; 𝔞={[K.lab(x) for x in a]}, 𝔟={[L.lab(x) for x in b]})"
    if p.kind == "B":
        tot = PairB(L2, K2, lift2(p.smul, (k1, k2), (l1, l2), K2, K), lift1(p.s, L2, L, k1, k2), name=nm)
    elif p.kind == "C":
        tot = PairC(
            K2, L2, lift1(p.d, L2, L, k1, k2), lift1(p.u, K2, K, l1, l2),
            lift2(p.dot, (l1, l2), (k1, k2), L2, L), name=nm,
        )
    else:
        tot = PairF(
            K2, L2, lift1(p.u, K2, K, l1, l2), lift1(p.d, L2, L, k1, k2), lift1(p.s, L2, L, k1, k2), name=nm
        )
    return CrossedPair(p, tot, k1, k2, l1, l2, dK, dL, name=nm, a=a, b=b)


def admissible_crossed_pair(p: Pair, a_gens: Iterable[int], b_gens: Iterable[int]) -> CrossedPair:
    """Crossed pair of an admissible (𝔞, 𝔟) given by generators (ideal and subgroup)."""
    K, L = _KL(p)
    a = ideal_from_generators(K, a_gens)
    b = subgroup_from_generators(L, b_gens)
    if p.kind in ("B", "F"):
        b = ideal_from_generators(L, b_gens)
    if p.kind == "F" or isinstance(L, FiniteRing) and K is L:
        if not admissible(K, a, b, p.kind):
            raise ValueError("(𝔞, 𝔟) is not admissible")
    return semidirect_pair(p, a, b)


def crossed_pair_as(cp: CrossedPair, kind: str) -> CrossedPair:
    """Translate a type-F crossed pair to its derived type B or C structure."""
    if cp.target.kind != "F":
        raise ValueError("only type F pairs have derived structures")
    conv = (lambda q: q.as_B()) if kind == "B" else (lambda q: q.as_C())
    return CrossedPair(
        conv(cp.target), conv(cp.total), cp.p1K, cp.p2K, cp.p1L, cp.p2L, cp.dK, cp.dL,
        name=cp.name + f"→{kind}", a=cp.a, b=cp.b,
    )


def check_crossed_pair(cp: CrossedPair) -> Report:
    """The total pair satisfies its axioms; p1, p2, d respect the structure; p_i d = id."""
    rep = check_pair(cp.total)
    rep.check = "crossed-pair"
    T, P = cp.total, cp.target
    Kt, Lt = _KL(T)
    K, L = _KL(P)
    for nm, pK, pL in (("p1", cp.p1K, cp.p1L), ("p2", cp.p2K, cp.p2L)):
        rep.record(f"{nm}∘d = id", bool(np.array_equal(pK[cp.dK], np.arange(K.order)) and np.array_equal(pL[cp.dL], np.arange(L.order))))
        for x, y in itertools.product(Kt.elements(), repeat=2):
            rep.record(f"{nm} additive on K", int(pK[Kt.add[x, y]]) == int(K.add[pK[x], pK[y]]), (x, y))
        for x, y in itertools.product(Lt.elements(), repeat=2):
            rep.record(f"{nm} additive on L", int(pL[Lt.add[x, y]]) == int(L.add[pL[x], pL[y]]), (x, y))
        maps = _structure_maps(T)
        tmaps = _structure_maps(P)
        for key, (src, f) in maps.items():
            g = tmaps[key][1]
            if src == "K":
                for x in Kt.elements():
                    rep.record(f"{nm} preserves {key}", _apply_out(key, pK, pL, f(x)) == g(int(pK[x])), x)
            elif src == "L":
                for x in Lt.elements():
                    rep.record(f"{nm} preserves {key}", _apply_out(key, pK, pL, f(x)) == g(int(pL[x])), x)
            else:
                for x, y in itertools.product(*[Kt.elements() if c == "K" else Lt.elements() for c in src]):
                    px = int(pK[x]) if src[0] == "K" else int(pL[x])
                    py = int(pK[y]) if src[1] == "K" else int(pL[y])
                    rep.record(f"{nm} preserves {key}", _apply_out(key, pK, pL, f(x, y)) == g(px, py), (x, y))
    return rep


_OUT = {"d": "L", "u": "K", "s": "L", "dot": "L", "smul": "K", "mulK": "K", "mulL": "L"}


def _apply_out(key, pK, pL, v):
    return int(pK[v]) if _OUT[key] == "K" else int(pL[v])


def _structure_maps(p: Pair) -> dict:
    out = {}
    if p.kind in ("C", "F"):
        out["d"] = ("K", lambda x: int(p.d[x]))
        out["u"] = ("L", lambda x: int(p.u[x]))
        out["mulK"] = ("KK", lambda x, y: int(p.K.mul[x, y]))
    if p.kind == "C":
        out["dot"] = ("LK", lambda x, y: int(p.dot[x, y]))
    if p.kind in ("B", "F"):
        out["s"] = ("K", lambda x: int(p.s[x]))
        out["mulL"] = ("LL", lambda x, y: int(p.L.mul[x, y]))
    if p.kind == "B":
        out["smul"] = ("KL", lambda x, y: int(p.smul[x, y]))
    return out


# ---------------------------------------------------------------------------
# ofasymp(2ℓ; K, L)


def _signed(ell: int) -> list[int]:
    return [i for i in range(-ell, ell + 1) if i != 0]


def asymp_ring(K: FiniteRing, ell: int, name: str | None = None) -> BlockRing:
    """⊕ K e_ij with (x e_ij)̄ = ε_iε_j x e_{−j,−i}."""
    neg = lambda x: int(K.neg[x])
    ident = lambda x: x
    sgn = lambda i: 1 if i > 0 else -1
    return BlockRing(
        _signed(ell),
        {"K": K},
        lambda p, q: "K",
        {("K", "K"): ("K", lambda x, y: int(K.mul[x, y]))},
        lambda p, q: ident if sgn(p) * sgn(q) > 0 else neg,
        name=name or f"M_{2 * ell}({K.name})",
    )


class AsympOddFormRing(OddFormRing):
    """ofasymp(2ℓ; K, L) with Δ in the normal form (c, l, P).

    c ∈ ⊕_{i+j>0} K e_ij stands for φ(c), l ∈ L^{2ℓ} for ∔ l_i v_i and P for
    ∔_i q_i·(e_i P) in increasing row order; an element is φ(c) ∔ Σ l_i v_i ∔ Q(P).
    """

    dtrail = (2, 1, 2)

    def __init__(self, pair: PairC, ell: int, name: str | None = None):
        R = asymp_ring(pair.K, ell)
        super().__init__(R, name or f"ofasymp({2 * ell}; {pair.name})")
        self.pair, self.ell = pair, ell
        self.K, self.L = pair.K, pair.L
        idx = np.array(R.index)
        N = R.N
        self.eps = np.where(idx > 0, 1, -1)
        self.mask = (idx[:, None] + idx[None, :]) > 0
        self.rowpos = (idx > 0)[:, None] & np.ones((1, N), bool)
        self.rowneg = (idx < 0)[:, None] & np.ones((1, N), bool)
        self.sign = self.eps[:, None] * self.eps[None, :]
        self.tri = np.arange(N)[None, :] < np.arange(N)[:, None]  # [k′, k]: k < k′
        self.negpos = R.negpos
        self.ar = np.arange(N)
        self.lzero = np.full(N, self.L.zero, dtype=np.int64)
        self.family = HyperbolicFamily(
            {i: R.single(i, i, self.K.one) for i in R.index},
            {i: (R.zero, self.lzero, R.single(i, i, self.K.one)) for i in R.index},
            ell,
        )

    # central coordinates of φ
    def _phi_c(self, a):
        K, R = self.K, self.R
        return np.where(self.mask, K.sub[a, R.conj(a)], K.zero)

    def _phi_l(self, a):
        return self.pair.d[a[..., self.negpos, self.ar]]

    def dzero(self):
        R = self.R
        return (R.zero, self.lzero, R.zero)

    def phi(self, a):
        a = np.asarray(a)
        return (self._phi_c(a), self._phi_l(a), np.broadcast_to(self.R.zero, a.shape))

    def _Em(self, X):
        return np.where(self.rowneg, X, self.K.zero)

    def _Ep(self, X):
        return np.where(self.rowpos, X, self.K.zero)

    def dadd(self, u, v):
        R, K, L = self.R, self.K, self.L
        c, l, P = u
        c2, l2, P2 = v
        corr = R.neg(R.mul(R.conj(P), self._Em(P2)))
        c3 = K.add[K.add[c, c2], self._phi_c(corr)]
        l3 = L.add[L.add[l, l2], self._phi_l(corr)]
        return (c3, l3, K.add[P, P2])

    def dneg(self, u):
        R, K, L = self.R, self.K, self.L
        c, l, P = u
        corr = R.neg(R.mul(R.conj(P), self._Em(P)))
        return (K.add[K.neg[c], self._phi_c(corr)], L.add[L.neg[l], self._phi_l(corr)], K.neg[P])

    def pi(self, u):
        return u[2]

    def _U(self, l):
        """Σ u(l_i) e_{−i,i}."""
        K = self.K
        ul = self.pair.u[l]
        out = np.full(l.shape + (self.R.N,), K.zero, dtype=np.int64)
        out[..., self.negpos, self.ar] = ul
        return out

    def rho(self, u):
        R, K = self.R, self.K
        c, l, P = u
        r = K.sub[c, R.conj(c)]
        r = K.add[r, self._U(l)]
        return K.sub[r, R.mul(R.conj(P), self._Ep(P))]

    def act(self, u, a):
        R, K, L = self.R, self.K, self.L
        c, l, P = u
        a = np.asarray(a)
        c, l, P, a = _bcast(c, l, P, a)
        # φ(ā c a)
        y = R.mul(R.mul(R.conj(a), c), a)
        # (l_i v_i)·a: φ-correction Y at (−k′, k) and the v-coordinates
        ux = self.pair.u[l]
        t1 = K.mul[ux[..., :, None], a]  # u(l_i) a_ik
        M = K.mul[a[..., :, :, None], t1[..., :, None, :]]  # [i, k′, k] = a_ik′ u(l_i) a_ik
        M = np.where(self.sign[:, :, None] < 0, K.neg[M], M)
        M = np.where(self.tri[None], M, K.zero)
        acc = M[..., 0, :, :]
        for i in range(1, R.N):
            acc = K.add[acc, M[..., i, :, :]]
        Y = acc[..., self.negpos, :]
        y = K.add[y, Y]
        V = self.pair.dot[l[..., :, None], a]  # [i, k] = l_i·a_ik
        V = np.where(self.sign < 0, L.neg[V], V)
        v = V[..., 0, :]
        for i in range(1, R.N):
            v = L.add[v, V[..., i, :]]
        return (self._phi_c(y), L.add[self._phi_l(y), v], R.mul(P, a))

    def delta_generators(self):
        R, K, L = self.R, self.K, self.L
        out = []
        for i, j in itertools.product(R.index, repeat=2):
            for x in K.elements():
                if x == K.zero:
                    continue
                if i + j > 0:
                    out.append(self.phi(R.single(i, j, x)))
                out.append((R.zero, self.lzero, R.single(i, j, x)))
        for i in R.index:
            for x in L.elements():
                if x != L.zero:
                    out.append((R.zero, self._lvec(i, x), R.zero))
        return out

    def _lvec(self, i, x):
        l = self.lzero.copy()
        l[self.R.pos[i]] = x
        return l

    def theta0(self, j):
        return [(self.R.zero, self._lvec(j, x), self.R.zero) for x in self.L.elements()]

    def describe(self, u):
        c, l, P = u
        R = self.R
        return {
            "phi": R.labels(c),
            "v": {R.index[p]: self.L.lab(int(l[p])) for p in range(R.N) if l[p] != self.L.zero},
            "q": R.labels(P),
        }

    def heis(self, u):
        """(π, ρ): Δ → Heis(R)."""
        return (self.pi(u), self.rho(u))


def _bcast(*arrs):
    """Broadcast batch axes of (c, l, P, a) against each other."""
    c, l, P, a = arrs
    batch = np.broadcast_shapes(c.shape[:-2], l.shape[:-1], P.shape[:-2], a.shape[:-2])
    N = c.shape[-1]
    return (
        np.broadcast_to(c, batch + (N, N)),
        np.broadcast_to(l, batch + (N,)),
        np.broadcast_to(P, batch + (N, N)),
        np.broadcast_to(a, batch + (N, N)),
    )


def _u_injective(p: PairC) -> bool:
    return len(set(p.u.tolist())) == p.L.order


def ofasymp(ell: int, pair: Pair, model: str = "auto") -> OddFormRing:
    """ofasymp(2ℓ; K, L).

    ``model='nf'`` gives the normal-form Δ; ``'heis'`` (allowed when u is
    injective, so the ring is special) realizes Δ inside Heis(R);
    ``'auto'`` picks ``'heis'`` when possible.
    """
    if pair.kind == "F":
        pair = pair.as_C()
    if pair.kind != "C":
        raise ValueError("ofasymp needs a pair of type C")
    if model == "auto":
        model = "heis" if _u_injective(pair) else "nf"
    nf = AsympOddFormRing(pair, ell)
    if model == "nf":
        return nf
    if not _u_injective(pair):
        raise ValueError("u is not injective: ofasymp is not special")
    R = nf.R
    gens = [nf.heis(g) for g in nf.delta_generators()]

    def theta0(j):
        return [nf.heis(t) for t in nf.theta0(j)]

    ofr = HeisOddFormRing(R, gens, name=nf.name, theta0=theta0)
    ofr.pair, ofr.ell, ofr.nf = pair, ell, nf
    ofr.family = HyperbolicFamily(
        dict(nf.family.e), {i: nf.heis(q) for i, q in nf.family.q.items()}, ell
    )
    return ofr


# ---------------------------------------------------------------------------
# ofaorth(2ℓ+1; K, L)


def orth_ring(pair: PairB, ell: int, extra=(), name: str | None = None):
    """The ring of ofaorth; returns (BlockRing, pure, expand) for slot 00."""
    K, L, sm = pair.K, pair.L, pair.smul
    X, pure, expand = tensor_product(
        K, K, scalars=list(L.elements()),
        act_right=lambda k, l: int(sm[k, l]), act_left=lambda l, k: int(sm[k, l]),
        name=f"{K.name}⊗{K.name}", extra=extra,
    )
    sb = lambda x, y: int(pair.sbil(x, y))

    def kind(p, q):
        if p == 0 and q == 0:
            return "X"
        if q == 0:
            return "C"
        if p == 0:
            return "W"
        return "L"

    def tsum(terms):
        acc = X.zero
        for c, (x, y) in terms:
            acc = X.add[acc, X.smul(c, pure(x, y))]
        return int(acc)

    def ksum(vals):
        acc = K.zero
        for c, v in vals:
            acc = int(K.add[acc, K.smul(c, v)])
        return acc

    products = {
        ("L", "L"): ("L", lambda x, y: int(L.mul[x, y])),
        ("L", "C"): ("C", lambda x, y: int(sm[y, x])),
        ("W", "L"): ("W", lambda x, y: int(sm[x, y])),
        ("W", "C"): ("X", lambda x, y: pure(x, y)),
        ("C", "W"): ("L", sb),
        ("C", "X"): ("C", lambda x, t: ksum((c, int(sm[z, sb(x, y)])) for c, (y, z) in expand(t))),
        ("X", "W"): ("W", lambda t, z: ksum((c, int(sm[x, sb(y, z)])) for c, (x, y) in expand(t))),
        ("X", "X"): (
            "X",
            lambda t, t2: tsum(
                (c * c2, (x, int(sm[w, sb(y, z)])))
                for c, (x, y) in expand(t)
                for c2, (z, w) in expand(t2)
            ),
        ),
    }
    swap = lambda t: tsum((c, (y, x)) for c, (x, y) in expand(t))
    ident = lambda x: x
    R = BlockRing(
        list(range(-ell, ell + 1)),
        {"X": X, "C": K, "W": K, "L": L},
        kind,
        products,
        lambda p, q: swap if (p == 0 and q == 0) else ident,
        name=name or f"R_{2 * ell + 1}",
    )
    return R, pure, expand


def ofaorth(ell: int, pair: Pair, extra=(), materialize: bool | None = None, name: str | None = None) -> HeisOddFormRing:
    """ofaorth(2ℓ+1; K, L), a special odd form ring with Δ generated inside Heis(R)."""
    if pair.kind == "F":
        pair = pair.as_B()
    if pair.kind != "B":
        raise ValueError("ofaorth needs a pair of type B")
    K, L, sm, s = pair.K, pair.L, pair.smul, pair.s
    R, pure, expand = orth_ring(pair, ell, extra)
    gens = []
    nz = lambda G: [x for x in G.elements() if x != G.zero]
    for p, q in itertools.product(R.index, repeat=2):
        for x in nz(R.coeff_group(p, q)):
            a = R.single(p, q, x)
            phi = (R.zero, R.sub(a, R.conj(a)))
            if not R.is_zero(phi[1]):
                gens.append(phi)
            if p != 0:
                gens.append((a, R.zero))  # (x e_i0, 0) and (x e_ij, 0)
    for j in R.index:
        if j == 0:
            continue
        for x in nz(K):
            gens.append(_orth_theta(R, pair, j, x))
    for x, y in itertools.product(K.elements(), repeat=2):
        t = pure(x, y)
        t2 = pure(int(sm[y, s[x]]), y)
        m = R.single(0, 0, t)
        r = R.neg(R.single(0, 0, t2))
        if not (R.is_zero(m) and R.is_zero(r)):
            gens.append((m, r))
    gens = _dedupe(gens)

    def theta0(j):
        return [_orth_theta(R, pair, j, x) for x in K.elements()]

    nm = name or f"ofaorth({2 * ell + 1}; {pair.name})"
    if materialize is None:
        materialize = False
    ofr = HeisOddFormRing(R, gens, name=nm, theta0=theta0, materialize=materialize)
    one = L.one
    ofr.family = HyperbolicFamily(
        {i: R.single(i, i, one) for i in R.index if i},
        {i: (R.single(i, i, one), R.zero) for i in R.index if i},
        ell,
    )
    ofr.pair, ofr.ell, ofr.pure, ofr.expand = pair, ell, pure, expand
    return ofr


def _orth_theta(R: BlockRing, pair: PairB, j: int, x: int):
    """(x e_0j, −s(x) e_{−j,j})."""
    return (R.single(0, j, x), R.neg(R.single(-j, j, int(pair.s[x]))))


def _dedupe(gens):
    seen, out = set(), []
    for g in gens:
        k = b"|".join(c.tobytes() for c in g)
        if k not in seen:
            seen.add(k)
            out.append(g)
    return out


# ---------------------------------------------------------------------------
# crossed modules of odd form rings


def _coeff_maps(src: BlockRing, dst: BlockRing, maps: dict) -> Callable:
    return src.map_coeffs(dst, maps)


def crossed_ofasymp(cp: CrossedPair, ell: int, model: str = "auto") -> CrossedModule:
    """δ: ofasymp(ℓ; 𝔞, 𝔟) → ofasymp(ℓ; K, L) via Ker(p2) of ofasymp over (𝔞⋊K, 𝔟⋊L)."""
    if cp.target.kind == "F":
        cp = crossed_pair_as(cp, "C")
    T = ofasymp(ell, cp.total, model=model)
    R = ofasymp(ell, cp.target, model="heis" if T.special else "nf")
    mk = lambda tab: _coeff_maps(T.R, R.R, {"K": lambda x, t=tab: int(t[x])})
    dk = _coeff_maps(R.R, T.R, {"K": lambda x: int(cp.dK[x])})
    if T.special:
        p1, p2, d = heis_morphism(mk(cp.p1K)), heis_morphism(mk(cp.p2K)), heis_morphism(dk)
    else:
        def nfm(fk, tabL):
            return Morphism(fk, lambda u, fk=fk, tabL=tabL: (fk(u[0]), tabL[u[1]], fk(u[2])))

        p1, p2, d = nfm(mk(cp.p1K), cp.p1L), nfm(mk(cp.p2K), cp.p2L), nfm(dk, cp.dL)
    return CrossedModule(R, T, p1, p2, d, name=f"ofasymp {cp.name}", meta={"ell": ell, "kind": "C"})


def crossed_ofaorth(cp: CrossedPair, ell: int) -> CrossedModule:
    """δ: (S, Θ) → ofaorth(2ℓ+1; K, L) from the special factor of ofaorth over (𝔞⋊K, 𝔟⋊L).

    The factor ring by the ideal I generated by (a⊗a′ − a⊗δa′)e₀₀ and
    (a⊗a′ − δa⊗a′)e₀₀ is built by adding these as relations of the tensor slot.
    """
    if cp.target.kind == "F":
        cp = crossed_pair_as(cp, "B")
    tot, tgt = cp.total, cp.target
    K2 = tot.K
    a_elems = [x for x in K2.elements() if cp.p2K[x] == tgt.K.zero]
    delta = lambda x: int(cp.dK[cp.p1K[x]])
    extra = []
    for x, y in itertools.product(a_elems, repeat=2):
        extra.append([(1, (x, y)), (-1, (x, delta(y)))])
        extra.append([(1, (x, y)), (-1, (delta(x), y))])
    T = ofaorth(ell, tot, extra=extra)
    R = ofaorth(ell, tgt)

    def tensor_map(src, dst, kmap):
        return lambda t: _tsum(dst.R.kinds["X"], dst.pure, [(c, (int(kmap[x]), int(kmap[y]))) for c, (x, y) in src.expand(t)])

    def ring_map(src, dst, kmap, lmap):
        maps = {
            "X": tensor_map(src, dst, kmap),
            "C": lambda x: int(kmap[x]),
            "W": lambda x: int(kmap[x]),
            "L": lambda x: int(lmap[x]),
        }
        return heis_morphism(src.R.map_coeffs(dst.R, maps))

    p1 = ring_map(T, R, cp.p1K, cp.p1L)
    p2 = ring_map(T, R, cp.p2K, cp.p2L)
    d = ring_map(R, T, cp.dK, cp.dL)
    cm = CrossedModule(R, T, p1, p2, d, name=f"ofaorth {cp.name}", meta={"ell": ell, "kind": "B"})
    cm.ideal_report = _ideal_report(tot, ell, extra, T)
    return cm


def _tsum(X, pure, terms) -> int:
    acc = X.zero
    for c, (x, y) in terms:
        acc = X.add[acc, X.smul(c, pure(x, y))]
    return int(acc)


def _ideal_report(pair: PairB, ell: int, extra, T) -> Report:
    """I is a two-sided involution-invariant ideal: products with ring generators
    and conjugates of its generators vanish in the factor ring."""
    Rf, pure_f, expand_f = orth_ring(pair, ell)
    X = T.R.kinds["X"]
    quot = lambda t: _tsum(X, T.pure, expand_f(t))
    q = Rf.map_coeffs(T.R, {"X": quot, "C": lambda x: x, "W": lambda x: x, "L": lambda x: x})
    rep = Report("ideal-I", meta={"pair": pair.name})
    Xf = Rf.kinds["X"]
    gens = []
    for terms in extra:
        t = _tsum(Xf, pure_f, [(c % Xf.order if c > 0 else 0, p) for c, p in terms if c > 0])
        t2 = _tsum(Xf, pure_f, [(1, p) for c, p in terms if c < 0])
        gens.append(Rf.single(0, 0, int(Xf.sub[t, t2])))
    ring_gens = []
    for p, qq in itertools.product(Rf.index, repeat=2):
        G = Rf.coeff_group(p, qq)
        ring_gens += [Rf.single(p, qq, x) for x in G.elements() if x != G.zero]
    RG = np.stack(ring_gens)
    for g in gens:
        rep.record("I generator vanishes", bool(T.R.is_zero(q(g))))
        rep.record("I involution invariant", bool(T.R.is_zero(q(Rf.conj(g)))))
        left = q(Rf.mul(RG, g))
        right = q(Rf.mul(g, RG))
        rep.record("I left ideal", bool(np.all(T.R.is_zero(left))))
        rep.record("I right ideal", bool(np.all(T.R.is_zero(right))))
    return rep

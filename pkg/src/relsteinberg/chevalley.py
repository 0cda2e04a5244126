"""Doubly laced Steinberg groups St(Φ; K, L) and their relative presentations.

Roots use the doubled coordinates of :mod:`relsteinberg.rootsys`.  Group
elements are evaluated in oracles: the unitary groups of ofaorth / ofasymp
for B_ℓ / C_ℓ, and for F4 (which has no global model here) the oracle of the
rank three subsystem spanned by each relation instance.
"""
from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .pairs import (
    CrossedPair,
    Pair,
    PairF,
    crossed_ofaorth,
    crossed_ofasymp,
    crossed_pair_as,
    ofaorth,
    ofasymp,
)
from .report import Carrier, Report, index_tuples, stable_hash
from .rings import FiniteRing
from .rootsys import Root, RootSystem, root_indices, span_intersection

Coords = tuple[int, ...]


def _c(r) -> Coords:
    return r.coords if isinstance(r, Root) else tuple(int(x) for x in r)


def _add(a, b) -> Coords:
    return tuple(x + y for x, y in zip(_c(a), _c(b)))


def _scale(k: int, a) -> Coords:
    return tuple(k * x for x in _c(a))


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(_c(a), _c(b)))


# ---------------------------------------------------------------------------
# structure constants


@dataclass
class StructureConstants:
    """N_{αβ} for α+β ∈ Φ and the two quadratic constants of B₂ slices.

    ``N21[α, β]`` is the coefficient of x_{2α+β}, ``N12[α, β]`` that of x_{α+2β}.
    """

    phi: RootSystem
    N: dict[tuple[Coords, Coords], int]
    N21: dict[tuple[Coords, Coords], int]
    N12: dict[tuple[Coords, Coords], int]
    extraspecial: list[tuple[Coords, Coords]]
    convention: str = "positive on extraspecial pairs of the height-lex order"

    def n(self, a, b) -> int:
        return self.N[(_c(a), _c(b))]

    def flipped(self, a, b) -> "StructureConstants":
        """A copy with the sign of N_{αβ} (and N_{βα}) negated: a planted fault."""
        N = dict(self.N)
        for k in ((_c(a), _c(b)), (_c(b), _c(a))):
            N[k] = -N[k]
        return StructureConstants(self.phi, N, dict(self.N21), dict(self.N12), self.extraspecial,
                                  self.convention + " (mutated)")

    def table(self) -> list[dict]:
        rows = []
        for (a, b), n in sorted(self.N.items()):
            row = {"alpha": list(a), "beta": list(b), "N": n}
            if (a, b) in self.N21:
                row["N21"] = self.N21[(a, b)]
            if (a, b) in self.N12:
                row["N12"] = self.N12[(a, b)]
            rows.append(row)
        return rows


def _string_p(phi: RootSystem, a, b) -> int:
    """Largest p with β − pα ∈ Φ."""
    p = 0
    while _add(b, _scale(-(p + 1), a)) in phi:
        p += 1
    return p


@functools.lru_cache(maxsize=None)
def _derive(kind: str, rank: int) -> StructureConstants:
    phi = RootSystem(kind, rank)
    R = [r.coords for r in phi.roots]
    Rset = set(R)
    nrm = {r: _dot(r, r) for r in R}
    pairs = [(a, b) for a in R for b in R if _add(a, b) in Rset]
    mag = {(a, b): _string_p(phi, a, b) + 1 for a, b in pairs}
    pos = [r.coords for r in phi.positive()]
    order = {r: k for k, r in enumerate(pos)}
    simple = {tuple(s) for s in phi.simple}

    sign: dict[tuple, int] = {}
    extraspecial = []
    for xi in pos:
        if xi in simple:
            continue
        cands = [(a, b) for a in pos for b in pos if order[a] < order[b] and _add(a, b) == xi]
        a, b = min(cands, key=lambda ab: order[ab[0]])
        extraspecial.append((a, b))
        sign[(a, b)] = 1

    # sign equations: each is a list of terms (coef, [pair, ...]) summing to zero
    neg = lambda r: _scale(-1, r)
    eqs: list[list[tuple[Fraction, tuple]]] = []
    for a, b in pairs:
        eqs.append([(Fraction(1), ((a, b),)), (Fraction(1), ((b, a),))])
        eqs.append([(Fraction(1), ((a, b),)), (Fraction(1), ((neg(a), neg(b)),))])
        g = neg(_add(a, b))
        # N_ab/(g,g) = N_bg/(a,a)
        eqs.append([(Fraction(mag[(a, b)], nrm[g]), ((a, b),)), (-Fraction(mag[(b, g)], nrm[a]), ((b, g),))])
    for a, b, c in itertools.product(R, repeat=3):
        d = neg(_add(_add(a, b), c))
        quad = (a, b, c, d)
        if d not in Rset or any(_add(x, y) == (0,) * len(x) for x, y in itertools.combinations(quad, 2)):
            continue
        terms = []
        for (x, y), (z, w) in (((a, b), (c, d)), ((b, c), (a, d)), ((c, a), (b, d))):
            s = _add(x, y)
            if s in Rset:
                terms.append((Fraction(mag[(x, y)] * mag[(z, w)], nrm[s]), ((x, y), (z, w))))
        if terms:
            eqs.append(terms)

    def value(term):
        coef, prs = term
        v = 1
        for p in prs:
            if p not in sign:
                return None
            v *= sign[p]
        return coef * v

    changed = True
    while changed:
        changed = False
        for eq in eqs:
            vals = [value(t) for t in eq]
            unknown = [k for k, v in enumerate(vals) if v is None]
            if len(unknown) != 1:
                continue
            k = unknown[0]
            coef, prs = eq[k]
            miss = [p for p in prs if p not in sign]
            if len(miss) != 1:
                continue
            rest = sum(v for v in vals if v is not None)
            known = 1
            for p in prs:
                if p in sign:
                    known *= sign[p]
            if rest == 0:
                continue
            s = -rest / (coef * known)
            if abs(s) != 1:
                raise AssertionError(f"inconsistent magnitude while solving {miss[0]}")
            sign[miss[0]] = int(s)
            changed = True
    if len(sign) != len(pairs):
        raise AssertionError(f"{len(pairs) - len(sign)} structure constant signs left undetermined")
    for eq in eqs:
        if sum(value(t) for t in eq) != 0:
            raise AssertionError("structure constants violate a Jacobi-type identity")
    N = {p: sign[p] * mag[p] for p in pairs}
    N21, N12 = {}, {}
    for a, b in pairs:
        s = _add(a, b)
        if _add(a, s) in Rset:
            v = Fraction(N[(a, b)] * N[(a, s)], 2)
            N21[(a, b)] = int(v)
        if _add(b, s) in Rset:
            v = Fraction(N[(a, b)] * N[(b, s)], 2)
            N12[(a, b)] = int(v)
    return StructureConstants(phi, N, N21, N12, extraspecial)


def derive_structure_constants(phi: RootSystem) -> StructureConstants:
    """Integer constants, positive on extraspecial pairs, propagated by the
    Jacobi identities and then re-checked against all of them."""
    if phi.kind not in ("B", "C", "F"):
        raise ValueError(f"{phi} is not doubly laced")
    return _derive(phi.kind, phi.rank)


# ---------------------------------------------------------------------------
# coefficient operations


class PairOps:
    """Batched operations of a pair on element indices, sort "K" (short) or "L" (long).

    With a crossed pair the operations are those of the total pair
    (𝔞⋊K, 𝔟⋊L); source parameters are Ker p2 and target parameters are
    lifted along d.
    """

    def __init__(self, pair: Pair, cp: CrossedPair | None = None):
        self.pair, self.cp = pair, cp
        self.kind = pair.kind
        self.G = {"K": pair.K, "L": pair.L}
        if cp is None:
            self._src = {s: np.arange(g.order) for s, g in self.G.items()}
            self._tgt = dict(self._src)
            self._delta = {s: np.arange(g.order) for s, g in self.G.items()}
        else:
            self._src = {
                "K": np.array([x for x in pair.K.elements() if cp.p2K[x] == cp.target.K.zero]),
                "L": np.array([x for x in pair.L.elements() if cp.p2L[x] == cp.target.L.zero]),
            }
            self._tgt = {"K": np.asarray(cp.dK), "L": np.asarray(cp.dL)}
            self._delta = {"K": np.asarray(cp.dK)[cp.p1K], "L": np.asarray(cp.dL)[cp.p1L]}

    def src(self, sort: str) -> np.ndarray:
        return self._src[sort]

    def tgt(self, sort: str) -> np.ndarray:
        return self._tgt[sort]

    def delta(self, sort: str, x):
        return self._delta[sort][x]

    def zero(self, sort: str, like=None):
        z = self.G[sort].zero
        return z if like is None else np.full(np.shape(like), z, dtype=np.int64)

    def one(self, sort: str) -> int:
        return self.G[sort].one

    def add(self, sort, a, b):
        return self.G[sort].add[a, b]

    def neg(self, sort, a):
        return self.G[sort].neg[a]

    def times(self, sort, n: int, a):
        G = self.G[sort]
        acc = np.full(np.shape(a), G.zero, dtype=np.int64)
        for _ in range(abs(n)):
            acc = G.add[acc, a]
        return G.neg[acc] if n < 0 else acc

    def mul(self, sort, a, b):
        G = self.G[sort]
        if not isinstance(G, FiniteRing) or (sort == "L" and self.kind == "C") or (sort == "K" and self.kind == "B"):
            raise ValueError(f"no multiplication on {sort} for a pair of type {self.kind}")
        return G.mul[a, b]

    def kl(self, k, l):
        """K × L → K."""
        p = self.pair
        return p.smul[k, l] if self.kind == "B" else p.K.mul[k, p.u[l]]

    def lk(self, l, k):
        """L × K → L."""
        p = self.pair
        return p.dot[l, k] if self.kind == "C" else p.L.mul[l, p.s[k]]

    def sb(self, k, k2):
        """s(k | k′) ∈ L."""
        p = self.pair
        return p.sbil(k, k2) if self.kind == "B" else p.d[p.K.mul[k, k2]]

    def label(self, sort, x) -> str:
        return str(self.G[sort].lab(int(x)))


def _sort(phi, r) -> str:
    return "K" if phi.root(_c(r)).lengthClass == "short" else "L"


def comm_terms(phi, ops: PairOps, a, b, p, q, N: int, N21: int = 0, N12: int = 0) -> list:
    """Right hand side of [x_α(p), x_β(q)] as [(root, param), ...] for α ≠ −β."""
    a, b = _c(a), _c(b)
    s = _add(a, b)
    if not any(s):
        raise ValueError("antiparallel roots have no commutator formula")
    if s not in phi:
        return []
    la, lb, ls = _sort(phi, a), _sort(phi, b), _sort(phi, s)
    if _add(a, s) in phi:
        return [(s, ops.times("K", N, ops.kl(p, q))), (_add(a, s), ops.times("L", N21, ops.lk(q, p)))]
    if _add(b, s) in phi:
        return [(s, ops.times("K", N, ops.kl(q, p))), (_add(b, s), ops.times("L", N12, ops.lk(p, q)))]
    if la == lb == ls:
        return [(s, ops.times(la, N, ops.mul(la, p, q)))]
    if la == lb == "K" and ls == "L":
        if N % 2:
            raise ValueError(f"odd N = {N} in a short+short=long commutator")
        return [(s, ops.times("L", N // 2, ops.sb(p, q)))]
    raise ValueError(f"no commutator pattern for {a}, {b}")


def commutator_rhs(phi, sc: StructureConstants, ops: PairOps, a, b, p, q) -> list:
    a, b = _c(a), _c(b)
    k = (a, b)
    if _add(a, b) not in phi:
        return comm_terms(phi, ops, a, b, p, q, 0)
    return comm_terms(phi, ops, a, b, p, q, sc.N[k], sc.N21.get(k, 0), sc.N12.get(k, 0))


# ---------------------------------------------------------------------------
# words


@dataclass(frozen=True, eq=False)
class DLGenerator:
    """x_α(param), or Z_α(param, second) = ^{x_{−α}(second)} x_α(param) when ``second`` is set."""

    root: Coords
    param: object
    second: object = None
    inverse: bool = False

    @property
    def inv(self) -> "DLGenerator":
        return DLGenerator(self.root, self.param, self.second, not self.inverse)

    def label(self) -> str:
        from .rootsys import root_label

        head = f"x_{root_label(self.root)}(·)" if self.second is None else f"Z_{root_label(self.root)}(·,·)"
        return head + ("⁻¹" if self.inverse else "")


Word = list


def winv(w: Word) -> Word:
    return [g.inv for g in reversed(w)]


def wconj(g: Word, h: Word) -> Word:
    return list(g) + list(h) + winv(g)


def wcomm(g: Word, h: Word) -> Word:
    return list(g) + list(h) + winv(g) + winv(h)


def wlabel(w: Word) -> str:
    return " ".join(g.label() for g in w) or "1"


def plain_factors(phi, ops: PairOps, w: Word) -> list:
    """Expand Z-generators and inverses into root elements (root, param)."""
    out = []
    for g in w:
        if g.second is None:
            fs = [(g.root, g.param)]
        else:
            m = _scale(-1, g.root)
            fs = [(m, g.second), (g.root, g.param), (m, ops.neg(_sort(phi, m), g.second))]
        if g.inverse:
            fs = [(r, ops.neg(_sort(phi, r), p)) for r, p in reversed(fs)]
        out += fs
    return out


# ---------------------------------------------------------------------------
# oracles


class UnitaryOracle:
    """Root elements of B_ℓ / C_ℓ inside U(ofaorth) / U(ofasymp).

    Long roots of B_ℓ and short roots of C_ℓ become X_ij(x e_ij); short roots
    of B_ℓ become X_j of (x e_0j, −s(x) e_{−j,j}); long roots of C_ℓ become
    X_j of the element x v_j of Θ⁰_j.  A crossed pair selects the crossed
    oracle, evaluated in the unitary group of the total odd form ring.
    """

    def __init__(self, kind: str, ell: int, pair: Pair | None = None, cp: CrossedPair | None = None):
        from .steinberg import Context

        if kind not in ("B", "C"):
            raise ValueError("unitary oracles exist for B and C")
        self.kind, self.ell = kind, ell
        self.model = RootSystem(kind, ell)
        self.bc = RootSystem("BC", ell)
        if cp is not None:
            v = crossed_pair_as(cp, kind) if cp.target.kind == "F" else cp
            cm = crossed_ofaorth(v, ell) if kind == "B" else crossed_ofasymp(v, ell)
            self.ctx = Context(cm=cm)
        else:
            ofr = ofaorth(ell, pair) if kind == "B" else ofasymp(ell, pair)
            self.ctx = Context(ofr=ofr)
        self.G = self.ctx.U
        self.name = ("SO" if kind == "B" else "Sp") + f"({2 * ell + (kind == 'B')}) oracle"
        self._tab: dict = {}

    def _table(self, key):
        if key not in self._tab:
            T = self.ctx.T
            if key[0] == "ij":
                G = T.R.coeff_group(key[1], key[2])
                self._tab[key] = np.stack([T.R.single(key[1], key[2], x) for x in G.elements()])
            else:
                lst = T.theta0(key[1])
                self._tab[key] = tuple(np.stack([u[k] for u in lst]) for k in range(len(lst[0])))
        return self._tab[key]

    def elem(self, r, idx):
        key = root_indices(self.bc, r)
        tab = self._table(key)
        if key[0] == "ij":
            return self.ctx.x_ij(key[1], key[2], tab[idx])
        return self.ctx.x_j(key[1], tuple(t[idx] for t in tab))

    def describe(self, g):
        return self.ctx.describe_unitary(g)

    def pick(self, g, b):
        return g[b] if g.ndim > 2 else g


class MatrixGroup:
    """n × n matrices over a finite ring, batched over leading axes."""

    def __init__(self, ring: FiniteRing, n: int):
        self.ring, self.n = ring, n
        self._one = np.full((n, n), ring.zero, dtype=np.int64)
        np.fill_diagonal(self._one, ring.one)

    def one(self):
        return self._one

    def mul(self, A, B):
        A, B = np.broadcast_arrays(A, B)
        P = self.ring.mul[A[..., :, :, None], B[..., None, :, :]]
        acc = P[..., 0, :]
        for j in range(1, self.n):
            acc = self.ring.add[acc, P[..., j, :]]
        return acc

    def eq(self, A, B):
        return np.all(np.asarray(A) == np.asarray(B), axis=(-1, -2))


class MatrixOracle:
    """A_{n−1} root elements 1 + x E_ij for roots ε_i − ε_j (model coordinates)."""

    def __init__(self, ring: FiniteRing, n: int = 3):
        self.G = MatrixGroup(ring, n)
        self.ring, self.n = ring, n
        self.model = [tuple((1 if k == i else -1 if k == j else 0) for k in range(n))
                      for i in range(n) for j in range(n) if i != j]
        self.name = f"{n}×{n} matrices over {ring.name}"

    def elem(self, r, idx):
        i, j = r.index(1), r.index(-1)
        idx = np.asarray(idx)
        M = np.broadcast_to(self.G.one(), idx.shape + (self.n, self.n)).copy()
        M[..., i, j] = idx
        return M

    def describe(self, g):
        return [[str(self.ring.lab(int(x))) for x in row] for row in np.asarray(g)]

    def pick(self, g, b):
        return g[b] if g.ndim > 2 else g


class ProductGroup:
    def __init__(self, groups):
        self.groups = groups

    def one(self):
        return tuple(G.one() for G in self.groups)

    def mul(self, g, h):
        return tuple(G.mul(a, b) for G, a, b in zip(self.groups, g, h))

    def eq(self, g, h):
        out = True
        for G, a, b in zip(self.groups, g, h):
            out = np.logical_and(out, G.eq(a, b))
        return out


class ProductOracle:
    """Direct product of oracles; model coordinates are concatenated."""

    def __init__(self, parts: Sequence):
        self.parts = list(parts)
        self.G = ProductGroup([p.G for p in self.parts])
        self.widths = [len(p.model[0]) for p in self.parts]
        self.model = []
        off = 0
        for p, w in zip(self.parts, self.widths):
            total = sum(self.widths)
            self.model += [(0,) * off + r + (0,) * (total - off - w) for r in p.model]
            off += w
        self.name = " × ".join(p.name for p in self.parts)

    def elem(self, r, idx):
        out, off = [], 0
        for p, w in zip(self.parts, self.widths):
            piece = tuple(r[off:off + w])
            out.append(p.elem(piece, idx) if any(piece) else p.G.one())
            off += w
        return tuple(out)

    def describe(self, g):
        return [p.describe(x) for p, x in zip(self.parts, g)]

    def pick(self, g, b):
        return tuple(p.pick(x, b) for p, x in zip(self.parts, g))


# -- sign calibration ---------------------------------------------------------


class ModelSystem:
    """A root system given by explicit coordinates (for matrix models)."""

    def __init__(self, roots, sorts: dict):
        self.roots = [tuple(r) for r in roots]
        self._set = set(self.roots)
        self.sorts = sorts

    def __contains__(self, r) -> bool:
        return tuple(r) in self._set

    def root(self, r):
        return Root(tuple(r), "short" if self.sorts[tuple(r)] == "K" else "long")


def _model_system(oracle) -> "RootSystem | ModelSystem":
    if isinstance(oracle, UnitaryOracle):
        return oracle.model
    return ModelSystem(oracle.model, {r: "K" for r in oracle.model})


def _roots_of(sys) -> list[Coords]:
    return [r.coords for r in sys.roots] if isinstance(sys, RootSystem) else list(sys.roots)


def _magnitude(sys, a, b) -> int:
    p = 0
    while _add(b, _scale(-(p + 1), a)) in sys:
        p += 1
    return p + 1


def measure_signs(oracle, ops: PairOps) -> dict:
    """Sign of the integer in [x_α(1), x_β(1)] = x_{α+β}(±|N| …) ⋯ for raw root elements.

    ``ops`` must be a pair over a ring in which 1, −1, 2, −2 are distinct
    (Z/3 suffices since |N| ≤ 2 and the quadratic constants are ±1).
    """
    sys = _model_system(oracle)
    R = _roots_of(sys)
    G = oracle.G
    out = {}
    for a, b in itertools.product(R, repeat=2):
        if _add(a, b) not in sys:
            continue
        p = np.array([ops.one(_sort(sys, a))])
        q = np.array([ops.one(_sort(sys, b))])
        lhs = _eval_plain(oracle, G, [(a, p), (b, q), (a, ops.neg(_sort(sys, a), p)), (b, ops.neg(_sort(sys, b), q))])
        m = _magnitude(sys, a, b)
        hits = []
        for sN, s2 in itertools.product((1, -1), repeat=2):
            rhs = _eval_plain(oracle, G, comm_terms(sys, ops, a, b, p, q, sN * m, s2, s2))
            if bool(np.all(G.eq(lhs, rhs))):
                hits.append(sN)
        if len(set(hits)) != 1:
            raise AssertionError(f"oracle commutator of {a}, {b} matches no Chevalley pattern")
        out[(a, b)] = hits[0]
    return out


def _eval_plain(oracle, G, factors):
    acc = None
    for r, p in factors:
        v = oracle.elem(r, p)
        acc = v if acc is None else G.mul(acc, v)
    return G.one() if acc is None else acc


@functools.lru_cache(maxsize=None)
def oracle_signs(model: str) -> dict:
    """Measured signs of the raw dictionary for "B3", "C3", "B2", "C2", "A2" models."""
    from .pairs import FF

    K3 = FiniteRing.zmod(3)
    pair = FF(K3)
    if model == "A2":
        return measure_signs(MatrixOracle(K3, 3), PairOps(pair))
    if model == "A1xA2":
        return measure_signs(ProductOracle([MatrixOracle(K3, 2), MatrixOracle(K3, 3)]), PairOps(pair))
    kind, ell = model[0], int(model[1:])
    view = pair.as_B() if kind == "B" else pair.as_C()
    return measure_signs(UnitaryOracle(kind, ell, pair=view), PairOps(pair))


def solve_signs(roots: Sequence[Coords], contains, target: Callable, source: Callable) -> tuple[dict, int]:
    """c: roots → ±1 with c_α c_β c_{α+β} · source(α, β) = target(α, β).

    Gaussian elimination over GF(2); returns (c, number of inconsistent equations).
    """
    roots = list(roots)
    ix = {r: k for k, r in enumerate(roots)}
    rows = []
    for a, b in itertools.product(roots, repeat=2):
        s = _add(a, b)
        if s not in ix:
            continue
        bit = 0 if source(a, b) * target(a, b) > 0 else 1
        mask = (1 << ix[a]) ^ (1 << ix[b]) ^ (1 << ix[s])
        rows.append((mask, bit))
    pivots: dict[int, tuple[int, int]] = {}
    bad = 0
    for mask, bit in rows:
        for piv in sorted(pivots, reverse=True):
            if mask >> piv & 1:
                pm, pb = pivots[piv]
                mask ^= pm
                bit ^= pb
        if mask:
            pivots[mask.bit_length() - 1] = (mask, bit)
        elif bit:
            bad += 1
    val = [0] * len(roots)
    for piv in sorted(pivots):
        mask, bit = pivots[piv]
        acc = bit
        for k in range(piv):
            if mask >> k & 1:
                acc ^= val[k]
        val[piv] = acc
    return {r: (-1 if val[ix[r]] else 1) for r in roots}, bad


class Embedding:
    """Roots of a subsystem Ψ ⊆ Φ sent to an oracle: α ↦ raw x_{f(α)}(c_α ·)."""

    def __init__(self, oracle, ops: PairOps, phi, f: dict, c: dict, name: str, inconsistencies: int = 0):
        self.oracle, self.ops, self.phi = oracle, ops, phi
        self.f, self.c, self.name = f, c, name
        self.G = oracle.G
        self.inconsistencies = inconsistencies

    def elem(self, r, p):
        r = _c(r)
        if self.c[r] < 0:
            p = self.ops.neg(_sort(self.phi, r), p)
        return self.oracle.elem(self.f[r], p)

    def evaluate(self, w: Word):
        return _eval_plain(self, self.G, plain_factors(self.phi, self.ops, w))


def embed(oracle, model_name: str, ops: PairOps, phi, sc: StructureConstants, f: dict) -> Embedding:
    """Solve the signs c making the oracle realize the constants ``sc`` on dom(f)."""
    meas = oracle_signs(model_name)
    dom = list(f)
    src = lambda a, b: sc.N[(a, b)]
    tgt = lambda a, b: meas.get((f[a], f[b]), 0)
    c, bad = solve_signs(dom, None, tgt, src)
    return Embedding(oracle, ops, phi, f, c, oracle.name, bad)


# ---------------------------------------------------------------------------
# subsystem classification and dispatch


class DispatchGap(RuntimeError):
    """A relation instance spans a subsystem with no dispatch case."""


def _value(r) -> int:
    return sum(x * 11 ** (len(r) - 1 - k) for k, x in enumerate(r))


def simple_roots(roots: Sequence[Coords]) -> list[Coords]:
    pos = [r for r in roots if _value(r) > 0]
    ps = set(pos)
    dec = {_add(a, b) for a in pos for b in pos}
    return sorted((r for r in pos if r not in dec), key=lambda r: -_value(r))


def cartan(simple: Sequence[Coords]) -> list[list[int]]:
    return [[2 * _dot(a, b) // _dot(b, b) for b in simple] for a in simple]


def _components(A) -> list[list[int]]:
    n, seen, out = len(A), set(), []
    for s in range(n):
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(n):
                if A[i][j] and j not in seen:
                    seen.add(j)
                    stack.append(j)
        out.append(sorted(comp))
    return out


def _component_type(simple, comp) -> str:
    S = [simple[i] for i in comp]
    A = cartan(S)
    n = len(S)
    prods = [A[i][j] * A[j][i] for i in range(n) for j in range(i + 1, n)]
    if n == 1:
        return "A1"
    if 3 in prods:
        return f"G{n}"
    if 2 not in prods:
        return f"A{n}" if sum(prods) == n - 1 else f"D{n}" if n >= 4 else f"?{n}"
    if n == 2:
        return "B2"
    nrm = [_dot(r, r) for r in S]
    short = sum(1 for x in nrm if x == min(nrm))
    if n == 4 and short == 2 and prods.count(2) == 1 and sum(1 for p in prods if p) == 3:
        return "F4" if _is_f4(A) else "?4"
    return "B" + str(n) if short == 1 else "C" + str(n) if short == n - 1 else f"?{n}"


def _is_f4(A) -> bool:
    n = len(A)
    deg = [sum(1 for j in range(n) if j != i and A[i][j]) for i in range(n)]
    dbl = [(i, j) for i in range(n) for j in range(i + 1, n) if A[i][j] * A[j][i] == 2]
    return deg.count(1) == 2 and bool(dbl) and all(deg[i] == 2 for i in dbl[0])


def subsystem_type(roots: Sequence[Coords]) -> str:
    """Cartan type of a root subsystem, e.g. "B3", "A1xA2", "A1xA1"."""
    S = simple_roots(roots)
    if not S:
        return "0"
    A = cartan(S)
    parts = sorted((len(c), _component_type(S, c)) for c in _components(A))
    return "x".join(t for _, t in parts)


@functools.lru_cache(maxsize=None)
def _span(kind: str, rank: int, roots: frozenset) -> tuple:
    phi = RootSystem(kind, rank)
    return tuple(sorted(span_intersection(phi, sorted(roots)).members))


def span_roots(phi: RootSystem, roots) -> list[Coords]:
    return list(_span(phi.kind, phi.rank, frozenset(_c(r) for r in roots)))


def _dims(roots) -> int:
    return int(np.linalg.matrix_rank(np.array(roots, dtype=float))) if roots else 0


_MODEL_SIMPLE = {
    "A2": [(1, -1, 0), (0, 1, -1)],
    "A1xA2": [(1, -1, 0, 0, 0), (0, 0, 1, -1, 0), (0, 0, 0, 1, -1)],
}


def _model_simple(model: str) -> list[Coords]:
    if model in _MODEL_SIMPLE:
        return _MODEL_SIMPLE[model]
    return [tuple(s) for s in RootSystem(model[0], int(model[1:])).simple]


def isomorphism(psi: Sequence[Coords], model: str) -> dict:
    """A root system isomorphism Ψ → model (Cartan matrices matched by a permutation)."""
    S = simple_roots(psi)
    M = _model_simple(model)
    if len(S) != len(M):
        raise DispatchGap(f"rank mismatch mapping into {model}")
    AM = cartan(M)
    for perm in itertools.permutations(range(len(S))):
        T = [M[k] for k in perm]
        if cartan(S) != [[AM[perm[i]][perm[j]] for j in range(len(S))] for i in range(len(S))]:
            continue
        B = np.array(S, dtype=float).T
        f = {}
        for r in psi:
            coef = np.rint(np.linalg.lstsq(B, np.array(r, dtype=float), rcond=None)[0]).astype(int)
            f[r] = tuple(int(x) for x in np.array(T).T @ coef)
        return f
    raise DispatchGap(f"no isomorphism onto {model}")


@dataclass
class Dispatch:
    subsystemType: str
    category: str
    oracle: str
    embedding: Embedding


class Dispatcher:
    """Chooses and caches the oracle embedding for each relation instance.

    B_ℓ / C_ℓ: one global (crossed) unitary oracle.  F4: the spanned
    subsystem decides; B₃ / C₃ use the unitary oracles of the derived type
    B / C pair, A₂ and A₁×A₂ use matrix oracles over the semidirect rings,
    other rank ≤ 2 subsystems go to a B₃ or C₃ containing them.
    """

    CATEGORIES = ("rank≤2", "A1xA2", "B3", "C3")

    def __init__(self, phi: RootSystem, sc: StructureConstants, ops: PairOps,
                 pair: Pair | None = None, cp: CrossedPair | None = None):
        self.phi, self.sc, self.ops = phi, sc, ops
        self.pair, self.cp = pair, cp
        self._oracles: dict = {}
        self._emb: dict = {}
        self._global = None
        self._calls: dict = {}
        if phi.kind in ("B", "C"):
            view = pair
            if pair is not None and pair.kind == "F":
                view = pair.as_B() if phi.kind == "B" else pair.as_C()
            orc = UnitaryOracle(phi.kind, phi.rank, pair=view, cp=cp)
            f = {r.coords: r.coords for r in phi.roots}
            self._global = embed(orc, f"{phi.kind}{phi.rank}", ops, phi, sc, f)

    def _oracle(self, key):
        if key not in self._oracles:
            kind = key[0]
            if kind in ("B3", "C3"):
                view = self.pair
                if view is not None and view.kind == "F":
                    view = view.as_B() if kind == "B3" else view.as_C()
                self._oracles[key] = UnitaryOracle(kind[0], 3, pair=view, cp=self.cp)
            elif kind == "A2":
                self._oracles[key] = MatrixOracle(self.ops.G[key[1]], 3)
            else:
                self._oracles[key] = ProductOracle([MatrixOracle(self.ops.G[key[1]], 2),
                                                    MatrixOracle(self.ops.G[key[2]], 3)])
        return self._oracles[key]

    def _embedding(self, psi: tuple, model: str):
        if (psi, model) not in self._emb:
            f = isomorphism(list(psi), model)
            if model == "A2":
                key = ("A2", _sort(self.phi, psi[0]))
            elif model == "A1xA2":
                a1 = [r for r in psi if f[r][:2] != (0, 0)][0]
                a2 = [r for r in psi if f[r][:2] == (0, 0)][0]
                key = ("A1xA2", _sort(self.phi, a1), _sort(self.phi, a2))
            else:
                key = (model,)
            self._emb[(psi, model)] = embed(self._oracle(key), model, self.ops, self.phi, self.sc, f)
        return self._emb[(psi, model)]

    def _container(self, psi):
        """The first (in root order) B₃ or C₃ spanned by Ψ and further roots."""
        R = [r.coords for r in self.phi.roots]
        frontier = [tuple(psi)]
        while frontier:
            nxt = []
            for cur in frontier:
                for rho in R:
                    if rho in cur:
                        continue
                    big = tuple(span_roots(self.phi, list(cur) + [rho]))
                    d = _dims(big)
                    if d == 3 and subsystem_type(big) in ("B3", "C3"):
                        return big
                    if d < 3 and big not in nxt:
                        nxt.append(big)
            frontier = nxt
        return None

    def __call__(self, roots) -> Dispatch:
        psi = tuple(span_roots(self.phi, roots))
        if psi not in self._calls:
            self._calls[psi] = self._dispatch(psi, roots)
        return self._calls[psi]

    def _dispatch(self, psi, roots) -> Dispatch:
        t = subsystem_type(psi)
        dim = _dims(psi)
        cat = "rank≤2" if dim <= 2 else t
        if cat not in self.CATEGORIES:
            raise DispatchGap(f"subsystem of type {t} spanned by {[list(_c(r)) for r in roots]}")
        if self._global is not None:
            return Dispatch(t, cat, self._global.name, self._global)
        if dim == 3:
            emb = self._embedding(psi, t)
            return Dispatch(t, cat, emb.name, emb)
        if t == "A2":
            emb = self._embedding(psi, "A2")
            return Dispatch(t, cat, emb.name, emb)
        big = self._container(psi)
        if big is not None:
            tb = subsystem_type(big)
            emb = self._embedding(big, tb)
            return Dispatch(t, cat, emb.name + f" (inside {tb})", emb)
        raise DispatchGap(f"no B3/C3 contains the {t} subsystem {psi}")


# ---------------------------------------------------------------------------
# V_{αβ}


V_SHAPES = ("short-A2", "long-A2", "long-B2", "short-B2")


@dataclass
class VRep:
    """V_{αβ}: coordinates along ``roots`` (the product order of its image).

    Shapes: α, β, α−β short ("short-A2") or long ("long-A2"), abelian on
    (α, β); α, β long with (α+β)/2 short ("long-B2"), abelian on
    (α, (α+β)/2, β); α, β short with α+β long ("short-B2"), 2-step nilpotent
    on (α, α+β, β).
    """

    kind: str
    alpha: Coords
    beta: Coords
    roots: tuple
    sorts: tuple
    N: int = 0

    @property
    def acting(self) -> tuple:
        d = _add(self.alpha, _scale(-1, self.beta))
        if self.kind == "long-B2":
            d = tuple(x // 2 for x in d)
        return (d, _scale(-1, d))

    def zero(self, ops: PairOps, like) -> tuple:
        return tuple(ops.zero(s, like) for s in self.sorts)

    def single(self, ops: PairOps, root, x) -> tuple:
        k = self.roots.index(_c(root))
        return tuple(x if i == k else ops.zero(s, x) for i, s in enumerate(self.sorts))

    def add(self, ops: PairOps, u, v) -> tuple:
        out = [ops.add(s, a, b) for s, a, b in zip(self.sorts, u, v)]
        if self.kind == "short-B2":
            corr = ops.times("L", -(self.N // 2), ops.sb(u[2], v[0]))
            out[1] = ops.add("L", ops.add("L", u[1], corr), v[1])
        return tuple(out)

    def iota(self, u) -> Word:
        return [DLGenerator(r, x) for r, x in zip(self.roots, u)]


def vrep(phi, sc: StructureConstants, a, b) -> VRep | None:
    a, b = _c(a), _c(b)
    if a == b or not any(_add(a, b)):
        return None
    la, lb = _sort(phi, a), _sort(phi, b)
    d = _add(a, _scale(-1, b))
    s = _add(a, b)
    if la == lb and d in phi and _sort(phi, d) == la:
        return VRep("short-A2" if la == "K" else "long-A2", a, b, (a, b), (la, la))
    if la == lb == "L" and all(x % 2 == 0 for x in s):
        m = tuple(x // 2 for x in s)
        if m in phi and _sort(phi, m) == "K":
            return VRep("long-B2", a, b, (a, m, b), ("L", "K", "L"))
    if la == lb == "K" and s in phi and _sort(phi, s) == "L":
        return VRep("short-B2", a, b, (a, s, b), ("K", "L", "K"), sc.N[(a, b)])
    return None


def vrep_action(phi, sc: StructureConstants, ops: PairOps, gamma, t, V: VRep, v) -> tuple:
    """X_γ(t)·v, defined by equivariance of v ↦ ∏ x_ρ(v_ρ) under conjugation."""
    gamma = _c(gamma)
    if gamma not in V.acting:
        raise ValueError(f"{gamma} does not act on V of shape {V.kind}")
    acc = V.zero(ops, t)
    for r, c in zip(V.roots, v):
        for sig, e in commutator_rhs(phi, sc, ops, gamma, r, t, c) + [(r, c)]:
            if sig not in V.roots:
                raise ValueError(f"conjugate leaves V: root {sig}")
            acc = V.add(ops, acc, V.single(ops, sig, e))
    return acc


def vswap(ops: PairOps, V: VRep, u) -> tuple:
    """The element of V_{βα} with the same image as u ∈ V_{αβ}."""
    if V.kind != "short-B2":
        return tuple(reversed(u))
    x, y, z = u
    return (z, ops.add("L", y, ops.times("L", V.N // 2, ops.sb(x, z))), x)


def z_v(V: VRep, Vm: VRep, u, s) -> Word:
    """Z_{αβ}(u, s) = ^{ι(s)} ι(u)."""
    return wconj(Vm.iota(s), V.iota(u))


# ---------------------------------------------------------------------------
# relation families


@dataclass
class DLPattern:
    family: str
    roots: tuple
    carriers: list
    build: Callable

    def key(self) -> tuple:
        return (self.family, [list(r) for r in self.roots])


DL_FAMILIES = ("Add", "Comm trivial", "Comm N", "Comm N/2 s", "Comm N21", "Comm N12")
RELATIVE_FAMILIES = ("Sym", "Add 1", "Add 2", "Comm 1", "Comm 2", "Simp", "HW 1", "HW 2", "Delta")


def _carrier(ops: PairOps, name: str, sort: str, which: str) -> Carrier:
    data = ops.src(sort) if which == "src" else ops.tgt(sort)
    return Carrier(name, np.asarray(data, dtype=np.int64), lambda x, s=sort: ops.label(s, x))


def _vcarrier(ops: PairOps, name: str, V: VRep, which: str) -> Carrier:
    cols = [ops.src(s) if which == "src" else ops.tgt(s) for s in V.sorts]
    grid = np.meshgrid(*cols, indexing="ij")
    data = tuple(np.asarray(g, dtype=np.int64).ravel() for g in grid)
    return Carrier(name, data, lambda t, sorts=V.sorts: [ops.label(s, x) for s, x in zip(sorts, t)])


def _x(r, p) -> DLGenerator:
    return DLGenerator(_c(r), p)


def _z(r, x, p) -> DLGenerator:
    return DLGenerator(_c(r), x, p)


def dl_patterns(phi: RootSystem, sc: StructureConstants, ops: PairOps) -> list[DLPattern]:
    """The defining relations of St(Φ; K, L), one pattern per root (pair)."""
    R = [r.coords for r in phi.roots]
    pats = []
    for a in R:
        sa = _sort(phi, a)
        pats.append(DLPattern("Add", (a,), [_carrier(ops, "p", sa, "tgt"), _carrier(ops, "q", sa, "tgt")],
                              lambda p, q, a=a, sa=sa: ([_x(a, p), _x(a, q)], [_x(a, ops.add(sa, p, q))])))
    for a, b in itertools.product(R, repeat=2):
        s = _add(a, b)
        if not any(s):
            continue
        if s not in phi:
            fam = "Comm trivial"
        elif _add(a, s) in phi:
            fam = "Comm N21"
        elif _add(b, s) in phi:
            fam = "Comm N12"
        elif _sort(phi, a) == _sort(phi, b) == _sort(phi, s):
            fam = "Comm N"
        else:
            fam = "Comm N/2 s"

        def build(p, q, a=a, b=b):
            rhs = [_x(r, x) for r, x in commutator_rhs(phi, sc, ops, a, b, p, q)]
            return wcomm([_x(a, p)], [_x(b, q)]), rhs

        pats.append(DLPattern(fam, (a, b), [_carrier(ops, "p", _sort(phi, a), "tgt"),
                                             _carrier(ops, "q", _sort(phi, b), "tgt")], build))
    return pats


def dl_relations(phi: RootSystem, pair: Pair, budget: int = 10**6, seed: int = 0,
                 sc: StructureConstants | None = None) -> Iterator["DLRelationInstance"]:
    """Stream of St(Φ; K, L) relation instances (exhaustive per pattern within ``budget``)."""
    _check_pair_type(phi, pair)
    sc = sc or derive_structure_constants(phi)
    ops = PairOps(pair)
    yield from _instances(dl_patterns(phi, sc, ops), budget, seed)


@dataclass
class DLRelationInstance:
    family: str
    roots: tuple
    lhs: Word
    rhs: Word
    params: dict


def _instances(pats, budget, seed) -> Iterator[DLRelationInstance]:
    per = _per_family(pats, budget)
    for p, b in zip(pats, per):
        _, _, chunks = index_tuples([len(c) for c in p.carriers], b, _task_rng(seed, p.key()))
        for cols in chunks:
            for k in range(len(cols[0]) if cols else 1):
                args = [c.get(int(ix[k])) for c, ix in zip(p.carriers, cols)]
                args = [np.asarray([a]) if not isinstance(a, tuple) else tuple(np.asarray([x]) for x in a)
                        for a in args]
                lhs, rhs = p.build(*args)
                yield DLRelationInstance(p.family, p.roots, lhs, rhs,
                                         {c.name: int(ix[k]) for c, ix in zip(p.carriers, cols)})


def _check_pair_type(phi: RootSystem, pair: Pair) -> None:
    want = {"B": ("B", "F"), "C": ("C", "F"), "F": ("F",)}[phi.kind]
    if pair.kind not in want:
        raise ValueError(f"{phi} needs a pair of type {' or '.join(want)}, got {pair.kind}")


def relative_patterns(phi: RootSystem, sc: StructureConstants, ops: PairOps) -> list[DLPattern]:
    """The relations of the relative presentation, one pattern per root tuple."""
    R = [r.coords for r in phi.roots]
    neg = lambda r: _scale(-1, r)
    srt = lambda r: _sort(phi, r)
    V = {}
    for a, b in itertools.product(R, repeat=2):
        v = vrep(phi, sc, a, b)
        if v is not None:
            V[(a, b)] = v
    act = lambda g, t, W, v: vrep_action(phi, sc, ops, g, t, W, v)

    def act_z(g, y, p, W, v):
        v = act(neg(g), ops.neg(srt(neg(g)), p), W, v)
        v = act(g, y, W, v)
        return act(neg(g), p, W, v)

    pats = []
    for (a, b), Vab in V.items():
        Vm = V[(neg(a), neg(b))]
        Vba, Vmba = V[(b, a)], V[(neg(b), neg(a))]
        cu, cs = _vcarrier(ops, "u", Vab, "src"), _vcarrier(ops, "s", Vm, "tgt")
        pats.append(DLPattern("Sym", (a, b), [cu, cs], lambda u, s, Vab=Vab, Vm=Vm, Vba=Vba, Vmba=Vmba: (
            z_v(Vab, Vm, u, s), z_v(Vba, Vmba, vswap(ops, Vab, u), vswap(ops, Vm, s)))))
        pats.append(DLPattern("Add 2", (a, b), [cu, _vcarrier(ops, "v", Vab, "src"), cs],
                              lambda u, v, s, Vab=Vab, Vm=Vm: (
                                  z_v(Vab, Vm, u, s) + z_v(Vab, Vm, v, s), z_v(Vab, Vm, Vab.add(ops, u, v), s))))
        pats.append(DLPattern("Simp", (a, b), [_carrier(ops, "x", srt(a), "src"), _carrier(ops, "p", srt(a), "tgt")],
                              lambda x, p, a=a, Vab=Vab, Vm=Vm: (
                                  [_z(a, x, p)], z_v(Vab, Vm, Vab.single(ops, a, x), Vm.single(ops, neg(a), p)))))
        for g in Vab.acting:
            if g not in phi:
                continue

            def build(x, p, u, s, g=g, Vab=Vab, Vm=Vm):
                y = ops.delta(srt(g), x)
                return (wconj([_z(g, x, p)], z_v(Vab, Vm, u, s)),
                        z_v(Vab, Vm, act_z(g, y, p, Vab, u), act_z(g, y, p, Vm, s)))

            pats.append(DLPattern("Comm 2", (a, b, g), [_carrier(ops, "x", srt(g), "src"),
                                                         _carrier(ops, "p", srt(g), "tgt"), cu, cs], build))
    for a in R:
        sa = srt(a)
        pats.append(DLPattern("Add 1", (a,), [_carrier(ops, "x", sa, "src"), _carrier(ops, "y", sa, "src"),
                                              _carrier(ops, "p", sa, "tgt")],
                              lambda x, y, p, a=a, sa=sa: ([_z(a, x, p), _z(a, y, p)], [_z(a, ops.add(sa, x, y), p)])))
        pats.append(DLPattern("Delta", (a,), [_carrier(ops, "x", sa, "src"), _carrier(ops, "y", sa, "src"),
                                              _carrier(ops, "p", sa, "tgt")],
                              lambda x, y, p, a=a, sa=sa: (
                                  [_z(a, x, ops.add(sa, ops.delta(sa, y), p))],
                                  wconj([_z(neg(a), y, ops.zero(sa, y))], [_z(a, x, p)]))))
    for a, b in itertools.product(R, repeat=2):
        if a == b or a == neg(b) or _dot(a, b) != 0 or _add(a, b) in phi:
            continue
        pats.append(DLPattern("Comm 1", (a, b), [_carrier(ops, "x", srt(a), "src"), _carrier(ops, "p", srt(a), "tgt"),
                                                 _carrier(ops, "y", srt(b), "src"), _carrier(ops, "q", srt(b), "tgt")],
                              lambda x, p, y, q, a=a, b=b: (wcomm([_z(a, x, p)], [_z(b, y, q)]), [])))
    for a, b in itertools.product(R, repeat=2):
        s = _add(a, b)
        if s not in phi:
            continue
        la, lb, ls = srt(a), srt(b), srt(s)
        if la == lb == ls and _dot(a, b) < 0:
            V1, V1m = V[(a, s)], V[(neg(a), neg(s))]
            V2, V2m = V[(s, b)], V[(neg(s), neg(b))]

            def hw1(x, p, q, r, a=a, b=b, la=la, V1=V1, V1m=V1m, V2=V2, V2m=V2m):
                z = ops.zero(la, x)
                lhs = z_v(V1, V1m, act(neg(b), r, V1, (z, x)), (p, q))
                rhs = z_v(V2, V2m, act(neg(a), p, V2, (x, z)), act(neg(a), p, V2m, (q, r)))
                return lhs, rhs

            pats.append(DLPattern("HW 1", (a, b), [_carrier(ops, "x", la, "src"), _carrier(ops, "p", la, "tgt"),
                                                   _carrier(ops, "q", la, "tgt"), _carrier(ops, "r", la, "tgt")], hw1))
        if la == "K" and lb == "L" and _add(a, s) in phi:
            t = _add(a, s)
            V1, V1m = V[(a, s)], V[(neg(a), neg(s))]
            V2, V2m = V[(t, b)], V[(neg(t), neg(b))]

            def hw2(x, y, s_, p, q, r, a=a, b=b, V1=V1, V1m=V1m, V2=V2, V2m=V2m):
                zk = ops.zero("K", y)
                lhs = z_v(V1, V1m, act(neg(b), s_, V1, (zk, x, y)), (p, q, r))
                rhs = z_v(V2, V2m, act(neg(a), p, V2, (x, y, zk)), act(neg(a), p, V2m, (q, r, s_)))
                return lhs, rhs

            pats.append(DLPattern("HW 2", (a, b), [
                _carrier(ops, "x", "L", "src"), _carrier(ops, "y", "K", "src"), _carrier(ops, "s", "L", "tgt"),
                _carrier(ops, "p", "K", "tgt"), _carrier(ops, "q", "L", "tgt"), _carrier(ops, "r", "K", "tgt")], hw2))
    order = {f: k for k, f in enumerate(RELATIVE_FAMILIES)}
    pats.sort(key=lambda p: order[p.family])
    return pats


def lift_patterns(phi: RootSystem, ops: PairOps, base: Sequence[DLPattern], per_type: int = 4,
                  seed: int = 0, attempts: int = 400) -> list[DLPattern]:
    """Conjugates ^{x_ρ(t)}(relation) with ρ outside the span of the relation.

    These instances span rank three subsystems, so they reach the B₃, C₃ and
    A₁×A₂ oracles.  Up to ``per_type`` root tuples per (family, type) are
    drawn with a seeded generator.
    """
    R = [r.coords for r in phi.roots]
    by_family: dict[str, list[DLPattern]] = {}
    for p in base:
        by_family.setdefault(p.family, []).append(p)
    out = []
    for fam, pats in by_family.items():
        rng = _task_rng(seed, ("lift", fam))
        got: dict[str, int] = {}
        for _ in range(attempts):
            if all(got.get(t, 0) >= per_type for t in ("B3", "C3", "A1xA2")):
                break
            p = pats[int(rng.integers(len(pats)))]
            rho = R[int(rng.integers(len(R)))]
            psi = span_roots(phi, list(p.roots) + [rho])
            if _dims(psi) != 3:
                continue
            t = subsystem_type(psi)
            if got.get(t, 0) >= per_type:
                continue
            got[t] = got.get(t, 0) + 1

            def build(*args, p=p, rho=rho):
                lhs, rhs = p.build(*args[:-1])
                g = [_x(rho, args[-1])]
                return wconj(g, lhs), wconj(g, rhs)

            out.append(DLPattern("Lift " + fam, tuple(p.roots) + (rho,),
                                 list(p.carriers) + [_carrier(ops, "t", _sort(phi, rho), "tgt")], build))
    return out


# ---------------------------------------------------------------------------
# running


def _task_rng(seed: int, key) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFF, seed >> 32, int(stable_hash(key), 16) & 0xFFFFFFFF])


def _per_family(pats, budget: int) -> list[int]:
    count: dict[str, int] = {}
    for p in pats:
        count[p.family] = count.get(p.family, 0) + 1
    return [max(1, budget // count[p.family]) if budget else 0 for p in pats]


def _mutate_word(phi, ops: PairOps, w: Word) -> Word:
    if not w:
        return w
    g = w[0]
    g2 = DLGenerator(g.root, ops.neg(_sort(phi, g.root), g.param), g.second, g.inverse)
    return [g2] + list(w[1:])


def _run_one(phi, ops, dispatcher, pat: DLPattern, budget: int, seed: int, mutate: frozenset,
             max_witnesses: int) -> dict:
    d = dispatcher(pat.roots)
    emb = d.embedding
    rec = {"family": pat.family, "roots": [list(r) for r in pat.roots], "subsystemType": d.subsystemType,
           "category": d.category, "oracle": d.oracle, "mode": "", "space": 0, "instances": 0,
           "failures": 0, "witnesses": []}
    rng = _task_rng(seed, pat.key())
    mode, total, chunks = index_tuples([len(c) for c in pat.carriers], budget, rng)
    rec["mode"], rec["space"] = mode, total
    for cols in chunks:
        args = [c.take(ix) for c, ix in zip(pat.carriers, cols)]
        lhs, rhs = pat.build(*args)
        if pat.family in mutate:
            rhs = _mutate_word(phi, ops, rhs)
        L, Rv = emb.evaluate(lhs), emb.evaluate(rhs)
        n = len(cols[0]) if cols else 1
        ok = np.broadcast_to(np.asarray(emb.G.eq(L, Rv), dtype=bool), (n,))
        rec["instances"] += n
        bad = np.nonzero(~ok)[0]
        rec["failures"] += int(len(bad))
        for b in bad[: max(0, max_witnesses - len(rec["witnesses"]))]:
            b = int(b)
            rec["witnesses"].append({
                "params": {c.name: c.describe(c.get(int(ix[b]))) for c, ix in zip(pat.carriers, cols)},
                "param_index": [int(ix[b]) for ix in cols],
                "lhs": wlabel(lhs), "rhs": wlabel(rhs),
                "lhs_value": emb.oracle.describe(emb.oracle.pick(L, b)),
                "rhs_value": emb.oracle.describe(emb.oracle.pick(Rv, b)),
            })
    rec["pass"] = rec["failures"] == 0
    rec["hash"] = stable_hash(rec["family"], rec["roots"], rec["mode"], rec["instances"], rec["failures"],
                              rec["subsystemType"], rec["oracle"])
    return rec


_POOL: dict = {}


def _pool_worker(k: int) -> dict:
    s = _POOL
    return _run_one(s["phi"], s["ops"], s["dispatcher"], s["patterns"][k], s["budgets"][k], s["seed"],
                    s["mutate"], s["maxw"])


def run_dl(phi, ops: PairOps, dispatcher: "Dispatcher", patterns: Sequence[DLPattern], check: str,
           budget: int = 10**6, seed: int = 0, workers: int = 1, mutate: Sequence[str] = (),
           max_witnesses: int = 3) -> tuple[Report, list[dict]]:
    """Evaluate patterns through the dispatcher; ``budget`` caps instances per family."""
    import multiprocessing

    mutate = frozenset(mutate)
    budgets = _per_family(patterns, budget)
    for p in patterns:  # resolve every dispatch (and build oracles) before forking
        dispatcher(p.roots)
    if workers > 1 and len(patterns) > 1:
        _POOL.update(phi=phi, ops=ops, dispatcher=dispatcher, patterns=list(patterns), budgets=budgets,
                     seed=seed, mutate=mutate, maxw=max_witnesses)
        with multiprocessing.get_context("fork").Pool(workers) as pool:
            records = pool.map(_pool_worker, range(len(patterns)), chunksize=max(1, len(patterns) // (4 * workers)))
        _POOL.clear()
    else:
        records = [_run_one(phi, ops, dispatcher, p, b, seed, mutate, max_witnesses)
                   for p, b in zip(patterns, budgets)]
    rep = Report(check, seed=seed, budget=budget, meta={"phi": str(phi), "mutate": sorted(mutate)})
    cats: dict[str, int] = {}
    for rec in records:
        it = rep.item(rec["family"])
        it.instances += rec["instances"]
        it.failures += rec["failures"]
        it.space += rec["space"]
        if rec["mode"] == "sampled":
            it.mode = "sampled"
        cats[rec["category"]] = cats.get(rec["category"], 0) + rec["instances"]
        for w in rec["witnesses"]:
            if sum(1 for f in rep.failures if f["name"] == rec["family"]) < max_witnesses:
                rep.failures.append({"name": rec["family"], "roots": rec["roots"], "witness": w})
    rep.meta.update(patterns=len(records), categories=dict(sorted(cats.items())),
                    digest=stable_hash([r["hash"] for r in records]))
    return rep, records


def write_records(path: str, records: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n")


def verify_dl(phi: RootSystem, pair: Pair, oracle=None, budget: int = 10**6, seed: int = 0, workers: int = 1,
              mutate: Sequence[str] = (), sc: StructureConstants | None = None,
              jsonl: str | None = None) -> Report:
    """Every St(Φ; K, L) relation instance, evaluated in the B / C unitary oracle.

    ``sc`` replaces the derived constants in the relations (the oracle's
    sign calibration always uses the derived ones), so a corrupted table
    shows up as failures.
    """
    if phi.kind not in ("B", "C"):
        raise ValueError("verify_dl evaluates B_ℓ and C_ℓ; F4 goes through verify_relative_dl")
    _check_pair_type(phi, pair)
    ops = PairOps(pair)
    disp = oracle if oracle is not None else Dispatcher(phi, derive_structure_constants(phi), ops, pair=pair)
    pats = dl_patterns(phi, sc or derive_structure_constants(phi), ops)
    rep, records = run_dl(phi, ops, disp, pats, "dl", budget, seed, workers, mutate)
    rep.meta.update(pair=pair.name, oracle=disp._global.name,
                    sign_inconsistencies=disp._global.inconsistencies)
    if jsonl:
        write_records(jsonl, records)
    return rep


def verify_relative_dl(phi: RootSystem, cp: CrossedPair, budget: int = 10**5, seed: int = 0, workers: int = 1,
                       mutate: Sequence[str] = (), sc: StructureConstants | None = None, lifts: int = 4,
                       jsonl: str | None = None, families: Sequence[str] | None = None) -> tuple[Report, list[dict]]:
    """The relative presentation, evaluated in dispatched oracles over (𝔞⋊K, 𝔟⋊L).

    For F4 the pair must be of type F; ``lifts`` rank three conjugates per
    (family, subsystem type) are added so that every dispatch case runs.
    """
    if phi.kind == "F" and cp.target.kind != "F":
        raise ValueError("F4 needs a crossed pair of type F")
    _check_pair_type(phi, cp.target)
    if phi.rank < 3:
        raise ValueError("the relative presentation needs rank ≥ 3")
    derived = derive_structure_constants(phi)
    sc = sc or derived
    ops = PairOps(cp.total, cp)
    disp = Dispatcher(phi, derived, ops, cp=cp)
    pats = relative_patterns(phi, sc, ops)
    if families is not None:
        pats = [p for p in pats if p.family in set(families)]
    if phi.kind == "F" and lifts:
        pats += lift_patterns(phi, ops, pats, lifts, seed)
    rep, records = run_dl(phi, ops, disp, pats, "relative-dl", budget, seed, workers, mutate)
    rep.meta.update(crossed_pair=cp.name)
    if jsonl:
        write_records(jsonl, records)
    return rep, records


def relative_dl_relations(phi: RootSystem, cp: CrossedPair, budget: int = 10**5, seed: int = 0,
                          sc: StructureConstants | None = None) -> Iterator[DLRelationInstance]:
    sc = sc or derive_structure_constants(phi)
    yield from _instances(relative_patterns(phi, sc, PairOps(cp.total, cp)), budget, seed)

"""Steinberg generators and words, evaluated in unitary groups of crossed modules.

A :class:`Context` fixes a crossed module δ: (S, Θ) → (R, Δ) given as a
reflexive graph with total object (T, Ξ) = (S⋊R, Θ⋊Δ).  Target parameters
are lifted into T through ``d``; source parameters are elements of Ker p2.
Generators are evaluated through

    T_IJ(a) = q_I·a ∸ q_{−J}·ā ∸ φ(a),     T_J(u) = u ∸ φ(ρ(u)+π(u)) ∔ q_{−J}·(ρ(u) − π(u)̄),

where an index group I = (i, j, ...) stands for the summed hyperbolic pair
e_I = Σ e, q_I = ∔ q.  Single indices give the usual T_ij and T_j.

Relation families are produced as :class:`Pattern` objects: an index
assignment, a list of parameter carriers and a builder returning the two
sides as :class:`Word` s with batched parameters.  :func:`verify` runs the
patterns (optionally on several worker processes) and merges the outcome
deterministically.
"""
from __future__ import annotations

import itertools
import json
import multiprocessing
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Sequence

import numpy as np

from .oddform import (
    CrossedModule,
    HyperbolicFamily,
    OddFormRing,
    stack_delta,
    unitary_group,
)
from .report import Carrier, Report, index_tuples, stable_hash
from .rootsys import RootSubset, RootSystem, apply_weyl, root_indices, weyl_elements, weyl_index

Group = tuple  # signed index group


def _g(i) -> Group:
    return tuple(i) if isinstance(i, (tuple, list)) else (int(i),)


def _neg(I: Group) -> Group:
    return tuple(-i for i in I)


def _gstr(I: Group) -> str:
    return "⊕".join(str(i) for i in I)


# ---------------------------------------------------------------------------
# generators and words


GEN_KINDS = ("Xij", "Xj", "Zij", "Zj", "Z_i⊕j_k", "Z_i_j⊕k", "Z_i⊕j", "Z⊖i_j")


@dataclass(frozen=True)
class Generator:
    """A formal generator with (batched) parameters.

    ``I`` is None for the ultrashort kinds (X_J, Z_J, Z^{⊖m}_J); ``minus``
    records m for Z^{⊖m}_j.
    """

    kind: str
    J: Group
    I: Group | None = None
    params: tuple = ()
    minus: int | None = None
    inverse: bool = False

    def __post_init__(self):
        if self.kind not in GEN_KINDS:
            raise ValueError(f"unknown generator kind {self.kind}")

    @property
    def inv(self) -> "Generator":
        return Generator(self.kind, self.J, self.I, self.params, self.minus, not self.inverse)

    def label(self) -> str:
        base = self.kind[0]
        if self.minus is not None:
            s = f"{base}^⊖{self.minus}_{_gstr(self.J)}"
        elif self.I is None:
            s = f"{base}_{_gstr(self.J)}"
        else:
            s = f"{base}_{_gstr(self.I)},{_gstr(self.J)}"
        return s + ("⁻¹" if self.inverse else "")


def X(i, j, a) -> Generator:
    return Generator("Xij", _g(j), _g(i), (a,))


def Xj(j, u) -> Generator:
    return Generator("Xj", _g(j), None, (u,))


def Z(i, j, a, p) -> Generator:
    I, J = _g(i), _g(j)
    kind = "Zij" if len(I) == len(J) == 1 else ("Z_i⊕j_k" if len(I) > 1 else "Z_i_j⊕k")
    return Generator(kind, J, I, (a, p))


def Zj(j, u, s) -> Generator:
    J = _g(j)
    return Generator("Zj" if len(J) == 1 else "Z_i⊕j", J, None, (u, s))


def Zminus(m: int, j: int, u, s) -> Generator:
    return Generator("Z⊖i_j", (j,), None, (u, s), minus=m)


@dataclass(frozen=True)
class Word:
    factors: tuple = ()

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.factors + other.factors)

    @property
    def inv(self) -> "Word":
        return Word(tuple(g.inv for g in reversed(self.factors)))

    def label(self) -> str:
        return "·".join(g.label() for g in self.factors) or "1"


def W(*gens) -> Word:
    out = []
    for g in gens:
        out.extend(g.factors if isinstance(g, Word) else [g])
    return Word(tuple(out))


def comm(x, y) -> Word:
    x, y = W(x), W(y)
    return x * y * x.inv * y.inv


def conj(x, y) -> Word:
    x, y = W(x), W(y)
    return x * y * x.inv


@dataclass
class RelationInstance:
    family: str
    indices: tuple
    lhs: Word
    rhs: Word
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# evaluation context


class QuotientFamily:
    """Summed hyperbolic pairs η_E, one per class of base indices."""

    def __init__(self, ctx: "Context", classes: Sequence[Sequence[int]]):
        self.ctx = ctx
        self.classes = [tuple(c) for c in classes]
        self.rank = len(self.classes)

    def group(self, k: int) -> Group:
        c = self.classes[abs(k) - 1]
        return c if k > 0 else _neg(c)

    def e(self, k: int):
        return self.ctx.e_group(self.group(k))

    def q(self, k: int):
        return self.ctx.q_group(self.group(k))

    def as_family(self) -> HyperbolicFamily:
        idx = [k for k in range(-self.rank, self.rank + 1) if k]
        return HyperbolicFamily(e={k: self.e(k) for k in idx}, q={k: self.q(k) for k in idx}, rank=self.rank)


class Context:
    """Evaluation data for stmap over a crossed module (or a single odd form ring).

    With ``ofr`` alone the source and target coincide and d, δ are identities.
    """

    def __init__(self, cm: CrossedModule | None = None, ofr: OddFormRing | None = None, fast: bool = True):
        if (cm is None) == (ofr is None):
            raise ValueError("give exactly one of cm, ofr")
        self.cm = cm
        self.T = cm.total if cm is not None else ofr
        self.target = cm.target if cm is not None else ofr
        self.R = self.T.R
        self.U = unitary_group(self.T, fast)
        H = self.target.family
        self.ell = H.rank
        self.indices = H.indices
        if cm is None:
            self.lift = self.lift_delta = lambda x: x
            self.dp1 = self.dp1_delta = lambda x: x
        else:
            self.lift, self.lift_delta = cm.d.ring, cm.d.delta
            self.dp1 = lambda a: cm.d.ring(cm.p1.ring(a))
            self.dp1_delta = lambda u: cm.d.delta(cm.p1.delta(u))
        self.e = {i: self.lift(H.e[i]) for i in self.indices}
        self.q = {i: self.lift_delta(H.q[i]) for i in self.indices}
        self._cache: dict = {}
        self.name = cm.name if cm is not None else ofr.name

    # -- summed pairs ---------------------------------------------------
    def e_group(self, I: Group):
        return self.R.sum(self.e[i] for i in I)

    def q_group(self, I: Group):
        return self.T.dsum([self.q[i] for i in I])

    # -- maps -------------------------------------------------------------
    def T_ij(self, I, J, a):
        I, J = _g(I), _g(J)
        return self.T.T_ij(a, self.q_group(I), self.q_group(_neg(J)))

    def T_j(self, J, u):
        return self.T.T_j(u, self.q_group(_neg(_g(J))))

    def x_ij(self, I, J, a):
        return self.U.from_delta(self.T_ij(I, J, a))

    def x_j(self, J, u):
        return self.U.from_delta(self.T_j(J, u))

    def z_ij(self, I, J, a, p):
        return self.U.conjugate(self.x_ij(J, I, p), self.x_ij(I, J, a))

    def z_j(self, J, u, s):
        return self.U.conjugate(self.x_j(_neg(_g(J)), s), self.x_j(J, u))

    def eval_gen(self, g: Generator):
        if g.kind == "Xij":
            v = self.x_ij(g.I, g.J, g.params[0])
        elif g.kind == "Xj":
            v = self.x_j(g.J, g.params[0])
        elif g.I is not None:
            v = self.z_ij(g.I, g.J, *g.params)
        else:
            v = self.z_j(g.J, *g.params)
        return self.U.inv(v) if g.inverse else v

    def stmap(self, w: Word):
        acc = None
        for g in w.factors:
            v = self.eval_gen(g)
            acc = v if acc is None else self.U.mul(acc, v)
        return self.U.one() if acc is None else acc

    # -- actions ------------------------------------------------------------
    def act_S(self, g, a):
        return self.U.conj_ring(g, a)

    def act_R(self, g, p):
        """Action on lifted target elements: through δ for source g."""
        return self.dp1(self.U.conj_ring(g, p))

    def act_Theta(self, g, u):
        return self.U.conj_delta(g, u)

    def act_Delta(self, g, s):
        return self.dp1_delta(self.U.conj_delta(g, s))

    # -- carriers -----------------------------------------------------------
    def _memo(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def _ring_list(self, elems):
        seen, out = set(), []
        for a in elems:
            k = self.R.key(a)
            if k not in seen:
                seen.add(k)
                out.append(a)
        return out

    def _delta_list(self, elems):
        seen, out = set(), []
        for u in elems:
            k = self.T.dkey(u)
            if k not in seen:
                seen.add(k)
                out.append(u)
        out.sort(key=self.T.dkey)
        return out

    def S(self, I, J) -> list:
        """Source Peirce block S_IJ."""
        I, J = _g(I), _g(J)

        def build():
            blk = self.R.block(I, J)
            if self.cm is None:
                return list(blk)
            return [a for a in blk if self.cm.in_source_ring(a)]

        return self._memo(("S", I, J), build)

    def Rb(self, I, J) -> list:
        """Lifted target block R_IJ."""
        I, J = _g(I), _g(J)
        tgt = self.target.R
        return self._memo(("R", I, J), lambda: self._ring_list([self.lift(a) for a in tgt.block(I, J)]))

    def theta0(self, j: int) -> list:
        def build():
            els = self.T.theta0(j)
            if self.cm is not None:
                els = [u for u in els if self.cm.in_source_delta(u)]
            return self._delta_list(els)

        return self._memo(("Θ", j), build)

    def delta0(self, j: int) -> list:
        return self._memo(
            ("Δ", j), lambda: self._delta_list([self.lift_delta(u) for u in self.target.theta0(j)])
        )

    def _dsums(self, *lists):
        return self._delta_list(
            [self.T.dsum(list(t)) for t in itertools.product(*lists)]
        )

    def theta_group(self, I) -> list:
        """Source Δ⁰_{i⊕j} = Θ⁰_i ∔ φ(S_{−i,j}) ∔ Θ⁰_j."""
        I = _g(I)
        if len(I) == 1:
            return self.theta0(I[0])
        i, j = I
        T = self.T
        return self._memo(
            ("Θ⊕", I),
            lambda: self._dsums(self.theta0(i), [T.phi(a) for a in self.S(-i, j)], self.theta0(j)),
        )

    def delta_group(self, I) -> list:
        """Lifted target Δ⁰_{i⊕j}."""
        I = _g(I)
        if len(I) == 1:
            return self.delta0(I[0])
        i, j = I
        T = self.T
        return self._memo(
            ("Δ⊕", I),
            lambda: self._dsums(self.delta0(i), [T.phi(a) for a in self.Rb(-i, j)], self.delta0(j)),
        )

    def theta_minus(self, m: int, j: int) -> list:
        """Θ^{⊖m}_j = q_{−m}·S_{−m,j} ∔ Θ⁰_j ∔ q_m·S_{mj}."""
        T = self.T
        return self._memo(
            ("Θ⊖", m, j),
            lambda: self._dsums(
                [T.act(self.q[-m], a) for a in self.S(-m, j)],
                self.theta0(j),
                [T.act(self.q[m], a) for a in self.S(m, j)],
            ),
        )

    def delta_minus(self, m: int, j: int) -> list:
        T = self.T
        return self._memo(
            ("Δ⊖", m, j),
            lambda: self._dsums(
                [T.act(self.q[-m], a) for a in self.Rb(-m, j)],
                self.delta0(j),
                [T.act(self.q[m], a) for a in self.Rb(m, j)],
            ),
        )

    # carrier objects
    def describe_ring(self, a) -> dict:
        return {f"{p},{q}": str(v) for (p, q), v in self.R.labels(a).items()}

    def describe_delta(self, u) -> dict:
        return _jsonkeys(self.T.describe(u))

    def cr(self, name, elems) -> Carrier:
        return Carrier.from_list(name, list(elems), describe=self.describe_ring)

    def cd(self, name, elems) -> Carrier:
        return Carrier(name, stack_delta(list(elems)), describe=self.describe_delta)

    def describe_unitary(self, g) -> dict:
        return self.describe_delta(self.U.to_delta(g))


def _jsonkeys(d):
    if isinstance(d, dict):
        return {(",".join(map(str, k)) if isinstance(k, tuple) else str(k)): _jsonkeys(v) for k, v in d.items()}
    return str(d)


def z_generator(ctx: Context, kind: str, indices: tuple, params: tuple):
    """Evaluate one generator given by kind and indices.

    Index conventions: Xij/Zij (i, j); Xj/Zj (j,); Z_i⊕j_k (i, j, k);
    Z_i_j⊕k (i, j, k); Z_i⊕j (i, j); Z⊖i_j (i, j).
    """
    ix = tuple(indices)
    if kind == "Xij":
        g = X(ix[0], ix[1], *params)
    elif kind == "Xj":
        g = Xj(ix[0], *params)
    elif kind == "Zij":
        g = Z(ix[0], ix[1], *params)
    elif kind == "Zj":
        g = Zj(ix[0], *params)
    elif kind == "Z_i⊕j_k":
        g = Z(ix[:2], ix[2], *params)
    elif kind == "Z_i_j⊕k":
        g = Z(ix[0], ix[1:], *params)
    elif kind == "Z_i⊕j":
        g = Zj(ix, *params)
    elif kind == "Z⊖i_j":
        g = Zminus(ix[0], ix[1], *params)
    else:
        raise ValueError(f"unknown generator kind {kind}")
    return ctx.eval_gen(g)


def z_quotient(ctx: Context, qf: QuotientFamily, k: int, l: int, a, p):
    """Z_kl(a, p) computed from the summed pairs η_k, η_l of H/Ψ."""
    T, U = ctx.T, ctx.U
    x = U.from_delta(T.T_ij(a, qf.q(k), qf.q(-l)))
    y = U.from_delta(T.T_ij(p, qf.q(l), qf.q(-k)))
    return U.conjugate(y, x)


# ---------------------------------------------------------------------------
# patterns and verification


@dataclass
class Pattern:
    """One index assignment of a relation family with its parameter carriers."""

    family: str
    indices: tuple
    carriers: list
    build: Callable[..., tuple]  # batched params -> (lhs Word, rhs Word)

    def key(self) -> tuple:
        return (self.family, list(self.indices))


def _mutated(word: Word, ctx: Context) -> Word:
    """Negate the first parameter of the first factor (a planted fault)."""
    if not word.factors:
        return word
    g = word.factors[0]
    p0 = g.params[0]
    neg = ctx.R.neg(p0) if isinstance(p0, np.ndarray) else ctx.T.dneg(p0)
    g2 = Generator(g.kind, g.J, g.I, (neg,) + tuple(g.params[1:]), g.minus, g.inverse)
    return Word((g2,) + word.factors[1:])


def signed(ell: int) -> list[int]:
    return [i for i in range(-ell, ell + 1) if i]


def _distinct_abs(*ix) -> bool:
    a = [abs(i) for i in ix]
    return len(set(a)) == len(a)


def unrel_patterns(ctx: Context) -> list[Pattern]:
    """The ten defining relation families of the unitary Steinberg group."""
    R, T = ctx.R, ctx.T
    I = ctx.indices
    S, Th = ctx.S, ctx.theta0
    out: list[Pattern] = []
    add = out.append
    conjR, negR, mulR = R.conj, R.neg, R.mul

    for i, j in itertools.product(I, I):
        if i in (j, -j):
            continue
        add(Pattern("X_ij(a)=X_-j,-i(-ā)", (i, j), [ctx.cr("a", S(i, j))],
                    lambda a, i=i, j=j: (W(X(i, j, a)), W(X(-j, -i, negR(conjR(a)))))))
        add(Pattern("X_ij(a)X_ij(b)=X_ij(a+b)", (i, j), [ctx.cr("a", S(i, j)), ctx.cr("b", S(i, j))],
                    lambda a, b, i=i, j=j: (W(X(i, j, a), X(i, j, b)), W(X(i, j, R.add(a, b))))))
        add(Pattern("[X_-i,j(a),X_ji(b)]=X_i(φ(ab))", (i, j), [ctx.cr("a", S(-i, j)), ctx.cr("b", S(j, i))],
                    lambda a, b, i=i, j=j: (comm(X(-i, j, a), X(j, i, b)), W(Xj(i, T.phi(mulR(a, b)))))))
        add(Pattern("[X_i(u),X_j(v)]=X_-i,j(-π(u)̄π(v))", (i, j), [ctx.cd("u", Th(i)), ctx.cd("v", Th(j))],
                    lambda u, v, i=i, j=j: (comm(Xj(i, u), Xj(j, v)),
                                            W(X(-i, j, negR(mulR(conjR(T.pi(u)), T.pi(v))))))))
        add(Pattern("[X_i(u),X_ij(a)]=X_-i,j(ρ(u)a)X_j(∸u·(-a))", (i, j), [ctx.cd("u", Th(i)), ctx.cr("a", S(i, j))],
                    lambda u, a, i=i, j=j: (comm(Xj(i, u), X(i, j, a)),
                                            W(X(-i, j, mulR(T.rho(u), a)), Xj(j, T.dneg(T.act(u, negR(a))))))))
        for k in I:
            if k in (j, -j) or k in (i, -i):
                continue
            add(Pattern("[X_ij(a),X_jk(b)]=X_ik(ab)", (i, j, k), [ctx.cr("a", S(i, j)), ctx.cr("b", S(j, k))],
                        lambda a, b, i=i, j=j, k=k: (comm(X(i, j, a), X(j, k, b)), W(X(i, k, mulR(a, b))))))
        for l in I:
            if l not in (i, -j):
                add(Pattern("[X_ij(a),X_l(u)]=1", (i, j, l), [ctx.cr("a", S(i, j)), ctx.cd("u", Th(l))],
                            lambda a, u, i=i, j=j, l=l: (comm(X(i, j, a), Xj(l, u)), W())))
            for k in I:
                if k in (l, -l):
                    continue
                if j != k and k != -i and i != l and l != -j:
                    add(Pattern("[X_ij(a),X_kl(b)]=1", (i, j, k, l), [ctx.cr("a", S(i, j)), ctx.cr("b", S(k, l))],
                                lambda a, b, i=i, j=j, k=k, l=l: (comm(X(i, j, a), X(k, l, b)), W())))
    for j in I:
        add(Pattern("X_j(u)X_j(v)=X_j(u∔v)", (j,), [ctx.cd("u", Th(j)), ctx.cd("v", Th(j))],
                    lambda u, v, j=j: (W(Xj(j, u), Xj(j, v)), W(Xj(j, T.dadd(u, v))))))
        add(Pattern("[X_i(u),X_i(v)]=X_i(φ(-π(u)̄π(v)))", (j,), [ctx.cd("u", Th(j)), ctx.cd("v", Th(j))],
                    lambda u, v, j=j: (comm(Xj(j, u), Xj(j, v)),
                                       W(Xj(j, T.phi(negR(mulR(conjR(T.pi(u)), T.pi(v)))))))))
    return out


UNREL_FAMILIES = (
    "X_ij(a)=X_-j,-i(-ā)",
    "X_ij(a)X_ij(b)=X_ij(a+b)",
    "X_j(u)X_j(v)=X_j(u∔v)",
    "[X_ij(a),X_kl(b)]=1",
    "[X_ij(a),X_l(u)]=1",
    "[X_-i,j(a),X_ji(b)]=X_i(φ(ab))",
    "[X_i(u),X_i(v)]=X_i(φ(-π(u)̄π(v)))",
    "[X_i(u),X_j(v)]=X_-i,j(-π(u)̄π(v))",
    "[X_ij(a),X_jk(b)]=X_ik(ab)",
    "[X_i(u),X_ij(a)]=X_-i,j(ρ(u)a)X_j(∸u·(-a))",
)

PRESENTATION_FAMILIES = (
    "Sym Z_ij", "Sym Z_i⊕j,k (opposite)", "Sym Z_i⊕j,k (swap)", "Sym Z_i⊕j", "Sym Z⊖",
    "Add Z_ij", "Add Z_j", "Add Z_i⊕j,k", "Add Z_i,j⊕k", "Add Z_i⊕j", "Add Z⊖",
    "Comm 1", "Comm 2", "Comm 3", "Comm 4", "Comm 5",
    "Simp 1", "Simp 2", "Simp 3", "HW 1", "HW 2", "Delta 1", "Delta 2",
)


def presentation_patterns(ctx: Context) -> list[Pattern]:
    """Identities among the relative generators Z (all index patterns)."""
    R, T = ctx.R, ctx.T
    I = ctx.indices
    S, Rb, Th, Dl = ctx.S, ctx.Rb, ctx.theta0, ctx.delta0
    cr, cd = ctx.cr, ctx.cd
    negbar = lambda a: R.neg(R.conj(a))
    out: list[Pattern] = []
    add = out.append

    def zz(i, j):
        return [cr("a", S(i, j)), cr("p", Rb(j, i))]

    for i, j in itertools.product(I, I):
        if not _distinct_abs(i, j):
            continue
        add(Pattern("Sym Z_ij", (i, j), zz(i, j),
                    lambda a, p, i=i, j=j: (W(Z(i, j, a, p)), W(Z(-j, -i, negbar(a), negbar(p))))))
        add(Pattern("Add Z_ij", (i, j), [cr("a", S(i, j)), cr("b", S(i, j)), cr("p", Rb(j, i))],
                    lambda a, b, p, i=i, j=j: (W(Z(i, j, a, p), Z(i, j, b, p)), W(Z(i, j, R.add(a, b), p)))))
        # Z_{i⊕j}
        G, mG = (i, j), (-i, -j)
        add(Pattern("Sym Z_i⊕j", G, [cd("u", ctx.theta_group(G)), cd("s", ctx.delta_group(mG))],
                    lambda u, s, G=G: (W(Zj(G, u, s)), W(Zj(G[::-1], u, s)))))
        add(Pattern("Add Z_i⊕j", G, [cd("u", ctx.theta_group(G)), cd("v", ctx.theta_group(G)), cd("s", ctx.delta_group(mG))],
                    lambda u, v, s, G=G: (W(Zj(G, u, s), Zj(G, v, s)), W(Zj(G, T.dadd(u, v), s)))))
        # Z^{⊖i}_j
        add(Pattern("Sym Z⊖", (i, j), [cd("u", ctx.theta_minus(i, j)), cd("s", ctx.delta_minus(i, -j))],
                    lambda u, s, i=i, j=j: (W(Zminus(i, j, u, s)), W(Zminus(-i, j, u, s)))))
        add(Pattern("Add Z⊖", (i, j), [cd("u", ctx.theta_minus(i, j)), cd("v", ctx.theta_minus(i, j)), cd("s", ctx.delta_minus(i, -j))],
                    lambda u, v, s, i=i, j=j: (W(Zminus(i, j, u, s), Zminus(i, j, v, s)), W(Zminus(i, j, T.dadd(u, v), s)))))
        # (Simp 2), (Simp 3)
        add(Pattern("Simp 2", (i, j), zz(i, j),
                    lambda a, p, i=i, j=j: (W(Z(i, j, a, p)), W(Zj((-i, j), T.phi(a), T.phi(p))))))
        add(Pattern("Simp 3", (i, j), [cd("u", Th(j)), cd("s", Dl(-j))],
                    lambda u, s, i=i, j=j: (W(Zj(j, u, s)), W(Zminus(i, j, u, s)))))
        # (Delta 1)
        add(Pattern("Delta 1", (i, j), [cr("a", S(i, j)), cr("b", S(j, i)), cr("p", Rb(j, i))],
                    lambda a, b, p, i=i, j=j: (W(Z(i, j, a, R.add(ctx.dp1(b), p))),
                                               conj(Z(j, i, b, R.zero), Z(i, j, a, p)))))
        # (Comm 4): ^{Z_ij(a,p)} Z_{i⊕j}(u,s)
        add(Pattern("Comm 4", (i, j), zz(i, j) + [cd("u", ctx.theta_group(G)), cd("s", ctx.delta_group(mG))],
                    lambda a, p, u, s, i=i, j=j, G=G: _comm_conj(
                        ctx, Z(i, j, a, p), lambda g: Zj(G, ctx.act_Theta(g, u), ctx.act_Delta(g, s)), Zj(G, u, s))))
        # (Comm 5): ^{Z_i(u,s)} Z^{⊖i}_j(v,t)
        add(Pattern("Comm 5", (i, j), [cd("u", Th(i)), cd("s", Dl(-i)), cd("v", ctx.theta_minus(i, j)), cd("t", ctx.delta_minus(i, -j))],
                    lambda u, s, v, t, i=i, j=j: _comm_conj(
                        ctx, Zj(i, u, s), lambda g: Zminus(i, j, ctx.act_Theta(g, v), ctx.act_Delta(g, t)), Zminus(i, j, v, t))))
        # (HW 2)
        add(Pattern("HW 2", (i, j),
                    [cd("u", Th(-j)), cr("a", S(i, -j)), cd("s", Dl(i)), cr("p", Rb(-i, j)), cd("t", Dl(j)), cr("q", Rb(i, j))],
                    lambda u, a, s, p, t, q, i=i, j=j: _hw2(ctx, i, j, u, a, s, p, t, q)))
        for k in I:
            if not _distinct_abs(i, j, k):
                continue
            G = (i, j)
            zG = [cr("a", S(G, k)), cr("p", Rb(k, G))]
            add(Pattern("Sym Z_i⊕j,k (opposite)", (i, j, k), zG,
                        lambda a, p, G=G, k=k: (W(Z(G, k, a, p)), W(Z(-k, _neg(G), negbar(a), negbar(p))))))
            add(Pattern("Sym Z_i⊕j,k (swap)", (i, j, k), zG,
                        lambda a, p, G=G, k=k: (W(Z(G, k, a, p)), W(Z(G[::-1], k, a, p)))))
            add(Pattern("Add Z_i⊕j,k", (i, j, k), [cr("a", S(G, k)), cr("b", S(G, k)), cr("p", Rb(k, G))],
                        lambda a, b, p, G=G, k=k: (W(Z(G, k, a, p), Z(G, k, b, p)), W(Z(G, k, R.add(a, b), p)))))
            add(Pattern("Add Z_i,j⊕k", (k, i, j), [cr("a", S(k, G)), cr("b", S(k, G)), cr("p", Rb(G, k))],
                        lambda a, b, p, G=G, k=k: (W(Z(k, G, a, p), Z(k, G, b, p)), W(Z(k, G, R.add(a, b), p)))))
            add(Pattern("Simp 1", (i, j, k), zz(i, k),
                        lambda a, p, i=i, j=j, k=k: (W(Z(i, k, a, p)), W(Z((i, j), k, a, p)))))
            add(Pattern("Comm 3", (i, j, k), zz(i, j) + zG,
                        lambda a, p, b, q, i=i, j=j, G=G, k=k: _comm_conj(
                            ctx, Z(i, j, a, p), lambda g: Z(G, k, ctx.act_S(g, b), ctx.act_R(g, q)), Z(G, k, b, q))))
            add(Pattern("HW 1", (i, j, k), [cr("a", S(k, i)), cr("p", Rb(i, j)), cr("q", Rb(i, k)), cr("r", Rb(j, k))],
                        lambda a, p, q, r, i=i, j=j, k=k: _hw1(ctx, i, j, k, a, p, q, r)))
        for l in I:
            if _distinct_abs(i, j, l):
                add(Pattern("Comm 2", (i, j, l), zz(i, j) + [cd("u", Th(l)), cd("s", Dl(-l))],
                            lambda a, p, u, s, i=i, j=j, l=l: (comm(Z(i, j, a, p), Zj(l, u, s)), W())))
        for k, l in itertools.product(I, I):
            if _distinct_abs(i, j, k, l):
                add(Pattern("Comm 1", (i, j, k, l), zz(i, j) + [cr("b", S(k, l)), cr("q", Rb(l, k))],
                            lambda a, p, b, q, i=i, j=j, k=k, l=l: (comm(Z(i, j, a, p), Z(k, l, b, q)), W())))
    for j in I:
        add(Pattern("Add Z_j", (j,), [cd("u", Th(j)), cd("v", Th(j)), cd("s", Dl(-j))],
                    lambda u, v, s, j=j: (W(Zj(j, u, s), Zj(j, v, s)), W(Zj(j, T.dadd(u, v), s)))))
        add(Pattern("Delta 2", (j,), [cd("u", Th(j)), cd("v", Th(-j)), cd("s", Dl(-j))],
                    lambda u, v, s, j=j: (W(Zj(j, u, T.dadd(ctx.dp1_delta(v), s))),
                                          conj(Zj(-j, v, T.dzero()), Zj(j, u, s)))))
    return out


def _comm_conj(ctx: Context, zgen: Generator, rhs_of: Callable, inner: Generator):
    """(^z inner, rhs built from the evaluated z)."""
    g = ctx.eval_gen(zgen)
    return conj(zgen, inner), W(rhs_of(g))


def _hw1(ctx: Context, i, j, k, a, p, q, r):
    R = ctx.R
    Tjk = ctx.x_ij(j, k, r)
    Tij = ctx.x_ij(i, j, p)
    lhs = W(Z((j, k), i, ctx.U.conj_ring(Tjk, a), R.add(p, q)))
    rhs = W(Z(k, (i, j), ctx.U.conj_ring(Tij, a), ctx.U.conj_ring(Tij, R.add(q, r))))
    return lhs, rhs


def _hw2(ctx: Context, i, j, u, a, s, p, t, q):
    T, U = ctx.T, ctx.U
    Tij = ctx.x_ij(i, j, q)
    Ti = ctx.x_j(i, s)
    first = U.conj_delta(Tij, T.dadd(u, T.phi(a)))
    second = T.dsum([s, T.phi(p), t])
    lhs = W(Zj((-j, -i), first, second))
    v = U.conj_delta(Ti, T.dadd(u, T.act(ctx.q[i], a)))
    w = U.conj_delta(Ti, T.dsum([T.act(ctx.q[-i], p), t, T.act(ctx.q[i], q)]))
    rhs = W(Zminus(i, -j, v, w))
    return lhs, rhs


SUITES = {"unrel": unrel_patterns, "presentation": presentation_patterns}


def _task_rng(seed: int, key) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFF, seed >> 32, int(stable_hash(key), 16) & 0xFFFFFFFF])


def _run_pattern(ctx: Context, pat: Pattern, budget: int, seed: int, mutate: frozenset, max_witnesses: int) -> dict:
    rng = _task_rng(seed, pat.key())
    mode, total, chunks = index_tuples([len(c) for c in pat.carriers], budget, rng)
    rec = {"family": pat.family, "indices": list(pat.indices), "mode": mode, "space": total,
           "instances": 0, "failures": 0, "witnesses": []}
    U = ctx.U
    for cols in chunks:
        args = [c.take(ix) for c, ix in zip(pat.carriers, cols)]
        lhs, rhs = pat.build(*args)
        if pat.family in mutate:
            rhs = _mutated(rhs, ctx)
        L, Rv = ctx.stmap(lhs), ctx.stmap(rhs)
        n = len(cols[0]) if cols else 1
        ok = np.broadcast_to(np.asarray(U.eq(L, Rv), dtype=bool), (n,))
        rec["instances"] += n
        bad = np.nonzero(~ok)[0]
        rec["failures"] += int(len(bad))
        for b in bad[: max(0, max_witnesses - len(rec["witnesses"]))]:
            b = int(b)
            params = {c.name: c.describe(c.get(int(ix[b]))) for c, ix in zip(pat.carriers, cols)}
            rec["witnesses"].append({
                "params": params,
                "param_index": [int(ix[b]) for ix in cols],
                "lhs": lhs.label(), "rhs": rhs.label(),
                "lhs_value": ctx.describe_unitary(_pick(ctx, L, b)),
                "rhs_value": ctx.describe_unitary(_pick(ctx, Rv, b)),
            })
    rec["hash"] = stable_hash(rec["family"], rec["indices"], rec["mode"], rec["instances"], rec["failures"])
    return rec


def _pick(ctx: Context, g, b: int):
    """Entry b of a batched unitary element (unbatched parts broadcast)."""
    if isinstance(g, tuple):
        return tuple(c[b] if c.ndim > t else c for c, t in zip(g, ctx.T.dtrail))
    return g[b] if g.ndim > 2 else g


_POOL_STATE: dict = {}


def _worker(k: int) -> dict:
    s = _POOL_STATE
    return _run_pattern(s["ctx"], s["patterns"][k], s["budgets"][k], s["seed"], s["mutate"], s["maxw"])


def run_patterns(
    ctx: Context,
    patterns: Sequence[Pattern],
    check: str,
    budget: int = 10**7,
    seed: int = 0,
    workers: int = 1,
    mutate: Iterable[str] = (),
    max_witnesses: int = 3,
) -> tuple[Report, list[dict]]:
    """Evaluate every pattern; ``budget`` caps the instances of each family.

    Returns the merged report and one record per pattern (in pattern order).
    """
    mutate = frozenset(mutate)
    per_family: dict[str, int] = {}
    for p in patterns:
        per_family[p.family] = per_family.get(p.family, 0) + 1
    budgets = [max(1, budget // per_family[p.family]) if budget else 0 for p in patterns]
    if workers > 1 and len(patterns) > 1:
        _POOL_STATE.update(ctx=ctx, patterns=list(patterns), budgets=budgets, seed=seed,
                           mutate=mutate, maxw=max_witnesses)
        mp = multiprocessing.get_context("fork")
        with mp.Pool(workers) as pool:
            records = pool.map(_worker, range(len(patterns)), chunksize=max(1, len(patterns) // (4 * workers)))
        _POOL_STATE.clear()
    else:
        records = [_run_pattern(ctx, p, b, seed, mutate, max_witnesses) for p, b in zip(patterns, budgets)]
    rep = Report(check, seed=seed, budget=budget, meta={"context": ctx.name, "ell": ctx.ell,
                                                        "mutate": sorted(mutate)})
    for rec in records:
        it = rep.item(rec["family"])
        it.instances += rec["instances"]
        it.failures += rec["failures"]
        it.space += rec["space"]
        if rec["mode"] == "sampled":
            it.mode = "sampled"
        for w in rec["witnesses"]:
            if sum(1 for f in rep.failures if f["name"] == rec["family"]) < max_witnesses:
                rep.failures.append({"name": rec["family"], "indices": rec["indices"], "witness": w})
    rep.meta["patterns"] = len(records)
    rep.meta["digest"] = stable_hash([r["hash"] for r in records])
    return rep, records


def verify(
    ctx: Context,
    suite: str = "unrel",
    budget: int = 10**7,
    seed: int = 0,
    workers: int = 1,
    mutate: Iterable[str] = (),
    jsonl: str | None = None,
    families: Iterable[str] | None = None,
) -> Report:
    """Run a relation suite ("unrel" or "presentation") against stmap."""
    pats = SUITES[suite](ctx)
    if families is not None:
        fam = set(families)
        pats = [p for p in pats if p.family in fam]
    rep, records = run_patterns(ctx, pats, suite, budget, seed, workers, mutate)
    if jsonl:
        write_jsonl(jsonl, records)
    return rep


def write_jsonl(path: str, records: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({**r, "pass": r["failures"] == 0}, sort_keys=True, ensure_ascii=False) + "\n")


def enumerate_relations(ctx: Context, suite: str = "unrel", budget: int = 10**7, seed: int = 0) -> Iterator[RelationInstance]:
    """Instance stream: one RelationInstance per parameter tuple (unbatched)."""
    pats = SUITES[suite](ctx)
    per_family: dict[str, int] = {}
    for p in pats:
        per_family[p.family] = per_family.get(p.family, 0) + 1
    for p in pats:
        b = max(1, budget // per_family[p.family]) if budget else 0
        _, _, chunks = index_tuples([len(c) for c in p.carriers], b, _task_rng(seed, p.key()))
        for cols in chunks:
            for r in range(len(cols[0]) if cols else 1):
                args = [c.get(int(ix[r])) for c, ix in zip(p.carriers, cols)]
                lhs, rhs = p.build(*args)
                yield RelationInstance(
                    p.family, p.indices, lhs, rhs,
                    {c.name: int(ix[r]) for c, ix in zip(p.carriers, cols)},
                )


def instance_holds(ctx: Context, inst: RelationInstance) -> bool:
    return bool(np.all(ctx.U.eq(ctx.stmap(inst.lhs), ctx.stmap(inst.rhs))))


# ---------------------------------------------------------------------------
# root subgroups and the commutator expansion


def root_generator(phi: RootSystem, r, mu) -> Generator:
    """X_α(μ): e_j − e_i ↦ X_ij, e_j and 2e_j ↦ X_j."""
    key = root_indices(phi, r)
    if key[0] == "ij":
        return X(key[1], key[2], mu)
    return Xj(key[1], mu)


def root_carrier(ctx: Context, phi: RootSystem, r) -> list:
    """X_α(S, Θ) parameters: S_ij, Θ⁰_j, or φ(S_{−j,j}) for long roots."""
    key = root_indices(phi, r)
    if key[0] == "ij":
        return ctx.S(key[1], key[2])
    if key[0] == "j":
        return ctx.theta0(key[1])
    j = key[1]
    return ctx._delta_list([ctx.T.phi(a) for a in ctx.S(-j, j)])


def commutator_expansion(ctx: Context, phi: RootSystem, alpha, beta, mu, nu) -> Word:
    """Right-hand side of [X_α(μ), X_β(ν)] as a word, ultrashort factors last."""
    R, T = ctx.R, ctx.T
    ka, kb = root_indices(phi, alpha), root_indices(phi, beta)
    ca, cb = phi.root(alpha).coords, phi.root(beta).coords
    if any(x for x in ca) and _antiparallel(ca, cb):
        raise ValueError(f"antiparallel roots {alpha}, {beta}")
    negbar = lambda a: R.neg(R.conj(a))
    if ka[0] == "ij" and kb[0] == "ij":
        reps_a = [(ka[1], ka[2], mu), (-ka[2], -ka[1], negbar(mu))]
        reps_b = [(kb[1], kb[2], nu), (-kb[2], -kb[1], negbar(nu))]
        for i, j, a in reps_a:
            for k, l, b in reps_b:
                if j == k and i not in (l, -l):
                    return W(X(i, l, R.mul(a, b)))
                if j == k and i == -l:
                    return W(Xj(l, T.phi(R.mul(a, b))))
        for i, j, a in reps_a:
            for k, l, b in reps_b:
                if l == i and k not in (j, -j):
                    return W(X(k, j, R.neg(R.mul(b, a))))
                if l == i and k == -j:
                    return W(Xj(j, T.dneg(T.phi(R.mul(b, a)))))
        return W()
    if ka[0] != "ij" and kb[0] != "ij":
        m, n = ka[1], kb[1]
        prod = R.neg(R.mul(R.conj(T.pi(mu)), T.pi(nu)))
        if m == n:
            return W(Xj(m, T.phi(prod)))
        if m != -n:
            return W(X(-m, n, prod))
        raise ValueError("unsupported root pattern")
    # one (ultra)short-or-long e_m against a short root
    first_short = ka[0] == "ij"
    (key_s, a), (m, u) = ((ka, mu), (kb[1], nu)) if first_short else ((kb, nu), (ka[1], mu))
    for i, j, aa in ((key_s[1], key_s[2], a), (-key_s[2], -key_s[1], negbar(a))):
        if i == m:
            short = R.mul(T.rho(u), aa)
            ultra = T.dneg(T.act(u, R.neg(aa)))
            if first_short:
                return W(X(-m, j, R.neg(short)), Xj(j, T.dneg(ultra)))
            return W(X(-m, j, short), Xj(j, ultra))
    return W()


def _antiparallel(a, b) -> bool:
    # b = −c·a for some c > 0
    num = sum(x * y for x, y in zip(a, b))
    if num >= 0:
        return False
    na, nb = sum(x * x for x in a), sum(y * y for y in b)
    return num * num == na * nb


def check_commutator_expansion(ctx: Context, phi: RootSystem, budget: int = 0, seed: int = 0) -> Report:
    """[X_α(μ), X_β(ν)] = expansion for all non-antiparallel root pairs."""
    rep = Report("commutator_expansion", seed=seed, budget=budget, meta={"context": ctx.name})
    roots = phi.roots
    pats = []
    for a, b in itertools.product(roots, roots):
        if _antiparallel(a.coords, b.coords):
            continue
        pats.append(Pattern(
            f"{phi.root(a).lengthClass}/{phi.root(b).lengthClass}", (str(a), str(b)),
            [_auto_carrier(ctx, "μ", root_carrier(ctx, phi, a)), _auto_carrier(ctx, "ν", root_carrier(ctx, phi, b))],
            lambda mu, nu, a=a, b=b: (comm(root_generator(phi, a, mu), root_generator(phi, b, nu)),
                                      commutator_expansion(ctx, phi, a, b, mu, nu))))
    r, _ = run_patterns(ctx, pats, rep.check, budget, seed)
    rep.merge(r)
    rep.failures = r.failures
    return rep


def _auto_carrier(ctx: Context, name: str, elems) -> Carrier:
    return ctx.cd(name, elems) if isinstance(elems[0], tuple) else ctx.cr(name, elems)


def relabel(word: Word, w) -> Word:
    """Apply a signed permutation of the hyperbolic family to every index."""
    f = lambda G: None if G is None else tuple(weyl_index(w, i) for i in G)
    return Word(tuple(
        Generator(g.kind, f(g.J), f(g.I), g.params,
                  None if g.minus is None else weyl_index(w, g.minus), g.inverse)
        for g in word.factors))


def check_weyl_equivariance(ctx: Context, phi: RootSystem, budget: int = 0, seed: int = 0,
                            elements: Sequence | None = None) -> Report:
    """expansion(wα, wβ) agrees with w·expansion(α, β) after stmap.

    Relabelling H by w turns X_ij(μ) into X_{w(i),w(j)}(μ); when the
    canonical key of wα is the opposite labelling, μ is transported by
    μ ↦ −μ̄ before calling the expansion.
    """
    rep = Report("weyl_equivariance", seed=seed, budget=budget, meta={"context": ctx.name})
    ws = list(elements) if elements is not None else list(weyl_elements(phi.rank))
    R = ctx.R
    pats = []

    def moved(w, r):
        """(carrier of the relabelled generator, transport to the canonical key of wr)."""
        key = root_indices(phi, r)
        wr = phi.root(apply_weyl(w, r.coords))
        if key[0] != "ij":
            return root_carrier(ctx, phi, wr), (lambda m: m), wr
        i, j = weyl_index(w, key[1]), weyl_index(w, key[2])
        same = root_indices(phi, wr)[1:] == (i, j)
        return ctx.S(i, j), ((lambda m: m) if same else (lambda m: R.neg(R.conj(m)))), wr

    for w in ws:
        for a, b in itertools.product(phi.roots, phi.roots):
            if _antiparallel(a.coords, b.coords):
                continue
            (ca, ta, wa), (cb, tb, wb) = moved(w, a), moved(w, b)
            pats.append(Pattern(
                "W-equivariance", (str(w), str(a), str(b)),
                [_auto_carrier(ctx, "μ", ca), _auto_carrier(ctx, "ν", cb)],
                lambda mu, nu, w=w, a=a, b=b, wa=wa, wb=wb, ta=ta, tb=tb: (
                    commutator_expansion(ctx, phi, wa, wb, ta(mu), tb(nu)),
                    relabel(commutator_expansion(ctx, phi, a, b, mu, nu), w))))
    r, _ = run_patterns(ctx, pats, rep.check, budget, seed)
    rep.merge(r)
    rep.failures = r.failures
    return rep


# ---------------------------------------------------------------------------
# injectivity of the product map on special subsets


def product_injectivity(ctx: Context, sigma: RootSubset, budget: int = 10**6, seed: int = 0,
                        orders: Sequence[Sequence] | None = None) -> Report:
    """Π_{α ∈ Σ∖2Σ} X_α(S, Θ) → U is injective, with an order-independent image."""
    if not sigma.special:
        raise ValueError("Σ must be special")
    phi = sigma.ambient
    base = sigma.without_doubles()
    rep = Report("product_injectivity", seed=seed, budget=budget,
                 meta={"sigma": str(sigma), "context": ctx.name})
    carriers = [root_carrier(ctx, phi, r) for r in base]
    total = int(np.prod([len(c) for c in carriers])) if carriers else 1
    if budget and total > budget:
        raise ValueError(f"{total} tuples exceed the budget {budget}")
    if orders is None:
        rng = np.random.default_rng(seed)
        orders = [list(range(len(base))), list(reversed(range(len(base)))),
                  list(rng.permutation(len(base)))]
    images = []
    for order in orders:
        cols = np.unravel_index(np.arange(total), [len(c) for c in carriers]) if carriers else ()
        acc = ctx.U.one()
        for k in order:
            elems = carriers[k]
            batch = stack_delta(elems) if isinstance(elems[0], tuple) else np.stack(elems)
            sel = tuple(c[cols[k]] for c in batch) if isinstance(batch, tuple) else batch[cols[k]]
            acc = ctx.U.mul(acc, ctx.stmap(W(root_generator(phi, base[k], sel))))
        keys = _unitary_keys(ctx, acc, total)
        images.append(keys)
    inj = len(set(images[0])) == total
    rep.record("injective", inj, None if inj else {"tuples": total, "distinct": len(set(images[0]))})
    same = all(set(im) == set(images[0]) for im in images[1:])
    rep.record("image independent of order", same, None if same else {"orders": [list(map(int, o)) for o in orders]})
    rep.meta["tuples"] = total
    return rep


def _unitary_keys(ctx: Context, g, n: int) -> list[bytes]:
    if isinstance(g, tuple):
        g = ctx.T.dbroadcast(g, (n,))
        return [b"|".join(np.ascontiguousarray(c[k]).tobytes() for c in g) for k in range(n)]
    g = np.broadcast_to(g, (n,) + g.shape[-2:])
    return [np.ascontiguousarray(g[k]).tobytes() for k in range(n)]


# ---------------------------------------------------------------------------
# lemmas on Peirce components


def _decompositions(R, e, X_, Y_, max_terms: int = 2) -> list[list[tuple]]:
    """All ways e = Σ_m x_m y_m with x_m ∈ X_, y_m ∈ Y_ and at most max_terms terms."""
    pairs = [(x, y, R.mul(x, y)) for x in X_ for y in Y_]
    out = []
    for n in range(1, max_terms + 1):
        for combo in itertools.product(range(len(pairs)), repeat=n):
            s = R.sum(pairs[c][2] for c in combo)
            if R.eq(s, e):
                out.append([(pairs[c][0], pairs[c][1]) for c in combo])
    return out


def lemma_ring_pres(ofr: OddFormRing, max_terms: int = 2) -> Report:
    """S_ik ⊗_{e_k R e_k} R_kj → S_ij is inverted by a ↦ Σ a x_m ⊗ y_m.

    Both composites are checked on every element, for every index triple and
    every decomposition e_j = Σ x_m y_m with at most ``max_terms`` terms.
    """
    from .rings import tensor_product

    R, H = ofr.R, ofr.family
    rep = Report("lemma ring-pres", meta={"ring": ofr.name})
    for i, j, k in itertools.product(H.indices, repeat=3):
        A, B, L = R.coeff_group(i, k), R.coeff_group(k, j), R.coeff_group(k, k)
        rmul = lambda a, lam: R.local(R.mul(R.single(i, k, a), R.single(k, k, lam)), i, k)
        lmul = lambda lam, b: R.local(R.mul(R.single(k, k, lam), R.single(k, j, b)), k, j)
        G, pure, expand = tensor_product(A, B, L.elements(), rmul, lmul, name="S⊗R")

        def mult(t):
            return R.sum(R.zmul(c, R.mul(R.single(i, k, a), R.single(k, j, b))) for c, (a, b) in expand(t))

        decs = _decompositions(R, H.e[j], list(R.block([j], [k])), list(R.block([k], [j])), max_terms)
        rep.record("e_j = Σ x_m y_m exists", bool(decs), {"i": i, "j": j, "k": k})
        for dec in decs:
            def g(a):
                acc = G.zero
                for x, y in dec:
                    acc = int(G.add[acc, pure(R.local(R.mul(a, x), i, k), R.local(y, k, j))])
                return acc

            w = {"i": i, "j": j, "k": k, "terms": len(dec)}
            for a in R.block([i], [j]):
                rep.record("mult ∘ g = id", bool(R.eq(mult(g(a)), a)), w)
            for t in G.elements():
                rep.record("g ∘ mult = id", g(mult(t)) == t, w)
    return rep


def lemma_form_pres(ofr: OddFormRing, max_terms: int = 2) -> Report:
    """f(g(u)) = u on Θ⁰_j for the section g built from e_j = Σ x_m y_m."""
    R, H = ofr.R, ofr.family
    rep = Report("lemma form-pres", meta={"ring": ofr.name})
    for j, k in itertools.product(H.indices, repeat=2):
        decs = _decompositions(R, H.e[j], list(R.block([j], [k])), list(R.block([k], [j])), max_terms)
        rep.record("e_j = Σ x_m y_m exists", bool(decs), {"j": j, "k": k})
        theta = ofr.theta0(j)
        for dec in decs:
            for u in theta:
                parts = [ofr.act(ofr.act(u, x), y) for x, y in dec]
                corr = R.zero
                for m, mp in itertools.combinations(range(len(dec)), 2):
                    (xm, ym), (xp, yp) = dec[m], dec[mp]
                    t = R.mul(R.mul(R.conj(yp), R.conj(xp)), R.mul(ofr.rho(u), R.mul(xm, ym)))
                    corr = R.add(corr, t)
                val = ofr.dadd(ofr.dsum(parts), ofr.phi(corr))
                rep.record("f ∘ g = id", bool(ofr.deq(val, u)), {"j": j, "k": k, "terms": len(dec)})
    return rep


# ---------------------------------------------------------------------------
# δ-square and diagonal action


def check_delta_square(ctx: Context) -> Report:
    """p1(stmap(w)) equals stmap of the δ-image word, on generators."""
    if ctx.cm is None:
        raise ValueError("needs a crossed module")
    cm = ctx.cm
    tctx = Context(ofr=cm.target)
    rep = Report("delta-square", meta={"context": ctx.name})
    UT, UR = ctx.U, tctx.U

    def image(g):
        return UR.from_delta(cm.p1.delta(UT.to_delta(g)))

    I = ctx.indices
    for i, j in itertools.product(I, I):
        if i in (j, -j):
            continue
        for a in ctx.S(i, j):
            pa = cm.p1.ring(a)
            rep.record("X_ij", bool(UR.eq(image(ctx.x_ij(i, j, a)), tctx.x_ij(i, j, pa))), {"i": i, "j": j})
            for p in ctx.Rb(j, i):
                rep.record("Z_ij", bool(UR.eq(image(ctx.z_ij(i, j, a, p)), tctx.z_ij(i, j, pa, cm.p1.ring(p)))), {"i": i, "j": j})
    for j in I:
        for u in ctx.theta0(j):
            pu = cm.p1.delta(u)
            rep.record("X_j", bool(UR.eq(image(ctx.x_j(j, u)), tctx.x_j(j, pu))), {"j": j})
            for s in ctx.delta0(-j):
                rep.record("Z_j", bool(UR.eq(image(ctx.z_j(j, u, s)), tctx.z_j(j, pu, cm.p1.delta(s)))), {"j": j})
    return rep


def diagonal_elements(ofr: OddFormRing) -> list:
    """Unitary g with π(g) supported on diagonal slots that pass diag_membership."""
    from .oddform import diag_membership

    U = unitary_group(ofr)
    if not ofr.special:
        raise ValueError("enumeration uses the matrix representation")
    R, H = ofr.R, ofr.family
    slots = [(i, i) for i in H.indices]
    out = []
    for vals in itertools.product(*[R.coeff_group(*s).elements() for s in slots]):
        P = R.zero.copy()
        for (p, q), v in zip(slots, vals):
            P[R.pos[p], R.pos[q]] = R.offset[R.slot[R.pos[p], R.pos[q]]] + v
        if bool(U.is_unitary(P)) and bool(diag_membership(ofr, U.to_delta(P))):
            out.append(P)
    return out


def check_diagonal_action(ofr: OddFormRing) -> Report:
    """ᵍT_ij(a) = T_ij(ᵍa) and ᵍT_j(u) = T_j(ᵍu) for diagonal g."""
    ctx = Context(ofr=ofr)
    U = ctx.U
    rep = Report("diagonal action", meta={"ring": ofr.name})
    diag = diagonal_elements(ofr)
    rep.meta["diagonal elements"] = len(diag)
    I = ctx.indices
    for g in diag:
        for i, j in itertools.product(I, I):
            if i in (j, -j):
                continue
            a = np.stack(ctx.S(i, j))
            ok = U.eq(U.conjugate(g, ctx.x_ij(i, j, a)), ctx.x_ij(i, j, U.conj_ring(g, a)))
            rep.record("ᵍT_ij(a) = T_ij(ᵍa)", bool(np.all(ok)), {"i": i, "j": j})
        for j in I:
            u = stack_delta(ctx.theta0(j))
            ok = U.eq(U.conjugate(g, ctx.x_j(j, u)), ctx.x_j(j, U.conj_delta(g, u)))
            rep.record("ᵍT_j(u) = T_j(ᵍu)", bool(np.all(ok)), {"j": j})
    return rep

"""Odd form rings, their unitary groups, hyperbolic families and crossed modules.

Everything here is batched: ring elements are integer arrays of shape
``(..., N, N)`` over a :class:`~relsteinberg.blockring.BlockRing`, and an
element of Δ is a tuple of arrays sharing the same leading batch axes.  All
operations broadcast over those axes, so a relation can be evaluated for
thousands of parameter tuples in one call.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .blockring import BlockRing
from .report import Carrier, Report, check_property

DeltaElem = tuple  # tuple of arrays


class OddFormRing:
    """Abstract odd form ring (R, Δ) with batched Δ-operations.

    Subclasses provide :meth:`dzero`, :meth:`dadd`, :meth:`dneg`,
    :meth:`phi`, :meth:`pi`, :meth:`rho`, :meth:`act` and
    :meth:`delta_generators`; ``dtrail`` lists the number of trailing axes
    of each Δ component.
    """

    special = False
    dtrail: tuple[int, ...] = ()

    def __init__(self, R: BlockRing, name: str = "(R,Δ)"):
        self.R = R
        self.name = name
        self.family: HyperbolicFamily | None = None

    # -- primitives -------------------------------------------------------
    def dzero(self) -> DeltaElem:
        raise NotImplementedError

    def dadd(self, u: DeltaElem, v: DeltaElem) -> DeltaElem:
        raise NotImplementedError

    def dneg(self, u: DeltaElem) -> DeltaElem:
        raise NotImplementedError

    def phi(self, a):
        raise NotImplementedError

    def pi(self, u):
        raise NotImplementedError

    def rho(self, u):
        raise NotImplementedError

    def act(self, u: DeltaElem, a) -> DeltaElem:
        raise NotImplementedError

    def delta_generators(self) -> list[DeltaElem]:
        raise NotImplementedError

    def theta0(self, j: int) -> list[DeltaElem]:
        """Enumerate Θ⁰_j for the attached family."""
        raise NotImplementedError

    # -- derived ----------------------------------------------------------
    def dsub(self, u, v):
        return self.dadd(u, self.dneg(v))

    def dsum(self, elems: Sequence[DeltaElem]) -> DeltaElem:
        acc = self.dzero()
        for e in elems:
            acc = self.dadd(acc, e)
        return acc

    def deq(self, u, v) -> np.ndarray:
        out = None
        for x, y, t in zip(u, v, self.dtrail):
            x, y = np.broadcast_arrays(x, y)
            e = np.all(x == y, axis=tuple(range(-t, 0))) if t else x == y
            out = e if out is None else out & e
        return out

    def dkey(self, u) -> bytes:
        return b"|".join(np.ascontiguousarray(c).tobytes() for c in u)

    def dbroadcast(self, u, shape) -> DeltaElem:
        return tuple(
            np.broadcast_to(c, tuple(shape) + c.shape[c.ndim - t :]) for c, t in zip(u, self.dtrail)
        )

    def act1(self, u, b):
        """u·(1 + b) in the unitalization: u ∔ φ(b̄ρ(u)) ∔ u·b."""
        R = self.R
        return self.dadd(self.dadd(u, self.phi(R.mul(R.conj(b), self.rho(u)))), self.act(u, b))

    def describe(self, u) -> dict:
        return {"pi": self.R.labels(self.pi(u)), "rho": self.R.labels(self.rho(u))}

    def ring_generators(self) -> list[np.ndarray]:
        """Nonzero slot-homogeneous elements of R together with 0."""
        R = self.R
        out = [R.zero.copy()]
        for p in R.index:
            for q in R.index:
                G = R.coeff_group(p, q)
                for x in G.elements():
                    if x != G.zero:
                        out.append(R.single(p, q, x))
        return out

    def random_ring(self, rng, n: int) -> np.ndarray:
        return np.stack([self.R.random(rng) for _ in range(n)])

    def random_delta(self, rng, n: int, terms: int = 6) -> DeltaElem:
        gens = self.delta_generators()
        out = []
        for _ in range(n):
            pick = rng.integers(0, len(gens), size=terms)
            out.append(self.dsum([gens[int(k)] for k in pick]))
        return stack_delta(out)

    # -- T maps -----------------------------------------------------------
    def T_ij(self, a, qi, qmj):
        """q_i·a ∸ q_{−j}·ā ∸ φ(a)."""
        R = self.R
        return self.dsub(self.dsub(self.act(qi, a), self.act(qmj, R.conj(a))), self.phi(a))

    def T_j(self, u, qmj):
        """u ∸ φ(ρ(u)+π(u)) ∔ q_{−j}·(ρ(u) − π(u)̄)."""
        R = self.R
        r, p = self.rho(u), self.pi(u)
        return self.dadd(
            self.dsub(u, self.phi(R.add(r, p))), self.act(qmj, R.sub(r, R.conj(p)))
        )


def stack_delta(elems: Sequence[DeltaElem]) -> DeltaElem:
    return tuple(np.stack([e[k] for e in elems]) for k in range(len(elems[0])))


def index_delta(u: DeltaElem, i) -> DeltaElem:
    return tuple(c[i] for c in u)


def delta_carrier(ofr: OddFormRing, name: str, elems: Sequence[DeltaElem]) -> Carrier:
    return Carrier.from_list(name, list(elems), describe=ofr.describe)


def ring_carrier(R: BlockRing, name: str, elems: Sequence[np.ndarray]) -> Carrier:
    return Carrier.from_list(name, list(elems), describe=R.labels)


# ---------------------------------------------------------------------------
# special odd form rings inside the Heisenberg group


class HeisOddFormRing(OddFormRing):
    """A special odd form ring: Δ ⊆ Heis(R), an element being the pair (π(u), ρ(u)).

    ``generators`` generate Δ as a group; ``theta0`` optionally enumerates
    Θ⁰_j directly (otherwise it is cut out of the materialized closure).
    """

    special = True
    dtrail = (2, 2)

    def __init__(
        self,
        R: BlockRing,
        generators: Sequence[DeltaElem],
        name: str = "(R,Δ)",
        theta0: Callable[[int], list[DeltaElem]] | None = None,
        materialize: bool = False,
        max_size: int = 200_000,
    ):
        super().__init__(R, name)
        self._gens = [tuple(np.asarray(c) for c in g) for g in generators]
        self._theta0 = theta0
        self.members: dict[bytes, DeltaElem] | None = None
        if materialize:
            self.close(max_size)

    def dzero(self):
        return (self.R.zero, self.R.zero)

    def dadd(self, u, v):
        R = self.R
        m, x = u
        z, w = v
        return (R.add(m, z), R.add(R.sub(x, R.mul(R.conj(m), z)), w))

    def dneg(self, u):
        R = self.R
        m, x = u
        return (R.neg(m), R.sub(R.neg(x), R.mul(R.conj(m), m)))

    def phi(self, a):
        R = self.R
        a = np.asarray(a)
        return (np.broadcast_to(R.zero, a.shape), R.sub(a, R.conj(a)))

    def pi(self, u):
        return u[0]

    def rho(self, u):
        return u[1]

    def act(self, u, a):
        R = self.R
        m, x = u
        return (R.mul(m, a), R.mul(R.mul(R.conj(a), x), a))

    def delta_generators(self):
        return list(self._gens)

    def heis(self, u):
        return u

    # -- closure / membership ------------------------------------------------
    def close(self, max_size: int = 200_000) -> dict[bytes, DeltaElem]:
        """Materialize Δ as the subgroup generated by the generators."""
        zero = self.dzero()
        seen = {self.dkey(zero): zero}
        frontier = [zero]
        gens = self._gens + [self.dneg(g) for g in self._gens]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.dadd(x, g)
                    k = self.dkey(y)
                    if k not in seen:
                        seen[k] = y
                        nxt.append(y)
                        if len(seen) > max_size:
                            raise RuntimeError(f"{self.name}: Δ closure exceeds {max_size}")
            frontier = nxt
        self.members = seen
        return seen

    def contains(self, u) -> bool:
        if self.members is None:
            raise RuntimeError("Δ not materialized")
        return self.dkey(u) in self.members

    def theta0(self, j: int):
        if self._theta0 is not None:
            return self._theta0(j)
        if self.members is None:
            self.close()
        H = self.family
        R = self.R
        out = []
        for u in self.members.values():
            if not self.deq(self.act(u, H.e[j]), u):
                continue
            p = self.pi(u)
            if all(R.is_zero(R.mul(H.e[k], p)) for k in H.indices):
                out.append(u)
        out.sort(key=self.dkey)
        return out


# ---------------------------------------------------------------------------
# axiom checker


def axiom_checks(ofr: OddFormRing):
    """(name, arity signature, batched predicate) for every odd form ring axiom."""
    R = ofr.R
    eqR, eqD = R.eq, ofr.deq
    A, P, Rh, C = ofr.dadd, ofr.pi, ofr.rho, R.conj
    zeroD = ofr.dzero()

    def comm(u, v):
        return ofr.dsub(ofr.dsub(A(u, v), u), v)

    return [
        ("R associative", "RRR", lambda a, b, c: eqR(R.mul(R.mul(a, b), c), R.mul(a, R.mul(b, c)))),
        ("R left distributive", "RRR", lambda a, b, c: eqR(R.mul(a, R.add(b, c)), R.add(R.mul(a, b), R.mul(a, c)))),
        ("R right distributive", "RRR", lambda a, b, c: eqR(R.mul(R.add(a, b), c), R.add(R.mul(a, c), R.mul(b, c)))),
        ("involution additive", "RR", lambda a, b: eqR(C(R.add(a, b)), R.add(C(a), C(b)))),
        ("involution anti-multiplicative", "RR", lambda a, b: eqR(C(R.mul(a, b)), R.mul(C(b), C(a)))),
        ("involution of order 2", "R", lambda a: eqR(C(C(a)), a)),
        ("Δ associative", "DDD", lambda u, v, w: eqD(A(A(u, v), w), A(u, A(v, w)))),
        ("Δ unit and inverse", "D", lambda u: eqD(A(u, ofr.dneg(u)), zeroD) & eqD(A(zeroD, u), u) & eqD(A(ofr.dneg(u), u), zeroD)),
        ("φ additive", "RR", lambda a, b: eqD(ofr.phi(R.add(a, b)), A(ofr.phi(a), ofr.phi(b)))),
        ("φ(āba)=φ(b)·a", "RR", lambda b, a: eqD(ofr.phi(R.mul(R.mul(C(a), b), a)), ofr.act(ofr.phi(b), a))),
        ("π additive", "DD", lambda u, v: eqR(P(A(u, v)), R.add(P(u), P(v)))),
        ("π(u·a)=π(u)a", "DR", lambda u, a: eqR(P(ofr.act(u, a)), R.mul(P(u), a))),
        ("[u,v]=φ(−π(u)̄π(v))", "DD", lambda u, v: eqD(comm(u, v), ofr.phi(R.neg(R.mul(C(P(u)), P(v)))))),
        ("ρ(u∔v)", "DD", lambda u, v: eqR(Rh(A(u, v)), R.add(R.sub(Rh(u), R.mul(C(P(u)), P(v))), Rh(v)))),
        ("ρ(u)̄+π(u)̄π(u)+ρ(u)=0", "D", lambda u: R.is_zero(R.add(R.add(C(Rh(u)), R.mul(C(P(u)), P(u))), Rh(u)))),
        ("ρ(u·a)=āρ(u)a", "DR", lambda u, a: eqR(Rh(ofr.act(u, a)), R.mul(R.mul(C(a), Rh(u)), a))),
        ("π(φ(a))=0", "R", lambda a: R.is_zero(P(ofr.phi(a)))),
        ("ρ(φ(a))=a−ā", "R", lambda a: eqR(Rh(ofr.phi(a)), R.sub(a, C(a)))),
        ("φ(a+ā)=0", "R", lambda a: eqD(ofr.phi(R.add(a, C(a))), zeroD)),
        ("φ(āa)=0", "R", lambda a: eqD(ofr.phi(R.mul(C(a), a)), zeroD)),
        ("u·(a+b)", "DRR", lambda u, a, b: eqD(ofr.act(u, R.add(a, b)), A(A(ofr.act(u, a), ofr.phi(R.mul(R.mul(C(b), Rh(u)), a))), ofr.act(u, b)))),
        ("(u·a)·b=u·(ab)", "DRR", lambda u, a, b: eqD(ofr.act(ofr.act(u, a), b), ofr.act(u, R.mul(a, b)))),
        ("(u∔v)·a=u·a∔v·a", "DDR", lambda u, v, a: eqD(ofr.act(A(u, v), a), A(ofr.act(u, a), ofr.act(v, a)))),
    ]


def check_axioms(
    ofr: OddFormRing,
    budget: int = 2_000_000,
    seed: int = 0,
    general: int = 512,
    only: Sequence[str] | None = None,
) -> Report:
    """Check every axiom on all tuples of slot-homogeneous generators.

    The generator domain is exhausted whenever its tuple count is within
    ``budget``; beyond that it is sampled with the seeded generator.  In
    addition ``general`` random tuples of arbitrary elements (random R
    elements, random sums of Δ-generators) are tested per axiom.
    """
    rng = np.random.default_rng(seed)
    rep = Report("axioms", seed=seed, budget=budget, meta={"ring": ofr.name})
    R = ofr.R
    dom = {
        "R": ring_carrier(R, "a", ofr.ring_generators()),
        "D": delta_carrier(ofr, "u", [ofr.dzero()] + ofr.delta_generators()),
    }
    gen = {}
    if general:
        gen["R"] = Carrier("a", ofr.random_ring(rng, general), R.labels)
        gen["D"] = Carrier("u", ofr.random_delta(rng, general), ofr.describe)
    for name, sig, fn in axiom_checks(ofr):
        if only is not None and name not in only:
            continue
        check_property(rep, name, [dom[c] for c in sig], fn, budget, rng)
        if general:
            # aligned random tuples: the i-th tuple uses the i-th samples
            idx = [rng.permutation(general) for _ in sig]
            args = [gen[c].take(ix) for c, ix in zip(sig, idx)]
            ok = np.asarray(fn(*args), dtype=bool).reshape(-1)
            it = rep.item(name + " [general]")
            it.mode, it.space = "sampled", general
            it.instances += ok.size
            it.failures += int((~ok).sum())
            for b in np.nonzero(~ok)[0][: rep.max_witnesses]:
                rep.failures.append(
                    {"name": name + " [general]",
                     "witness": {f"arg{k}": gen[c].describe(gen[c].get(int(ix[b]))) for k, (c, ix) in enumerate(zip(sig, idx))}}
                )
    return rep


class FaultyOddFormRing(OddFormRing):
    """Wrap an odd form ring and override one primitive (for fault injection)."""

    def __init__(self, base: OddFormRing, **overrides):
        self.__dict__.update(base.__dict__)
        self._base = base
        self.dtrail = base.dtrail
        self.special = base.special
        for k, f in overrides.items():
            setattr(self, k, f)

    def __getattr__(self, item):
        return getattr(self._base, item)

    def dzero(self):
        return self._base.dzero()

    def dadd(self, u, v):
        return self._base.dadd(u, v)

    def dneg(self, u):
        return self._base.dneg(u)

    def phi(self, a):
        return self._base.phi(a)

    def pi(self, u):
        return self._base.pi(u)

    def rho(self, u):
        return self._base.rho(u)

    def act(self, u, a):
        return self._base.act(u, a)

    def delta_generators(self):
        return self._base.delta_generators()

    def theta0(self, j):
        return self._base.theta0(j)

    def describe(self, u):
        return self._base.describe(u)


def corrupt_rho(ofr: OddFormRing, slot: tuple[int, int] | None = None) -> FaultyOddFormRing:
    """ρ with one coefficient negated: a planted table error."""
    R = ofr.R
    if slot is None:
        slot = (-R.index[-1], R.index[-1])
    p, q = R.pos[slot[0]], R.pos[slot[1]]

    def rho(u):
        r = np.array(ofr.rho(u), copy=True)
        r[..., p, q] = R.neg_t[r[..., p, q]]
        return r

    return FaultyOddFormRing(ofr, rho=rho)


# ---------------------------------------------------------------------------
# hyperbolic families


@dataclass
class HyperbolicFamily:
    """Pairs η_i = (e_{−i}, e_i, q_{−i}, q_i) stored by signed index."""

    e: dict[int, np.ndarray]
    q: dict[int, DeltaElem]
    rank: int

    @property
    def indices(self) -> list[int]:
        return [i for i in range(-self.rank, self.rank + 1) if i != 0]

    def e_sum(self, R: BlockRing, idx) -> np.ndarray:
        return R.sum(self.e[i] for i in idx)

    def q_sum(self, ofr: OddFormRing, idx) -> DeltaElem:
        return ofr.dsum([self.q[i] for i in idx])

    def e_zero(self, R: BlockRing) -> np.ndarray:
        """The complement idempotent e_0 = 1 − Σ e_i as a ring element (0 if R is covered)."""
        if 0 not in R.index:
            return R.zero
        return R.single(0, 0, _unit_local(R, 0))


def corrupt_family(ofr: OddFormRing, i: int = 1) -> HyperbolicFamily:
    """The family of ``ofr`` with q_i replaced by ∸q_i (visible when 2 is invertible)."""
    H = ofr.family
    q = dict(H.q)
    q[i] = ofr.dneg(q[i])
    return HyperbolicFamily(dict(H.e), q, H.rank)


def _unit_local(R: BlockRing, p: int) -> int:
    G = R.coeff_group(p, p)
    one = getattr(G, "one", None)
    if one is None:
        raise ValueError("slot has no unit")
    return one


def check_family(ofr: OddFormRing, H: HyperbolicFamily | None = None) -> Report:
    H = H or ofr.family
    R = ofr.R
    rep = Report("family", meta={"ring": ofr.name, "rank": H.rank})
    eqR = lambda a, b: bool(R.eq(a, b))
    for i in range(1, H.rank + 1):
        em, ep, qm, qp = H.e[-i], H.e[i], H.q[-i], H.q[i]
        w = {"i": i}
        rep.record("e± idempotent", eqR(R.mul(em, em), em) and eqR(R.mul(ep, ep), ep), w)
        rep.record("e−e+ = e+e− = 0", bool(R.is_zero(R.mul(em, ep)) and R.is_zero(R.mul(ep, em))), w)
        rep.record("ē− = e+", eqR(R.conj(em), ep), w)
        rep.record("π(q±) = e±", eqR(ofr.pi(qm), em) and eqR(ofr.pi(qp), ep), w)
        rep.record("ρ(q±) = 0", bool(R.is_zero(ofr.rho(qm)) and R.is_zero(ofr.rho(qp))), w)
        rep.record(
            "q± = q±·e±",
            bool(ofr.deq(ofr.act(qm, em), qm) and ofr.deq(ofr.act(qp, ep), qp)),
            w,
        )
    for i in range(1, H.rank + 1):
        for j in range(1, H.rank + 1):
            if i != j:
                ei = R.add(H.e[i], H.e[-i])
                ej = R.add(H.e[j], H.e[-j])
                rep.record("e_|i| orthogonal", bool(R.is_zero(R.mul(ei, ej))), {"i": i, "j": j})
    gens = ofr.ring_generators()[1:]
    for j in H.indices:
        span = ideal_span(R, gens, H.e[j])
        for i in H.indices:
            rep.record("e_i ∈ R e_j R", in_span(R, span, H.e[i]), {"i": i, "j": j})
    return rep


def ideal_span(R: BlockRing, gens, e) -> dict[tuple[int, int], list[int]]:
    """Per-slot coefficient subgroups of the additive span of {r e r′}.

    Products of slot-homogeneous elements are slot-homogeneous, so the span
    splits slotwise and membership reduces to subgroup membership per slot.
    """
    G = np.stack(gens)
    left = R.mul(G, e)  # r e
    vals: dict[tuple[int, int], set[int]] = {}
    for k in range(len(gens)):
        prods = R.mul(left[k], G)  # r e r′ for all r′
        nz = np.nonzero(prods != R.zero)
        for b, p, q in zip(*nz):
            key = (R.index[p], R.index[q])
            vals.setdefault(key, set()).add(int(prods[b, p, q]) - R.offset[R.slot[p, q]])
    return {k: R.coeff_group(*k).generated(v) for k, v in vals.items()}


def in_span(R: BlockRing, span, a) -> bool:
    for p, q in R.slot_support(a):
        if R.local(a, p, q) not in span.get((p, q), ()):
            return False
    return True


def peirce(ofr: OddFormRing, H: HyperbolicFamily, i: int, j: int):
    """(S_ij elements, Θ⁰_j elements) for the family H."""
    S = list(ofr.R.block([i], [j]))
    return S, ofr.theta0(j)


def check_peirce(ofr: OddFormRing, H: HyperbolicFamily | None = None) -> Report:
    """S_ij R_jk = S_ik and Θ⁰_i·R_ij ∔ φ(S_{−j,j}) = Θ⁰_j as sets."""
    H = H or ofr.family
    R = ofr.R
    rep = Report("peirce", meta={"ring": ofr.name})
    idx = H.indices
    for i, j, k in itertools.product(idx, repeat=3):
        Sij = np.stack(list(R.block([i], [j])))
        Rjk = np.stack(list(R.block([j], [k])))
        prods = R.mul(Sij[:, None], Rjk[None, :]).reshape(-1, R.N, R.N)
        # S_ij R_jk is the additive span of the products
        G = R.coeff_group(i, k)
        vals = {R.local(x, i, k) for x in prods}
        rep.record("S_ij R_jk = S_ik", set(G.generated(vals)) == set(G.elements()), {"i": i, "j": j, "k": k})
    for i, j in itertools.product(idx, repeat=2):
        Ti = ofr.theta0(i)
        Tj = {ofr.dkey(u) for u in ofr.theta0(j)}
        gens = [ofr.act(u, a) for u in Ti for a in R.block([i], [j])]
        gens += [ofr.phi(a) for a in R.block([-j], [j])]
        closure = _closure(ofr, gens)
        rep.record("Θ⁰_i·R_ij ∔ φ(S_{−j,j}) = Θ⁰_j", closure == Tj, {"i": i, "j": j})
    return rep


def _closure(ofr: OddFormRing, gens) -> set[bytes]:
    zero = ofr.dzero()
    seen = {ofr.dkey(zero): zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = ofr.dadd(x, g)
                k = ofr.dkey(y)
                if k not in seen:
                    seen[k] = y
                    nxt.append(y)
        frontier = nxt
    return set(seen)


# ---------------------------------------------------------------------------
# unitary groups


class UnitaryGroup:
    """U(R, Δ) with elements in Δ; product gh = g·π(h) ∔ h ∔ g."""

    def __init__(self, ofr: OddFormRing):
        self.ofr = ofr
        self.R = ofr.R

    def from_delta(self, g):
        return g

    def to_delta(self, g):
        return g

    def one(self):
        return self.ofr.dzero()

    def is_unitary(self, g):
        o, R = self.ofr, self.R
        p = o.pi(g)
        return R.eq(p, R.conj(o.rho(g))) & R.eq(R.mul(p, R.conj(p)), R.mul(R.conj(p), p))

    def mul(self, g, h):
        o = self.ofr
        return o.dadd(o.dadd(o.act(g, o.pi(h)), h), g)

    def inv(self, g):
        o = self.ofr
        return o.dsub(o.dneg(o.act(g, self.R.conj(o.pi(g)))), g)

    def eq(self, g, h):
        return self.ofr.deq(g, h)

    def key(self, g) -> bytes:
        return self.ofr.dkey(g)

    def alpha(self, g):
        return self.ofr.pi(g)

    def conj_ring(self, g, a):
        """α(g) a α(g)̄ with α(g) = 1 + π(g)."""
        R = self.R
        P = self.alpha(g)
        Pa = R.add(a, R.mul(P, a))
        return R.add(Pa, R.mul(Pa, R.conj(P)))

    def conj_delta(self, g, u):
        """(g·π(u) ∔ u)·α(g)̄."""
        o = self.ofr
        gd = self.to_delta(g)
        w = o.dadd(o.act(gd, o.pi(u)), u)
        return o.act1(w, self.R.conj(o.pi(gd)))

    def conjugate(self, g, h):
        """ᵍh = g h g⁻¹."""
        return self.mul(self.mul(g, h), self.inv(g))

    def comm(self, g, h):
        """[g, h] = g h g⁻¹ h⁻¹."""
        return self.mul(self.mul(self.mul(g, h), self.inv(g)), self.inv(h))

    def prod(self, elems):
        acc = self.one()
        for e in elems:
            acc = self.mul(acc, e)
        return acc

    def describe(self, g):
        return self.ofr.describe(self.to_delta(g))


class MatrixUnitaryGroup(UnitaryGroup):
    """U(R, Δ) of a special odd form ring, faithfully represented by α(g) = 1 + π(g).

    An element is stored as P = π(g); the product is (1+P)(1+Q) − 1 and the
    inverse is P̄.  Agreement with :class:`UnitaryGroup` is part of the tests.
    """

    def __init__(self, ofr: OddFormRing):
        if not ofr.special:
            raise ValueError("matrix representation needs a special odd form ring")
        super().__init__(ofr)

    def from_delta(self, g):
        return self.ofr.pi(g)

    def to_delta(self, P):
        return (P, self.R.conj(P))

    def one(self):
        return self.R.zero

    def is_unitary(self, P):
        R = self.R
        return R.is_zero(R.add(R.add(P, R.conj(P)), R.mul(P, R.conj(P))))

    def mul(self, P, Q):
        R = self.R
        return R.add(R.add(P, Q), R.mul(P, Q))

    def inv(self, P):
        return self.R.conj(P)

    def eq(self, P, Q):
        return self.R.eq(P, Q)

    def key(self, P) -> bytes:
        return np.ascontiguousarray(P).tobytes()

    def alpha(self, P):
        return P

    def describe(self, P):
        return self.R.labels(P)


def unitary_group(ofr: OddFormRing, fast: bool = True) -> UnitaryGroup:
    return MatrixUnitaryGroup(ofr) if (fast and ofr.special) else UnitaryGroup(ofr)


def diag_membership(ofr: OddFormRing, g, H: HyperbolicFamily | None = None):
    """g·e_iπ(g)̄ ∔ q_i·π(g)̄ ∔ g·e_i = 0̇ for all 1 ≤ |i| ≤ ℓ (g in Δ)."""
    H = H or ofr.family
    R = ofr.R
    pb = R.conj(ofr.pi(g))
    ok = None
    for i in H.indices:
        v = ofr.dadd(
            ofr.dadd(ofr.act(g, R.mul(H.e[i], pb)), ofr.act(H.q[i], pb)), ofr.act(g, H.e[i])
        )
        e = ofr.deq(v, ofr.dzero())
        ok = e if ok is None else ok & e
    return ok


# ---------------------------------------------------------------------------
# morphisms and crossed modules


@dataclass
class Morphism:
    """A homomorphism of odd form rings given by batched maps on R and Δ."""

    ring: Callable[[np.ndarray], np.ndarray]
    delta: Callable[[DeltaElem], DeltaElem]


def heis_morphism(ring_map: Callable) -> Morphism:
    """Ring map of special odd form rings acting on both Heisenberg coordinates."""
    return Morphism(ring_map, lambda u: tuple(ring_map(c) for c in u))


@dataclass
class CrossedModule:
    """A reflexive graph ((R,Δ), (T,Ξ), p1, p2, d); the source is Ker p2 and δ = p1.

    ``source_ring`` and ``source_delta`` enumerate slot-homogeneous generators
    of the kernel (S, Θ) inside (T, Ξ).
    """

    target: OddFormRing
    total: OddFormRing
    p1: Morphism
    p2: Morphism
    d: Morphism
    name: str = "δ"
    meta: dict = field(default_factory=dict)

    def in_source_ring(self, a) -> np.ndarray:
        return self.target.R.is_zero(self.p2.ring(a))

    def in_source_delta(self, u) -> np.ndarray:
        return self.target.deq(self.p2.delta(u), self.target.dzero())

    def source_ring_generators(self) -> list[np.ndarray]:
        return [a for a in self.total.ring_generators() if self.in_source_ring(a)]

    def source_delta_generators(self) -> list[DeltaElem]:
        return [u for u in self.total.delta_generators() if self.in_source_delta(u)]

    def delta_source(self, a):
        """δ on S, landing in R."""
        return self.p1.ring(a)

    def lift(self, a):
        """d: R → T."""
        return self.d.ring(a)

    def lift_delta(self, u):
        return self.d.delta(u)


def semidirect(cm: CrossedModule) -> OddFormRing:
    """(S⋊R, Θ⋊Δ): in the reflexive-graph presentation this is the total object."""
    return cm.total


def check_crossed(cm: CrossedModule, budget: int = 2_000_000, seed: int = 0) -> Report:
    """Homomorphism laws of p1, p2, d, the section identities, δ-equivariance and Peiffer."""
    rng = np.random.default_rng(seed)
    T, Rr = cm.total, cm.target
    RT, RR = T.R, Rr.R
    rep = Report("crossed", seed=seed, budget=budget, meta={"crossed": cm.name})
    Tr = ring_carrier(RT, "t", T.ring_generators())
    Td = delta_carrier(T, "w", [T.dzero()] + T.delta_generators())
    Rr_c = ring_carrier(RR, "r", Rr.ring_generators())
    Rd = delta_carrier(Rr, "v", [Rr.dzero()] + Rr.delta_generators())
    S = ring_carrier(RT, "a", cm.source_ring_generators())
    Th = delta_carrier(T, "u", [T.dzero()] + cm.source_delta_generators())
    eqR, eqD = RR.eq, Rr.deq
    for nm, f in (("p1", cm.p1), ("p2", cm.p2)):
        check_property(rep, f"{nm} additive", [Tr, Tr], lambda a, b, f=f: eqR(f.ring(RT.add(a, b)), RR.add(f.ring(a), f.ring(b))), budget, rng)
        check_property(rep, f"{nm} multiplicative", [Tr, Tr], lambda a, b, f=f: eqR(f.ring(RT.mul(a, b)), RR.mul(f.ring(a), f.ring(b))), budget, rng)
        check_property(rep, f"{nm} involution", [Tr], lambda a, f=f: eqR(f.ring(RT.conj(a)), RR.conj(f.ring(a))), budget, rng)
        check_property(rep, f"{nm} on Δ additive", [Td, Td], lambda u, v, f=f: eqD(f.delta(T.dadd(u, v)), Rr.dadd(f.delta(u), f.delta(v))), budget, rng)
        check_property(rep, f"{nm} action", [Td, Tr], lambda u, a, f=f: eqD(f.delta(T.act(u, a)), Rr.act(f.delta(u), f.ring(a))), budget, rng)
        check_property(rep, f"{nm} φ π ρ", [Td], lambda u, f=f: eqR(f.ring(T.pi(u)), Rr.pi(f.delta(u))) & eqR(f.ring(T.rho(u)), Rr.rho(f.delta(u))), budget, rng)
        check_property(rep, f"{nm} φ", [Tr], lambda a, f=f: eqD(f.delta(T.phi(a)), Rr.phi(f.ring(a))), budget, rng)
        check_property(rep, f"{nm}∘d = id", [Rr_c], lambda r, f=f: eqR(f.ring(cm.d.ring(r)), r), budget, rng)
        check_property(rep, f"{nm}∘d = id on Δ", [Rd], lambda v, f=f: eqD(f.delta(cm.d.delta(v)), v), budget, rng)
    eqT, eqTD = RT.eq, T.deq
    d1 = lambda a: cm.d.ring(cm.p1.ring(a))
    d1u = lambda u: cm.d.delta(cm.p1.delta(u))
    check_property(rep, "d multiplicative", [Rr_c, Rr_c], lambda r, s: eqT(cm.d.ring(RR.mul(r, s)), RT.mul(cm.d.ring(r), cm.d.ring(s))), budget, rng)
    check_property(rep, "d on Δ additive", [Rd, Rd], lambda u, v: eqTD(cm.d.delta(Rr.dadd(u, v)), T.dadd(cm.d.delta(u), cm.d.delta(v))), budget, rng)
    check_property(rep, "δ equivariant (left)", [Rr_c, S], lambda r, a: eqR(cm.p1.ring(RT.mul(cm.d.ring(r), a)), RR.mul(r, cm.p1.ring(a))), budget, rng)
    check_property(rep, "δ equivariant (right)", [S, Rr_c], lambda a, r: eqR(cm.p1.ring(RT.mul(a, cm.d.ring(r))), RR.mul(cm.p1.ring(a), r)), budget, rng)
    check_property(rep, "δ equivariant (Θ×R)", [Th, Rr_c], lambda u, r: eqD(cm.p1.delta(T.act(u, cm.d.ring(r))), Rr.act(cm.p1.delta(u), r)), budget, rng)
    check_property(rep, "δ equivariant (Δ×S)", [Rd, S], lambda v, a: eqD(cm.p1.delta(T.act(cm.d.delta(v), a)), Rr.act(v, cm.p1.ring(a))), budget, rng)
    check_property(rep, "Peiffer ab = δ(a)b", [S, S], lambda a, b: eqT(RT.mul(a, b), RT.mul(d1(a), b)), budget, rng)
    check_property(rep, "Peiffer ab = aδ(b)", [S, S], lambda a, b: eqT(RT.mul(a, b), RT.mul(a, d1(b))), budget, rng)
    check_property(rep, "Peiffer u·a = δ(u)·a", [Th, S], lambda u, a: eqTD(T.act(u, a), T.act(d1u(u), a)), budget, rng)
    check_property(rep, "Peiffer u·a = u·δ(a)", [Th, S], lambda u, a: eqTD(T.act(u, a), T.act(u, d1(a))), budget, rng)
    return rep


def identity_crossed(ofr: OddFormRing) -> CrossedModule:
    """(R,Δ) over itself with the trivial kernel: p1 = p2 = d = id."""
    ident = Morphism(lambda a: a, lambda u: u)
    return CrossedModule(ofr, ofr, ident, ident, ident, name=f"0→{ofr.name}")


def corrupt_crossed_d(cm: CrossedModule) -> CrossedModule:
    """``cm`` with the section d composed with negation: a planted sign error."""
    T = cm.total
    d = Morphism(lambda a: T.R.neg(cm.d.ring(a)), lambda u: T.dneg(cm.d.delta(u)))
    return CrossedModule(cm.target, cm.total, cm.p1, cm.p2, d, name=cm.name + "+fault", meta=dict(cm.meta))

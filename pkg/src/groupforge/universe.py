"""Ordinal-block addressing of tower groups at finite surrogate scale.

Tracked elements of a tower group are placed at addresses (alpha, offset):
alpha names a block (an ordinal surrogate below LAMPLUS) and the offset is a
position inside the block (below LAM).  The norm of an element is its block.
Norms follow the construction shape: base-copy elements sit in their copy's
home block, a product-word norm is the maximum of its syllable norms, a
syllable that lies in an amalgamated subgroup takes the smaller of its two
factor norms, and a stable letter takes the largest norm on the side it
rewrites to.

Containment and isomorphism checks are done on the address-indexed partial
structure (which pairs multiply to which tracked address), never on word
spellings, so groups built along different construction paths compare
soundly.  A strong isomorphism maps addresses by the unique order map
between the block sets while keeping offsets; codes number strong-isomorphism
classes in first-seen order within a run.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .amalgam import (AmalgamNode, BaseNode, ExplicitShared, HnnNode,
                      INFINITE, Node, SchemeError, make_conjugate)
from .fingrp import FiniteGroup
from .words import EMPTY, FACTOR, LETTER, SyllableWord

LAM = 4096
LAMPLUS = 64


@dataclass(frozen=True, order=True)
class Address:
    alpha: int
    offset: int

    def __str__(self):
        return f"{self.alpha}:{self.offset}"


@dataclass(frozen=True)
class Code:
    cod: int
    dom: frozenset

    def __str__(self):
        return f"code {self.cod} dom {{{','.join(map(str, sorted(self.dom)))}}}"


class UGroup:
    """A tower group with tracked elements addressed into blocks."""

    def __init__(self, node: Node, addr: dict, u: Iterable[int],
                 name: Optional[str] = None, meta: Optional[dict] = None,
                 lam: int = LAM, lamplus: int = LAMPLUS):
        self.node = node
        self.addr = dict(addr)
        self.u = frozenset(u)
        self.name = name or node.name
        self.meta = dict(meta or {})
        self.lam = lam
        self.lamplus = lamplus
        seen = {}
        for w, a in self.addr.items():
            if not (0 <= a.alpha < lamplus and 0 <= a.offset < lam):
                raise SchemeError(f"address {a} outside the configured blocks")
            if a in seen:
                raise SchemeError(f"address {a} assigned twice")
            seen[a] = w
        self._by_addr = seen
        self._tables = None

    @property
    def addr_set(self):
        return frozenset(self._by_addr)

    def word_at(self, a: Address) -> SyllableWord:
        return self._by_addr[a]

    def _built_tables(self):
        """Partial multiplication and inverse tables on addresses.

        Only pairs whose product is itself tracked appear; everything else
        is outside the surrogate's view."""
        if self._tables is None:
            mul = {}
            inv = {}
            items = list(self.addr.items())
            for w1, a1 in items:
                wi = self.node.canonical(self.node.invert_word(w1))
                if wi in self.addr:
                    inv[a1] = self.addr[wi]
                for w2, a2 in items:
                    p = self.node.canonical(self.node.mul_words(w1, w2))
                    got = self.addr.get(p)
                    if got is not None:
                        mul[(a1, a2)] = got
            self._tables = (mul, inv)
        return self._tables

    @property
    def amul(self):
        return self._built_tables()[0]

    @property
    def ainv(self):
        return self._built_tables()[1]

    def block_offsets(self, alpha: int):
        return sorted(a.offset for a in self._by_addr if a.alpha == alpha)

    def next_offset(self, alpha: int) -> int:
        got = [a.offset for a in self._by_addr if a.alpha == alpha]
        return max(got) + 1 if got else 0


def le(p: UGroup, q: UGroup) -> bool:
    """Containment on the addressed structure: every tracked element, product
    and inverse of p appears identically in q."""
    if not p.u <= q.u:
        return False
    if not p.addr_set <= q.addr_set:
        return False
    qm, qi = q.amul, q.ainv
    for k, v in p.amul.items():
        if qm.get(k) != v:
            return False
    for k, v in p.ainv.items():
        if qi.get(k) != v:
            return False
    return True


def same_ugroup(p: UGroup, q: UGroup) -> bool:
    return (p.u == q.u and p.addr_set == q.addr_set
            and p.amul == q.amul and p.ainv == q.ainv)


def restrict(g: UGroup, alpha: int) -> UGroup:
    """The part of g addressed strictly below block alpha."""
    if alpha < 1:
        raise SchemeError("restriction boundary must be at least 1")
    addr = {w: a for w, a in g.addr.items() if a.alpha < alpha}
    u = {b for b in g.u if b < alpha}
    return UGroup(g.node, addr, u, name=f"{g.name}|{alpha}", meta=dict(g.meta),
                  lam=g.lam, lamplus=g.lamplus)


def block_filter(g: UGroup, blocks) -> UGroup:
    blocks = frozenset(blocks)
    addr = {w: a for w, a in g.addr.items() if a.alpha in blocks}
    return UGroup(g.node, addr, g.u & blocks, name=f"{g.name}&",
                  meta=dict(g.meta), lam=g.lam, lamplus=g.lamplus)


# -- norms and address assignment ------------------------------------------------

def _leaf_blocks(node: Node, placement: Optional[dict], u_sorted) -> dict:
    """Home block for every base leaf, from the placement policy or by
    pairing leaves with the sorted blocks."""
    leaves = []

    def walk(n):
        if isinstance(n, BaseNode):
            leaves.append(n)
        elif isinstance(n, AmalgamNode):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, HnnNode):
            walk(n.base)
        else:
            raise SchemeError(f"cannot address a node of kind {n.kind}")

    walk(node)
    if placement is not None:
        out = {}
        for leaf in leaves:
            if leaf.name not in placement:
                raise SchemeError(f"placement misses the base copy {leaf.name}")
            out[id(leaf)] = placement[leaf.name]
        return out
    if len(leaves) > len(u_sorted):
        raise SchemeError(f"{len(leaves)} base copies but only "
                          f"{len(u_sorted)} blocks")
    return {id(leaf): u_sorted[i] for i, leaf in enumerate(leaves)}


def _norm_word(node: Node, w, homes: dict, memo: dict) -> int:
    if isinstance(node, BaseNode):
        e = node.intern(w)
        return 0 if node.group.is_identity(e) else homes[id(node)]
    best = 0
    for syl in node.reduce(w):
        if syl[0] == LETTER:
            n = _letter_norm(node, homes, memo)
        else:
            side, elem = syl[1], syl[2]
            n = _norm_elem(node.factors[side], elem, homes, memo)
            shared = getattr(node, "_shared", None)
            if shared is not None and shared.member(side, elem):
                other = shared.convert(side, elem)
                n = min(n, _norm_elem(node.factors[1 - side], other,
                                      homes, memo))
        best = max(best, n)
    return best


def _norm_elem(node: Node, elem: int, homes: dict, memo: dict) -> int:
    key = (id(node), elem)
    got = memo.get(key)
    if got is None:
        got = _norm_word(node, node.elem_word(elem), homes, memo)
        memo[key] = got
    return got


def _letter_norm(node: HnnNode, homes: dict, memo: dict) -> int:
    key = (id(node), "t")
    got = memo.get(key)
    if got is None:
        got = 0
        for b_elem, _ in node._assoc.scan(1):
            got = max(got, _norm_elem(node.base, b_elem, homes, memo))
        memo[key] = got
    return got


def _tracked_words(node: Node) -> list:
    """Default tracked set: registry words, lifted factor elements, stable
    letters, closed under inverses."""
    out = {}

    def add(w):
        c = node.canonical(w)
        if c not in out:
            out[c] = True
            ci = node.canonical(node.invert_word(c))
            if ci not in out:
                out[ci] = True

    add(EMPTY)
    if isinstance(node, BaseNode):
        for e in range(node.group.n):
            add(node.elem_word(e))
        return list(out)
    if isinstance(node, AmalgamNode):
        for side in (0, 1):
            fac = node.factors[side]
            count = fac.elem_count()
            idxs = range(count) if count is not None else range(len(fac._rwords))
            for e in idxs:
                add(SyllableWord([(FACTOR, side, e)]))
    elif isinstance(node, HnnNode):
        count = node.base.elem_count()
        idxs = range(count) if count is not None else range(len(node.base._rwords))
        for e in idxs:
            add(SyllableWord([(FACTOR, 0, e)]))
        add(node.letter_word(1))
    for w in list(node._rwords):
        add(w)
    return list(out)


def assign_addresses(node: Node, u, placement: Optional[dict] = None, *,
                     tracked: Optional[list] = None, lam: int = LAM,
                     lamplus: int = LAMPLUS, name: Optional[str] = None,
                     meta: Optional[dict] = None) -> UGroup:
    """Address the tracked elements of a tower group into the blocks of u."""
    u = sorted(set(u))
    if not u:
        raise SchemeError("the block set must contain 0")
    if u[0] != 0:
        raise SchemeError("the block set must contain 0")
    if u[-1] >= lamplus:
        raise SchemeError(f"block {u[-1]} is beyond the configured "
                          f"{lamplus} blocks")
    homes = _leaf_blocks(node, placement, u)
    for b in homes.values():
        if b not in u:
            raise SchemeError(f"placement uses block {b} outside the block set")
    words = tracked if tracked is not None else _tracked_words(node)
    memo: dict = {}
    per_block: dict = {b: [] for b in u}
    for w in words:
        c = node.canonical(w)
        n = _norm_word(node, c, homes, memo)
        if n not in per_block:
            raise SchemeError(f"element {node.format(c)!r} has norm {n} "
                              f"outside the block set")
        per_block[n].append(c)
    addr = {}
    for b in u:
        block_words = sorted(set(per_block[b]),
                             key=lambda ww: (len(ww), tuple(ww)))
        if not block_words:
            raise SchemeError(f"no tracked element realizes block {b}")
        if len(block_words) > lam:
            raise SchemeError(f"block {b} overflows: {len(block_words)} "
                              f"elements for {lam} offsets")
        for i, ww in enumerate(block_words):
            addr[ww] = Address(b, i)
    if EMPTY not in addr or addr[EMPTY] != Address(0, 0):
        raise SchemeError("the identity did not land at the origin")
    return UGroup(node, addr, u, name=name, meta=meta, lam=lam,
                  lamplus=lamplus)


# -- u-group checking --------------------------------------------------------------

@dataclass
class UCheckReport:
    ok: bool
    clause: Optional[str]
    detail: str


def check_ugroup(g: UGroup) -> UCheckReport:
    """Clause (a): all blocks used lie in u.  Clause (b): below every block
    boundary the tracked elements close under tracked inverses and products.
    Clause (c): every block of u is realized."""
    if EMPTY not in g.addr:
        return UCheckReport(False, "a", "the identity is not tracked")
    for w, a in g.addr.items():
        if a.alpha not in g.u:
            return UCheckReport(False, "a",
                                f"element at {a} uses a block outside u")
    for boundary in sorted(g.u):
        delta = Address(boundary, 0)
        below = {w: a for w, a in g.addr.items() if a < delta}
        for w, a in below.items():
            wi = g.node.canonical(g.node.invert_word(w))
            ai = g.addr.get(wi)
            if ai is None or not ai < delta:
                return UCheckReport(
                    False, "b", f"inverse of the element at {a} escapes the "
                                f"boundary {boundary}")
        for w1, a1 in below.items():
            for w2, a2 in below.items():
                p = g.node.canonical(g.node.mul_words(w1, w2))
                ap = g.addr.get(p)
                if ap is not None and not ap < delta:
                    return UCheckReport(
                        False, "b", f"product of elements at {a1}, {a2} "
                                    f"escapes the boundary {boundary}")
    for b in g.u:
        if not any(a.alpha == b for a in g.addr.values()):
            return UCheckReport(False, "c", f"no element realizes block {b}")
    return UCheckReport(True, None, "all clauses hold")


# -- strong isomorphism and coding ------------------------------------------------

def is_strong_iso(g1: UGroup, g2: UGroup) -> Optional[dict]:
    """Witness map or None.  The only candidate is the order map between the
    block sets with offsets kept; it must carry the whole tracked structure."""
    u1, u2 = sorted(g1.u), sorted(g2.u)
    if len(u1) != len(u2):
        return None
    blockmap = dict(zip(u1, u2))

    def A(a: Address) -> Address:
        return Address(blockmap[a.alpha], a.offset)

    if {A(a) for a in g1.addr_set} != g2.addr_set:
        return None
    if {(A(x), A(y)): A(z) for (x, y), z in g1.amul.items()} != g2.amul:
        return None
    if {A(x): A(y) for x, y in g1.ainv.items()} != g2.ainv:
        return None
    return {w: g2.word_at(A(a)) for w, a in g1.addr.items()}


class CodeRegistry:
    """Per-run enumeration of strong-isomorphism classes, first seen first."""

    def __init__(self):
        self._reps: list = []

    def code(self, g: UGroup) -> Code:
        for cod, rep in enumerate(self._reps):
            if is_strong_iso(rep, g) is not None:
                return Code(cod, frozenset(g.u))
        self._reps.append(g)
        return Code(len(self._reps) - 1, frozenset(g.u))

    def __len__(self):
        return len(self._reps)

    def record_lines(self) -> list:
        return [str(Code(i, frozenset(rep.u)))
                for i, rep in enumerate(self._reps)]


def parse_session_text(text: str) -> list:
    """Records `code <cod> dom {a,b,...}` from a session file."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if (len(parts) != 4 or parts[0] != "code" or parts[2] != "dom"
                or not parts[3].startswith("{") or not parts[3].endswith("}")):
            raise SchemeError(f"line {lineno}: bad session record {line!r}")
        try:
            cod = int(parts[1])
            body = parts[3][1:-1]
            dom = frozenset(int(x) for x in body.split(",")) if body else frozenset()
        except ValueError:
            raise SchemeError(f"line {lineno}: bad session record {line!r}")
        out.append(Code(cod, dom))
    return out


# -- the standard block family -----------------------------------------------------

def standard_ugroup(h: FiniteGroup, u, *, name: Optional[str] = None,
                    lam: int = LAM, lamplus: int = LAMPLUS) -> UGroup:
    """Free product of one copy of h per block, tracking the identity and the
    per-copy elements.  Block 0 holds the identity at offset 0 and the
    nontrivial elements of its copy at offsets 1.., other blocks hold their
    copy's nontrivial elements at offsets 0.."""
    us = sorted(set(u))
    if not us or us[0] != 0:
        raise SchemeError("the block set must contain 0")
    leaves = [BaseNode(h, name=f"b{alpha}") for alpha in us]
    node = leaves[0]
    for leaf in leaves[1:]:
        node = AmalgamNode(node, leaf, ExplicitShared([h.identity],
                                                      [h.identity]),
                           name=f"{node.name}*{leaf.name}")
    addr = {EMPTY: Address(0, 0)}
    nontrivial = [e for e in range(h.n) if not h.is_identity(e)]
    for pos, alpha in enumerate(us):
        base = 1 if alpha == 0 else 0
        for i, e in enumerate(nontrivial):
            if len(us) == 1:
                w = node.elem_word(e)
            else:
                w = _chain_single(node, pos, len(us), e)
            addr[node.canonical(w)] = Address(alpha, base + i)
    return UGroup(node, addr, us, name=name or f"blocks{{{','.join(map(str, us))}}}",
                  meta={"standard": True, "h": h, "blocks": tuple(us)},
                  lam=lam, lamplus=lamplus)


def _chain_single(node: Node, pos: int, k: int, elem: int) -> SyllableWord:
    """The single-syllable word for element `elem` of the pos-th leaf inside
    a left-folded free product of k leaves."""
    if k == 1:
        return node.elem_word(elem)
    if pos == k - 1:
        return SyllableWord([(FACTOR, 1, elem)])
    inner = _chain_single(node.factors[0], pos, k - 1, elem)
    return SyllableWord([(FACTOR, 0, node.factors[0].intern(inner))])


def standard_family(h: FiniteGroup, master_u, *, lam: int = LAM,
                    lamplus: int = LAMPLUS) -> list:
    """All standard groups over subsets of master_u containing 0, smallest
    domains first.  Restriction-closed by construction."""
    extra = sorted(set(master_u) - {0})
    subsets = [[0]]
    for b in extra:
        subsets = subsets + [s + [b] for s in subsets]
    subsets.sort(key=lambda s: (len(s), s))
    return [standard_ugroup(h, s, lam=lam, lamplus=lamplus) for s in subsets]


def order_iso_image(g: UGroup, blockmap: dict) -> UGroup:
    """Re-address g along an order isomorphism of block sets fixing 0."""
    us = sorted(g.u)
    if sorted(blockmap) != us:
        raise SchemeError("the block map must be defined exactly on the "
                          "group's blocks")
    targets = [blockmap[b] for b in us]
    if any(t1 >= t2 for t1, t2 in zip(targets, targets[1:])):
        raise SchemeError("the block map must be strictly increasing")
    if blockmap.get(0) != 0:
        raise SchemeError("the block map must fix block 0")
    if targets[-1] >= g.lamplus:
        raise SchemeError("the block map leaves the configured blocks")
    addr = {w: Address(blockmap[a.alpha], a.offset) for w, a in g.addr.items()}
    return UGroup(g.node, addr, set(targets), name=f"{g.name}~",
                  meta=dict(g.meta), lam=g.lam, lamplus=g.lamplus)


# -- poset axiom probe --------------------------------------------------------------

@dataclass
class ClauseResult:
    checked: int = 0
    failures: list = field(default_factory=list)


@dataclass
class PosetProbeReport:
    clauses: dict
    codes: list
    ok: bool


def _boundaries(g: UGroup):
    return sorted({b + 1 for b in g.u} | {1})


def poset_axiom_probe(family: list, *, samples: int = 20, seed: int = 0,
                      registry: Optional[CodeRegistry] = None) -> PosetProbeReport:
    """Clauses 1-6 run exhaustively over the family (boundaries included),
    clause 7 re-addresses every member once along a drawn block map, clause 8
    checks `samples` compatible pairs over a boundary."""
    rng = random.Random(seed)
    registry = registry if registry is not None else CodeRegistry()
    codes = [registry.code(g) for g in family]
    n = len(family)
    leq = [[le(family[i], family[j]) for j in range(n)] for i in range(n)]
    res = {k: ClauseResult() for k in (1, 2, 3, 4, 5, 6, 7, 8)}

    restr_cache: dict = {}

    def restricted(i: int, alpha: int) -> UGroup:
        key = (i, alpha)
        if key not in restr_cache:
            restr_cache[key] = restrict(family[i], alpha)
        return restr_cache[key]

    # 1: containment implies domain containment
    for i in range(n):
        for j in range(n):
            if leq[i][j]:
                res[1].checked += 1
                if not family[i].u <= family[j].u:
                    res[1].failures.append(
                        f"{family[i].name} <= {family[j].name} but domains "
                        f"do not nest")

    # 2: common bound below r on the union of the domains
    filt_cache: dict = {}
    for k in range(n):
        under = [i for i in range(n) if leq[i][k]]
        for i in under:
            for j in under:
                res[2].checked += 1
                union = family[i].u | family[j].u
                key = (k, union)
                if key not in filt_cache:
                    r2 = block_filter(family[k], union)
                    filt_cache[key] = (r2, check_ugroup(r2).ok
                                       and le(r2, family[k]))
                r2, base_ok = filt_cache[key]
                if not (base_ok and le(family[i], r2) and le(family[j], r2)
                        and r2.u == union):
                    res[2].failures.append(
                        f"filtered bound between {family[i].name}, "
                        f"{family[j].name} under {family[k].name} broke")

    # 3: chains have upper bounds with the union domain
    for i in range(n):
        for j in range(n):
            if i != j and leq[i][j]:
                res[3].checked += 1
                ups = [k for k in range(n) if leq[i][k] and leq[j][k]]
                if not any(family[k].u == family[i].u | family[j].u
                           for k in ups):
                    res[3].failures.append(
                        f"chain {family[i].name} <= {family[j].name} has no "
                        f"bound on the union domain")

    # 4: restrictions exist, are contained, and are unique maximal
    for i, p in enumerate(family):
        for alpha in _boundaries(p):
            res[4].checked += 1
            r = restricted(i, alpha)
            good = (le(r, p) and r.u == {b for b in p.u if b < alpha}
                    and check_ugroup(r).ok)
            if good:
                for j in range(n):
                    if leq[j][i] and family[j].u <= set(range(alpha)):
                        if not le(family[j], r):
                            good = False
                            break
            if not good:
                res[4].failures.append(
                    f"restriction of {p.name} at {alpha} is not the unique "
                    f"maximal bounded part")

    # 5: restriction depends only on the blocks below the boundary
    for i, p in enumerate(family):
        top = max(p.u) + 2
        for a1 in range(1, top):
            for a2 in range(a1 + 1, top):
                if {b for b in p.u if b < a1} == {b for b in p.u if b < a2}:
                    res[5].checked += 1
                    if not same_ugroup(restricted(i, a1), restricted(i, a2)):
                        res[5].failures.append(
                            f"restrictions of {p.name} at {a1} and {a2} "
                            f"differ despite equal block sets")

    # 6: restriction commutes with the chain order
    for i in range(n):
        for j in range(n):
            if i != j and leq[i][j]:
                for alpha in _boundaries(family[j]):
                    res[6].checked += 1
                    if not le(restricted(i, alpha), restricted(j, alpha)):
                        res[6].failures.append(
                            f"restriction at {alpha} does not preserve "
                            f"{family[i].name} <= {family[j].name}")

    # 7: order-isomorphic re-addressing stays in the class, monotonically
    lamplus = family[0].lamplus if family else LAMPLUS
    for i in range(n):
        p = family[i]
        us = sorted(p.u)
        pool = sorted(rng.sample(range(1, lamplus), len(us) - 1)) \
            if len(us) > 1 else []
        blockmap = dict(zip(us, [0] + pool))
        res[7].checked += 1
        try:
            img = order_iso_image(p, blockmap)
        except SchemeError as exc:
            res[7].failures.append(f"re-addressing {p.name} failed: {exc}")
            continue
        ok = (check_ugroup(img).ok
              and is_strong_iso(p, img) is not None
              and registry.code(img).cod == codes[i].cod)
        if ok:
            for j in range(n):
                if j != i and leq[j][i]:
                    sub = order_iso_image(
                        family[j], {b: blockmap[b] for b in family[j].u})
                    if not le(sub, img):
                        ok = False
                        break
        if not ok:
            res[7].failures.append(
                f"re-addressing {p.name} by {blockmap} left the class")

    # 8: amalgamation of compatible pairs over a boundary
    standard = [g for g in family if g.meta.get("standard")]
    witness_cache: dict = {}
    r8_cache: dict = {}
    attempts = 0
    while res[8].checked < samples and attempts < samples * 100:
        attempts += 1
        if len(standard) < 2:
            break
        pi = rng.randrange(len(standard))
        p = standard[pi]
        q = standard[rng.randrange(len(standard))]
        alpha = rng.randrange(1, max(p.u | q.u) + 2)
        if (pi, alpha) not in r8_cache:
            r8_cache[(pi, alpha)] = restrict(p, alpha)
        if not le(r8_cache[(pi, alpha)], q):
            continue
        if p.u & q.u != {b for b in p.u if b < alpha}:
            continue
        res[8].checked += 1
        union = p.u | q.u
        if union not in witness_cache:
            witness_cache[union] = standard_ugroup(
                p.meta["h"], union, lam=p.lam, lamplus=p.lamplus)
        r = witness_cache[union]
        if not (le(p, r) and le(q, r) and check_ugroup(r).ok):
            res[8].failures.append(
                f"amalgamation witness over {sorted(union)} does not "
                f"bound {p.name} and {q.name}")

    ok = all(not c.failures for c in res.values())
    return PosetProbeReport(res, codes, ok)


# -- density moves ------------------------------------------------------------------

def _lift_addr(old: UGroup, node2: Node) -> dict:
    out = {}
    for w, a in old.addr.items():
        if not w:
            out[EMPTY] = a
        else:
            out[node2.canonical(SyllableWord(
                [(FACTOR, 0, old.node.intern(w))]))] = a
    return out


def density_domain_step(q: UGroup, alpha: int, v, *,
                        h: Optional[FiniteGroup] = None) -> UGroup:
    """Extend q so that block alpha is realized, by a fresh base copy homed
    there.  Returns q unchanged when alpha is already in its domain."""
    if alpha in q.u:
        return q
    if v is not None and alpha not in v:
        raise SchemeError(f"target block {alpha} is outside the allowed set")
    if not 0 < alpha < q.lamplus:
        raise SchemeError(f"target block {alpha} is outside the configured "
                          f"blocks")
    table = h if h is not None else q.meta.get("h")
    if table is None:
        raise SchemeError("the step needs a base table: none recorded on the "
                          "group and none supplied")
    fresh = BaseNode(table, name=f"b{alpha}")
    node2 = AmalgamNode(q.node, fresh,
                        ExplicitShared([table.identity], [table.identity]),
                        name=f"{q.node.name}*b{alpha}")
    addr = _lift_addr(q, node2)
    off = 0
    for e in range(table.n):
        if table.is_identity(e):
            continue
        addr[node2.canonical(SyllableWord([(FACTOR, 1, e)]))] = \
            Address(alpha, off)
        off += 1
    meta = dict(q.meta)
    meta["standard"] = False
    meta.setdefault("h", table)
    out = UGroup(node2, addr, q.u | {alpha}, name=f"{q.name}+b{alpha}",
                 meta=meta, lam=q.lam, lamplus=q.lamplus)
    rep = check_ugroup(out)
    if not rep.ok:
        raise SchemeError(f"domain step produced a bad group: {rep.detail}")
    if not le(q, out):
        raise SchemeError("domain step does not extend its input")
    return out


@dataclass
class SimplicityMove:
    ugroup: UGroup
    case: str
    trace: list          # (conjugator word at the final node, exponent)
    extended: bool
    detail: str


def _trace_product(node: Node, y_word, trace) -> SyllableWord:
    acc = EMPTY
    for c, e in trace:
        term = node.conjugate_word(
            y_word if e == 1 else node.invert_word(y_word), c)
        acc = node.mul_words(acc, term)
    return acc


def replay_simplicity(move: SimplicityMove, x_word, y_word) -> bool:
    """Re-derive the product of conjugates and compare with x at the final
    node."""
    node = move.ugroup.node
    prod = _trace_product(node, y_word, move.trace)
    return not node.reduce(node.mul_words(prod, node.invert_word(x_word)))


def density_simplicity_step(g: UGroup, x_word, y_word, *,
                            window: int = 16) -> SimplicityMove:
    """Extend g so that x becomes an explicit product of conjugates of y.

    Both orders are certified first.  When both are infinite one stable
    letter conjugates y to x.  When only x has finite order, a conjugate of y
    positioned across a factor boundary makes x times it infinite, and one
    letter plus that conjugation expresses x.  When y has finite order a
    cross-factor conjugate of y is attached to it first to make an
    infinite-order product of two y-conjugates, and the previous cases run
    with it."""
    node = g.node
    x = node.canonical(node.reduce(x_word))
    y = node.canonical(node.reduce(y_word))
    if x not in g.addr or y not in g.addr:
        raise SchemeError("x and y must be tracked elements")
    if not x or not y:
        raise SchemeError("x and y must be nontrivial")
    x_alpha = g.addr[x].alpha

    # already expressible without extension
    if node.equal(x, y):
        return SimplicityMove(g, "tracked", [(EMPTY, 1)], False,
                              "x equals y")
    for c in sorted(g.addr, key=lambda w: g.addr[w]):
        if node.equal(node.conjugate_word(y, c), x):
            return SimplicityMove(g, "tracked", [(c, 1)], False,
                                  "x is a tracked conjugate of y")

    ox = node.order_of(x)
    oy = node.order_of(y)

    def lift1(n2, w):
        return EMPTY if not w else n2.canonical(
            SyllableWord([(FACTOR, 0, node.intern(w))]))

    def fresh_factor(cur_node, cur_g, tag="w"):
        table = cur_g.meta.get("h")
        if table is None:
            raise SchemeError("the step needs a base table recorded on the "
                              "group to attach a fresh factor")
        fresh = BaseNode(table, name=f"{tag}{len(cur_g.u)}")
        n2 = AmalgamNode(cur_node, fresh,
                         ExplicitShared([table.identity], [table.identity]),
                         name=f"{cur_node.name}*{tag}")
        picks = [e for e in range(table.n) if not table.is_identity(e)]
        return n2, SyllableWord([(FACTOR, 1, picks[0])]), \
            [SyllableWord([(FACTOR, 1, e)]) for e in picks]

    def checked_extension(out: UGroup) -> UGroup:
        rep = check_ugroup(out)
        if not rep.ok:
            raise SchemeError(f"simplicity step produced a bad group: "
                              f"{rep.detail}")
        if not le(g, out):
            raise SchemeError("simplicity step does not extend its input")
        return out

    def addr_after(n2, extra_words, base_g):
        """Lift the old addressing and append the new elements (with their
        inverses, keeping boundary closure) in the block of x."""
        addr = _lift_addr(base_g, n2)
        off = base_g.next_offset(x_alpha)
        for w in extra_words:
            for c in (n2.canonical(w), n2.canonical(n2.invert_word(w))):
                if c and c not in addr:
                    addr[c] = Address(x_alpha, off)
                    off += 1
        return addr

    if ox == INFINITE and oy == INFINITE:
        n2, t = make_conjugate(node, y, x, window=window)
        trace = [(t, 1)]
        prod = _trace_product(n2, lift1(n2, y), trace)
        if n2.reduce(n2.mul_words(prod, n2.invert_word(lift1(n2, x)))):
            raise SchemeError("conjugation trace failed to verify")
        addr = addr_after(n2, [t], g)
        meta = dict(g.meta)
        meta["standard"] = False
        out = checked_extension(UGroup(n2, addr, g.u, name=f"{g.name}+t",
                                       meta=meta, lam=g.lam,
                                       lamplus=g.lamplus))
        return SimplicityMove(out, "both-infinite", trace, True,
                              "one stable letter conjugates y to x")

    if oy == INFINITE:
        # x has finite order: express x as (x . y^w) . (y^w)^-1
        w_pick = None
        for c in sorted(g.addr, key=lambda ww: g.addr[ww]):
            if not c:
                continue
            cand = node.mul_words(x, node.conjugate_word(y, c))
            if node.order_of(cand) == INFINITE:
                w_pick = c
                break
        cur_node, extras = node, []
        if w_pick is None:
            cur_node, w_pick, singles = fresh_factor(node, g)
            extras = singles
            x_l, y_l = lift1(cur_node, x), lift1(cur_node, y)
        else:
            x_l, y_l = x, y
        w_l = w_pick
        z = cur_node.conjugate_word(y_l, w_l)
        target = cur_node.mul_words(x_l, z)
        if cur_node.order_of(target) != INFINITE:
            raise SchemeError("could not build an infinite-order companion")
        n2, t = make_conjugate(cur_node, y_l, target, window=window)

        def l2(w):
            return EMPTY if not w else n2.canonical(
                SyllableWord([(FACTOR, 0, cur_node.intern(w))]))

        trace = [(t, 1), (l2(w_l), -1)]
        prod = _trace_product(n2, l2(y_l), trace)
        if n2.reduce(n2.mul_words(prod, n2.invert_word(l2(x_l)))):
            raise SchemeError("conjugation trace failed to verify")
        if cur_node is node:
            addr = addr_after(n2, [t], g)
        else:
            mid = UGroup(cur_node, addr_after(cur_node, extras, g), g.u,
                         meta=g.meta, lam=g.lam, lamplus=g.lamplus)
            addr = {l2(w): a for w, a in mid.addr.items()}
            off = max((a.offset for a in addr.values()
                       if a.alpha == x_alpha), default=-1) + 1
            for c in (n2.canonical(t), n2.canonical(n2.invert_word(t))):
                addr[c] = Address(x_alpha, off)
                off += 1
        meta = dict(g.meta)
        meta["standard"] = False
        out = checked_extension(UGroup(n2, addr, g.u, name=f"{g.name}+t",
                                       meta=meta, lam=g.lam,
                                       lamplus=g.lamplus))
        return SimplicityMove(out, "finite-x", trace, True,
                              "x splits as an infinite companion times a "
                              "conjugate of y")

    # y has finite order: make an infinite-order product of two y-conjugates
    cur_node, w_pick, singles = fresh_factor(node, g)
    x_l, y_l = lift1(cur_node, x), lift1(cur_node, y)
    big_y = cur_node.mul_words(y_l, cur_node.conjugate_word(y_l, w_pick))
    if cur_node.order_of(big_y) != INFINITE:
        raise SchemeError("cross-factor companion is not of infinite order")
    mid = UGroup(cur_node, addr_after(cur_node, singles, g), g.u,
                 meta=g.meta, lam=g.lam, lamplus=g.lamplus)

    def l2m(n2, w):
        return EMPTY if not w else n2.canonical(
            SyllableWord([(FACTOR, 0, cur_node.intern(w))]))

    if ox == INFINITE:
        n2, t = make_conjugate(cur_node, big_y, x_l, window=window)
        wt = n2.mul_words(l2m(n2, w_pick), t)
        trace = [(t, 1), (wt, 1)]
        prod = _trace_product(n2, l2m(n2, y_l), trace)
        if n2.reduce(n2.mul_words(prod, n2.invert_word(l2m(n2, x_l)))):
            raise SchemeError("conjugation trace failed to verify")
        addr = {l2m(n2, w): a for w, a in mid.addr.items()}
        off = max((a.offset for a in addr.values() if a.alpha == x_alpha),
                  default=-1) + 1
        for c in (n2.canonical(t), n2.canonical(n2.invert_word(t))):
            addr[c] = Address(x_alpha, off)
            off += 1
        case = "finite-y"
        detail = "an infinite product of two y-conjugates absorbs x"
    else:
        # both finite: a second cross-factor position keeps the companion
        # infinite whatever the exponents in the copies are
        cur2, w2, singles2 = fresh_factor(cur_node, g, tag="v")

        def lc2(w):
            return EMPTY if not w else cur2.canonical(
                SyllableWord([(FACTOR, 0, cur_node.intern(w))]))

        y_big2 = lc2(big_y)
        x_2, y_2, w_2 = lc2(x_l), lc2(y_l), lc2(w_pick)
        target = cur2.mul_words(x_2, cur2.conjugate_word(y_big2, w2))
        if cur2.order_of(target) != INFINITE:
            raise SchemeError("no companion position makes x times the "
                              "y-product infinite")
        n2, t = make_conjugate(cur2, y_big2, target, window=window)

        def l3(w):
            return EMPTY if not w else n2.canonical(
                SyllableWord([(FACTOR, 0, cur2.intern(w))]))

        wt = n2.mul_words(l3(w_2), t)
        ww2 = l3(cur2.mul_words(w_2, w2))
        trace = [(t, 1), (wt, 1), (ww2, -1), (l3(w2), -1)]
        prod = _trace_product(n2, l3(y_2), trace)
        if n2.reduce(n2.mul_words(prod, n2.invert_word(l3(x_2)))):
            raise SchemeError("conjugation trace failed to verify")
        mid2_addr = {lc2(w): a for w, a in mid.addr.items()}
        off = max((a.offset for a in mid2_addr.values()
                   if a.alpha == x_alpha), default=-1) + 1
        for sw in singles2:
            for c in (cur2.canonical(sw),
                      cur2.canonical(cur2.invert_word(sw))):
                if c and c not in mid2_addr:
                    mid2_addr[c] = Address(x_alpha, off)
                    off += 1
        addr = {l3(w): a for w, a in mid2_addr.items()}
        off = max((a.offset for a in addr.values() if a.alpha == x_alpha),
                  default=-1) + 1
        for c in (n2.canonical(t), n2.canonical(n2.invert_word(t))):
            addr[c] = Address(x_alpha, off)
            off += 1
        case = "finite-both"
        detail = "two stages: an infinite y-product, then the finite-x split"
    meta = dict(g.meta)
    meta["standard"] = False
    out = checked_extension(UGroup(n2, addr, g.u, name=f"{g.name}+t",
                                   meta=meta, lam=g.lam, lamplus=g.lamplus))
    return SimplicityMove(out, case, trace, True, detail)

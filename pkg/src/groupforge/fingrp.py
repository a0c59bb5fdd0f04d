"""Finite groups as multiplication tables, plus homomorphism search.

Groups are dense integer tables (numpy int32).  Element 'names' are their
indices.  Multiplication convention throughout: table[a, b] is "a then b",
and permutation composition follows the same order, (p * q)(x) = q[p[x]].
Conjugation of x by g means g^-1 x g.

The searches (homomorphism enumeration, automorphism groups, the suitability
and localization checks) all enumerate candidate generator images filtered by
element order, then verify on the full table.  Costs are estimated up front
against a budget so a hopeless search fails fast instead of spinning.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Iterable, Optional

import numpy as np

DEFAULT_BUDGET = 10**8
PERM_EXPANSION_BOUND = 20000


class GroupError(Exception):
    pass


class BudgetExceeded(GroupError):
    def __init__(self, message, estimate=None, budget=None):
        super().__init__(message)
        self.estimate = estimate
        self.budget = budget


def default_budget() -> int:
    raw = os.environ.get("FORGE_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise GroupError(f"FORGE_BUDGET must be an integer, got {raw!r}") from None


class FiniteGroup:
    """A finite group given by its full multiplication table."""

    def __init__(self, table, name: str = "G", check: bool = True):
        try:
            table = np.asarray(table, dtype=np.int32)
        except (ValueError, TypeError) as exc:
            raise GroupError(f"group table is not a rectangular integer "
                             f"matrix: {exc}") from None
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise GroupError(f"group table must be square, got shape {table.shape}")
        self.table = table
        self.n = int(table.shape[0])
        self.name = name
        if check:
            self._validate()
        self.identity = self._find_identity()
        self.inv = self._build_inverses()

    def _validate(self):
        n = self.n
        if n == 0:
            raise GroupError("empty table")
        if self.table.min() < 0 or self.table.max() >= n:
            raise GroupError("table entries out of range")
        ar = np.arange(n, dtype=np.int32)
        for i in range(n):
            if not np.array_equal(np.sort(self.table[i]), ar):
                raise GroupError(f"row {i} is not a permutation")
            if not np.array_equal(np.sort(self.table[:, i]), ar):
                raise GroupError(f"column {i} is not a permutation")
        # associativity, one row at a time: (a b) c == a (b c)
        T = self.table
        for a in range(n):
            if not np.array_equal(T[T[a], :], T[a][T]):
                raise GroupError(f"associativity fails at element {a}")

    def _find_identity(self) -> int:
        ar = np.arange(self.n, dtype=np.int32)
        for e in range(self.n):
            if np.array_equal(self.table[e], ar) and np.array_equal(self.table[:, e], ar):
                return e
        raise GroupError("no identity element")

    def _build_inverses(self):
        inv = np.empty(self.n, dtype=np.int32)
        for a in range(self.n):
            hits = np.nonzero(self.table[a] == self.identity)[0]
            if len(hits) != 1:
                raise GroupError(f"element {a} lacks a unique inverse")
            inv[a] = hits[0]
        return inv

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"FiniteGroup({self.name!r}, order={self.n})"

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def conj(self, x: int, g: int) -> int:
        """g^-1 x g."""
        return int(self.table[self.table[self.inv[g], x], g])

    def is_identity(self, a: int) -> bool:
        return a == self.identity

    def order_of(self, a: int) -> int:
        k, acc = 1, a
        while acc != self.identity:
            acc = int(self.table[acc, a])
            k += 1
        return k

    def element_orders(self):
        return [self.order_of(a) for a in range(self.n)]

    def power(self, a: int, k: int) -> int:
        if k < 0:
            return self.power(self.inverse(a), -k)
        acc = self.identity
        for _ in range(k):
            acc = int(self.table[acc, a])
        return acc

    def center(self) -> tuple:
        T = self.table
        return tuple(int(z) for z in range(self.n)
                     if np.array_equal(T[z], T[:, z]))

    def centralizer(self, elems: Iterable[int]) -> tuple:
        elems = list(elems)
        T = self.table
        return tuple(int(g) for g in range(self.n)
                     if all(T[g, x] == T[x, g] for x in elems))

    def subgroup_closure(self, gens: Iterable[int]) -> tuple:
        seen = {self.identity}
        frontier = [self.identity]
        gens = sorted(set(gens))
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = int(self.table[x, g])
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return tuple(sorted(seen))

    def is_subgroup(self, elems: Iterable[int]) -> bool:
        s = set(elems)
        if self.identity not in s:
            return False
        return all(int(self.table[a, b]) in s for a in s for b in s)

    def conjugate_set(self, elems: Iterable[int], g: int) -> tuple:
        return tuple(sorted(self.conj(x, g) for x in elems))

    def generating_set(self) -> tuple:
        """Small generating set, greedily by descending element order."""
        if self.n == 1:
            return ()
        ranked = sorted(range(self.n), key=lambda a: (-self.order_of(a), a))
        gens: list[int] = []
        have = {self.identity}
        for a in ranked:
            if a in have:
                continue
            gens.append(a)
            have = set(self.subgroup_closure(gens))
            if len(have) == self.n:
                return tuple(gens)
        raise GroupError("generating-set search failed")  # unreachable on a valid table


# -- constructions ------------------------------------------------------------

def trivial(name: str = "1") -> FiniteGroup:
    return FiniteGroup(np.zeros((1, 1), dtype=np.int32), name=name, check=False)

def cyclic(n: int, name: Optional[str] = None) -> FiniteGroup:
    if n < 1:
        raise GroupError("cyclic group needs n >= 1")
    ar = np.arange(n, dtype=np.int32)
    table = (ar[:, None] + ar[None, :]) % n
    return FiniteGroup(table, name=name or f"z{n}", check=False)

def _perm_compose(p, q):
    # p then q
    return tuple(q[p[i]] for i in range(len(p)))

def perm_group(generators, name: str = "G", bound: int = PERM_EXPANSION_BOUND) -> FiniteGroup:
    """Close a list of permutations (image tuples) and build the table."""
    gens = [tuple(g) for g in generators]
    if not gens:
        raise GroupError("need at least one permutation")
    k = len(gens[0])
    for g in gens:
        if len(g) != k or sorted(g) != list(range(k)):
            raise GroupError(f"not a permutation of 0..{k-1}: {g}")
    ident = tuple(range(k))
    elems = [ident]
    index = {ident: 0}
    i = 0
    while i < len(elems):
        p = elems[i]
        i += 1
        for g in gens:
            q = _perm_compose(p, g)
            if q not in index:
                if len(elems) >= bound:
                    raise GroupError(
                        f"permutation group exceeds expansion bound {bound}")
                index[q] = len(elems)
                elems.append(q)
    n = len(elems)
    table = np.empty((n, n), dtype=np.int32)
    for a in range(n):
        for b in range(n):
            table[a, b] = index[_perm_compose(elems[a], elems[b])]
    grp = FiniteGroup(table, name=name, check=False)
    grp.perms = elems
    return grp

def symmetric(n: int) -> FiniteGroup:
    if n == 1:
        return trivial("s1")
    gens = [tuple([1, 0] + list(range(2, n)))]
    if n > 2:
        gens.append(tuple(list(range(1, n)) + [0]))
    return perm_group(gens, name=f"s{n}")

def alternating(n: int) -> FiniteGroup:
    if n < 3:
        return trivial(f"a{n}")
    three = [1, 2, 0] + list(range(3, n))
    gens = [tuple(three)]
    if n > 3:
        if n % 2 == 1:
            gens.append(tuple(list(range(1, n)) + [0]))
        else:
            gens.append(tuple([0] + list(range(2, n)) + [1]))
    return perm_group(gens, name=f"a{n}")

def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the n-gon, order 2n."""
    if n < 3:
        raise GroupError("dihedral needs n >= 3")
    rot = tuple((i + 1) % n for i in range(n))
    flip = tuple((n - i) % n for i in range(n))
    return perm_group([rot, flip], name=f"d{n}")

_QUNITS = {  # (unit, unit) -> (sign, unit) for 1,i,j,k
    (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
    (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
    (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
    (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
}

def quaternion8() -> FiniteGroup:
    """Order 8: indices 0..7 are 1,-1,i,-i,j,-j,k,-k."""
    def enc(sign, unit):
        return unit * 2 + (0 if sign == 1 else 1)
    table = np.empty((8, 8), dtype=np.int32)
    for a in range(8):
        for b in range(8):
            sa, ua = (1 if a % 2 == 0 else -1), a // 2
            sb, ub = (1 if b % 2 == 0 else -1), b // 2
            s, u = _QUNITS[(ua, ub)]
            table[a, b] = enc(sa * sb * s, u)
    return FiniteGroup(table, name="q8", check=False)

def direct_product(a: FiniteGroup, b: FiniteGroup, name: Optional[str] = None) -> FiniteGroup:
    nb = b.n
    table = (a.table[:, None, :, None].astype(np.int64) * nb
             + b.table[None, :, None, :]).reshape(a.n * nb, a.n * nb)
    return FiniteGroup(table.astype(np.int32), name=name or f"{a.name}x{b.name}",
                       check=False)


# -- homomorphisms ------------------------------------------------------------

@dataclass(frozen=True)
class GroupHom:
    src: FiniteGroup
    dst: FiniteGroup
    img: tuple

    def __post_init__(self):
        if len(self.img) != self.src.n:
            raise GroupError("image list length does not match source order")

    def __call__(self, a: int) -> int:
        return self.img[a]

    def is_injective(self) -> bool:
        return len(set(self.img)) == self.src.n

    def is_surjective(self) -> bool:
        return len(set(self.img)) == self.dst.n

    def image_subgroup(self) -> tuple:
        return tuple(sorted(set(self.img)))

    def then(self, other: "GroupHom") -> "GroupHom":
        """self followed by other."""
        if other.src is not self.dst and other.src.n != self.dst.n:
            raise GroupError("composition mismatch")
        return GroupHom(self.src, other.dst, tuple(other.img[x] for x in self.img))

    def check(self) -> bool:
        imga = np.asarray(self.img, dtype=np.int32)
        return np.array_equal(self.dst.table[imga[:, None], imga[None, :]],
                              imga[self.src.table])


def identity_hom(g: FiniteGroup) -> GroupHom:
    return GroupHom(g, g, tuple(range(g.n)))


def _bfs_expressions(g: FiniteGroup, gens):
    """Order the group so img extends incrementally from generator images.

    Returns (order, steps) where steps[i] = (elem, parent, gen_pos) and
    elem = parent * gens[gen_pos]; identity and the generators come first.
    """
    steps = []
    known = {g.identity}
    frontier = [g.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for pos, gen in enumerate(gens):
                y = int(g.table[x, gen])
                if y not in known:
                    known.add(y)
                    steps.append((y, x, pos))
                    nxt.append(y)
        frontier = nxt
    if len(known) != g.n:
        raise GroupError("generators do not generate")
    return steps


def enumerate_homs(src: FiniteGroup, dst: FiniteGroup, *, injective=False,
                   budget: Optional[int] = None):
    """Yield all homomorphisms src -> dst, in a deterministic order.

    Candidate generator images are filtered by element order (divisibility,
    or equality when injective), then each full image map is verified on the
    whole table at once.
    """
    if budget is None:
        budget = default_budget()
    gens = src.generating_set()
    if not gens:
        yield GroupHom(src, dst, tuple([dst.identity] * src.n))
        return
    dst_orders = dst.element_orders()
    cands = []
    for gen in gens:
        o = src.order_of(gen)
        if injective:
            ok = [d for d in range(dst.n) if dst_orders[d] == o]
        else:
            ok = [d for d in range(dst.n) if o % dst_orders[d] == 0]
        if not ok:
            return
        cands.append(ok)
    total = 1
    for c in cands:
        total *= len(c)
    estimate = total * src.n * src.n
    if estimate > budget:
        raise BudgetExceeded(
            f"homomorphism search needs ~{estimate} operations, budget {budget}",
            estimate=estimate, budget=budget)
    steps = _bfs_expressions(src, gens)
    dT = dst.table
    img = np.empty(src.n, dtype=np.int32)
    for choice in iproduct(*cands):
        img[src.identity] = dst.identity
        for pos, gen in enumerate(gens):
            img[gen] = choice[pos]
        for elem, parent, pos in steps:
            img[elem] = dT[img[parent], choice[pos]]
        if injective and len(np.unique(img)) != src.n:
            continue
        if np.array_equal(dT[img[:, None], img[None, :]], img[src.table]):
            yield GroupHom(src, dst, tuple(int(v) for v in img))


# -- automorphisms ------------------------------------------------------------

class AutGroup(FiniteGroup):
    """Automorphism group of `source`; element i is the map self.maps[i]."""

    def __init__(self, source: FiniteGroup, maps):
        self.source = source
        self.maps = [tuple(m) for m in maps]
        self.map_index = {m: i for i, m in enumerate(self.maps)}
        n = len(self.maps)
        table = np.empty((n, n), dtype=np.int32)
        for i, a in enumerate(self.maps):
            for j, b in enumerate(self.maps):
                composed = tuple(b[x] for x in a)  # a then b
                table[i, j] = self.map_index[composed]
        super().__init__(table, name=f"aut({source.name})", check=False)

    def apply(self, i: int, x: int) -> int:
        return self.maps[i][x]

    def inner_index(self, g: int) -> int:
        src = self.source
        m = tuple(src.conj(x, g) for x in range(src.n))
        return self.map_index[m]

    def inner_embedding(self) -> GroupHom:
        src = self.source
        return GroupHom(src, self, tuple(self.inner_index(g) for g in range(src.n)))

    def inner_image(self) -> tuple:
        return tuple(sorted(set(self.inner_embedding().img)))


def automorphism_group(g: FiniteGroup, *, budget: Optional[int] = None) -> AutGroup:
    maps = sorted(h.img for h in enumerate_homs(g, g, injective=True, budget=budget))
    return AutGroup(g, maps)


# -- the checks ---------------------------------------------------------------

@dataclass
class CompletenessReport:
    group: str
    ok: bool
    center_order: int
    aut_order: int
    outer_witness: Optional[int]  # index in the aut group of a non-inner map

def is_complete(g: FiniteGroup, *, budget: Optional[int] = None) -> CompletenessReport:
    center = g.center()
    aut = automorphism_group(g, budget=budget)
    inner = set(aut.inner_embedding().img)
    outer = next((i for i in range(aut.n) if i not in inner), None)
    ok = len(center) == 1 and outer is None
    return CompletenessReport(g.name, ok, len(center), aut.n, outer)


@dataclass
class SuitabilityReport:
    group: str
    ok: bool
    torsion: bool
    centerless: bool
    unique_copy: bool
    extends_inner: bool
    aut_order: int
    witness: Optional[str]

def is_suitable(h: FiniteGroup, *, budget: Optional[int] = None) -> SuitabilityReport:
    """Torsion, centerless, one isomorphic copy of itself inside its
    automorphism group (the inner one), and every automorphism of that copy
    induced by conjugation inside the automorphism group."""
    torsion = True  # finite means torsion
    center = h.center()
    centerless = len(center) == 1
    witness = None
    if not centerless:
        nontrivial = next(z for z in center if z != h.identity)
        witness = f"central element {nontrivial}"
        return SuitabilityReport(h.name, False, torsion, False, False, False, 0, witness)

    aut = automorphism_group(h, budget=budget)
    inner_set = aut.inner_image()

    unique_copy = True
    for hom in enumerate_homs(h, aut, injective=True, budget=budget):
        if hom.image_subgroup() != inner_set:
            unique_copy = False
            witness = f"embedding with image {hom.image_subgroup()} != inner copy"
            break

    extends_inner = True
    if unique_copy:
        gens = h.generating_set()
        iota = aut.inner_embedding().img
        for a in range(aut.n):
            # want b in Aut with b^-1 iota(x) b == iota(a(x)) for all x
            target = {gen: iota[aut.apply(a, gen)] for gen in gens}
            if not any(all(aut.conj(iota[gen], b) == t for gen, t in target.items())
                       for b in range(aut.n)):
                extends_inner = False
                witness = f"automorphism {a} does not extend to an inner one"
                break

    ok = torsion and centerless and unique_copy and extends_inner
    return SuitabilityReport(h.name, ok, torsion, centerless, unique_copy,
                             extends_inner, aut.n, witness)


def h_socle(h: FiniteGroup, g: FiniteGroup, *, budget: Optional[int] = None) -> tuple:
    """Subgroup of g generated by the images of all homomorphisms h -> g."""
    gens: set[int] = set()
    for hom in enumerate_homs(h, g, budget=budget):
        gens.update(hom.img)
    return g.subgroup_closure(gens)


@dataclass
class LocalizationReport:
    ok: bool
    hom_count: int
    endo_count: int
    witness: Optional[str]

def is_localization(eta: GroupHom, *, budget: Optional[int] = None) -> LocalizationReport:
    """Does every map src -> dst factor uniquely through dst -> dst after eta?"""
    h, g = eta.src, eta.dst
    endos = list(enumerate_homs(g, g, budget=budget))
    homs = list(enumerate_homs(h, g, budget=budget))
    for phi in homs:
        exts = [e for e in endos if eta.then(e).img == phi.img]
        if len(exts) != 1:
            kind = "no extension" if not exts else f"{len(exts)} extensions"
            return LocalizationReport(False, len(homs), len(endos),
                                      f"map with images {phi.img} has {kind}")
    return LocalizationReport(True, len(homs), len(endos), None)


def subgroup_conjugacy(g: FiniteGroup, a: Iterable[int], b: Iterable[int]) -> Optional[int]:
    """An element c with c^-1 A c = B, or None."""
    sa, sb = set(a), set(b)
    if len(sa) != len(sb):
        return None
    if sorted(g.order_of(x) for x in sa) != sorted(g.order_of(x) for x in sb):
        return None
    for c in range(g.n):
        if {g.conj(x, c) for x in sa} == sb:
            return c
    return None


def is_isomorphic(a: FiniteGroup, b: FiniteGroup, *, budget: Optional[int] = None) -> bool:
    if a.n != b.n:
        return False
    if sorted(a.element_orders()) != sorted(b.element_orders()):
        return False
    return next(enumerate_homs(a, b, injective=True, budget=budget), None) is not None


# -- text format --------------------------------------------------------------

def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _int_row(lineno: int, line: str, what: str):
    try:
        return [int(v) for v in line.split()]
    except ValueError:
        raise GroupError(f"line {lineno}: {what} must be integers") from None


def parse_group_text(text: str) -> FiniteGroup:
    """group <name> / order <n> + table rows, or perms <k> + generator lines."""
    lines = list(_content_lines(text))
    if not lines or not lines[0][1].startswith("group"):
        raise GroupError("group text must start with 'group <name>'")
    first = lines[0][1]
    name = first.split(None, 1)[1].strip() if len(first.split()) > 1 else "G"
    pos = 1
    order = None
    if pos < len(lines) and lines[pos][1].startswith("order"):
        lineno, line = lines[pos]
        parts = line.split()
        if len(parts) != 2 or not parts[1].isdigit():
            raise GroupError(f"line {lineno}: order needs one integer")
        order = int(parts[1])
        pos += 1
    if pos >= len(lines):
        raise GroupError("missing table or perms section")
    headno, head = lines[pos]
    if head == "table":
        pos += 1
        if order is None:
            raise GroupError("table format needs an order line")
        rows = []
        for _ in range(order):
            if pos >= len(lines):
                raise GroupError(f"table needs {order} rows")
            lineno, line = lines[pos]
            row = _int_row(lineno, line, "table entries")
            if len(row) != order:
                raise GroupError(f"line {lineno}: table row has {len(row)} "
                                 f"entries, expected {order}")
            rows.append(row)
            pos += 1
        if pos != len(lines):
            raise GroupError(f"line {lines[pos][0]}: trailing content after "
                             f"table rows")
        return FiniteGroup(np.array(rows, dtype=np.int32), name=name)
    if head.startswith("perms"):
        parts = head.split()
        if len(parts) != 2 or not parts[1].isdigit():
            raise GroupError(f"line {headno}: perms needs one integer width")
        k = int(parts[1])
        pos += 1
        gens = []
        while pos < len(lines):
            lineno, line = lines[pos]
            gen = tuple(_int_row(lineno, line, "permutation images"))
            if len(gen) != k:
                raise GroupError(f"line {lineno}: permutation line has "
                                 f"{len(gen)} images, expected {k}")
            gens.append(gen)
            pos += 1
        if not gens:
            raise GroupError("perms section needs at least one generator line")
        grp = perm_group(gens, name=name)
        if order is not None and grp.n != order:
            raise GroupError(f"declared order {order}, expansion found {grp.n}")
        return grp
    raise GroupError(f"line {headno}: expected 'table' or 'perms <k>', "
                     f"got {head!r}")

def load_group(path: str) -> FiniteGroup:
    with open(path) as fh:
        return parse_group_text(fh.read())

_BUILTINS = {
    "1": trivial, "triv": trivial, "q8": quaternion8,
}

def named_group(spec: str) -> FiniteGroup:
    """Resolve z<n>, s<n>, a<n>, d<n>, q8, products like s3xz2, or a file path."""
    key = spec.strip().lower()
    if "x" in key and not os.path.exists(spec):
        parts = key.split("x")
        try:
            groups = [named_group(p) for p in parts]
        except GroupError:
            groups = None
        if groups:
            acc = groups[0]
            for nxt in groups[1:]:
                acc = direct_product(acc, nxt)
            acc.name = key
            return acc
    if key in _BUILTINS:
        return _BUILTINS[key]()
    for prefix, builder in (("z", cyclic), ("c", cyclic), ("s", symmetric),
                            ("a", alternating), ("d", dihedral)):
        if key.startswith(prefix) and key[len(prefix):].isdigit():
            return builder(int(key[len(prefix):]))
    if os.path.exists(spec):
        return load_group(spec)
    raise GroupError(f"unknown group {spec!r} (not a builtin name or file)")

"""Tower-node layer: reduction, canonical forms, stable letters, and the
conjugation helpers.

Reduction is cross-checked against an independent stack reducer written here
from the defining rules, so the node's incremental pushing is never the only
route to an answer.
"""

import pytest
from hypothesis import given, strategies as st

from groupforge import fingrp
from groupforge.amalgam import (INFINITE, AmalgamNode, BaseNode, CyclicAssoc,
                                ExplicitShared, HnnNode, SchemeError,
                                adjoin_socle_witness, britton_reduce,
                                centralizer_conclusion_check,
                                conjugate_torsion_into_factor, fresh_letter,
                                hat_base, is_weakly_cyclically_reduced,
                                make_conjugate, parse_scheme_text,
                                realize_iso_by_hnn, subgroup_table,
                                weakly_cyclic_reduce)
from groupforge.words import EMPTY, FACTOR, LETTER, SyllableWord

from conftest import free_product, z6_hnn, z6_pair


# -- independent reduction oracle ---------------------------------------------

def oracle_reduce(node, w):
    """Stack reduction from the defining rules: drop identities, merge
    same-side neighbours, and convert shared elements (stranded on the stack
    or incoming) to the side where they can merge."""
    fac = node.factors
    shared = node._shared
    out = []
    for syl in w:
        while True:
            side, elem = syl[1], syl[2]
            if fac[side].is_identity_elem(elem):
                break
            if out and out[-1][1] == side:
                prev = out.pop()
                syl = (FACTOR, side, fac[side].mul_elem(prev[2], elem))
                continue
            if out and shared.member(out[-1][1], out[-1][2]):
                prev = out.pop()
                conv = shared.convert(prev[1], prev[2])
                syl = (FACTOR, side, fac[side].mul_elem(conv, elem))
                continue
            if out and shared.member(side, elem):
                prev = out.pop()
                oside = prev[1]
                conv = shared.convert(side, elem)
                syl = (FACTOR, oside, fac[oside].mul_elem(prev[2], conv))
                continue
            out.append((FACTOR, side, elem))
            break
    return SyllableWord(out)


def amalgam_words(node, max_len=10):
    n0 = node.factors[0].elem_count()
    n1 = node.factors[1].elem_count()
    syls = st.one_of(
        st.tuples(st.just(FACTOR), st.just(0), st.integers(0, n0 - 1)),
        st.tuples(st.just(FACTOR), st.just(1), st.integers(0, n1 - 1)))
    return st.lists(syls, max_size=max_len).map(SyllableWord)


FP57 = free_product(5, 7)
AM66 = z6_pair()
AM66T = z6_pair(twist=True)
HN6 = z6_hnn()


@given(amalgam_words(FP57))
def test_free_product_reduce_matches_oracle(w):
    assert FP57.reduce(w) == oracle_reduce(FP57, w)


@given(amalgam_words(AM66))
def test_amalgam_reduce_matches_oracle(w):
    assert AM66.reduce(w) == oracle_reduce(AM66, w)


@given(amalgam_words(AM66T))
def test_twisted_amalgam_reduce_matches_oracle(w):
    assert AM66T.reduce(w) == oracle_reduce(AM66T, w)


@given(amalgam_words(AM66))
def test_reduce_idempotent_and_valid(w):
    r = AM66.reduce(w)
    assert AM66.reduce(r) == r
    AM66.validate_word(r)
    for i in range(1, len(r)):
        assert r[i][1] != r[i - 1][1]
    if len(r) >= 2:
        for syl in r:
            assert not AM66._shared.member(syl[1], syl[2])


@given(amalgam_words(AM66))
def test_word_inverse_cancels(w):
    assert AM66.mul_words(w, AM66.invert_word(w)) == EMPTY
    assert AM66.mul_words(AM66.invert_word(w), w) == EMPTY


@given(amalgam_words(AM66))
def test_canonical_is_idempotent_and_equal(w):
    c = AM66.canonical(w)
    assert AM66.canonical(c) == c
    assert AM66.equal(w, c)


@given(amalgam_words(AM66), st.integers(0, 2), st.data())
def test_canonical_constant_on_shared_insertions(w, pair_idx, data):
    """Splicing s . s^-1 across a position, spelling s on the left and its
    partner's inverse on the right, changes the spelling but never the
    canonical form."""
    l_elem, r_elem = AM66._shared.pairs[pair_idx]
    pos = data.draw(st.integers(0, len(w)))
    spliced = SyllableWord(
        list(w[:pos])
        + [(FACTOR, 0, l_elem), (FACTOR, 1, AM66.factors[1].inv_elem(r_elem))]
        + list(w[pos:]))
    assert AM66.canonical(spliced) == AM66.canonical(w)


def test_reduce_converts_shared_between_opposite_sides():
    # left 2 is shared, so it crosses over and both right syllables merge
    w = AM66.parse("f1:1 f0:2 f1:1")
    assert AM66.reduce(w) == AM66.parse("f1:4")


def test_twisted_conversion_uses_the_twist():
    # the twisted gluing matches left 2 with right 4, so the same word
    # collapses completely: 1 + 4 + 1 = 0 mod 6
    w = AM66T.parse("f1:1 f0:2 f1:1")
    assert AM66T.reduce(w) == EMPTY
    assert AM66.reduce(AM66.parse("f1:1 f0:2 f1:1")) != EMPTY


def test_order_of_classifies():
    assert AM66.order_of(EMPTY) == 1
    assert AM66.order_of(AM66.parse("f0:3")) == 2
    assert AM66.order_of(AM66.parse("f0:2")) == 3
    assert AM66.order_of(AM66.parse("f0:3 f1:3")) == INFINITE
    assert FP57.order_of(FP57.parse("f0:1 f1:1")) == INFINITE


def test_weakly_cyclic_reduce_contract():
    w = AM66.parse("f1:1 f0:3 f1:5")
    core, conj = weakly_cyclic_reduce(AM66, w)
    assert is_weakly_cyclically_reduced(AM66, core)
    assert AM66.equal(AM66.conjugate_word(core, conj), w)
    assert len(core) <= len(AM66.reduce(w))


@given(amalgam_words(AM66))
def test_weakly_cyclic_reduce_always_verifies(w):
    core, conj = weakly_cyclic_reduce(AM66, w)
    assert is_weakly_cyclically_reduced(AM66, core)
    assert AM66.equal(AM66.conjugate_word(core, conj), w)


def test_torsion_conjugation_recovers_factor_element():
    w = AM66.conjugate_word(AM66.parse("f0:3"), AM66.parse("f1:1 f0:1"))
    te = conjugate_torsion_into_factor(AM66, w)
    assert te.order == 2
    back = AM66.conjugate_word(
        SyllableWord([(FACTOR, te.side, te.elem)]), te.conj)
    assert AM66.equal(back, w)


def test_torsion_conjugation_identity_case():
    te = conjugate_torsion_into_factor(AM66, EMPTY)
    assert te.side is None and te.order == 1


def test_torsion_conjugation_rejects_infinite_order():
    with pytest.raises(SchemeError, match="infinite order"):
        conjugate_torsion_into_factor(AM66, AM66.parse("f0:3 f1:3"))


# -- stable letters ------------------------------------------------------------

def hnn_words(node, max_len=10):
    n0 = node.base.elem_count()
    syls = st.one_of(
        st.tuples(st.just(FACTOR), st.just(0), st.integers(0, n0 - 1)),
        st.tuples(st.just(LETTER), st.just(node.letter),
                  st.sampled_from([1, -1])))
    return st.lists(syls, max_size=max_len).map(SyllableWord)


def test_britton_pinches_associated_elements():
    t = HN6.letter
    w = HN6.parse(f"t{t}^-1 f0:3 t{t}")
    assert britton_reduce(HN6, w) == HN6.parse("f0:3")


def test_britton_keeps_unassociated_elements():
    t = HN6.letter
    w = HN6.parse(f"t{t}^-1 f0:1 t{t}")
    r = britton_reduce(HN6, w)
    assert sum(1 for s in r if s[0] == LETTER) == 2


@given(hnn_words(HN6))
def test_britton_idempotent_and_cancels(w):
    r = britton_reduce(HN6, w)
    assert britton_reduce(HN6, r) == r
    assert HN6.mul_words(w, HN6.invert_word(w)) == EMPTY


@given(hnn_words(HN6))
def test_britton_canonical_equal(w):
    c = HN6.canonical(w)
    assert HN6.equal(w, c)
    assert HN6.canonical(c) == c


def test_letter_has_infinite_order():
    assert HN6.order_of(HN6.letter_word()) == INFINITE
    assert HN6.order_of(HN6.parse("f0:2")) == 3


def test_cyclic_britton_reduce_shrinks_conjugates():
    t = HN6.letter
    w = HN6.parse(f"f0:1 t{t} f0:3 t{t}^-1 f0:5")
    r = HN6.cyclic_britton_reduce(w)
    letters = lambda u: sum(1 for s in u if s[0] == LETTER)
    assert letters(r) <= letters(HN6.reduce(w))
    assert letters(HN6.cyclic_britton_reduce(r)) == letters(r)


def test_cyclic_assoc_spec():
    base = BaseNode(fingrp.cyclic(5), name="c5")
    node = HnnNode(base, CyclicAssoc(1, 2, window=16))
    t = node.letter
    assert britton_reduce(node, node.parse(f"t{t}^-1 f0:1 t{t}")) == \
        node.parse("f0:2")


def test_make_conjugate_produces_verified_letter():
    node = free_product(5, 7)
    u = node.parse("f0:1")
    v = node.parse("f0:2")
    ext, t = make_conjugate(node, u, v)
    u_id, v_id = node.intern(u), node.intern(v)
    got = ext.conjugate_word(SyllableWord([(FACTOR, 0, u_id)]), t)
    assert ext.equal(got, SyllableWord([(FACTOR, 0, v_id)]))


def test_make_conjugate_identity_shortcut():
    node = free_product(5, 7)
    same, t = make_conjugate(node, EMPTY, EMPTY)
    assert same is node and t == EMPTY


def test_make_conjugate_rejects_order_mismatch():
    node = z6_pair()
    with pytest.raises(SchemeError, match="different orders"):
        make_conjugate(node, node.parse("f0:1"), node.parse("f0:3"))


def test_fresh_letters_are_distinct():
    a, b = fresh_letter(), fresh_letter()
    assert a != b


def test_subgroup_table_of_shared_part():
    node = z6_pair()
    g = subgroup_table(node, [node.lift(0, e) for e in (0, 2, 4)])
    assert g.n == 3
    assert fingrp.is_isomorphic(g, fingrp.cyclic(3))


def test_subgroup_table_rejects_open_lists():
    node = z6_pair()
    with pytest.raises(SchemeError, match="not closed"):
        subgroup_table(node, [node.lift(0, 0), node.lift(0, 1)])


def test_hat_base_tracks_both_copies():
    node = hat_base(fingrp.symmetric(3))
    assert node.group.n == 6
    assert node.h_group is not None and node.h_group.n == 6
    assert sorted(node.distinguished["h"]) == list(range(6))
    assert node.distinguished["hat"] == list(range(6))


def test_hat_base_requires_centerless():
    with pytest.raises(SchemeError, match="center"):
        hat_base(fingrp.cyclic(4))


def test_realize_iso_identity_pairing():
    node = hat_base(fingrp.symmetric(3))
    elems = list(range(6))
    r = realize_iso_by_hnn(node, elems, elems, elems, elems,
                           phi_pairs=[(a, a) for a in elems])
    assert r.letters[0] != r.letters[1]
    assert r.hat_conjugator == node.group.identity
    lift = lambda e: r.node.lift(r.mid.lift(e))
    for a in elems:
        fixed = r.node.conjugate_word(r.node.elem_word(lift(a)), r.conj)
        assert r.node.equal(fixed, r.node.elem_word(lift(a)))


def test_realize_iso_checks_every_pair():
    node = hat_base(fingrp.symmetric(3))
    aut = node.group
    g = next(a for a in range(aut.n) if aut.order_of(a) == 2)
    elems = list(range(6))
    phi = [(a, aut.conj(a, g)) for a in elems]
    r = realize_iso_by_hnn(node, elems, [b for _, b in phi], elems, elems,
                           phi_pairs=phi)
    lift = lambda e: r.node.lift(r.mid.lift(e))
    for a, b in phi:
        got = r.node.conjugate_word(r.node.elem_word(lift(a)), r.conj)
        assert r.node.equal(got, r.node.elem_word(lift(b)))


def test_realize_iso_rejects_mismatched_pairs():
    node = hat_base(fingrp.symmetric(3))
    elems = list(range(6))
    with pytest.raises(SchemeError, match="pairs do not match"):
        realize_iso_by_hnn(node, elems, elems, elems, elems,
                           phi_pairs=[(a, 0) for a in elems])


def test_centralizer_check_infinite_class():
    node = free_product(5, 7)
    x = node.parse("f0:1 f1:1")
    sq = node.mul_words(x, x)
    rep = centralizer_conclusion_check(node, x, [sq, node.parse("f0:2")])
    assert rep.x_class == "infinite"
    assert rep.ok
    assert rep.entries[0].commutes and rep.entries[0].consistent
    assert not rep.entries[1].commutes


def test_centralizer_check_torsion_class():
    node = z6_pair()
    rep = centralizer_conclusion_check(node, node.parse("f0:3"),
                                       [node.parse("f0:3")])
    assert rep.x_class == "torsion"
    assert rep.ok


def test_centralizer_check_identity_class():
    node = z6_pair()
    rep = centralizer_conclusion_check(node, EMPTY, [node.parse("f1:1")])
    assert rep.x_class == "identity"
    assert rep.ok and rep.entries[0].commutes


# -- socle witnesses -----------------------------------------------------------

def test_socle_witness_identity_is_a_no_op():
    hat = hat_base(fingrp.symmetric(3))
    out, rec = adjoin_socle_witness(hat, EMPTY)
    assert out is hat
    assert rec.factor_count() == 0 and rec.layers == 0


def test_socle_witness_torsion_needs_four_factors():
    hat = hat_base(fingrp.symmetric(3))
    x = next(i for i in range(hat.group.n) if hat.group.order_of(i) == 2)
    out, rec = adjoin_socle_witness(hat, SyllableWord([(FACTOR, 0, x)]))
    assert rec.factor_count() == 4 and rec.layers == 3
    acc = out.identity_elem()
    for _, e in rec.product:
        acc = out.mul_elem(acc, e)
    assert acc == rec.elem
    assert out.socle_records[-1] is rec


def test_socle_witness_infinite_needs_two_factors():
    h1 = hat_base(fingrp.symmetric(3), name="hl")
    h2 = hat_base(fingrp.symmetric(3), name="hr")
    node = AmalgamNode(h1, h2, ExplicitShared([h1.group.identity],
                                              [h2.group.identity]))
    x = next(i for i in range(6) if i != h1.group.identity)
    w = SyllableWord([(FACTOR, 0, x), (FACTOR, 1, x)])
    assert node.order_of(w) == INFINITE
    out, rec = adjoin_socle_witness(node, w)
    assert rec.factor_count() == 2 and rec.layers == 1
    acc = out.identity_elem()
    for _, e in rec.product:
        acc = out.mul_elem(acc, e)
    assert acc == rec.elem


def test_socle_witness_requires_tracked_group():
    node = z6_pair()
    with pytest.raises(SchemeError, match="no distinguished group"):
        adjoin_socle_witness(node, node.parse("f0:3"))


# -- scheme text -----------------------------------------------------------------

GOLDEN_SCHEME = """
# two cyclic groups glued along their even parts, then a letter on top
group g1 z6
group g2 z6
base b1 g1
base b2 g2
amalgam mid b1 b2 shared 0=0 2=2 4=4
hnn top mid assoc 0=0
target top
"""


def test_scheme_text_builds_tower():
    s = parse_scheme_text(GOLDEN_SCHEME)
    assert set(s.groups) == {"g1", "g2"}
    assert set(s.nodes) == {"b1", "b2", "mid", "top"}
    assert isinstance(s.target, HnnNode)
    assert isinstance(s.target.base, AmalgamNode)
    assert s.target.base.order_of(s.target.base.parse("f0:3 f1:3")) == INFINITE


def test_scheme_cyclic_hnn_directive():
    s = parse_scheme_text("group g z5\nbase b g\nhnn n b cyclic 1:2 12\n")
    node = s.target
    t = node.letter
    assert britton_reduce(node, node.parse(f"t{t}^-1 f0:1 t{t}")) == \
        node.parse("f0:2")


def test_scheme_defaults_to_last_node():
    s = parse_scheme_text("group g z4\nbase b g\n")
    assert s.target is s.nodes["b"]


@pytest.mark.parametrize("text,match", [
    ("base b nosuch\n", "line 1"),
    ("group g z4\nfrobnicate g\n", "line 2"),
    ("group g z4\nbase b g\namalgam a b b shared 0\n", "line 3"),
    ("group g z4\ntarget nope\n", "line 2"),
    ("", "no tower node"),
])
def test_scheme_errors_carry_line_numbers(text, match):
    with pytest.raises(SchemeError, match=match):
        parse_scheme_text(text)


def test_scheme_group_file_reference(tmp_path):
    (tmp_path / "k4.grp").write_text(
        "group k4\norder 4\ntable\n0 1 2 3\n1 0 3 2\n2 3 0 1\n3 2 1 0\n")
    s = parse_scheme_text("group g k4.grp\nbase b g\n",
                          base_dir=str(tmp_path))
    assert s.groups["g"].n == 4

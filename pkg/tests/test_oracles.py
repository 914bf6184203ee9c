"""
Unit tests for the membership oracles.

Checks member generators against their predicates, the least distinguishing
modulus and its logarithmic growth, and the κ-erasing homomorphism.
"""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import (
    KAPPA,
    LanguageId,
    erb_member,
    h_kappa,
    is_member,
    is_member_erb,
    is_member_gcm,
    is_member_jk,
    is_member_jk_padded,
    is_member_ld,
    is_member_lj,
    ld_members_up_to,
    least_distinguishing_modulus,
    lj_member,
    lj_tokens,
    parse_language,
)


def test_ld_members():
    assert ld_members_up_to(100) == [8, 14, 28, 62]
    assert is_member_ld("a" * 28)
    assert not is_member_ld("a" * 27)
    assert not is_member_ld("a" * 7 + "b")
    assert not is_member_ld("")


def test_gcm_membership():
    """a^m b^M is a member iff every i <= m divides M."""
    assert is_member_gcm("aaabbbbbb")
    assert not is_member_gcm("aaabbbb")
    assert is_member_gcm("bbb")
    assert is_member_gcm("aa")
    assert not is_member_gcm("aba")


def test_jk_membership():
    assert is_member_jk("aab")
    assert is_member_jk("b")
    assert not is_member_jk("abab")
    assert not is_member_jk("aabb")
    assert not is_member_jk("")


def test_least_distinguishing_modulus():
    assert least_distinguishing_modulus(2, 1) == 2
    assert least_distinguishing_modulus(7, 1) == 4
    assert least_distinguishing_modulus(13, 1) == 5
    assert least_distinguishing_modulus(3, 3) is None
    with pytest.raises(ValueError):
        least_distinguishing_modulus(-1, 2)


def test_least_distinguishing_modulus_is_logarithmic():
    """For r != s, r + s <= 600, the modulus stays below 4 log2(r + s)."""
    for total in range(3, 601):
        for r in range(total + 1):
            modulus = least_distinguishing_modulus(r, total - r)
            if modulus is not None:
                assert modulus <= 4 * math.log2(total)


def test_h_kappa_keeps_input_type():
    assert h_kappa("aκbκκ") == "ab"
    assert h_kappa(("a", KAPPA, "b")) == ("a", "b")
    assert is_member_jk_padded("aaκκb" + KAPPA)
    assert not is_member_jk_padded("aκκbκ")


def test_erb_members():
    assert erb_member(1) == "a0a1a10a11"
    for k in range(1, 20):
        assert is_member_erb(erb_member(k))
    assert not is_member_erb("a0a1")
    assert not is_member_erb("a0a1a01a11")
    with pytest.raises(ValueError):
        erb_member(0)


def test_lj_members():
    assert lj_member(2, 3) == "a1a0a1a0a0a1a0a0a0"
    assert lj_tokens("a1a0 a1") == ("a1", "a0", "a1")
    for j in (2, 3, 4):
        for k in range(1, 6):
            assert is_member_lj(j, lj_member(j, k))
    assert not is_member_lj(2, "a1a0a1a0")
    assert not is_member_lj(2, "a2a1a0")
    assert not is_member_lj(2, "b")


def test_parse_language():
    assert parse_language("erb") == (LanguageId.ERB, None)
    assert parse_language("lj3") == (LanguageId.LJ, 3)
    with pytest.raises(ValueError):
        parse_language("lj1")
    with pytest.raises(ValueError):
        parse_language("palindromes")


def test_is_member_dispatch():
    assert is_member(LanguageId.LD, "a" * 8)
    assert is_member("lj", lj_member(3, 2), j=3)
    with pytest.raises(ValueError):
        is_member(LanguageId.LJ, "a1a0")


@given(st.integers(0, 60), st.integers(0, 60))
def test_modulus_distinguishes_and_is_least(r, s):
    modulus = least_distinguishing_modulus(r, s)
    if r == s:
        assert modulus is None
        return
    assert r % modulus != s % modulus
    assert all(r % m == s % m for m in range(2, modulus))


@given(st.text(alphabet=["a", "b", KAPPA], max_size=20))
def test_h_kappa_is_a_homomorphism(word):
    split = len(word) // 2
    assert h_kappa(word) == h_kappa(word[:split]) + h_kappa(word[split:])
    assert KAPPA not in h_kappa(word)


@given(st.integers(1, 8), st.integers(1, 8))
def test_erb_members_are_distinct_and_unique_per_k(k, other):
    assert (erb_member(k) == erb_member(other)) == (k == other)

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tagforge.codec import (
    A,
    DOTTED,
    PLAIN,
    BarSide,
    DecodedView,
    DecoratedSymbol,
    EmptyInput,
    Malformed,
    Reason,
    Stage,
    bar_side,
    counter_for_length,
    counter_value,
    decode,
    encode_config,
    encode_input,
    hash_symbol,
    pair,
    parse_symbol,
    render_symbol,
    symbol_problems,
)

CK = Stage.CHECKPOINT


def items(word):
    """(base, barred) per pair, for compact layout assertions."""
    return [(word[j].base, word[j].barred) for j in range(0, len(word), 2)]


def test_input_encoding_of_example_word():
    w = encode_input("011", 3)
    assert items(w) == [("0", True), ("1", False), ("1", False)] + [(A, False)] * 4
    assert all(s.stage == CK and s.k == 0 for s in w)
    assert [s.dot for s in w[:2]] == [PLAIN, DOTTED]


def test_input_encoding_pair_pattern():
    w = encode_input("11010", 2)
    assert items(w)[:5] == [("1", True), ("1", False), ("0", False), ("1", False), ("0", False)]
    assert counter_value(w) == 8


def test_single_bit_input_has_counter_one():
    assert counter_value(encode_input("1", 1)) == 1


@pytest.mark.parametrize("n,c", [(1, 1), (2, 2), (3, 4), (4, 4), (5, 8), (8, 8), (9, 16)])
def test_counter_for_length(n, c):
    assert counter_for_length(n) == c


def test_encode_input_rejects_bad_words():
    with pytest.raises(EmptyInput):
        encode_input("", 1)
    with pytest.raises(ValueError):
        encode_input("012", 1)


def test_decode_round_trip_of_input():
    assert decode(encode_input("011", 3)) == DecodedView("011", 0, 4, 2, CK)


def test_counter_too_small():
    w = encode_config("01101", 0, 4)
    assert decode(w).reason is Reason.COUNTER_TOO_SMALL


def test_counter_not_power_of_two():
    assert decode(encode_config("01", 0, 3)).reason is Reason.COUNTER_NOT_POWER_OF_TWO


def test_counter_equal_to_length_is_accepted():
    # counter 4 > l = 3 for a four-bit word
    assert isinstance(decode(encode_config("0110", 1, 4)), DecodedView)


def test_bar_side():
    assert bar_side(encode_input("011", 3)) is BarSide.LEFT
    w = pair(A, CK, 0) * 2 + pair("1", CK, 0, barred=True) + pair("0", CK, 0)
    assert bar_side(w) is BarSide.RIGHT


def test_split_counter_is_malformed():
    w = pair("1", CK, 0, barred=True) + pair(A, CK, 0) + pair("0", CK, 0) + pair(A, CK, 0)
    with pytest.raises(Malformed):
        counter_value(w)
    assert decode(w).reason is Reason.SPLIT_COUNTER


def test_decode_reasons():
    good = encode_input("011", 2)
    assert decode(good[:-1]).reason is Reason.DANGLING_HALF_PAIR
    mixed = good[:-2] + pair(A, Stage.DISPATCH, 0)
    assert decode(mixed).reason is Reason.MIXED_STAGES
    other_k = good[:-2] + pair(A, CK, 1)
    assert decode(other_k).reason is Reason.MIXED_APPENDANT
    swapped = (good[1], good[0]) + good[2:]
    assert decode(swapped).reason is Reason.BAD_PAIR
    two_heads = pair("0", CK, 0, barred=True) * 2 + pair(A, CK, 0) * 2
    assert decode(two_heads).reason is Reason.MULTIPLE_HEADS
    no_head = pair("0", CK, 0) + pair(A, CK, 0) * 2
    assert decode(no_head).reason is Reason.NO_HEAD
    late_head = pair("0", CK, 0) + pair("1", CK, 0, barred=True) + pair(A, CK, 0) * 2
    assert decode(late_head).reason is Reason.HEAD_NOT_FIRST
    assert decode(good + (hash_symbol(CK, 0), hash_symbol(CK, 0))).reason is Reason.STRAY_HASH
    marked = pair("0", CK, 0, barred=True) + pair("1", CK, 0, marked=True) + pair(A, CK, 0) * 2
    assert decode(marked).reason is Reason.MARKED_SYMBOL
    assert decode(pair("0", CK, 0, barred=True)).reason is Reason.NO_COUNTER


def test_empty_dataword_is_a_bare_counter():
    assert decode(encode_config("", 2, 4)) == DecodedView("", 2, 4, 0, CK)


def test_symbol_rendering_round_trip():
    s = DecoratedSymbol("1", DOTTED, True, False, CK, 2)
    assert render_symbol(s) == "1:~@CK#2"
    assert parse_symbol("1:~@CK#2") == s
    assert render_symbol(hash_symbol(Stage.CU2, 0)) == "h.@CU2#0"
    with pytest.raises(ValueError):
        parse_symbol("1:~@NOPE#0")


def test_symbol_problems():
    assert symbol_problems(DecoratedSymbol(A, PLAIN, True, False, CK, 0))
    assert symbol_problems(DecoratedSymbol("#", DOTTED, False, False, CK, 0))
    assert symbol_problems(pair("1", CK, 0)[0]) == []


@given(
    st.text("01", min_size=1, max_size=12),
    st.integers(0, 4),
    st.integers(0, 3),
    st.data(),
)
def test_encode_decode_inverse(word, k, extra, data):
    counter = counter_for_length(len(word)) << extra
    cut = data.draw(st.integers(0, len(word) - 1))
    view = decode(encode_config(word, k, counter, cut=cut))
    assert view == DecodedView(word, k, counter, cut, CK)
    if cut == 0 and len(word) > 1:
        # the counter directly follows the head pair
        assert items(encode_config(word, k, counter, cut=0))[1] == (A, False)

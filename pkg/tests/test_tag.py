from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tagforge.tag import (
    BadDeletionNumber,
    HaltReason,
    ParseError,
    TagConfig,
    TagSystem,
    UnknownSymbol,
    format_2tag,
    parse_2tag,
    parse_word,
    round_length,
    run,
    step,
    validate,
)


def W(text):
    return tuple(text.split())


def test_validate_accepts_closed_system():
    ts = TagSystem.from_rules({"a": W("b b"), "b": W("a")}, alphabet="ab")
    assert validate(ts) == []


def test_validate_reports_unknown_rhs_symbol():
    ts = TagSystem(rules={"a": W("c")}, alphabet=frozenset("ab"))
    assert validate(ts) == [UnknownSymbol("c", "a")]


def test_validate_reports_deletion_number():
    ts = TagSystem(rules={"a": ()}, alphabet=frozenset("a"), deletion=3)
    assert validate(ts) == [BadDeletionNumber(3)]


def test_step_appends_rhs():
    ts = TagSystem.from_rules({"a": W("b b")})
    assert step(ts, TagConfig(W("a a b"))) == TagConfig(W("b b b"), 1)


def test_step_empty_append_then_too_short():
    ts = TagSystem.from_rules({"a": ()}, alphabet="ab")
    nxt = step(ts, TagConfig(W("a b")))
    assert nxt == TagConfig((), 1)
    assert step(ts, nxt) is HaltReason.WORD_TOO_SHORT


def test_step_without_rule():
    ts = TagSystem.from_rules({"a": ()}, alphabet="ab")
    assert step(ts, TagConfig(W("b a"))) is HaltReason.NO_RULE


def test_fixed_point_is_a_cycle_at_step_one():
    ts = TagSystem.from_rules({"a": W("a a")})
    res = run(ts, W("a a"), max_steps=10)
    assert res.halt is HaltReason.CYCLE
    assert res.steps == 1
    assert (res.cycle_entry, res.cycle_period) == (0, 1)


def test_all_empty_rules_run_down():
    ts = TagSystem.from_rules({"a": ()})
    res = run(ts, W("a a a a"))
    assert (res.halt, res.steps, res.word) == (HaltReason.WORD_TOO_SHORT, 2, ())


def test_step_limit():
    ts = TagSystem.from_rules({"a": W("a b"), "b": W("a b b")})
    res = run(ts, W("a b"), max_steps=5, detect_cycles=False)
    assert res.halt is HaltReason.STEP_LIMIT and res.steps == 5


def test_halt_takes_precedence_over_step_limit():
    ts = TagSystem.from_rules({"a": ()})
    assert run(ts, W("a a"), max_steps=1).halt is HaltReason.WORD_TOO_SHORT


@pytest.mark.parametrize("n,expected", [(0, 0), (5, 3), (8, 4), (1, 1)])
def test_round_length(n, expected):
    assert round_length("x" * n) == expected


def test_trace_records_read_and_appended_length():
    ts = TagSystem.from_rules({"a": W("b b b"), "b": ()})
    res = run(ts, W("a b"), trace=True)
    assert [(t.step, t.read, t.appended, t.word) for t in res.trace][:2] == [(1, "a", 3, None), (2, "b", 0, None)]
    verbose = run(ts, W("a b"), trace=True, verbose=True)
    assert verbose.trace[0].word == W("b b b")


def test_cycle_trace_is_trimmed_to_first_recurrence():
    ts = TagSystem.from_rules({"a": W("b a"), "b": W("a b")})
    res = run(ts, W("a b"), trace=True)
    assert res.halt is HaltReason.CYCLE
    assert len(res.trace) == res.steps


# --- properties -------------------------------------------------------------------

symbols = st.sampled_from("abc")
rule_maps = st.dictionaries(symbols, st.lists(symbols, max_size=4).map(tuple), min_size=1)
words = st.lists(symbols, max_size=12).map(tuple)


@given(rule_maps, words)
def test_step_is_deterministic_and_obeys_length_law(rules, word):
    ts = TagSystem.from_rules(rules, alphabet="abc")
    a, b = step(ts, TagConfig(word)), step(ts, TagConfig(word))
    assert a == b
    if isinstance(a, TagConfig):
        assert len(a.word) == len(word) - 2 + len(rules[word[0]])


@given(words)
def test_all_empty_system_halts_after_half_length(word):
    ts = TagSystem.from_rules({s: () for s in "abc"})
    res = run(ts, word)
    assert res.halt is HaltReason.WORD_TOO_SHORT
    assert res.steps == len(word) // 2


@settings(max_examples=200)
@given(rule_maps, words, st.integers(min_value=1, max_value=6))
def test_cycle_report_replays_and_matches_any_memory_cap(rules, word, cap):
    ts = TagSystem.from_rules(rules, alphabet="abc")
    full = run(ts, word, max_steps=400)
    small = run(ts, word, max_steps=400, cycle_memory=cap)
    if full.halt is HaltReason.CYCLE:
        assert (small.halt, small.steps, small.cycle_entry, small.cycle_period) == (
            full.halt, full.steps, full.cycle_entry, full.cycle_period)
        entry = run(ts, word, max_steps=full.cycle_entry, detect_cycles=False).word
        again = run(ts, entry, max_steps=full.cycle_period, detect_cycles=False).word
        assert again == entry == full.word
    elif full.halt is not HaltReason.STEP_LIMIT:
        assert small.halt == full.halt and small.steps == full.steps


# --- text format ---------------------------------------------------------------------


def test_parse_and_format_round_trip():
    text = "# header\na -> b b   # trailing comment\nb ->\nx#1 -> a\n"
    ts = parse_2tag(text)
    assert ts.rules == {"a": W("b b"), "b": (), "x#1": W("a")}
    assert ts.alphabet == frozenset({"a", "b", "x#1"})
    assert parse_2tag(format_2tag(ts)).rules == ts.rules


@pytest.mark.parametrize("text,line", [("a -> b\na -> c\n", 2), ("a b\n", 1), ("a b -> c\n", 1), ("\n\na -> b -> c\n", 3)])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as exc:
        parse_2tag(text)
    assert exc.value.line == line


def test_parse_word():
    assert parse_word("  a  b\tc ") == W("a b c")

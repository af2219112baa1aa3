import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tokevolve import (
    SpecialTokens, Tokenizer, TrainConfig, build_diff_report, merge_tokenizers, train, validate, vocab_diff,
)
from tokevolve.core import MergeRule, same_structure
from tokevolve.evolve import (
    TokenizerMismatchError, UnreachableRuleError, has_boundary_variant, outcome_from_tokenizers,
)


def test_vocab_diff_identity(t_old):
    assert vocab_diff(t_old, t_old) == set()


def test_vocab_diff_coron(coron_pair):
    old, new = coron_pair
    assert {"Cor", "on"} <= set(old.vocab)
    assert vocab_diff(old, new) == {"Coron", "Corona", "na", "Ġcorona"}


def test_vocab_diff_picks_up_corona(t_old, t_new):
    diff = vocab_diff(t_old, t_new)
    assert any("corona" in tok.lower() for tok in diff)


def test_merge_invariants(t_old, t_new, outcome):
    merged = outcome.merged
    assert merged.size == t_old.size + len(vocab_diff(t_old, t_new))
    assert all(merged.vocab[t] == i for t, i in t_old.vocab.items())
    assert [i for _, i in outcome.added_tokens] == list(range(t_old.size, merged.size))
    assert [r.rank for r in outcome.appended_rules] == list(range(len(t_old.merges), len(merged.merges)))
    assert len(outcome.appended_rules) + len(outcome.skipped_rules) == len(t_new.merges)
    assert validate(merged) == []


def test_appended_rules_keep_new_order(t_new, outcome):
    new_rank = {(r.left, r.right): r.rank for r in t_new.merges}
    ranks = [new_rank[(r.left, r.right)] for r in outcome.appended_rules]
    assert ranks == sorted(ranks)


def test_identity_merge(t_old):
    out = merge_tokenizers(t_old, t_old)
    assert out.added_tokens == [] and out.appended_rules == []
    assert same_structure(out.merged, t_old)


def test_idempotence(t_new, outcome):
    assert merge_tokenizers(outcome.merged, t_new).added_tokens == []


def test_coron_fixture(coron_pair):
    old, new = coron_pair
    out = merge_tokenizers(old, new)
    skipped = {(r.left, r.right) for r in out.skipped_rules}
    assert ("C", "o") in skipped and ("Co", "r") in skipped
    assert [r.result for r in out.appended_rules] == ["Coron", "Corona", "na", "Ġcorona"]
    merged = out.merged
    assert merged.encode("Coron") == [merged.vocab["Coron"]]
    assert [old.id_to_token[i] for i in old.encode("Coron")] == ["Cor", "on"]


def test_mismatched_specials_rejected(t_old):
    other = Tokenizer.from_merges([], SpecialTokens(mask=("<MASK>", 4)))
    with pytest.raises(TokenizerMismatchError):
        merge_tokenizers(t_old, other)


def test_unreachable_rule_is_an_error():
    old = Tokenizer.from_merges([("a", "b")])
    vocab = dict(Tokenizer.from_merges([("x", "y")]).vocab)
    vocab["xyz"] = len(vocab)
    # malformed new tokenizer: 'xy' is a token but the rule producing it is missing
    new = Tokenizer(vocab, [MergeRule("xy", "z", "xyz", 0)])
    with pytest.raises(UnreachableRuleError, match="'xy'"):
        merge_tokenizers(old, new)


def test_duplicate_result_first_wins():
    old = Tokenizer.from_merges([])
    new = Tokenizer.from_merges([("a", "b"), ("b", "c"), ("ab", "c")])
    new_rules = list(new.merges) + [MergeRule("a", "bc", "abc", 3)]
    new = Tokenizer(new.vocab, new_rules)
    out = merge_tokenizers(old, new)
    assert [r.result for r in out.appended_rules] == ["ab", "bc", "abc"]
    assert out.skipped_rules[-1].left == "a"
    assert validate(out.merged) == []


def test_size_arithmetic_with_paper_constants():
    old_size, added = 40000, 2774
    assert old_size + added == 42774


def test_size_arithmetic_scaled():
    old = train(["aaab"] * 3, TrainConfig(261))
    pairs = [(chr(97 + k), chr(97 + k + 1)) for k in range(20)]
    new = Tokenizer.from_merges(pairs)
    out = merge_tokenizers(old, new)
    assert out.merged.size == 261 + 20


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet=st.sampled_from("abcdefghijklmnopqrstuvwxyz CVIDo-19.\n"), max_size=80))
def test_compression_monotone(t_old, outcome, text):
    assert len(outcome.merged.encode(text)) <= len(t_old.encode(text))
    assert outcome.merged.decode(outcome.merged.encode(text)) == text


def test_conservativity_on_old_corpus(t_old, outcome, corpus_a):
    appended = {(r.left, r.right) for r in outcome.appended_rules}
    checked = 0
    for doc in corpus_a:
        for word in doc.split():
            seg = t_old.segment_word("Ġ" + word)
            if not any(p in appended for p in zip(seg, seg[1:])):
                assert outcome.merged.encode(" " + word) == t_old.encode(" " + word)
                checked += 1
    assert checked > 50


def test_outcome_recovered_from_saved_pair(t_old, outcome):
    rec = outcome_from_tokenizers(t_old, outcome.merged)
    assert rec.added_tokens == outcome.added_tokens
    assert rec.appended_rules == outcome.appended_rules
    with pytest.raises(TokenizerMismatchError):
        outcome_from_tokenizers(outcome.merged, t_old)


def test_diff_report_boundary_variants():
    old = Tokenizer.from_merges([("c", "o"), ("r", "o"), ("n", "a"), ("co", "ro")])
    new = Tokenizer.from_merges(
        [("c", "o"), ("r", "o"), ("n", "a"), ("co", "ro"), ("Ġ", "coro"), ("coro", "na"), ("Ġcoro", "na")]
    )
    out = merge_tokenizers(old, new)
    report = build_diff_report(out, ["corona en corona", " corona"])
    assert report.get("corona").has_boundary_variant
    assert report.get("Ġcorona").has_boundary_variant
    assert report.get("Ġcoro").has_boundary_variant
    assert report.get("corona").frequency == 1
    assert report.get("Ġcorona").frequency == 2


def test_diff_report_capitalization():
    pairs = [("C", "o"), ("Co", "v"), ("Cov", "i"), ("Covi", "d"),
             ("Ġ", "C"), ("O", "V"), ("ĠC", "OV"), ("I", "D"), ("ĠCOV", "ID"),
             ("Ġ", "c"), ("o", "v"), ("Ġc", "ov"), ("i", "d"), ("Ġcov", "id")]
    old = Tokenizer.from_merges([])
    out = merge_tokenizers(old, Tokenizer.from_merges(pairs))
    report = build_diff_report(out, [])
    assert report.get("ĠCOVID").capitalization_duplicate
    assert report.get("Ġcovid").capitalization_duplicate
    assert not report.get("Covid").capitalization_duplicate
    assert all(e.frequency == 0 for e in report)


def test_diff_report_serialization(outcome, corpus_b):
    report = build_diff_report(outcome, corpus_b, {"Ġcorona": "COVID-19"})
    lines = report.to_tsv().splitlines()
    assert lines[0] == "token\tfrequency\tflags\tcategory"
    assert len(lines) == len(outcome.added_tokens) + 1
    rows = json.loads(report.to_json())
    assert [r["token"] for r in rows] == [t for t, _ in outcome.added_tokens]
    assert next(r for r in rows if r["token"] == "Ġcorona")["category"] == "COVID-19"
    assert sum(r["frequency"] for r in rows) > 0


def test_has_boundary_variant_helper():
    vocab = {"abc": 0, "Ġabc": 1, "Ġ": 2}
    assert has_boundary_variant("abc", vocab)
    assert has_boundary_variant("Ġabc", vocab)
    assert not has_boundary_variant("Ġ", vocab)

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from greenrisk.corpus import Chunk
from greenrisk.exceptions import GreenRiskError
from greenrisk.lexicon import (
    ATTRIBUTES,
    AttributeVector,
    HedgingDetector,
    Lexicon,
    default_fallbacks,
    default_lexicon,
    detect_hedging,
    load_external_scores,
    load_lexicon,
    save_lexicon,
    score_attributes,
)

# generated source phrase list, verbatim (duplicates included)
SOURCE_PHRASES = [
    "Alleged", "Purported", "Supposed", "Ostensibly", "Arguably", "Presumably", "Putatively",
    "Seemingly", "Reportedly", "Apparent", "So-called", "Allegedly", "Potentially", "Possibly",
    "Putative", "Suggested", "Circumstantially", "Put forth", "By all accounts", "Inferred",
    "Conceivably", "Inconclusively", "Tentatively", "Speculatively", "Hypothetically",
    "In all likelihood", "Plausibly", "Implied", "Indirectly", "Presumptively", "Theoretically",
    "Presumed", "Conditionally", "Preliminarily", "Provisionally", "Notoriously", "Put forward",
    "Understood", "It is said", "Subject to interpretation", "Perceived", "In a sense",
    "To a degree", "Assumed", "Putatively", "Vaguely", "Broadly", "Loosely", "Dubiously",
    "Evidently", "Inferred", "Outwardly", "Reputedly", "Tacitly", "Unofficially", "Putatively",
    "Ostensible", "Presumptuous", "Unconfirmed",
]


def naive_find(text, phrases):
    """Independent matcher: pad tokens with spaces and look for padded phrases."""
    import re

    def toks(s):
        return re.findall(r"\w+|[^\w\s]", s.lower())

    hay = " " + " ".join(toks(text)) + " "
    return {p for p in phrases if " " + " ".join(toks(p)) + " " in hay}


class TestLoadLexicon:
    def test_dedup_and_casefold(self, write):
        lex = load_lexicon(write("l.txt", "Alleged\nPresumably\nAlleged\n"))
        assert lex.phrases == ("alleged", "presumably")

    def test_empty_file(self, write):
        with pytest.raises(GreenRiskError, match="empty lexicon"):
            load_lexicon(write("l.txt", ""))

    def test_only_comments_is_empty(self, write):
        with pytest.raises(GreenRiskError, match="empty lexicon"):
            load_lexicon(write("l.txt", "# nothing\n\n"))

    def test_seed_examples(self, write):
        lex = load_lexicon(write("l.txt", "not aware\nunsure\n"))
        assert lex.phrases == ("not aware", "unsure")

    def test_missing_file(self, tmp_path):
        with pytest.raises(GreenRiskError, match="not found"):
            load_lexicon(tmp_path / "nope.txt")

    def test_shipped_list_is_source_plus_seeds(self, deflection):
        expected = list(dict.fromkeys(["not aware", "unsure"] + [p.lower() for p in SOURCE_PHRASES]))
        assert list(deflection.phrases) == expected
        assert len(deflection) == 58

    def test_round_trip_fixed_point(self, deflection, tmp_path):
        path = tmp_path / "rt.txt"
        save_lexicon(deflection, path)
        again = load_lexicon(path, name=deflection.name)
        assert again == deflection
        save_lexicon(again, tmp_path / "rt2.txt")
        assert (tmp_path / "rt2.txt").read_bytes() == path.read_bytes()

    @pytest.mark.parametrize("bad", [(), (" lead",), ("Upper",), ("a", "a"), ("one two three four five six seven",)])
    def test_invariants(self, bad):
        with pytest.raises(GreenRiskError):
            Lexicon(bad)


class TestDetectHedging:
    def test_not_aware_sentence(self, deflection):
        text = "The Group is not aware of any noise pollution that could negatively impact the environment."
        assert detect_hedging(text, deflection) == (1, ["not aware"])

    def test_empty(self, deflection):
        assert detect_hedging("", deflection) == (0, [])

    def test_case_folding(self, deflection):
        assert detect_hedging("This ALLEGEDLY reduced emissions.", deflection) == (1, ["allegedly"])

    def test_clean(self, deflection):
        text = "We installed solar panels in 2021."
        assert naive_find(text, deflection.phrases) == set()
        assert detect_hedging(text, deflection) == (0, [])

    def test_whole_tokens_only(self, deflection):
        # "apparently" contains "apparent", "assumedly" contains "assumed"
        assert detect_hedging("It apparently and assumedly worked.", deflection) == (0, [])

    def test_punctuation_is_boundary(self, deflection):
        assert detect_hedging("A so-called 'green' bond.", deflection)[1] == ["so-called"]
        assert detect_hedging("Claims were (alleged).", deflection)[1] == ["alleged"]

    def test_multiword_and_order(self, deflection):
        flag, matches = detect_hedging("Possibly, by all accounts, it is said to be possibly fine.", deflection)
        assert flag == 1
        assert matches == ["possibly", "by all accounts", "it is said"]

    def test_contiguous(self, deflection):
        assert detect_hedging("Put the report forth.", deflection) == (0, [])


sentences = st.lists(
    st.sampled_from(
        ["We are not aware of spills.", "Output was alleged to rise.", "The plant runs daily.", "Sales grew.",
         "It is said to be so-called green.", "WATER use fell!", "Tentatively, maybe."]
    ),
    max_size=6,
).map(" ".join)


@given(sentences)
def test_matches_independent_oracle(text):
    lex = default_lexicon()
    flag, matches = detect_hedging(text, lex)
    assert set(matches) == naive_find(text, lex.phrases)
    assert len(matches) == len(set(matches))
    assert flag == int(bool(matches))


@given(sentences)
def test_case_insensitive_and_idempotent(text):
    lex = default_lexicon()
    assert detect_hedging(text.upper(), lex) == detect_hedging(text, lex)
    assert detect_hedging(text, lex) == detect_hedging(text, lex)


@given(sentences, st.sampled_from(["The plant runs daily.", "Sales grew.", "Costs fell in May."]))
def test_clean_sentence_never_changes_flag(text, clean):
    lex = default_lexicon()
    assert detect_hedging(f"{text} {clean}".strip(), lex)[0] == detect_hedging(text, lex)[0]


class TestExternalScores:
    def test_parse(self, write):
        path = write("s.jsonl", '{"id":"c1","sentiment":1}\n{"id":"c2","commitment":0,"specificity":1}\n')
        assert load_external_scores(path) == {"c1": {"sentiment": 1}, "c2": {"commitment": 0, "specificity": 1}}

    def test_empty(self, write):
        assert load_external_scores(write("s.jsonl", "")) == {}

    def test_duplicate(self, write):
        with pytest.raises(GreenRiskError, match="duplicate chunk id c1"):
            load_external_scores(write("s.jsonl", '{"id":"c1"}\n{"id":"c1","sentiment":0}\n'))

    @pytest.mark.parametrize("value", [2, 0.5, "1", None])
    def test_value_outside_binary(self, write, value):
        with pytest.raises(GreenRiskError, match=":1:"):
            load_external_scores(write("s.jsonl", json.dumps({"id": "c", "sentiment": value}) + "\n"))

    def test_malformed_line_number(self, write):
        with pytest.raises(GreenRiskError, match=":2:"):
            load_external_scores(write("s.jsonl", '{"id":"a"}\n{oops\n'))


def _chunk(text, cid="c1"):
    return Chunk(id=cid, document_id="d", index=0, text=text)


class TestScoreAttributes:
    def test_composed(self, deflection):
        fallbacks = {
            "commitment": Lexicon.from_phrases(["by 2030"]),
            "specificity": Lexicon.from_phrases(["30%"]),
        }
        vec, src = score_attributes(
            _chunk("We will cut Scope 1 emissions 30% by 2030"), {"c1": {"sentiment": 1}}, deflection, fallbacks
        )
        assert vec.as_tuple() == (1, 1, 1, 0)
        assert src.provenance == {
            "sentiment": "external-file",
            "commitment": "fallback-lexicon",
            "specificity": "fallback-lexicon",
            "hedging": "hedging-lexicon",
        }
        assert src.kind == "mixed"

    def test_pass_through(self, deflection):
        vec, src = score_attributes(
            _chunk("Plain text."), {"c1": {"sentiment": 0, "commitment": 0, "specificity": 0}}, deflection
        )
        assert vec.as_tuple() == (0, 0, 0, 0)
        assert src.kind == "external-file"

    def test_unresolvable(self, deflection):
        with pytest.raises(GreenRiskError, match="unresolvable attribute sentiment for chunk c1"):
            score_attributes(_chunk("x"), {"c1": {"commitment": 1, "specificity": 1}}, deflection, {})

    def test_external_wins_over_fallback(self, deflection):
        fallbacks = default_fallbacks()
        vec, _ = score_attributes(_chunk("We are proud."), {"c1": {"sentiment": 0}}, deflection, fallbacks)
        assert vec.sentiment == 0
        vec, src = score_attributes(_chunk("We are proud."), {}, deflection, fallbacks)
        assert vec.sentiment == 1 and src.kind == "fallback-lexicon"

    @given(st.text(max_size=200), st.dictionaries(st.sampled_from(["sentiment", "commitment", "specificity"]),
                                                  st.sampled_from([0, 1])))
    def test_outputs_binary_with_full_provenance(self, text, partial):
        if not text:
            text = "x"
        vec, src = score_attributes(_chunk(text), {"c1": partial}, default_lexicon(), default_fallbacks())
        assert set(vec.as_tuple()) <= {0, 1}
        assert sorted(src.provenance) == sorted(ATTRIBUTES)


def test_attribute_vector_rejects_non_binary():
    with pytest.raises(GreenRiskError):
        AttributeVector(2, 0, 0, 0)
    with pytest.raises(GreenRiskError):
        AttributeVector(0.5, 0, 0, 0)


def test_hedging_detector_estimator(deflection):
    det = HedgingDetector().fit(["ignored"])
    out = det.transform(["Allegedly fine.", "Fine.", ""])
    assert out.tolist() == [[1], [0], [0]]
    assert det.get_params() == {"lexicon": None}
    assert det.matches(["It is said."]) == [["it is said"]]
    custom = HedgingDetector(lexicon=Lexicon.from_phrases(["fine"]))
    assert np.array_equal(custom.fit_transform(["Fine.", "No."]), [[1], [0]])

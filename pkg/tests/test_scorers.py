import itertools

import numpy as np
import pytest

from tsdistill import (
    Location,
    NLILabel,
    Noise,
    RemoteScorer,
    RuleBasedScorer,
    TransportError,
    Trend,
    ValidationError,
    extract_category,
    nli_compare,
)

TREND = "The time series shows an overall {} trend."
NOISE = "The noise intensity is {}."
EXTREMA = (
    "The maximum occurs around the {} of the time series, "
    "and the minimum occurs around the {} of the time series."
)

PAPER_EXTREMA_SENTENCE = (
    "The global maximum is approximately located in the middle of the time series, "
    "while the global minimum is towards the beginning."
)


# -- extraction ------------------------------------------------------------------


def test_extract_trend_simple():
    assert extract_category("The trend is increasing.", "trend") is Trend.INCREASING
    assert extract_category("Overall DECREASING behaviour.", "trend") is Trend.DECREASING
    assert extract_category("It looks flat to me.", "trend") is Trend.FLAT
    assert extract_category("There is no clear trend here.", "trend") is Trend.FLAT


def test_extract_trend_conflict_returns_none():
    assert extract_category("increasing then decreasing", "trend") is None


def test_extract_trend_absent_returns_none():
    assert extract_category("it fluctuates a lot", "trend") is None


def test_extract_noise():
    assert extract_category("The noise intensity is medium.", "noise") is Noise.MEDIUM
    assert extract_category("Noise is LOW here.", "noise") is Noise.LOW
    assert extract_category("low at first, high later", "noise") is None


def test_extract_paper_extrema_sentence():
    claim = extract_category(PAPER_EXTREMA_SENTENCE, "extrema")
    assert claim is not None
    assert claim.max_loc is Location.MIDDLE
    assert claim.min_loc is Location.BEGINNING


def test_extract_extrema_requires_anchors():
    assert extract_category("Values rise towards the end.", "extrema") is None
    assert extract_category("The maximum is quite large.", "extrema") is None


def test_extract_extrema_conflicting_slot_returns_none_for_slot():
    claim = extract_category(
        "Near the beginning or the end sits the maximum, "
        "while the minimum occupies the middle of the window.",
        "extrema",
    )
    assert claim is not None
    assert claim.max_loc is None
    assert claim.min_loc is Location.MIDDLE


def test_extract_extrema_does_not_treat_trend_as_end():
    # "end" inside the word "trend" must not register as a location
    assert extract_category("The maximum and minimum both shape the trend.", "extrema") is None


def test_extract_unknown_field():
    with pytest.raises(ValidationError):
        extract_category("anything", "sentiment")


def test_extract_templates_round_trip_all_combinations():
    for a, b in itertools.product(Location, Location):
        claim = extract_category(EXTREMA.format(a.value, b.value), "extrema")
        assert (claim.max_loc, claim.min_loc) == (a, b)


# -- rule-based verdicts ------------------------------------------------------------


@pytest.fixture
def scorer():
    return RuleBasedScorer()


def test_identical_sentences_entail(scorer):
    sentence = TREND.format("increasing")
    verdict = nli_compare(sentence, sentence, scorer)
    assert verdict.label is NLILabel.ENTAILMENT
    assert verdict.score == 1.0


def test_opposite_trends_contradict(scorer):
    verdict = nli_compare(TREND.format("increasing"), TREND.format("decreasing"), scorer)
    assert verdict.label is NLILabel.CONTRADICTION
    assert verdict.score == 0.0


def test_adjacent_noise_is_neutral(scorer):
    verdict = nli_compare(NOISE.format("low"), NOISE.format("medium"), scorer)
    assert verdict.label is NLILabel.NEUTRAL
    assert verdict.score == 0.5


def test_opposite_noise_contradicts(scorer):
    assert nli_compare(NOISE.format("low"), NOISE.format("high"), scorer).label is NLILabel.CONTRADICTION


def test_trend_flat_is_adjacent_to_both(scorer):
    assert nli_compare(TREND.format("flat"), TREND.format("increasing"), scorer).label is NLILabel.NEUTRAL
    assert nli_compare(TREND.format("flat"), TREND.format("decreasing"), scorer).label is NLILabel.NEUTRAL


def test_unextractable_hypothesis_is_neutral(scorer):
    verdict = scorer.nli(TREND.format("increasing"), "it fluctuates a lot", field="trend")
    assert verdict.label is NLILabel.NEUTRAL


def test_extrema_location_conflict(scorer):
    a = EXTREMA.format("beginning", "end")
    b = EXTREMA.format("end", "end")
    assert scorer.nli(a, b, field="extrema").label is NLILabel.CONTRADICTION


def test_extrema_equal_pairs_entail(scorer):
    a = EXTREMA.format("middle", "beginning")
    assert scorer.nli(a, PAPER_EXTREMA_SENTENCE, field="extrema").label is NLILabel.ENTAILMENT


def test_extrema_partial_claim_is_neutral(scorer):
    a = EXTREMA.format("middle", "beginning")
    b = "The global maximum is approximately located in the middle."
    assert scorer.nli(a, b, field="extrema").label is NLILabel.NEUTRAL


def test_field_inference_matches_explicit_field(scorer):
    pairs = [
        (TREND.format("increasing"), TREND.format("decreasing"), "trend"),
        (NOISE.format("medium"), NOISE.format("high"), "noise"),
        (EXTREMA.format("end", "beginning"), EXTREMA.format("end", "middle"), "extrema"),
    ]
    for premise, hypothesis, field in pairs:
        assert scorer.nli(premise, hypothesis).label is scorer.nli(premise, hypothesis, field=field).label


def test_cross_field_sentences_are_neutral(scorer):
    verdict = scorer.nli(TREND.format("increasing"), NOISE.format("high"))
    assert verdict.label is NLILabel.NEUTRAL


def test_rule_scorer_symmetry_on_template_sentences(scorer):
    sentences = (
        [TREND.format(t.value) for t in Trend]
        + [NOISE.format(n.value) for n in Noise]
        + [EXTREMA.format(a.value, b.value) for a in Location for b in Location]
    )
    for a, b in itertools.product(sentences, repeat=2):
        assert scorer.nli(a, b).label is scorer.nli(b, a).label


def test_every_score_in_the_fixed_table(scorer):
    sentences = [TREND.format(t.value) for t in Trend] + ["nothing to see"]
    for a, b in itertools.product(sentences, repeat=2):
        assert scorer.nli(a, b).score in (0.0, 0.5, 1.0)


def test_nli_compare_rejects_empty_inputs(scorer):
    with pytest.raises(ValidationError):
        nli_compare("", "something", scorer)


# -- remote scorer -------------------------------------------------------------------


def test_remote_scorer_maps_labels(stub_server):
    scorer = RemoteScorer(stub_server.url)
    stub_server.enqueue("/v1/nli", 200, {"label": "contradiction", "probs": [0.9, 0.05, 0.05]})
    verdict = scorer.nli("a", "b")
    assert verdict.label is NLILabel.CONTRADICTION
    assert verdict.score == 0.0
    assert stub_server.requests[0]["body"] == {"premise": "a", "hypothesis": "b"}


def test_remote_scorer_embed_returns_vectors(stub_server):
    scorer = RemoteScorer(stub_server.url)
    stub_server.enqueue("/v1/embed", 200, {"vectors": [[1.0, 0.0], [0.0, 1.0]], "dim": 2})
    vectors = scorer.embed(["x", "y"])
    assert vectors.shape == (2, 2)
    assert float(np.dot(vectors[0], vectors[1])) == 0.0


def test_remote_scorer_http_error_is_transport_error(stub_server):
    scorer = RemoteScorer(stub_server.url)
    stub_server.enqueue("/v1/nli", 503, {"error": "loading"})
    with pytest.raises(TransportError):
        scorer.nli("a", "b")


def test_remote_scorer_down_is_transport_error_not_neutral():
    scorer = RemoteScorer("http://127.0.0.1:9")
    with pytest.raises(TransportError):
        scorer.nli("a", "b")


def test_remote_scorer_bad_payload_is_transport_error(stub_server):
    scorer = RemoteScorer(stub_server.url)
    stub_server.enqueue("/v1/nli", 200, {"label": "maybe", "probs": [1, 0, 0]})
    with pytest.raises(TransportError):
        scorer.nli("a", "b")

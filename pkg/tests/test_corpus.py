import io
import json

import pytest

from fancast.corpus import (
    Corpus,
    corpus_stats,
    load_corpus,
    read_stories,
    read_votes_into,
    save_corpus,
    validate,
)
from fancast.errors import (
    DuplicateVoterError,
    EmptyCorpusError,
    ParseError,
    SubmitterMismatchError,
    UnknownStoryError,
)

from .conftest import corpus_of, make_story


def story_line(**kw):
    base = {"story_id": "s1", "submitter": "u1", "final_votes": 5, "promoted": False}
    base.update(kw)
    return json.dumps(base)


# ---- stories file ----


def test_read_stories_basic():
    stream = io.StringIO(story_line() + "\n" + story_line(story_id="s2", promoted=True) + "\n")
    stories = read_stories(stream)
    assert [s.story_id for s in stories] == ["s1", "s2"]
    assert stories[1].promoted is True
    assert stories[0].voters == []


def test_read_stories_bad_json_line_number():
    stream = io.StringIO(story_line() + "\n{broken\n")
    with pytest.raises(ParseError) as err:
        read_stories(stream, path="stories.jsonl")
    assert err.value.line == 2


def test_read_stories_duplicate_id():
    stream = io.StringIO(story_line() + "\n" + story_line() + "\n")
    with pytest.raises(ParseError) as err:
        read_stories(stream)
    assert "duplicate" in str(err.value)


@pytest.mark.parametrize(
    "line,fragment",
    [
        ('["not", "an", "object"]', "not a JSON object"),
        (story_line(extra=1), "unknown story key"),
        ('{"story_id": "s1"}', "missing story key"),
        (story_line(story_id=""), "story_id"),
        (story_line(final_votes=-1), "final_votes"),
        (story_line(final_votes=True), "final_votes"),
        (story_line(promoted="yes"), "promoted"),
        (story_line(promotion_index="first"), "promotion_index"),
    ],
)
def test_read_stories_field_errors(line, fragment):
    with pytest.raises(ParseError) as err:
        read_stories(io.StringIO(line + "\n"))
    assert fragment in str(err.value)


# ---- votes file ----


def votes_csv(rows, header="story_id,position,user_id"):
    return io.StringIO(header + "\n" + "\n".join(rows) + "\n")


def test_read_votes_attaches_in_order():
    stories = read_stories(io.StringIO(story_line(final_votes=3)))
    read_votes_into(stories, votes_csv(["s1,0,u1", "s1,1,u2", "s1,2,u3"]))
    assert stories[0].voters == ["u1", "u2", "u3"]
    assert stories[0].vote_times is None


def test_read_votes_with_times():
    stories = read_stories(io.StringIO(story_line()))
    read_votes_into(
        stories,
        votes_csv(["s1,0,u1,0", "s1,1,u2,600"], header="story_id,position,user_id,time"),
    )
    assert stories[0].vote_times == [0, 600]


def test_read_votes_bad_header():
    stories = read_stories(io.StringIO(story_line()))
    with pytest.raises(ParseError) as err:
        read_votes_into(stories, votes_csv([], header="a,b,c"))
    assert err.value.line == 1


def test_read_votes_position_gap():
    stories = read_stories(io.StringIO(story_line()))
    with pytest.raises(ParseError) as err:
        read_votes_into(stories, votes_csv(["s1,0,u1", "s1,2,u3"]))
    assert err.value.line == 3
    assert "expected position 1" in str(err.value)


def test_read_votes_unknown_story():
    stories = read_stories(io.StringIO(story_line()))
    with pytest.raises(UnknownStoryError):
        read_votes_into(stories, votes_csv(["zzz,0,u1"]))


def test_read_votes_duplicate_voter():
    stories = read_stories(io.StringIO(story_line()))
    with pytest.raises(DuplicateVoterError):
        read_votes_into(stories, votes_csv(["s1,0,u1", "s1,1,u1"]))


def test_read_votes_submitter_mismatch():
    stories = read_stories(io.StringIO(story_line()))
    with pytest.raises(SubmitterMismatchError):
        read_votes_into(stories, votes_csv(["s1,0,u9"]))


# ---- validation rules ----


def test_validate_clean_story():
    story = make_story(["u1", "u2", "u3"])
    assert validate(corpus_of(story)) == []


def test_validate_no_votes():
    story = make_story(["u1"])
    story.voters = []
    findings = validate(corpus_of(story))
    assert [f.rule for f in findings] == ["no-votes"]


def test_validate_submitter_first():
    story = make_story(["u1", "u2"])
    story.submitter = "u2"
    rules = {f.rule for f in validate(corpus_of(story))}
    assert "submitter-first" in rules


def test_validate_final_votes_low():
    story = make_story(["u1", "u2", "u3"], final_votes=2)
    rules = {f.rule for f in validate(corpus_of(story))}
    assert "final-votes-low" in rules


def test_validate_times_not_sorted():
    story = make_story(["u1", "u2"])
    story.vote_times = [600, 0]
    rules = {f.rule for f in validate(corpus_of(story))}
    assert "times-order" in rules


def test_validate_promotion_index_on_unpromoted():
    story = make_story(["u1", "u2"], promotion_index=2)
    rules = {f.rule for f in validate(corpus_of(story))}
    assert "promotion-index-unpromoted" in rules


def test_validate_promotion_below_threshold_is_warning():
    voters = [f"u{i}" for i in range(10)]
    story = make_story(voters, promoted=True, promotion_index=10)
    findings = validate(corpus_of(story))
    assert len(findings) == 1
    assert findings[0].rule == "promotion-below-threshold"
    assert findings[0].severity == "warning"


def test_validate_promotion_at_threshold_passes():
    voters = [f"u{i}" for i in range(43)]
    story = make_story(voters, promoted=True, promotion_index=43)
    assert validate(corpus_of(story)) == []


# ---- stats ----


def test_corpus_stats_fractions_and_bins():
    stories = [
        make_story(["a"], final_votes=120, story_id="s1"),
        make_story(["a", "b"], final_votes=250, story_id="s2"),
        make_story(["c"], final_votes=1700, story_id="s3"),
        make_story(["d"], final_votes=600, story_id="s4"),
    ]
    stats = corpus_stats(corpus_of(*stories))
    assert stats.n_stories == 4
    assert stats.total_votes == 5
    assert stats.fraction_below(500) == 0.5
    assert stats.fraction_above(1500) == 0.25
    assert stats.vote_histogram[1] == (100, 200, 1)
    assert sum(n for _lo, _hi, n in stats.vote_histogram) == 4
    # submitter a appears twice, voters b/c/d once each
    assert stats.submissions_per_user == {2: 1, 1: 2}
    assert stats.votes_per_user == {2: 1, 1: 3}


def test_corpus_stats_empty():
    with pytest.raises(EmptyCorpusError):
        corpus_stats(corpus_of())


def test_corpus_story_lookup():
    story = make_story(["u1"])
    corpus = corpus_of(story)
    assert corpus.story("s1") is story
    with pytest.raises(UnknownStoryError):
        corpus.story("nope")


# ---- round trip ----


def test_save_load_round_trip(tmp_path):
    s1 = make_story(["u1", "u2", "u3"], story_id="a", promoted=True, promotion_index=3, final_votes=50)
    s1.vote_times = [0, 600, 1200]
    s1.submit_time = 0
    s2 = make_story(["u4"], story_id="b")
    stories_path = tmp_path / "stories.jsonl"
    votes_path = tmp_path / "votes.csv"
    save_corpus(corpus_of(s1, s2), str(stories_path), str(votes_path))
    loaded = load_corpus(str(stories_path), str(votes_path))
    assert len(loaded) == 2
    got = loaded.story("a")
    assert got.voters == ["u1", "u2", "u3"]
    assert got.vote_times == [0, 600, 1200]
    assert got.promotion_index == 3
    assert got.final_votes == 50
    assert loaded.story("b").voters == ["u4"]
    # identical bytes on re-save
    stories2 = tmp_path / "stories2.jsonl"
    votes2 = tmp_path / "votes2.csv"
    save_corpus(Corpus(stories=list(loaded)), str(stories2), str(votes2))
    assert stories_path.read_text() == stories2.read_text()
    assert votes_path.read_text() == votes2.read_text()

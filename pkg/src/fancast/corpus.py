"""Story and vote corpus: records, file I/O, validation, summary stats.

Wire formats:

  stories  -- JSON Lines, one object per story with keys
              story_id, submitter, final_votes, promoted and optional
              promotion_index, submit_time.
  votes    -- CSV with header ``story_id,position,user_id[,time]``.
              Positions within a story run 0..n-1 in file order and
              position 0 is the submitter's own entry.

A corpus is immutable once loaded; every function here treats it as
read-only.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterator

from .errors import (
    DuplicateVoterError,
    EmptyCorpusError,
    ParseError,
    SubmitterMismatchError,
    UnknownStoryError,
)
from .graph import FanGraph

DEFAULT_PROMOTION_THRESHOLD = 43

_STORY_KEYS_REQUIRED = ("story_id", "submitter", "final_votes", "promoted")
_STORY_KEYS_OPTIONAL = ("promotion_index", "submit_time")


@dataclass
class StoryRecord:
    """One story with its ordered vote list.

    `voters` starts with the submitter (position 0).  `final_votes` may
    exceed len(voters) when only a prefix of the votes was captured.
    `vote_times` (seconds, same length as voters) is optional and must
    be nondecreasing.
    """

    story_id: str
    submitter: str
    final_votes: int
    promoted: bool
    promotion_index: int | None = None
    submit_time: int | None = None
    voters: list[str] = field(default_factory=list)
    vote_times: list[int] | None = None

    @property
    def n_votes(self) -> int:
        return len(self.voters)


@dataclass
class Corpus:
    """Loaded stories plus the graph they refer to (if attached)."""

    stories: list[StoryRecord]
    graph: FanGraph | None = None

    def __post_init__(self) -> None:
        self._by_id = {story.story_id: story for story in self.stories}

    def __len__(self) -> int:
        return len(self.stories)

    def __iter__(self) -> Iterator[StoryRecord]:
        return iter(self.stories)

    def story(self, story_id: str) -> StoryRecord:
        try:
            return self._by_id[story_id]
        except KeyError:
            raise UnknownStoryError(f"no story with id {story_id!r}") from None


# ---- loading ----


def _parse_story_line(obj: object, *, path: str | None, lineno: int) -> StoryRecord:
    if not isinstance(obj, dict):
        raise ParseError("story record is not a JSON object", path=path, line=lineno)
    unknown = set(obj) - set(_STORY_KEYS_REQUIRED) - set(_STORY_KEYS_OPTIONAL)
    if unknown:
        raise ParseError(f"unknown story key(s): {sorted(unknown)}", path=path, line=lineno)
    missing = [key for key in _STORY_KEYS_REQUIRED if key not in obj]
    if missing:
        raise ParseError(f"missing story key(s): {missing}", path=path, line=lineno)
    story_id = obj["story_id"]
    submitter = obj["submitter"]
    final_votes = obj["final_votes"]
    promoted = obj["promoted"]
    if not isinstance(story_id, str) or not story_id:
        raise ParseError("story_id must be a non-empty string", path=path, line=lineno)
    if not isinstance(submitter, str) or not submitter:
        raise ParseError("submitter must be a non-empty string", path=path, line=lineno)
    if not isinstance(final_votes, int) or isinstance(final_votes, bool) or final_votes < 0:
        raise ParseError("final_votes must be a non-negative integer", path=path, line=lineno)
    if not isinstance(promoted, bool):
        raise ParseError("promoted must be a boolean", path=path, line=lineno)
    promotion_index = obj.get("promotion_index")
    if promotion_index is not None and (not isinstance(promotion_index, int) or isinstance(promotion_index, bool)):
        raise ParseError("promotion_index must be an integer", path=path, line=lineno)
    submit_time = obj.get("submit_time")
    if submit_time is not None and not isinstance(submit_time, (int, float)):
        raise ParseError("submit_time must be a number", path=path, line=lineno)
    return StoryRecord(
        story_id=story_id,
        submitter=submitter,
        final_votes=final_votes,
        promoted=promoted,
        promotion_index=promotion_index,
        submit_time=submit_time,
    )


def read_stories(stream: io.TextIOBase, *, path: str | None = None) -> list[StoryRecord]:
    stories: list[StoryRecord] = []
    seen: set[str] = set()
    for lineno, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", path=path, line=lineno) from None
        story = _parse_story_line(obj, path=path, lineno=lineno)
        if story.story_id in seen:
            raise ParseError(f"duplicate story_id {story.story_id!r}", path=path, line=lineno)
        seen.add(story.story_id)
        stories.append(story)
    return stories


def _parse_time_field(raw: str, *, path: str | None, lineno: int) -> int | float:
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"bad time value {raw!r}", path=path, line=lineno) from None


def read_votes_into(
    stories: list[StoryRecord], stream: io.TextIOBase, *, path: str | None = None
) -> None:
    """Attach vote rows to the given stories, enforcing row-level invariants."""
    by_id = {story.story_id: story for story in stories}
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None:
        return
    header = [column.strip() for column in header]
    if header not in (["story_id", "position", "user_id"], ["story_id", "position", "user_id", "time"]):
        raise ParseError(f"unexpected votes header {header!r}", path=path, line=1)
    has_time = len(header) == 4
    seen_voters: dict[str, set[str]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", path=path, line=lineno)
        story_id, raw_position, user_id = row[0], row[1], row[2]
        story = by_id.get(story_id)
        if story is None:
            raise UnknownStoryError(f"{path or 'votes'}:{lineno}: vote for undeclared story {story_id!r}")
        try:
            position = int(raw_position)
        except ValueError:
            raise ParseError(f"bad position {raw_position!r}", path=path, line=lineno) from None
        if position != len(story.voters):
            raise ParseError(
                f"story {story_id!r}: expected position {len(story.voters)}, got {position}",
                path=path,
                line=lineno,
            )
        if not user_id:
            raise ParseError("empty user_id", path=path, line=lineno)
        voters = seen_voters.setdefault(story_id, set())
        if user_id in voters:
            raise DuplicateVoterError(
                f"{path or 'votes'}:{lineno}: user {user_id!r} voted twice on story {story_id!r}"
            )
        if position == 0 and user_id != story.submitter:
            raise SubmitterMismatchError(
                f"{path or 'votes'}:{lineno}: story {story_id!r} declares submitter "
                f"{story.submitter!r} but first vote is by {user_id!r}"
            )
        voters.add(user_id)
        story.voters.append(user_id)
        if has_time and row[3].strip() != "":
            when = _parse_time_field(row[3], path=path, lineno=lineno)
            if story.vote_times is None:
                story.vote_times = []
            story.vote_times.append(when)


def load_corpus(stories_path: str, votes_path: str, graph: FanGraph | None = None) -> Corpus:
    """Read stories and votes files into a Corpus (votes kept in file order)."""
    with open(stories_path, "r", encoding="utf-8") as handle:
        stories = read_stories(handle, path=stories_path)
    with open(votes_path, "r", encoding="utf-8", newline="") as handle:
        read_votes_into(stories, handle, path=votes_path)
    return Corpus(stories=stories, graph=graph)


# ---- validation ----


@dataclass(frozen=True)
class Violation:
    """One validation finding.  severity is 'error' or 'warning'."""

    story_id: str
    rule: str
    message: str
    severity: str = "error"


def validate(
    corpus: Corpus, *, promotion_threshold: int = DEFAULT_PROMOTION_THRESHOLD
) -> list[Violation]:
    """Check per-story invariants.

    Promotion below `promotion_threshold` votes is reported as a warning,
    not an error: observed front pages never showed it, but nothing in the
    data model forbids it.
    """
    findings: list[Violation] = []
    for story in corpus:
        sid = story.story_id
        if not story.voters:
            findings.append(Violation(sid, "no-votes", "story has no vote rows, not even the submitter's"))
            continue
        if story.voters[0] != story.submitter:
            findings.append(
                Violation(sid, "submitter-first", f"position 0 voter {story.voters[0]!r} is not the submitter")
            )
        if len(set(story.voters)) != len(story.voters):
            findings.append(Violation(sid, "duplicate-voter", "a user appears more than once in the vote list"))
        if story.final_votes < len(story.voters):
            findings.append(
                Violation(
                    sid,
                    "final-votes-low",
                    f"final_votes={story.final_votes} is less than the {len(story.voters)} recorded votes",
                )
            )
        if story.vote_times is not None:
            if len(story.vote_times) != len(story.voters):
                findings.append(Violation(sid, "times-length", "vote_times length differs from voters length"))
            elif any(b < a for a, b in zip(story.vote_times, story.vote_times[1:])):
                findings.append(Violation(sid, "times-order", "vote_times are not nondecreasing"))
        if story.promotion_index is not None:
            if not story.promoted:
                findings.append(Violation(sid, "promotion-index-unpromoted", "promotion_index set on an unpromoted story"))
            elif not (0 < story.promotion_index <= story.final_votes):
                findings.append(
                    Violation(sid, "promotion-index-range", f"promotion_index={story.promotion_index} out of range")
                )
        if story.promoted:
            at_promotion = story.promotion_index if story.promotion_index is not None else story.final_votes
            if at_promotion < promotion_threshold:
                findings.append(
                    Violation(
                        sid,
                        "promotion-below-threshold",
                        f"promoted with {at_promotion} votes, below the observed floor of {promotion_threshold}",
                        severity="warning",
                    )
                )
    return findings


# ---- summary statistics ----


@dataclass
class CorpusStats:
    n_stories: int
    n_users: int
    total_votes: int
    bin_width: int
    vote_histogram: list[tuple[int, int, int]]  # (lo, hi exclusive, count)
    submissions_per_user: dict[int, int]  # submissions count -> number of users
    votes_per_user: dict[int, int]  # votes cast -> number of users
    final_votes_sorted: list[int]

    def fraction_below(self, threshold: int) -> float:
        """Share of stories with final_votes strictly below `threshold`."""
        count = sum(1 for v in self.final_votes_sorted if v < threshold)
        return count / self.n_stories

    def fraction_above(self, threshold: int) -> float:
        """Share of stories with final_votes strictly above `threshold`."""
        count = sum(1 for v in self.final_votes_sorted if v > threshold)
        return count / self.n_stories


def corpus_stats(corpus: Corpus, *, bin_width: int = 100) -> CorpusStats:
    if len(corpus) == 0:
        raise EmptyCorpusError("cannot summarize an empty corpus")
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    finals = sorted(story.final_votes for story in corpus)
    top_bin = finals[-1] // bin_width
    counts = [0] * (top_bin + 1)
    for value in finals:
        counts[value // bin_width] += 1
    histogram = [(i * bin_width, (i + 1) * bin_width, n) for i, n in enumerate(counts)]

    submissions: dict[str, int] = {}
    votes_cast: dict[str, int] = {}
    for story in corpus:
        submissions[story.submitter] = submissions.get(story.submitter, 0) + 1
        for voter in story.voters:
            votes_cast[voter] = votes_cast.get(voter, 0) + 1
    users = set(submissions) | set(votes_cast)

    def invert(per_user: dict[str, int]) -> dict[int, int]:
        out: dict[int, int] = {}
        for count in per_user.values():
            out[count] = out.get(count, 0) + 1
        return out

    return CorpusStats(
        n_stories=len(corpus),
        n_users=len(users),
        total_votes=sum(len(story.voters) for story in corpus),
        bin_width=bin_width,
        vote_histogram=histogram,
        submissions_per_user=invert(submissions),
        votes_per_user=invert(votes_cast),
        final_votes_sorted=finals,
    )


# ---- writing ----


def save_corpus(corpus: Corpus, stories_path: str, votes_path: str) -> None:
    """Write stories JSONL and votes CSV; load_corpus inverts this exactly."""
    with open(stories_path, "w", encoding="utf-8", newline="\n") as handle:
        for story in corpus:
            record: dict[str, object] = {
                "story_id": story.story_id,
                "submitter": story.submitter,
                "final_votes": story.final_votes,
                "promoted": story.promoted,
            }
            if story.promotion_index is not None:
                record["promotion_index"] = story.promotion_index
            if story.submit_time is not None:
                record["submit_time"] = story.submit_time
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    any_times = any(story.vote_times is not None for story in corpus)
    with open(votes_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["story_id", "position", "user_id", "time"] if any_times else ["story_id", "position", "user_id"])
        for story in corpus:
            for position, voter in enumerate(story.voters):
                if any_times:
                    when = story.vote_times[position] if story.vote_times is not None else ""
                    writer.writerow([story.story_id, position, voter, when])
                else:
                    writer.writerow([story.story_id, position, voter])

"""Cascade metrics over a story's early votes.

Both metrics look at a story's vote prefix of length k and at the watch
graph:

  in_network_votes -- how many prefix votes came from users who watch
                      at least one strictly earlier voter
  influence        -- how many distinct non-voting users watch at least
                      one voter in the prefix (the audience the prefix
                      can reach through watch links)

The submitter's own entry (position 0) seeds both metrics but is never
counted as an in-network vote.  Whether that entry occupies one of the
k prefix slots is a reporting convention; both are supported and every
output is labeled with the one used.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from .corpus import Corpus, StoryRecord
from .graph import FanGraph

DEFAULT_K = 10


@dataclass(frozen=True)
class PrefixConvention:
    """Controls whether voters[0] (the submitter) fills a prefix slot."""

    include_submitter: bool = False

    @property
    def label(self) -> str:
        return "include_submitter" if self.include_submitter else "exclude_submitter"

    @staticmethod
    def from_label(label: str) -> "PrefixConvention":
        if label in ("exclude_submitter", "exclude"):
            return EXCLUDE_SUBMITTER
        if label in ("include_submitter", "include"):
            return INCLUDE_SUBMITTER
        raise ValueError(f"unknown prefix convention {label!r}")


EXCLUDE_SUBMITTER = PrefixConvention(include_submitter=False)
INCLUDE_SUBMITTER = PrefixConvention(include_submitter=True)
DEFAULT_CONVENTION = EXCLUDE_SUBMITTER


class CascadeCount(NamedTuple):
    """A metric value plus how much prefix was actually available."""

    count: int
    k_used: int
    short: bool


def _prefix_end(story: StoryRecord, k: int, convention: PrefixConvention) -> tuple[int, int, bool]:
    """Return (end, k_used, short): prefix is voters[0:end].

    k_used is the number of prefix slots filled (votes after the
    submitter, plus the submitter's slot under include_submitter).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    n = len(story.voters)
    if n == 0:
        raise ValueError(f"story {story.story_id!r} has no voters")
    if convention.include_submitter:
        end = min(k, n)
        k_used = end
    else:
        end = min(k + 1, n)
        k_used = end - 1
    return end, k_used, k_used < k


def in_network_votes(
    story: StoryRecord,
    graph: FanGraph,
    k: int = DEFAULT_K,
    convention: PrefixConvention = DEFAULT_CONVENTION,
) -> CascadeCount:
    """Count prefix votes cast by a fan of some strictly earlier voter.

    Position 0 (the submitter) is never counted, but later voters who
    watch the submitter do count.  Short stories are computed on what
    is available and flagged.
    """
    end, k_used, short = _prefix_end(story, k, convention)
    count = 0
    watched_fans: set[str] = set()  # union of fans(voters[0..i-1])
    for position in range(end):
        voter = story.voters[position]
        if position > 0 and voter in watched_fans:
            count += 1
        watched_fans |= graph.fans(voter)
    return CascadeCount(count=count, k_used=k_used, short=short)


def influence(
    story: StoryRecord,
    graph: FanGraph,
    k: int = DEFAULT_K,
    convention: PrefixConvention = DEFAULT_CONVENTION,
) -> CascadeCount:
    """Count distinct non-voting fans of the prefix voters.

    The submitter always seeds the fan union, under either convention.
    Users who themselves voted in the prefix are excluded from the count.
    """
    end, k_used, short = _prefix_end(story, k, convention)
    prefix_voters = set(story.voters[:end])
    prefix_voters.add(story.voters[0])
    audience: set[str] = set()
    for voter in prefix_voters:
        audience |= graph.fans(voter)
    audience -= prefix_voters
    return CascadeCount(count=len(audience), k_used=k_used, short=short)


# ---- per-story profiles and corpus-level histograms ----


@dataclass(frozen=True)
class CascadeProfile:
    story_id: str
    k: int
    k_used: int
    short: bool
    influence_k: int
    in_network_k: int
    fraction_k: float  # in_network_k / k_used, 0.0 when k_used == 0
    final_votes: int
    convention: str


def cascade_profile(
    story: StoryRecord,
    graph: FanGraph,
    k: int = DEFAULT_K,
    convention: PrefixConvention = DEFAULT_CONVENTION,
) -> CascadeProfile:
    inn = in_network_votes(story, graph, k, convention)
    inf = influence(story, graph, k, convention)
    fraction = inn.count / inn.k_used if inn.k_used > 0 else 0.0
    return CascadeProfile(
        story_id=story.story_id,
        k=k,
        k_used=inn.k_used,
        short=inn.short,
        influence_k=inf.count,
        in_network_k=inn.count,
        fraction_k=fraction,
        final_votes=story.final_votes,
        convention=convention.label,
    )


@dataclass
class CascadeHistograms:
    k: int
    convention: str
    profiles: list[CascadeProfile]
    influence_hist: dict[int, int]  # influence value -> story count
    in_network_hist: dict[int, int]  # in-network count -> story count
    share_half_in_network: float  # stories whose prefix was >= half in-network
    shares_at_least: dict[int, float]  # m -> share of stories with in_network_k >= m

    def share_at_least(self, m: int) -> float:
        if not self.profiles:
            return 0.0
        return sum(1 for p in self.profiles if p.in_network_k >= m) / len(self.profiles)


def cascade_histograms(
    corpus: Corpus,
    graph: FanGraph,
    k: int = DEFAULT_K,
    convention: PrefixConvention = DEFAULT_CONVENTION,
) -> CascadeHistograms:
    """Per-story profiles plus binned counts and headline shares at k."""
    profiles = [cascade_profile(story, graph, k, convention) for story in corpus]
    influence_hist: dict[int, int] = {}
    in_network_hist: dict[int, int] = {}
    for profile in profiles:
        influence_hist[profile.influence_k] = influence_hist.get(profile.influence_k, 0) + 1
        in_network_hist[profile.in_network_k] = in_network_hist.get(profile.in_network_k, 0) + 1
    n = len(profiles)
    share_half = sum(1 for p in profiles if p.fraction_k >= 0.5) / n if n else 0.0
    shares = {}
    for m in range(0, k + 1):
        shares[m] = sum(1 for p in profiles if p.in_network_k >= m) / n if n else 0.0
    return CascadeHistograms(
        k=k,
        convention=convention.label,
        profiles=profiles,
        influence_hist=influence_hist,
        in_network_hist=in_network_hist,
        share_half_in_network=share_half,
        shares_at_least=shares,
    )


# ---- rank correlation with a permutation test ----


class SpearmanResult(NamedTuple):
    rho: float
    p_value: float
    n: int
    permutations: int


def spearman_permutation(
    x: Sequence[float],
    y: Sequence[float],
    *,
    permutations: int = 1000,
    seed: int = 0,
) -> SpearmanResult:
    """Spearman rho with a two-sided permutation p-value.

    The p-value counts permutations of y whose |rho| reaches the observed
    |rho|, with the +1 correction so it is never exactly zero.
    """
    if len(x) != len(y):
        raise ValueError("x and y must have the same length")
    n = len(x)
    if n < 3:
        raise ValueError("need at least 3 pairs for a rank correlation")
    with warnings.catch_warnings():
        # constant input surfaces as our ValueError below, not a warning
        warnings.simplefilter("ignore", stats.ConstantInputWarning)
        rho = float(stats.spearmanr(x, y).statistic)
    if math.isnan(rho):
        raise ValueError("rank correlation undefined: a variable is constant")
    # Ranks are permutation-invariant, so rank once and correlate ranks.
    rank_x = stats.rankdata(x)
    rank_y = stats.rankdata(y)
    rank_x = (rank_x - rank_x.mean()) / rank_x.std()
    rank_y = (rank_y - rank_y.mean()) / rank_y.std()
    rng = np.random.default_rng(seed)
    hits = 0
    observed = abs(rho) - 1e-12  # tolerate float jitter when comparing
    for _ in range(permutations):
        permuted = rng.permutation(rank_y)
        r = float(np.dot(rank_x, permuted) / n)
        if abs(r) >= observed:
            hits += 1
    p = (hits + 1) / (permutations + 1)
    return SpearmanResult(rho=rho, p_value=p, n=n, permutations=permutations)


# ---- interestingness profile ----


@dataclass(frozen=True)
class ProfileRow:
    """Stories grouped by their in-network count at k.

    Spread bounds drop the single highest and single lowest final vote
    counts in the group; with fewer than 3 stories there is nothing left,
    so the bounds are None.
    """

    in_network_k: int
    n_stories: int
    median_final_votes: float
    spread_low: int | None
    spread_high: int | None


@dataclass
class InterestingnessProfile:
    k: int
    convention: str
    rows: list[ProfileRow]
    spearman: SpearmanResult


def interestingness_profile(
    corpus: Corpus,
    graph: FanGraph,
    k: int = DEFAULT_K,
    convention: PrefixConvention = DEFAULT_CONVENTION,
    *,
    permutations: int = 1000,
    seed: int = 0,
) -> InterestingnessProfile:
    """Median and spread of final votes per in-network count, plus rank correlation."""
    profiles = [cascade_profile(story, graph, k, convention) for story in corpus]
    if len(profiles) < 3:
        raise ValueError("need at least 3 stories to profile")
    groups: dict[int, list[int]] = {}
    for profile in profiles:
        groups.setdefault(profile.in_network_k, []).append(profile.final_votes)
    rows: list[ProfileRow] = []
    for value in sorted(groups):
        finals = sorted(groups[value])
        trimmed = finals[1:-1]
        rows.append(
            ProfileRow(
                in_network_k=value,
                n_stories=len(finals),
                median_final_votes=float(np.median(finals)),
                spread_low=trimmed[0] if trimmed else None,
                spread_high=trimmed[-1] if trimmed else None,
            )
        )
    correlation = spearman_permutation(
        [p.in_network_k for p in profiles],
        [p.final_votes for p in profiles],
        permutations=permutations,
        seed=seed,
    )
    return InterestingnessProfile(k=k, convention=convention.label, rows=rows, spearman=correlation)

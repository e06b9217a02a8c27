"""CSV/text emission for metrics, reports, and evaluation outputs.

Every metrics table starts with a comment line recording k, the prefix
convention, and the digests of the corpus/graph files it was computed
from, so a table can always be traced back to its exact inputs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cascade import CascadeHistograms, CascadeProfile, InterestingnessProfile
from .corpus import Corpus, CorpusStats
from .predictor import BaselineComparison, CrossValidation, EvalReport, LabeledExample
from .simulate import CHANNEL_FRONT, SimTrace, TraceEvent


def _fmt(value: object) -> str:
    if isinstance(value, float):
        return format(value, ".10g")
    if value is None:
        return ""
    return str(value)


def digest_comment(*, k: int | None = None, convention: str | None = None, digests: dict[str, str] | None = None) -> str:
    parts = []
    if k is not None:
        parts.append(f"k={k}")
    if convention is not None:
        parts.append(f"convention={convention}")
    for name in sorted(digests or {}):
        parts.append(f"{name}_sha256={digests[name]}")
    return "# " + " ".join(parts)


def _write_table(
    path: str,
    header: Sequence[str],
    rows: Sequence[Sequence[object]],
    *,
    comment: str | None = None,
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        if comment:
            handle.write(comment + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(value) for value in row])


# ---- metrics tables ----


def write_cascade_profiles(
    profiles: Sequence[CascadeProfile], path: str, *, digests: dict[str, str]
) -> None:
    if not profiles:
        raise ValueError("no profiles to write")
    k = profiles[0].k
    convention = profiles[0].convention
    rows = [
        (p.story_id, p.k_used, int(p.short), p.influence_k, p.in_network_k, p.fraction_k, p.final_votes)
        for p in profiles
    ]
    _write_table(
        path,
        ["story_id", "k_used", "short", "influence_k", "in_network_k", "fraction_k", "final_votes"],
        rows,
        comment=digest_comment(k=k, convention=convention, digests=digests),
    )


def write_cascade_summary(
    histograms: Sequence[CascadeHistograms], path: str, *, digests: dict[str, str], spearman_by_k: dict[int, tuple[float, float]] | None = None
) -> None:
    rows = []
    for hist in histograms:
        rho, p_value = (None, None)
        if spearman_by_k and hist.k in spearman_by_k:
            rho, p_value = spearman_by_k[hist.k]
        rows.append(
            (
                hist.k,
                hist.convention,
                len(hist.profiles),
                hist.share_half_in_network,
                hist.share_at_least(10),
                rho,
                p_value,
            )
        )
    _write_table(
        path,
        ["k", "convention", "n_stories", "share_half_in_network", "share_at_least_10", "spearman_rho", "spearman_p"],
        rows,
        comment=digest_comment(digests=digests),
    )


def write_count_histogram(
    hist: dict[int, int], path: str, *, value_label: str, k: int | None = None, convention: str | None = None, digests: dict[str, str]
) -> None:
    rows = [(value, hist[value]) for value in sorted(hist)]
    _write_table(
        path,
        [value_label, "n_stories"],
        rows,
        comment=digest_comment(k=k, convention=convention, digests=digests),
    )


def write_interestingness_profile(
    profile: InterestingnessProfile, path: str, *, digests: dict[str, str]
) -> None:
    rows = [
        (row.in_network_k, row.n_stories, row.median_final_votes, row.spread_low, row.spread_high)
        for row in profile.rows
    ]
    comment = digest_comment(k=profile.k, convention=profile.convention, digests=digests)
    comment += (
        f" spearman_rho={_fmt(profile.spearman.rho)}"
        f" spearman_p={_fmt(profile.spearman.p_value)}"
        f" permutations={profile.spearman.permutations}"
    )
    _write_table(
        path,
        ["in_network_k", "n_stories", "median_final_votes", "spread_low", "spread_high"],
        rows,
        comment=comment,
    )


# ---- corpus stats tables ----


def write_vote_histogram(stats: CorpusStats, path: str, *, digests: dict[str, str]) -> None:
    rows = [(lo, hi, count) for lo, hi, count in stats.vote_histogram]
    _write_table(path, ["final_votes_lo", "final_votes_hi", "n_stories"], rows, comment=digest_comment(digests=digests))


def write_user_activity(stats: CorpusStats, path: str, *, digests: dict[str, str]) -> None:
    rows = []
    for count in sorted(stats.submissions_per_user):
        rows.append(("submissions", count, stats.submissions_per_user[count]))
    for count in sorted(stats.votes_per_user):
        rows.append(("votes", count, stats.votes_per_user[count]))
    _write_table(path, ["activity", "count", "n_users"], rows, comment=digest_comment(digests=digests))


def write_corpus_summary(stats: CorpusStats, path: str, *, digests: dict[str, str]) -> None:
    rows = [
        ("n_stories", stats.n_stories),
        ("n_users", stats.n_users),
        ("total_votes", stats.total_votes),
        ("fraction_below_500", stats.fraction_below(500)),
        ("fraction_above_1500", stats.fraction_above(1500)),
        ("median_final_votes", float(np.median(stats.final_votes_sorted))),
    ]
    _write_table(path, ["statistic", "value"], rows, comment=digest_comment(digests=digests))


# ---- time series and promotion dynamics ----


def write_timeseries(corpus: Corpus, path: str, *, digests: dict[str, str]) -> int:
    """Cumulative votes over time for stories that carry vote times.

    Returns the number of stories written.
    """
    rows = []
    written = 0
    for story in corpus:
        if story.vote_times is None or len(story.vote_times) != len(story.voters):
            continue
        written += 1
        for index, when in enumerate(story.vote_times):
            rows.append((story.story_id, when, index + 1))
    _write_table(path, ["story_id", "time", "cumulative_votes"], rows, comment=digest_comment(digests=digests))
    return written


@dataclass(frozen=True)
class PromotionRates:
    story_id: str
    promotion_tick: int
    promotion_index: int
    pre_rate: float  # votes per tick from submission to promotion
    post_rate: float  # votes per tick in the post window after promotion
    ratio: float | None  # post / pre, None when pre is 0


def _replay_promotion(events, threshold: int, window: int) -> tuple[int, int] | None:
    """(tick, vote count) of promotion, or None.

    A story promotes when its running vote count reaches the threshold,
    and only if that happens inside the promotion window; reaching the
    threshold later does not promote, so such stories are skipped.
    """
    for count, event in enumerate(events, start=1):
        if count >= threshold:
            if event.tick <= window:
                return event.tick, count
            return None
    return None


def promotion_rates(
    traces: dict[str, list[TraceEvent]] | list[SimTrace],
    *,
    post_window_ticks: int = 144,
    promotion_threshold: int = 43,
    promotion_window_ticks: int = 144,
) -> list[PromotionRates]:
    """Per-story vote rates before and after promotion, from traces.

    The promotion tick is recovered by replaying the trace: the tick of
    the vote at which the running count reaches the threshold, inside
    the promotion window.  Unpromoted stories are skipped.
    """
    if isinstance(traces, list):
        traces = {trace.story_id: trace.events for trace in traces}
    out: list[PromotionRates] = []
    for story_id in sorted(traces):
        events = traces[story_id]
        promoted = _replay_promotion(events, promotion_threshold, promotion_window_ticks)
        if promoted is None or promoted[0] == 0:
            continue
        promo_tick, promo_index = promoted
        # Count every vote of the promotion tick as pre-promotion: the
        # story was still in the queue while they arrived.
        pre_votes = sum(1 for e in events if e.tick <= promo_tick)
        post_votes = sum(1 for e in events if promo_tick < e.tick <= promo_tick + post_window_ticks)
        pre_rate = pre_votes / promo_tick
        post_rate = post_votes / post_window_ticks
        out.append(
            PromotionRates(
                story_id=story_id,
                promotion_tick=promo_tick,
                promotion_index=promo_index,
                pre_rate=pre_rate,
                post_rate=post_rate,
                ratio=post_rate / pre_rate if pre_rate > 0 else None,
            )
        )
    return out


def write_promotion_rates(rates: Sequence[PromotionRates], path: str, *, digests: dict[str, str]) -> None:
    rows = [
        (r.story_id, r.promotion_tick, r.promotion_index, r.pre_rate, r.post_rate, r.ratio)
        for r in rates
    ]
    _write_table(
        path,
        ["story_id", "promotion_tick", "promotion_index", "pre_rate", "post_rate", "ratio"],
        rows,
        comment=digest_comment(digests=digests),
    )


@dataclass(frozen=True)
class FrontDecayFit:
    half_life_ticks: float
    slope: float
    n_points: int
    delta_min: int
    delta_max: int


def fit_front_decay(
    traces: dict[str, list[TraceEvent]] | list[SimTrace],
    *,
    promotion_threshold: int = 43,
    promotion_window_ticks: int = 144,
    min_count: int = 5,
) -> FrontDecayFit:
    """Exponential fit to aggregate front-page votes after promotion.

    Front-channel votes from all stories are binned by ticks since each
    story's promotion; the fit runs from the peak bin (post-peak, where
    browsing decay dominates) out to the last bin that still has
    min_count votes.  Returns the implied half-life in ticks.
    """
    if isinstance(traces, list):
        traces = {trace.story_id: trace.events for trace in traces}
    counts: dict[int, int] = {}
    last_tick = 0
    latest_promo = None
    for events in traces.values():
        if events:
            last_tick = max(last_tick, events[-1].tick)
        promoted = _replay_promotion(events, promotion_threshold, promotion_window_ticks)
        if promoted is None:
            continue
        promo_tick = promoted[0]
        if latest_promo is None or promo_tick > latest_promo:
            latest_promo = promo_tick
        for event in events:
            if event.channel == CHANNEL_FRONT and event.tick > promo_tick:
                delta = event.tick - promo_tick
                counts[delta] = counts.get(delta, 0) + 1
    if not counts:
        raise ValueError("no post-promotion front-page votes to fit")
    # Runs end at a common wall-clock tick, so a story promoted at tick p
    # only reports offsets up to end - p. Bins past the smallest such
    # horizon are right-censored (fed by ever fewer stories) and would
    # drag the fitted slope down; cut the fit there.
    horizon = last_tick - latest_promo
    deltas = sorted(counts)
    peak = max(deltas, key=lambda d: (counts[d], -d))
    usable = [d for d in deltas if peak <= d <= max(horizon, peak) and counts[d] >= min_count]
    if len(usable) < 3:
        raise ValueError("not enough populated bins after the peak to fit a decay")
    xs = np.array(usable, dtype=float)
    ys = np.log([counts[d] for d in usable])
    slope, _intercept = np.polyfit(xs, ys, 1)
    if slope >= 0:
        raise ValueError("front-page votes do not decay after the peak")
    half_life = math.log(2.0) / -slope
    return FrontDecayFit(
        half_life_ticks=float(half_life),
        slope=float(slope),
        n_points=len(usable),
        delta_min=usable[0],
        delta_max=usable[-1],
    )


# ---- predictor outputs ----


def write_predictions(
    examples: Sequence[LabeledExample], predictions: Sequence[bool], path: str, *, digests: dict[str, str]
) -> None:
    rows = [
        (
            example.features.story_id,
            example.features.v10,
            example.features.fans1,
            int(example.features.short),
            "interesting" if predicted else "not_interesting",
        )
        for example, predicted in zip(examples, predictions)
    ]
    _write_table(
        path,
        ["story_id", "v10", "fans1", "short", "predicted"],
        rows,
        comment=digest_comment(digests=digests),
    )


def eval_report_rows(report: EvalReport) -> list[tuple[str, object]]:
    return [
        ("tp", report.tp),
        ("tn", report.tn),
        ("fp", report.fp),
        ("fn", report.fn),
        ("total", report.total),
        ("accuracy", report.accuracy),
        ("precision", report.precision),
    ]


def write_eval_report(
    report: EvalReport,
    path: str,
    *,
    digests: dict[str, str],
    baseline: BaselineComparison | None = None,
    cross_validation: CrossValidation | None = None,
) -> None:
    rows: list[tuple[str, object]] = eval_report_rows(report)
    if baseline is not None:
        rows += [
            ("baseline_promoted", baseline.n_promoted),
            ("baseline_promoted_interesting", baseline.n_promoted_interesting),
            ("baseline_precision", baseline.baseline_precision),
            ("predictor_beats_baseline", int(baseline.predictor_beats_baseline)),
        ]
    if cross_validation is not None:
        rows += [
            ("cv_folds", cross_validation.n_folds),
            ("cv_seed", cross_validation.seed),
            ("cv_accuracy", cross_validation.aggregate.accuracy),
            ("cv_precision", cross_validation.aggregate.precision),
        ]
    _write_table(path, ["metric", "value"], rows, comment=digest_comment(digests=digests))

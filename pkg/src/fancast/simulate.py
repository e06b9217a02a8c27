"""Seeded vote-spread simulator.

Each story carries a scalar interestingness r in (0, 1] that acts as the
accept probability in every channel.  Per 10-minute tick, a non-voter
can vote through one of two mechanisms:

  interest-based -- browsing the upcoming queue (p_discover * r, until
                    the story ages out of the queue) or the front page
                    after promotion (p_front * r, halved every
                    decay_half_life_ticks since promotion)
  network-based  -- fans of earlier voters see the story flagged and
                    vote with p_fan_view * r, every tick from exposure
                    onward

A story is promoted the first time its vote count reaches
promotion_threshold within promotion_window_ticks.  Runs are fully
deterministic: every random draw flows from (seed, stream, story index).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from typing import NamedTuple

import numpy as np

from .corpus import Corpus, StoryRecord, save_corpus
from .errors import (
    ConfigError,
    InfeasibleDegreeSequenceError,
    ParseError,
    SimulationYieldError,
)
from .graph import FanGraph, save_graph

CHANNEL_SUBMIT = "submit"
CHANNEL_QUEUE = "queue"
CHANNEL_FRONT = "front"
CHANNEL_FAN = "fan"

SAMPLE_FRONT_PAGE = "front_page"
SAMPLE_ALL = "all"

# Substream tags so the graph, submitter/interest draws, and each story's
# vote draws never share a random stream.
_STREAM_GRAPH = 0
_STREAM_STORY = 1


@dataclass(frozen=True)
class SimulationConfig:
    """Knobs for one simulated corpus.

    The defaults are the committed calibration: they shape the final-vote
    distribution of a front-page sample so that roughly a fifth of
    stories stay under 500 votes and a fifth exceed 1500.
    """

    n_users: int = 20000
    degree_distribution: str = "power_law"  # power_law | fixed
    degree_exponent: float = 2.05
    degree_k: int = 2
    n_stories: int = 500
    sample: str = SAMPLE_FRONT_PAGE  # front_page | all
    interest_mu: float = -2.6
    interest_sigma: float = 1.0
    p_discover: float = 5.0e-5
    p_front: float = 1.25e-3
    p_fan_view: float = 3.0e-4
    promotion_threshold: int = 43
    promotion_window_ticks: int = 144
    queue_lifetime_ticks: int = 144
    decay_half_life_ticks: int = 144
    tick_length_seconds: int = 600
    max_ticks: int = 360
    patience_ticks: int = 36
    seed: int | None = None

    def validated(self) -> "SimulationConfig":
        if self.n_users < 1:
            raise ConfigError("n_users must be at least 1")
        if self.degree_distribution not in ("power_law", "fixed"):
            raise ConfigError(f"unknown degree_distribution {self.degree_distribution!r}")
        if self.degree_distribution == "power_law" and self.degree_exponent <= 1.0:
            raise ConfigError("degree_exponent must be greater than 1")
        if self.sample not in (SAMPLE_FRONT_PAGE, SAMPLE_ALL):
            raise ConfigError(f"unknown sample mode {self.sample!r}")
        if self.n_stories < 0:
            raise ConfigError("n_stories must be nonnegative")
        for name in ("p_discover", "p_front", "p_fan_view"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ConfigError(f"{name} must be a probability, got {value}")
        if self.interest_sigma < 0:
            raise ConfigError("interest_sigma must be nonnegative")
        for name in (
            "promotion_threshold",
            "promotion_window_ticks",
            "queue_lifetime_ticks",
            "decay_half_life_ticks",
            "tick_length_seconds",
            "max_ticks",
            "patience_ticks",
        ):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        return self


# ---- config file I/O (flat "key = value" lines) ----


def parse_config_text(text: str, *, path: str | None = None) -> SimulationConfig:
    by_name = {f.name: f for f in fields(SimulationConfig)}
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path or 'config'}:{lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in by_name:
            raise ConfigError(f"{path or 'config'}:{lineno}: unknown config key {key!r}")
        if key in values:
            raise ConfigError(f"{path or 'config'}:{lineno}: duplicate config key {key!r}")
        values[key] = _coerce(key, raw, by_name[key].type, path=path, lineno=lineno)
    return SimulationConfig(**values).validated()


def _coerce(key: str, raw: str, annotation: object, *, path: str | None, lineno: int) -> object:
    kind = str(annotation)
    try:
        if kind == "str":
            return raw
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "int | None":
            return None if raw.lower() in ("", "none") else int(raw)
    except ValueError:
        raise ConfigError(f"{path or 'config'}:{lineno}: bad value {raw!r} for {key!r}") from None
    raise ConfigError(f"unsupported config field type for {key!r}")  # pragma: no cover


def load_config(path: str) -> SimulationConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config_text(handle.read(), path=path)


def config_to_text(config: SimulationConfig) -> str:
    lines = ["# spread-simulator configuration"]
    for f in fields(SimulationConfig):
        value = getattr(config, f.name)
        if value is None:
            continue
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


# ---- deterministic substreams ----


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


# ---- graph generation ----


def _user_ids(n: int) -> list[str]:
    width = max(4, len(str(max(n - 1, 0))))
    return [f"u{i:0{width}d}" for i in range(n)]


def _sample_distinct(rng: np.random.Generator, n: int, k: int, exclude: int) -> np.ndarray:
    """k distinct values from 0..n-1 minus {exclude}."""
    if k > n - 1:
        raise InfeasibleDegreeSequenceError(f"cannot pick {k} distinct fans among {n - 1} candidates")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    if 3 * k >= n - 1:
        pool = np.delete(np.arange(n, dtype=np.int64), exclude)
        return rng.permutation(pool)[:k]
    chosen: set[int] = set()
    # Rejection sampling; k is far below n here so this terminates fast.
    while len(chosen) < k:
        for value in rng.integers(0, n, size=k - len(chosen)):
            v = int(value)
            if v != exclude:
                chosen.add(v)
    return np.fromiter(chosen, dtype=np.int64, count=k)


def draw_fan_counts(config: SimulationConfig, rng: np.random.Generator) -> np.ndarray:
    n = config.n_users
    if config.degree_distribution == "fixed":
        if config.degree_k > n - 1:
            raise InfeasibleDegreeSequenceError(
                f"fixed degree {config.degree_k} impossible with {n} users"
            )
        return np.full(n, config.degree_k, dtype=np.int64)
    if n < 2:
        return np.zeros(n, dtype=np.int64)
    # Bounded discrete power law: P(d) ~ d**-exponent on 1..n-1, sampled
    # by inverting a tabulated CDF (scipy's zipfian.rvs root-finds per
    # draw, which is far too slow at this scale).
    support = np.arange(1, n, dtype=np.int64)
    cdf = np.cumsum(support.astype(np.float64) ** -config.degree_exponent)
    cdf /= cdf[-1]
    return support[np.searchsorted(cdf, rng.random(n), side="left")]


def generate_graph(config: SimulationConfig, seed: int) -> tuple[FanGraph, list[np.ndarray]]:
    """Build the watch graph; returns it plus per-user fan index arrays.

    Fan counts come from the configured distribution; the watchers
    themselves are drawn uniformly, resampling self-edges and duplicates.
    """
    config = config.validated()
    rng = substream(seed, _STREAM_GRAPH)
    n = config.n_users
    counts = draw_fan_counts(config, rng)
    fans_of: list[np.ndarray] = []
    for user in range(n):
        picked = _sample_distinct(rng, n, int(counts[user]), exclude=user)
        picked.sort()
        fans_of.append(picked)
    ids = _user_ids(n)
    graph = FanGraph()
    for user in range(n):
        graph.add_user(ids[user])
    for user in range(n):
        watched = ids[user]
        for fan in fans_of[user]:
            graph.add_edge(ids[int(fan)], watched)
    return graph, fans_of


# ---- per-story simulation ----


class TraceEvent(NamedTuple):
    tick: int
    user_id: str
    channel: str


@dataclass
class SimTrace:
    story_id: str
    events: list[TraceEvent]
    promotion_tick: int | None


class _IndexPool:
    """Set of user indices with O(1) add/remove and uniform sampling."""

    __slots__ = ("items", "position", "size")

    def __init__(self, capacity: int, initial: np.ndarray | None = None):
        self.items = np.empty(capacity, dtype=np.int64)
        self.position = np.full(capacity, -1, dtype=np.int64)
        self.size = 0
        if initial is not None:
            for value in initial:
                self.add(int(value))

    def __contains__(self, value: int) -> bool:
        return self.position[value] >= 0

    def add(self, value: int) -> None:
        if self.position[value] >= 0:
            return
        self.items[self.size] = value
        self.position[value] = self.size
        self.size += 1

    def remove(self, value: int) -> None:
        pos = self.position[value]
        if pos < 0:
            return
        last = self.items[self.size - 1]
        self.items[pos] = last
        self.position[last] = pos
        self.position[value] = -1
        self.size -= 1

    def sample(self, rng: np.random.Generator, k: int) -> np.ndarray:
        if k <= 0 or self.size == 0:
            return np.empty(0, dtype=np.int64)
        if k >= self.size:
            return self.items[: self.size].copy()
        if 3 * k >= self.size:
            return self.items[rng.permutation(self.size)[:k]].copy()
        chosen: set[int] = set()
        while len(chosen) < k:
            for pos in rng.integers(0, self.size, size=k - len(chosen)):
                chosen.add(int(pos))
        picked = np.fromiter(chosen, dtype=np.int64, count=k)
        picked.sort()  # drop the set's iteration order from the output
        return self.items[picked].copy()


@dataclass
class _StoryOutcome:
    voter_indices: list[int]
    vote_ticks: list[int]
    channels: list[str]
    promoted: bool
    promotion_tick: int | None
    promotion_index: int | None


def _simulate_story_indices(
    fans_of: list[np.ndarray],
    config: SimulationConfig,
    rng: np.random.Generator,
    submitter: int,
    r: float,
    give_up_tick: int | None = None,
) -> _StoryOutcome:
    n = config.n_users
    voted = np.zeros(n, dtype=bool)
    exposed = np.zeros(n, dtype=bool)
    nonvoters = _IndexPool(n, np.arange(n, dtype=np.int64))
    exposed_nonvoters = _IndexPool(n)

    voter_indices: list[int] = []
    vote_ticks: list[int] = []
    channels: list[str] = []

    def expose_fans_of(user: int) -> None:
        for fan in fans_of[user]:
            f = int(fan)
            if not exposed[f]:
                exposed[f] = True
                if not voted[f]:
                    exposed_nonvoters.add(f)

    def record_vote(user: int, tick: int, channel: str) -> None:
        voted[user] = True
        nonvoters.remove(user)
        exposed_nonvoters.remove(user)
        voter_indices.append(user)
        vote_ticks.append(tick)
        channels.append(channel)

    record_vote(submitter, 0, CHANNEL_SUBMIT)
    expose_fans_of(submitter)

    promoted = False
    promotion_tick: int | None = None
    promotion_index: int | None = None
    last_vote_tick = 0

    for tick in range(1, config.max_ticks + 1):
        if tick - last_vote_tick >= config.patience_ticks:
            break
        if give_up_tick is not None and not promoted and tick > give_up_tick:
            break  # caller only wants promoted stories; this one cannot be
        if promoted:
            age = tick - promotion_tick
            p_interest = config.p_front * r * 2.0 ** (-age / config.decay_half_life_ticks)
            interest_channel = CHANNEL_FRONT
        elif tick <= config.queue_lifetime_ticks:
            p_interest = config.p_discover * r
            interest_channel = CHANNEL_QUEUE
        else:
            p_interest = 0.0
            interest_channel = CHANNEL_QUEUE
        if p_interest <= 0.0 and exposed_nonvoters.size == 0:
            break  # no channel can ever fire again

        new_votes: list[tuple[int, str]] = []
        if p_interest > 0.0 and nonvoters.size > 0:
            k_interest = int(rng.binomial(nonvoters.size, min(p_interest, 1.0)))
            for user in nonvoters.sample(rng, k_interest):
                new_votes.append((int(user), interest_channel))
        # Interest-channel voters of this tick are no longer non-voters when
        # the fan channel fires; exposure gained this tick counts next tick.
        for user, _ in new_votes:
            nonvoters.remove(user)
            exposed_nonvoters.remove(user)
        p_fan = config.p_fan_view * r
        if p_fan > 0.0 and exposed_nonvoters.size > 0:
            k_fan = int(rng.binomial(exposed_nonvoters.size, min(p_fan, 1.0)))
            for user in exposed_nonvoters.sample(rng, k_fan):
                new_votes.append((int(user), CHANNEL_FAN))

        if new_votes:
            order = rng.permutation(len(new_votes))  # tie order within the tick
            for index in order:
                user, channel = new_votes[int(index)]
                record_vote(user, tick, channel)
            for index in order:
                expose_fans_of(new_votes[int(index)][0])
            last_vote_tick = tick

        if (
            not promoted
            and tick <= config.promotion_window_ticks
            and len(voter_indices) >= config.promotion_threshold
        ):
            promoted = True
            promotion_tick = tick
            promotion_index = len(voter_indices)

        if nonvoters.size == 0:
            break

    return _StoryOutcome(
        voter_indices=voter_indices,
        vote_ticks=vote_ticks,
        channels=channels,
        promoted=promoted,
        promotion_tick=promotion_tick,
        promotion_index=promotion_index,
    )


def _draw_interest(rng: np.random.Generator, config: SimulationConfig) -> float:
    return float(min(1.0, rng.lognormal(config.interest_mu, config.interest_sigma)))


@dataclass
class SimulationResult:
    config: SimulationConfig
    graph: FanGraph
    corpus: Corpus
    traces: list[SimTrace]
    attempts: int  # stories simulated, including unpromoted discards


def simulate_corpus(config: SimulationConfig) -> SimulationResult:
    """Simulate a corpus per config; config.seed must be set.

    With sample=front_page, submissions are simulated until n_stories
    promoted ones have been collected, mirroring a front-page crawl;
    unpromoted submissions are discarded.  With sample=all, exactly
    n_stories submissions are emitted regardless of promotion.
    """
    config = config.validated()
    if config.seed is None:
        raise ConfigError("simulation requires an explicit seed")
    seed = config.seed
    graph, fans_of = generate_graph(config, seed)
    ids = _user_ids(config.n_users)
    fan_counts = np.array([len(f) for f in fans_of], dtype=np.float64)
    weights = (1.0 + fan_counts) / float(np.sum(1.0 + fan_counts))

    stories: list[StoryRecord] = []
    traces: list[SimTrace] = []
    want_front_page = config.sample == SAMPLE_FRONT_PAGE
    max_attempts = max(1000, 60 * config.n_stories)
    attempt = 0
    while len(stories) < config.n_stories:
        if attempt >= max_attempts:
            raise SimulationYieldError(
                f"only {len(stories)} of {config.n_stories} stories promoted after "
                f"{attempt} submissions; the config promotes too rarely for front_page sampling"
            )
        rng = substream(seed, _STREAM_STORY, attempt)
        submitter = int(rng.choice(config.n_users, p=weights))
        r = _draw_interest(rng, config)
        give_up = config.promotion_window_ticks if want_front_page else None
        outcome = _simulate_story_indices(fans_of, config, rng, submitter, r, give_up_tick=give_up)
        attempt += 1
        if want_front_page and not outcome.promoted:
            continue
        story_id = f"s{len(stories):04d}"
        voters = [ids[i] for i in outcome.voter_indices]
        times = [tick * config.tick_length_seconds for tick in outcome.vote_ticks]
        stories.append(
            StoryRecord(
                story_id=story_id,
                submitter=ids[submitter],
                final_votes=len(voters),
                promoted=outcome.promoted,
                promotion_index=outcome.promotion_index,
                submit_time=0,
                voters=voters,
                vote_times=times,
            )
        )
        traces.append(
            SimTrace(
                story_id=story_id,
                events=[
                    TraceEvent(tick=tick, user_id=ids[user], channel=channel)
                    for user, tick, channel in zip(
                        outcome.voter_indices, outcome.vote_ticks, outcome.channels
                    )
                ],
                promotion_tick=outcome.promotion_tick,
            )
        )
    return SimulationResult(
        config=config,
        graph=graph,
        corpus=Corpus(stories=stories, graph=graph),
        traces=traces,
        attempts=attempt,
    )


# ---- trace file I/O ----


def write_traces(traces: list[SimTrace], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for trace in traces:
            for event in trace.events:
                record = {
                    "story_id": trace.story_id,
                    "tick": event.tick,
                    "user_id": event.user_id,
                    "channel": event.channel,
                }
                handle.write(json.dumps(record, sort_keys=True) + "\n")


def read_traces(path: str) -> dict[str, list[TraceEvent]]:
    out: dict[str, list[TraceEvent]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc.msg}", path=path, line=lineno) from None
            try:
                event = TraceEvent(tick=obj["tick"], user_id=obj["user_id"], channel=obj["channel"])
                story_id = obj["story_id"]
            except KeyError as exc:
                raise ParseError(f"missing trace key {exc.args[0]!r}", path=path, line=lineno) from None
            if event.channel not in (CHANNEL_SUBMIT, CHANNEL_QUEUE, CHANNEL_FRONT, CHANNEL_FAN):
                raise ParseError(f"unknown channel {event.channel!r}", path=path, line=lineno)
            out.setdefault(story_id, []).append(event)
    return out


def write_simulation(result: SimulationResult, out_dir: str) -> dict[str, str]:
    """Write graph/stories/votes/traces plus the resolved config; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "graph": os.path.join(out_dir, "graph.tsv"),
        "stories": os.path.join(out_dir, "stories.jsonl"),
        "votes": os.path.join(out_dir, "votes.csv"),
        "traces": os.path.join(out_dir, "traces.jsonl"),
        "config": os.path.join(out_dir, "config.resolved.txt"),
    }
    save_graph(result.graph, paths["graph"])
    save_corpus(result.corpus, paths["stories"], paths["votes"])
    write_traces(result.traces, paths["traces"])
    with open(paths["config"], "w", encoding="utf-8", newline="\n") as handle:
        handle.write(config_to_text(result.config))
    return paths

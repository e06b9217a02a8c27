"""Shared fixtures: tiny hand corpora, one small simulated corpus on
disk, and the acceptance-line reporter that prints one PASS/FAIL line
per criterion at the end of the run."""

from __future__ import annotations

import dataclasses
import time

import pytest

from fancast.corpus import Corpus, StoryRecord
from fancast.graph import FanGraph
from fancast.simulate import SimulationConfig, simulate_corpus, write_simulation

ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES[number] = f"criterion {number}: {status}  {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])


# ---- hand-built corpus pieces ----


def make_story(voters, *, story_id="s1", final_votes=None, promoted=False, promotion_index=None):
    return StoryRecord(
        story_id=story_id,
        submitter=voters[0],
        final_votes=len(voters) if final_votes is None else final_votes,
        promoted=promoted,
        promotion_index=promotion_index,
        voters=list(voters),
    )


def graph_of(edges, users=()):
    graph = FanGraph(edges)
    for user in users:
        graph.add_user(user)
    return graph


@pytest.fixture
def star_graph():
    """Ten users all watching the hub 'hub'."""
    return FanGraph([(f"w{i}", "hub") for i in range(10)])


# ---- one small simulated corpus, written to disk once per session ----

SMALL_CONFIG = SimulationConfig(
    n_users=400,
    n_stories=40,
    sample="all",
    interest_mu=-1.2,
    interest_sigma=0.8,
    p_discover=2e-3,
    p_front=5e-3,
    p_fan_view=5e-3,
    max_ticks=200,
    seed=7,
)


@pytest.fixture(scope="session")
def small_run():
    start = time.perf_counter()
    result = simulate_corpus(SMALL_CONFIG)
    elapsed = time.perf_counter() - start
    return result, elapsed


@pytest.fixture(scope="session")
def small_sim_dir(tmp_path_factory, small_run):
    result, _elapsed = small_run
    out = tmp_path_factory.mktemp("smallsim")
    paths = write_simulation(result, str(out))
    return paths


def corpus_of(*stories, graph=None) -> Corpus:
    return Corpus(stories=list(stories), graph=graph)

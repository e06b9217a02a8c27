import random

import pytest

from fancast.cascade import (
    EXCLUDE_SUBMITTER,
    INCLUDE_SUBMITTER,
    PrefixConvention,
    cascade_histograms,
    cascade_profile,
    in_network_votes,
    influence,
    interestingness_profile,
    spearman_permutation,
)
from fancast.graph import FanGraph

from .conftest import corpus_of, graph_of, make_story
from .oracles import brute_in_network, brute_influence, random_instance


# ---- fixed cases ----


def test_empty_graph_all_zero():
    story = make_story(["s", "v1", "v2", "v3"])
    graph = graph_of([], users=story.voters)
    assert in_network_votes(story, graph, k=10).count == 0
    assert influence(story, graph, k=10).count == 0


def test_star_all_in_network(star_graph):
    voters = ["hub"] + [f"w{i}" for i in range(10)]
    story = make_story(voters)
    got = in_network_votes(story, star_graph, k=10)
    assert got.count == 10
    assert got.k_used == 10
    assert not got.short


def test_chain_seeding_through_voters():
    # v2 watches v1 only; v1 watches nobody
    graph = graph_of([("v2", "v1")], users=["s"])
    story = make_story(["s", "v1", "v2"])
    got = in_network_votes(story, graph, k=2)
    assert got.count == 1


def test_submitter_never_counted_but_seeds():
    # v1 watches the submitter: counts. Submitter watches v1: irrelevant.
    graph = graph_of([("v1", "s"), ("s", "v1")])
    story = make_story(["s", "v1"])
    assert in_network_votes(story, graph, k=5).count == 1


def test_influence_zero_fan_submitter():
    story = make_story(["s"])
    graph = graph_of([], users=["s"])
    got = influence(story, graph, k=1)
    assert got.count == 0
    assert got.short


def test_influence_disjoint_union():
    edges = [(f"a{i}", "s") for i in range(3)] + [(f"b{i}", "v1") for i in range(4)]
    graph = graph_of(edges)
    story = make_story(["s", "v1"])
    assert influence(story, graph, k=10).count == 7


def test_influence_excludes_prefix_voters():
    # v1 watches s, so v1 is in s's fan set but votes inside the prefix.
    graph = graph_of([("v1", "s"), ("w", "s")])
    story = make_story(["s", "v1"])
    assert influence(story, graph, k=5).count == 1  # only w


def test_influence_submitter_seeds_under_include_convention():
    # include_submitter with k=0 yields an empty slot prefix, but the
    # submitter still seeds the audience.
    graph = graph_of([("w", "s")])
    story = make_story(["s", "v1"])
    got = influence(story, graph, k=0, convention=INCLUDE_SUBMITTER)
    assert got.count == 1


def test_conventions_differ_on_slot_use():
    graph = graph_of([("v1", "s"), ("v2", "v1")])
    story = make_story(["s", "v1", "v2"])
    # k=1 exclusive: prefix covers s+v1; v1 watches s -> 1
    assert in_network_votes(story, graph, k=1, convention=EXCLUDE_SUBMITTER).count == 1
    # k=1 inclusive: prefix is just s -> 0
    assert in_network_votes(story, graph, k=1, convention=INCLUDE_SUBMITTER).count == 0
    # k=2 inclusive: prefix covers s+v1 again
    assert in_network_votes(story, graph, k=2, convention=INCLUDE_SUBMITTER).count == 1


def test_short_prefix_flagged():
    story = make_story(["s", "v1"])
    graph = graph_of([], users=["s", "v1"])
    got = in_network_votes(story, graph, k=10)
    assert got.short
    assert got.k_used == 1
    full = in_network_votes(story, graph, k=1)
    assert not full.short


def test_k_zero_and_negative():
    story = make_story(["s", "v1"])
    graph = graph_of([("v1", "s")])
    assert in_network_votes(story, graph, k=0).count == 0
    with pytest.raises(ValueError):
        in_network_votes(story, graph, k=-1)


def test_no_voters_rejected():
    story = make_story(["s"])
    story.voters = []
    with pytest.raises(ValueError):
        in_network_votes(story, FanGraph(), k=3)


def test_influence_can_dip_when_audience_member_votes():
    """The prospective audience loses exactly the members who convert to
    voters: influence(k+1) can be one below influence(k), never more."""
    graph = graph_of([("v1", "s")])
    story = make_story(["s", "v1"])
    assert influence(story, graph, k=0).count == 1  # v1 watches, has not voted
    assert influence(story, graph, k=1).count == 0  # v1 converted
    # reach (audience plus prefix) never shrinks: 1+1 <= 0+2
    assert 0 + 2 >= 1 + 1


def test_convention_labels():
    assert EXCLUDE_SUBMITTER.label == "exclude_submitter"
    assert PrefixConvention.from_label("include") == INCLUDE_SUBMITTER
    with pytest.raises(ValueError):
        PrefixConvention.from_label("sideways")


# ---- randomized oracle crosscheck (the big timed run is in acceptance) ----


def test_metrics_match_brute_force_sample():
    rng = random.Random(11)
    for _ in range(120):
        _users, edges, voters = random_instance(rng)
        story = make_story(voters)
        graph = graph_of(edges, users=_users)
        k = rng.randint(0, 18)
        for convention in (EXCLUDE_SUBMITTER, INCLUDE_SUBMITTER):
            inc = convention.include_submitter
            assert in_network_votes(story, graph, k, convention).count == brute_in_network(
                voters, edges, k, inc
            )
            assert influence(story, graph, k, convention).count == brute_influence(
                voters, edges, k, inc
            )


# ---- profiles and histograms ----


def test_cascade_profile_fraction():
    graph = graph_of([("v1", "s"), ("v2", "v1")], users=["v3"])
    story = make_story(["s", "v1", "v2", "v3"])
    profile = cascade_profile(story, graph, k=3)
    assert profile.in_network_k == 2
    assert profile.k_used == 3
    assert profile.fraction_k == pytest.approx(2 / 3)
    assert profile.convention == "exclude_submitter"


def test_cascade_histograms_recount():
    graph = graph_of([("v1", "s"), ("v2", "s"), ("x", "v9")])
    stories = [
        make_story(["s", "v1", "v2"], story_id="a"),
        make_story(["v9", "v1"], story_id="b"),
        make_story(["x", "v9"], story_id="c"),
    ]
    hist = cascade_histograms(corpus_of(*stories), graph, k=2)
    assert sum(hist.in_network_hist.values()) == 3
    assert sum(hist.influence_hist.values()) == 3
    # recount share_half_in_network independently
    expected = sum(1 for p in hist.profiles if p.k_used and p.in_network_k / p.k_used >= 0.5)
    assert hist.share_half_in_network == pytest.approx(expected / 3)
    assert hist.shares_at_least[0] == 1.0
    assert hist.share_at_least(1) == hist.shares_at_least[1]


# ---- spearman ----


def test_spearman_perfect_inverse():
    xs = list(range(12))
    ys = [1000 - 50 * x for x in xs]
    got = spearman_permutation(xs, ys, permutations=400, seed=3)
    assert got.rho == pytest.approx(-1.0)
    assert got.p_value < 0.01


def test_spearman_null_case():
    rng = random.Random(5)
    xs = [rng.random() for _ in range(60)]
    ys = [rng.random() for _ in range(60)]
    got = spearman_permutation(xs, ys, permutations=500, seed=1)
    assert abs(got.rho) < 0.3
    assert got.p_value > 0.05


def test_spearman_p_value_never_zero():
    xs = list(range(8))
    got = spearman_permutation(xs, xs, permutations=100, seed=0)
    assert got.p_value == pytest.approx(1 / 101)


def test_spearman_rejects_bad_input():
    with pytest.raises(ValueError):
        spearman_permutation([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        spearman_permutation([1, 2], [3, 4])
    with pytest.raises(ValueError):
        spearman_permutation([1, 1, 1], [1, 2, 3])


# ---- interestingness profile ----


def test_interestingness_profile_rows_and_trimming():
    graph = graph_of([("v1", "s")], users=["q", "r"])
    stories = [
        make_story(["s", "v1"], story_id=f"g{i}", final_votes=fv)
        for i, fv in enumerate([100, 400, 900])
    ]
    stories += [
        make_story(["q", "r"], story_id=f"h{i}", final_votes=fv) for i, fv in enumerate([50, 60])
    ]
    profile = interestingness_profile(corpus_of(*stories), graph, k=5, permutations=200)
    by_value = {row.in_network_k: row for row in profile.rows}
    assert set(by_value) == {0, 1}
    grp1 = by_value[1]
    assert grp1.n_stories == 3
    assert grp1.median_final_votes == 400
    # single high and low dropped -> both bounds collapse to the median
    assert (grp1.spread_low, grp1.spread_high) == (400, 400)
    grp0 = by_value[0]
    assert grp0.n_stories == 2
    assert grp0.spread_low is None and grp0.spread_high is None


def test_interestingness_profile_needs_three_stories():
    graph = graph_of([], users=["a", "b"])
    stories = [make_story(["a"], story_id="x"), make_story(["b"], story_id="y")]
    with pytest.raises(ValueError):
        interestingness_profile(corpus_of(*stories), graph)

"""Brute-force reference implementations used to check the fast code.

Everything in this file favors obviousness over speed and shares no
helpers with the package under test: metrics are nested scans over raw
(fan, watched) edge tuples, and the split oracle enumerates every
attribute/midpoint split directly.
"""

from __future__ import annotations

import math
import random


# ---- cascade metric oracles ----


def prefix_length(n_voters: int, k: int, include_submitter: bool) -> int:
    """How many entries of the voter list the k-prefix covers."""
    if include_submitter:
        return min(k, n_voters)
    return min(k + 1, n_voters)


def brute_in_network(voters, edges, k, include_submitter=False) -> int:
    """Position-by-position scan: voter i counts if it watches any
    strictly earlier voter.  Position 0 never counts."""
    edge_set = set(edges)
    end = prefix_length(len(voters), k, include_submitter)
    count = 0
    for i in range(1, end):
        for j in range(i):
            if (voters[i], voters[j]) in edge_set:
                count += 1
                break
    return count

def brute_influence(voters, edges, k, include_submitter=False) -> int:
    """Set union over raw edges: watchers of any prefix voter (the
    submitter always seeds), minus the prefix voters themselves."""
    end = prefix_length(len(voters), k, include_submitter)
    prefix = set(voters[:end])
    prefix.add(voters[0])
    watchers = set()
    for fan, watched in edges:
        if watched in prefix:
            watchers.add(fan)
    return len(watchers - prefix)


def random_instance(rng: random.Random):
    """One randomized (users, edges, voters) triple: ≤30 users, ≤15
    votes, a random watch graph at one of three densities."""
    n_users = rng.randint(2, 30)
    users = [f"p{i:02d}" for i in range(n_users)]
    density = rng.choice([0.05, 0.15, 0.4])
    edges = []
    for a in users:
        for b in users:
            if a != b and rng.random() < density:
                edges.append((a, b))
    n_votes = rng.randint(1, min(15, n_users))
    voters = rng.sample(users, n_votes)
    return users, edges, voters


# ---- split-choice oracle ----


def _entropy_bits(pos: int, neg: int) -> float:
    total = pos + neg
    h = 0.0
    for part in (pos, neg):
        if 0 < part < total:
            h -= (part / total) * math.log2(part / total)
    return h


def enumerate_splits(points):
    """Every attribute/midpoint split over points = [(v10, fans1, label)].

    Yields (attr_index, threshold, gain, gain_ratio) for each midpoint
    between consecutive distinct values of each attribute, including
    zero-gain splits so callers can see the full landscape.
    """
    n = len(points)
    pos = sum(1 for p in points if p[2])
    parent = _entropy_bits(pos, n - pos)
    for attr in (0, 1):
        values = sorted({p[attr] for p in points})
        for lo, hi in zip(values, values[1:]):
            cut = (lo + hi) / 2.0
            left = [p for p in points if p[attr] <= cut]
            right = [p for p in points if p[attr] > cut]
            lp = sum(1 for p in left if p[2])
            rp = sum(1 for p in right if p[2])
            child = (len(left) / n) * _entropy_bits(lp, len(left) - lp)
            child += (len(right) / n) * _entropy_bits(rp, len(right) - rp)
            gain = parent - child
            wl = len(left) / n
            wr = len(right) / n
            split_info = -(wl * math.log2(wl) + wr * math.log2(wr))
            ratio = gain / split_info if split_info > 0 else 0.0
            yield attr, cut, gain, ratio


def best_ratio(points) -> float:
    """Max gain ratio over all splits with positive gain; 0.0 if none."""
    best = 0.0
    for _attr, _cut, gain, ratio in enumerate_splits(points):
        if gain > 1e-12 and ratio > best:
            best = ratio
    return best


def best_gain(points) -> float:
    """Max information gain over all splits; 0.0 if none gains."""
    best = 0.0
    for _attr, _cut, gain, _ratio in enumerate_splits(points):
        if gain > best:
            best = gain
    return best

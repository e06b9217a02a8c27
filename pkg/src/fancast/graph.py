"""Directed watch graph with asymmetric fan/friend roles.

An edge (fan, watched) means `fan` watches `watched`.  The two views of
the same edge set:

    fans(u)    -- users who watch u (incoming edges)
    friends(u) -- users u watches (outgoing edges)

so v in fans(u) iff u in friends(v).  Edges are unweighted and
deduplicated; self-edges are rejected.  Build the graph single-threaded,
then treat it as read-only: the analysis code never mutates it.
"""

from __future__ import annotations

import io
from typing import Iterable, Iterator

from .errors import ParseError, SelfEdgeError

UserId = str

_EMPTY: frozenset[str] = frozenset()


class FanGraph:
    """Adjacency maps in both directions over string user ids."""

    __slots__ = ("_friends", "_fans", "_n_edges")

    def __init__(self, edges: Iterable[tuple[UserId, UserId]] = ()):
        self._friends: dict[UserId, set[UserId]] = {}
        self._fans: dict[UserId, set[UserId]] = {}
        self._n_edges = 0
        for fan, watched in edges:
            self.add_edge(fan, watched)

    # ---- construction ----

    def add_edge(self, fan: UserId, watched: UserId) -> None:
        """Record that `fan` watches `watched`.  Re-adding is a no-op."""
        if fan == watched:
            raise SelfEdgeError(f"user {fan!r} cannot watch themselves")
        out = self._friends.setdefault(fan, set())
        if watched in out:
            return
        out.add(watched)
        self._fans.setdefault(watched, set()).add(fan)
        self._friends.setdefault(watched, set())
        self._fans.setdefault(fan, set())
        self._n_edges += 1

    def add_user(self, user: UserId) -> None:
        """Ensure `user` exists even with no edges."""
        self._friends.setdefault(user, set())
        self._fans.setdefault(user, set())

    # ---- queries ----

    def fans(self, user: UserId) -> frozenset[UserId]:
        """Users who watch `user`.  Unknown users have no fans."""
        got = self._fans.get(user)
        return frozenset(got) if got else _EMPTY

    def friends(self, user: UserId) -> frozenset[UserId]:
        """Users `user` watches.  Unknown users have no friends."""
        got = self._friends.get(user)
        return frozenset(got) if got else _EMPTY

    def fan_count(self, user: UserId) -> int:
        got = self._fans.get(user)
        return len(got) if got else 0

    def friend_count(self, user: UserId) -> int:
        got = self._friends.get(user)
        return len(got) if got else 0

    def is_fan(self, fan: UserId, watched: UserId) -> bool:
        got = self._fans.get(watched)
        return fan in got if got else False

    def users(self) -> frozenset[UserId]:
        return frozenset(self._friends)

    @property
    def n_users(self) -> int:
        return len(self._friends)

    @property
    def n_edges(self) -> int:
        return self._n_edges

    def edges(self) -> Iterator[tuple[UserId, UserId]]:
        """All (fan, watched) pairs, unordered."""
        for fan, out in self._friends.items():
            for watched in out:
                yield (fan, watched)

    def __contains__(self, user: UserId) -> bool:
        return user in self._friends

    def __repr__(self) -> str:  # pragma: no cover
        return f"FanGraph(users={self.n_users}, edges={self.n_edges})"


# ---- file I/O ----
#
# Edge list format: one edge per line, "fan<TAB>watched".  Any run of
# whitespace is accepted as the separator.  Blank lines and lines whose
# first non-space character is '#' are skipped.


def parse_edge_line(line: str) -> tuple[UserId, UserId] | None:
    """Split one edge-list line; None for blanks and comments."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    parts = stripped.split()
    if len(parts) != 2:
        raise ValueError(f"expected 2 fields, got {len(parts)}")
    return parts[0], parts[1]


def read_graph(stream: io.TextIOBase, *, path: str | None = None) -> FanGraph:
    graph = FanGraph()
    for lineno, line in enumerate(stream, start=1):
        try:
            pair = parse_edge_line(line)
        except ValueError as exc:
            raise ParseError(str(exc), path=path, line=lineno) from None
        if pair is None:
            continue
        fan, watched = pair
        if fan == watched:
            raise ParseError(f"self-edge for user {fan!r}", path=path, line=lineno)
        graph.add_edge(fan, watched)
    return graph


def load_graph(path: str) -> FanGraph:
    """Read an edge-list file into a FanGraph.  Duplicates collapse silently."""
    with open(path, "r", encoding="utf-8") as handle:
        return read_graph(handle, path=path)


def save_graph(graph: FanGraph, path: str) -> None:
    """Write the edge list sorted by (fan, watched) for stable output."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("# fan\twatched\n")
        for fan, watched in sorted(graph.edges()):
            handle.write(f"{fan}\t{watched}\n")

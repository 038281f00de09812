"""Exact nearest-set search with two interchangeable backends.

Both backends answer the same question: the ordered list of positions in
the current point sequence whose distance to the query is within
``tie_tolerance`` (relative) of the exact minimum.  ``LinearScanIndex``
is the reference; ``VpTreeIndex`` prunes with the triangle inequality
and must return the identical position set for any operation sequence.

Candidate distances are always evaluated as ``distance(stored, query)``
in both backends, so tie comparisons at tolerance 0 are bit-exact.
"""

from __future__ import annotations

import math

from .errors import EmptyModelError, PositionOutOfRangeError
from .metrics import MetricDescriptor

INDEX_KINDS = ("linear", "vptree")

_DEFAULT_LEAF_CAPACITY = 16

# Relative slack applied to pruning bounds only (never to the tie test
# itself): computed distances can violate the triangle inequality by a
# few ulps, and a pruned subtree cannot be recovered later.
_PRUNE_SLACK = 1e-9


def linear_tie_set(points, x, distance, tie_tolerance: float) -> list[int]:
    """Positions of all points within the relative tie band of the minimum.

    Single pass; with ``tie_tolerance`` 0 membership requires bit-equality
    with the minimum distance.  Ascending position order.
    """
    dmin = math.inf
    ds = []
    append = ds.append
    for p in points:
        d = distance(p, x)
        append(d)
        if d < dmin:
            dmin = d
    if not ds:
        raise EmptyModelError("nearest-set query against an empty point sequence")
    threshold = dmin if tie_tolerance == 0.0 else dmin * (1.0 + tie_tolerance)
    return [i for i, d in enumerate(ds) if d <= threshold]


class LinearScanIndex:
    """Brute-force backend; the oracle the tree is checked against."""

    kind = "linear"

    def __init__(self, metric: MetricDescriptor, points=()):
        self._distance = metric.distance
        self._points = list(points)

    def __len__(self) -> int:
        return len(self._points)

    def insert(self, point) -> None:
        self._points.append(point)

    def remove(self, position: int) -> None:
        if not 0 <= position < len(self._points):
            raise PositionOutOfRangeError(
                f"position {position} not in [0, {len(self._points)})"
            )
        del self._points[position]

    def query_nearest_set(self, x, tie_tolerance: float = 0.0) -> list[int]:
        return linear_tie_set(self._points, x, self._distance, tie_tolerance)


class _Node:
    """Tree node; ``bucket`` is a list of point ids at leaves, else None."""

    __slots__ = ("vantage", "mu", "inner", "outer", "bucket")

    def __init__(self, bucket):
        self.vantage = -1
        self.mu = 0.0
        self.inner = None
        self.outer = None
        self.bucket = bucket


class VpTreeIndex:
    """Vantage-point tree over an arbitrary metric.

    Inserts descend by the stored split radii, so the partition invariant
    (inner holds exactly the points with d(vantage, p) <= mu) survives
    mutation.  Removal tombstones; the tree is rebuilt from live points
    whenever tombstones exceed half the live count.
    """

    kind = "vptree"

    def __init__(self, metric: MetricDescriptor, points=(), leaf_capacity: int = _DEFAULT_LEAF_CAPACITY):
        if leaf_capacity < 1:
            raise ValueError("leaf capacity must be at least 1")
        self._distance = metric.distance
        self._capacity = leaf_capacity
        self._points: list = []       # by internal id, append-only
        self._alive: list[bool] = []  # by internal id
        self._pos_to_id: list[int] = []
        self._id_to_pos: dict[int, int] = {}
        self._root: _Node | None = None
        self._dead = 0
        for p in points:
            self.insert(p)

    def __len__(self) -> int:
        return len(self._pos_to_id)

    # -- maintenance ---------------------------------------------------

    def insert(self, point) -> None:
        pid = len(self._points)
        self._points.append(point)
        self._alive.append(True)
        self._id_to_pos[pid] = len(self._pos_to_id)
        self._pos_to_id.append(pid)
        if self._root is None:
            self._root = _Node([pid])
            return
        node = self._root
        dist = self._distance
        pts = self._points
        while node.bucket is None:
            node = node.inner if dist(pts[node.vantage], point) <= node.mu else node.outer
        node.bucket.append(pid)
        if len(node.bucket) > self._capacity:
            self._split(node)

    def remove(self, position: int) -> None:
        n = len(self._pos_to_id)
        if not 0 <= position < n:
            raise PositionOutOfRangeError(f"position {position} not in [0, {n})")
        pid = self._pos_to_id.pop(position)
        del self._id_to_pos[pid]
        for later in self._pos_to_id[position:]:
            self._id_to_pos[later] -= 1
        self._alive[pid] = False
        self._dead += 1
        if self._dead * 2 > len(self._pos_to_id):
            self._rebuild()

    def _rebuild(self) -> None:
        live = list(self._pos_to_id)
        self._dead = 0
        if not live:
            self._root = None
            return
        root = _Node(live)
        self._root = root
        if len(live) > self._capacity:
            self._split(root)

    def _split(self, node: _Node) -> None:
        # Iteratively split oversized leaves; a leaf whose points all sit
        # at one distance from the vantage cannot make progress and is
        # kept oversized.
        dist = self._distance
        pts = self._points
        stack = [node]
        while stack:
            leaf = stack.pop()
            bucket = leaf.bucket
            if len(bucket) <= self._capacity:
                continue
            vantage = bucket[len(bucket) // 2]
            rest = bucket[: len(bucket) // 2] + bucket[len(bucket) // 2 + 1:]
            vp = pts[vantage]
            pairs = sorted((dist(vp, pts[i]), i) for i in rest)
            mu = pairs[(len(pairs) - 1) // 2][0]
            inner = [i for d, i in pairs if d <= mu]
            outer = [i for d, i in pairs if d > mu]
            if not outer:
                continue
            leaf.vantage = vantage
            leaf.mu = mu
            leaf.inner = _Node(inner)
            leaf.outer = _Node(outer)
            leaf.bucket = None
            stack.append(leaf.inner)
            stack.append(leaf.outer)

    # -- queries ---------------------------------------------------------

    def query_nearest_set(self, x, tie_tolerance: float = 0.0) -> list[int]:
        if not self._pos_to_id:
            raise EmptyModelError("nearest-set query against an empty index")
        cache: dict[int, float] = {}
        dmin = self._find_min(x, cache)
        threshold = dmin if tie_tolerance == 0.0 else dmin * (1.0 + tie_tolerance)
        ids = self._collect(x, threshold, cache)
        positions = [self._id_to_pos[i] for i in ids]
        positions.sort()
        return positions

    def _dist_to(self, pid: int, x, cache: dict[int, float]) -> float:
        # Each point's distance is evaluated at most once per query.
        d = cache.get(pid)
        if d is None:
            d = self._distance(self._points[pid], x)
            cache[pid] = d
        return d

    def _find_min(self, x, cache) -> float:
        best = math.inf
        alive = self._alive
        # Entries: (node, parent vantage distance, parent mu, side); the
        # prune test reruns at pop time against the tightened bound.
        stack = [(self._root, 0.0, 0.0, 0)]
        while stack:
            node, dv, mu, side = stack.pop()
            if side == 1 and dv > (mu + best) * (1.0 + _PRUNE_SLACK):
                continue
            if side == 2 and dv < (mu - best) * (1.0 - _PRUNE_SLACK):
                continue
            if node.bucket is not None:
                for pid in node.bucket:
                    if alive[pid]:
                        d = self._dist_to(pid, x, cache)
                        if d < best:
                            best = d
                continue
            dv = self._dist_to(node.vantage, x, cache)
            if alive[node.vantage] and dv < best:
                best = dv
            mu = node.mu
            near_inner = dv <= mu
            # Far child first so the near child pops first and shrinks best.
            if near_inner:
                stack.append((node.outer, dv, mu, 2))
                stack.append((node.inner, dv, mu, 1))
            else:
                stack.append((node.inner, dv, mu, 1))
                stack.append((node.outer, dv, mu, 2))
        return best

    def _collect(self, x, threshold: float, cache) -> list[int]:
        out = []
        alive = self._alive
        stack = [self._root]
        while stack:
            node = stack.pop()
            if node.bucket is not None:
                for pid in node.bucket:
                    if alive[pid] and self._dist_to(pid, x, cache) <= threshold:
                        out.append(pid)
                continue
            dv = self._dist_to(node.vantage, x, cache)
            if alive[node.vantage] and dv <= threshold:
                out.append(node.vantage)
            mu = node.mu
            if dv <= (mu + threshold) * (1.0 + _PRUNE_SLACK):
                stack.append(node.inner)
            if dv >= (mu - threshold) * (1.0 - _PRUNE_SLACK):
                stack.append(node.outer)
        return out


def build_index(points, metric: MetricDescriptor, kind: str,
                leaf_capacity: int = _DEFAULT_LEAF_CAPACITY):
    """Construct a backend over a nonempty point sequence."""
    points = list(points)
    if not points:
        raise EmptyModelError("cannot build an index over zero points")
    if kind == "linear":
        return LinearScanIndex(metric, points)
    if kind == "vptree":
        return VpTreeIndex(metric, points, leaf_capacity=leaf_capacity)
    raise ValueError(f"unknown index kind {kind!r}; expected one of {INDEX_KINDS}")

"""Classical set-cover solvers: exact branch-and-bound and greedy."""

import time

from lidar_cover.errors import InfeasibleError, ValidationError
from lidar_cover.graph import Solution


def _require_feasible(graph):
    bad = graph.uncoverable()
    if bad:
        raise InfeasibleError(f"uncoverable street points: {bad}", street_ids=bad)


def _masks(graph):
    masks = [0] * graph.num_lidars
    for s, ns in enumerate(graph.neighbors):
        for l in ns:
            masks[l] |= 1 << s
    return masks


def solve_greedy(graph):
    """Repeatedly activate the mount covering the most uncovered points."""
    _require_feasible(graph)
    masks = _masks(graph)
    remaining = (1 << graph.num_streets) - 1
    active = []
    while remaining:
        best, best_gain = -1, 0
        for l, m in enumerate(masks):
            gain = (m & remaining).bit_count()
            if gain > best_gain:
                best, best_gain = l, gain
        active.append(best)
        remaining &= ~masks[best]
    return Solution.from_active(graph, active)


class _BranchAndBound:
    def __init__(self, graph, deadline):
        self.masks = _masks(graph)
        self.n_streets = graph.num_streets
        # per street point, bitmask of mounts covering it
        self.covers = [sum(1 << l for l in ns) for ns in graph.neighbors]
        self.deadline = deadline
        self.timed_out = False
        self.nodes = 0
        self.best = None

    def lower_bound(self, remaining, allowed):
        """max(ceil(|remaining| / max degree), size of a disjoint point packing)."""
        n_rem = remaining.bit_count()
        if n_rem == 0:
            return 0
        max_deg = 0
        m = allowed
        while m:
            low = m & -m
            l = low.bit_length() - 1
            d = (self.masks[l] & remaining).bit_count()
            if d > max_deg:
                max_deg = d
            m ^= low
        if max_deg == 0:
            return None
        degree_bound = -(-n_rem // max_deg)
        # points whose candidate sets are pairwise disjoint each need their own mount
        used = 0
        packing = 0
        r = remaining
        while r:
            low = r & -r
            s = low.bit_length() - 1
            cand = self.covers[s] & allowed
            if cand == 0:
                return None
            if cand & used == 0:
                used |= cand
                packing += 1
            r ^= low
        return max(degree_bound, packing)

    def search(self, chosen, remaining, allowed):
        self.nodes += 1
        if self.nodes % 256 == 0 and time.monotonic() > self.deadline:
            self.timed_out = True
        if self.timed_out:
            return
        if remaining == 0:
            if self.best is None or len(chosen) < len(self.best):
                self.best = list(chosen)
            return
        lb = self.lower_bound(remaining, allowed)
        if lb is None or len(chosen) + lb >= len(self.best):
            return
        # a point with a single remaining candidate forces that mount
        r = remaining
        while r:
            low = r & -r
            s = low.bit_length() - 1
            cand = self.covers[s] & allowed
            if cand & (cand - 1) == 0:
                l = cand.bit_length() - 1
                chosen.append(l)
                self.search(chosen, remaining & ~self.masks[l], allowed & ~(1 << l))
                chosen.pop()
                return
            r ^= low
        # branch on the undecided mount covering most remaining points, lowest id on ties
        best_l, best_d = -1, 0
        m = allowed
        while m:
            low = m & -m
            l = low.bit_length() - 1
            d = (self.masks[l] & remaining).bit_count()
            if d > best_d:
                best_l, best_d = l, d
            m ^= low
        chosen.append(best_l)
        self.search(chosen, remaining & ~self.masks[best_l], allowed & ~(1 << best_l))
        chosen.pop()
        self.search(chosen, remaining, allowed & ~(1 << best_l))


def solve_exact(graph, time_limit=60.0):
    """Minimum set cover by depth-first branch-and-bound.

    The greedy cover seeds the incumbent. If ``time_limit`` seconds pass
    before the search completes, the incumbent is returned with
    ``proven=False``.
    """
    if not time_limit > 0:
        raise ValidationError(f"must be > 0, got {time_limit!r}", field="time_limit")
    _require_feasible(graph)
    greedy = solve_greedy(graph)
    bb = _BranchAndBound(graph, time.monotonic() + time_limit)
    bb.best = list(greedy.active_lidars)
    remaining = (1 << graph.num_streets) - 1
    # mounts covering nothing never help
    allowed = sum(1 << l for l, m in enumerate(bb.masks) if m)
    bb.search([], remaining, allowed)
    return Solution.from_active(graph, bb.best, proven=not bb.timed_out)


def best_feasible(samples):
    """Feasible read with the fewest active sensors, or None.

    Ties go to the lower energy, then the lower read index.
    """
    feasible = [r for r in samples.records if r.feasible]
    if not feasible:
        return None
    best = min(feasible, key=lambda r: (r.objective, r.energy, r.read))
    return samples.solution(best)

"""Gallery adjacency on (k+1)-simplices, distances, and filling numbers.

A gallery is a sequence of (k+1)-simplices in which consecutive members share
exactly k+1 vertices (a common k-face); its length counts the simplices. The
distance between two k-simplices is the minimal length of a gallery whose
first member contains one and whose last member contains the other; the empty
gallery connects a simplex to itself, so the self-distance is 0.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

from .complexes import DegreeError, MissingSimplexError, SimplicialComplex

__all__ = [
    "FillResult",
    "GalleryGraph",
    "GalleryLinkReport",
    "UnfillableError",
    "fill_number",
    "gallery_ball_sizes",
    "gallery_distance",
    "gallery_distances_from",
    "gallery_link_report",
    "is_gallery_connected",
]

DEFAULT_FILL_BUDGET = 10_000_000
INF = math.inf


class UnfillableError(ValueError):
    """Some pair of the face set cannot be joined by any gallery."""


class GalleryGraph:
    """Adjacency among (k+1)-simplices sharing a k-face, plus face stars."""

    def __init__(self, complex_: SimplicialComplex, k: int):
        if k < 0 or k > complex_.dim:
            raise DegreeError(f"degree {k} outside 0..{complex_.dim}")
        self.complex = complex_
        self.k = k
        self.nodes = complex_.simplices(k + 1)
        adjacency = [set() for _ in self.nodes]
        for i in range(complex_.simplex_count(k)):
            star = complex_.coface_indices(k, i)
            for a, b in combinations(star, 2):
                adjacency[a].add(b)
                adjacency[b].add(a)
        self.adjacency = [sorted(s) for s in adjacency]
        self.components = self._component_labels()

    def _component_labels(self) -> list[int]:
        labels = [-1] * len(self.nodes)
        current = 0
        for start in range(len(self.nodes)):
            if labels[start] != -1:
                continue
            queue = deque([start])
            labels[start] = current
            while queue:
                v = queue.popleft()
                for w in self.adjacency[v]:
                    if labels[w] == -1:
                        labels[w] = current
                        queue.append(w)
            current += 1
        return labels

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def star_indices(self, simplex) -> list[int]:
        """(k+1)-simplex indices containing the given k-simplex."""
        s = tuple(sorted(simplex))
        if len(s) != self.k + 1:
            raise DegreeError(f"{s!r} is not a {self.k}-simplex")
        i = self.complex.index_of(s)
        return self.complex.coface_indices(self.k, i)

    def node_distances_from(self, sources) -> list[float]:
        """BFS node-count distance: a source costs 1, each step adds 1."""
        dist = [INF] * len(self.nodes)
        queue = deque()
        for v in sources:
            if dist[v] == INF:
                dist[v] = 1
                queue.append(v)
        while queue:
            v = queue.popleft()
            for w in self.adjacency[v]:
                if dist[w] == INF:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    def shortest_gallery(self, sources, targets) -> list[int] | None:
        """Node list of a shortest gallery from a star to a star, or None."""
        target_set = set(targets)
        parent = {}
        queue = deque()
        for v in sources:
            if v not in parent:
                parent[v] = -1
                queue.append(v)
                if v in target_set:
                    return [v]
        while queue:
            v = queue.popleft()
            for w in self.adjacency[v]:
                if w not in parent:
                    parent[w] = v
                    if w in target_set:
                        path = [w]
                        while parent[path[-1]] != -1:
                            path.append(parent[path[-1]])
                        return path[::-1]
                    queue.append(w)
        return None


def gallery_distance(
    complex_: SimplicialComplex, eta0, eta1, *, graph: GalleryGraph | None = None
):
    """Minimal gallery length joining two k-simplices; inf when none exists."""
    s0 = tuple(sorted(eta0))
    s1 = tuple(sorted(eta1))
    if len(s0) != len(s1):
        raise DegreeError("both simplices must have the same dimension")
    complex_.index_of(s0)
    complex_.index_of(s1)
    if s0 == s1:
        return 0
    k = len(s0) - 1
    if graph is None:
        graph = GalleryGraph(complex_, k)
    sources = graph.star_indices(s0)
    targets = graph.star_indices(s1)
    if not sources or not targets:
        return INF
    if graph.components[sources[0]] != graph.components[targets[0]]:
        return INF
    path = graph.shortest_gallery(sources, targets)
    return len(path) if path is not None else INF


def is_gallery_connected(
    complex_: SimplicialComplex, k: int, *, graph: GalleryGraph | None = None
) -> bool:
    """True iff every pair of k-simplices is joined by a (k+1)-gallery.

    Requires every k-simplex to lie in some (k+1)-simplex (the quantifier
    includes a simplex paired with itself) and the gallery graph connected.
    """
    if k < 0 or k > complex_.dim:
        raise DegreeError(f"degree {k} outside 0..{complex_.dim}")
    if graph is None:
        graph = GalleryGraph(complex_, k)
    if complex_.simplex_count(k + 1) == 0:
        return False
    for i in range(complex_.simplex_count(k)):
        if not complex_.coface_indices(k, i):
            return False
    return len(set(graph.components)) <= 1


def gallery_distances_from(
    complex_: SimplicialComplex, tau, *, graph: GalleryGraph | None = None
) -> dict[tuple, float]:
    """Gallery distances from one k-simplex to every k-simplex."""
    s = tuple(sorted(tau))
    k = len(s) - 1
    if graph is None:
        graph = GalleryGraph(complex_, k)
    node_dist = graph.node_distances_from(graph.star_indices(s))
    out = {}
    for i, eta in enumerate(complex_.simplices(k)):
        if eta == s:
            out[eta] = 0
            continue
        star = complex_.coface_indices(k, i)
        best = min((node_dist[v] for v in star), default=INF)
        out[eta] = best
    return out


def gallery_ball_sizes(
    complex_: SimplicialComplex, tau, r_max: int, *, graph: GalleryGraph | None = None
) -> list[int]:
    """|B(tau, r)| for r = 0..r_max under the gallery distance."""
    dists = gallery_distances_from(complex_, tau, graph=graph)
    return [sum(1 for d in dists.values() if d <= r) for r in range(r_max + 1)]


@dataclass
class FillResult:
    """Bounds (and, when the search closes, the exact value) of a filling number."""

    lower: int
    upper: int
    exact: int | None
    witness: tuple[tuple[int, ...], ...] | None
    budget_exhausted: bool = False
    states_visited: int = 0

    def to_dict(self, complex_: SimplicialComplex | None = None) -> dict:
        witness = None
        if self.witness is not None:
            witness = [
                [int(v) for v in (complex_.to_labels(s) if complex_ else s)]
                for s in self.witness
            ]
        return {
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
            "witness": witness,
            "budget_exhausted": self.budget_exhausted,
            "states_visited": self.states_visited,
        }


class _BudgetExceeded(Exception):
    pass


def _coverage_masks(num_nodes: int, stars) -> dict[int, int]:
    """face-membership bitmask of every node that contains some face."""
    masks: dict[int, int] = {}
    for i, star in enumerate(stars):
        bit = 1 << i
        for v in star:
            masks[v] = masks.get(v, 0) | bit
    return masks


def _min_cover_table(mask_pool, num_faces: int) -> list[int]:
    """table[state] = fewest masks from the pool whose union covers `state`.

    num_faces <= s stays tiny, so the 2^s dynamic program is exact.
    """
    full = 1 << num_faces
    table = [0] + [math.inf] * (full - 1)
    pool = sorted(set(mask_pool), reverse=True)
    for state in range(1, full):
        best = math.inf
        for mask in pool:
            if mask & state:
                candidate = table[state & ~mask] + 1
                if candidate < best:
                    best = candidate
        table[state] = best
    return table


def _best_cone_filling(complex_, graph, face_set, stars):
    """Smallest valid cone filling (all faces joined to one extra vertex).

    Returns node indices or None. Validity (every pair joined inside the
    cone) is re-checked with a union-find, so arbitrary face sets are safe.
    """
    k = len(face_set[0]) - 1
    best = None
    star_sets = [set(s) for s in stars]
    for w in range(complex_.num_vertices):
        cone = set()
        for f in face_set:
            if w in f:
                cone = None
                break
            joined = tuple(sorted(f + (w,)))
            if not complex_.contains(joined):
                cone = None
                break
            cone.add(complex_.index_of(joined))
        if cone is None or (best is not None and len(cone) >= len(best)):
            continue
        if _connects_all_pairs(graph, cone, star_sets):
            best = cone
    return best


def _connects_all_pairs(graph, subset, star_sets):
    subset = set(subset)
    parent = {v: v for v in subset}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for v in subset:
        for w in graph.adjacency[v]:
            if w in subset:
                parent[find(v)] = find(w)
    roots = [{find(v) for v in subset & star} for star in star_sets]
    return all(a & b for a, b in combinations(roots, 2))


def fill_number(
    complex_: SimplicialComplex,
    faces,
    *,
    budget: int = DEFAULT_FILL_BUDGET,
    graph: GalleryGraph | None = None,
) -> FillResult:
    """Minimal number of (k+1)-simplices gallery-connecting every pair of faces.

    ``lower`` is the best proven lower bound (at least the largest pairwise
    gallery distance, and at least the minimal face cover); ``upper`` comes
    from explicit fillings (a union of one shortest gallery per pair, or a
    cone). The exact value comes from an iterative-deepening subset search
    between the two; the search is only attempted while its estimated state
    space fits the budget, and bounds are returned once the budget is
    exhausted.
    """
    face_set = sorted({tuple(sorted(f)) for f in faces})
    if len({len(f) for f in face_set}) > 1:
        raise DegreeError("faces must share one dimension")
    for f in face_set:
        complex_.index_of(f)
    if len(face_set) <= 1:
        return FillResult(0, 0, 0, ())
    k = len(face_set[0]) - 1
    if graph is None:
        graph = GalleryGraph(complex_, k)

    stars = []
    for f in face_set:
        star = graph.star_indices(f)
        if not star:
            raise UnfillableError(f"{f!r} lies in no ({k + 1})-simplex")
        stars.append(star)

    # One simplex containing every face settles it immediately.
    common = set(stars[0])
    for star in stars[1:]:
        common &= set(star)
        if not common:
            break
    if common:
        witness = (graph.nodes[min(common)],)
        return FillResult(1, 1, 1, witness)

    # any filling covers every face, so the minimal face cover bounds it
    # below; the 2^|S| table only pays off while |S| is small
    use_cover = len(face_set) <= 12
    cover_masks = _coverage_masks(graph.num_nodes, stars) if use_cover else None
    lower = 1
    cone = None
    if use_cover:
        cover_table = _min_cover_table(set(cover_masks.values()), len(face_set))
        lower = max(lower, cover_table[(1 << len(face_set)) - 1])
        # a cone (every face joined to one common vertex) matching the cover
        # bound settles the minimum without any search
        cone = _best_cone_filling(complex_, graph, face_set, stars)
        if cone is not None and len(cone) == lower:
            witness = tuple(graph.nodes[v] for v in sorted(cone))
            return FillResult(lower, lower, lower, witness)

    pair_indices = list(combinations(range(len(face_set)), 2))
    dist_from_star = [graph.node_distances_from(star) for star in stars]

    pair_paths = []
    for a, b in pair_indices:
        path = graph.shortest_gallery(stars[a], set(stars[b]))
        if path is None:
            raise UnfillableError(
                f"no gallery joins {face_set[a]!r} and {face_set[b]!r}"
            )
        lower = max(lower, len(path))
        pair_paths.append(path)

    union_nodes = sorted({v for path in pair_paths for v in path})
    if cone is not None and len(cone) < len(union_nodes):
        union_nodes = sorted(cone)  # the cone is the smaller known filling
    upper = len(union_nodes)
    if lower == upper:
        witness = tuple(graph.nodes[v] for v in union_nodes)
        return FillResult(lower, upper, lower, witness)

    searcher = _FillSearch(
        graph, stars, pair_indices, dist_from_star, budget, cover_masks
    )
    exact, witness_ids, exhausted, states, proven_lower = searcher.run(lower, upper)
    lower = max(lower, proven_lower)
    if exact is None and not exhausted:
        # every depth below `upper` was searched exhaustively
        exact = upper
        witness_ids = union_nodes
        lower = upper
    if exact is not None:
        witness = tuple(graph.nodes[v] for v in sorted(witness_ids))
        return FillResult(lower, upper, exact, witness, exhausted, states)
    return FillResult(lower, upper, None, None, True, states)


class _FillSearch:
    """Iterative-deepening branch and bound over subsets of the gallery graph.

    At depth t the candidate universe shrinks to nodes that can sit on a
    <=t-node path between some pair of stars (any inclusion-minimal filling
    lies inside it), subsets are enumerated in a fixed order so each is seen
    once, and a partial choice is pruned when its size plus the worst-pair
    connection deficit (a 0/1-BFS counting nodes outside the choice) exceeds t.
    """

    ESTIMATE_SLACK = 1000  # optimistic pruning factor for the size estimate

    def __init__(self, graph, stars, pair_indices, dist_from_star, budget,
                 cover_masks):
        self.graph = graph
        self.stars = [set(s) for s in stars]
        self.pairs = pair_indices
        self.dist = dist_from_star
        self.budget = budget
        self.cover_masks = cover_masks or {}
        self.full_mask = (1 << len(stars)) - 1 if cover_masks else 0
        self.states = 0

    def run(self, lower, upper):
        proven_lower = lower
        for depth in range(lower, upper):
            universe = self._universe(depth)
            estimate = math.comb(len(universe), min(depth, len(universe)))
            if estimate > self.budget * self.ESTIMATE_SLACK:
                return None, None, True, self.states, proven_lower
            self._universe_set = set(universe)
            if self.full_mask:
                self._cover_table = _min_cover_table(
                    {self.cover_masks.get(v, 0) for v in universe} - {0},
                    len(self.stars),
                )
            else:
                self._cover_table = [0]
            try:
                found = self._dfs([], 0, universe, depth, self.full_mask)
            except _BudgetExceeded:
                return None, None, True, self.states, proven_lower
            if found is not None:
                return len(found), found, False, self.states, proven_lower
            proven_lower = depth + 1
        return None, None, False, self.states, proven_lower

    def _universe(self, depth):
        nodes = []
        for v in range(self.graph.num_nodes):
            best = min(
                self.dist[a][v] + self.dist[b][v] - 1 for a, b in self.pairs
            )
            if best <= depth:
                nodes.append(v)
        # fixed heuristic order: most central first
        nodes.sort(
            key=lambda v: min(
                self.dist[a][v] + self.dist[b][v] for a, b in self.pairs
            )
        )
        return nodes

    def _unconnected_pairs(self, chosen):
        if not chosen:
            return list(self.pairs)
        parent = {v: v for v in chosen}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        adjacency = self.graph.adjacency
        chosen_set = set(chosen)
        for v in chosen:
            for w in adjacency[v]:
                if w in chosen_set:
                    parent[find(v)] = find(w)
        roots = [
            {find(v) for v in chosen_set & star} for star in self.stars
        ]
        return [(a, b) for a, b in self.pairs if not (roots[a] & roots[b])]

    def _connection_deficit(self, pair, chosen_set):
        """Fewest nodes outside `chosen_set` on any universe path for the pair."""
        a, b = pair
        universe = self._universe_set
        cost = {}
        queue = deque()
        for v in self.stars[a]:
            if v in universe:
                c = 0 if v in chosen_set else 1
                cost[v] = c
                if c == 0:
                    queue.appendleft(v)
                else:
                    queue.append(v)
        while queue:
            v = queue.popleft()
            base = cost[v]
            for w in self.graph.adjacency[v]:
                if w not in universe:
                    continue
                c = base + (0 if w in chosen_set else 1)
                if c < cost.get(w, math.inf):
                    cost[w] = c
                    if c == base:
                        queue.appendleft(w)
                    else:
                        queue.append(w)
        return min(
            (cost[v] for v in self.stars[b] if v in cost), default=math.inf
        )

    def _dfs(self, chosen, start, universe, depth, uncovered):
        self.states += 1
        if self.states > self.budget:
            raise _BudgetExceeded
        unconnected = self._unconnected_pairs(chosen)
        if not unconnected:
            return list(chosen)
        if len(chosen) == depth:
            return None
        # cheap cover prune first, 0/1-BFS connection prune only if it survives
        if len(chosen) + self._cover_table[uncovered] > depth:
            return None
        chosen_set = set(chosen)
        deficit = max(
            self._connection_deficit(pair, chosen_set) for pair in unconnected
        )
        if len(chosen) + deficit > depth:
            return None
        for i in range(start, len(universe)):
            node = universe[i]
            chosen.append(node)
            still = uncovered & ~self.cover_masks.get(node, 0)
            found = self._dfs(chosen, i + 1, universe, depth, still)
            if found is not None:
                return found
            chosen.pop()
        return None


@dataclass
class GalleryLinkReport:
    """Checks tying link connectivity to gallery connectivity on one complex.

    Local criterion: two k-simplices meeting in a (k-1)-simplex with a
    connected link are joined by a gallery. Inductive criterion: k-gallery
    connectivity plus connected (k-1)-links imply (k+1)-gallery connectivity.
    """

    k: int
    local_pairs_checked: int = 0
    local_vacuous_pairs: int = 0
    local_holds: bool = True
    local_counterexample: tuple | None = None
    inductive_hypotheses_met: bool = False
    inductive_conclusion: bool = False
    details: dict = field(default_factory=dict)

    @property
    def inductive_holds(self) -> bool:
        return (not self.inductive_hypotheses_met) or self.inductive_conclusion

    @property
    def passed(self) -> bool:
        return self.local_holds and self.inductive_holds

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "local_pairs_checked": self.local_pairs_checked,
            "local_vacuous_pairs": self.local_vacuous_pairs,
            "local_holds": self.local_holds,
            "local_counterexample": (
                None
                if self.local_counterexample is None
                else [list(s) for s in self.local_counterexample]
            ),
            "inductive_hypotheses_met": self.inductive_hypotheses_met,
            "inductive_conclusion": self.inductive_conclusion,
            "inductive_holds": self.inductive_holds,
            "passed": self.passed,
        }


def _link_graph_connected(link_complex: SimplicialComplex) -> bool:
    n = link_complex.simplex_count(0)
    if n <= 1:
        return True
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in link_complex.simplices(1):
        parent[find(a)] = find(b)
    return len({find(v) for v in range(n)}) == 1


def gallery_link_report(complex_: SimplicialComplex, k: int) -> GalleryLinkReport:
    """Verify the link-connectivity criteria for gallery connectivity at level k."""
    if k < 1 or k > complex_.dim - 1:
        raise DegreeError(f"degree {k} outside 1..{complex_.dim - 1}")
    report = GalleryLinkReport(k=k)
    graph = GalleryGraph(complex_, k)

    all_links_connected = True
    for tau in complex_.simplices(k - 1):
        link_complex = complex_.link(tau)
        connected = _link_graph_connected(link_complex)
        n_link_vertices = link_complex.simplex_count(0)
        if n_link_vertices == 0 or not connected:
            all_links_connected = False
        link_vertex_ids = [
            complex_.from_labels((link_complex.labels[v],))[0]
            for (v,) in link_complex.simplices(0)
        ]
        for u0, u1 in combinations(link_vertex_ids, 2):
            eta0 = tuple(sorted(tau + (u0,)))
            eta1 = tuple(sorted(tau + (u1,)))
            if not connected:
                report.local_vacuous_pairs += 1
                continue
            report.local_pairs_checked += 1
            if gallery_distance(complex_, eta0, eta1, graph=graph) == INF:
                report.local_holds = False
                if report.local_counterexample is None:
                    report.local_counterexample = (eta0, eta1)

    lower_connected = is_gallery_connected(complex_, k - 1)
    report.inductive_hypotheses_met = lower_connected and all_links_connected
    report.inductive_conclusion = is_gallery_connected(complex_, k, graph=graph)
    report.details = {
        "lower_gallery_connected": lower_connected,
        "all_links_connected": all_links_connected,
    }
    return report

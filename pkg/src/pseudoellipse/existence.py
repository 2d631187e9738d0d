"""
Existence of transversal maps P^n_p -> P^N_q and their admissible patterns.

A map exists iff some subset K of the weakly pseudoconvex target indices
can be assigned to source indices, q_k | p_sigma(k), covering at least
n - s source indices. Covering is a matching question: the bipartite graph
joins target index k to source index i when q_k divides p_i, and a pattern
exists iff its maximum matching has size >= n - s.

When it does not, the alternating-path search from unmatched source
vertices yields a set S of source indices whose neighbourhood is too
small (|N(S)| + s < |S|). That set is the certificate.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .errors import PatternError
from .model import ProblemInstance

log = logging.getLogger(__name__)

DEFAULT_LIMIT = 1000

_FREE = -1


@dataclass(frozen=True)
class DivisibilityGraph:
    """Left: weak target indices; right: source indices; k ~ i iff q_k | p_i."""
    inst: ProblemInstance
    left: tuple[int, ...]
    right: tuple[int, ...]
    adjacency: dict[int, tuple[int, ...]] = field(compare=False)

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset((k, i) for k, nbrs in self.adjacency.items() for i in nbrs)

    def neighbours_of_source(self, i: int) -> tuple[int, ...]:
        return tuple(k for k in self.left if i in self.adjacency[k])


def build_graph(inst: ProblemInstance) -> DivisibilityGraph:
    p, q = inst.p, inst.q
    left = tuple(inst.target.weak_indices)
    adjacency = {k: tuple(i for i in range(inst.n) if p[i] % q[k] == 0) for k in left}
    return DivisibilityGraph(inst, left, tuple(range(inst.n)), adjacency)


class HopcroftKarp:
    """Maximum matching by shortest augmenting phases.

    Left vertices are visited in graph order and neighbours in ascending
    order, so the result is deterministic.
    """

    def __init__(self, graph: DivisibilityGraph):
        self.graph = graph
        self.pair_left: dict[int, int] = {}
        self.pair_right: dict[int, int] = {}
        self.dist: dict[int, int] = {}
        self._reference = _FREE

    def _bfs(self) -> bool:
        queue: deque[int] = deque()
        for k in self.graph.left:
            if k not in self.pair_left:
                self.dist[k] = 0
                queue.append(k)
            else:
                self.dist[k] = _FREE
        self._reference = _FREE
        while queue:
            k = queue.popleft()
            if self._reference != _FREE and self.dist[k] >= self._reference:
                continue
            for i in self.graph.adjacency[k]:
                other = self.pair_right.get(i)
                if other is None:
                    if self._reference == _FREE:
                        self._reference = self.dist[k] + 1
                elif self.dist[other] == _FREE:
                    self.dist[other] = self.dist[k] + 1
                    queue.append(other)
        return self._reference != _FREE

    def _dfs(self, k: int) -> bool:
        for i in self.graph.adjacency[k]:
            other = self.pair_right.get(i)
            if other is None:
                if self._reference == self.dist[k] + 1:
                    self.pair_left[k], self.pair_right[i] = i, k
                    return True
            elif self.dist[other] == self.dist[k] + 1 and self._dfs(other):
                self.pair_left[k], self.pair_right[i] = i, k
                return True
        self.dist[k] = _FREE
        return False

    def run(self) -> dict[int, int]:
        self.pair_left.clear()
        self.pair_right.clear()
        rounds = 0
        while self._bfs():
            rounds += 1
            for k in self.graph.left:
                if k not in self.pair_left:
                    self._dfs(k)
        log.debug("matching of size %d after %d phases", len(self.pair_left), rounds)
        return dict(sorted(self.pair_left.items()))


def max_matching(g: DivisibilityGraph) -> dict[int, int]:
    """Maximum matching as {target index: source index}."""
    return HopcroftKarp(g).run()


@dataclass(frozen=True)
class AdmissiblePattern:
    """The pair (K, sigma): ``K`` sorted weak target indices, ``sigma[t]`` the source of ``K[t]``."""
    K: tuple[int, ...]
    sigma: tuple[int, ...]

    @classmethod
    def from_mapping(cls, mapping: dict[int, int]) -> "AdmissiblePattern":
        keys = tuple(sorted(mapping))
        return cls(keys, tuple(mapping[k] for k in keys))

    @property
    def mapping(self) -> dict[int, int]:
        return dict(zip(self.K, self.sigma))

    @property
    def image(self) -> frozenset[int]:
        return frozenset(self.sigma)

    def is_injective(self) -> bool:
        return len(self.image) == len(self.sigma)

    def preimage(self, i: int) -> tuple[int, ...]:
        return tuple(k for k, t in zip(self.K, self.sigma) if t == i)

    def restrict(self, keep) -> "AdmissiblePattern":
        keep = set(keep)
        return AdmissiblePattern.from_mapping({k: i for k, i in self.mapping.items() if k in keep})

    def violations(self, inst: ProblemInstance) -> list[str]:
        out = []
        if len(self.K) != len(self.sigma):
            return ["K and sigma have different lengths"]
        if list(self.K) != sorted(set(self.K)):
            out.append("K must be strictly increasing")
        for k, i in zip(self.K, self.sigma):
            if not inst.s <= k < inst.N:
                out.append(f"target index {k + 1} is not weakly pseudoconvex")
                continue
            if not 0 <= i < inst.n:
                out.append(f"source index {i + 1} out of range")
                continue
            if inst.p[i] % inst.q[k] != 0:
                out.append(f"q_{k + 1}={inst.q[k]} does not divide p_{i + 1}={inst.p[i]}")
        if len(self.image) < inst.n - inst.s:
            out.append(f"sigma covers {len(self.image)} source indices, needs {inst.n - inst.s}")
        return out

    def check(self, inst: ProblemInstance) -> "AdmissiblePattern":
        problems = self.violations(inst)
        if problems:
            raise PatternError("; ".join(problems))
        return self

    def is_admissible(self, inst: ProblemInstance) -> bool:
        return not self.violations(inst)


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """Source indices S whose divisibility neighbourhood N(S) has |N(S)| + s < |S|."""
    violating_set: tuple[int, ...]
    neighbourhood: tuple[int, ...]
    s: int
    matching_size: int

    @property
    def deficiency(self) -> int:
        return len(self.violating_set) - len(self.neighbourhood)


def verify_certificate(inst: ProblemInstance, cert: InfeasibilityCertificate) -> bool:
    """Recompute N(S) from the divisibility relation and check the bound."""
    S = set(cert.violating_set)
    if not S <= set(range(inst.n)):
        return False
    nbhd = {k for k in inst.target.weak_indices if any(inst.p[i] % inst.q[k] == 0 for i in S)}
    return len(nbhd) + inst.s < len(S)


def hall_certificate(g: DivisibilityGraph, matching: dict[int, int]) -> InfeasibilityCertificate:
    """Alternating BFS from unmatched source vertices of a maximum matching."""
    matched_source = {i: k for k, i in matching.items()}
    reached_src = [i for i in g.right if i not in matched_source]
    seen_src = set(reached_src)
    seen_tgt: set[int] = set()
    queue = deque(reached_src)
    while queue:
        i = queue.popleft()
        for k in g.neighbours_of_source(i):
            if k in seen_tgt:
                continue
            seen_tgt.add(k)
            j = matching.get(k)
            if j is not None and j not in seen_src:
                seen_src.add(j)
                queue.append(j)
    return InfeasibilityCertificate(tuple(sorted(seen_src)), tuple(sorted(seen_tgt)),
                                    g.inst.s, len(matching))


@dataclass(frozen=True)
class ExistenceResult:
    """``witness`` is the first pattern in enumeration order, so the smallest K."""
    exists: bool
    witness: AdmissiblePattern | None = None
    certificate: InfeasibilityCertificate | None = None
    matching_size: int = 0


def maps_exist(inst: ProblemInstance) -> ExistenceResult:
    inst.require_classifiable()
    g = build_graph(inst)
    matching = max_matching(g)
    needed = inst.n - inst.s
    if len(matching) >= needed:
        witness = next(enumerate_patterns(inst, 1))
        return ExistenceResult(True, witness=witness, matching_size=len(matching))
    cert = hall_certificate(g, matching)
    log.debug("no pattern: matching %d < %d, S=%s", len(matching), needed, cert.violating_set)
    return ExistenceResult(False, certificate=cert, matching_size=len(matching))


def enumerate_patterns(inst: ProblemInstance, limit: int = DEFAULT_LIMIT) -> Iterator[AdmissiblePattern]:
    """Admissible patterns ordered by |K|, then K, injective sigma first, then sigma.

    Stops after ``limit`` patterns.
    """
    inst.require_classifiable()
    if limit <= 0:
        return
    g = build_graph(inst)
    usable = [k for k in g.left if g.adjacency[k]]
    needed = inst.n - inst.s
    emitted = 0
    for size in range(max(0, needed), len(usable) + 1):
        for K in itertools.combinations(usable, size):
            found = []
            for sigma in itertools.product(*(g.adjacency[k] for k in K)):
                if len(set(sigma)) >= needed:
                    found.append((len(set(sigma)) != len(sigma), sigma))
            found.sort()
            for _, sigma in found:
                yield AdmissiblePattern(K, sigma)
                emitted += 1
                if emitted >= limit:
                    return

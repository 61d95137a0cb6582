"""Two-player safety games: on-the-fly arena exploration, linear-time solving
by backward attractor, positional strategy extraction, and DOT export.

Vertices are opaque hashable values; an owner function tags each as belonging
to In (the antagonist picking inputs) or Out (the protagonist picking
outputs). The bad set is implicit: Out vertices with no outgoing moves. In
vertices with no moves are terminal and safe (the maximal finite play never
left the safe region).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Optional, Sequence

OWNER_IN = "in"
OWNER_OUT = "out"

Vertex = Hashable


class BudgetError(RuntimeError):
    """The explored vertex count exceeded the configured cap."""


@dataclass(frozen=True)
class Budget:
    max_vertices: int = 1_000_000


@dataclass(frozen=True, eq=False)
class Move:
    label: str
    target: Vertex
    payload: Any = None


class Arena:
    """Lazy arena: successors are generated on demand and memoized, so only
    the reachable sub-arena is ever materialized."""

    def __init__(self, initial: Vertex, owner: Callable[[Vertex], str],
                 moves: Callable[[Vertex], Sequence[Move]],
                 budget: Budget = Budget()):
        self.initial = initial
        self._owner = owner
        self._moves = moves
        self.budget = budget
        self._succ: dict[Vertex, tuple[Move, ...]] = {}

    def owner(self, v: Vertex) -> str:
        return self._owner(v)

    def moves(self, v: Vertex) -> tuple[Move, ...]:
        got = self._succ.get(v)
        if got is None:
            got = tuple(self._moves(v))
            self._succ[v] = got
        return got


@dataclass
class SolveResult:
    reachable: frozenset
    bad: frozenset
    losing: frozenset          # vertices from which In can force a bad vertex
    strategy: dict             # winning Out vertex -> chosen Move
    rank: dict                 # losing vertex -> forced distance into the bad set

    @property
    def winning(self) -> frozenset:
        return self.reachable - self.losing

    def wins(self, v: Vertex) -> bool:
        return v in self.reachable and v not in self.losing


def explore(arena: Arena) -> tuple[list[Vertex], dict[Vertex, list[Vertex]]]:
    """Forward BFS from the initial vertex; returns vertices in discovery
    order and the predecessor map."""
    order: list[Vertex] = [arena.initial]
    seen = {arena.initial}
    preds: dict[Vertex, list[Vertex]] = {arena.initial: []}
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for m in arena.moves(v):
            if m.target not in seen:
                if len(seen) >= arena.budget.max_vertices:
                    raise BudgetError(
                        f"arena exploration exceeded {arena.budget.max_vertices} vertices")
                seen.add(m.target)
                order.append(m.target)
                preds[m.target] = []
            preds[m.target].append(v)
    return order, preds


def solve(arena: Arena) -> SolveResult:
    """Backward attractor on the reachable sub-arena.

    Losing (for Out) is the least set containing every dead Out vertex and
    closed under: In vertex with some losing successor; Out vertex with all
    successors losing. The rank of a losing vertex is the number of moves In
    needs to force a bad vertex, used for minimal counterexample traces.
    """
    order, preds = explore(arena)
    succ_count = {v: len(arena.moves(v)) for v in order}
    bad = {v for v in order if arena.owner(v) == OWNER_OUT and succ_count[v] == 0}

    losing: set[Vertex] = set(bad)
    rank: dict[Vertex, int] = {v: 0 for v in bad}
    pending = {v: succ_count[v] for v in order}
    queue = deque(bad)
    while queue:
        v = queue.popleft()
        for p in preds[v]:
            if p in losing:
                continue
            if arena.owner(p) == OWNER_IN:
                losing.add(p)
                rank[p] = rank[v] + 1
                queue.append(p)
            else:
                pending[p] -= 1
                if pending[p] == 0:
                    losing.add(p)
                    rank[p] = 1 + max(rank[m.target] for m in arena.moves(p))
                    queue.append(p)

    strategy: dict[Vertex, Move] = {}
    for v in order:
        if arena.owner(v) == OWNER_OUT and v not in losing:
            for m in arena.moves(v):
                if m.target not in losing:
                    strategy[v] = m
                    break
    return SolveResult(frozenset(order), frozenset(bad), frozenset(losing),
                       strategy, rank)


def counterexample(arena: Arena, result: SolveResult) -> list[tuple[Vertex, Optional[str]]]:
    """A minimal play In can force from the initial vertex into the bad set.

    At In vertices the rank strictly decreases; at losing Out vertices every
    move stays losing and the trace follows Out's longest evasion.
    """
    v = arena.initial
    if v not in result.losing:
        raise ValueError("initial vertex is winning for Out")
    play: list[tuple[Vertex, Optional[str]]] = []
    while v not in result.bad:
        moves = [m for m in arena.moves(v) if m.target in result.losing]
        if arena.owner(v) == OWNER_IN:
            m = min(moves, key=lambda m: result.rank[m.target])
        else:
            m = max(moves, key=lambda m: result.rank[m.target])
        play.append((v, m.label))
        v = m.target
    play.append((v, None))
    return play


@dataclass
class Play:
    steps: list[tuple[Vertex, Optional[str]]]
    hit_bad: bool


class StrategyGapError(RuntimeError):
    pass


def simulate(arena: Arena, result: SolveResult,
             adversary: Callable[[Vertex, Sequence[Move]], Optional[Move]],
             max_steps: int = 1000) -> Play:
    """Play the strategy against an adversary move chooser; flags bad hits."""
    v = arena.initial
    steps: list[tuple[Vertex, Optional[str]]] = []
    for _ in range(max_steps):
        if v in result.bad:
            steps.append((v, None))
            return Play(steps, True)
        moves = arena.moves(v)
        if arena.owner(v) == OWNER_OUT:
            m = result.strategy.get(v)
            if m is None:
                raise StrategyGapError(f"no strategy move at {v!r}")
        else:
            if not moves:
                steps.append((v, None))
                return Play(steps, False)
            m = adversary(v, moves)
            if m is None:
                steps.append((v, None))
                return Play(steps, False)
        steps.append((v, m.label))
        v = m.target
    steps.append((v, None))
    return Play(steps, v in result.bad)


def to_dot(arena: Arena, result: Optional[SolveResult] = None,
           name: str = "arena",
           label: Callable[[Vertex], str] = str) -> str:
    """DOT export of the reachable arena: boxes for In, rounded boxes for
    Out, bad vertices marked, strategy edges bold."""
    order, _ = explore(arena)
    ids = {v: f"v{i}" for i, v in enumerate(order)}
    lines = [f"digraph {name} {{", "  rankdir=TB;"]
    for v in order:
        shape = "box" if arena.owner(v) == OWNER_IN else "box, style=rounded"
        attrs = [f"label=\"{_dot_escape(label(v))}\"", f"shape={shape}"]
        if result is not None and v in result.bad:
            attrs = [f"label=\"{_dot_escape(label(v))}\"",
                     "shape=box, style=\"rounded,filled\"", "fillcolor=\"#ffcccc\""]
        lines.append(f"  {ids[v]} [{', '.join(attrs)}];")
    for v in order:
        chosen = result.strategy.get(v) if result is not None else None
        for m in arena.moves(v):
            attrs = [f"label=\"{_dot_escape(m.label)}\""]
            if chosen is not None and m is chosen:
                attrs.append("style=bold, penwidth=2")
            lines.append(f"  {ids[v]} -> {ids[m.target]} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')

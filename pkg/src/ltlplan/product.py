"""Product of a transition system with a Büchi automaton, and planning.

Product states pair a system state with an automaton state; an edge
exists when the system can move and the automaton has a transition whose
guard is satisfied by the *target* system state's labels.  Plans are
lassos through the product: a prefix to an accepting state plus a cycle
back to it, or just a prefix ending in a "stoppable" state — one whose
automaton state can accept while only empty label sets are read from
then on, which models the agent parking after the last task.
``find_plan`` returns a plan with the minimum number of policies.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .ltl import BuchiAutomaton, empty_word_accepting_states
from .tsys import TransitionSystem, sort_symbols

PAState = tuple[int, str]


@dataclass
class ProductAutomaton:
    """Reachable product with deterministic state and edge ordering."""

    states: list[PAState]
    initial: list[PAState]
    accepting: frozenset[PAState]
    stoppable: frozenset[PAState]
    edges: dict[tuple[PAState, PAState], list[str]]
    successors: dict[PAState, list[PAState]]
    ts_names: dict[int, str]

    def state_name(self, state: PAState) -> str:
        return f"{self.ts_names[state[0]]}|{state[1]}"

    def to_document(self) -> dict:
        return {
            "states": [self.state_name(s) for s in self.states],
            "initial": [self.state_name(s) for s in self.initial],
            "accepting": [
                self.state_name(s) for s in self.states if s in self.accepting
            ],
            "stoppable": [
                self.state_name(s) for s in self.states if s in self.stoppable
            ],
            "transitions": [
                {
                    "from": self.state_name(src),
                    "to": self.state_name(dst),
                    "symbols": list(self.edges[(src, dst)]),
                }
                for src in self.states
                for dst in self.successors[src]
            ],
        }

    def to_dot(self) -> str:
        lines = ["digraph product {", "  rankdir=LR;", "  node [shape=circle];"]
        ids = {state: f"s{i}" for i, state in enumerate(self.states)}
        for state in self.states:
            shape = " peripheries=2" if state in self.accepting else ""
            lines.append(f'  {ids[state]} [label="{self.state_name(state)}"{shape}];')
        for src in self.states:
            for dst in self.successors[src]:
                label = ",".join(self.edges[(src, dst)])
                lines.append(f'  {ids[src]} -> {ids[dst]} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_product(ts: TransitionSystem, aut: BuchiAutomaton) -> ProductAutomaton:
    """Reachable synchronous product, explored in deterministic order."""
    known = frozenset().union(*ts.labels.values()) if ts.labels else frozenset()
    for guard in aut.transitions.values():
        for clause in guard.clauses:
            for name, _ in clause:
                if name not in known:
                    raise ValueError(
                        f"guard references symbol {name!r} absent from the transition system"
                    )

    buchi_index = {state: i for i, state in enumerate(aut.order)}
    ts_index = {state: i for i, state in enumerate(ts.order)}

    initial: list[PAState] = []
    for dst, guard in aut.successors(aut.initial):
        if guard.satisfied_by(ts.labels[ts.initial]):
            state = (ts.initial, dst)
            if state not in initial:
                initial.append(state)

    states: list[PAState] = []
    seen: set[PAState] = set(initial)
    queue = deque(initial)
    edges: dict[tuple[PAState, PAState], list[str]] = {}
    successors: dict[PAState, list[PAState]] = {}
    while queue:
        src = queue.popleft()
        states.append(src)
        s, q = src
        out: list[PAState] = []
        moves = [
            (ts_index[t], t, ts.transitions[(s, t)]) for (_, t) in ts.out_edges(s)
        ]
        hops = sorted(
            ((dst, guard) for dst, guard in aut.successors(q)),
            key=lambda item: buchi_index[item[0]],
        )
        for _, t, symbols in sorted(moves, key=lambda m: m[0]):
            for q2, guard in hops:
                if guard.satisfied_by(ts.labels[t]):
                    dst = (t, q2)
                    edges[(src, dst)] = sort_symbols(symbols)
                    out.append(dst)
                    if dst not in seen:
                        seen.add(dst)
                        queue.append(dst)
        successors[src] = out

    parking_ok = empty_word_accepting_states(aut)
    accepting = frozenset(s for s in states if s[1] in aut.accepting)
    stoppable = frozenset(s for s in states if s[1] in parking_ok)
    return ProductAutomaton(
        states=states,
        initial=initial,
        accepting=accepting,
        stoppable=stoppable,
        edges=edges,
        successors=successors,
        ts_names={state: ts.state_name(state) for state in ts.order},
    )


@dataclass
class Plan:
    """A policy sequence: finite prefix plus an optionally empty cycle."""

    prefix: list[str]
    cycle: list[str]
    prefix_states: list[PAState]
    cycle_states: list[PAState]

    @property
    def length(self) -> int:
        return len(self.prefix) + len(self.cycle)

    def to_document(self, pa: ProductAutomaton) -> dict:
        return {
            "prefix": list(self.prefix),
            "cycle": list(self.cycle),
            "length": self.length,
            "pa_path": [
                pa.state_name(s) for s in self.prefix_states + self.cycle_states
            ],
        }


def find_plan(pa: ProductAutomaton) -> Plan | None:
    """Shortest satisfying plan, or ``None`` when the product is empty.

    Minimizes prefix length plus cycle length.  Stoppable states need no
    cycle; other accepting states need the shortest cycle back to
    themselves.  The search expands cheaper policy symbols first and
    resolves remaining ties to the earliest candidate in exploration
    order, so among equal-length plans the one with the lexicographically
    smaller policy sequence wins and results are deterministic.
    """
    rank_of = {state: i for i, state in enumerate(pa.states)}

    def expansion_order(state: PAState) -> list[PAState]:
        return sorted(
            pa.successors[state],
            key=lambda nxt: (pa.edges[(state, nxt)][0], rank_of[nxt]),
        )

    dist: dict[PAState, int] = {}
    parent: dict[PAState, PAState | None] = {}
    queue = deque()
    for state in pa.initial:
        dist[state] = 0
        parent[state] = None
        queue.append(state)
    reach_order: list[PAState] = []
    while queue:
        state = queue.popleft()
        reach_order.append(state)
        for nxt in expansion_order(state):
            if nxt not in dist:
                dist[nxt] = dist[state] + 1
                parent[nxt] = state
                queue.append(nxt)

    best: tuple[int, int] | None = None
    best_target: PAState | None = None
    best_cycle: list[PAState] | None = None
    for rank, state in enumerate(reach_order):
        if state in pa.stoppable:
            candidate = (dist[state], rank)
            if best is None or candidate[0] < best[0]:
                best, best_target, best_cycle = candidate, state, []
            continue
        if state not in pa.accepting:
            continue
        cycle = _shortest_cycle(pa, state)
        if cycle is None:
            continue
        candidate = (dist[state] + len(cycle), rank)
        if best is None or candidate[0] < best[0]:
            best, best_target, best_cycle = candidate, state, cycle

    if best_target is None:
        return None

    prefix_states = [best_target]
    while parent[prefix_states[-1]] is not None:
        prefix_states.append(parent[prefix_states[-1]])
    prefix_states.reverse()
    prefix = _symbols_along(pa, prefix_states)
    cycle_states = best_cycle or []
    cycle = _symbols_along(pa, [best_target] + cycle_states)
    return Plan(
        prefix=prefix,
        cycle=cycle,
        prefix_states=prefix_states,
        cycle_states=cycle_states,
    )


def _shortest_cycle(pa: ProductAutomaton, state: PAState) -> list[PAState] | None:
    """Shortest non-empty path from ``state`` back to itself (BFS).

    Expands cheaper policy symbols first, mirroring ``find_plan``.
    """
    rank_of = {st: i for i, st in enumerate(pa.states)}

    def expansion_order(src: PAState) -> list[PAState]:
        return sorted(
            pa.successors[src],
            key=lambda nxt: (pa.edges[(src, nxt)][0], rank_of[nxt]),
        )

    dist: dict[PAState, int] = {}
    parent: dict[PAState, PAState] = {}
    queue = deque()
    for nxt in expansion_order(state):
        if nxt == state:
            return [state]
        if nxt not in dist:
            dist[nxt] = 1
            parent[nxt] = state
            queue.append(nxt)
    while queue:
        current = queue.popleft()
        for nxt in expansion_order(current):
            if nxt == state:
                path = [current]
                while path[-1] != state:
                    prev = parent[path[-1]]
                    if prev == state:
                        break
                    path.append(prev)
                path.reverse()
                return path + [state]
            if nxt not in dist:
                dist[nxt] = dist[current] + 1
                parent[nxt] = current
                queue.append(nxt)
    return None


def _symbols_along(pa: ProductAutomaton, states: list[PAState]) -> list[str]:
    return [
        pa.edges[(src, dst)][0] for src, dst in zip(states, states[1:])
    ]

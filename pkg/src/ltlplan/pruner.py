"""Reduction of labeled transition systems to deterministic, executable form.

Four passes run in a fixed order:

* ``case1`` merges duplicate states — same state label, same incoming and
  same outgoing transition labels up to the merge — via partition
  refinement, keeping the smallest state id of each class.
* ``case2`` resolves symbols shared by several outgoing transitions of a
  state: only the transition whose end state is hop-closest to a state
  completing that symbol keeps it; ties delete the symbol everywhere
  because greedy low-violation execution cannot be trusted to pick a
  specific tied target.
* ``case3`` deletes symbols from a state's outgoing transitions when the
  state itself completes them (the task would already be done).
* ``emptyCleanup`` strips the empty-label sentinel and drops transitions
  whose label set became empty.

Every change is recorded in a :class:`PruneReport` that can deterministically
replay the reduction on the original system.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gridworld import bfs_hops
from .tsys import EMPTY_LABEL, TransitionSystem, sort_symbols

CASE1 = "case1"
CASE2 = "case2"
CASE3 = "case3"
EMPTY_CLEANUP = "emptyCleanup"

ALL_CASES = (CASE1, CASE2, CASE3, EMPTY_CLEANUP)


@dataclass
class PruneReport:
    """Everything the pruner changed, in execution order."""

    merged_state_groups: list[tuple[int, ...]] = field(default_factory=list)
    removed_symbols: list[tuple[int, int, str, str]] = field(default_factory=list)
    removed_transitions: list[tuple[int, int, str]] = field(default_factory=list)
    unreachable_states: list[int] = field(default_factory=list)

    def to_document(self) -> dict:
        name = lambda s: f"q{s}"
        return {
            "merged": [[name(s) for s in group] for group in self.merged_state_groups],
            "removed_symbols": [
                {"from": name(src), "to": name(dst), "symbol": sym, "case": case}
                for (src, dst, sym, case) in self.removed_symbols
            ],
            "removed_transitions": [
                {"from": name(src), "to": name(dst), "case": case}
                for (src, dst, case) in self.removed_transitions
            ],
            "unreachable": [name(s) for s in self.unreachable_states],
        }

    def replay(self, ts: TransitionSystem, cases: tuple[str, ...] = ALL_CASES) -> TransitionSystem:
        """Re-apply the recorded changes (optionally only a case prefix)."""
        out = ts.copy()
        if CASE1 in cases:
            mapping = {s: s for s in out.order}
            for group in self.merged_state_groups:
                rep = group[0]
                for other in group[1:]:
                    mapping[other] = rep
            out = _apply_quotient(out, mapping)
        for (src, dst, sym, case) in self.removed_symbols:
            if case in cases and (src, dst) in out.transitions:
                out.transitions[(src, dst)].discard(sym)
        for (src, dst, case) in self.removed_transitions:
            if case in cases:
                out.transitions.pop((src, dst), None)
        return out


def prune(
    ts: TransitionSystem, alphabet: frozenset[str] | None = None
) -> tuple[TransitionSystem, PruneReport]:
    """Run all reduction passes; returns the reduced system and its report."""
    report = PruneReport()
    out = case1_merge_equivalent(ts, report)
    hops = {state: bfs_hops(out.graph(), state) for state in out.order}
    for state in out.order:
        case2_disambiguate(out, state, hops, report, alphabet)
        case3_remove_ineffectual(out, state, report)
    empty_cleanup(out, report)
    report.unreachable_states = _unreachable_states(out)
    return out, report


def case1_merge_equivalent(ts: TransitionSystem, report: PruneReport) -> TransitionSystem:
    """Collapse equivalence classes of duplicate states."""
    index = {s: i for i, s in enumerate(ts.order)}
    block_of = _initial_partition(ts)
    while True:
        signature = {}
        for state in ts.order:
            out_sig = frozenset(
                (frozenset(syms), block_of[dst])
                for (src, dst), syms in ts.transitions.items()
                if src == state
            )
            in_sig = frozenset(
                (frozenset(syms), block_of[src])
                for (src, dst), syms in ts.transitions.items()
                if dst == state
            )
            signature[state] = (block_of[state], out_sig, in_sig)
        groups: dict[tuple, list[int]] = {}
        for state in ts.order:
            groups.setdefault(signature[state], []).append(state)
        if len(groups) == len(set(block_of.values())):
            break
        for block_id, members in enumerate(groups.values()):
            for state in members:
                block_of[state] = block_id

    mapping = {s: s for s in ts.order}
    members_of: dict[int, list[int]] = {}
    for state in ts.order:
        members_of.setdefault(block_of[state], []).append(state)
    for members in members_of.values():
        if len(members) > 1:
            members = sorted(members, key=lambda s: index[s])
            rep = members[0]
            for other in members[1:]:
                mapping[other] = rep
            report.merged_state_groups.append(tuple(members))
    report.merged_state_groups.sort(key=lambda g: index[g[0]])
    return _apply_quotient(ts, mapping)


def _initial_partition(ts: TransitionSystem) -> dict[int, int]:
    block_ids: dict[frozenset[str], int] = {}
    block_of = {}
    for state in ts.order:
        label = ts.labels[state]
        if label not in block_ids:
            block_ids[label] = len(block_ids)
        block_of[state] = block_ids[label]
    return block_of


def _apply_quotient(ts: TransitionSystem, mapping: dict[int, int]) -> TransitionSystem:
    kept = [s for s in ts.order if mapping[s] == s]
    transitions: dict[tuple[int, int], set[str]] = {}
    for (src, dst), syms in ts.transitions.items():
        edge = (mapping[src], mapping[dst])
        if edge[0] == edge[1]:
            continue
        transitions.setdefault(edge, set()).update(syms)
    return TransitionSystem(
        order=kept,
        labels={s: ts.labels[s] for s in kept},
        transitions=transitions,
        initial=mapping[ts.initial],
        mode=ts.mode,
    )


def case2_disambiguate(
    ts: TransitionSystem,
    state: int,
    hops: dict[int, dict[int, int]],
    report: PruneReport,
    alphabet: frozenset[str] | None = None,
) -> None:
    """Keep each shared symbol only on the transition nearest to completing it."""
    out_edges = ts.out_edges(state)
    carriers: dict[str, list[tuple[int, int]]] = {}
    for edge in out_edges:
        for symbol in ts.transitions[edge]:
            if symbol == EMPTY_LABEL:
                continue
            if alphabet is not None and symbol not in alphabet:
                continue
            carriers.setdefault(symbol, []).append(edge)
    for symbol in sort_symbols(carriers):
        edges = carriers[symbol]
        if len(edges) < 2:
            continue
        scores = [_symbol_distance(ts, hops, edge[1], symbol) for edge in edges]
        best = min(scores)
        if scores.count(best) == 1:
            keeper = edges[scores.index(best)]
            removals = [e for e in edges if e != keeper]
        else:
            removals = edges
        for (src, dst) in removals:
            ts.transitions[(src, dst)].discard(symbol)
            report.removed_symbols.append((src, dst, symbol, CASE2))


def _symbol_distance(
    ts: TransitionSystem, hops: dict[int, dict[int, int]], end: int, symbol: str
) -> float:
    """Hops from ``end`` to the nearest state completing ``symbol``."""
    if symbol in ts.task_symbols_of_state(end):
        return 0
    dist = hops[end]
    best = float("inf")
    for x in ts.order:
        if symbol in ts.task_symbols_of_state(x):
            best = min(best, dist.get(x, float("inf")))
    return best


def case3_remove_ineffectual(
    ts: TransitionSystem, state: int, report: PruneReport
) -> None:
    """Remove symbols the state itself completes from its outgoing labels."""
    own = ts.task_symbols_of_state(state)
    if not own:
        return
    for edge in ts.out_edges(state):
        for symbol in sort_symbols(own & ts.transitions[edge]):
            ts.transitions[edge].discard(symbol)
            report.removed_symbols.append((edge[0], edge[1], symbol, CASE3))


def empty_cleanup(ts: TransitionSystem, report: PruneReport) -> None:
    """Strip the empty-label sentinel, then drop transitions left unlabeled."""
    index = {s: i for i, s in enumerate(ts.order)}
    edges = sorted(ts.transitions, key=lambda e: (index[e[0]], index[e[1]]))
    for edge in edges:
        if EMPTY_LABEL in ts.transitions[edge]:
            ts.transitions[edge].discard(EMPTY_LABEL)
            report.removed_symbols.append((edge[0], edge[1], EMPTY_LABEL, EMPTY_CLEANUP))
    for edge in edges:
        if not ts.transitions[edge]:
            del ts.transitions[edge]
            report.removed_transitions.append((edge[0], edge[1], EMPTY_CLEANUP))


def _unreachable_states(ts: TransitionSystem) -> list[int]:
    reached = {ts.initial}
    frontier = [ts.initial]
    while frontier:
        state = frontier.pop()
        for (src, dst) in ts.transitions:
            if src == state and dst not in reached:
                reached.add(dst)
                frontier.append(dst)
    index = {s: i for i, s in enumerate(ts.order)}
    return sorted((s for s in ts.order if s not in reached), key=lambda s: index[s])


def drop_unreachable(ts: TransitionSystem) -> TransitionSystem:
    """Optionally remove states unreachable from the initial state."""
    unreachable = set(_unreachable_states(ts))
    return TransitionSystem(
        order=[s for s in ts.order if s not in unreachable],
        labels={s: l for s, l in ts.labels.items() if s not in unreachable},
        transitions={
            edge: set(syms)
            for edge, syms in ts.transitions.items()
            if edge[0] not in unreachable and edge[1] not in unreachable
        },
        initial=ts.initial,
        mode=ts.mode,
    )

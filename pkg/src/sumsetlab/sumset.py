"""Finite sumsets ``B_1 + ... + B_k`` inside a dense set ``A``.

The greedy search realises the cube point ``x`` by anchor shifts of the
correspondence point: ``x_eps = T^{n . eps} a`` for anchors
``n = (n_1, ..., n_k)``. Acceptability of ``(B_1, ..., B_k)`` then reads

    sum_{eps_i = 1} n_i + sum_{eps_i = 0} b_i  in  A

for every ``eps in {0,1}^k`` and every choice of ``b_i in B_i`` over the
coordinates with ``eps_i = 0``. For ``eps = (1, ..., 1)`` nothing is chosen,
so ``n_1 + ... + n_k in A`` is always required; for ``eps = 0`` the condition
is ``B_1 + ... + B_k ⊂ A``.

The exhaustive oracles are independent of all of this: a depth-first search
over candidate elements with bitmask intersections.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .correspondence import build_correspondence, shift
from .errors import BoundExceededError, SpecError, WindowOverflowError
from .setspec import IntegerSet, format_set_spec


def _sumset(sets: Iterable[Sequence[int]]) -> set[int]:
    sums = {0}
    for s in sets:
        sums = {a + b for a in sums for b in s}
    return sums


def _lowest_bits(mask: int, count: int) -> list[int]:
    out = []
    while mask and len(out) < count:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class AnchoredTuple:
    target: IntegerSet
    anchors: tuple[int, ...]
    sets: tuple[tuple[int, ...], ...]
    window: int | None = None

    def __post_init__(self) -> None:
        if len(self.anchors) != len(self.sets) or not self.anchors:
            raise SpecError("need one anchor per set and k >= 1")
        if any(n < 0 for n in self.anchors):
            raise SpecError("anchors must be non-negative")
        sets = tuple(tuple(sorted(set(b))) for b in self.sets)
        if any(x < 0 for b in sets for x in b):
            raise SpecError("set elements must be non-negative")
        object.__setattr__(self, "sets", sets)
        if self.window is None:
            object.__setattr__(self, "window", self.target.window_size)

    @property
    def k(self) -> int:
        return len(self.anchors)

    def with_element(self, i: int, c: int) -> AnchoredTuple:
        sets = list(self.sets)
        sets[i - 1] = sets[i - 1] + (c,)
        return AnchoredTuple(self.target, self.anchors, tuple(sets), self.window)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.sets)

    def to_dict(self) -> dict:
        return {"anchors": list(self.anchors), "sets": [list(b) for b in self.sets],
                "window": self.window}


@dataclass(frozen=True)
class Violation:
    eps: tuple[int, ...]
    #: chosen elements for the coordinates with ``eps_i = 0``; ``None`` elsewhere
    b: tuple[int | None, ...]
    value: int


@dataclass(frozen=True)
class Acceptability:
    acceptable: bool
    violation: Violation | None = None

    def __bool__(self) -> bool:
        return self.acceptable


def _member(tup: AnchoredTuple, value: int) -> bool:
    if value >= tup.window:
        raise WindowOverflowError(f"mixed sum {value} is outside the window [0, {tup.window})")
    return tup.target.contains(value)


def check_acceptable(tup: AnchoredTuple) -> Acceptability:
    """Test every mixed sum; the index ``eps`` runs from ``(1, ..., 1)`` down."""
    k = tup.k
    for eps in itertools.product((1, 0), repeat=k):
        base = sum(n for n, e in zip(tup.anchors, eps) if e)
        lower = [i for i in range(k) if not eps[i]]
        for choice in itertools.product(*(tup.sets[i] for i in lower)):
            value = base + sum(choice)
            if not _member(tup, value):
                b: list[int | None] = [None] * k
                for i, c in zip(lower, choice):
                    b[i] = c
                return Acceptability(False, Violation(eps, tuple(b), value))
    return Acceptability(True)


def acceptable_via_correspondence(tup: AnchoredTuple) -> bool:
    """Evaluate ``T^{eps-bar . b} x_eps in E`` directly on the symbolic point,
    with ``x_eps`` the shift of the correspondence point by ``n . eps``."""
    k = tup.k
    radius = tup.window - 1
    point, cylinder = build_correspondence(tup.target, radius)
    for eps in itertools.product((0, 1), repeat=k):
        x_eps = shift(point, sum(n for n, e in zip(tup.anchors, eps) if e))
        lower = [i for i in range(k) if not eps[i]]
        for choice in itertools.product(*(tup.sets[i] for i in lower)):
            if not cylinder.contains(shift(x_eps, sum(choice))):
                return False
    return True


@dataclass
class SearchBudget:
    """Limits for the greedy search.

    ``candidate_bound`` caps the value of any added element,
    ``max_candidates`` the total number of candidate values examined,
    ``max_extensions`` the number of successful extensions, and
    ``time_limit`` the wall-clock seconds (``None`` for no limit).
    """

    candidate_bound: int = 10**4
    max_candidates: int = 10**4
    max_extensions: int = 10**4
    time_limit: float | None = None

    def __post_init__(self) -> None:
        for name in ("candidate_bound", "max_candidates", "max_extensions"):
            if getattr(self, name) < 1:
                raise SpecError(f"{name} must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise SpecError("time_limit must be positive")


@dataclass
class _Spend:
    candidates: int = 0
    extensions: int = 0
    anchors: int = 0
    started: float = field(default_factory=time.monotonic)


def _offsets(tup: AnchoredTuple, i: int) -> set[int]:
    """Values ``d`` such that the new element ``c`` needs ``c + d in A``."""
    k = tup.k
    others = [j for j in range(k) if j != i - 1]
    out: set[int] = set()
    for bits in itertools.product((0, 1), repeat=k - 1):
        base = sum(tup.anchors[j] for j, e in zip(others, bits) if e)
        lower = [tup.sets[j] for j, e in zip(others, bits) if not e]
        out |= {base + s for s in _sumset(lower)}
    return out


def _candidate_mask(tup: AnchoredTuple, offsets: set[int], lo: int, hi: int) -> int:
    """Bitmask over ``[lo, hi]`` of values ``c`` with ``c + d in A`` for all offsets."""
    width = hi - lo + 1
    top = hi + max(offsets)
    if top >= tup.window:
        raise WindowOverflowError(f"candidate sums reach {top}, outside [0, {tup.window})")
    members = tup.target.mask(0, top + 1)
    out = (1 << width) - 1
    for d in offsets:
        out &= members >> (lo + d)
    return out & ((1 << width) - 1)


def _window_limit(tup: AnchoredTuple, offsets: set[int]) -> int:
    return tup.window - 1 - max(offsets)


def extend(tup: AnchoredTuple, i: int, budget: SearchBudget | int) -> int | None:
    """Smallest ``c > max(B_i)``, ``c <= bound``, keeping the tuple acceptable.

    Only sums involving ``c`` are new, so ``c`` must satisfy ``c + d in A`` for
    each offset ``d = sum_{eps_j = 1} n_j + sum_{j != i, eps_j = 0} b_j`` with
    ``eps_i = 0``. Returns ``None`` if no such ``c`` exists up to the bound.
    Raises :class:`WindowOverflowError` if the bound reaches past the window
    before an answer is found.
    """
    c, _ = _extend(tup, i, budget if isinstance(budget, int) else budget.candidate_bound)
    return c


def _extend(tup: AnchoredTuple, i: int, bound: int) -> tuple[int | None, int]:
    if not 1 <= i <= tup.k:
        raise SpecError(f"axis {i} out of range [1, {tup.k}]")
    current = tup.sets[i - 1]
    lo = current[-1] + 1 if current else 0
    if lo > bound:
        return None, 0
    offsets = _offsets(tup, i)
    limit = _window_limit(tup, offsets)
    hi = min(bound, limit)
    found = None
    if hi >= lo:
        mask = _candidate_mask(tup, offsets, lo, hi)
        if mask:
            found = lo + (mask & -mask).bit_length() - 1
    if found is None and bound > limit:
        raise WindowOverflowError(
            f"no extension up to {limit}; larger candidates leave the window [0, {tup.window})")
    examined = (found - lo + 1) if found is not None else max(hi - lo + 1, 0)
    return found, examined


@dataclass(frozen=True)
class GreedyResult:
    target: IntegerSet
    #: best acceptable tuple, or ``None`` when no anchor tuple is admissible
    tuple: AnchoredTuple | None
    targets: tuple[int, ...]
    target_met: bool
    budget_spent: dict
    stop_reason: str

    @property
    def achieved_sizes(self) -> tuple[int, ...]:
        return self.tuple.sizes if self.tuple else (0,) * len(self.targets)

    def to_dict(self) -> dict:
        tup = self.tuple
        if tup is None:
            acceptable = sums_ok = None
        else:
            acceptable = check_acceptable(tup).acceptable
            sums_ok = verify_sumset(tup.target, tup.sets).ok if all(tup.sets) else True
        return {
            "schema_version": 1,
            "mode": "greedy",
            "set": format_set_spec(self.target),
            "k": len(self.targets),
            "anchors": list(tup.anchors) if tup else None,
            "sets": [list(b) for b in tup.sets] if tup else [[] for _ in self.targets],
            "target_sizes": list(self.targets),
            "achieved_sizes": list(self.achieved_sizes),
            "target_met": self.target_met,
            "checks": {"acceptable": acceptable, "all_sums_verified": sums_ok},
            "budget_spent": self.budget_spent,
            "stop_reason": self.stop_reason,
        }


def _anchor_candidates(target: IntegerSet, k: int, anchor_bound: int,
                       window: int) -> Iterable[tuple[int, ...]]:
    for anchors in itertools.product(range(anchor_bound + 1), repeat=k):
        total = sum(anchors)
        if total < window and target.contains(total):
            yield anchors


def find_sumset_greedy(target: IntegerSet, k: int, target_sizes: Sequence[int],
                       budget: SearchBudget | None = None,
                       anchor_bound: int = 64) -> GreedyResult:
    """Anchor search followed by round-robin extension of ``B_1, ..., B_k``.

    Anchor tuples are tried in lexicographic order; for each, axes
    ``1, 2, ..., k, 1, 2, ...`` are extended by the minimal admissible element
    until every target size is met. An axis that cannot be extended ends the
    attempt for those anchors. The best tuple found (largest total size,
    earliest on ties) is returned when no attempt succeeds.
    """
    if k < 1:
        raise SpecError("order k must be >= 1")
    targets = tuple(target_sizes)
    if len(targets) != k or any(s < 0 for s in targets):
        raise SpecError(f"need {k} non-negative target sizes, got {targets}")
    if anchor_bound < 0:
        raise SpecError("anchor_bound must be >= 0")
    budget = budget or SearchBudget()
    window = target.window_size
    spend = _Spend()
    best: AnchoredTuple | None = None
    reason = "anchors exhausted"

    def exhausted() -> str | None:
        if spend.candidates >= budget.max_candidates:
            return "candidate budget exhausted"
        if spend.extensions >= budget.max_extensions:
            return "extension budget exhausted"
        if budget.time_limit is not None and \
                time.monotonic() - spend.started > budget.time_limit:
            return "time limit reached"
        return None

    def grow(tup: AnchoredTuple) -> AnchoredTuple:
        # round-robin over axes still short of their target
        while tup.sizes != targets:
            for i in range(1, k + 1):
                if len(tup.sets[i - 1]) >= targets[i - 1]:
                    continue
                if exhausted():
                    return tup
                bound = min(budget.candidate_bound, _window_limit(tup, _offsets(tup, i)))
                c, examined = _extend(tup, i, bound)
                spend.candidates += examined
                if c is None:
                    return tup
                tup = tup.with_element(i, c)
                spend.extensions += 1
        return tup

    for anchors in _anchor_candidates(target, k, anchor_bound, window):
        spend.anchors += 1
        tup = grow(AnchoredTuple(target, anchors, ((),) * k, window))
        if best is None or sum(tup.sizes) > sum(best.sizes):
            best = tup
        if tup.sizes == targets:
            reason = "targets met"
            break
        stop = exhausted()
        if stop:
            reason = stop
            break
    if best is None:
        reason = "no admissible anchors"
    else:
        assert check_acceptable(best).acceptable, "greedy produced an unacceptable tuple"
    met = best is not None and best.sizes == targets
    spent = {"candidates": spend.candidates, "extensions": spend.extensions,
             "anchors_tried": spend.anchors,
             "seconds": round(time.monotonic() - spend.started, 6)}
    return GreedyResult(target, best, targets, met, spent, reason)


# ------------------------------------------------------------------ oracles

@dataclass(frozen=True)
class SumsetCheck:
    ok: bool
    violation: int | None = None
    witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_sumset(target: IntegerSet, sets: Sequence[Sequence[int]]) -> SumsetCheck:
    """Is every sum ``b_1 + ... + b_k`` in ``target``? Reports the first failure
    in lexicographic order of ``(b_1, ..., b_k)``."""
    sets = [sorted(set(b)) for b in sets]
    if not sets:
        raise SpecError("need at least one set")
    if target.bounded and all(sets):
        top = sum(b[-1] for b in sets)
        if top >= target.window_size:
            raise WindowOverflowError(
                f"sum {top} is outside the window [0, {target.window_size})")
    for choice in itertools.product(*sets):
        if not target.contains(sum(choice)):
            return SumsetCheck(False, sum(choice), tuple(choice))
    return SumsetCheck(True)


#: Default limit on the naive search-space size prod C(bound + 1, s_i).
DEFAULT_SPACE_LIMIT = 10**12
#: Default limit on DFS nodes actually visited.
DEFAULT_NODE_LIMIT = 5 * 10**6


def search_space(sizes: Sequence[int], element_bound: int) -> int:
    return math.prod(math.comb(element_bound + 1, s) for s in sizes)


class _Oracle:
    """Lexicographically least witness by depth-first search.

    Sets are filled in order ``B_1, B_2, ...``; ``reach`` is the bitmask of
    values ``r`` such that ``p + r in A`` for every partial sum ``p`` formed
    so far. Later sets can only contribute sums inside ``reach``, so a branch
    is cut once ``reach`` is too small to hold a sumset of the remaining sizes.
    """

    def __init__(self, target: IntegerSet, sizes: Sequence[int], bound: int,
                 members_only: bool, node_limit: int) -> None:
        self.sizes = tuple(sizes)
        self.k = len(self.sizes)
        self.bound = bound
        self.node_limit = node_limit
        self.nodes = 0
        top = self.k * bound + 1
        if target.bounded:
            top = min(top, target.window_size)
        # sums at or past the window of a bounded set count as non-members
        self.members = target.mask(0, top)
        self.elements = (1 << (bound + 1)) - 1
        if members_only:
            self.elements &= self.members

    def _needed(self, j: int) -> int:
        rest = self.sizes[j:]
        return sum(rest) - len(rest) + 1 if rest else 0

    def _reach_ok(self, reach: int, j: int) -> bool:
        """Room for a sumset of sizes ``sizes[j:]`` inside ``reach``."""
        if j >= self.k:
            return bool(reach & 1)
        span = (1 << ((self.k - j) * self.bound + 1)) - 1
        return (reach & span).bit_count() >= self._needed(j)

    def run(self) -> tuple[tuple[int, ...], ...] | None:
        if 0 in self.sizes:
            # an empty factor makes the sumset empty, so only the sizes matter
            chosen = tuple(tuple(_lowest_bits(self.elements, s)) for s in self.sizes)
            return chosen if tuple(map(len, chosen)) == self.sizes else None
        if any(s > self.bound + 1 for s in self.sizes):
            return None
        return self._fill(0, [], {0}, self.members)

    def _fill(self, j: int, done: list, partial: set[int], reach: int):
        if j == self.k:
            return tuple(done)
        size = self.sizes[j]
        if size == 0:
            return self._fill(j + 1, done + [()], partial, reach)
        if j == self.k - 1:
            # last set: any s_k elements of reach work; take the smallest
            chosen = _lowest_bits(reach & self.elements, size)
            return tuple(done + [tuple(chosen)]) if len(chosen) == size else None
        return self._choose(j, done, partial, [], 0, reach, partial)

    def _choose(self, j, done, base, chosen, start, reach, partial):
        size = self.sizes[j]
        if len(chosen) == size:
            sums = {p + c for p in base for c in chosen}
            return self._fill(j + 1, done + [tuple(chosen)], sums, reach)
        last = self.bound - (size - len(chosen) - 1)
        for c in range(start, last + 1):
            if not (self.elements >> c) & 1:
                continue
            self.nodes += 1
            if self.nodes > self.node_limit:
                raise BoundExceededError(
                    f"oracle visited more than {self.node_limit} nodes")
            new_reach = reach
            for p in base:
                new_reach &= self.members >> (p + c)
                if not new_reach:
                    break
            if not self._reach_ok(new_reach, j + 1):
                continue
            found = self._choose(j, done, base, chosen + [c], c + 1, new_reach, partial)
            if found is not None:
                return found
        return None


def _run_oracle(target: IntegerSet, sizes: Sequence[int], element_bound: int,
                members_only: bool, space_limit: int, node_limit: int):
    sizes = tuple(sizes)
    if not sizes or any(s < 0 for s in sizes):
        raise SpecError(f"bad sizes {sizes}")
    if element_bound < 0:
        raise SpecError("element_bound must be >= 0")
    space = search_space(sizes, element_bound)
    if space > space_limit:
        raise BoundExceededError(
            f"search space {space} exceeds the limit {space_limit}; lower the bound")
    return _Oracle(target, sizes, element_bound, members_only, node_limit).run()


def find_sumset_oracle(target: IntegerSet, k: int, sizes: Sequence[int],
                       element_bound: int, space_limit: int = DEFAULT_SPACE_LIMIT,
                       node_limit: int = DEFAULT_NODE_LIMIT):
    """Exhaustive search for ``B_i ⊂ [0, element_bound]`` with ``|B_i| = s_i``
    and ``B_1 + ... + B_k ⊂ A``; ``None`` proves there is none.

    For a set known only on ``[0, N)``, sums at or beyond ``N`` count as
    non-members, so the answer is relative to that window.
    """
    if k < 1 or len(sizes) != k:
        raise SpecError(f"need k >= 1 and {k} sizes")
    witness = _run_oracle(target, sizes, element_bound, False, space_limit, node_limit)
    if witness is not None:
        assert verify_sumset(target, witness).ok
    return witness


def find_union_sumset_oracle(target: IntegerSet, sizes: Sequence[int], element_bound: int,
                             space_limit: int = DEFAULT_SPACE_LIMIT,
                             node_limit: int = DEFAULT_NODE_LIMIT):
    """Exhaustive search for ``B_1 ∪ B_2 ∪ (B_1 + B_2) ⊂ A``."""
    if len(sizes) != 2:
        raise SpecError("the union variant takes exactly two sizes")
    witness = _run_oracle(target, sizes, element_bound, True, space_limit, node_limit)
    if witness is not None:
        assert verify_sumset(target, witness).ok
        assert all(target.contains(b) for part in witness for b in part)
    return witness


union_sumset_oracle = find_union_sumset_oracle


def oracle_report(target: IntegerSet, k: int, sizes: Sequence[int], element_bound: int,
                  variant: str, witness) -> str:
    return json.dumps({
        "schema_version": 1,
        "mode": "oracle",
        "variant": variant,
        "set": format_set_spec(target),
        "k": k,
        "sizes": list(sizes),
        "bound": element_bound,
        "witness": None if witness is None else [list(b) for b in witness],
    })

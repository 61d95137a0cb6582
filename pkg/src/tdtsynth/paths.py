"""Labeled paths, path convolution, partial runs along paths, the state
transformations tau, profiles, idempotency, and pumping.

A profile element is the canonical graph of a partial function on states.
Equal-length overlay entries additionally remember whether the overlay can
extend through the segment's trailing direction (its last symbol's arity
covers that direction): composition of profiles is exact only with that bit,
because an overlay continues into the next segment precisely when its last
symbol supports the boundary direction. The bit is dropped nowhere, so
idempotency is judged on the tagged sets; tagged equality implies equality of
the untagged sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .automata import TopDownAutomaton, pred_exists_output, pred_uniform_output, \
    univ_input_states
from .terms import (
    Address, RankedAlphabet, Symbol, TermError, Tree, has_address, replace_at,
    subtree, symbol_at,
)


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledPath:
    """Alternating symbols and directions; may be empty, and may end in a
    symbol or in a direction."""
    syms: tuple[Symbol, ...] = ()
    dirs: tuple[int, ...] = ()

    def __post_init__(self):
        n, d = len(self.syms), len(self.dirs)
        if d not in (n, n - 1) and not (n == 0 and d == 0):
            raise PathError(f"mismatched path shape: {n} symbols, {d} directions")
        for k in range(d):
            if not 1 <= self.dirs[k] <= self.syms[k].arity:
                raise PathError(
                    f"direction {self.dirs[k]} exceeds arity of {self.syms[k]}")

    # -- views ------------------------------------------------------------

    @property
    def length(self) -> int:
        """||pi||: the number of symbols."""
        return len(self.syms)

    @property
    def is_empty(self) -> bool:
        return not self.syms

    @property
    def ends_with_dir(self) -> bool:
        return len(self.syms) > 0 and len(self.dirs) == len(self.syms)

    @property
    def address(self) -> Address:
        """path(pi) as a node address."""
        return tuple(self.dirs)

    @property
    def last_sym(self) -> Symbol:
        if not self.syms:
            raise PathError("empty path has no last symbol")
        return self.syms[-1]

    # -- construction -------------------------------------------------------

    def with_dir(self, j: int) -> "LabeledPath":
        if self.ends_with_dir or self.is_empty:
            raise PathError("can only append a direction after a symbol")
        return LabeledPath(self.syms, self.dirs + (j,))

    def with_sym(self, s: Symbol) -> "LabeledPath":
        if self.syms and not self.ends_with_dir:
            raise PathError("can only append a symbol after a direction")
        return LabeledPath(self.syms + (s,), self.dirs)

    def concat(self, other: "LabeledPath") -> "LabeledPath":
        if not self.is_empty and not self.ends_with_dir and not other.is_empty:
            raise PathError("concatenation needs a direction at the boundary")
        return LabeledPath(self.syms + other.syms, self.dirs + other.dirs)

    def drop_first(self) -> "LabeledPath":
        """Remove the leading symbol and its direction."""
        if self.is_empty:
            raise PathError("empty path")
        if len(self.syms) == 1:
            return LabeledPath((), ())
        return LabeledPath(self.syms[1:], self.dirs[1:])

    def segment(self, start: int, length: int) -> "LabeledPath":
        """Symbols start..start+length-1 with their inner directions."""
        syms = self.syms[start:start + length]
        dirs = self.dirs[start:start + length - 1]
        return LabeledPath(syms, dirs)

    def without_trailing_dir(self) -> "LabeledPath":
        if not self.ends_with_dir:
            return self
        return LabeledPath(self.syms, self.dirs[:-1])

    def to_text(self) -> str:
        parts: list[str] = []
        for k, s in enumerate(self.syms):
            parts.append(s.name)
            if k < len(self.dirs):
                parts.append(str(self.dirs[k]))
        return ".".join(parts) if parts else "e"

    def __str__(self) -> str:
        return self.to_text()


def path_of(*items) -> LabeledPath:
    """Convenience builder: alternating Symbol and int arguments."""
    p = LabeledPath()
    for it in items:
        p = p.with_dir(it) if isinstance(it, int) else p.with_sym(it)
    return p


def parse_labeled_path(text: str, alphabet: RankedAlphabet) -> LabeledPath:
    """Dot-separated form, e.g. ``f.1.g.1.a``; 'e' denotes the empty path.

    A symbol name with several declared arities resolves to the smallest
    arity admitting the following direction (smallest overall when last).
    """
    text = text.strip()
    if text in ("", "e"):
        return LabeledPath()
    tokens = text.split(".")
    p = LabeledPath()
    k = 0
    while k < len(tokens):
        name = tokens[k]
        nxt = int(tokens[k + 1]) if k + 1 < len(tokens) and tokens[k + 1].isdigit() \
            else None
        cands = sorted((s for s in alphabet.symbols if s.name == name),
                       key=lambda s: s.arity)
        if nxt is not None:
            cands = [s for s in cands if s.arity >= nxt]
        if not cands:
            raise PathError(f"no symbol {name!r} fits at token {k} of {text!r}")
        p = p.with_sym(cands[0])
        k += 1
        if nxt is not None:
            p = p.with_dir(nxt)
            k += 1
    return p


# ---------------------------------------------------------------------------
# Membership of a path in a tree

def tree_has_path(t: Tree, pi: LabeledPath) -> bool:
    """Is pi a prefix of a labeled path through t?"""
    addr: Address = ()
    for k, s in enumerate(pi.syms):
        if not has_address(t, addr) or symbol_at(t, addr) != s:
            return False
        if k < len(pi.dirs):
            addr = addr + (pi.dirs[k],)
    return True


def tree_has_some_path(t: Tree, pis: Sequence[LabeledPath]) -> bool:
    return any(tree_has_path(t, pi) for pi in pis)


# ---------------------------------------------------------------------------
# Path convolution and runs along convolved paths

def path_convolution(x: LabeledPath, y: LabeledPath) -> LabeledPath:
    """Pairwise overlay with padding; the shorter path's word must be a
    prefix of the longer one's."""
    la, lb = len(x.dirs), len(y.dirs)
    k = min(la, lb)
    if x.dirs[:k] != y.dirs[:k]:
        raise PathError("paths diverge: no convolution")
    n = max(x.length, y.length)
    syms = []
    for p in range(n):
        a = x.syms[p] if p < x.length else None
        b = y.syms[p] if p < y.length else None
        from .terms import pair_symbol
        syms.append(pair_symbol(a, b))
    dirs = x.dirs if la >= lb else y.dirs
    return LabeledPath(tuple(syms), tuple(dirs))


@dataclass
class PathRun:
    """Partial run of a deterministic automaton along a convolved path."""
    states: list[Optional[str]]               # per node, index 0 = the root
    transitions: list[Optional[object]]        # Transition used at each node
    accepting: bool

    def state_at(self, index: int) -> Optional[str]:
        return self.states[index] if index < len(self.states) else None


def run_on_path(A: TopDownAutomaton, q: str, xy: LabeledPath) -> PathRun:
    """Walk the unique candidate run of A from q along the convolved path;
    partiality is the result, not an error."""
    n = xy.length
    states: list[Optional[str]] = [None] * n
    transitions: list[Optional[object]] = [None] * n
    cur: Optional[str] = q
    accepting = False
    for p in range(n):
        states[p] = cur
        if cur is None:
            break
        tr = A.transition(cur, xy.syms[p])
        transitions[p] = tr
        if tr is None:
            cur = None
            if p < len(xy.dirs):
                continue
            break
        if p == n - 1:
            accepting = True
        cur = tr.targets[xy.dirs[p] - 1] if p < len(xy.dirs) else None
    return PathRun(states, transitions, accepting)


def end_state(A: TopDownAutomaton, q: str, xy: LabeledPath,
              i: Optional[int] = None) -> Optional[str]:
    """The state at path(xy) (i absent) or at path(xy).i, when the run from
    q gets that far."""
    if xy.is_empty:
        return q if i is None else None
    r = run_on_path(A, q, xy)
    if i is None:
        return r.states[-1]
    tr = r.transitions[xy.length - 1]
    if tr is None or i > len(tr.targets):
        return None
    return tr.targets[i - 1]


# ---------------------------------------------------------------------------
# tau and profiles

TauFn = tuple[tuple[str, str], ...]


@dataclass
class TauResult:
    mapping: dict[str, str]
    obligations: list[tuple[int, int, str, str]]  # (node index, dir, kind, state)

    def canonical(self) -> TauFn:
        return tuple(sorted(self.mapping.items()))


def tau(A: TopDownAutomaton, x: LabeledPath, i: int, y: LabeledPath) -> TauResult:
    """The partial state transformation along input overlay x, continuing in
    direction i, with output overlay y (path(y) a prefix of path(x)).

    Off-path children are classified by both component ranks: within both the
    input and output rank, a uniformly matching output subtree must exist;
    beyond the output rank, the child state must accept every input padded
    with bottom; beyond the input rank, some output completion must exist.
    """
    if x.is_empty or x.ends_with_dir:
        raise PathError("tau needs a non-empty input overlay ending in a symbol")
    if y.length > x.length:
        raise PathError("output overlay longer than the input segment")
    if not 1 <= i <= x.last_sym.arity:
        raise PathError(f"direction {i} exceeds the last input symbol's arity")
    xy = path_convolution(x, y)
    W = univ_input_states(A)
    mapping: dict[str, str] = {}
    obligations: list[tuple[int, int, str, str]] = []
    for q in A.states:
        r = run_on_path(A, q, xy)
        ok = True
        obls: list[tuple[int, int, str, str]] = []
        for p in range(x.length):
            tr = r.transitions[p]
            if tr is None:
                ok = False
                break
            f = x.syms[p]
            g: Optional[Symbol] = y.syms[p] if p < y.length else None
            rg = g.arity if g is not None else 0
            on_path = x.dirs[p] if p < len(x.dirs) else i
            for l in range(1, max(f.arity, rg) + 1):
                if l == on_path:
                    continue
                child = tr.targets[l - 1]
                if l <= min(f.arity, rg):
                    kind = "uniform"
                    good = pred_uniform_output(A, child) is not None
                elif l <= f.arity:
                    kind = "univ"
                    good = child in W
                else:
                    kind = "exists"
                    good = pred_exists_output(A, child) is not None
                if not good:
                    ok = False
                    break
                obls.append((p, l, kind, child))
            if not ok:
                break
        if not ok:
            continue
        final = r.transitions[x.length - 1]
        if final is None or i > len(final.targets):
            continue
        mapping[q] = final.targets[i - 1]
        obligations.extend(obls)
    return TauResult(mapping, obligations)


@dataclass(frozen=True)
class Profile:
    """(P_=, P_<, P_eps): tau functions over equal-length, shorter non-empty,
    and empty output overlays. Equal-length entries carry the boundary
    extension bit."""
    eq: frozenset  # of (TauFn, can_extend: bool)
    lt: frozenset  # of TauFn
    eps: frozenset  # of TauFn

    def eq_functions(self) -> frozenset:
        """The untagged paper-level view of the equal-length component."""
        return frozenset(fn for fn, _ in self.eq)


def _overlays(output: RankedAlphabet, dirs: Sequence[int], length: int
              ) -> Iterator[LabeledPath]:
    """All output overlays of the given length along the fixed directions."""
    slots = []
    for p in range(length):
        if p < length - 1:
            need = dirs[p]
            slots.append([s for s in output.symbols if s.arity >= need])
        else:
            slots.append(list(output.symbols))
    for combo in itertools.product(*slots):
        yield LabeledPath(tuple(combo), tuple(dirs[:length - 1]))


def profile(A: TopDownAutomaton, x: LabeledPath, i: int) -> Profile:
    """The profile of the segment x.i by direct enumeration of overlays."""
    if x.is_empty:
        raise PathError("profiles are defined for non-empty segments")
    key = ("profile", x, i)
    if key in A._cache:
        return A._cache[key]
    out = A.conv_alphabet().output
    eq = set()
    for y in _overlays(out, x.dirs, x.length):
        fn = tau(A, x, i, y).canonical()
        eq.add((fn, y.last_sym.arity >= i))
    lt = set()
    for m in range(1, x.length):
        for y in _overlays(out, x.dirs, m):
            lt.add(tau(A, x, i, y).canonical())
    eps = {tau(A, x, i, LabeledPath()).canonical()}
    result = Profile(frozenset(eq), frozenset(lt), frozenset(eps))
    A._cache[key] = result
    return result


def _compose_fn(f: TauFn, g: TauFn) -> TauFn:
    """g after f on canonical graphs."""
    gd = dict(g)
    return tuple(sorted((a, gd[b]) for a, b in f if b in gd))


def compose_profiles(p1: Profile, p2: Profile) -> Profile:
    """Profile of the concatenated segment from the two segment profiles.

    An overlay of the concatenation splits at the boundary: it continues into
    the second segment only when its first part is full length and extendable
    through the boundary direction, stops exactly at the boundary (full first
    part, empty second), or dies inside the first segment.
    """
    eq = frozenset((_compose_fn(f, g), tag2)
                   for f, ext in p1.eq if ext for g, tag2 in p2.eq)
    lt = set()
    for f, ext in p1.eq:
        if ext:
            for g in p2.lt:
                lt.add(_compose_fn(f, g))
        for e in p2.eps:
            lt.add(_compose_fn(f, e))
    for f in p1.lt:
        for e in p2.eps:
            lt.add(_compose_fn(f, e))
    eps = frozenset(_compose_fn(e1, e2) for e1 in p1.eps for e2 in p2.eps)
    return Profile(eq, frozenset(lt), eps)


def double_segment(y: LabeledPath, j: int) -> LabeledPath:
    return LabeledPath(y.syms + y.syms, y.dirs + (j,) + y.dirs)


def is_idempotent(A: TopDownAutomaton, y: LabeledPath, j: int) -> bool:
    """P_{yj} = P_{yj yj} by set equality of all three components."""
    if y.is_empty:
        raise PathError("idempotency is defined for non-empty segments")
    return profile(A, y, j) == profile(A, double_segment(y, j), j)


@dataclass(frozen=True)
class Factorization:
    """pi = head . y . j . tail with y.j idempotent; head ends in a direction
    (or is empty when the factor starts at the root)."""
    head: LabeledPath
    y: LabeledPath
    j: int
    tail: LabeledPath

    def __str__(self) -> str:
        return (f"[{self.head.to_text()}] ({self.y.to_text()}).{self.j} "
                f"[{self.tail.to_text()}]")


def find_idempotent_factorization(A: TopDownAutomaton, pi: LabeledPath
                                  ) -> Optional[Factorization]:
    """Shortest idempotent factor first, then leftmost."""
    n = pi.length
    for ylen in range(1, n + 1):
        for start in range(0, n - ylen + 1):
            end = start + ylen
            if end - 1 >= len(pi.dirs):
                continue  # no direction after the candidate factor
            j = pi.dirs[end - 1]
            y = pi.segment(start, ylen)
            if is_idempotent(A, y, j):
                head = LabeledPath(pi.syms[:start], pi.dirs[:start])
                tail = LabeledPath(pi.syms[end:], pi.dirs[end:])
                return Factorization(head, y, j, tail)
    return None


def pump(t: Tree, head: LabeledPath, y: LabeledPath, j: int, n: int) -> Tree:
    """Repeat the idempotent factor n times: head part, n copies of the factor
    slice, then the remainder below.

    head is the path up to and including the direction entering the factor
    (empty when the factor starts at the root). Requires both cut nodes in t.
    """
    from .terms import HOLE, Tree as _Tree, splice

    cut1: Address = head.address
    rel: Address = tuple(y.dirs) + (j,)
    cut2: Address = cut1 + rel
    if not has_address(t, cut1) or not has_address(t, cut2):
        raise TermError("pump: cut nodes missing from the tree")
    s_x = replace_at(t, cut1, _Tree(HOLE, ())) if cut1 else _Tree(HOLE, ())
    mid = subtree(t, cut1)
    s_y = replace_at(mid, rel, _Tree(HOLE, ()))
    t_hat = subtree(t, cut2)
    out = s_x
    for _ in range(n):
        out = splice(out, s_y)
    return splice(out, t_hat)

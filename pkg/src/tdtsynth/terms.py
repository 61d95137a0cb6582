"""Ranked alphabets, finite trees, special trees, contexts, and convolution.

Node addresses are words over positive integers, written as tuples of ints;
the empty tuple is the root. Directions are 1-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

BOT = "_"    # padding label for the absent side of a convolution pair
HOLE = "◦"   # hole label of a special tree
PAIR_SEP = "|"

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
VAR_RE = re.compile(r"\$([1-9][0-9]*)")

Address = tuple[int, ...]


class TermError(ValueError):
    """Malformed alphabet, tree, or term text."""


@dataclass(frozen=True, order=True)
class Symbol:
    name: str
    arity: int

    def __str__(self) -> str:
        return f"{self.name}:{self.arity}"


class RankedAlphabet:
    """Finite set of (name, arity) symbols.

    The same name may occur with several arities; those are distinct symbols
    and lookup is always by (name, arity). Declaration order is preserved: it
    fixes witness construction and strategy tie-breaking downstream.
    """

    def __init__(self, symbols: Sequence[Union[Symbol, tuple[str, int]]]):
        seen: dict[tuple[str, int], Symbol] = {}
        order: list[Symbol] = []
        for s in symbols:
            sym = s if isinstance(s, Symbol) else Symbol(s[0], int(s[1]))
            self._check_symbol(sym)
            if (sym.name, sym.arity) not in seen:
                seen[(sym.name, sym.arity)] = sym
                order.append(sym)
        if not order:
            raise TermError("alphabet must be non-empty")
        if not any(s.arity == 0 for s in order):
            raise TermError("alphabet needs at least one symbol of arity 0")
        self.symbols: tuple[Symbol, ...] = tuple(order)
        self._by_key = seen
        self._pos = {s: i for i, s in enumerate(order)}

    def _check_symbol(self, sym: Symbol) -> None:
        if sym.arity < 0:
            raise TermError(f"negative arity for symbol {sym.name!r}")
        if sym.name == BOT:
            raise TermError(f"symbol name {BOT!r} is reserved for padding")
        if not NAME_RE.fullmatch(sym.name):
            raise TermError(f"bad symbol name {sym.name!r}")

    def get(self, name: str, arity: int) -> Optional[Symbol]:
        return self._by_key.get((name, arity))

    def has_name(self, name: str) -> bool:
        return any(s.name == name for s in self.symbols)

    def index(self, sym: Symbol) -> int:
        return self._pos[sym]

    @property
    def max_arity(self) -> int:
        return max(s.arity for s in self.symbols)

    @property
    def directions(self) -> range:
        return range(1, self.max_arity + 1)

    def leaves(self) -> tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if s.arity == 0)

    def __contains__(self, sym: Symbol) -> bool:
        return (sym.name, sym.arity) in self._by_key

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RankedAlphabet) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)

    def __repr__(self) -> str:
        return f"RankedAlphabet({', '.join(map(str, self.symbols))})"


class ConvolutionAlphabet(RankedAlphabet):
    """Pair alphabet over an input and an output alphabet.

    Symbols are all (a, b) with a in input+bottom, b in output+bottom except
    (bottom, bottom); the arity of a pair is the max of the component arities
    and bottom has arity 0. Pair names are printed ``a|b`` with ``_`` for
    bottom.
    """

    def __init__(self, input_alphabet: RankedAlphabet, output_alphabet: RankedAlphabet):
        self.input = input_alphabet
        self.output = output_alphabet
        comps: dict[Symbol, tuple[Optional[Symbol], Optional[Symbol]]] = {}
        pairs: list[Symbol] = []
        for a in list(input_alphabet.symbols) + [None]:
            for b in list(output_alphabet.symbols) + [None]:
                if a is None and b is None:
                    continue
                sym = pair_symbol(a, b)
                comps[sym] = (a, b)
                pairs.append(sym)
        self._components = comps
        super().__init__(pairs)

    def _check_symbol(self, sym: Symbol) -> None:
        pass  # pair names were built here, nothing to validate

    def pair(self, a: Optional[Symbol], b: Optional[Symbol]) -> Symbol:
        sym = pair_symbol(a, b)
        if sym not in self._components:
            raise TermError(f"pair {sym.name!r} not in convolution alphabet")
        return sym

    def split(self, sym: Symbol) -> tuple[Optional[Symbol], Optional[Symbol]]:
        return self._components[sym]


def pair_symbol(a: Optional[Symbol], b: Optional[Symbol]) -> Symbol:
    if a is None and b is None:
        raise TermError("the all-padding pair is not a symbol")
    an, aa = (a.name, a.arity) if a is not None else (BOT, 0)
    bn, ba = (b.name, b.arity) if b is not None else (BOT, 0)
    return Symbol(f"{an}{PAIR_SEP}{bn}", max(aa, ba))


@dataclass(frozen=True)
class Tree:
    label: str
    children: tuple["Tree", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def __str__(self) -> str:
        return print_term(self)


def leaf(label: str) -> Tree:
    return Tree(label, ())


def node(label: str, *children: Tree) -> Tree:
    return Tree(label, tuple(children))


def domain(t: Tree) -> list[Address]:
    """All node addresses of t in preorder."""
    out: list[Address] = []
    stack: list[tuple[Address, Tree]] = [((), t)]
    while stack:
        addr, n = stack.pop()
        out.append(addr)
        for i in range(len(n.children) - 1, -1, -1):
            stack.append((addr + (i + 1,), n.children[i]))
    return out


def iter_nodes(t: Tree) -> Iterator[tuple[Address, Tree]]:
    stack: list[tuple[Address, Tree]] = [((), t)]
    while stack:
        addr, n = stack.pop()
        yield addr, n
        for i in range(len(n.children) - 1, -1, -1):
            stack.append((addr + (i + 1,), n.children[i]))


def subtree(t: Tree, addr: Address) -> Tree:
    cur = t
    for i in addr:
        if not 1 <= i <= len(cur.children):
            raise TermError(f"address {addr} not in tree domain")
        cur = cur.children[i - 1]
    return cur


def has_address(t: Tree, addr: Address) -> bool:
    cur = t
    for i in addr:
        if not 1 <= i <= len(cur.children):
            return False
        cur = cur.children[i - 1]
    return True


def replace_at(t: Tree, addr: Address, s: Tree) -> Tree:
    if not addr:
        return s
    i = addr[0]
    if not 1 <= i <= len(t.children):
        raise TermError(f"address {addr} not in tree domain")
    kids = list(t.children)
    kids[i - 1] = replace_at(kids[i - 1], addr[1:], s)
    return Tree(t.label, tuple(kids))


def depth(t: Tree) -> int:
    """Edge depth: a single leaf has depth 0."""
    if not t.children:
        return 0
    return 1 + max(depth(c) for c in t.children)


def size(t: Tree) -> int:
    return 1 + sum(size(c) for c in t.children)


def check_tree(alphabet: RankedAlphabet, t: Tree) -> None:
    """Validate the arity law of t against the governing alphabet."""
    for addr, n in iter_nodes(t):
        if alphabet.get(n.label, len(n.children)) is None:
            if alphabet.has_name(n.label):
                raise TermError(
                    f"arity mismatch at {addr}: {n.label!r} does not take "
                    f"{len(n.children)} children")
            raise TermError(f"unknown symbol {n.label!r} at {addr}")


def symbol_at(t: Tree, addr: Address) -> Symbol:
    n = subtree(t, addr)
    return Symbol(n.label, len(n.children))


# ---------------------------------------------------------------------------
# Special trees (one hole) and contexts (variables $1..$n)

def hole() -> Tree:
    return Tree(HOLE, ())


def hole_addresses(t: Tree) -> list[Address]:
    return [a for a, n in iter_nodes(t) if n.label == HOLE and n.is_leaf]


def is_special(t: Tree) -> bool:
    return len(hole_addresses(t)) == 1


def splice(t: Tree, s: Tree) -> Tree:
    """Concatenation t . s: replace the hole of t by s.

    The result keeps a hole exactly when s has one.
    """
    holes = hole_addresses(t)
    if len(holes) != 1:
        raise TermError("left operand of splice must contain exactly one hole")
    return replace_at(t, holes[0], s)


def splice_all(parts: Sequence[Tree]) -> Tree:
    """Fold splice over a sequence: parts[0] . parts[1] . ... ."""
    if not parts:
        raise TermError("nothing to splice")
    out = parts[0]
    for p in parts[1:]:
        out = splice(out, p)
    return out


def var_label(i: int) -> str:
    return f"${i}"


def is_var(label: str) -> bool:
    return bool(VAR_RE.fullmatch(label))


def var_index(label: str) -> int:
    m = VAR_RE.fullmatch(label)
    if not m:
        raise TermError(f"{label!r} is not a context variable")
    return int(m.group(1))


def context_vars(t: Tree) -> list[Address]:
    """Addresses of variable leaves in left-to-right order."""
    out = [a for a, n in iter_nodes(t) if n.is_leaf and is_var(n.label)]
    return sorted(out)


def check_context(t: Tree, n: int) -> None:
    """A well-formed n-context has $1..$n exactly once, left to right."""
    addrs = context_vars(t)
    labels = [subtree(t, a).label for a in addrs]
    if labels != [var_label(i) for i in range(1, n + 1)]:
        raise TermError(f"not a {n}-context: variables read {labels}")


def substitute(c: Tree, parts: Sequence[Tree]) -> Tree:
    """C[t_1,...,t_n]: replace each $i of the context by parts[i-1]."""
    addrs = context_vars(c)
    if len(addrs) != len(parts):
        raise TermError(
            f"context has {len(addrs)} variables, got {len(parts)} trees")
    out = c
    for a in addrs:
        i = var_index(subtree(c, a).label)
        if not 1 <= i <= len(parts):
            raise TermError(f"variable ${i} out of range")
        out = replace_at(out, a, parts[i - 1])
    return out


# ---------------------------------------------------------------------------
# Convolution

def convolution(t1: Optional[Tree], t2: Optional[Tree]) -> Tree:
    """t1 (x) t2: union of both domains, labels paired with padding."""
    if t1 is None and t2 is None:
        raise TermError("convolution of two absent trees")
    a = t1.label if t1 is not None else BOT
    b = t2.label if t2 is not None else BOT
    n1 = len(t1.children) if t1 is not None else 0
    n2 = len(t2.children) if t2 is not None else 0
    kids = []
    for i in range(max(n1, n2)):
        c1 = t1.children[i] if t1 is not None and i < n1 else None
        c2 = t2.children[i] if t2 is not None and i < n2 else None
        kids.append(convolution(c1, c2))
    return Tree(f"{a}{PAIR_SEP}{b}", tuple(kids))


def convolve_bot(t: Tree, side: str) -> Tree:
    """t (x) bottom or bottom (x) t, by side 'input' or 'output'."""
    if side == "input":
        return convolution(t, None)
    if side == "output":
        return convolution(None, t)
    raise TermError(f"side must be 'input' or 'output', got {side!r}")


def split_pair_label(label: str) -> tuple[Optional[str], Optional[str]]:
    if PAIR_SEP not in label:
        raise TermError(f"{label!r} is not a convolution pair label")
    a, b = label.split(PAIR_SEP, 1)
    return (None if a == BOT else a, None if b == BOT else b)


def project(t: Tree, side: str) -> Optional[Tree]:
    """Erase the padding side of a convolution tree; inverse of convolution."""
    a, b = split_pair_label(t.label)
    lab = a if side == "input" else b
    if lab is None:
        return None
    kids = []
    for c in t.children:
        p = project(c, side)
        if p is None:
            break  # component children form a prefix of the pair children
        kids.append(p)
    return Tree(lab, tuple(kids))


def max_path_len_along(t: Tree, u: Address) -> int:
    """max |v| over nodes v of t comparable with u by the prefix order.

    The off-tree part of u is never counted; the root always qualifies.
    """
    best = 0
    for v in domain(t):
        k = min(len(u), len(v))
        if v[:k] == u[:k] and (len(v) <= len(u) or len(u) == k):
            best = max(best, len(v))
    return best


# ---------------------------------------------------------------------------
# Term text I/O
#
# Grammar (whitespace insignificant):
#   term := name | name "(" term ("," term)* ")"
# A convolution pair label is written name|name with `_` for the padding.

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*(?:\|[A-Za-z_][A-Za-z0-9_]*)?)"
    r"|(?P<lpar>\()|(?P<rpar>\))|(?P<comma>,))")


class _TermParser:
    def __init__(self, text: str, alphabet: Optional[RankedAlphabet]):
        self.text = text
        self.alphabet = alphabet
        self.pos = 0

    def error(self, msg: str) -> TermError:
        return TermError(f"{msg} at position {self.pos}")

    def next_token(self) -> Optional[tuple[str, str]]:
        m = _TOKEN_RE.match(self.text, self.pos)
        if m is None:
            rest = self.text[self.pos:].lstrip()
            if not rest:
                return None
            raise self.error(f"unexpected character {rest[0]!r}")
        self.pos = m.end()
        for kind in ("name", "lpar", "rpar", "comma"):
            if m.group(kind) is not None:
                return kind, m.group(kind)
        return None

    def peek(self) -> Optional[tuple[str, str]]:
        saved = self.pos
        tok = self.next_token()
        self.pos = saved
        return tok

    def parse(self) -> Tree:
        t = self.term()
        if self.peek() is not None:
            raise self.error("trailing input after term")
        return t

    def term(self) -> Tree:
        tok = self.next_token()
        if tok is None:
            raise self.error("expected a symbol name")
        kind, name = tok
        if kind != "name":
            raise self.error(f"expected a symbol name, got {name!r}")
        children: list[Tree] = []
        nxt = self.peek()
        if nxt is not None and nxt[0] == "lpar":
            self.next_token()
            children.append(self.term())
            while True:
                tok = self.next_token()
                if tok is None:
                    raise self.error("unclosed '('")
                if tok[0] == "rpar":
                    break
                if tok[0] != "comma":
                    raise self.error(f"expected ',' or ')', got {tok[1]!r}")
                children.append(self.term())
        t = Tree(name, tuple(children))
        if self.alphabet is not None:
            if self.alphabet.get(name, len(children)) is None:
                if self.alphabet.has_name(name):
                    raise self.error(
                        f"arity mismatch: {name!r} with {len(children)} children")
                raise self.error(f"unknown symbol {name!r}")
        return t


def parse_term(text: str, alphabet: Optional[RankedAlphabet] = None) -> Tree:
    return _TermParser(text, alphabet).parse()


def print_term(t: Tree) -> str:
    if not t.children:
        return t.label
    return f"{t.label}({','.join(print_term(c) for c in t.children)})"

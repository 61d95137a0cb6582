"""Top-down tree automata over plain or convolution alphabets.

Runs, membership, emptiness, and the three decision predicates used as edge
constraints by the synthesis games, with constructive witnesses. Predicate
results are memoized per automaton; automata are treated as immutable after
construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .terms import (
    BOT, Address, ConvolutionAlphabet, RankedAlphabet, Symbol, TermError,
    Tree, convolve_bot, pair_symbol, parse_term, print_term,
)

# When set (test builds), every witness returned by the existence predicates
# is re-checked by run() before being handed out.
CHECK_WITNESSES = False


class AutomatonError(ValueError):
    pass


@dataclass(frozen=True)
class Transition:
    state: str
    sym: Symbol
    targets: tuple[str, ...]

    def __str__(self) -> str:
        rhs = " ".join(self.targets)
        return f"{self.state} {self.sym.name}" + (f" -> {rhs}" if rhs else "")


class TopDownAutomaton:
    """A = (Q, Sigma, Q0, Delta) reading trees from the root."""

    def __init__(self, states: Sequence[str], alphabet: RankedAlphabet,
                 initials: Sequence[str],
                 transitions: Iterable[Union[Transition, tuple]]):
        self.states: tuple[str, ...] = tuple(dict.fromkeys(states))
        self.alphabet = alphabet
        self.initials: tuple[str, ...] = tuple(dict.fromkeys(initials))
        trs = []
        for tr in transitions:
            if not isinstance(tr, Transition):
                tr = Transition(tr[0], tr[1], tuple(tr[2]))
            trs.append(tr)
        state_pos = {q: i for i, q in enumerate(self.states)}
        if not self.initials:
            raise AutomatonError("automaton needs an initial state")
        for q in self.initials:
            if q not in state_pos:
                raise AutomatonError(f"initial state {q!r} not declared")
        for tr in trs:
            if tr.state not in state_pos or any(q not in state_pos for q in tr.targets):
                raise AutomatonError(f"undeclared state in transition {tr}")
            if tr.sym not in alphabet:
                raise AutomatonError(f"unknown symbol {tr.sym} in transition {tr}")
            if len(tr.targets) != tr.sym.arity:
                raise AutomatonError(
                    f"transition {tr} has {len(tr.targets)} targets, "
                    f"symbol arity is {tr.sym.arity}")
        trs.sort(key=lambda tr: (state_pos[tr.state], alphabet.index(tr.sym), tr.targets))
        self.transitions: tuple[Transition, ...] = tuple(dict.fromkeys(trs))
        self._by_state_sym: dict[tuple[str, Symbol], list[Transition]] = {}
        for tr in self.transitions:
            self._by_state_sym.setdefault((tr.state, tr.sym), []).append(tr)
        self._cache: dict = {}

    # -- basic views ------------------------------------------------------

    @property
    def is_deterministic(self) -> bool:
        return len(self.initials) == 1 and \
            all(len(v) == 1 for v in self._by_state_sym.values())

    @property
    def initial(self) -> str:
        if len(self.initials) != 1:
            raise AutomatonError("nondeterministic automaton has no single initial")
        return self.initials[0]

    @property
    def is_convolution(self) -> bool:
        return isinstance(self.alphabet, ConvolutionAlphabet)

    def conv_alphabet(self) -> ConvolutionAlphabet:
        if not isinstance(self.alphabet, ConvolutionAlphabet):
            raise AutomatonError("automaton is not over a convolution alphabet")
        return self.alphabet

    def rules_from(self, q: str, sym: Symbol) -> list[Transition]:
        return self._by_state_sym.get((q, sym), [])

    def transition(self, q: str, sym: Symbol) -> Optional[Transition]:
        """The unique transition on (q, sym), for deterministic automata."""
        trs = self._by_state_sym.get((q, sym), [])
        return trs[0] if trs else None

    def __repr__(self) -> str:
        return (f"TopDownAutomaton(|Q|={len(self.states)}, "
                f"initials={list(self.initials)}, |Delta|={len(self.transitions)})")


# ---------------------------------------------------------------------------
# Runs and membership

def run(A: TopDownAutomaton, t: Tree, from_state: Optional[str] = None
        ) -> Optional[dict[Address, str]]:
    """Some accepting run of A on t, or None.

    For deterministic A this is the unique candidate. Nondeterminism is
    resolved by a bottom-up acceptance-set pass followed by a top-down pick.
    """
    acc: dict[Tree, frozenset[str]] = {}

    def accept_set(n: Tree) -> frozenset[str]:
        got = acc.get(n)
        if got is not None:
            return got
        sym = Symbol(n.label, len(n.children))
        kid_sets = [accept_set(c) for c in n.children]
        states = set()
        for q in A.states:
            for tr in A.rules_from(q, sym):
                if all(tr.targets[i] in kid_sets[i] for i in range(len(kid_sets))):
                    states.add(q)
                    break
        acc[n] = frozenset(states)
        return acc[n]

    roots = accept_set(t)
    starts = [from_state] if from_state is not None else list(A.initials)
    start = next((q for q in starts if q in roots), None)
    if start is None:
        return None
    rho: dict[Address, str] = {}

    def assign(addr: Address, n: Tree, q: str) -> None:
        rho[addr] = q
        sym = Symbol(n.label, len(n.children))
        for tr in A.rules_from(q, sym):
            if all(tr.targets[i] in acc[n.children[i]] for i in range(len(n.children))):
                for i, c in enumerate(n.children):
                    assign(addr + (i + 1,), c, tr.targets[i])
                return
        raise AssertionError("acceptance sets and run extraction disagree")

    assign((), t, start)
    return rho


def accepts(A: TopDownAutomaton, t: Tree, from_state: Optional[str] = None) -> bool:
    return run(A, t, from_state) is not None


def productive_states(A: TopDownAutomaton) -> frozenset[str]:
    """q is productive iff T(A_q) is non-empty (least fixpoint)."""
    key = ("productive",)
    if key in A._cache:
        return A._cache[key]
    prod: set[str] = set()
    changed = True
    while changed:
        changed = False
        for tr in A.transitions:
            if tr.state not in prod and all(q in prod for q in tr.targets):
                prod.add(tr.state)
                changed = True
    A._cache[key] = frozenset(prod)
    return A._cache[key]


# ---------------------------------------------------------------------------
# The three decidable edge-constraint predicates.
#
# All three work on a deterministic automaton over a convolution alphabet.
# Fixpoint witnesses pick the first solving output symbol in declaration
# order, so results are reproducible.

def univ_input_states(A: TopDownAutomaton) -> frozenset[str]:
    """Greatest fixpoint W: from q, every input tree padded with bottom on
    the output side is accepted."""
    key = ("univ_input",)
    if key in A._cache:
        return A._cache[key]
    calph = A.conv_alphabet()
    W = set(A.states)
    changed = True
    while changed:
        changed = False
        for q in list(W):
            ok = True
            for f in calph.input.symbols:
                tr = A.transition(q, calph.pair(f, None))
                if tr is None or any(p not in W for p in tr.targets):
                    ok = False
                    break
            if not ok:
                W.discard(q)
                changed = True
    A._cache[key] = frozenset(W)
    return A._cache[key]


def pred_univ_input(A: TopDownAutomaton, q: str) -> bool:
    return q in univ_input_states(A)


def pred_exists_output(A: TopDownAutomaton, q: str) -> Optional[Tree]:
    """A tree t' with bottom (x) t' in T(A_q), or None. Least fixpoint with
    back-pointers; the witness is built from the first solving symbol in
    declaration order."""
    key = ("exists_output",)
    if key not in A._cache:
        calph = A.conv_alphabet()
        solved: dict[str, tuple[Symbol, tuple[str, ...]]] = {}
        changed = True
        while changed:
            changed = False
            for state in A.states:
                if state in solved:
                    continue
                for g in calph.output.symbols:
                    tr = A.transition(state, calph.pair(None, g))
                    if tr is not None and all(p in solved for p in tr.targets):
                        solved[state] = (g, tr.targets)
                        changed = True
                        break
        witness: dict[str, Tree] = {}

        def build(state: str) -> Tree:
            if state not in witness:
                g, targets = solved[state]
                witness[state] = Tree(g.name, tuple(build(p) for p in targets))
            return witness[state]

        A._cache[key] = {state: build(state) for state in solved}
    witness_tree = A._cache[key].get(q)
    if witness_tree is not None and CHECK_WITNESSES:
        assert accepts(A, convolve_bot(witness_tree, "output"), q)
    return witness_tree


def uniform_output(A: TopDownAutomaton, s_eq: Iterable[str],
                   s_bot: Iterable[str]) -> Optional[Tree]:
    """A tree t' that works uniformly: for q in s_eq, t (x) t' in T(A_q) for
    every input t; for q in s_bot, bottom (x) t' in T(A_q). None if there is
    no such t'.

    Least fixpoint over pairs of state sets, explored on demand from the
    queried root pair. A pair is solvable with root symbol g when every
    q in s_eq has a (f,g)-transition for every input symbol f, input-only
    child positions land in the univ-input set, and the per-position
    obligations regroup into solvable pairs.
    """
    root = (frozenset(s_eq), frozenset(s_bot))
    key = ("uniform", root)
    if key in A._cache:
        return A._cache[key]
    calph = A.conv_alphabet()
    W = univ_input_states(A)

    def decompose(pair, g: Symbol):
        """Child obligations of pair under root output symbol g, or None."""
        eq, bot = pair
        j = g.arity
        child_eq = [set() for _ in range(j)]
        child_bot = [set() for _ in range(j)]
        for q in eq:
            for f in calph.input.symbols:
                tr = A.transition(q, calph.pair(f, g))
                if tr is None:
                    return None
                i = f.arity
                for l in range(1, max(i, j) + 1):
                    tgt = tr.targets[l - 1]
                    if l <= min(i, j):
                        child_eq[l - 1].add(tgt)
                    elif l <= i:
                        if tgt not in W:
                            return None
                    else:
                        child_bot[l - 1].add(tgt)
        for q in bot:
            tr = A.transition(q, calph.pair(None, g))
            if tr is None:
                return None
            for l in range(1, j + 1):
                child_bot[l - 1].add(tr.targets[l - 1])
        return [(frozenset(child_eq[l]), frozenset(child_bot[l])) for l in range(j)]

    # explore the reachable pair space
    candidates: dict[tuple, list[tuple[Symbol, list]]] = {}
    queue = [root]
    while queue:
        pair = queue.pop()
        if pair in candidates:
            continue
        options = []
        for g in calph.output.symbols:
            kids = decompose(pair, g)
            if kids is not None:
                options.append((g, kids))
                for kid in kids:
                    if kid not in candidates:
                        queue.append(kid)
        candidates[pair] = options

    solved: dict[tuple, tuple[Symbol, list]] = {}
    changed = True
    while changed:
        changed = False
        for pair in candidates:
            if pair in solved:
                continue
            for g, kids in candidates[pair]:
                if all(k in solved for k in kids):
                    solved[pair] = (g, kids)
                    changed = True
                    break

    result: Optional[Tree] = None
    if root in solved:
        memo: dict[tuple, Tree] = {}

        def build(pair) -> Tree:
            if pair not in memo:
                g, kids = solved[pair]
                memo[pair] = Tree(g.name, tuple(build(k) for k in kids))
            return memo[pair]

        result = build(root)
    A._cache[key] = result
    if result is not None and CHECK_WITNESSES:
        from .oracle import enumerate_trees
        for q in root[1]:
            assert accepts(A, convolve_bot(result, "output"), q)
        for q in root[0]:
            from .terms import convolution
            for t in enumerate_trees(calph.input, 2):
                assert accepts(A, convolution(t, result), q)
    return result


def pred_uniform_output(A: TopDownAutomaton, q: str) -> Optional[Tree]:
    """Lemma-style single-state form: one output tree matching all inputs."""
    return uniform_output(A, {q}, ())


# ---------------------------------------------------------------------------
# Automaton file format (line oriented, `#` comments):
#
#   input f:2 a:0
#   output f:2 g:2 b:0      (absent for plain automata)
#   states q0 q qf
#   initial q0
#   q0 f|g -> q q           (pair transition)
#   q0 a|b                  (arity-0 pair)
#   q1 _|g -> q2            (bottom on the input side)
#   q0 f -> q1 q2           (plain automaton)

def _parse_symbol_decls(parts: list[str], lineno: int) -> list[tuple[str, int]]:
    out = []
    for p in parts:
        if ":" not in p:
            raise AutomatonError(f"line {lineno}: expected name:arity, got {p!r}")
        name, _, ar = p.partition(":")
        try:
            out.append((name, int(ar)))
        except ValueError:
            raise AutomatonError(f"line {lineno}: bad arity in {p!r}") from None
    return out


def load_automaton(text: str) -> TopDownAutomaton:
    input_syms: list[tuple[str, int]] = []
    output_syms: list[tuple[str, int]] = []
    states: list[str] = []
    initials: list[str] = []
    raw_transitions: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "input":
            input_syms += _parse_symbol_decls(parts[1:], lineno)
        elif head == "output":
            output_syms += _parse_symbol_decls(parts[1:], lineno)
        elif head == "states":
            states += parts[1:]
        elif head == "initial":
            initials += parts[1:]
        else:
            raw_transitions.append((lineno, parts))
    if not input_syms:
        raise AutomatonError("missing 'input' symbol declaration")
    inp = RankedAlphabet(input_syms)
    alphabet: RankedAlphabet
    if output_syms:
        alphabet = ConvolutionAlphabet(inp, RankedAlphabet(output_syms))
    else:
        alphabet = inp

    def resolve(label: str, arity_hint: int, lineno: int) -> Symbol:
        if isinstance(alphabet, ConvolutionAlphabet) and "|" in label:
            a_name, _, b_name = label.partition("|")
            a = _component(alphabet.input, a_name, lineno)
            b = _component(alphabet.output, b_name, lineno)
            cands = [s for s in (pair_symbol(av, bv) for av in a for bv in b)
                     if s in alphabet and s.arity == arity_hint]
            if not cands:
                raise AutomatonError(
                    f"line {lineno}: no pair {label!r} with arity {arity_hint}")
            return cands[0]
        cands = [s for s in alphabet.symbols
                 if s.name == label and s.arity == arity_hint]
        if not cands:
            raise AutomatonError(
                f"line {lineno}: no symbol {label!r} with arity {arity_hint}")
        return cands[0]

    transitions = []
    for lineno, parts in raw_transitions:
        if len(parts) < 2:
            raise AutomatonError(f"line {lineno}: malformed transition")
        state, label = parts[0], parts[1]
        if len(parts) > 2:
            if parts[2] != "->":
                raise AutomatonError(f"line {lineno}: expected '->'")
            targets = tuple(parts[3:])
        else:
            targets = ()
        transitions.append(Transition(state, resolve(label, len(targets), lineno), targets))
    return TopDownAutomaton(states, alphabet, initials, transitions)


def _component(al: RankedAlphabet, name: str, lineno: int) -> list[Optional[Symbol]]:
    if name == BOT:
        return [None]
    got = [s for s in al.symbols if s.name == name]
    if not got:
        raise AutomatonError(f"line {lineno}: unknown component symbol {name!r}")
    return got


def format_automaton(A: TopDownAutomaton) -> str:
    lines = []
    if isinstance(A.alphabet, ConvolutionAlphabet):
        lines.append("input " + " ".join(f"{s.name}:{s.arity}"
                                         for s in A.alphabet.input.symbols))
        lines.append("output " + " ".join(f"{s.name}:{s.arity}"
                                          for s in A.alphabet.output.symbols))
    else:
        lines.append("input " + " ".join(f"{s.name}:{s.arity}"
                                         for s in A.alphabet.symbols))
    lines.append("states " + " ".join(A.states))
    lines.append("initial " + " ".join(A.initials))
    for tr in A.transitions:
        lines.append(str(tr))
    return "\n".join(lines) + "\n"

"""Independent brute-force oracles used by the test suite.

Everything here re-derives results straight from definitions (enumeration,
direct greatest fixpoints on products with a fixed output tree) so it can
check the library's fixpoint constructions.
"""

from __future__ import annotations

import itertools
from random import Random
from typing import Optional

from tdtsynth.automata import TopDownAutomaton, Transition, accepts
from tdtsynth.terms import (
    ConvolutionAlphabet, RankedAlphabet, Symbol, Tree, convolution,
    convolve_bot, subtree,
)


def trees_up_to_size(alphabet: RankedAlphabet, max_size: int) -> list[Tree]:
    by_size: dict[int, list[Tree]] = {}
    for n in range(1, max_size + 1):
        out = []
        for s in alphabet.symbols:
            if s.arity == 0:
                if n == 1:
                    out.append(Tree(s.name, ()))
                continue
            for split in _compositions(n - 1, s.arity):
                for kids in itertools.product(*[by_size.get(k, []) for k in split]):
                    out.append(Tree(s.name, kids))
        by_size[n] = out
    return [t for n in range(1, max_size + 1) for t in by_size[n]]


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def trees_up_to_depth(alphabet: RankedAlphabet, max_depth: int) -> list[Tree]:
    upto: list[Tree] = [Tree(s.name, ()) for s in alphabet.symbols if s.arity == 0]
    seen = set(upto)
    for _ in range(max_depth):
        prev = list(upto)
        for s in alphabet.symbols:
            if s.arity == 0:
                continue
            for kids in itertools.product(prev, repeat=s.arity):
                t = Tree(s.name, kids)
                if t not in seen:
                    seen.add(t)
                    upto.append(t)
    return upto


def find_univ_refuter(A: TopDownAutomaton, q: str, max_size: int) -> Optional[Tree]:
    """Smallest input t (by size) with t (x) bot rejected from q, if any."""
    calph = A.conv_alphabet()
    for t in trees_up_to_size(calph.input, max_size):
        if not accepts(A, convolve_bot(t, "input"), q):
            return t
    return None


def check_uniform_fixed(A: TopDownAutomaton, q: str, out_tree: Tree) -> bool:
    """Exact check of  forall t: t (x) out_tree in T(A_q)  for a fixed tree.

    Direct greatest fixpoint on (state, output position) product states;
    output-only subtrees are checked by a plain membership run.
    """
    calph = A.conv_alphabet()
    assumed: dict[tuple[str, Optional[tuple]], bool] = {}

    def ok(state: str, pos: Optional[tuple]) -> bool:
        key = (state, pos)
        if key in assumed:
            return assumed[key]
        assumed[key] = True  # coinductive assumption
        g = None if pos is None else Symbol(subtree(out_tree, pos).label,
                                            len(subtree(out_tree, pos).children))
        for f in calph.input.symbols:
            tr = A.transition(state, calph.pair(f, g))
            if tr is None:
                assumed[key] = False
                return False
            rg = 0 if g is None else g.arity
            for l in range(1, max(f.arity, rg) + 1):
                tgt = tr.targets[l - 1]
                if l <= min(f.arity, rg):
                    if not ok(tgt, pos + (l,)):
                        assumed[key] = False
                        return False
                elif l <= f.arity:
                    if not ok(tgt, None):
                        assumed[key] = False
                        return False
                else:
                    if not accepts(A, convolve_bot(subtree(out_tree, pos + (l,)),
                                                   "output"), tgt):
                        assumed[key] = False
                        return False
        return assumed[key]

    return ok(q, ())


def random_convolution_automaton(rng: Random, n_states: int,
                                 input_syms=(("f", 2), ("a", 0)),
                                 output_syms=(("g", 1), ("b", 0)),
                                 density: float = 0.55) -> TopDownAutomaton:
    """A random deterministic convolution automaton with every pair symbol
    getting at most one transition per state."""
    calph = ConvolutionAlphabet(RankedAlphabet(input_syms),
                                RankedAlphabet(output_syms))
    states = [f"q{i}" for i in range(n_states)]
    transitions = []
    for q in states:
        for sym in calph.symbols:
            if rng.random() < density:
                targets = tuple(rng.choice(states) for _ in range(sym.arity))
                transitions.append(Transition(q, sym, targets))
    return TopDownAutomaton(states, calph, [states[0]], transitions)

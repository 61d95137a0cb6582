"""Brute-force ground truth at desk scale.

Tree enumeration, relation membership, uniformizer verification, and
refutation of small transducers. Everything here is deliberately independent
of the synthesis pipeline so it can serve as an oracle for it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .automata import TopDownAutomaton, accepts
from .terms import (
    RankedAlphabet, Symbol, Tree, convolution, depth, print_term, var_label,
)
from .transducers import Rule, StuckError, Transducer, TransducerError, execute


class BudgetError(RuntimeError):
    pass


def enumerate_trees(alphabet: RankedAlphabet, max_depth: int) -> list[Tree]:
    """All trees of depth <= max_depth, ordered by depth then lexicographically
    by symbol declaration. Deterministic, duplicate free."""
    by_depth: list[list[Tree]] = []
    upto: list[Tree] = []
    for d in range(max_depth + 1):
        if d == 0:
            exact = [Tree(s.name, ()) for s in alphabet.symbols if s.arity == 0]
        else:
            prev_upto = list(upto)
            exact = []
            for s in alphabet.symbols:
                if s.arity == 0:
                    continue
                for kids in itertools.product(prev_upto, repeat=s.arity):
                    if max(depth(k) for k in kids) == d - 1:
                        exact.append(Tree(s.name, kids))
        by_depth.append(exact)
        upto.extend(exact)
    return upto


def iter_trees(alphabet: RankedAlphabet, max_depth: int) -> Iterator[Tree]:
    return iter(enumerate_trees(alphabet, max_depth))


@dataclass
class Failure:
    input: Tree
    reason: str

    def __str__(self) -> str:
        return f"{print_term(self.input)}\t{self.reason}"


@dataclass
class VerificationReport:
    checked: int = 0
    failures: list[Failure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __str__(self) -> str:
        head = f"checked {self.checked} inputs, {len(self.failures)} failures"
        lines = [head] + [str(f) for f in self.failures]
        return "\n".join(lines)


def verify_uniformizer(A: TopDownAutomaton, T: Transducer, max_depth: int,
                       dom: Optional[TopDownAutomaton] = None) -> VerificationReport:
    """Check (t, T(t)) in R(A) for every enumerated input accepted by dom.

    Off-domain inputs are skipped entirely: a synthesized transducer may
    behave arbitrarily (including getting stuck) outside the domain.
    """
    calph = A.conv_alphabet()
    report = VerificationReport()
    for t in enumerate_trees(calph.input, max_depth):
        if dom is not None and not accepts(dom, t):
            continue
        report.checked += 1
        try:
            out = execute(T, t)
        except StuckError as e:
            report.failures.append(Failure(t, f"stuck: {e}"))
            continue
        except TransducerError as e:
            report.failures.append(Failure(t, f"error: {e}"))
            continue
        if not accepts(A, convolution(t, out)):
            report.failures.append(
                Failure(t, f"output {print_term(out)} rejected by the relation"))
    return report


# ---------------------------------------------------------------------------
# Refutation of small transducers: enumerate every total DTDT within the
# budgets and find a failing input for each. A completed all-fail table shows
# no transducer of that size uniformizes the relation; a survivor is only
# inconclusive evidence the relation might be realizable.

@dataclass
class RefutationReport:
    total: int = 0
    failed: int = 0
    survivor: Optional[Transducer] = None
    sample: list[tuple[str, str]] = field(default_factory=list)  # (rules, input)

    @property
    def complete(self) -> bool:
        return self.survivor is None and self.failed == self.total

    def __str__(self) -> str:
        if self.survivor is not None:
            return f"survivor found after {self.failed} refuted candidates"
        return f"all {self.total} candidates refuted"


def _rhs_candidates(inp_sym: Symbol, out: RankedAlphabet, states: tuple[str, ...],
                    rule_depth: int) -> list[tuple[Tree, tuple[tuple[str, int], ...]]]:
    """All rule right-hand sides of depth <= rule_depth for one input symbol.

    State-variable leaves read their variables in non-decreasing order; the
    enumeration is a documented semi-decision aid, not a completeness claim.
    """
    arity = inp_sym.arity

    def build(d: int) -> list[tuple[Tree, tuple[tuple[str, int], ...]]]:
        opts: list[tuple[Tree, tuple[tuple[str, int], ...]]] = []
        if arity > 0:
            opts += [(Tree("?", ()), ((q, j),))
                     for q in states for j in range(1, arity + 1)]
        for s in out.symbols:
            if s.arity == 0:
                opts.append((Tree(s.name, ()), ()))
            elif d > 0:
                kid_opts = build(d - 1)
                for kids in itertools.product(kid_opts, repeat=s.arity):
                    targets: list[tuple[str, int]] = []
                    ok = True
                    for _, tg in kids:
                        for q, j in tg:
                            if targets and j < targets[-1][1]:
                                ok = False
                                break
                            targets.append((q, j))
                        if not ok:
                            break
                    if ok:
                        opts.append((Tree(s.name, tuple(k for k, _ in kids)),
                                     tuple(targets)))
        return opts

    out_opts = []
    for ctx, targets in build(rule_depth):
        # renumber the ? placeholders into $1..$n left to right
        counter = itertools.count(1)

        def renumber(n: Tree) -> Tree:
            if n.label == "?" and not n.children:
                return Tree(var_label(next(counter)), ())
            return Tree(n.label, tuple(renumber(c) for c in n.children))

        out_opts.append((renumber(ctx), targets))
    return out_opts


def refute_small_transducers(A: TopDownAutomaton, state_budget: int,
                             rule_depth: int, input_depth: int,
                             dom: Optional[TopDownAutomaton] = None,
                             max_candidates: int = 2_000_000) -> RefutationReport:
    calph = A.conv_alphabet()
    inp, out = calph.input, calph.output
    inputs = [t for t in enumerate_trees(inp, input_depth)
              if dom is None or accepts(dom, t)]
    inputs.sort(key=lambda t: (depth(t), print_term(t)))
    report = RefutationReport()
    for n_states in range(1, state_budget + 1):
        states = tuple(f"p{k}" for k in range(1, n_states + 1))
        per_sym = {s: _rhs_candidates(s, out, states, rule_depth)
                   for s in inp.symbols}
        combos = 1
        for s in inp.symbols:
            combos *= len(per_sym[s]) ** n_states
        combos *= n_states
        if report.total + combos > max_candidates:
            raise BudgetError(
                f"refutation budget exceeded: {report.total + combos} candidates")
        syms = list(inp.symbols)
        option_lists = [per_sym[s] for s in syms for _ in states]
        keys = [(q, s) for s in syms for q in states]
        acc_cache: dict[tuple[Tree, Tree], bool] = {}
        for choice in itertools.product(*option_lists):
            rules = {keys[i]: choice[i] for i in range(len(keys))}
            for initial in states:
                report.total += 1
                bad = _first_failure(A, rules, initial, inputs, acc_cache)
                if bad is None:
                    report.survivor = _materialize(rules, initial, states, inp, out)
                    return report
                report.failed += 1
                if len(report.sample) < 20:
                    report.sample.append((repr(sorted(
                        (q, s.name) for (q, s) in rules)), print_term(bad)))
    return report


def _first_failure(A: TopDownAutomaton, rules, initial: str, inputs: list[Tree],
                   acc_cache: dict[tuple[Tree, Tree], bool]) -> Optional[Tree]:
    from .terms import substitute

    def ev(q: str, t: Tree) -> Optional[Tree]:
        sym = Symbol(t.label, len(t.children))
        got = rules.get((q, sym))
        if got is None:
            return None
        ctx, targets = got
        parts = []
        for tq, j in targets:
            sub = ev(tq, t.children[j - 1])
            if sub is None:
                return None
            parts.append(sub)
        return substitute(ctx, parts)

    for t in inputs:
        outt = ev(initial, t)
        if outt is None:
            return t
        ok = acc_cache.get((t, outt))
        if ok is None:
            ok = accepts(A, convolution(t, outt))
            acc_cache[(t, outt)] = ok
        if not ok:
            return t
    return None


def _materialize(rules, initial: str, states, inp, out) -> Transducer:
    rule_objs = [Rule(q, s, ctx, tuple(tg))
                 for (q, s), (ctx, tg) in sorted(rules.items(),
                                                 key=lambda kv: (kv[0][0], kv[0][1]))]
    return Transducer(states, inp, out, initial, rule_objs)

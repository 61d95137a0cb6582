"""Top-down tree transducers: model, configuration semantics, execution.

A rule rewrites a state-labeled output leaf by an output context whose
variables become new state leaves attached to children of the consumed input
node. Execution is defined for deterministic transducers only; stuck
configurations are reported with the offending (state, symbol) pair because
synthesized transducers may legitimately be partial off-domain.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .terms import (
    Address, RankedAlphabet, Symbol, TermError, Tree, check_context,
    context_vars, print_term, replace_at, subtree, substitute, var_index,
    var_label,
)


class TransducerError(ValueError):
    pass


class StuckError(TransducerError):
    """No rule applies at a reachable state leaf."""

    def __init__(self, state: str, sym: Symbol, at: Address, input_node: Address):
        super().__init__(
            f"stuck: no rule for state {state!r} on {sym.name}:{sym.arity} "
            f"(output node {at}, input node {input_node})")
        self.state = state
        self.sym = sym
        self.at = at
        self.input_node = input_node


@dataclass(frozen=True)
class Rule:
    """state(f(x_1..x_i)) -> context[q_1(x_{j_1}), ..., q_n(x_{j_n})]."""
    state: str
    sym: Symbol
    context: Tree                       # over the output alphabet with $1..$n
    targets: tuple[tuple[str, int], ...]  # (state, input child index 1..i)

    def __post_init__(self):
        check_context(self.context, len(self.targets))
        for q, j in self.targets:
            if not 1 <= j <= self.sym.arity:
                raise TransducerError(
                    f"rule for {self.state}/{self.sym} references x{j}")


@dataclass(frozen=True)
class EpsilonRule:
    """state(x_1) -> context[q_1(x_1), ..., q_n(x_1)]."""
    state: str
    context: Tree
    targets: tuple[str, ...]

    def __post_init__(self):
        check_context(self.context, len(self.targets))


class Transducer:
    def __init__(self, states: Sequence[str], input_alphabet: RankedAlphabet,
                 output_alphabet: RankedAlphabet, initial: str,
                 rules: Iterable[Rule], eps_rules: Iterable[EpsilonRule] = ()):
        self.states = tuple(dict.fromkeys(states))
        self.input_alphabet = input_alphabet
        self.output_alphabet = output_alphabet
        self.initial = initial
        self.rules = tuple(rules)
        self.eps_rules = tuple(eps_rules)
        if initial not in self.states:
            raise TransducerError(f"initial state {initial!r} not declared")
        self.rule_map: dict[tuple[str, Symbol], list[Rule]] = {}
        for r in self.rules:
            if r.state not in self.states:
                raise TransducerError(f"undeclared state {r.state!r}")
            if r.sym not in input_alphabet:
                raise TransducerError(f"unknown input symbol {r.sym}")
            for q, _ in r.targets:
                if q not in self.states:
                    raise TransducerError(f"undeclared target state {q!r}")
            self.rule_map.setdefault((r.state, r.sym), []).append(r)

    @property
    def is_deterministic(self) -> bool:
        return not self.eps_rules and \
            all(len(v) == 1 for v in self.rule_map.values())

    def rule(self, state: str, sym: Symbol) -> Optional[Rule]:
        rs = self.rule_map.get((state, sym), [])
        return rs[0] if rs else None

    def __repr__(self) -> str:
        return (f"Transducer(|Q|={len(self.states)}, initial={self.initial!r}, "
                f"|rules|={len(self.rules)})")


@dataclass(frozen=True)
class Configuration:
    """(t, t', phi): input tree, partial output with state leaves, and the
    correspondence from state-labeled output nodes to input nodes."""
    input: Tree
    output: Tree
    heads: tuple[tuple[Address, str, Address], ...]  # (output node, state, phi)

    def phi(self) -> dict[Address, Address]:
        return {u: v for u, _, v in self.heads}

    def state_at(self, u: Address) -> Optional[str]:
        for addr, q, _ in self.heads:
            if addr == u:
                return q
        return None

    @property
    def is_final(self) -> bool:
        return not self.heads

    def __str__(self) -> str:
        phi = ", ".join(f"{''.join(map(str, u)) or 'e'}->"
                        f"{''.join(map(str, v)) or 'e'}" for u, _, v in self.heads)
        return f"({print_term(self.output)}; {phi})"


def initial_configuration(T: Transducer, t: Tree) -> Configuration:
    return Configuration(t, Tree(T.initial, ()), (((), T.initial, ()),))


def step(T: Transducer, c: Configuration, at: Address) -> Configuration:
    """Apply the unique applicable rule at output node `at`."""
    head = next((h for h in c.heads if h[0] == at), None)
    if head is None:
        raise TransducerError(f"no state leaf at output node {at}")
    _, state, v = head
    in_node = subtree(c.input, v)
    sym = Symbol(in_node.label, len(in_node.children))
    rule = T.rule(state, sym)
    if rule is None:
        raise StuckError(state, sym, at, v)
    # plant the context; variables become fresh state leaves
    placed = rule.context
    var_addrs = context_vars(rule.context)
    new_heads = [h for h in c.heads if h[0] != at]
    for rel in var_addrs:
        k = var_index(subtree(rule.context, rel).label)
        q, j = rule.targets[k - 1]
        placed = replace_at(placed, rel, Tree(q, ()))
        new_heads.append((at + rel, q, v + (j,)))
    new_output = replace_at(c.output, at, placed)
    new_heads.sort()
    return Configuration(c.input, new_output, tuple(new_heads))


def execute(T: Transducer, t: Tree, with_trace: bool = False):
    """Run T on t to completion and return the output tree.

    Scheduling is by rounds: every state leaf present at the start of a round
    is rewritten once, left to right. Determinism makes the result independent
    of this choice. With with_trace=True, returns (output, [c_0, ..., c_n]).
    """
    if not T.is_deterministic:
        raise TransducerError("execute is defined for deterministic transducers")
    c = initial_configuration(T, t)
    trace = [c]
    while not c.is_final:
        for at in [h[0] for h in c.heads]:
            c = step(T, c, at)
            if with_trace:
                trace.append(c)
    if with_trace:
        return c.output, trace
    return c.output


def max_delay(T: Transducer, t: Tree) -> int:
    """Largest |phi(u)| - |u| over all state nodes of all configurations
    traversed by execute; 0 if the output never trails the input."""
    _, trace = execute(T, t, with_trace=True)
    worst = 0
    for c in trace:
        for u, _, v in c.heads:
            worst = max(worst, len(v) - len(u))
    return worst


def is_path_recognizable_shape(T: Transducer) -> bool:
    """Every rule is a bare relay q(f(..)) -> q'(x_j) or a leaf rule emitting
    a variable-free output tree."""
    if T.eps_rules:
        return False
    for r in T.rules:
        relay = r.context == Tree(var_label(1), ()) and len(r.targets) == 1
        leaf_rule = r.sym.arity == 0 and not r.targets
        if not (relay or leaf_rule):
            return False
    return True


# ---------------------------------------------------------------------------
# Transducer file format: automaton-style header plus rule lines
#
#   q0 f(x1,x2) -> f(q1 x1, q2 x2)
#   q0 a -> b
#   q0 f(x1,x2) -> g(h(q1 x2), b)

_TOK = re.compile(r"\s*(?:(?P<var>x[1-9][0-9]*)\b|(?P<name>[^\s(),]+?)(?=[\s(),]|$)"
                  r"|(?P<lpar>\()|(?P<rpar>\))|(?P<comma>,))")


class _RhsParser:
    def __init__(self, text: str, states: set[str], lineno: int):
        self.text = text
        self.states = states
        self.lineno = lineno
        self.pos = 0

    def error(self, msg: str) -> TransducerError:
        return TransducerError(f"line {self.lineno}: {msg}")

    def next(self) -> Optional[tuple[str, str]]:
        if self.pos >= len(self.text) or not self.text[self.pos:].strip():
            return None
        m = _TOK.match(self.text, self.pos)
        if m is None:
            raise self.error(f"bad token near {self.text[self.pos:]!r}")
        self.pos = m.end()
        for kind in ("var", "name", "lpar", "rpar", "comma"):
            if m.group(kind) is not None:
                return kind, m.group(kind)
        return None

    def peek(self) -> Optional[tuple[str, str]]:
        saved = self.pos
        tok = self.next()
        self.pos = saved
        return tok

    def parse(self) -> tuple[Tree, list[tuple[str, int]]]:
        targets: list[tuple[str, int]] = []

        def walk() -> Tree:
            tok = self.next()
            if tok is None:
                raise self.error("missing right-hand side")
            kind, text = tok
            if kind != "name":
                raise self.error(f"expected symbol or state, got {text!r}")
            nxt = self.peek()
            if text in self.states and nxt is not None and nxt[0] == "var":
                _, var = self.next()
                targets.append((text, int(var[1:])))
                return Tree(var_label(len(targets)), ())
            kids: list[Tree] = []
            if nxt is not None and nxt[0] == "lpar":
                self.next()
                kids.append(walk())
                while True:
                    tok = self.next()
                    if tok is None:
                        raise self.error("unclosed '('")
                    if tok[0] == "rpar":
                        break
                    if tok[0] != "comma":
                        raise self.error(f"expected ',' or ')', got {tok[1]!r}")
                    kids.append(walk())
            return Tree(text, tuple(kids))

        ctx = walk()
        if self.peek() is not None:
            raise self.error("trailing input after rule right-hand side")
        return ctx, targets


def load_transducer(text: str) -> Transducer:
    input_syms: list[tuple[str, int]] = []
    output_syms: list[tuple[str, int]] = []
    states: list[str] = []
    initials: list[str] = []
    raw_rules: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()[0]
        rest = line.split(None, 1)[1] if len(line.split(None, 1)) > 1 else ""
        if head == "input":
            input_syms += _decls(rest, lineno)
        elif head == "output":
            output_syms += _decls(rest, lineno)
        elif head == "states":
            states += rest.split()
        elif head == "initial":
            initials += rest.split()
        else:
            raw_rules.append((lineno, line))
    if not input_syms or not output_syms:
        raise TransducerError("transducer needs 'input' and 'output' declarations")
    if len(initials) != 1:
        raise TransducerError("transducer needs exactly one 'initial' state")
    inp = RankedAlphabet(input_syms)
    out = RankedAlphabet(output_syms)
    state_set = set(states)
    rules = []
    for lineno, line in raw_rules:
        if "->" not in line:
            raise TransducerError(f"line {lineno}: expected 'state lhs -> rhs'")
        lhs_text, rhs_text = line.split("->", 1)
        lhs_parts = lhs_text.split(None, 1)
        if len(lhs_parts) != 2:
            raise TransducerError(f"line {lineno}: malformed rule left-hand side")
        state, pat = lhs_parts[0], lhs_parts[1].replace(" ", "")
        m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)(?:\(([^)]*)\))?", pat)
        if m is None:
            raise TransducerError(f"line {lineno}: bad pattern {pat!r}")
        fname = m.group(1)
        vars_ = [v for v in (m.group(2) or "").split(",") if v]
        for k, v in enumerate(vars_, start=1):
            if v != f"x{k}":
                raise TransducerError(
                    f"line {lineno}: pattern variables must read x1..x{len(vars_)}")
        sym = next((s for s in inp.symbols
                    if s.name == fname and s.arity == len(vars_)), None)
        if sym is None:
            raise TransducerError(
                f"line {lineno}: no input symbol {fname!r} of arity {len(vars_)}")
        ctx, targets = _RhsParser(rhs_text, state_set, lineno).parse()
        for q, j in targets:
            if j > sym.arity:
                raise TransducerError(f"line {lineno}: x{j} exceeds pattern arity")
        _check_output_labels(ctx, out, lineno)
        rules.append(Rule(state, sym, ctx, tuple(targets)))
    return Transducer(states, inp, out, initials[0], rules)


def _decls(rest: str, lineno: int) -> list[tuple[str, int]]:
    out = []
    for p in rest.split():
        name, _, ar = p.partition(":")
        if not ar:
            raise TransducerError(f"line {lineno}: expected name:arity, got {p!r}")
        out.append((name, int(ar)))
    return out


def _check_output_labels(ctx: Tree, out: RankedAlphabet, lineno: int) -> None:
    from .terms import is_var, iter_nodes
    for _, n in iter_nodes(ctx):
        if n.is_leaf and is_var(n.label):
            continue
        if out.get(n.label, len(n.children)) is None:
            raise TransducerError(
                f"line {lineno}: {n.label!r} with {len(n.children)} children "
                f"is not an output symbol")


def format_transducer(T: Transducer) -> str:
    lines = [
        "input " + " ".join(f"{s.name}:{s.arity}" for s in T.input_alphabet.symbols),
        "output " + " ".join(f"{s.name}:{s.arity}" for s in T.output_alphabet.symbols),
        "states " + " ".join(T.states),
        "initial " + T.initial,
    ]
    for r in T.rules:
        pat = r.sym.name
        if r.sym.arity:
            pat += "(" + ",".join(f"x{k}" for k in range(1, r.sym.arity + 1)) + ")"
        lines.append(f"{r.state} {pat} -> {_format_rhs(r)}")
    return "\n".join(lines) + "\n"


def _format_rhs(r: Rule) -> str:
    from .terms import is_var

    def walk(n: Tree) -> str:
        if n.is_leaf and is_var(n.label):
            q, j = r.targets[var_index(n.label) - 1]
            return f"{q} x{j}"
        if not n.children:
            return n.label
        return f"{n.label}({', '.join(walk(c) for c in n.children)})"

    return walk(r.context)

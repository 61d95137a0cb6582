import pytest

from tdtsynth.automata import TopDownAutomaton
from tdtsynth.paths import (
    Factorization, LabeledPath, PathError, Profile, compose_profiles,
    double_segment, end_state, find_idempotent_factorization, is_idempotent,
    parse_labeled_path, path_convolution, path_of, profile, pump,
    run_on_path, tau, tree_has_path,
)
from tdtsynth.terms import (
    ConvolutionAlphabet, RankedAlphabet, Symbol, parse_term,
)

SIGMA1 = RankedAlphabet([("f", 2), ("g", 1), ("h", 1), ("a", 0)])
F, G, H, A_ = Symbol("f", 2), Symbol("g", 1), Symbol("h", 1), Symbol("a", 0)


class TestLabeledPath:
    def test_lengths(self):
        pi = path_of(F, 1, G, 1, A_)
        assert pi.length == 3
        assert pi.address == (1, 1)
        assert not pi.ends_with_dir
        assert pi.with_dir not in (None,)

    def test_direction_bound_checked(self):
        with pytest.raises(PathError):
            path_of(G, 2)
        with pytest.raises(PathError):
            path_of(A_, 1)

    def test_text_roundtrip(self):
        pi = path_of(F, 1, G, 1, A_)
        assert pi.to_text() == "f.1.g.1.a"
        assert parse_labeled_path("f.1.g.1.a", SIGMA1) == pi
        assert parse_labeled_path("e", SIGMA1) == LabeledPath()

    def test_parse_resolves_arity_by_direction(self):
        al = RankedAlphabet([("f", 1), ("f", 2), ("a", 0)])
        pi = parse_labeled_path("f.2.a", al)
        assert pi.syms[0] == Symbol("f", 2)
        pi = parse_labeled_path("f.1.a", al)
        assert pi.syms[0] == Symbol("f", 1)


class TestTreeHasPath:
    def test_empty_path_matches_everything(self):
        for text in ["a", "f(g(a),a)"]:
            assert tree_has_path(parse_term(text, SIGMA1), LabeledPath())

    def test_prefix_found(self):
        t = parse_term("f(g(a),a)", SIGMA1)
        assert tree_has_path(t, path_of(F, 1, G))
        assert tree_has_path(t, path_of(F, 1, G, 1, A_))

    def test_wrong_branch_label(self):
        t = parse_term("f(g(a),a)", SIGMA1)
        assert not tree_has_path(t, path_of(F, 2, H))
        assert not tree_has_path(t, path_of(F, 1, H))


class TestPathConvolution:
    def test_equal_shape(self):
        out = RankedAlphabet([("g", 1), ("b", 0)])
        x = path_of(F, 1, A_)
        y = path_of(Symbol("g", 1), 1, Symbol("b", 0))
        xy = path_convolution(x, y)
        assert [s.name for s in xy.syms] == ["f|g", "a|b"]
        assert xy.dirs == (1,)

    def test_empty_output_pads(self):
        x = path_of(F, 1, A_)
        xy = path_convolution(x, LabeledPath())
        assert [s.name for s in xy.syms] == ["f|_", "a|_"]

    def test_divergent_paths_rejected(self):
        x = path_of(F, 1, A_)
        y = path_of(Symbol("g", 2), 2, Symbol("b", 0))
        with pytest.raises(PathError):
            path_convolution(x, y)


class TestRunOnPath:
    def test_spec1_step(self, spec1):
        calph = spec1.conv_alphabet()
        xy = LabeledPath((calph.pair(Symbol("f", 2), Symbol("f", 2)),), ())
        assert end_state(spec1, "q0", xy, 1) == "qf"

    def test_empty_path_is_identity(self, spec1):
        assert end_state(spec1, "q0", LabeledPath(), None) == "q0"

    def test_missing_transition_undefined(self, spec1):
        calph = spec1.conv_alphabet()
        xy = LabeledPath((calph.pair(Symbol("a", 0), Symbol("g", 2)),), ())
        r = run_on_path(spec1, "q0", xy)
        assert not r.accepting
        assert end_state(spec1, "q0", xy, None) == "q0"
        assert end_state(spec1, "q0", xy, 1) is None


def par_symbols(par):
    inp = par.conv_alphabet().input
    out = par.conv_alphabet().output
    return (inp.get("h", 1), inp.get("e", 0), out.get("a", 1), out.get("b", 1),
            out.get("h", 1), out.get("e", 0))


class TestTau:
    def test_unary_is_plain_run_step(self, par):
        h, _, a, *_ = par_symbols(par)
        got = tau(par, LabeledPath((h,), ()), 1, LabeledPath((a,), ()))
        assert got.mapping == {"q0": "r_odd"}
        assert got.obligations == []

    def test_spec1_sibling_obligation_kills(self, spec1):
        inp = spec1.conv_alphabet().input
        out = spec1.conv_alphabet().output
        x = LabeledPath((inp.get("f", 2),), ())
        y = LabeledPath((out.get("f", 2),), ())
        assert tau(spec1, x, 1, y).mapping == {}

    def test_empty_overlay_requires_univ_input(self, spec1):
        inp = spec1.conv_alphabet().input
        x = LabeledPath((inp.get("f", 2),), ())
        assert tau(spec1, x, 1, LabeledPath()).mapping == {}


class TestProfiles:
    def test_par_single_h_profile(self, par):
        h, _, a, b, ho, e = par_symbols(par)
        p = profile(par, LabeledPath((h,), ()), 1)
        flip = (("r_even", "r_odd"), ("r_odd", "r_even"))
        assert p.eq == frozenset({
            ((("q0", "r_odd"),), True),    # overlay a
            ((("q0", "r_even"),), True),   # overlay b
            (flip, True),                   # overlay h
            ((), False),                    # overlay e
        })
        assert p.lt == frozenset()
        assert p.eps == frozenset({()})

    def test_profile_without_equal_length_overlays(self, hb):
        # HB has only leaf outputs, so doubled segments have no eq overlays
        g1 = hb.conv_alphabet().input.get("g", 1)
        seg = LabeledPath((g1, g1), (1,))
        p = profile(hb, seg, 1)
        assert p.eq == frozenset()

    def test_compose_matches_direct_on_par(self, par):
        h, *_ = par_symbols(par)
        p1 = profile(par, LabeledPath((h,), ()), 1)
        direct = profile(par, LabeledPath((h, h), (1,)), 1)
        assert compose_profiles(p1, p1) == direct

    def test_compose_matches_direct_doubled(self, par):
        h, *_ = par_symbols(par)
        seg = LabeledPath((h, h), (1,))
        pd = profile(par, seg, 1)
        assert compose_profiles(pd, pd) == profile(par, double_segment(seg, 1), 1)

    def test_output_renaming_preserves_profile(self, par):
        # swap the roles of a and b everywhere: profiles are isomorphic, and
        # the state-transformation sets coincide after the matching state swap
        h, _, a, b, hо, e = par_symbols(par)
        p = profile(par, LabeledPath((h,), ()), 1)
        swapped = {(("q0", "r_odd"),), (("q0", "r_even"),)}
        got_fns = {fn for fn, _ in p.eq if fn and fn[0][0] == "q0"}
        assert got_fns == swapped


class TestIdempotency:
    def test_par_single_h_not_idempotent(self, par):
        h, *_ = par_symbols(par)
        assert not is_idempotent(par, LabeledPath((h,), ()), 1)

    def test_par_double_h_idempotent(self, par):
        h, *_ = par_symbols(par)
        assert is_idempotent(par, LabeledPath((h, h), (1,)), 1)

    def test_all_empty_profile_is_idempotent(self, par):
        # on an automaton with no transitions, every tau is nowhere defined;
        # from length two upward the three components stabilize, so the
        # segment is idempotent
        h, e_in, a, b, ho, e = par_symbols(par)
        calph = par.conv_alphabet()
        dead = TopDownAutomaton(["z"], calph, ["z"], [])
        seg = LabeledPath((h, h), (1,))
        p = profile(dead, seg, 1)
        assert p.eq_functions() == frozenset({()})
        assert is_idempotent(dead, seg, 1)

    def test_single_letters_never_idempotent(self, par):
        # the shorter-overlay component of a one-letter segment is empty by
        # the length index set, while the doubled segment always has one
        h, *_ = par_symbols(par)
        calph = par.conv_alphabet()
        dead = TopDownAutomaton(["z"], calph, ["z"], [])
        assert not is_idempotent(dead, LabeledPath((h,), ()), 1)


class TestFactorization:
    def test_too_short_paths(self, par):
        h, *_ = par_symbols(par)
        assert find_idempotent_factorization(par, LabeledPath()) is None
        assert find_idempotent_factorization(par, LabeledPath((h,), (1,))) is None

    def test_par_power_four(self, par):
        h, *_ = par_symbols(par)
        pi = LabeledPath((h, h, h, h), (1, 1, 1, 1))
        fact = find_idempotent_factorization(par, pi)
        assert fact is not None
        assert fact.head.is_empty
        assert fact.y == LabeledPath((h, h), (1,))
        assert fact.j == 1
        assert fact.tail == LabeledPath((h, h), (1, 1))

    def test_identity_automaton_factor(self):
        # every transition present on a one-state automaton: all taus total
        inp = RankedAlphabet([("g", 1), ("e", 0)])
        out = RankedAlphabet([("c", 1), ("d", 0)])
        calph = ConvolutionAlphabet(inp, out)
        A = TopDownAutomaton(
            ["u"], calph, ["u"],
            [("u", s, ("u",) * s.arity) for s in calph.symbols])
        g1 = inp.get("g", 1)
        pi = LabeledPath((g1, g1, g1, g1), (1, 1, 1, 1))
        fact = find_idempotent_factorization(A, pi)
        assert fact is not None
        # shortest-first search settles on the two-letter factor: a single
        # letter is never idempotent because its shorter-overlay component is
        # empty by the length constraint while the doubled segment's is not
        assert fact.y.length == 2
        assert fact.head.is_empty


class TestPump:
    @pytest.fixture
    def unary(self):
        return RankedAlphabet([("h", 1), ("a", 0)])

    def test_identity_at_one(self, unary):
        t = parse_term("h(h(a))", unary)
        hy = LabeledPath((unary.get("h", 1),), ())
        assert pump(t, LabeledPath(), hy, 1, 1) == t

    def test_zero_cuts_factor_out(self, unary):
        t = parse_term("h(h(a))", unary)
        hy = LabeledPath((unary.get("h", 1),), ())
        assert pump(t, LabeledPath(), hy, 1, 0) == parse_term("h(a)", unary)

    def test_triple(self, unary):
        t = parse_term("h(h(a))", unary)
        hy = LabeledPath((unary.get("h", 1),), ())
        assert pump(t, LabeledPath(), hy, 1, 3) == \
            parse_term("h(h(h(h(a))))", unary)

    def test_membership_after_pumping(self, unary):
        t = parse_term("h(h(h(a)))", unary)
        h1 = unary.get("h", 1)
        hy = LabeledPath((h1,), ())
        for n in range(5):
            pumped = pump(t, LabeledPath(), hy, 1, n)
            want = LabeledPath((h1,) * n, (1,) * n)
            assert tree_has_path(pumped, want)

    def test_missing_cut_nodes(self, unary):
        t = parse_term("a", unary)
        hy = LabeledPath((unary.get("h", 1),), ())
        with pytest.raises(Exception):
            pump(t, LabeledPath(), hy, 1, 2)

    def test_branching_pump_keeps_siblings(self):
        t = parse_term("f(g(a),a)", SIGMA1)
        head = LabeledPath((F,), (1,))
        gy = LabeledPath((G,), ())
        pumped = pump(t, head, gy, 1, 2)
        assert pumped == parse_term("f(g(g(a)),a)", SIGMA1)

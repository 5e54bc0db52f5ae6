import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.backend.utils.formula import BOT, And, Atom, Box, FormulaSyntaxError, Imp, Or, parse_formula
from app.backend.utils.generators import random_sequent
from app.backend.utils.sequent import (
    EMPTY, UNICODE, InvalidPositionError, Mode, Relation, Sequent, SequentSyntaxError,
    annotations, descendants, flat, flat_sequent, formula_of, imp_step, md_sequent, mod_step, modal_closure,
    parse_position, parse_sequent, render_position, render_sequent, replace_at, sequent_from_json,
    sequent_to_json, sharp, structurally_included, subsequent_at,
)

p, q = Atom("p"), Atom("q")

# the running example: p∧q, □r ⇒ ◇p, ⟨□p⇒[⇒q]⟩, [p⇒q∨r, [r⇒s]]
RUNNING = "p & q, []r => <>p, <[]p => [=> q]>, [p => q | r, [r => s]]"


def seq(text):
    return parse_sequent(text)


def random_sequents():
    return st.integers(min_value=0, max_value=10_000).map(
        lambda seed: random_sequent(np.random.default_rng(seed), depth=2, width=2, formula_size=2))


class TestParseAndRender:
    """Test suite for the sequent text form."""

    def test_parse_simple(self):
        s = seq("p, q => q")
        assert s.ant == (p, q)
        assert s.forms == (q,)
        assert s.imps == () and s.mods == ()

    def test_parse_blocks(self):
        s = seq(RUNNING)
        assert len(s.imps) == 1
        assert len(s.mods) == 1
        assert s.imps[0] == seq("[]p => [=> q]")
        assert s.mods[0].mods[0] == seq("r => s")

    def test_render_round_trip(self):
        s = seq(RUNNING)
        assert seq(render_sequent(s)) == s
        assert seq(render_sequent(s, UNICODE)) == s

    def test_render_empty_parts(self):
        assert render_sequent(EMPTY) == "=>"
        assert render_sequent(seq("p =>")) == "p =>"
        assert render_sequent(seq("=> [=>]")) == "=> [=>]"

    def test_unicode_arrow(self):
        assert parse_sequent("p ⇒ ⟨q ⇒ p⟩") == seq("p => <q => p>")

    def test_set_mode_removes_duplicates(self):
        s = seq("p, p, q => q, q")
        assert s.ant == (p, q)
        assert s.forms == (q,)

    def test_multiset_mode_keeps_duplicates(self):
        s = parse_sequent("p, p => q", Mode.MULTISET)
        assert s.ant == (p, p)
        assert s.mode is Mode.MULTISET

    def test_missing_arrow(self):
        with pytest.raises(SequentSyntaxError) as exc:
            parse_sequent("p")
        assert exc.value.position == 1

    def test_unclosed_block(self):
        with pytest.raises(FormulaSyntaxError):
            parse_sequent("p => [q =>")

    def test_empty_text(self):
        with pytest.raises(SequentSyntaxError):
            parse_sequent("  ")


class TestPositions:
    """Test suite for positions, subsequent_at and replace_at."""

    def test_subsequent_at_implication_block(self):
        assert subsequent_at(seq("p => <q => r>"), (imp_step(0),)) == seq("q => r")

    def test_subsequent_at_nested_modal_block(self):
        assert subsequent_at(seq(RUNNING), (mod_step(0), mod_step(0))) == seq("r => s")

    def test_subsequent_at_root(self):
        s = seq(RUNNING)
        assert subsequent_at(s, ()) is s

    def test_invalid_position(self):
        with pytest.raises(InvalidPositionError):
            subsequent_at(seq("p => q"), (imp_step(3),))
        with pytest.raises(IndexError):
            subsequent_at(seq("p => <q => r>"), (mod_step(0),))

    def test_replace_at(self):
        result = replace_at(seq("p => <q => r>"), (imp_step(0),), seq("q, s => r"))
        assert result == seq("p => <q, s => r>")

    def test_replace_at_root(self):
        assert replace_at(seq("p => q"), (), seq("q => p")) == seq("q => p")

    def test_replace_at_invalid(self):
        with pytest.raises(InvalidPositionError):
            replace_at(seq("p => q"), (mod_step(0),), EMPTY)

    def test_render_and_parse_position(self):
        pos = (imp_step(0), mod_step(1))
        assert render_position(()) == "x"
        assert render_position(pos) == "x.i0.m1"
        assert parse_position("x.i0.m1") == pos
        assert parse_position("x") == ()

    @pytest.mark.parametrize("text", ["y", "x.k0", "x.m", "x.mi"])
    def test_parse_position_rejects(self, text):
        with pytest.raises(InvalidPositionError):
            parse_position(text)

    @given(random_sequents())
    @settings(max_examples=50, deadline=None)
    def test_replace_then_read_back(self, s):
        for pos, t in descendants(s):
            assert subsequent_at(s, pos) == t
            assert subsequent_at(replace_at(s, pos, EMPTY), pos) == EMPTY


class TestDescendants:
    """Test suite for the nesting relations."""

    def test_plus_of_flat_sequent(self):
        s = seq("p => q")
        assert descendants(s, Relation.PLUS) == [((), s)]

    def test_imp_relation(self):
        s = seq("=> <p => [q => r]>")
        assert descendants(s, Relation.IMP) == [((imp_step(0),), seq("p => [q => r]"))]

    def test_plus_relation_preorder(self):
        s = seq("=> <p => [q => r]>")
        assert [t for _, t in descendants(s, Relation.PLUS)] == [s, seq("p => [q => r]"), seq("q => r")]
        assert [pos for pos, _ in descendants(s, "plus")] == [(), (imp_step(0),), (imp_step(0), mod_step(0))]

    def test_mod_relation_skips_implication_blocks(self):
        s = seq("=> <p => [q => r]>, [s =>]")
        assert [t for _, t in descendants(s, Relation.MOD)] == [seq("s =>")]

    def test_modal_closure_includes_root(self):
        s = seq("=> [p => [q =>]], <r =>>")
        assert [pos for pos, _ in modal_closure(s)] == [(), (mod_step(0),), (mod_step(0), mod_step(0))]


class TestOperators:
    """Test suite for modal degree, flat, sharp and structural inclusion."""

    @pytest.mark.parametrize("text, degree", [
        ("=> []p", 1),
        ("=> [=> p]", 1),
        ("=> <=> [=> p]>", 1),
        ("p => q", 0),
        ("=> [=> []p]", 2),
    ])
    def test_md_sequent(self, text, degree):
        assert md_sequent(seq(text)) == degree

    def test_flat(self):
        s = seq(RUNNING)
        assert flat(s) == (seq("p => [r =>]"),)
        assert render_sequent(flat_sequent(s)) == "[]r, p & q => [p => [r =>]]"

    def test_flat_of_empty_block(self):
        assert flat(seq("=> [=>]")) == (EMPTY,)

    def test_flat_of_block_free_succedent(self):
        assert flat(seq("p => q, <q => p>")) == ()

    def test_sharp(self):
        image = sharp(seq(RUNNING), ())
        assert render_sequent(image) == "=> <>p, [=> q | r, [=> s]]"
        assert render_sequent(image, UNICODE) == "⇒ ◇p, [⇒ q ∨ r, [⇒ s]]"

    def test_sharp_annotations(self):
        image = sharp(seq(RUNNING), (mod_step(2),))
        assert image.origin == (mod_step(2),)
        assert annotations(image) == [(mod_step(2),), (mod_step(2), mod_step(0)), (mod_step(2), mod_step(0), mod_step(0))]

    def test_sharp_without_blocks(self):
        assert render_sequent(sharp(seq("p => q"), ())) == "=> q"
        assert render_sequent(sharp(EMPTY, ())) == "=>"

    def test_structural_inclusion(self):
        assert structurally_included(seq("p | q, p => s"), seq("p | q, p, r => s"))
        assert not structurally_included(seq("p | q, p, r => s"), seq("p | q, p => s"))

    def test_structural_inclusion_needs_counterpart_block(self):
        assert not structurally_included(seq("p => [q =>]"), seq("p =>"))
        assert not structurally_included(seq("p =>"), seq("p => [q =>]"))

    def test_structural_inclusion_ignores_succedent_formulas(self):
        assert structurally_included(seq("p => q, <r =>>"), seq("p => s"))

    @given(random_sequents())
    @settings(max_examples=100, deadline=None)
    def test_inclusion_is_reflexive(self, s):
        assert structurally_included(s, s)

    @given(random_sequents())
    @settings(max_examples=100, deadline=None)
    def test_inclusion_is_transitive_along_growth(self, s):
        bigger = s.add(ant=(Atom("u"),))
        biggest = bigger.add(ant=(Atom("v"),))
        assert structurally_included(s, bigger)
        assert structurally_included(bigger, biggest)
        assert structurally_included(s, biggest)

    @given(random_sequents())
    @settings(max_examples=100, deadline=None)
    def test_flat_keeps_the_inclusion_class(self, s):
        lifted = flat_sequent(s)
        assert structurally_included(s, lifted)
        assert structurally_included(lifted, s)
        assert flat(Sequent(mods=flat(s))) == flat(Sequent(mods=flat(lifted)))


class TestSequentStructure:
    """Test suite for the Sequent value itself."""

    def test_add_skips_existing_blocks(self):
        s = seq("=> [p =>]")
        assert s.add(mods=(seq("p =>"),)) == s

    def test_add_appends_new_blocks_in_order(self):
        s = seq("=> [p =>]").add(mods=(seq("q =>"),))
        assert s.mods == (seq("p =>"), seq("q =>"))

    def test_suc_lists_every_element(self):
        s = seq(RUNNING)
        assert len(s.suc) == 3

    def test_equality_respects_annotations(self):
        s = seq("=> p")
        assert s != s.evolve(origin=())

    def test_json(self):
        s = seq(RUNNING)
        data = sequent_to_json(s)
        assert data["ant"] == ["[]r", "p & q"]
        assert data["suc"][0] == "<>p"
        assert "imp" in data["suc"][1] and "mod" in data["suc"][2]
        assert sequent_from_json(data) == s

    def test_json_keeps_annotations(self):
        image = sharp(seq(RUNNING), (mod_step(0),))
        assert sequent_from_json(sequent_to_json(image)) == image

    def test_json_rejects_bad_elements(self):
        with pytest.raises(ValueError):
            sequent_from_json({"ant": [], "suc": [{"box": {}}]})
        with pytest.raises(ValueError):
            sequent_from_json(["p"])

    def test_json_formula_errors(self):
        with pytest.raises(FormulaSyntaxError):
            sequent_from_json({"ant": ["p &"], "suc": []})

    def test_parsed_formula_matches(self):
        assert seq("=> [](p | q)").forms == (parse_formula("[](p | q)"),)


class TestFormulaOf:
    """Test suite for the formula reading of a sequent."""

    def test_single_formula(self):
        assert formula_of(seq("=> p")) == p

    def test_empty_succedent(self):
        assert formula_of(seq("=>")) == BOT
        assert formula_of(seq("p =>")) == Imp(p, BOT)

    def test_blocks(self):
        assert formula_of(seq("p => [q =>]")) == Imp(p, Box(Imp(q, BOT)))
        assert formula_of(seq("p, q => <p => q>")) == Imp(And(p, q), Imp(p, q))

    def test_disjunction_of_succedent(self):
        assert formula_of(seq("=> p, q")) == Or(p, q)

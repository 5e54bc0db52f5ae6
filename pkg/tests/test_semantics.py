import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.backend.utils.calculus import Logic, SaturationLevel
from app.backend.utils.formula import Atom, parse_formula
from app.backend.utils.semantics import (
    BruteForceResult, MalformedModelError, Model, NotSaturatedError, UnknownWorldError,
    brute_force_status, check_frame, extract_countermodel, forces, forces_sequent,
    frame_properties, is_model_of, model_from_json, model_to_json, random_model,
    sequent_vector, truth_vector, verify_countermodel,
)
from app.backend.utils.sequent import EMPTY, Sequent, formula_of, parse_sequent, sharp
from tests.strategies import formulas

INDEPENDENCE = "(<>p -> []q) -> [](p -> q)"


def single_world(r=False, val=None):
    return Model.from_relations(["w"], [("w", "w")], [("w", "w")] if r else [], val or {})


class TestForcing:
    """Test suite for forcing in a model."""

    def test_three_world_countermodel(self, three_world_model):
        m = three_world_model
        assert forces(m, "x", parse_formula("<>p -> []q"))
        assert not forces(m, "x", parse_formula("[](p -> q)"))
        assert not forces(m, "x", parse_formula(INDEPENDENCE))

    def test_box_looks_along_r_only(self, three_world_model):
        m = three_world_model
        assert not forces(m, "x", parse_formula("<>p"))
        assert forces(m, "x.m0", parse_formula("[]F"))

    def test_implication_looks_along_order(self, three_world_model):
        assert not forces(three_world_model, "x.m0", parse_formula("p -> q"))
        assert forces(three_world_model, "x.m0.i0", parse_formula("q -> p"))

    def test_constants(self):
        m = single_world()
        assert forces(m, "w", parse_formula("T"))
        assert not forces(m, "w", parse_formula("F"))

    def test_unknown_world(self, three_world_model):
        with pytest.raises(UnknownWorldError):
            forces(three_world_model, "nowhere", Atom("p"))

    def test_truth_vector(self, three_world_model):
        assert truth_vector(three_world_model, Atom("p")).tolist() == [False, False, True]

    def test_empty_sequent_is_never_forced(self, three_world_model):
        assert not sequent_vector(three_world_model, EMPTY).any()

    def test_sequent_forcing(self, three_world_model):
        m = three_world_model
        assert forces_sequent(m, "x", parse_sequent("p => p"))
        assert not forces_sequent(m, "x", parse_sequent("=> [=> p -> q]"))
        assert forces_sequent(m, "x", parse_sequent("=> [=> <p => p>]"))
        assert not forces_sequent(m, "x.m0", parse_sequent("=> <=> p>"))

    @given(formulas(), st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=100, deadline=None)
    def test_heredity(self, f, seed):
        m = random_model(np.random.default_rng(seed))
        truth = truth_vector(m, f)
        assert not (truth[:, None] & m.le & ~truth[None, :]).any()

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=50, deadline=None)
    def test_sharp_forcing_implies_sequent_forcing(self, seed):
        from app.backend.utils.generators import random_sequent

        rng = np.random.default_rng(seed)
        s = random_sequent(rng, depth=2, width=2, formula_size=2)
        m = random_model(rng)
        image = sharp(s, ())
        for w in m.worlds:
            if forces_sequent(m, w, image):
                assert forces_sequent(m, w, s)

    @given(st.lists(formulas(), max_size=2), st.lists(formulas(), max_size=2),
           st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=100, deadline=None)
    def test_formula_of_reads_the_sequent_upwards(self, ant, forms, seed):
        s = Sequent(ant=tuple(ant), forms=tuple(forms), imps=(Sequent(ant=tuple(forms), forms=tuple(ant)),))
        m = random_model(np.random.default_rng(seed))
        truth = truth_vector(m, formula_of(s))
        forced = sequent_vector(m, s)
        # the formula holds where the sequent holds at every world above
        assert (truth == ~(m.le & ~forced[None, :]).any(axis=1)).all()


class TestFrameChecks:
    """Test suite for frame properties."""

    def test_three_world_model_is_in_every_base_class(self, three_world_model):
        report = check_frame(three_world_model)
        for prop in frame_properties(Logic.LIK):
            assert report[prop].ok
        assert not report["serial"].ok
        assert is_model_of(three_world_model, Logic.LIK)
        assert not is_model_of(three_world_model, Logic.LIKD)

    def test_single_world_without_r_is_not_serial(self):
        report = check_frame(single_world(), ["serial", "reflexive"])
        assert report["serial"].witness == ("w",)
        assert not report["reflexive"].ok

    def test_single_world_loop(self):
        m = single_world(r=True)
        assert is_model_of(m, Logic.LIKD)
        assert is_model_of(m, Logic.LIKT)

    def test_forward_confluence_witness(self):
        worlds = ["w", "w'", "v"]
        le = [(a, a) for a in worlds] + [("w", "w'")]
        m = Model.from_relations(worlds, le, [("w", "v")], {})
        check = check_frame(m, ["fc"])["fc"]
        assert not check.ok
        assert check.witness == ("w", "w'", "v")

    def test_downward_confluence_witness(self):
        worlds = ["w", "w'", "v"]
        le = [(a, a) for a in worlds] + [("w", "w'")]
        m = Model.from_relations(worlds, le, [("w'", "v")], {})
        check = check_frame(m, ["dc"])["dc"]
        assert not check.ok
        assert check.witness == ("w", "w'", "v")

    def test_heredity_witness(self):
        worlds = ["w", "v"]
        le = [("w", "w"), ("v", "v"), ("w", "v")]
        m = Model.from_relations(worlds, le, [], {"p": ["w"]})
        check = check_frame(m, ["heredity"])["heredity"]
        assert check.witness == ("p", "w", "v")

    def test_preorder_witness(self):
        m = Model.from_relations(["w", "v"], [("w", "w")], [], {})
        assert check_frame(m, ["preorder"])["preorder"].witness == ("v", "v", "v")

    def test_unknown_property(self, three_world_model):
        with pytest.raises(ValueError):
            check_frame(three_world_model, ["euclidean"])

    @pytest.mark.parametrize("logic", list(Logic))
    def test_random_models_stay_in_the_frame_class(self, logic):
        rng = np.random.default_rng(7)
        for _ in range(25):
            assert is_model_of(random_model(rng, logic), logic)


class TestCountermodels:
    """Test suite for countermodel extraction."""

    def test_worked_leaf(self):
        leaf = parse_sequent("<>p -> []q => [](p -> q), <>p, [=> p -> q, p, <p => q>]")
        m = extract_countermodel(leaf)
        assert m.worlds == ["x", "x.m0", "x.m0.i0"]
        assert m.r_pairs() == [("x", "x.m0")]
        assert m.valuation("p") == {"x.m0.i0"}
        assert not forces_sequent(m, "x", leaf)

    def test_serial_loops_under_likd(self):
        m = extract_countermodel(parse_sequent("=> p"), Logic.LIKD)
        assert m.r_pairs() == [("x", "x")]

    def test_reflexive_under_likt(self):
        m = extract_countermodel(parse_sequent("[]p, p => [p =>]"), Logic.LIKT)
        assert set(m.r_pairs()) == {("x", "x"), ("x", "x.m0"), ("x.m0", "x.m0")}

    def test_loops_enter_the_order(self):
        m = extract_countermodel(parse_sequent("[]p, p => [p =>]"), Logic.LIKT)
        assert ("x.m0", "x") in m.le_pairs()
        assert ("x", "x.m0") not in m.le_pairs()
        assert is_model_of(m, Logic.LIKT)

    def test_order_is_confluent_under_likd(self):
        leaf = parse_sequent("=> <>r, [=> r, [=>]], <q => r, [=>], [=> [=>]]>")
        m = extract_countermodel(leaf, Logic.LIKD, level=SaturationLevel.R1)
        assert check_frame(m, ["fc", "dc"])["fc"].ok
        assert check_frame(m, ["fc", "dc"])["dc"].ok

    def test_lower_level(self):
        m = extract_countermodel(parse_sequent("=> p -> q"), level=SaturationLevel.R2)
        assert m.worlds == ["x"]

    def test_not_saturated(self):
        with pytest.raises(NotSaturatedError):
            extract_countermodel(parse_sequent("=> p -> q"))

    def test_axiomatic_leaf(self):
        with pytest.raises(NotSaturatedError):
            extract_countermodel(parse_sequent("p => p"))

    def test_verify_countermodel(self, three_world_model):
        report = verify_countermodel(three_world_model, Logic.LIK, "x", parse_formula(INDEPENDENCE))
        assert report["ok"]
        assert report["refutes"]
        assert set(report["frame"]) == set(frame_properties(Logic.LIK))

    def test_verify_rejects_wrong_class(self, three_world_model):
        report = verify_countermodel(three_world_model, Logic.LIKD, "x", parse_formula(INDEPENDENCE))
        assert not report["ok"]
        assert report["frame"]["serial"] is False

    def test_verify_sequent_goal(self, three_world_model):
        report = verify_countermodel(three_world_model, Logic.LIK, "x", parse_sequent("p => p"))
        assert not report["refutes"]


class TestBruteForce:
    """Test suite for the bounded oracle."""

    def test_identity_has_no_countermodel(self):
        result = brute_force_status(parse_formula("p -> p"), Logic.LIK, 2)
        assert result == BruteForceResult(False, 2)
        assert result.status == "no-countermodel-up-to-bound"

    def test_serial_diamond(self):
        result = brute_force_status(parse_formula("<>T"), Logic.LIK, 1)
        assert result.falsified
        assert result.status == "falsified"
        assert not forces(result.model, result.world, parse_formula("<>T"))
        assert not brute_force_status(parse_formula("<>T"), Logic.LIKD, 2).falsified

    def test_rv_up_to_three_worlds(self):
        assert not brute_force_status(parse_formula("[](p | q) -> <>p | []q"), Logic.LIK, 3).falsified

    def test_found_model_is_in_the_frame_class(self):
        result = brute_force_status(parse_formula(INDEPENDENCE), Logic.LIK, 3)
        assert result.falsified
        assert verify_countermodel(result.model, Logic.LIK, result.world, parse_formula(INDEPENDENCE))["ok"]

    def test_reflexive_frames(self):
        assert not brute_force_status(parse_formula("[]p -> p"), Logic.LIKT, 2).falsified
        assert brute_force_status(parse_formula("[]p -> p"), Logic.LIK, 2).falsified

    @pytest.mark.parametrize("bound", [0, 5])
    def test_bound_errors(self, bound):
        with pytest.raises(ValueError):
            brute_force_status(parse_formula("p"), Logic.LIK, bound)


class TestModelJson:
    """Test suite for the model JSON format."""

    def test_round_trip(self, three_world_model):
        data = model_to_json(three_world_model)
        assert data["val"] == {"p": ["x.m0.i0"], "q": []}
        m = model_from_json(data)
        assert m.worlds == three_world_model.worlds
        assert np.array_equal(m.le, three_world_model.le)
        assert np.array_equal(m.r, three_world_model.r)

    def test_valuation_is_optional(self):
        m = model_from_json({"worlds": ["w"], "le": [["w", "w"]], "r": []})
        assert m.val == {}

    @pytest.mark.parametrize("data", [
        [],
        {"worlds": ["w"], "le": []},
        {"worlds": ["w", "w"], "le": [], "r": []},
        {"worlds": ["w"], "le": [["w", "v"]], "r": []},
        {"worlds": ["w"], "le": [["w"]], "r": []},
        {"worlds": [1], "le": [], "r": []},
        {"worlds": ["w"], "le": [], "r": [], "val": ["p"]},
    ])
    def test_malformed(self, data):
        with pytest.raises(MalformedModelError):
            model_from_json(data)

    def test_malformed_is_value_error(self):
        with pytest.raises(ValueError):
            model_from_json({"worlds": "w", "le": [], "r": []})

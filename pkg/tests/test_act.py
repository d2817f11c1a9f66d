"""Affective-math tests: impression formation, deflection, behavior
optimization, and the model-file format."""

import math
from pathlib import Path

import numpy as np
import pytest

from inpd.act import (
    Action,
    ActionSemantics,
    DEFAULT_SEMANTICS,
    Epa,
    FRIEND,
    FundamentalSentiment,
    ImpressionModel,
    ImpressionModelError,
    SCROOGE,
    TransientImpression,
    _data_path,
    default_impression_model,
    deflection,
    form_impression,
    grid_search_behavior,
    identity_impression_model,
    load_impression_model,
    nearest_action,
    optimal_behavior,
    optimal_behavior_batch,
)

from oracles import deflection_exact, refined_grid_search, transients_exact

PROFESSOR = Epa(1.7, 1.8, 0.5)
STUDENT = Epa(1.8, 0.7, 1.2)
# A harsh, loud act; any strongly negative-evaluation behavior works here.
YELL_AT = Epa(-2.1, 0.9, 1.9)


class TestEpa:
    def test_clamping(self):
        assert Epa(5.0, -9.0, 0.0).clamped() == Epa(4.3, -4.3, 0.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Epa(float("nan"), 0.0, 0.0)
        with pytest.raises(ValueError):
            Epa(0.0, float("inf"), 0.0)

    def test_sentiment_needs_nine_components(self):
        with pytest.raises(ValueError):
            FundamentalSentiment.from_array(np.zeros(8))


class TestFormImpression:
    def test_zero_input_identity_model_gives_zero(self):
        f = FundamentalSentiment.from_array(np.zeros(9))
        tau = form_impression(f, identity_impression_model())
        assert np.allclose(tau.as_array(), 0.0)

    def test_identity_model_fixed_point(self):
        f = FundamentalSentiment.from_array([1, 0, 0, 0, 1, 0, 0, 0, 1])
        tau = form_impression(f, identity_impression_model())
        assert np.array_equal(tau.as_array(), f.as_array())

    def test_harsh_act_lowers_actor_evaluation(self):
        # Exact re-evaluation of the shipped file must agree with the library,
        # and the actor's transient evaluation must drop below its fundamental.
        f = FundamentalSentiment(PROFESSOR, YELL_AT, STUDENT)
        tau = form_impression(f, default_impression_model())
        exact = [float(v) for v in transients_exact(_data_path("default_model.csv"), f.as_array())]
        assert np.allclose(tau.as_array(), exact, atol=1e-12)
        assert tau.actor.e < PROFESSOR.e


class TestDeflection:
    def test_zero_when_equal(self, rng):
        for _ in range(20):
            v = rng.uniform(-4.3, 4.3, 9)
            f = FundamentalSentiment.from_array(v)
            t = TransientImpression.from_array(v)
            assert deflection(f, t) == 0.0

    def test_unit_offsets(self):
        f = FundamentalSentiment.from_array(np.zeros(9))
        t = TransientImpression.from_array(np.ones(9))
        assert deflection(f, t) == 9.0

    def test_matches_exact_recomputation(self):
        f = FundamentalSentiment(FRIEND, DEFAULT_SEMANTICS.cooperate_epa, FRIEND)
        tau = form_impression(f, default_impression_model())
        got = deflection(f, tau)
        want = float(deflection_exact(_data_path("default_model.csv"), f.as_array()))
        assert math.isclose(got, want, rel_tol=1e-10)

    def test_identity_model_deflection_exactly_zero(self, rng):
        model = identity_impression_model()
        for _ in range(1000):
            f = FundamentalSentiment.from_array(rng.uniform(-4.3, 4.3, 9))
            assert deflection(f, form_impression(f, model)) == 0.0

    def test_invariant_under_joint_permutation(self, rng):
        for _ in range(200):
            fv = rng.uniform(-4.3, 4.3, 9)
            tv = rng.uniform(-6, 6, 9)
            perm = rng.permutation(9)
            d1 = deflection(
                FundamentalSentiment.from_array(fv), TransientImpression.from_array(tv)
            )
            d2 = deflection(
                FundamentalSentiment.from_array(fv[perm]), TransientImpression.from_array(tv[perm])
            )
            assert math.isclose(d1, d2, rel_tol=1e-12)


class TestOptimalBehavior:
    def test_flat_objective_returns_prior(self):
        prior = Epa(0.7, -0.3, 1.1)
        got = optimal_behavior(FRIEND, SCROOGE, identity_impression_model(), prior)
        assert got == prior

    def test_friend_friend_matches_grid_oracle(self):
        model = default_impression_model()
        got = optimal_behavior(FRIEND, FRIEND, model, Epa(0, 0, 0)).as_array()
        want = refined_grid_search(model, FRIEND.as_array(), FRIEND.as_array())
        assert np.all(np.abs(got - want) <= 0.05)

    def test_scrooge_abandons_friend(self):
        model = default_impression_model()
        got = optimal_behavior(SCROOGE, FRIEND, model, Epa(0, 0, 0))
        want = refined_grid_search(model, SCROOGE.as_array(), FRIEND.as_array())
        assert got.e < 0
        assert want[0] < 0

    def test_agrees_with_grid_search_on_random_instances(self, rng):
        model = default_impression_model()
        for _ in range(100):
            actor = rng.uniform(-4.3, 4.3, 3)
            obj = rng.uniform(-4.3, 4.3, 3)
            got = optimal_behavior(
                Epa.from_array(actor), Epa.from_array(obj), model, Epa(0, 0, 0)
            ).as_array()
            want = refined_grid_search(model, actor, obj)
            assert np.all(np.abs(got - want) <= 0.05)

    def test_output_stays_in_box(self, rng):
        model = default_impression_model()
        for _ in range(300):
            got = optimal_behavior(
                Epa.from_array(rng.uniform(-4.3, 4.3, 3)),
                Epa.from_array(rng.uniform(-4.3, 4.3, 3)),
                model,
                Epa(0, 0, 0),
            )
            assert np.all(np.abs(got.as_array()) <= 4.3 + 1e-12)

    def test_batch_matches_scalar(self, rng):
        model = default_impression_model()
        actors = rng.uniform(-4.3, 4.3, (50, 3))
        objects = rng.uniform(-4.3, 4.3, (50, 3))
        batch = optimal_behavior_batch(actors, objects, model)
        for i in range(50):
            single = optimal_behavior(
                Epa.from_array(actors[i]), Epa.from_array(objects[i]), model, Epa(0, 0, 0)
            )
            assert np.allclose(batch[i], single.as_array(), atol=1e-9)

    def test_behavior_product_model_uses_grid(self):
        terms = ["const"] + [f"f{x}_{d}" for x in "ABO" for d in "epa"] + ["fB_e*fB_p"]
        coeff = np.zeros((9, len(terms)))
        coeff[:, 1:10] = np.eye(9) * 0.5
        coeff[3, -1] = 0.2
        model = ImpressionModel(terms, coeff, "quadratic")
        assert model.has_behavior_products
        got = optimal_behavior(FRIEND, SCROOGE, model, Epa(0, 0, 0))
        want = grid_search_behavior(FRIEND, SCROOGE, model)
        assert got == want


class TestNearestAction:
    def test_mostly_cooperative_point(self):
        b = Epa(2.0, 1.0, 0.5)
        dc = ((b.as_array() - DEFAULT_SEMANTICS.cooperate_epa.as_array()) ** 2).sum()
        dd = ((b.as_array() - DEFAULT_SEMANTICS.defect_epa.as_array()) ** 2).sum()
        assert math.isclose(dc, 0.35)
        assert math.isclose(dd, 22.43)
        assert nearest_action(b, DEFAULT_SEMANTICS) is Action.COOPERATE

    def test_exact_defect_point(self):
        assert nearest_action(DEFAULT_SEMANTICS.defect_epa, DEFAULT_SEMANTICS) is Action.DEFECT

    def test_midpoint_tie_breaks_to_cooperate(self):
        mid = Epa.from_array(
            (DEFAULT_SEMANTICS.cooperate_epa.as_array() + DEFAULT_SEMANTICS.defect_epa.as_array())
            / 2
        )
        assert nearest_action(mid, DEFAULT_SEMANTICS) is Action.COOPERATE

    def test_translation_invariance(self, rng):
        for _ in range(1000):
            b = rng.uniform(-3, 3, 3)
            offset = rng.uniform(-1, 1, 3)
            sem = ActionSemantics(
                Epa.from_array(rng.uniform(-2, 2, 3)), Epa.from_array(rng.uniform(-2, 2, 3)), "x"
            )
            shifted = ActionSemantics(
                Epa.from_array(sem.cooperate_epa.as_array() + offset),
                Epa.from_array(sem.defect_epa.as_array() + offset),
                "x",
            )
            a1 = nearest_action(Epa.from_array(b), sem)
            a2 = nearest_action(Epa.from_array(b + offset), shifted)
            assert a1 is a2

    def test_identical_action_points_rejected(self):
        with pytest.raises(ValueError):
            ActionSemantics(Epa(1, 1, 1), Epa(1, 1, 1), "broken")


class TestModelFiles:
    def test_identity_file_contents(self):
        model = identity_impression_model()
        assert model.n_terms == 10
        assert model.feature_terms[0] == "const"
        assert np.array_equal(model.coefficients[:, 0], np.zeros(9))
        assert np.array_equal(model.coefficients[:, 1:], np.eye(9))

    def test_default_reproduces_identity_action_matrix(self):
        model = default_impression_model()
        want = {
            (FRIEND, FRIEND): Action.COOPERATE,
            (FRIEND, SCROOGE): Action.COOPERATE,
            (SCROOGE, FRIEND): Action.DEFECT,
            (SCROOGE, SCROOGE): Action.DEFECT,
        }
        for (actor, obj), expected in want.items():
            b = optimal_behavior(actor, obj, model, Epa(0, 0, 0))
            assert nearest_action(b, DEFAULT_SEMANTICS) is expected

    def test_row_count_error_names_line(self, tmp_path):
        src = Path(_data_path("identity_model.csv")).read_text().splitlines()
        bad = tmp_path / "short.csv"
        bad.write_text("\n".join(src[:-1]) + "\n")
        with pytest.raises(ImpressionModelError, match="9 coefficient rows"):
            load_impression_model(bad)

    def test_cell_count_mismatch(self, tmp_path):
        src = Path(_data_path("identity_model.csv")).read_text().splitlines()
        src[3] = src[3] + ",0.5"
        bad = tmp_path / "wide.csv"
        bad.write_text("\n".join(src) + "\n")
        with pytest.raises(ImpressionModelError, match=":4:"):
            load_impression_model(bad)

    def test_malformed_number(self, tmp_path):
        src = Path(_data_path("identity_model.csv")).read_text().splitlines()
        src[2] = src[2].replace("1", "1,0", 1).replace("1,0", "one", 1)
        bad = tmp_path / "nan.csv"
        bad.write_text("\n".join(src) + "\n")
        with pytest.raises(ImpressionModelError):
            load_impression_model(bad)

    def test_unknown_interaction_component(self, tmp_path):
        header = "transient,const," + ",".join(
            f"f{x}_{d}" for x in "ABO" for d in "epa"
        ) + ",fQ_e*fB_e"
        rows = [header]
        for t in ["tA_e", "tA_p", "tA_a", "tB_e", "tB_p", "tB_a", "tO_e", "tO_p", "tO_a"]:
            rows.append(t + "," + ",".join(["0"] * 11))
        bad = tmp_path / "badterm.csv"
        bad.write_text("\n".join(rows) + "\n")
        with pytest.raises(ImpressionModelError, match="fQ_e"):
            load_impression_model(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ImpressionModelError):
            load_impression_model(tmp_path / "absent.csv")

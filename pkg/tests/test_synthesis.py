"""Planner-level behaviour: thresholds, regions, symmetries, and bounds.

Numeric pins in this file were frozen from independent scans (dense grid +
golden-section refinement over each candidate family) before the planner's
closed forms were trusted; they are reproduced here to 1e-6 or better.
"""

import math
import re

import numpy as np
import pytest

from fovsynth.geometry import PolarPoint, conjugate_inversion, spiral_delta_psi
from fovsynth.synthesis import REGION_ORDER, DomainError, Synthesis

from conftest import CONFIGS


def word_tokens(word):
    return re.findall(r"(?:E1|E2|S)[+-]|\*", word)


def dirswap(word):
    return word.replace("+", "~").replace("-", "+").replace("~", "-")


def reverse_word(word):
    toks = word_tokens(word)[::-1]
    return dirswap("".join(toks))


@pytest.fixture(scope="module")
def side():
    return Synthesis(math.pi / 4, math.pi / 6)


@pytest.fixture(scope="module")
def frontal():
    return Synthesis(0.10, 0.50)


class TestThresholds:
    PINS = {
        # case: (psi_r1, psi_r2, psi_r2_method)
        "side": (1.3266280296, 1.5330847549, "closed_form"),
        "frontal": (1.2708194621, 1.8963428153, "numeric"),
        "borderline_frontal": (1.1474091992, 1.6474091992, "closed_form"),
        "borderline_side": (1.4616959471, 2.2670367542, "closed_form"),
        "lateral": (1.5519141916, 2.3518044465, "closed_form"),
    }

    @pytest.mark.parametrize("case", sorted(PINS))
    def test_pinned_values(self, planners, case):
        s = planners[case]
        r1, r2, method = self.PINS[case]
        t = s.thresholds()
        assert t["psi_r1"] == pytest.approx(r1, abs=5e-10)
        assert t["psi_r2"] == pytest.approx(r2, abs=5e-10)
        assert t["psi_r2_method"] == method
        assert not t["psi_r1_clamped"] and not t["psi_r2_clamped"]
        assert t["case"] == case

    def test_side_switch_point_pin(self, side):
        assert side.m_defined
        assert side.point_m.rho == pytest.approx(0.3169872981077805, rel=1e-12)
        assert side.point_m.psi == pytest.approx(1.9899420443344895, rel=1e-12)
        # The forward conjugate of the goal, for reference in the dict form.
        t = side.thresholds()
        assert t["point_pf"]["rho"] == pytest.approx(0.5773502691896258, rel=1e-12)

    def test_first_threshold_rides_edge_one_to_m(self, planners):
        # The first-edge spiral leaving the goal circle at psi_r1 passes
        # exactly through the switch point M.
        for case in ("side", "borderline_side", "lateral"):
            s = planners[case]
            dpsi = spiral_delta_psi(s.rho_p, s.point_m.rho, s.cone.phi1)
            assert s.psi_r1 + dpsi == pytest.approx(s.point_m.psi, abs=1e-9)

    def test_borderline_frontal_band_width_is_aperture(self, planners):
        s = planners["borderline_frontal"]
        assert s.psi_r2 - s.psi_r1 == pytest.approx(s.delta, abs=1e-12)

    def test_borderline_side_first_threshold_closed_form(self, planners):
        # With the far edge at a quarter turn the first threshold collapses to
        # (1 + sin(phi1)) / cos(phi1).
        s = planners["borderline_side"]
        phi1 = s.cone.phi1
        assert s.psi_r1 == pytest.approx(
            (1 + math.sin(phi1)) / math.cos(phi1), rel=1e-12
        )

    def test_junction_sits_on_m_at_first_threshold(self, side):
        p = side.plan(1.0, side.psi_r1)
        assert p.word == "E1+*E2-"
        junction = p.arcs[0].end
        assert junction.rho == pytest.approx(side.point_m.rho, abs=1e-8)
        assert junction.psi == pytest.approx(side.point_m.psi, abs=1e-8)


class TestRegionWalk:
    """Frozen plan pins: (case, rho, psi) -> (region, word, length)."""

    PINS = [
        # 2/cos(pi/6), independent of psi beyond the second threshold
        ("side", 1.0, 2.2, "III", "E1+*E1-", 2.309401077),
        ("side", 1.0, 0.5, "II", "E1+*E2-", 1.108712394),
        ("side", 1.0, 1.4, "V", "E1+*E2-S-", 2.215984433),
        ("side", 1.0, -0.4, "II'", "E2+*E1-", 0.923625803),
        ("frontal", 1.0, 2.6, "III", "S+*S-", 2.0),
        ("borderline_side", 1.0, 0.4, "II", "E2-", 0.4),
        # 2/cos(pi/2 - 1.2)
        ("borderline_side", 1.0, 2.6, "III", "E1+*E1-", 2.145832755),
        # first-edge tail is degenerate this close to the goal
        ("lateral", 1.0, 0.4, "IV", "E2-S-", 0.398171026),
        ("symmetric_lateral", 1.0, 1.2, "IV", "E2-S-E1-", 1.132114271),
        ("symmetric_lateral", 0.7, 0.9, "VI", "S-E1-", 0.808442924),
        # 2 * sin(0.2): plain reverse chord
        ("symmetric_lateral", 1.0, 0.4, "I", "S-", 0.397338662),
    ]

    @pytest.mark.parametrize("case,rho,psi,region,word,length", PINS)
    def test_pinned_plans(self, planners, case, rho, psi, region, word, length):
        p = planners[case].plan(rho, psi)
        assert p.region == region
        assert p.word == word
        assert p.length == pytest.approx(length, abs=2e-9)

    def test_goal_circle_walk_side(self, side):
        seq = [(0.1, "II"), (1.2, "II"), (1.45, "V"), (1.6, "III"), (3.0, "III"),
               (-0.4, "II'"), (-1.45, "V'")]
        for psi, region in seq:
            assert side.plan(1.0, psi).region == region, psi

    def test_goal_circle_walk_frontal(self, frontal):
        seq = [(0.3, "II"), (1.5, "V"), (1.893, "W"), (2.1, "III"), (3.1, "III")]
        for psi, region in seq:
            assert frontal.plan(1.0, psi).region == region, psi

    def test_opposite_region_cost_is_flat(self, planners):
        # Beyond the second threshold the best path re-anchors through the
        # switch structure and its cost no longer depends on psi.
        s = planners["side"]
        ref = 2.0 / math.cos(s.cone.phi1)
        for psi in (1.6, 2.2, 3.0, math.pi):
            assert s.plan(1.0, psi).length == pytest.approx(ref, rel=1e-9)
        b = planners["borderline_side"]
        refb = 2.0 / math.cos(b.cone.phi1)
        assert b.plan(1.0, 2.6).length == pytest.approx(refb, rel=1e-9)

    def test_frontal_opposite_cost_is_radial_sum(self, frontal):
        for rho, psi in ((1.0, 2.6), (1.3, 2.9), (0.55, 3.0)):
            p = frontal.plan(rho, psi)
            assert p.region == "III"
            assert p.length == pytest.approx(rho + 1.0, rel=1e-12)

    def test_symmetric_cone_is_psi_even(self, planners):
        s = planners["symmetric_lateral"]
        rng = np.random.default_rng(9)
        for _ in range(40):
            rho = rng.uniform(0.1, 2.0)
            psi = rng.uniform(0.0, math.pi)
            assert s.plan(rho, psi).length == pytest.approx(
                s.plan(rho, -psi).length, rel=1e-12
            )


class TestFamilyCurve:
    def test_branches_agree_at_seam(self, planners):
        # The two analytic branches of the variable-junction family cost must
        # agree where they hand over (junction sweep equal to the aperture).
        for case in ("side", "borderline_side", "lateral"):
            s = planners[case]
            seam = s.cone.phi2 - s.cone.phi1
            if seam >= s._vm_alpha_hi() - 1e-9:
                continue
            psi = 0.5 * (s.psi_r1 + s.psi_r2)
            lo = s.family_length(psi, seam * (1 - 1e-9))
            hi = s.family_length(psi, seam * (1 + 1e-9))
            assert lo == pytest.approx(hi, rel=1e-9)

    def test_grid_minimum_matches_plan(self, planners):
        # Brute-force the family parameter on a fine grid; where the family
        # is the winning region the planner's golden-section result must
        # match the grid minimum.  (Outside region V the formula can dip
        # below the plan at parameter values whose path does not construct.)
        for case, psi in (("side", None), ("borderline_side", None), ("lateral", 2.1)):
            s = planners[case]
            if psi is None:
                psi = 0.5 * (s.psi_r1 + s.psi_r2)
            assert s.plan(s.rho_p, psi).region == "V"
            hi = s._vm_alpha_hi()
            grid = np.linspace(1e-9, hi, 20001)
            best = min(s.family_length(psi, a) for a in grid)
            plan = s.plan(s.rho_p, psi).length
            assert plan == pytest.approx(best, abs=1e-6)
            assert plan <= best + 1e-12  # planner never worse than the grid


class TestBellmanConsistency:
    def test_suffix_costs_match_plan(self, planners):
        # Planning afresh from any junction of an optimal path must reproduce
        # the remaining cost: junction headings carry no hidden state.
        rng = np.random.default_rng(5)
        for case, s in sorted(planners.items()):
            for _ in range(10):
                p = s.plan(rng.uniform(0.1, 2.5), rng.uniform(-math.pi, math.pi))
                rem = p.length
                for arc in p.arcs[:-1]:
                    rem -= arc.length
                    if arc.end.rho < 1e-6:
                        continue  # replanning from the landmark is singular
                    sub = s.plan(arc.end.rho, arc.end.psi)
                    assert sub.length == pytest.approx(rem, abs=1e-9), (case, p.word)


class TestFrameSymmetries:
    def test_frame_flags(self):
        assert Synthesis(0.3, 0.5).plan(1.3, 0.7).mirrored is False
        assert Synthesis(0.3, 0.5).plan(1.3, 0.7).reversed_frame is False
        p = Synthesis(2.0, 0.5).plan(1.3, 0.7)
        assert p.reversed_frame is True and p.mirrored is False
        m = Synthesis(-0.3, 0.5).plan(1.3, 0.7)
        assert m.mirrored is True and m.reversed_frame is False

    def test_mirrored_cone_mirrors_queries(self):
        base = Synthesis(0.3, 0.5)
        mir = Synthesis(-0.3, 0.5)
        rng = np.random.default_rng(17)
        for _ in range(40):
            rho = rng.uniform(0.1, 2.5)
            psi = rng.uniform(-math.pi, math.pi)
            a = base.plan(rho, -psi)
            b = mir.plan(rho, psi)
            assert b.length == pytest.approx(a.length, rel=1e-12)
            assert b.region == a.region

    def test_rear_cone_reverses_drives(self):
        fwd = Synthesis(math.pi - 2.0, 0.5)
        rear = Synthesis(2.0, 0.5)
        rng = np.random.default_rng(19)
        for _ in range(40):
            rho = rng.uniform(0.1, 2.5)
            psi = rng.uniform(-math.pi, math.pi)
            a = fwd.plan(rho, -psi)
            b = rear.plan(rho, psi)
            assert b.length == pytest.approx(a.length, rel=1e-12)
            assert b.region == a.region
            assert b.word == dirswap(a.word)

    def test_inversion_duality(self, planners):
        # Inverting a query through the goal circle rescales the optimal cost
        # by rho_q / rho_p and conjugates the word (reverse + drive swap).
        rng = np.random.default_rng(23)
        for case, s in sorted(planners.items()):
            for _ in range(30):
                rho = rng.uniform(0.15, 2.5)
                psi = rng.uniform(-math.pi, math.pi)
                if abs(rho - 1.0) < 1e-3:
                    continue  # self-conjugate band: image of itself
                q = PolarPoint(rho, psi)
                qi = conjugate_inversion(q, s.rho_p)
                a = s.plan(q.rho, q.psi)
                b = s.plan(qi.rho, qi.psi)
                assert a.length == pytest.approx(
                    (q.rho / s.rho_p) * b.length, rel=1e-9
                ), case
                assert a.word == reverse_word(b.word), case


class TestUpperBound:
    def test_dominates_plan(self, planners):
        rng = np.random.default_rng(29)
        for case, s in sorted(planners.items()):
            for _ in range(60):
                rho = rng.uniform(0.1, 2.5)
                psi = rng.uniform(-math.pi, math.pi)
                ub = s.upper_bound(rho, psi)
                assert ub >= s.plan(rho, psi).length - 1e-9, case

    def test_tight_where_construction_is_optimal(self, planners):
        s = planners["side"]
        for psi in (0.5, 1.0):
            assert s.upper_bound(1.0, psi) == pytest.approx(
                s.plan(1.0, psi).length, rel=1e-12
            )
        f = planners["frontal"]
        assert f.upper_bound(1.3, 2.9) == pytest.approx(2.3, rel=1e-12)
        b = planners["borderline_side"]
        assert b.upper_bound(1.0, 0.4) == pytest.approx(0.4, rel=1e-12)

    def test_zero_at_goal_for_spiral_cases(self, planners):
        assert planners["side"].upper_bound(1.0, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert planners["borderline_side"].upper_bound(1.0, 0.0) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_rejects_landmark_query(self, side):
        with pytest.raises(DomainError):
            side.upper_bound(0.0, 0.3)


class TestScaling:
    def test_goal_radius_scales_lengths(self):
        base = Synthesis(math.pi / 4, math.pi / 6)
        big = Synthesis(math.pi / 4, math.pi / 6, goal_rho=2.5)
        rng = np.random.default_rng(31)
        for _ in range(25):
            rho = rng.uniform(0.1, 2.5)
            psi = rng.uniform(-math.pi, math.pi)
            a = base.plan(rho, psi)
            b = big.plan(2.5 * rho, psi)
            assert b.length == pytest.approx(2.5 * a.length, rel=1e-12)
            assert b.word == a.word


class TestPathDict:
    def test_schema_and_keys(self, side):
        d = side.plan(1.0, 1.4).to_dict()
        assert d["schema"] == "fovsynth.path.v1"
        assert set(d) == {
            "schema", "q", "goal_rho", "region", "image", "mirrored",
            "reversed", "word", "total_length", "arcs",
        }
        total = 0.0
        for arc in d["arcs"]:
            assert set(arc) == {"kind", "dir", "phi", "length", "start", "end"}
            assert set(arc["start"]) == {"x", "y", "rho", "psi", "theta"}
            total += arc["length"]
        assert total == pytest.approx(d["total_length"], rel=1e-12)
        assert d["word"] == "E1+*E2-S-"


class TestLanguage:
    @pytest.mark.parametrize("case", sorted(CONFIGS))
    def test_word_grammar(self, case):
        gamma, delta = CONFIGS[case]
        s = Synthesis(gamma, delta)
        lang = s.language()
        assert lang["case"] == s.case.value
        banned_pairs = {
            ("E1-", "E2+"), ("E1-", "E2-"), ("E1+", "E2+"),
            ("E2-", "E1-"), ("E2-", "E1+"), ("E2+", "E1+"),
        }
        for word in lang["native_words"] + lang["image_words"]:
            toks = word_tokens(word)
            assert "".join(toks) == word  # tokenizer covers the word
            moving = [t for t in toks if t != "*"]
            # Forward work precedes reverse work within any optimal word.
            signs = [t[-1] for t in moving]
            assert signs == sorted(signs, key=lambda c: c == "-")
            for i, t in enumerate(toks[:-1]):
                if t == "*":
                    assert (toks[i - 1], toks[i + 1]) not in banned_pairs

    def test_side_language_contents(self, side):
        lang = side.language()
        assert "E1+*E2-" in lang["native_words"]
        assert "E1+*E2-S-" in lang["native_words"]
        assert "E2-S-E1-" in lang["native_words"]
        assert "E2+*E1-" in lang["image_words"]

    def test_frontal_language_adds_launch_words(self, frontal):
        lang = frontal.language()
        assert "S+E1+*E2-S-" in lang["native_words"]
        assert "S+*S-" in lang["native_words"]


class TestPartition:
    def test_grid_and_borders(self, side):
        part = side.partition(n_rho=8, n_psi=16, rho_max=1.4)
        assert part["schema"] == "fovsynth.partition.v1"
        assert part["case"] == "side"
        assert len(part["rho"]) == 8 and len(part["psi"]) == 16
        assert len(part["labels"]) == 8
        for row_l, row_w, row_n in zip(part["labels"], part["words"], part["lengths"]):
            assert len(row_l) == len(row_w) == len(row_n) == 16
            assert all(lbl in REGION_ORDER for lbl in row_l)
            assert all(n > 0 and math.isfinite(n) for n in row_n)
        names = {c["name"] for c in part["borders"]}
        assert {"goal_circle", "switch_arc_m", "chord_goal_pf",
                "boundary_arc_goal", "edge1_r1"} <= names
        assert "goal_circle_image" in names
        for curve in part["borders"]:
            assert len(curve["points"]) >= 2

    def test_named_borders_separate_regions(self, side):
        # Stepping a hair to either radial side of a border curve's midpoint
        # lands in two different regions.
        part = side.partition(n_rho=8, n_psi=16, rho_max=1.4)
        expect = {
            "goal_circle": {"II'", "II"},
            "switch_arc_m": {"IV", "V"},
            "chord_goal_pf": {"VI", "I"},
            "boundary_arc_goal": {"I", "IV"},
            "edge2_goal_to_m": {"IV", "II"},
        }
        for curve in part["borders"]:
            want = expect.get(curve["name"])
            if want is None:
                continue
            pts = curve["points"]
            x, y = pts[len(pts) // 2]
            p = PolarPoint.from_xy(x, y)
            got = {
                side.classify(p.rho * (1 - 1e-5), p.psi)[0],
                side.classify(p.rho * (1 + 1e-5), p.psi)[0],
            }
            assert got == want, curve["name"]

    def test_rejects_degenerate_grid(self, side):
        with pytest.raises(DomainError):
            side.partition(n_rho=1, n_psi=16)


class TestDomainErrors:
    def test_constructor_rejects_bad_cones(self):
        with pytest.raises(DomainError):
            Synthesis(0.3, 0.0)
        with pytest.raises(DomainError):
            Synthesis(0.3, 2.0)
        with pytest.raises(DomainError):
            Synthesis(4.0, 0.5)
        with pytest.raises(DomainError):
            Synthesis(0.3, 0.5, goal_rho=0.0)

    def test_plan_rejects_bad_queries(self, side):
        with pytest.raises(DomainError):
            side.plan(-1.0, 0.0)
        with pytest.raises(DomainError):
            side.plan(math.nan, 0.0)
        with pytest.raises(DomainError):
            side.plan(1.0, math.inf)

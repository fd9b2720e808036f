import math

import numpy as np
import pytest

from fractalc.errors import DomainError
from fractalc.fractal_set import make_set
from fractalc.presets import PRESETS, Preset, get_preset, parse_key_values, solve_preset
from fractalc.staircase import make_staircase

LABELS = ["iu657", "9oo", "r1", "r10", "e1"]


@pytest.mark.parametrize("label", LABELS)
def test_closed_forms_pass_residual(label):
    sol = solve_preset(label, route="closed")
    assert sol.residual.max_abs_residual < 1e-9
    assert sol.residual.sample_count > 100


@pytest.mark.parametrize("label", LABELS)
def test_default_routes(label):
    sol = solve_preset(label)
    assert sol.residual.max_abs_residual < 1e-8
    assert sol.method == {"iu657": "Sub1", "9oo": "Sub2"}.get(label, PRESETS[label].route)


def test_closed_form_values_match_hand_formulas():
    st = make_staircase(make_set(1 / 3))
    s = 0.6
    y = get_preset("iu657").closed_form(st, {"cprime": 2.0})
    assert y.value(s) == pytest.approx(s * math.log(2 * s), rel=1e-15)
    y = get_preset("9oo").closed_form(st, {"c": 0.1})
    assert y.value(s) == pytest.approx(math.tan(s + 0.1) - s, rel=1e-15)
    y = get_preset("r1").closed_form(st, {"c": 1.0})
    assert y.value(s) == pytest.approx(s - 1 / (s + 1), rel=1e-15)
    y = get_preset("e1").closed_form(st, {"c": 1.0})
    ref = (math.sin(s) - math.cos(s)) / (s**3 * (math.cos(s) + math.sin(s)))
    assert y.value(s) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("label", ["iu657", "9oo"])
def test_numeric_route_matches_closed(label):
    closed = solve_preset(label, route="closed").solution
    numeric = solve_preset(label, route="numeric")
    assert numeric.method.endswith("-numeric")
    grid = np.linspace(*get_preset(label).domain(closed.staircase), 400)
    assert max(abs(numeric.solution.value(s) - closed.value(s)) for s in grid) < 1e-6


def test_r1_routes_agree():
    p1 = solve_preset("r1", route="RiccatiProp1")
    p2 = solve_preset("r1", route="RiccatiProp2")
    grid = np.linspace(0, p1.solution.staircase.s_max, 500)
    assert max(abs(p1.solution.value(s) - p2.solution.value(s)) for s in grid) < 1e-8


def test_r1_has_no_pole_for_positive_constant():
    sol = solve_preset("r1", route="closed")
    assert not [r for _, r in sol.residual.excluded_points if r == "pole-neighborhood"]


def test_9oo_pole_is_excluded():
    # ratio 1/2 puts the image at [0, 1]; c = 0.8 moves the tan pole to π/2 - 0.8
    sol = solve_preset("9oo", make_set(0.5), {"c": 0.8}, route="closed")
    assert sol.residual.max_abs_residual < 1e-9
    reasons = {r for _, r in sol.residual.excluded_points}
    assert "pole-neighborhood" in reasons
    assert get_preset("9oo").with_constants(c=0.8).poles((0.0, 1.0)) == pytest.approx((math.pi / 2 - 0.8,))


def test_e1_other_alpha():
    sol = solve_preset("e1", make_set(2 ** (-1 / 0.6)))
    assert sol.residual.max_abs_residual < 1e-8


def test_unknown_inputs():
    with pytest.raises(DomainError):
        get_preset("nope")
    with pytest.raises(DomainError):
        get_preset("r1").with_constants(q=1.0)
    with pytest.raises(DomainError):
        solve_preset("r1", route="numeric")
    with pytest.raises(DomainError):
        solve_preset("r1", route="warp")


@pytest.mark.parametrize("label", LABELS)
def test_config_round_trip(label):
    preset = PRESETS[label]
    assert Preset.from_text(preset.to_text()) == preset


def test_parse_key_values():
    assert parse_key_values("# c\n\na = 1\nb=x=y\n") == {"a": "1", "b": "x=y"}
    with pytest.raises(DomainError):
        parse_key_values("oops")
    with pytest.raises(DomainError):
        Preset.from_text("label=x\n")

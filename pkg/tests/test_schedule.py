from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phishsim.schedule import (CURTAIN_STAGES, PIXELATION_STAGES, AttackScript,
                               EffectState, captured_state, combined_schedule,
                               curtain_schedule, effect_at, enumerate_variants,
                               intensity_label, load_variants_manifest,
                               none_script, pixelation_schedule,
                               save_variants_manifest)


def test_effect_state_validation():
    with pytest.raises(ValueError):
        EffectState(-0.1, 1)
    with pytest.raises(ValueError):
        EffectState(1.1, 1)
    with pytest.raises(ValueError):
        EffectState(0.5, 0)
    assert EffectState(1.0, 1).is_identity
    assert not EffectState(0.5, 1).is_identity


def test_script_keyframe_invariants():
    good = ((0, EffectState(0.0, 1)), (10, EffectState(1.0, 1)))
    AttackScript("curtain", "logo", good, 10, "x")
    with pytest.raises(ValueError, match="t=0"):
        AttackScript("curtain", "logo", ((5, EffectState(1.0, 1)),), 5, "x")
    with pytest.raises(ValueError, match="strictly increasing"):
        AttackScript("curtain", "logo",
                     ((0, EffectState(0.0, 1)), (0, EffectState(1.0, 1))),
                     0, "x")
    with pytest.raises(ValueError, match="final keyframe"):
        AttackScript("curtain", "logo", ((0, EffectState(0.0, 1)),), 0, "x")
    with pytest.raises(ValueError, match="total_ms"):
        AttackScript("curtain", "logo", good, 12, "x")
    with pytest.raises(ValueError, match="kind"):
        AttackScript("flicker", "logo", good, 10, "x")
    with pytest.raises(ValueError, match="target"):
        AttackScript("curtain", "nav", good, 10, "x")


def test_effect_at_zero_order_hold():
    script = curtain_schedule(4000, "logo")
    assert effect_at(script, 0) == EffectState(0.0, 1)
    assert effect_at(script, 999) == EffectState(0.0, 1)
    assert effect_at(script, 1000) == EffectState(0.25, 1)
    assert effect_at(script, 3999) == EffectState(0.75, 1)
    assert effect_at(script, 4000) == EffectState(1.0, 1)
    assert effect_at(script, 10 ** 9) == EffectState(1.0, 1)
    with pytest.raises(ValueError):
        effect_at(script, -1)


def test_none_script_is_identity_everywhere():
    script = none_script()
    assert script.variant_id == "none"
    for t in (0, 1, 2000, 10 ** 6):
        assert effect_at(script, t).is_identity


def test_schedules_end_fully_rendered():
    for script in (curtain_schedule(4000), pixelation_schedule(4000),
                   combined_schedule(4000, 3, (0.25, 0.5))):
        assert script.keyframes[-1][1].is_identity
        assert script.keyframes[-1][0] == script.total_ms


def test_builder_input_validation():
    with pytest.raises(ValueError, match=">= 4"):
        curtain_schedule(3)
    with pytest.raises(ValueError, match=">= 4"):
        pixelation_schedule(0)
    with pytest.raises(ValueError, match="non-empty"):
        combined_schedule(4000, 3, ())
    with pytest.raises(ValueError, match="below 1"):
        combined_schedule(4000, 3, (0.5, 1.0))
    with pytest.raises(ValueError, match="ascending"):
        combined_schedule(4000, 3, (0.5, 0.25))
    with pytest.raises(ValueError, match="pixel_block"):
        combined_schedule(4000, 0, (0.5,))
    with pytest.raises(ValueError, match="unknown target"):
        enumerate_variants(2000, targets=("logo", "nav"))


def test_stepped_schedules_place_keyframes_on_quarter_marks():
    script = curtain_schedule(4000, "background")
    assert [t for t, _ in script.keyframes] == [0, 1000, 2000, 3000, 4000]
    assert script.variant_id == "curtain__background__t4000"
    script = pixelation_schedule(2666)
    assert [t for t, _ in script.keyframes] == [0, 666, 1333, 1999, 2666]
    assert [s.pixel_block for _, s in script.keyframes] == [5, 4, 3, 2, 1]


def test_terminal_stage_lands_exactly():
    # a schedule as long as the capture time is fully rendered when captured
    assert captured_state(curtain_schedule(2000), 2000) == EffectState(1.0, 1)
    assert captured_state(pixelation_schedule(2000), 2000) == EffectState(1.0, 1)


def test_enumeration_emits_sixty_with_structure():
    variants = enumerate_variants(2000)
    assert len(variants) == 60
    ids = [s.variant_id for s in variants]
    assert len(set(ids)) == 60
    per_target = Counter((s.target, s.attack_kind) for s in variants)
    for target in ("logo", "background", "both"):
        assert per_target[(target, "curtain")] == 4
        assert per_target[(target, "pixelation")] == 4
        assert per_target[(target, "combined")] == 12


def test_enumeration_lands_each_advertised_stage():
    capture = 2000
    logo = [s for s in enumerate_variants(capture) if s.target == "logo"]
    landed = {s.variant_id: captured_state(s, capture) for s in logo}
    curtain = [landed[s.variant_id].visible_fraction for s in logo
               if s.attack_kind == "curtain"]
    assert curtain == [0.0, 0.25, 0.5, 0.75]
    pixel = [landed[s.variant_id].pixel_block for s in logo
             if s.attack_kind == "pixelation"]
    assert pixel == [5, 4, 3, 2]
    combined = {(landed[s.variant_id].pixel_block,
                 landed[s.variant_id].visible_fraction)
                for s in logo if s.attack_kind == "combined"}
    assert combined == {(n, v) for n in (5, 4, 3, 2)
                        for v in (0.25, 0.5, 0.75)}


@settings(max_examples=60, deadline=None)
@given(st.integers(4, 100_000))
def test_enumeration_lands_at_any_capture_time(capture_ms):
    for script in enumerate_variants(capture_ms, targets=("logo",)):
        state = captured_state(script, capture_ms)
        assert not state.is_identity


def test_intensity_labels():
    assert intensity_label(EffectState(0.25, 1)) == "v=0.25"
    assert intensity_label(EffectState(1.0, 4)) == "N=4"
    assert intensity_label(EffectState(0.5, 3)) == "N=3&v=0.5"
    assert intensity_label(EffectState(1.0, 1)) == "v=1"


def test_manifest_round_trip(tmp_path):
    scripts = enumerate_variants(2000)
    path = tmp_path / "variants.json"
    save_variants_manifest(scripts, path)
    again = load_variants_manifest(path)
    assert again == scripts


def test_manifest_rejects_unknown_schema(tmp_path):
    path = tmp_path / "variants.json"
    path.write_text('{"schema_version": 9, "variants": []}')
    with pytest.raises(ValueError, match="unsupported"):
        load_variants_manifest(path)


def test_stage_constants_cover_the_grid():
    assert CURTAIN_STAGES == (0.0, 0.25, 0.5, 0.75, 1.0)
    assert PIXELATION_STAGES == (5, 4, 3, 2, 1)

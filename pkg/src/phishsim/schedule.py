"""Keyframed effect schedules that drive delayed-rendering attacks.

A script is a sorted list of (time_ms, state) keyframes with zero-order-hold
interpolation: the state at time t is the last keyframe at or before t. Every
real attack ends fully rendered, so a patient observer always sees the final
page.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

ATTACK_KINDS = ("none", "curtain", "pixelation", "combined")
TARGETS = ("logo", "background", "both")

CURTAIN_STAGES = (0.0, 0.25, 0.5, 0.75, 1.0)
PIXELATION_STAGES = (5, 4, 3, 2, 1)
COMBINED_BLOCKS = (5, 4, 3, 2)
COMBINED_VISIBILITIES = (0.25, 0.5, 0.75)


@dataclass(frozen=True)
class EffectState:
    """Rendering intensity at one instant.

    visible_fraction: portion of the element revealed from the top, 0..1.
    pixel_block: pixelation cell size; 1 means no pixelation.
    """

    visible_fraction: float
    pixel_block: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.visible_fraction <= 1.0:
            raise ValueError(f"visible_fraction must be in [0, 1], got {self.visible_fraction}")
        if not isinstance(self.pixel_block, int) or self.pixel_block < 1:
            raise ValueError(f"pixel_block must be a positive int, got {self.pixel_block!r}")

    @property
    def is_identity(self) -> bool:
        return self.visible_fraction == 1.0 and self.pixel_block == 1


FULL_RENDER = EffectState(1.0, 1)


@dataclass(frozen=True)
class AttackScript:
    """A keyframed schedule applied to the elements selected by ``target``."""

    attack_kind: str
    target: str
    keyframes: tuple[tuple[int, EffectState], ...]
    total_ms: int
    variant_id: str

    def __post_init__(self) -> None:
        if self.attack_kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.attack_kind!r}")
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if not self.keyframes:
            raise ValueError("a script needs at least one keyframe")
        times = [t for t, _ in self.keyframes]
        if times[0] != 0:
            raise ValueError("first keyframe must be at t=0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("keyframe times must be strictly increasing")
        if times[-1] != self.total_ms:
            raise ValueError("total_ms must equal the final keyframe time")
        final = self.keyframes[-1][1]
        if not final.is_identity:
            raise ValueError("final keyframe must fully render (v=1, block=1)")
        if self.attack_kind != "none" and self.total_ms <= 0:
            raise ValueError("attack scripts need total_ms > 0")


def effect_at(script: AttackScript, t_ms: int) -> EffectState:
    """State at time t: the last keyframe at or before t (zero-order hold)."""
    if t_ms < 0:
        raise ValueError(f"t_ms must be >= 0, got {t_ms}")
    state = script.keyframes[0][1]
    for kt, ks in script.keyframes:
        if kt <= t_ms:
            state = ks
        else:
            break
    return state


def none_script() -> AttackScript:
    """The no-attack script: fully rendered at every instant."""
    return AttackScript("none", "logo", ((0, FULL_RENDER),), 0, "none")


def curtain_schedule(total_ms: int, target: str = "logo") -> AttackScript:
    """Reveal the element top-down in four equal steps over total_ms.

    Visible fraction walks 0, 0.25, 0.5, 0.75, 1 at times k*total_ms//4.
    """
    if total_ms < 4:
        raise ValueError(f"curtain schedule needs total_ms >= 4, got {total_ms}")
    keyframes = tuple(
        (k * total_ms // 4, EffectState(v, 1)) for k, v in enumerate(CURTAIN_STAGES))
    return AttackScript("curtain", target, keyframes, total_ms,
                        f"curtain__{target}__t{total_ms}")


def pixelation_schedule(total_ms: int, target: str = "logo") -> AttackScript:
    """Sharpen the element stepwise: block size 5, 4, 3, 2, then 1 (exact)."""
    if total_ms < 4:
        raise ValueError(f"pixelation schedule needs total_ms >= 4, got {total_ms}")
    keyframes = tuple(
        (k * total_ms // 4, EffectState(1.0, n)) for k, n in enumerate(PIXELATION_STAGES))
    return AttackScript("pixelation", target, keyframes, total_ms,
                        f"pixelation__{target}__t{total_ms}")


def combined_schedule(total_ms: int, pixel_block: int,
                      visible_stages: Sequence[float],
                      target: str = "logo") -> AttackScript:
    """Hold a fixed pixelation block while the curtain steps through stages.

    visible_stages are the intermediate visible fractions (each < 1), evenly
    spaced over total_ms; the script always ends at (v=1, block=1).
    """
    stages = tuple(visible_stages)
    if not stages or any(not 0.0 <= v < 1.0 for v in stages):
        raise ValueError("visible_stages must be non-empty fractions below 1")
    if list(stages) != sorted(stages):
        raise ValueError("visible_stages must be ascending")
    if pixel_block < 1:
        raise ValueError(f"pixel_block must be >= 1, got {pixel_block}")
    if total_ms < len(stages) + 1:
        raise ValueError("total_ms too short for the requested stages")
    n = len(stages)
    keyframes = tuple((k * total_ms // n, EffectState(v, pixel_block))
                      for k, v in enumerate(stages))
    keyframes += ((total_ms, FULL_RENDER),)
    label = "-".join(f"{v:g}" for v in stages)
    return AttackScript("combined", target, keyframes, total_ms,
                        f"combined__{target}__N{pixel_block}_v{label}__t{total_ms}")


def _total_for_stage(capture_ms: int, stage_index: int) -> int:
    """total_ms that puts the capture instant inside the given 5-stage index."""
    if capture_ms < 4:
        raise ValueError(f"capture_ms must be >= 4, got {capture_ms}")
    if stage_index == 0:
        return 8 * capture_ms
    return (4 * capture_ms) // stage_index


def _with_variant_id(script: AttackScript, variant_id: str) -> AttackScript:
    return AttackScript(script.attack_kind, script.target, script.keyframes,
                        script.total_ms, variant_id)


def enumerate_variants(capture_time_ms: int = 2000,
                       targets: Sequence[str] = TARGETS) -> tuple[AttackScript, ...]:
    """The attack matrix: per target, 4 curtain + 4 pixelation + 12 combined.

    Schedule lengths are chosen so that the state at capture_time_ms is
    exactly the advertised stage; this is asserted, not assumed.
    """
    for t in targets:
        if t not in TARGETS:
            raise ValueError(f"unknown target {t!r}")
    variants: list[AttackScript] = []
    for target in targets:
        for k, v in enumerate(CURTAIN_STAGES[:-1]):
            total = _total_for_stage(capture_time_ms, k)
            script = _with_variant_id(
                curtain_schedule(total, target),
                f"curtain__{target}__v{v:g}__t{total}")
            assert effect_at(script, capture_time_ms) == EffectState(v, 1)
            variants.append(script)
        for k, n in enumerate(PIXELATION_STAGES[:-1]):
            total = _total_for_stage(capture_time_ms, k)
            script = _with_variant_id(
                pixelation_schedule(total, target),
                f"pixelation__{target}__N{n}__t{total}")
            assert effect_at(script, capture_time_ms) == EffectState(1.0, n)
            variants.append(script)
        for n in COMBINED_BLOCKS:
            for v in COMBINED_VISIBILITIES:
                total = 2 * capture_time_ms
                script = _with_variant_id(
                    combined_schedule(total, n, (v,), target),
                    f"combined__{target}__N{n}_v{v:g}__t{total}")
                assert effect_at(script, capture_time_ms) == EffectState(v, n)
                variants.append(script)
    return tuple(variants)


def captured_state(script: AttackScript, capture_time_ms: int) -> EffectState:
    """Convenience: the state a detector sees at its capture instant."""
    return effect_at(script, capture_time_ms)


def intensity_label(state: EffectState) -> str:
    """Stable human-readable label for a captured state."""
    if state.pixel_block > 1 and state.visible_fraction < 1.0:
        return f"N={state.pixel_block}&v={state.visible_fraction:g}"
    if state.pixel_block > 1:
        return f"N={state.pixel_block}"
    return f"v={state.visible_fraction:g}"


def save_variants_manifest(scripts: Iterable[AttackScript], path) -> None:
    """Write scripts as a JSON manifest (keyframes verbatim, for exact replay)."""
    doc = {
        "schema_version": 1,
        "variants": [
            {
                "variant_id": s.variant_id,
                "attack_kind": s.attack_kind,
                "target": s.target,
                "total_ms": s.total_ms,
                "keyframes": [[t, st.visible_fraction, st.pixel_block]
                              for t, st in s.keyframes],
            }
            for s in scripts
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_variants_manifest(path) -> tuple[AttackScript, ...]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or doc.get("schema_version") != 1:
        raise ValueError(f"unsupported variants manifest {path}")
    scripts = []
    for entry in doc["variants"]:
        keyframes = tuple((int(t), EffectState(float(v), int(n)))
                          for t, v, n in entry["keyframes"])
        scripts.append(AttackScript(entry["attack_kind"], entry["target"],
                                    keyframes, int(entry["total_ms"]),
                                    entry["variant_id"]))
    return tuple(scripts)

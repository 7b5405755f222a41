"""Render LED effect frames in the terminal with truecolor blocks."""

from swarmlab.sim.leds import Color, EffectKind, EffectSpec, LedGroup, led_frame

N = 8
FRAME_DT = 0.25


def swatch(color):
    if color is None:
        return "  "
    return f"\x1b[38;2;{color.r};{color.g};{color.b}m██\x1b[0m"


def run(label, spec, frames=12):
    print(f"{label}:")
    for frame in range(frames):
        row = led_frame(spec, N, frame, seed=4, frame_dt=FRAME_DT)
        print(f"  t={frame * FRAME_DT:5.2f}s  " + "".join(swatch(c) for c in row))


def main():
    amber = Color(255, 160, 0)
    run("wipe", EffectSpec(EffectKind.WIPE, LedGroup.ALL, amber, rate=2.0))
    run("blink, odd drones", EffectSpec(EffectKind.BLINK, LedGroup.ODD, amber, rate=1.0))
    run("rainbow", EffectSpec(EffectKind.RAINBOW, LedGroup.ALL, amber, rate=1.0), frames=1)
    run("rainbow_fill", EffectSpec(EffectKind.RAINBOW_FILL, LedGroup.ALL, amber, rate=0.4))


if __name__ == "__main__":
    main()

"""Regenerates kitchen.obj and kitchen.labels.json (a 4.2 m x 3.2 m galley)."""
import json
import pathlib

HERE = pathlib.Path(__file__).parent

BOXES = {
    "wall_west": ((-0.1, -0.1, 0.0), (0.0, 3.3, 2.5)),
    "wall_east": ((4.2, -0.1, 0.0), (4.3, 3.3, 2.5)),
    "wall_south": ((0.0, -0.1, 0.0), (4.2, 0.0, 2.5)),
    "wall_north": ((0.0, 3.2, 0.0), (4.2, 3.3, 2.5)),
    "counter_north": ((0.6, 2.6, 0.0), (1.4, 3.2, 0.9)),
    "sink": ((1.4, 2.6, 0.0), (2.0, 3.2, 0.9)),
    "counter_north_east": ((2.0, 2.6, 0.0), (2.6, 3.2, 0.9)),
    "counter_west": ((0.0, 1.6, 0.0), (0.6, 3.2, 0.9)),
    "stove": ((0.0, 0.9, 0.0), (0.6, 1.6, 0.9)),
    "fridge": ((3.5, 2.4, 0.0), (4.2, 3.2, 1.8)),
    "island": ((1.6, 1.0, 0.0), (2.8, 1.6, 0.9)),
}

FACES = [(1, 3, 2), (2, 3, 4), (5, 6, 7), (6, 8, 7), (1, 2, 5), (2, 6, 5),
         (3, 7, 4), (4, 7, 8), (1, 5, 3), (3, 5, 7), (2, 4, 6), (4, 8, 6)]


def main():
    lines = ["# galley kitchen, meters, +z up"]
    base = 0
    lines += ["o floor", "v 0 0 0", "v 4.2 0 0", "v 4.2 3.2 0", "v 0 3.2 0", "f 1 2 3 4"]
    base = 4
    for name, (lo, hi) in BOXES.items():
        lines.append(f"o {name}")
        for k in range(8):
            x = hi[0] if k & 1 else lo[0]
            y = hi[1] if k & 2 else lo[1]
            z = hi[2] if k & 4 else lo[2]
            lines.append(f"v {x:g} {y:g} {z:g}")
        for a, b, c in FACES:
            lines.append(f"f {a + base} {b + base} {c + base}")
        base += 8
    (HERE / "kitchen.obj").write_text("\n".join(lines) + "\n")
    labels = {name: "obstacle" for name in BOXES}
    (HERE / "kitchen.labels.json").write_text(json.dumps(labels, indent=2) + "\n")


if __name__ == "__main__":
    main()

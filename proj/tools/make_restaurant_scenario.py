#!/usr/bin/env python3
"""Writes the restaurant map, detection log and the 41-order scenario to data/.

The event trace is constructed: orders, faults and chatter are chosen so the
aggregate counts come out as 41 orders, 4 wrong deliveries and 7 detect
failures recovered by a hand-over. Output is deterministic.
"""

import argparse
import json
import math
import random
from pathlib import Path

WIDTH, HEIGHT, RES = 200, 160, 0.05

TABLES = [  # (x, y, yaw)
    (2.0, 6.0, 0.0),
    (5.0, 6.0, 0.0),
    (8.0, 6.0, 0.0),
    (2.0, 2.5, 0.0),
    (5.0, 2.5, math.pi / 2),
    (8.0, 2.5, 0.0),
]
TABLE_DIMS = [1.2, 0.8, 0.72]

MENU = [
    ("cola", "chilled and fizzy"),
    ("orange juice", "freshly squeezed"),
    ("green tea", "served hot"),
    ("coffee", "a house blend"),
    ("apple juice", "cloudy and sweet"),
    ("water", "still or sparkling"),
]

ORDER_PHRASES = [
    "Could you bring me {a} {item}, please?",
    "Can I have {a} {item}?",
    "I'd like {a} {item}.",
    "Please serve me {a} {item}.",
    "I would like {a} {item}, thanks.",
    "Can I get {a} {item}?",
]


def write_grid(path):
    rows = []
    for r in range(HEIGHT):
        row = []
        for c in range(WIDTH):
            wall = r in (0, HEIGHT - 1) or c in (0, WIDTH - 1)
            storage = 3 <= r <= 8 and 190 <= c <= 196  # unmapped storage nook
            row.append("#" if wall else "?" if storage else ".")
        rows.append("".join(row))
    path.write_text(f"gridmap v1 {WIDTH} {HEIGHT} {RES:g} 0 0\n" + "\n".join(rows) + "\n")


def detection_frames(rng, count):
    frames = []
    for k in range(count):
        dets = []
        for x, y, yaw in TABLES:
            jx, jy = rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02)
            dets.append({
                "class": "table",
                "center": [round(x + jx, 4), round(y + jy, 4), TABLE_DIMS[2] / 2],
                "dims": TABLE_DIMS,
                "yaw": round(yaw + rng.uniform(-0.01, 0.01), 4),
            })
        frames.append({"frame_id": k + 1, "detections": dets})
    return frames


def build_events(rng, frames):
    events = []
    t = 0.0
    for f in frames:
        events.append({"t": t, "type": "detections", **f})
        t += 1.0

    # Order and chatter plan: each entry is (table, kind, item).
    plan = []
    item_cycle = 0
    on_table = {k: 0 for k in range(1, 6)}
    orders = 0
    while orders < 41:
        table = 1 + (orders % 5)
        item = MENU[item_cycle % len(MENU)][0]
        item_cycle += 1
        plan.append((table, "order", item))
        on_table[table] += 1
        orders += 1
        if orders % 6 == 0:
            plan.append((table, "menu", None))
        if orders % 7 == 3 and on_table[table] > 0:
            plan.append((table, "clean", None))
            on_table[table] -= 1
        if orders % 9 == 4:
            plan.append((table, "chat", None))

    # Detect invocations: one per order, one per clean. Pick which orders fail.
    detect_index = {}
    n = 0
    order_ids = []
    for i, (table, kind, item) in enumerate(plan):
        if kind in ("order", "clean"):
            detect_index[i] = n
            n += 1
        if kind == "order":
            order_ids.append(i)
    picks = rng.sample(order_ids, 11)
    wrong = sorted(picks[:4])
    failed = sorted(picks[4:])
    for i in wrong:
        events.append({"t": t, "type": "fault", "skill": "detect",
                       "trigger": detect_index[i], "effect": "wrong_item"})
    for i in failed:
        events.append({"t": t, "type": "fault", "skill": "detect",
                       "trigger": detect_index[i], "effect": "fail"})
    t += 1.0

    names = ["Smith", "Tanaka", "Garcia", "Okafor"]
    for i, (table, kind, item) in enumerate(plan):
        tid = f"table_{table}"
        x, y, _ = TABLES[table]
        if i % 10 == 0:
            person = len(events) % len(names)
            events.append({
                "t": t, "type": "human_obs", "frame_id": i + 1,
                "position": [x + 0.9, y, 0.0],
                "name": names[person],
                "action": "sitting" if i % 20 == 0 else "waving",
                "attributes": {"gender": "male" if person % 2 == 0 else "female",
                               "clothing": "T-shirt" if person % 2 == 0 else "red sweater"},
            })
            t += 0.5
        events.append({"t": t, "type": "call", "table": tid})
        t += 5.0
        if kind == "order":
            text = ORDER_PHRASES[rng.randrange(len(ORDER_PHRASES))].format(item=item, a="an" if item[0] in "aeiou" else "a")
        elif kind == "menu":
            text = "What do you have on the menu today?"
        elif kind == "clean":
            text = "Could you clear our table, please?"
        else:
            text = "Thank you, that was lovely."
        events.append({"t": t, "type": "utterance", "table": tid, "text": text})
        t += 20.0
    return events


def write_tabletop(path, rng):
    """A 0.9 x 0.6 m tabletop at 0.74 m with two cups and some floor returns."""
    lines = []
    n = 0
    x = -0.45
    while x <= 0.45 + 1e-9:
        y = -0.3
        while y <= 0.3 + 1e-9:
            lines.append(f"{x:.5f} {y:.5f} {0.74 + rng.gauss(0.0, 0.002):.5f}")
            y += 0.015
        x += 0.015
    for cx, cy in [(0.2, 0.1), (-0.25, -0.15)]:
        for ring in range(1, 7):
            for k in range(16):
                a = 2 * math.pi * k / 16
                lines.append(f"{cx + 0.04 * math.cos(a):.5f} {cy + 0.04 * math.sin(a):.5f} {0.74 + 0.02 * ring:.5f}")
    for _ in range(200):
        lines.append(f"{rng.uniform(-0.8, 0.8):.5f} {rng.uniform(-0.6, 0.6):.5f} {rng.uniform(0.0, 0.01):.5f}")
    path.write_text("\n".join(lines) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--seed", type=int, default=41)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)

    write_grid(out / "restaurant.grid")
    frames = detection_frames(rng, 3)
    (out / "six_tables_detections.json").write_text(
        json.dumps({"frames": frames, "designations": {"table_0": "kitchen"}}, indent=2) + "\n")

    world = {
        "grid": "restaurant.grid",
        "zones": [
            {"name": "kitchen", "p1": [0.0, 4.5], "p2": [3.5, 8.0]},
            {"name": "dining room", "p1": [0.0, 0.0], "p2": [10.0, 8.0]},
        ],
        "menu": [{"name": n, "description": d} for n, d in MENU],
        "kitchen_table": "table_0",
        "robot_start": [5.0, 4.25, 0.0],
        "stock_per_item": 20,
        "environment": "A small restaurant with six tables. table_0 is the kitchen table "
                       "where drinks are prepared; customers sit at the other tables.",
        "nav": {"robot_radius": 0.22, "clearance": 0.2, "alpha": 10.0, "window_half_width": 1.5},
    }
    scenario = {
        "name": "restaurant_41",
        "note": "Constructed trace. Orders and faults are scripted so the aggregate counts "
                "match 41 orders with 4 wrong deliveries; it is not a recorded trace.",
        "world": world,
        "events": build_events(rng, frames),
    }
    (out / "restaurant_41.json").write_text(json.dumps(scenario, indent=2) + "\n")
    write_tabletop(out / "tabletop.xyz", random.Random(args.seed + 1))


if __name__ == "__main__":
    main()

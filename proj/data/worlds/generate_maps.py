#!/usr/bin/env python3
"""Regenerates the shipped world files and the office location registry.

    python3 data/worlds/generate_maps.py
"""
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIG = os.path.join(HERE, "..", "config")


class Raster:
    def __init__(self, width_m, height_m, res):
        self.res = res
        self.w = int(round(width_m / res))
        self.h = int(round(height_m / res))
        self.cells = [[False] * self.w for _ in range(self.h)]  # [j][i], j up

    def fill(self, x0, y0, x1, y1, value=True):
        i0 = int(round(x0 / self.res))
        i1 = int(round(x1 / self.res))
        j0 = int(round(y0 / self.res))
        j1 = int(round(y1 / self.res))
        for j in range(max(0, j0), min(self.h, j1)):
            for i in range(max(0, i0), min(self.w, i1)):
                self.cells[j][i] = value

    def rows(self):
        return ["".join("#" if c else "." for c in self.cells[j]) for j in range(self.h - 1, -1, -1)]


def write_world(path, name, raster, start, rooms, objects):
    with open(path, "w") as f:
        f.write(f"# {name}: generated by generate_maps.py\n")
        f.write(f"name: {name}\n")
        f.write("grid:\n")
        f.write(f"  width: {raster.w}\n  height: {raster.h}\n")
        f.write(f"  resolution: {raster.res}\n  origin: [0.0, 0.0]\n")
        f.write("  rows: |\n")
        for r in raster.rows():
            f.write(f"    {r}\n")
        f.write(f"robot_start: {{x: {start[0]}, y: {start[1]}, theta: {start[2]:.6f}}}\n")
        f.write("rooms:\n" if rooms else "rooms: []\n")
        for r in rooms:
            f.write(f"  - {{label: {r[0]}, x_min: {r[1]}, y_min: {r[2]}, x_max: {r[3]}, y_max: {r[4]}}}\n")
        f.write("objects:\n")
        for o in objects:
            f.write(f"  - {{label: {o[0]}, x: {o[1]}, y: {o[2]}, radius: {o[3]}}}\n")


def office():
    W, H, res, t = 18.0, 20.0, 0.1, 0.2
    g = Raster(W, H, res)
    # Outer walls.
    g.fill(0, 0, W, t)
    g.fill(0, H - t, W, H)
    g.fill(0, 0, t, H)
    g.fill(W - t, 0, W, H)
    # Corridor walls.
    left_wall, right_wall = 7.4, 10.6
    g.fill(left_wall, 0, left_wall + t, H)
    g.fill(right_wall - t, 0, right_wall, H)

    left_names = ["secretary_office", "professor_office", "meeting_room", "kitchen", "printer_room", "library"]
    right_names = ["lab_1", "lab_2", "workshop", "server_room", "lounge"]
    rooms = []
    door = 1.2

    def side(names, x0, x1, wall_x):
        n = len(names)
        span = (H - 2 * t) / n
        for k, label in enumerate(names):
            y0 = t + k * span
            y1 = y0 + span
            if k > 0:
                g.fill(x0, y0 - t / 2, x1, y0 + t / 2)
            yc = round((y0 + y1) / 2, 1)
            g.fill(wall_x, yc - door / 2, wall_x + t, yc + door / 2, False)
            rooms.append((label, round(x0 + t, 2), round(y0 + t / 2, 2), round(x1 - t, 2), round(y1 - t / 2, 2)))

    side(left_names, 0.0, left_wall + t, left_wall)
    side(right_names, right_wall - t, W, right_wall - t)

    objects = []
    furniture = [("table", 0.5), ("chair", 0.25)]
    for k, r in enumerate(rooms):
        label, x0, y0, x1, y1 = r
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        objects.append(("table", round(cx - 0.8, 2), round(cy + 0.5, 2), 0.5))
        objects.append(("chair", round(cx - 0.8, 2), round(cy - 0.4, 2), 0.25))
        if k % 2 == 0:
            objects.append(("person", round(cx + 1.2, 2), round(cy - 0.6, 2), 0.3))
        if k % 3 == 1:
            objects.append(("trash_bin", round(x0 + 0.4, 2), round(y0 + 0.4, 2), 0.2))
    objects += [("person", 9.0, 10.0, 0.3), ("trash_bin", 8.0, 5.0, 0.2), ("chair", 10.0, 15.0, 0.25)]

    write_world(os.path.join(HERE, "office_18x20.yaml"), "office_18x20", g, (9.0, 1.5, math.pi / 2), rooms, objects)

    # Location registry: room centres facing the corridor, plus corridor ends.
    aliases = {
        "secretary_office": ["secretary's office", "secretary office", "office of the secretary", "secretariat"],
        "professor_office": ["professor's office", "professor office", "prof office"],
        "meeting_room": ["meeting room", "conference room"],
        "kitchen": ["kitchen", "kitchenette"],
        "printer_room": ["printer room", "copy room"],
        "library": ["library"],
        "lab_1": ["lab 1", "lab one", "laboratory 1", "first lab"],
        "lab_2": ["lab 2", "lab two", "laboratory 2", "second lab"],
        "workshop": ["workshop"],
        "server_room": ["server room"],
        "lounge": ["lounge", "break room"],
        "corridor_south": ["corridor south", "south corridor", "entrance"],
        "corridor_north": ["corridor north", "north corridor"],
    }
    with open(os.path.join(CONFIG, "locations.yaml"), "w") as f:
        f.write("# Goal registry for office_18x20: label -> (x, y, z, w), z/w = yaw quaternion\n")
        f.write("locations:\n")
        entries = []
        for label, x0, y0, x1, y1 in rooms:
            cx, cy = round((x0 + x1) / 2, 2), round((y0 + y1) / 2, 2)
            yaw = 0.0 if cx < 9 else math.pi
            entries.append((label, cx, cy, yaw))
        entries.append(("corridor_south", 9.0, 1.5, math.pi / 2))
        entries.append(("corridor_north", 9.0, 18.5, -math.pi / 2))
        for label, x, y, yaw in entries:
            z, w = math.sin(yaw / 2), math.cos(yaw / 2)
            al = ", ".join(f'"{a}"' for a in aliases[label])
            f.write(f"  - {{label: {label}, x: {x}, y: {y}, z: {z:.9f}, w: {w:.9f}, aliases: [{al}]}}\n")


def corridor():
    W, H, res, t = 6.0, 120.0, 0.2, 0.2
    g = Raster(W, H, res)
    g.fill(0, 0, W, t)
    g.fill(0, H - t, W, H)
    g.fill(0, 0, t, H)
    g.fill(W - t, 0, W, H)
    # Pillars every 20 m along the west wall.
    for k in range(1, 6):
        g.fill(t, 20 * k - 0.2, 0.8, 20 * k + 0.2)
    rooms = [("corridor", 0.2, 0.2, 5.8, 119.8)]
    objects = []
    for k in range(6):
        y = 10 + 20 * k
        objects.append(("trash_bin", 5.4, float(y), 0.2))
        objects.append(("chair", 1.5, float(y + 5), 0.25))
        if k % 2 == 0:
            objects.append(("person", 3.5, float(y + 8), 0.3))
    write_world(os.path.join(HERE, "corridor_6x120.yaml"), "corridor_6x120", g, (3.0, 2.0, math.pi / 2), rooms, objects)


if __name__ == "__main__":
    office()
    corridor()

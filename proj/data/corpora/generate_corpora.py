#!/usr/bin/env python3
"""Regenerates the evaluation corpora.

    python3 data/corpora/generate_corpora.py

commands_120.jsonl   120 in-grammar commands
commands_oog.jsonl   the same mix with every tenth line replaced by
                     out-of-grammar text (true label kept)
nav_goals_50.jsonl   50 reachable goal poses on office_18x20
"""
import json
import math
import os
import random

import numpy as np
import yaml
from scipy import ndimage

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..")

NONSENSE = ["blorp", "fizzle", "wug", "snarf", "quux", "zib", "glorp", "frobnicate", "plonk", "vorpal",
            "mimsy", "borogove", "slithy", "tove", "gimble", "wabe"]


def load(rel):
    with open(os.path.join(DATA, rel)) as f:
        return yaml.safe_load(f)


def vary(rng, text):
    style = rng.randrange(4)
    if style == 1:
        text = text.capitalize()
    elif style == 2:
        text = text + rng.choice(["!", ".", "?"])
    elif style == 3:
        text = text.upper()
    return text


def command_pool():
    grammar = load("config/grammar.yaml")["entries"]
    locations = load("config/locations.yaml")["locations"]
    pool = []
    for e in grammar:
        if e["kind"] == "nav":
            for loc in locations:
                for alias in loc["aliases"]:
                    pool.append(("nav", e["patterns"], "the " + alias, "navigate/" + loc["label"]))
        else:
            pool.append((e["kind"], e["patterns"], None, e["label"]))
    return pool


def commands(rng, n):
    pool = command_pool()
    plain = [p for p in pool if p[0] != "nav"]
    nav = [p for p in pool if p[0] == "nav"]
    out = []
    for k in range(n):
        # Roughly one navigation command in four.
        kind, patterns, dest, label = rng.choice(nav) if k % 4 == 3 else rng.choice(plain)
        text = rng.choice(patterns)
        if dest is not None:
            text = text.replace("{destination}", dest)
        out.append({"text": vary(rng, text), "true_label": label})
    return out


def out_of_grammar(rng, lines):
    out = [dict(l) for l in lines]
    for k in range(9, len(out), 10):
        words = rng.sample(NONSENSE, rng.randint(2, 4))
        out[k]["text"] = " ".join(words)
    return out


def inflate(occ, res, radius):
    reach = int(math.ceil(radius / res)) + 1
    out = occ.copy()
    for dj in range(-reach, reach + 1):
        for di in range(-reach, reach + 1):
            dx = max(abs(di) - 0.5, 0.0) * res
            dy = max(abs(dj) - 0.5, 0.0) * res
            if math.hypot(dx, dy) > radius:
                continue
            out |= np.roll(np.roll(occ, dj, axis=0), di, axis=1)
    return out


def nav_goals(rng, n):
    world = load("worlds/office_18x20.yaml")
    g = world["grid"]
    rows = g["rows"].strip("\n").split("\n")
    occ = np.array([[c == "#" for c in r.strip()] for r in reversed(rows)])  # [j][i], j up
    res = g["resolution"]
    ox, oy = g["origin"]
    # Keep a margin beyond the planner's inflation so goals are comfortably free.
    free = ~inflate(occ, res, 0.45)
    comps, _ = ndimage.label(free)
    s = world["robot_start"]
    si, sj = int((s["x"] - ox) / res), int((s["y"] - oy) / res)
    cells = np.argwhere(comps == comps[sj, si])
    out = []
    while len(out) < n:
        j, i = cells[rng.randrange(len(cells))]
        x = round(ox + (i + 0.5) * res, 3)
        y = round(oy + (j + 0.5) * res, 3)
        yaw = round(rng.uniform(-math.pi, math.pi), 4)
        out.append({"text": "go to the marked spot", "true_label": "navigate", "goal": {"x": x, "y": y, "yaw": yaw}})
    return out


def write(name, lines):
    with open(os.path.join(HERE, name), "w") as f:
        for l in lines:
            f.write(json.dumps(l) + "\n")


def main():
    rng = random.Random(2024)
    cmds = commands(rng, 120)
    write("commands_120.jsonl", cmds)
    write("commands_oog.jsonl", out_of_grammar(rng, cmds))
    write("nav_goals_50.jsonl", nav_goals(rng, 50))


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Generate the bundled environment files under crates/core/assets/envs.

Maps are authored here in meters (walls, doors, rooms, furniture) and emitted
as cell-based JSON with run-length encoded wall rows. Re-run after editing a
layout; the output files are committed.
"""

import json
import math
import os
import re
import sys

CELL = 0.25
OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "assets")


def c(m):
    return int(math.floor(m / CELL + 1e-9))


def center(col, row):
    return ((col + 0.5) * CELL, (row + 0.5) * CELL)


class Map:
    def __init__(self, name, setting, width_m, height_m):
        self.name = name
        self.setting = setting
        self.w = c(width_m)
        self.h = c(height_m)
        self.walls = set()
        self.half = set()
        self.rooms = []
        self.objects = []
        self.tasks = []
        self.confusion = {}
        self.start = None
        for col in range(self.w):
            self.walls.add((col, 0))
            self.walls.add((col, self.h - 1))
        for row in range(self.h):
            self.walls.add((0, row))
            self.walls.add((self.w - 1, row))

    def hwall(self, y, x0, x1, doors=(), half=False):
        row = c(y)
        gaps = set()
        for (dx, dw) in doors:
            for col in range(c(dx - dw / 2), c(dx + dw / 2)):
                gaps.add(col)
        for col in range(c(x0), c(x1) + 1):
            if col in gaps or not (0 <= col < self.w):
                continue
            (self.half if half else self.walls).add((col, row))

    def vwall(self, x, y0, y1, doors=(), half=False):
        col = c(x)
        gaps = set()
        for (dy, dw) in doors:
            for row in range(c(dy - dw / 2), c(dy + dw / 2)):
                gaps.add(row)
        for row in range(c(y0), c(y1) + 1):
            if row in gaps or not (0 <= row < self.h):
                continue
            (self.half if half else self.walls).add((col, row))

    def block(self, x0, y0, x1, y1):
        for col in range(c(x0), c(x1) + 1):
            for row in range(c(y0), c(y1) + 1):
                self.walls.add((col, row))

    def room(self, label, x0, y0, x1, y1):
        self.rooms.append({"label": label, "rect": [c(x0), c(y0), c(x1), c(y1)]})

    def blocked(self, col, row):
        return (col, row) in self.walls or (col, row) in self.half

    def obj(self, oid, cls, x, y, into=None):
        col, row = c(x), c(y)
        # objects stand against a wall or furniture so projections land on them
        if self.blocked(col, row) or not any(self.blocked(col + dc, row + dr) for dc, dr in ((1, 0), (-1, 0), (0, 1), (0, -1))):
            best = None
            for dc in range(-3, 4):
                for dr in range(-3, 4):
                    cc, rr = col + dc, row + dr
                    if self.blocked(cc, rr):
                        continue
                    if any(self.blocked(cc + a, rr + b) for a, b in ((1, 0), (-1, 0), (0, 1), (0, -1))):
                        d = dc * dc + dr * dr
                        if best is None or d < best[0]:
                            best = (d, cc, rr)
            assert best is not None, ("no wall near", oid)
            col, row = best[1], best[2]
        px, py = center(col, row)
        entry = {"id": oid, "class": cls, "x": px, "y": py}
        (self.objects if into is None else into).append(entry)

    def set_start(self, x, y, heading):
        px, py = center(c(x), c(y))
        self.start = {"x": px, "y": py, "heading": heading}

    def task(self, tid, query, target_class, target_id, objects=None, start=None):
        t = {
            "id": tid,
            "query": query,
            "target_class": target_class,
            "success_radius": 2.0,
            "target_id": target_id,
        }
        if objects:
            t["objects"] = objects
        if start:
            px, py = center(c(start[0]), c(start[1]))
            t["start"] = {"x": px, "y": py, "heading": start[2]}
        self.tasks.append(t)

    def runs(self, cells):
        out = []
        by_row = {}
        for (col, row) in cells:
            by_row.setdefault(row, []).append(col)
        for row in sorted(by_row):
            cols = sorted(by_row[row])
            s = cols[0]
            prev = s
            for col in cols[1:]:
                if col != prev + 1:
                    out.append([row, s, prev - s + 1])
                    s = col
                prev = col
            out.append([row, s, prev - s + 1])
        return out

    def to_json(self):
        half = self.half - self.walls
        doc = {
            "name": self.name,
            "setting": self.setting,
            "cell_size": CELL,
            "grid": {"width": self.w, "height": self.h},
            "wall_runs": self.runs(self.walls),
        }
        if half:
            doc["half_wall_runs"] = self.runs(half)
        doc["rooms"] = self.rooms
        doc["objects"] = self.objects
        doc["start"] = self.start
        doc["tasks"] = self.tasks
        if self.confusion:
            doc["confusion"] = self.confusion
        return doc


def office1():
    m = Map("office1", "an indoor office building", 26.0, 22.0)
    # hallway walls
    m.hwall(10.0, 0, 26, doors=[(4.5, 2.0), (13.0, 1.0), (21.5, 1.0)])
    m.hwall(12.5, 0, 26, doors=[(3.5, 1.0), (10.5, 1.0), (17.0, 1.0), (23.0, 1.0)])
    m.vwall(9.0, 0, 10.0)
    m.vwall(17.0, 0, 10.0)
    m.vwall(7.0, 12.5, 22)
    m.vwall(14.0, 12.5, 22)
    m.vwall(20.0, 12.5, 22)
    m.room("lobby", 0.25, 0.25, 8.75, 9.75)
    m.room("office", 9.25, 0.25, 16.75, 9.75)
    m.room("storage room", 17.25, 0.25, 25.75, 9.75)
    m.room("hallway", 0.25, 10.25, 25.75, 12.25)
    m.room("office", 0.25, 12.75, 6.75, 21.75)
    m.room("conference room", 7.25, 12.75, 13.75, 21.75)
    m.room("break room", 14.25, 12.75, 19.75, 21.75)
    m.room("open office", 20.25, 12.75, 25.75, 21.75)
    # furniture
    m.block(11.0, 16.0, 12.0, 18.5)  # conference table
    m.block(21.5, 16.0, 22.5, 17.0)  # desk island
    m.block(18.5, 4.0, 19.0, 7.5)  # storage shelving
    # lobby
    m.obj("sofa-1", "sofa", 0.4, 6.0)
    m.obj("reception-desk-1", "reception desk", 6.0, 9.6)
    m.obj("plant-1", "plant", 8.6, 0.4)
    # office A (south)
    m.obj("desk-1", "desk", 16.6, 5.0)
    m.obj("office-chair-1", "office chair", 16.6, 6.0)
    m.obj("monitor-1", "computer monitor", 16.6, 4.0)
    # storage
    m.obj("shelf-1", "shelf", 19.4, 6.0)
    m.obj("boxes-1", "boxes", 25.6, 5.0)
    m.obj("trash-can-1", "trash can", 17.4, 9.6)
    # hallway
    m.obj("exit-sign-1", "exit sign", 12.0, 12.3)
    m.obj("exit-sign-2", "exit sign", 25.6, 11.0)
    m.obj("trash-can-2", "trash can", 7.0, 10.4)
    # office B (north west)
    m.obj("desk-2", "desk", 0.4, 18.0)
    m.obj("office-chair-2", "office chair", 0.4, 17.0)
    m.obj("plant-2", "plant", 6.6, 21.6)
    # conference room
    m.obj("whiteboard-1", "whiteboard", 10.5, 21.6)
    m.obj("chair-1", "chair", 12.1, 17.0)
    m.obj("projector-1", "projector", 7.4, 17.0)
    # break room
    m.obj("refrigerator-1", "refrigerator", 19.6, 21.6)
    m.obj("microwave-1", "microwave", 14.4, 21.6)
    m.obj("sink-1", "sink", 17.0, 21.6)
    m.obj("trash-can-3", "trash can", 14.4, 13.0)
    # open office
    m.obj("desk-3", "desk", 22.6, 16.5)
    m.obj("office-chair-3", "office chair", 23.0, 16.5)
    m.obj("printer-1", "printer", 20.4, 21.6)
    m.obj("trash-can-4", "trash can", 20.4, 13.0)
    m.confusion = {"trash can": ["fire extinguisher", 0.05], "fire extinguisher": ["trash can", 0.05]}
    m.set_start(4.5, 4.5, math.pi / 2)
    fe1, fe2, fe3 = [], [], []
    m.obj("fire-extinguisher-1", "fire extinguisher", 25.6, 21.6, into=fe1)
    m.obj("fire-extinguisher-2", "fire extinguisher", 25.6, 0.4, into=fe2)
    m.obj("fire-extinguisher-3", "fire extinguisher", 13.6, 21.6, into=fe3)
    m.task("FE1", "Go find the fire extinguisher", "fire extinguisher", "fire-extinguisher-1", fe1)
    m.task("FE2", "Go find the fire extinguisher", "fire extinguisher", "fire-extinguisher-2", fe2)
    m.task("FE3", "Go find the fire extinguisher", "fire extinguisher", "fire-extinguisher-3", fe3)
    return m


def office2():
    m = Map("office2", "an indoor office building with an outdoor patio", 50.0, 29.0)
    # building / patio boundary with a glass door
    m.vwall(34.0, 0, 29, doors=[(14.25, 2.5)])
    # hallway
    m.hwall(12.5, 0, 34, doors=[(5.0, 1.0), (15.0, 1.5), (23.5, 1.0), (30.5, 1.0)])
    m.hwall(16.0, 0, 34, doors=[(4.0, 1.0), (12.0, 1.0), (20.5, 1.5), (29.5, 1.5)])
    # north rooms
    m.vwall(8.0, 16.0, 29)
    m.vwall(16.0, 16.0, 29)
    m.vwall(25.0, 16.0, 29)
    # south rooms
    m.vwall(10.0, 0, 12.5)
    m.vwall(20.0, 0, 12.5)
    m.vwall(27.0, 0, 12.5)
    m.room("office", 0.25, 16.25, 7.75, 28.75)
    m.room("office", 8.25, 16.25, 15.75, 28.75)
    m.room("conference room", 16.25, 16.25, 24.75, 28.75)
    m.room("lounge", 25.25, 16.25, 33.75, 28.75)
    m.room("open office", 0.25, 0.25, 9.75, 12.25)
    m.room("kitchen", 10.25, 0.25, 19.75, 12.25)
    m.room("office", 20.25, 0.25, 26.75, 12.25)
    m.room("restroom", 27.25, 0.25, 33.75, 12.25)
    m.room("hallway", 0.25, 12.75, 33.75, 15.75)
    m.room("patio", 34.25, 0.25, 49.75, 28.75)
    # low partition inside the north-west office; the office chair sits behind it
    m.hwall(21.0, 0.25, 5.0, half=True)
    # furniture
    m.block(19.5, 21.0, 21.5, 24.0)  # conference table
    m.block(12.0, 5.0, 13.5, 7.0)  # kitchen island
    m.block(40.0, 8.0, 41.0, 9.0)  # planter
    m.block(44.0, 20.0, 45.0, 21.0)  # planter
    m.block(3.0, 5.0, 4.0, 6.5)  # open office desk block
    # north-west office (target OC)
    m.obj("desk-1", "desk", 7.6, 25.0)
    m.obj("monitor-1", "computer monitor", 7.6, 26.0)
    # office 2
    m.obj("desk-2", "desk", 15.6, 25.0)
    m.obj("plant-1", "plant", 8.4, 28.6)
    # conference room
    m.obj("chair-1", "chair", 19.4, 22.5)
    m.obj("chair-2", "chair", 21.6, 22.5)
    m.obj("whiteboard-1", "whiteboard", 20.5, 28.6)
    # lounge
    m.obj("sofa-1", "sofa", 33.6, 22.0)
    m.obj("armchair-1", "armchair", 25.4, 20.0)
    m.obj("plant-2", "plant", 25.4, 28.6)
    # open office (south)
    m.obj("desk-3", "desk", 2.9, 5.5)
    m.obj("printer-1", "printer", 0.4, 11.0)
    # kitchen
    m.obj("refrigerator-1", "refrigerator", 10.4, 0.4)
    m.obj("dining-table-1", "dining table", 13.6, 6.0)
    m.obj("coffee-machine-1", "coffee machine", 19.6, 0.4)
    # south office
    m.obj("desk-4", "desk", 26.6, 6.0)
    m.obj("bookshelf-1", "bookshelf", 20.4, 6.0)
    # restroom
    m.obj("sink-1", "sink", 33.6, 3.0)
    # patio
    m.obj("bench-1", "bench", 49.6, 10.0)
    m.obj("bench-2", "bench", 49.6, 20.0)
    m.obj("umbrella-1", "umbrella", 41.1, 8.5)
    m.obj("planter-1", "planter", 44.5, 21.1)
    m.confusion = {
        "chair": ["office chair", 0.05],
        "office chair": ["chair", 0.05],
        "dining table": ["coffee table", 0.05],
        "coffee table": ["dining table", 0.05],
    }
    m.set_start(17.0, 14.25, math.pi)
    oc, ct = [], []
    m.obj("office-chair-1", "office chair", 2.0, 28.6, into=oc)
    m.obj("coffee-table-1", "coffee table", 33.6, 26.0, into=ct)
    m.task("OC", "Go to the office chair", "office chair", "office-chair-1", oc)
    m.task("CT", "Go find the coffee table", "coffee table", "coffee-table-1", ct)
    return m


def school():
    m = Map("school", "an indoor school building", 39.0, 33.0)
    # corridor
    m.hwall(15.0, 0, 39, doors=[(10.0, 1.0), (16.0, 2.5), (25.0, 1.0), (34.5, 1.0)])
    m.hwall(18.0, 0, 39, doors=[(5.0, 1.0), (14.5, 1.0), (24.5, 1.0), (34.0, 1.0)])
    # north classrooms
    m.vwall(9.75, 18.0, 33)
    m.vwall(19.5, 18.0, 33)
    m.vwall(29.25, 18.0, 33)
    # south rooms
    m.vwall(12.0, 0, 15.0)
    m.vwall(20.0, 0, 15.0)
    m.vwall(30.0, 0, 15.0)
    m.room("classroom", 0.25, 18.25, 9.5, 32.75)
    m.room("classroom", 10.0, 18.25, 19.25, 32.75)
    m.room("classroom", 19.75, 18.25, 29.0, 32.75)
    m.room("classroom", 29.5, 18.25, 38.75, 32.75)
    m.room("library", 0.25, 0.25, 11.75, 14.75)
    m.room("lobby", 12.25, 0.25, 19.75, 14.75)
    m.room("classroom", 20.25, 0.25, 29.75, 14.75)
    m.room("restroom", 30.25, 0.25, 38.75, 14.75)
    m.room("hallway", 0.25, 15.25, 38.75, 17.75)
    # teacher desks (blocks) in the north classrooms
    for x0 in (3.0, 13.0, 23.0, 32.5):
        m.block(x0, 28.0, x0 + 2.0, 29.0)
    m.block(24.0, 8.0, 26.0, 9.0)
    # library stacks
    m.block(3.0, 3.0, 3.5, 9.0)
    m.block(6.0, 3.0, 6.5, 9.0)
    names = [(4.75, "1"), (14.5, "2"), (24.25, "3"), (34.0, "4")]
    for xc, n in names:
        m.obj(f"whiteboard-{n}", "whiteboard", xc, 32.6)
        m.obj(f"desk-{n}", "desk", xc - 0.5, 27.7)
        m.obj(f"chair-{n}", "chair", xc - 1.0, 29.2)
    m.obj("whiteboard-5", "whiteboard", 25.0, 0.4)
    m.obj("desk-5", "desk", 25.0, 7.7)
    m.obj("bookshelf-1", "bookshelf", 0.4, 7.0)
    m.obj("table-1", "table", 9.0, 0.4)
    m.obj("plant-1", "plant", 19.6, 0.4)
    m.obj("bench-1", "bench", 12.4, 8.0)
    m.obj("sink-1", "sink", 38.6, 5.0)
    m.obj("trash-can-1", "trash can", 30.4, 14.6)
    m.confusion = {
        "whiteboard": ["whiteboard eraser", 0.05],
        "whiteboard eraser": ["whiteboard", 0.05],
        "shelf": ["bookshelf", 0.05],
        "bookshelf": ["shelf", 0.05],
    }
    m.obj("shelf-1", "shelf", 29.6, 30.0)
    m.set_start(16.0, 3.0, math.pi / 2)
    we, bs = [], []
    m.obj("whiteboard-eraser-1", "whiteboard eraser", 35.0, 32.6, into=we)
    m.obj("bookshelf-2", "bookshelf", 3.75, 9.5, into=bs)
    m.task("WE", "Go find the whiteboard eraser", "whiteboard eraser", "whiteboard-eraser-1", we)
    m.task("BS", "Go find the bookshelf", "bookshelf", "bookshelf-2", bs)
    return m


def halfwall_fixture():
    m = Map("halfwall", "a small test room", 10.0, 10.0)
    m.hwall(5.0, 3.0, 7.0, half=True)
    m.room("office", 0.25, 0.25, 9.75, 9.75)
    m.set_start(5.0, 2.0, math.pi / 2)
    m.obj("office-chair-1", "office chair", 5.0, 9.6)
    m.task("OC", "Go to the office chair", "office chair", "office-chair-1")
    return m


def trivial_fixture():
    m = Map("trivial", "a small test room", 8.0, 8.0)
    m.room("office", 0.25, 0.25, 7.75, 7.75)
    m.set_start(4.0, 2.0, math.pi / 2)
    m.block(3.5, 5.25, 4.5, 5.5)
    m.obj("office-chair-1", "office chair", 4.0, 5.0)
    m.task("OC", "Go to the office chair", "office chair", "office-chair-1")
    return m


def main():
    envs = [office1(), office2(), school()]
    fixtures = [halfwall_fixture(), trivial_fixture()]
    for m, sub in [(e, "envs") for e in envs] + [(f, "fixtures") for f in fixtures]:
        path = os.path.join(OUT, sub, m.name + ".json")
        with open(path, "w") as fh:
            text = json.dumps(m.to_json(), indent=1)
            # keep numeric tuples (runs, rects) on one line
            text = re.sub(r"\[\s*(-?[\d.]+(?:,\s*-?[\d.]+)*)\s*\]",
                          lambda mt: "[" + ", ".join(x.strip() for x in mt.group(1).split(",")) + "]", text)
            fh.write(text + "\n")
        area = m.w * m.h * CELL * CELL
        print(f"{path}: {m.w}x{m.h} cells, {area:.1f} m^2", file=sys.stderr)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Generate the shipped Pacific 1941 scenario file.

The scenario is a historical reconstruction: the published record fixes
the region-to-raster assignments, the signal likelihood codings, the
costs, lead times and discount rate, the canonical target distributions,
and a handful of path-length and absorption anchors (nine-period minimum
transit to Oahu from raster 191, cumulative absorption windows). The full
crisis-network tables and the cell geometry are NOT published, so this
script derives them:

  * the network conditional tables are fitted algebraically so the
    network reproduces the canonical prior and posterior target columns
    exactly (the fit is verified by exact inference before writing);
  * the cell layout is curated: region clusters are placed on a jittered
    planar lattice, scaled so every recorded path-length and absorption
    anchor holds under the engine's own dynamics.

Running this script rewrites src/sentinel/data/pearl_harbor.json and
prints the anchor report. It is deterministic.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sentinel import bayesnet  # noqa: E402
from sentinel.filtering import advance_belief  # noqa: E402
from sentinel.scenario import load_scenario  # noqa: E402
from sentinel.session import compute_passages, compute_projection, compute_recommendation  # noqa: E402
from sentinel.statespace import hop_distances  # noqa: E402

OUT_PATH = Path(__file__).resolve().parent.parent / "src" / "sentinel" / "data" / "pearl_harbor.json"

TARGETS = ["OAHU", "KURILES", "MANILA_BAY", "THAILAND", "SINGAPORE_KRA", "BORNEO"]
OBJECTIVES = ["KURILES", "MANILA_BAY", "THAILAND", "SINGAPORE_KRA", "BORNEO"]

# Canonical columns (percent), historical-record order.
TARGET_PRIOR_PCT = {"OAHU": 6.2, "KURILES": 14.5, "MANILA_BAY": 55.3,
                    "THAILAND": 17.6, "SINGAPORE_KRA": 2.49, "BORNEO": 3.85}
TARGET_POST_PCT = {"OAHU": 9.51, "KURILES": 0.1, "MANILA_BAY": 85.5,
                   "THAILAND": 1.61, "SINGAPORE_KRA": 1.24, "BORNEO": 1.99}
OBJECTIVE_PRIOR = {"KURILES": 0.15, "MANILA_BAY": 0.15, "THAILAND": 0.30,
                   "SINGAPORE_KRA": 0.15, "BORNEO": 0.25}
OBJECTIVE_POST_PCT = {"KURILES": 0.069, "MANILA_BAY": 25.7, "THAILAND": 12.0,
                      "SINGAPORE_KRA": 23.3, "BORNEO": 38.9}

# Region cell ids (the published coding).
REGION_IDS = {
    "near_philippines": [90, 91, 92, 93, 94, 95, 158],
    "near_borneo": [2, 3, 22, 23, 27, 54, 55, 56, 94, 95],
    "near_kra": [17, 18, 52, 53, 56, 57, 86, 87, 88],
    "near_oahu": [204, 205, 206, 207, 208, 209, 229, 230, 233, 238, 258, 259, 260],
    "near_kuriles": [215, 216, 220, 240],
    "near_thailand": [85, 86, 87],
    "mandates": [7, 8, 9, 10, 11, 12, 28, 29, 30, 31, 32, 33, 34, 35, 36, 37, 38, 39,
                 64, 65, 66, 67, 68, 69, 70, 71, 72, 73, 74, 75, 96, 97, 98, 99, 100,
                 101, 102, 105, 106, 107, 128, 129, 135, 136, 137],
    "near_china": [122, 155, 156, 159],
    "home_waters": [186, 187, 188, 189, 190, 191],
}
TRAPPING = {
    "MANILA_BAY": REGION_IDS["near_philippines"],
    "BORNEO": REGION_IDS["near_borneo"],
    "SINGAPORE_KRA": REGION_IDS["near_kra"],
    "OAHU": REGION_IDS["near_oahu"],
    "KURILES": REGION_IDS["near_kuriles"],
    "THAILAND": REGION_IDS["near_thailand"],
}
BLOCKED = [85, 86]

SILENCE_P = {"near_philippines": 0.5, "near_borneo": 0.5, "near_kra": 0.5,
             "near_oahu": 0.5, "near_kuriles": 0.5, "near_thailand": 0.5,
             "mandates": 0.2, "near_china": 0.2, "home_waters": 0.8,
             "open_ocean": 0.8}

FAILURE_COSTS = {"OAHU": 1.0, "KURILES": 0.001, "MANILA_BAY": 0.1,
                 "THAILAND": 0.0001, "SINGAPORE_KRA": 0.01, "BORNEO": 0.01}
ALERT_COSTS = {"OAHU": 1e-5, "KURILES": 1e-7, "MANILA_BAY": 1e-5,
               "THAILAND": 1e-7, "SINGAPORE_KRA": 1e-6, "BORNEO": 1e-6}
LEAD_TIMES = {"OAHU": 4, "KURILES": 1, "MANILA_BAY": 4,
              "THAILAND": 1, "SINGAPORE_KRA": 14, "BORNEO": 14}

HOLDING = {"IMMEDIATE": 0.05, "DELAYED": 0.4}


def _norm(d_pct: dict[str, float]) -> dict[str, float]:
    total = sum(d_pct.values())
    return {k: v / total for k, v in d_pct.items()}


# --------------------------------------------------------------------------
# Crisis network fit
# --------------------------------------------------------------------------

def fit_crisis_network() -> tuple[dict, dict[str, float]]:
    """Fit the network CPTs so that the marginal and the both-observations
    posterior over the target reproduce the canonical columns exactly.

    Structure: two root observations feed the objective and the
    threat-perception variable; a deterministic priority variable routes
    southern objectives to MANILA_BAY and the northern one to OAHU when
    the threat is perceived; the target then forbids OAHU unless the
    action is unpredicted, and forbids everything else when it is.
    """
    t_prior = _norm(TARGET_PRIOR_PCT)
    t_post = _norm(TARGET_POST_PCT)
    obj_post = _norm(OBJECTIVE_POST_PCT)

    d_yes, f_yes = 0.3, 0.2  # P(diplomatic breakdown), P(task force report)
    p_yy = d_yes * f_yes
    u0, u1 = 0.02, 0.4  # P(unpredicted | threat NO / YES)
    w_mb, w_other = 0.25, 0.5  # P(target OAHU | priority, unpredicted YES)

    # Both-observations context: objective posterior; the KURILES floor
    # keeps the target column reachable (a coherent network cannot give the
    # KURILES target more mass than the KURILES objective, and the
    # published rounded columns would demand exactly that).
    pi_yy = {o: obj_post[o] for o in ("THAILAND", "SINGAPORE_KRA", "BORNEO")}
    pi_yy["KURILES"] = 0.0015
    pi_yy["MANILA_BAY"] = 1.0 - sum(pi_yy.values())

    pi_base = {o: (OBJECTIVE_PRIOR[o] - p_yy * pi_yy[o]) / (1 - p_yy) for o in OBJECTIVES}
    t_base = {k: (t_prior[k] - p_yy * t_post[k]) / (1 - p_yy) for k in TARGETS}

    def solve_context(pi: dict, tgt: dict) -> dict[str, float]:
        # Survivals pin threat probabilities for the non-MANILA objectives...
        a = {}
        for o in ("KURILES", "THAILAND", "SINGAPORE_KRA", "BORNEO"):
            s = tgt[o] / pi[o]
            a[o] = 1.0 - s / (1.0 - u0)
            if not (0.0 <= a[o] <= 1.0):
                raise SystemExit(f"infeasible threat probability for {o}: {a[o]}")
        # ...and the OAHU equation pins the MANILA_BAY one.
        south3 = sum(pi[o] * a[o] for o in ("THAILAND", "SINGAPORE_KRA", "BORNEO"))
        r4 = w_other * sum(pi[o] * (1 - a[o])
                           for o in ("KURILES", "THAILAND", "SINGAPORE_KRA", "BORNEO"))
        num = (tgt["OAHU"] - u1 * pi["KURILES"] * a["KURILES"] - u1 * w_mb * south3
               - u0 * r4 - u0 * w_mb * pi["MANILA_BAY"])
        den = pi["MANILA_BAY"] * w_mb * (u1 - u0)
        a["MANILA_BAY"] = num / den
        if not (0.0 <= a["MANILA_BAY"] <= 1.0):
            raise SystemExit(f"infeasible MANILA_BAY threat probability: {a['MANILA_BAY']}")
        return a

    a_yy = solve_context(pi_yy, t_post)
    a_base = solve_context(pi_base, t_base)

    def row(dist: dict, order: list[str]) -> list[float]:
        vals = [dist[k] for k in order[:-1]]
        return vals + [1.0 - sum(vals)]

    yes_no = ("YES", "NO")
    contexts = [("YES", "YES"), ("YES", "NO"), ("NO", "YES"), ("NO", "NO")]

    objective_rows = []
    threat_rows = []
    for ctx in contexts:
        pi = pi_yy if ctx == ("YES", "YES") else pi_base
        a = a_yy if ctx == ("YES", "YES") else a_base
        objective_rows.append({"given": list(ctx), "probs": row(pi, OBJECTIVES)})
        for o in OBJECTIVES:
            threat_rows.append({"given": [o, ctx[0], ctx[1]],
                                "probs": [a[o], 1.0 - a[o]]})

    priority_rows = []
    for threat in yes_no:
        for o in OBJECTIVES:
            if threat == "NO":
                dest = o
            else:
                dest = "OAHU" if o == "KURILES" else "MANILA_BAY"
            priority_rows.append({
                "given": [threat, o],
                "probs": [1.0 if k == dest else 0.0 for k in TARGETS],
            })

    target_rows = []
    for prio in TARGETS:
        # Unpredicted action: only the fleet bases are candidates.
        w = 1.0 if prio == "OAHU" else (w_mb if prio == "MANILA_BAY" else w_other)
        target_rows.append({
            "given": [prio, "YES"],
            "probs": [w if k == "OAHU" else (1.0 - w if k == "MANILA_BAY" else 0.0)
                      for k in TARGETS],
        })
        # Predicted action: OAHU is ruled out; an OAHU priority reverts to
        # the other fleet base.
        dest = "MANILA_BAY" if prio == "OAHU" else prio
        target_rows.append({
            "given": [prio, "NO"],
            "probs": [1.0 if k == dest else 0.0 for k in TARGETS],
        })

    network = {
        "variables": [
            {"name": "diplomatic_breakdown", "outcomes": ["YES", "NO"]},
            {"name": "task_force_formation", "outcomes": ["YES", "NO"]},
            {"name": "objective", "outcomes": OBJECTIVES},
            {"name": "perceives_threat", "outcomes": ["YES", "NO"]},
            {"name": "unpredicted_action", "outcomes": ["YES", "NO"]},
            {"name": "priority", "outcomes": TARGETS, "kind": "deterministic"},
            {"name": "target", "outcomes": TARGETS},
        ],
        "edges": [
            ["diplomatic_breakdown", "objective"],
            ["task_force_formation", "objective"],
            ["objective", "perceives_threat"],
            ["diplomatic_breakdown", "perceives_threat"],
            ["task_force_formation", "perceives_threat"],
            ["perceives_threat", "unpredicted_action"],
            ["perceives_threat", "priority"],
            ["objective", "priority"],
            ["priority", "target"],
            ["unpredicted_action", "target"],
        ],
        "tables": [
            {"child": "diplomatic_breakdown", "rows": [{"probs": [d_yes, 1 - d_yes]}]},
            {"child": "task_force_formation", "rows": [{"probs": [f_yes, 1 - f_yes]}]},
            {"child": "objective",
             "parents": ["diplomatic_breakdown", "task_force_formation"],
             "rows": objective_rows},
            {"child": "perceives_threat",
             "parents": ["objective", "diplomatic_breakdown", "task_force_formation"],
             "rows": threat_rows},
            {"child": "unpredicted_action", "parents": ["perceives_threat"],
             "rows": [{"given": ["YES"], "probs": [u1, 1 - u1]},
                      {"given": ["NO"], "probs": [u0, 1 - u0]}]},
            {"child": "priority", "parents": ["perceives_threat", "objective"],
             "rows": priority_rows},
            {"child": "target", "parents": ["priority", "unpredicted_action"],
             "rows": target_rows},
        ],
        "evidence": {"diplomatic_breakdown": "YES", "task_force_formation": "YES"},
        "query": "target",
    }

    # Verify the fit by exact inference before shipping it.
    variables = [bayesnet.DiscreteVariable(v["name"], tuple(v["outcomes"]),
                                           v.get("kind", "chance"))
                 for v in network["variables"]]
    tables = [bayesnet.ConditionalTable(t["child"], tuple(t.get("parents", ())),
                                        {tuple(r.get("given", ())): r["probs"]
                                         for r in t["rows"]})
              for t in network["tables"]]
    net = bayesnet.build_network(variables, [tuple(e) for e in network["edges"]], tables)
    marginal = bayesnet.posterior_query(net, ["target"]).single()
    posterior = bayesnet.posterior_query(
        net, ["target"], bayesnet.Evidence(network["evidence"])).single()
    for k in TARGETS:
        assert abs(marginal[k] - t_prior[k]) < 1e-9, (k, marginal[k], t_prior[k])
        assert abs(posterior[k] - t_post[k]) < 1e-9, (k, posterior[k], t_post[k])
    return network, t_post


# --------------------------------------------------------------------------
# Geometry
# --------------------------------------------------------------------------

HEX_DY = math.sqrt(3.0) / 2.0


def hex_points(x0, x1, y0, y1, px=1.0, py=None):
    """Offset grid with independent x/y pitch (py defaults to hex ratio)."""
    if py is None:
        py = HEX_DY * px
    pts = []
    row = 0
    y = y0
    while y <= y1 + 1e-9:
        x = x0 + (0.5 * px if row % 2 else 0.0)
        while x <= x1 + 1e-9:
            pts.append((x, y))
            x += px
        y += py
        row += 1
    return pts


def cluster(anchor, n, rng, spread=0.55):
    """n points hex-packed around an anchor with deterministic jitter."""
    ax, ay = anchor
    ring = [(0.0, 0.0)]
    k = 1
    while len(ring) < n:
        for i in range(6 * k):
            ang = 2 * math.pi * i / (6 * k)
            ring.append((k * spread * 1.4 * math.cos(ang),
                         k * spread * 1.4 * math.sin(ang)))
        k += 1
    pts = []
    for dx, dy in ring[:n]:
        jx, jy = rng.uniform(-0.08, 0.08, size=2)
        pts.append((ax + dx + jx, ay + dy + jy))
    return pts


def build_layout(params: dict) -> tuple[dict[int, tuple[float, float]], dict[int, str]]:
    """Place all 260 cells; returns id -> (x, y) and id -> region name.

    The sea room is terraced: vertical void bands split it into pools and
    traffic crosses between pools only at sparse gate cells. Eastward the
    gates are the nine-step express track through the Mandates patrol
    zone (the shortest path to the Oahu ring); a single clean lane skirts
    the zone to the north. Westward the first gate column is the China
    listening picket. Terracing keeps the shortest-path length low while
    transit times stay long and high-variance.
    """
    rng = np.random.default_rng(params["seed"])
    pos: dict[int, tuple[float, float]] = {}
    region: dict[int, str] = {}

    def place(ids, pts, name):
        for nid, q in zip(ids, pts):
            pos[nid] = q
            region[nid] = name

    x_oa = params["x_oahu"]
    px = params["pitch_x"]
    py = params["pitch_y"]
    stone = x_oa / 9.0

    # Home waters: raster 191 is the departure anchor at the origin.
    place([191, 190, 189, 188, 187, 186],
          [(0.0, 0.0), (-1.05, 0.35), (-0.5, 0.95), (-1.75, -0.35),
           (-0.95, -0.75), (-2.3, 0.55)], "home_waters")

    # China listening picket: the gate column through the first western band.
    gx = params["china_x"]
    place([122, 155, 156, 159],
          [(gx, -0.85), (gx, -1.75), (gx, -2.65), (gx, -3.55)], "near_china")

    # Manila Bay pool behind the second band; cell 158 is the strait gate.
    mb = params["manila_anchor"]
    strait_x = params["strait_x"]
    place([158], [(strait_x, -2.1)], "near_philippines")
    place([90, 91, 92, 93],
          [(mb[0], mb[1]), (mb[0] - 0.95, mb[1] - 0.35), (mb[0] - 0.35, mb[1] + 0.55),
           (mb[0] - 1.25, mb[1] + 0.45)], "near_philippines")
    place([94, 95], [(mb[0] - 0.4, mb[1] - 1.25), (mb[0] - 1.3, mb[1] - 1.05)],
          "near_philippines")  # shared edge toward Borneo

    # Borneo south of Manila; the south strait is its gate.
    bo = (mb[0] - 0.4, mb[1] - 2.6)
    place([2, 3, 22, 23, 27, 54, 55], cluster(bo, 7, rng, 0.5), "near_borneo")
    place([56], [(bo[0] - 1.55, bo[1] + 0.35)], "near_borneo")  # shared with Kra

    # Kra / Singapore far west-southwest.
    kr = (mb[0] - 2.6, mb[1] - 1.2)
    place([17, 18, 52, 53, 57, 88], cluster(kr, 6, rng, 0.5), "near_kra")

    # Thailand: two land cells (blocked) and the single sea approach 87.
    th = (kr[0] - 1.2, kr[1] + 1.25)
    place([87], [th], "near_thailand")
    place([85], [(th[0] - 0.85, th[1] + 0.6)], "near_thailand")
    place([86], [(th[0] - 0.6, th[1] - 0.7)], "near_thailand")

    # Kuriles north of home, flanking the western mouth of the northern lane.
    ku = params["kuriles_anchor"]
    place([215, 216, 220, 240],
          [(ku[0], ku[1]), (ku[0] + 1.1, ku[1] - 0.25),
           (ku[0] + 0.55, ku[1] + 0.8), (ku[0] + 2.2, ku[1] - 0.1)],
          "near_kuriles")

    # Oahu: a west-facing arc; the apex cell is the single sea approach.
    oahu_ids = [204, 205, 206, 207, 208, 209, 229, 230, 233, 238, 258, 259, 260]
    cx, cy = x_oa + 1.1, 0.0
    arc_pts = [(x_oa, 0.0)]
    for ang in np.linspace(128, 232, 6):
        a = math.radians(ang)
        arc_pts.append((cx + 1.2 * math.cos(a), cy + 1.2 * math.sin(a)))
    for ang in np.linspace(108, 252, 6):
        a = math.radians(ang)
        arc_pts.append((cx + 2.3 * math.cos(a), cy + 2.3 * math.sin(a)))
    place(oahu_ids, arc_pts, "near_oahu")

    # Express track: the only gates through the eastern bands. The track
    # runs the patrolled line, so every stone carries the mandates class.
    express_ids = list(params["express_ids"])
    assert len(express_ids) == 8
    place(express_ids, [(stone * (i + 1), 0.0) for i in range(8)], "mandates")

    # Corridor pools: one mid-column between consecutive stones, a dense
    # stack of lateral cells whose only eastward exits are the stones.
    # Columns inside the patrol zone carry the mandates class.
    w0, w1 = params["wall_x0"], params["wall_x1"]
    mid_cols = [stone * k + params["col_offset"] for k in range(9)]
    wall_pool_pts = []
    ocean_structures: list[tuple[float, float]] = []
    col_ys = params["col_ys"]
    for k, mx in enumerate(mid_cols):
        shift = params["col_stagger"] if k % 2 else 0.0
        col_y = [round(yy + shift, 4) for yy in col_ys]
        for yy in col_y:
            if w0 <= mx <= w1:
                wall_pool_pts.append((mx, yy))
            else:
                ocean_structures.append((mx, yy))
    wall_ids = [i for i in REGION_IDS["mandates"] if i not in express_ids]
    if len(wall_pool_pts) > len(wall_ids) - 8:
        raise SystemExit(f"zone columns need {len(wall_pool_pts)} mandates ids, "
                         f"only {len(wall_ids)} available")
    place(wall_ids[: len(wall_pool_pts)], wall_pool_pts, "mandates")
    south_ids = wall_ids[len(wall_pool_pts):]

    # Rest of the Mandates belt southeast of the corridor.
    grid = hex_points(1.2, 8.4, -4.35, -3.3, px, py)
    place(south_ids, grid[: len(south_ids)], "mandates")

    # Northern lane: the clean detour skirting the patrol zone.
    lane_y = params["lane_y"]
    lane_pts = hex_points(0.9, x_oa + 1.2, lane_y, lane_y + 0.01, params["lane_pitch"])
    used = set(pos)
    remaining = [i for i in range(1, 261) if i not in used]
    lane_ids = remaining[: len(lane_pts)]
    place(lane_ids, lane_pts, "open_ocean")
    for q in ocean_structures:
        remaining = [i for i in range(1, 261) if i not in pos]
        place(remaining[:1], [q], "open_ocean")

    # Open-ocean fill for the rest of the board.
    used = set(pos)
    remaining = [i for i in range(1, 261) if i not in used]
    gx2 = params["strait_x"]
    bh = params["band_half"]
    boxes = [
        (0.8, x_oa + 0.9, -2.2, lane_y - 0.7),                # corridor block
        (gx - bh, gx + bh, -4.3, -0.35),                      # China band
        (gx2 - bh, gx2 + bh, -5.4, -0.5),                     # second band
    ]

    def excluded(q):
        return any(bx0 <= q[0] <= bx1 and by0 <= q[1] <= by1
                   for bx0, bx1, by0, by1 in boxes)

    ocean = []
    ocean += hex_points(-11.6, -2.6, -3.8, 3.4, px, py)      # western sea room
    ocean += hex_points(-2.4, 0.8, 0.8, 3.3, px, py)         # north of home
    ocean += hex_points(0.9, x_oa + 2.6, lane_y + 0.85, lane_y + 2.3, px, py)
    ocean += hex_points(x_oa + 0.2, x_oa + 2.8, -1.9, 1.9, px, py)  # behind Oahu
    ocean += hex_points(0.9, 10.4, -6.6, -4.9, px, py)       # south sea room
    ocean += hex_points(8.8, x_oa + 2.6, -4.4, -2.2, px, py) # southeast of corridor
    ocean += hex_points(-11.6, -4.6, -6.4, -3.9, px, py)     # far southwest
    taken = list(pos.values())
    chosen = []
    for q in ocean:
        if excluded(q):
            continue
        jq = (q[0] + rng.uniform(-0.05, 0.05), q[1] + rng.uniform(-0.05, 0.05))
        if all(math.hypot(jq[0] - t[0], jq[1] - t[1]) > 0.55 for t in taken):
            taken.append(jq)
            chosen.append(jq)
    if len(chosen) < len(remaining):
        raise SystemExit(f"not enough ocean points: {len(chosen)} < {len(remaining)}")
    # Keep the innermost points: drop the far periphery first.
    cxm = np.mean([q[0] for q in chosen])
    cym = np.mean([q[1] for q in chosen])
    chosen.sort(key=lambda q: math.hypot(0.6 * (q[0] - cxm), q[1] - cym))
    final = sorted(chosen[: len(remaining)],
                   key=lambda q: (round(q[1], 3), round(q[0], 3)))
    place(remaining, final, "open_ocean")

    assert len(pos) == 260, len(pos)
    return pos, region


def build_graph(pos: dict, radius: float) -> dict:
    ids = sorted(pos)
    adjacency = []
    for i, a in enumerate(ids):
        ax, ay = pos[a]
        for b in ids[i + 1:]:
            bx, by = pos[b]
            if (ax - bx) ** 2 + (ay - by) ** 2 <= radius ** 2:
                adjacency.append([a, b])
    return {"nodes": ids, "adjacency": adjacency, "blocked": BLOCKED}


# --------------------------------------------------------------------------
# Scenario assembly + evaluation
# --------------------------------------------------------------------------

def assemble(params: dict, network: dict, canonical: dict) -> dict:
    pos, region = build_layout(params)
    graph = build_graph(pos, params["radius"])
    graph["labels"] = {
        str(nid): {"x": round(pos[nid][0], 4), "y": round(pos[nid][1], 4),
                   "region": region[nid]}
        for nid in sorted(pos)
    }

    classes = {}
    for nid in sorted(region):
        classes.setdefault(region[nid], []).append(nid)
    classes.pop("open_ocean")

    realizations = []
    idx = 0
    for target in TARGETS:
        for immediacy in ("IMMEDIATE", "DELAYED"):
            realizations.append({
                "index": idx, "target": target, "immediacy": immediacy,
                "holding_probability": HOLDING[immediacy],
            })
            idx += 1

    silence_rows = [
        {"class": cls, "probs": [p, 1.0 - p]}
        for cls, p in sorted(SILENCE_P.items())
    ]
    silence_rows.append({
        "credibility": {"COM14": "NON_FUNCTIONAL", "COM16": "NON_FUNCTIONAL"},
        "probs": [0.5, 0.5],
    })

    bearing_p = {"near_oahu": 0.8, "near_kuriles": 0.8, "open_ocean": 0.5,
                 "home_waters": 0.3, "mandates": 0.1, "near_china": 0.1,
                 "near_philippines": 0.1, "near_borneo": 0.1, "near_kra": 0.1,
                 "near_thailand": 0.1}
    bearing_rows = [
        {"class": cls, "probs": [p, 1.0 - p]} for cls, p in sorted(bearing_p.items())
    ]
    bearing_rows.append({
        "credibility": {"COM16": "NON_FUNCTIONAL"}, "probs": [0.5, 0.5],
    })

    document = {
        "schema_version": "1.0",
        "metadata": {
            "name": "pacific-1941",
            "description": "Pacific carrier-threat warning picture, late November 1941. "
                           "Geometry and crisis-network tables are a documented "
                           "reconstruction fitted to the published anchors.",
            "period_hours": 12,
            "start_label": "1941-11-26-evening",
            "reconstruction_notes": [
                "Region-to-cell assignments, signal codings, costs, lead times and "
                "the canonical target columns follow the historical record.",
                "Crisis-network tables are demonstrative: fitted so exact inference "
                "reproduces the canonical prior and posterior target columns.",
                "Cell layout is curated so the engine reproduces the recorded "
                "path-length and cumulative-absorption anchors (e.g. nine periods "
                "minimum transit from cell 191 to the Oahu region).",
            ],
        },
        "crisis_network": network,
        "canonical_target_distribution": canonical,
        "graph": graph,
        "trapping_sets": {t: sorted(set(v)) for t, v in TRAPPING.items()},
        "realizations": realizations,
        "immediacy_split": {"IMMEDIATE": 0.5, "DELAYED": 0.5},
        "sources": [
            {"id": "COM14", "outcomes": ["FUNCTIONAL", "NON_FUNCTIONAL"], "priors": [0.7, 0.3]},
            {"id": "COM16", "outcomes": ["FUNCTIONAL", "NON_FUNCTIONAL"], "priors": [0.9, 0.1]},
        ],
        "signals": [
            {"type": "RADIO_STATUS", "values": ["SILENCE", "INTERCEPT"],
             "classes": classes, "default_class": "open_ocean",
             "likelihoods": silence_rows, "sources": ["COM14", "COM16"]},
            {"type": "DF_BEARING_NORTH", "values": ["POSITIVE", "NEGATIVE"],
             "classes": classes, "default_class": "open_ocean",
             "likelihoods": bearing_rows, "sources": ["COM16"]},
        ],
        "initial_state": {"point_mass": 191, "period": 0},
        "cost_model": {
            "failure_costs": FAILURE_COSTS,
            "alert_costs": ALERT_COSTS,
            "lead_times": [{"alert": t, "target": t, "periods": p}
                           for t, p in LEAD_TIMES.items()],
            "daily_discount_rate": 0.015,
            "periods_per_day": 2,
            "horizon": 40,
            "disutility": "LINEAR",
        },
        "projection_horizon": 60,
        "observation_script": [
            {"period": p, "signal_type": "RADIO_STATUS", "value": "SILENCE",
             "sources": ["COM14", "COM16"]}
            for p in range(1, 21)
        ],
    }
    return document


def evaluate(document: dict, quick: bool = False, diag: bool = False) -> dict:
    """Run the anchor checks; returns measured values keyed by anchor."""
    spec = load_scenario(document)
    report: dict = {"warnings": list(spec.warnings)}

    dist_oa = hop_distances(spec.graph, frozenset(spec.trapping_sets["OAHU"]))
    report["hops_191_oahu"] = int(dist_oa[spec.graph.index_of(191)])
    for label in TARGETS:
        d = hop_distances(spec.graph, frozenset(spec.trapping_sets[label]))
        report[f"hops_191_{label}"] = int(d[spec.graph.index_of(191)])
    report["mean_degree"] = round(spec.graph.degree_stats()[0], 2)

    belief0 = spec.initial_belief()
    passages0 = compute_passages(belief0, spec, 60)
    by_key = {r.key: r.index for r in spec.realizations}
    oa_imm = passages0[by_key["OAHU|IMMEDIATE"]]
    oa_del = passages0[by_key["OAHU|DELAYED"]]
    report["oahu_imm_cum30"] = round(oa_imm.cumulative_at(30), 4)
    report["oahu_del_cum30"] = round(oa_del.cumulative_at(30), 4)
    report["oahu_imm_first_nonzero"] = int(
        next((t for t in oa_imm.periods() if oa_imm.prob_at(int(t)) > 0), -1))

    _, attack0 = compute_projection(belief0, spec, 60)
    report["manila_marginal_cum30"] = round(attack0.cumulative_at("MANILA_BAY", 30), 4)
    report["manila_marginal_cum60"] = round(attack0.cumulative_at("MANILA_BAY", 60), 4)
    report["thailand_marginal_cum30"] = round(attack0.cumulative_at("THAILAND", 30), 4)
    if quick:
        return report

    # Scripted replay measurements.
    belief = belief0
    first_issue = None
    first_oahu_issue = None
    i_star = []
    series = {k: [] for k in ("OAHU|IMMEDIATE", "OAHU|DELAYED", "MANILA_BAY|IMMEDIATE",
                              "MANILA_BAY|DELAYED")}
    p_mb, p_oa = [], []
    manila_2day = []
    oahu_7day_at_19 = None
    for obs in spec.observation_script:
        belief = advance_belief(belief, spec.transition_models, spec.signal_models, obs)
        post = belief.realization_posterior()
        for key in series:
            series[key].append(post[by_key[key]])
        tpost = belief.target_posterior()
        p_mb.append(tpost["MANILA_BAY"])
        p_oa.append(tpost["OAHU"])
        t = belief.period
        _, attack = compute_projection(belief, spec, t + 16)
        manila_2day.append(attack.window_mass("MANILA_BAY", t + 1, t + 4))
        if t == 19:
            _, attack7 = compute_projection(belief, spec, t + 15)
            oahu_7day_at_19 = attack7.window_mass("OAHU", t + 1, t + 14)
        rec = compute_recommendation(belief, spec, spec.cost_model)
        i_star.append(rec.alert_type)
        if rec.issue_now and first_issue is None:
            first_issue = (t, rec.alert_type)
        if rec.issue_now and rec.alert_type == "OAHU" and first_oahu_issue is None:
            first_oahu_issue = t
        if diag:
            oa_win = attack.window_mass("OAHU", t + 1, t + 4)
            tau, val = rec.optimum["OAHU"]
            print(f"   t={t:2d} oa_win4={oa_win:9.3e} tau*_OA={tau:2d} "
                  f"CE_OA(t)={rec.surface['OAHU'][0]:9.3e} CE_OA(tau*)={val:9.3e} "
                  f"P(OA)={p_oa[-1] if p_oa else 0:.4f} rec={rec.alert_type}"
                  f"{'*' if rec.issue_now else ''}")

    p_oa_imm = series["OAHU|IMMEDIATE"]
    p_mb_del = series["MANILA_BAY|DELAYED"]
    report["first_issue"] = first_issue
    report["first_oahu_issue"] = first_oahu_issue
    report["i_star_by_period"] = i_star
    report["oahu_imm_nondecreasing"] = bool(
        all(b >= a - 1e-12 for a, b in zip(p_oa_imm, p_oa_imm[1:])))
    report["oahu_imm_strict"] = bool(
        all(b > a for a, b in zip(p_oa_imm, p_oa_imm[1:])))
    report["manila_del_nondecreasing"] = bool(
        all(b >= a - 1e-12 for a, b in zip(p_mb_del, p_mb_del[1:])))
    report["manila_gt_oahu_all"] = bool(all(m > o for m, o in zip(p_mb, p_oa)))
    report["manila_2day_peak_period"] = int(np.argmax(manila_2day) + 1)
    report["manila_2day_monotone_after_1"] = bool(
        all(b <= a + 1e-12 for a, b in zip(manila_2day, manila_2day[1:])))
    report["manila_2day_series"] = [round(x, 5) for x in manila_2day]
    report["oahu_7day_at_19"] = round(oahu_7day_at_19, 5)
    report["p_oa_imm_series"] = [round(x, 5) for x in p_oa_imm]
    report["p_mb_del_series"] = [round(x, 5) for x in p_mb_del]
    report["p_oa_del_series"] = [round(x, 5) for x in series["OAHU|DELAYED"]]
    report["p_mb_imm_series"] = [round(x, 5) for x in series["MANILA_BAY|IMMEDIATE"]]
    return report


def passes(report: dict) -> list[str]:
    problems = []
    if report["hops_191_oahu"] != 9:
        problems.append(f"hops 191->OAHU = {report['hops_191_oahu']} != 9")
    if not (0.47 <= report["oahu_imm_cum30"] <= 0.67):
        problems.append(f"OAHU imm cum30 {report['oahu_imm_cum30']} not in [0.47,0.67]")
    if not (0.01 <= report["oahu_del_cum30"] <= 0.08):
        problems.append(f"OAHU del cum30 {report['oahu_del_cum30']} not in [0.01,0.08]")
    if report["oahu_imm_first_nonzero"] != 9:
        problems.append(f"first nonzero OAHU arrival {report['oahu_imm_first_nonzero']} != 9")
    if not (0.63 <= report["manila_marginal_cum30"] <= 0.78):
        problems.append(f"MB cum30 {report['manila_marginal_cum30']} not in [0.63,0.78]")
    if not (0.78 <= report["manila_marginal_cum60"] <= 0.90):
        problems.append(f"MB cum60 {report['manila_marginal_cum60']} not in [0.78,0.90]")
    if report["thailand_marginal_cum30"] > 0.03:
        problems.append(f"TH cum30 {report['thailand_marginal_cum30']} > 0.03")
    if report["first_oahu_issue"] is None or not (11 <= report["first_oahu_issue"] <= 15):
        problems.append(f"first OAHU issue at {report['first_oahu_issue']} not in [11,15]")
    if report["first_issue"] and report["first_issue"][1] != "OAHU":
        problems.append(f"first issue overall is {report['first_issue']}")
    after = report["first_oahu_issue"]
    if after is not None:
        tail = report["i_star_by_period"][after - 1:]
        if any(t != "OAHU" for t in tail):
            problems.append(f"i* drifts from OAHU after issue: {tail}")
    if not report["oahu_imm_strict"]:
        problems.append("P(OAHU,IMM) not strictly increasing")
    if not report["manila_del_nondecreasing"]:
        problems.append("P(MB,DEL) not nondecreasing")
    if not report["manila_gt_oahu_all"]:
        problems.append("P(MB) <= P(OAHU) somewhere")
    if report["manila_2day_peak_period"] != 1:
        problems.append(f"MB 2-day peak at {report['manila_2day_peak_period']} != 1")
    if not report["manila_2day_monotone_after_1"]:
        problems.append("MB 2-day not monotone declining")
    if not (0.015 <= report["oahu_7day_at_19"] <= 0.04):
        problems.append(f"OAHU 7-day at 19 = {report['oahu_7day_at_19']} not in [0.015,0.04]")
    return problems


DEFAULT_PARAMS = {
    "seed": 19411126,
    "radius": 1.45,
    "x_oahu": 12.96,
    "pitch_x": 1.0,
    "pitch_y": 0.72,
    "lane_pitch": 1.25,
    "band_half": 0.74,
    "china_x": -1.45,
    "strait_x": -3.05,
    "manila_anchor": (-4.1, -2.6),
    "kuriles_anchor": (1.5, 2.7),
    "express_ids": [128, 129, 135, 136, 137, 105, 106, 107],
    "col_ys": (-1.24, -0.89, -0.54, 0.54, 0.89, 1.24),
    "col_offset": 0.72,
    "col_stagger": 0.18,
    "wall_x0": 2.5,
    "wall_x1": 7.6,
    "lane_y": 2.7,
}


def main():
    import argparse

    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--report-only", action="store_true",
                        help="evaluate current parameters without writing")
    parser.add_argument("--quick", action="store_true",
                        help="geometry anchors only (skip the replay)")
    parser.add_argument("--diag", action="store_true",
                        help="per-period alert diagnostics")
    parser.add_argument("--set", action="append", default=[],
                        help="override a parameter, e.g. --set radius=1.3")
    args = parser.parse_args()

    params = dict(DEFAULT_PARAMS)
    for item in args.set:
        key, value = item.split("=", 1)
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
        if isinstance(params[key], list):
            params[key] = tuple(params[key])

    network, canonical = fit_crisis_network()
    print("crisis network fitted and verified against canonical columns")
    document = assemble(params, network, canonical)
    report = evaluate(document, quick=args.quick, diag=args.diag)
    if args.quick:
        for k, v in report.items():
            print(f"  {k}: {v}")
        return 0
    problems = passes(report)
    for key in ["hops_191_oahu", "hops_191_MANILA_BAY", "hops_191_KURILES",
                "hops_191_THAILAND", "hops_191_SINGAPORE_KRA", "hops_191_BORNEO",
                "mean_degree", "oahu_imm_cum30", "oahu_del_cum30",
                "manila_marginal_cum30", "manila_marginal_cum60",
                "thailand_marginal_cum30", "first_issue", "first_oahu_issue",
                "oahu_7day_at_19", "manila_2day_peak_period",
                "manila_2day_monotone_after_1", "oahu_imm_strict",
                "manila_del_nondecreasing", "manila_gt_oahu_all"]:
        print(f"  {key}: {report[key]}")
    print("  manila_2day:", report["manila_2day_series"])
    print("  p_oa_imm:", report["p_oa_imm_series"])
    print("  i*:", report["i_star_by_period"])
    if problems:
        print("PROBLEMS:")
        for p in problems:
            print("  -", p)
    else:
        print("all anchors satisfied")
    if not args.report_only and not problems:
        OUT_PATH.parent.mkdir(parents=True, exist_ok=True)
        OUT_PATH.write_text(json.dumps(document, indent=1, sort_keys=True) + "\n",
                            encoding="utf-8")
        print(f"wrote {OUT_PATH}")
    return 0 if not problems else 1


if __name__ == "__main__":
    sys.exit(main())

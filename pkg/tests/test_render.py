import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from robustplan.bench import AgentSpec, episode_hulls, run_episode
from robustplan.config import parse_config
from robustplan.highway import Road
from robustplan.predictor import HullTrace, predict_hulls
from robustplan.render import render_trace

from scenarios import degenerate_ambiguity

GOLDEN = Path(__file__).parent / "golden" / "trace_irc_seed0.svg"
NS = "{http://www.w3.org/2000/svg}"
GOLDEN_CONFIG = {
    "vehicles": [
        {"x": 30.0, "lane": 0, "speed": 20.0, "route_options": [1]},
        {"x": 60.0, "lane": 2, "speed": 22.0, "route_options": [2]},
    ],
    "road": {"branch_x": 70.0},
    "ambiguity": {"mode": "continuous", "kp_psi_scale": [0.7, 1.3], "kp_y_scale": [0.7, 1.3]},
    "irc": {"horizon": 3},
    "bench": {"max_epochs": 4},
}


def golden_document() -> str:
    cfg = parse_config(GOLDEN_CONFIG)
    record = []
    run_episode(AgentSpec.parse("irc", cfg), cfg, 0, record)
    worlds = [w for w, _ in record]
    hulls = episode_hulls(cfg, 0, [a for _, a in record[1:]], 4)
    return render_trace(worlds[0].road, worlds, hulls)


def elements(svg, cls):
    root = ET.fromstring(svg.encode())
    return [e for e in root.iter() if e.get("class") == cls]


def test_empty_trace_draws_the_road():
    svg = render_trace(Road(n_lanes=3, branch_x=50.0))
    root = ET.fromstring(svg.encode())
    assert root.tag == NS + "svg"
    assert len(elements(svg, "lane")) == 4
    assert len(elements(svg, "branch")) == 1
    assert not elements(svg, "vehicle") and not elements(svg, "hull")


def test_zero_width_hulls_degenerate_to_curves():
    _, amb = degenerate_ambiguity(0)
    trace = predict_hulls(amb, [0, 0, 0])
    trace = HullTrace(trace.lo, trace.lo.copy(), trace.crash_possible, trace.actions)
    svg = render_trace(amb.context.world.road, [amb.context.world], trace)
    for poly in elements(svg, "hull"):
        pts = poly.get("points").split()
        n = len(pts) // 2
        assert pts[:n] == pts[n:][::-1]
    assert all(float(r.get("width")) == 0.0 and float(r.get("height")) == 0.0
               for r in elements(svg, "hull-box"))


def test_counts_match_the_trace():
    _, amb = degenerate_ambiguity(1)
    trace = predict_hulls(amb, [0, 3])
    worlds = [amb.context.world] * 3
    svg = render_trace(amb.context.world.road, worlds, trace)
    n = amb.context.world.n_vehicles
    assert len(elements(svg, "vehicle")) == 3 * n
    assert len(elements(svg, "hull")) == n
    assert len(elements(svg, "hull-box")) == 3 * n


def test_deterministic():
    assert golden_document() == golden_document()


def test_matches_golden_file():
    assert golden_document() == GOLDEN.read_text()


def test_no_negative_zero():
    road = Road()
    trace = HullTrace(np.full((1, 1, 4), -1e-9), np.full((1, 1, 4), -1e-9), np.zeros(1, dtype=bool), ())
    assert "-0.00" not in render_trace(road, (), trace)

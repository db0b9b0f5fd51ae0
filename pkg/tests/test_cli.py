import json
import math

import numpy as np
import pytest

from openarea.cli import main
from openarea.costs import load_cost_config

from scenes import square_scene


@pytest.fixture
def scene_file(tmp_path):
    doc = square_scene(obstacles=[("b", [(4, 4), (6, 4), (6, 6), (4, 6)])])
    p = tmp_path / "scene.geojson"
    p.write_text(json.dumps(doc))
    return p


@pytest.fixture
def plain_scene_file(tmp_path):
    p = tmp_path / "plain.geojson"
    p.write_text(json.dumps(square_scene()))
    return p


def write_training_csv(path, n=120, seed=0):
    rng = np.random.default_rng(seed)
    hdr = ("length_m,max_slope,min_width,surface,weather,hour_of_day,"
           "day_of_week,journey_length,daily_total_length,age,gender,score")
    lines = [hdr]
    for _ in range(n):
        slope = rng.uniform(0, 10)
        surf = rng.uniform(0, 1)
        vals = [rng.uniform(5, 50), slope, rng.uniform(0.8, 3), surf,
                rng.uniform(0, 1), rng.integers(6, 22), rng.integers(0, 7),
                rng.uniform(100, 1000), rng.uniform(500, 5000),
                rng.integers(18, 70), rng.integers(0, 2)]
        score = min(5.0, max(0.0, 5 - 0.3 * slope - 1.5 * (1 - surf)))
        lines.append(",".join(f"{v:.4f}" if isinstance(v, float) else str(v) for v in vals)
                     + f",{score:.3f}")
    path.write_text("\n".join(lines) + "\n")


class TestRouteCommand:
    def test_straight_route_file(self, plain_scene_file, tmp_path, capsys):
        out = tmp_path / "route.geojson"
        code = main(["route", str(plain_scene_file), "--from", "1,1", "--to", "9,9",
                     "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        coords = doc["features"][0]["geometry"]["coordinates"]
        assert coords == [[1.0, 1.0], [9.0, 9.0]]
        assert "cost=" in capsys.readouterr().out

    def test_detour_with_hier_iterations(self, scene_file, tmp_path, capsys):
        code = main(["route", str(scene_file), "--from", "1,5", "--to", "9,5",
                     "--algorithm", "hier", "--out", str(tmp_path / "r.geojson")])
        assert code == 0
        out = capsys.readouterr().out
        assert "iterations=2" in out
        doc = json.loads((tmp_path / "r.geojson").read_text())
        assert doc["features"][0]["properties"]["iterations"] == 2
        assert doc["features"][0]["properties"]["total_cost"] == pytest.approx(
            2 * math.sqrt(10) + 2)

    def test_outside_destination_no_gates_exit_3(self, plain_scene_file, capsys):
        code = main(["route", str(plain_scene_file), "--from", "5,5", "--to", "50,5"])
        assert code == 3

    def test_validation_error_exit_2(self, plain_scene_file):
        code = main(["route", str(plain_scene_file), "--from", "5,5", "--to", "5,5"])
        assert code == 2

    def test_json_errors_machine_readable(self, plain_scene_file, capsys):
        code = main(["--json-errors", "route", str(plain_scene_file),
                     "--from", "5,5", "--to", "5,5"])
        assert code == 2
        err = capsys.readouterr().err
        payload = json.loads(err)
        assert payload["error"] == "ValidationError"

    def test_missing_scene_exit_2(self):
        assert main(["route", "nope.geojson", "--from", "0,0", "--to", "1,1"]) == 2

    def test_route_output_reloads(self, scene_file, tmp_path):
        out = tmp_path / "r.geojson"
        main(["route", str(scene_file), "--from", "1,5", "--to", "9,5",
              "--out", str(out)])
        doc = json.loads(out.read_text())
        assert doc["type"] == "FeatureCollection"
        coords = doc["features"][0]["geometry"]["coordinates"]
        assert coords[0] == [1.0, 5.0] and coords[-1] == [9.0, 5.0]


class TestGraphCommand:
    def test_graph_export_parses_back(self, scene_file, tmp_path, capsys):
        out = tmp_path / "g.geojson"
        code = main(["graph", str(scene_file), "--from", "1,5", "--to", "9,5",
                     "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        nodes = [f for f in doc["features"] if f["properties"]["role"] == "node"]
        links = [f for f in doc["features"] if f["properties"]["role"] == "link"]
        assert len(nodes) == 10
        assert len(links) > 0


class TestBenchCommand:
    def test_no_obstacle_hier_nodes_always_two(self, plain_scene_file, tmp_path):
        out = tmp_path / "bench.json"
        code = main(["bench", str(plain_scene_file), "--trials", "5", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        hier_rows = [r for r in doc["rows"] if r["algorithm"] == "hier"]
        assert len(hier_rows) == 5
        assert all(r["nodes"] == 2 for r in hier_rows)
        assert all("ms" not in r for r in doc["rows"])  # deterministic default

    def test_five_obstacles_mean_hier_below_full(self, tmp_path):
        obstacles = [(f"o{i}", [(x, y), (x + 1.2, y), (x + 1.2, y + 1.2), (x, y + 1.2)])
                     for i, (x, y) in enumerate([(1.5, 1.5), (4.5, 1.5), (7, 2),
                                                 (2, 6.5), (6.5, 6.5)])]
        p = tmp_path / "five.geojson"
        p.write_text(json.dumps(square_scene(obstacles=obstacles)))
        out = tmp_path / "bench.json"
        code = main(["bench", str(p), "--trials", "8", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["summary"]["mean_hier_nodes"] < doc["summary"]["mean_full_nodes"]

    def test_seeded_runs_byte_identical(self, scene_file, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["--seed", "7", "bench", str(scene_file), "--trials", "4", "--out", str(a)])
        main(["--seed", "7", "bench", str(scene_file), "--trials", "4", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestCompareCommand:
    def make_files(self, tmp_path):
        actual = tmp_path / "actual.csv"
        rows = ["t,x,y"] + [f"{2 * i},{x:.4f},{0.1 * math.sin(x):.4f}"
                            for i, x in enumerate(np.linspace(0, 10, 25))]
        actual.write_text("\n".join(rows) + "\n")
        direct = tmp_path / "direct.csv"
        direct.write_text("t,x,y\n0,0,0\n2,5,0\n4,10,0\n")
        wall = tmp_path / "wall.csv"
        wall.write_text("t,x,y\n0,0,0\n2,0,6\n4,10,6\n6,10,0\n")
        return actual, direct, wall

    def test_report_written(self, tmp_path, capsys):
        actual, direct, wall = self.make_files(tmp_path)
        out = tmp_path / "cmp.json"
        code = main(["compare", str(actual), "--routes", str(direct), str(wall),
                     "--baseline", "wall", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["baseline"] == "wall"
        assert doc["candidates"]["wall"]["closer_than_baseline_pct"]["dhaus"] == 0.0
        assert doc["candidates"]["direct"]["dhaus_m"] < doc["candidates"]["wall"]["dhaus_m"]

    def test_endpoints_not_shared_exit_2(self, tmp_path):
        actual, direct, _ = self.make_files(tmp_path)
        far = tmp_path / "far.csv"
        far.write_text("t,x,y\n0,100,100\n2,110,100\n")
        code = main(["compare", str(actual), "--routes", str(direct), str(far),
                     "--baseline", "far"])
        assert code == 2

    def test_wgs84_trajectories(self, tmp_path):
        # ~100 m straight east at the equator; degrees scaled accordingly
        deg = 100.0 / 111_194.9
        actual = tmp_path / "geo.csv"
        rows = ["t,x,y"] + [f"{2 * i},{x * deg:.9f},0.0" for i, x in enumerate(np.linspace(0, 1, 10))]
        actual.write_text("\n".join(rows) + "\n")
        cand = tmp_path / "cand.csv"
        cand.write_text(f"t,x,y\n0,0,0\n2,{deg:.9f},0\n")
        out = tmp_path / "cmp.json"
        code = main(["--crs", "wgs84", "compare", str(actual), "--routes", str(cand),
                     "--baseline", "cand", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["candidates"]["cand"]["cpd_m"] == pytest.approx(0.0, abs=1e-6)

    def test_geojson_candidate(self, tmp_path):
        actual, direct, wall = self.make_files(tmp_path)
        route_doc = {"type": "FeatureCollection", "features": [{
            "type": "Feature", "properties": {"role": "route"},
            "geometry": {"type": "LineString",
                         "coordinates": [[0, 0], [5, 0.2], [10, 0]]}}]}
        gj = tmp_path / "mine.geojson"
        gj.write_text(json.dumps(route_doc))
        out = tmp_path / "cmp.json"
        code = main(["compare", str(actual), "--routes", str(gj), str(wall),
                     "--baseline", "wall", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert "mine" in doc["candidates"]


class TestFitCommand:
    def test_fit_all_models_and_table(self, tmp_path, capsys):
        train = tmp_path / "train.csv"
        write_training_csv(train)
        out = tmp_path / "fit.json"
        code = main(["fit", str(train), "--model", "all", "--folds", "5",
                     "--out", str(out)])
        assert code == 0
        table = capsys.readouterr().out
        assert "not implemented" in table
        assert "LASSO" in table and "Ridge Regression" in table
        doc = json.loads(out.read_text())
        assert set(doc["models"]) == {"ols", "ridge", "lasso"}
        for entry in doc["models"].values():
            assert "train_ms" not in entry  # deterministic by default

    def test_emit_cost_config_round_trips(self, tmp_path, capsys):
        train = tmp_path / "train.csv"
        write_training_csv(train)
        cfg = tmp_path / "cost.json"
        code = main(["fit", str(train), "--model", "lasso", "--lam", "0.01",
                     "--folds", "4", "--emit-cost-config", str(cfg),
                     "--out", str(tmp_path / "fit.json")])
        assert code == 0
        model = load_cost_config(cfg)
        assert sum(model.coefficients.as_tuple()) == pytest.approx(1.0, abs=1e-9)

    def test_singular_design_exit_2(self, tmp_path):
        train = tmp_path / "singular.csv"
        hdr = ("length_m,max_slope,min_width,surface,weather,hour_of_day,"
               "day_of_week,journey_length,daily_total_length,age,gender,score")
        rows = [hdr] + [f"10,2,1.5,0.8,0.9,12,{i % 7},300,1200,40,1,{3 + (i % 2)}"
                        for i in range(20)]
        train.write_text("\n".join(rows) + "\n")
        code = main(["fit", str(train), "--model", "ols", "--folds", "4"])
        assert code == 2

    def test_fit_deterministic(self, tmp_path, capsys):
        train = tmp_path / "train.csv"
        write_training_csv(train)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["--seed", "3", "fit", str(train), "--model", "ridge", "--lam", "0.1",
              "--folds", "5", "--out", str(a)])
        main(["--seed", "3", "fit", str(train), "--model", "ridge", "--lam", "0.1",
              "--folds", "5", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestRouteDeterminism:
    def test_route_byte_identical(self, scene_file, tmp_path, capsys):
        a, b = tmp_path / "a.geojson", tmp_path / "b.geojson"
        main(["route", str(scene_file), "--from", "1,5", "--to", "9,5", "--out", str(a)])
        out1 = capsys.readouterr().out
        main(["route", str(scene_file), "--from", "1,5", "--to", "9,5", "--out", str(b)])
        out2 = capsys.readouterr().out
        assert a.read_bytes() == b.read_bytes()
        assert out1 == out2

import io
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from planesearch import (
    AcquisitionConfig,
    Dataset,
    GridSpec,
    PlaneSession,
    SearchSpace,
    choose,
    finalize_preference,
    jsonio,
    map_fit,
)
from planesearch.gallery.enhance import EnhanceParams
from planesearch.gallery.service import create_app, new_token, session_rng
from planesearch.subspace import construct_plane, initial_plane

# a level-0 corner cell of this seed's initial plane leaves the space
SEED_WITH_INVALID_CELL = 7


@pytest.fixture()
def client():
    return TestClient(create_app())


def png_bytes(width=8, height=6, color=(200, 120, 40)):
    img = Image.new("RGB", (width, height), color)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def upload(client):
    resp = client.post("/images", content=png_bytes())
    assert resp.status_code == 200
    return resp.json()["id"]


def make_session(client, seed=0, **extra):
    image_id = upload(client)
    resp = client.post("/sessions", json={"image_id": image_id, "seed": seed, **extra})
    assert resp.status_code == 200, resp.text
    return resp.json()


class TestImages:
    def test_png_and_jpeg_accepted(self, client):
        assert client.post("/images", content=png_bytes()).status_code == 200
        img = Image.new("RGB", (5, 5), (10, 20, 30))
        buf = io.BytesIO()
        img.save(buf, format="JPEG")
        assert client.post("/images", content=buf.getvalue()).status_code == 200

    def test_undecodable_body_is_422(self, client):
        resp = client.post("/images", content=b"not an image at all")
        assert resp.status_code == 422
        body = resp.json()
        assert body["code"] == "malformed"
        assert "message" in body

    def test_oversized_image_rejected(self, client):
        # 1x1 PNG claiming huge dimensions is awkward to fake; use a real
        # image just over the pixel cap scaled down in memory instead
        img = Image.new("RGB", (4100, 4100))
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        resp = client.post("/images", content=buf.getvalue())
        assert resp.status_code == 422


class TestSessionLifecycle:
    def test_create_returns_full_grid(self, client):
        created = make_session(client, seed=3)
        grid = created["grid"]
        assert len(grid["cells"]) == 25
        assert grid["level"] == 0
        assert grid["iteration"] == 0
        center = [c for c in grid["cells"] if c["i"] == 0 and c["j"] == 0][0]
        assert center["valid"] is True
        vec = EnhanceParams.from_json(center["params"]).to_vector()
        assert np.array_equal(vec, np.full(12, 0.5))

    def test_same_seed_same_initial_grid(self, client):
        a = make_session(client, seed=11)["grid"]
        b = make_session(client, seed=11)["grid"]
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_custom_grid_shape(self, client):
        created = make_session(client, seed=1, grid_res=3, levels=2)
        assert len(created["grid"]["cells"]) == 9

    def test_unknown_image_404(self, client):
        resp = client.post("/sessions", json={"image_id": "nope", "seed": 0})
        assert resp.status_code == 404
        assert resp.json()["code"] == "not-found"

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/zzz/grid").status_code == 404
        assert client.post("/sessions/zzz/choose", json={"i": 0, "j": 0}).status_code == 404
        assert client.post("/sessions/zzz/satisfied").status_code == 404
        assert client.get("/sessions/zzz/best").status_code == 404
        assert client.get("/sessions/zzz/snapshot").status_code == 404

    def test_malformed_choose_body_is_422(self, client):
        created = make_session(client)
        sid = created["id"]
        resp = client.post(f"/sessions/{sid}/choose", json={"i": "x"})
        assert resp.status_code == 422
        assert resp.json()["code"] == "malformed"

    def test_out_of_range_cell_is_422(self, client):
        created = make_session(client)
        sid = created["id"]
        resp = client.post(f"/sessions/{sid}/choose", json={"i": 7, "j": 0})
        assert resp.status_code == 422

    def test_invalid_cell_is_409_and_state_unchanged(self, client):
        created = make_session(client, seed=SEED_WITH_INVALID_CELL)
        sid = created["id"]
        bad = [c for c in created["grid"]["cells"] if not c["valid"]]
        assert bad, "expected an invalid corner cell for this seed"
        assert bad[0]["params"] is None
        resp = client.post(f"/sessions/{sid}/choose", json={"i": bad[0]["i"], "j": bad[0]["j"]})
        assert resp.status_code == 409
        assert resp.json()["code"] == "invalid-cell"
        after = client.get(f"/sessions/{sid}/grid").json()
        assert after["level"] == 0


class TestChoiceLoop:
    def test_four_choices_complete_a_plane(self, client):
        created = make_session(client, seed=2)
        sid = created["id"]
        for k, (i, j) in enumerate([(1, 0), (0, -1), (0, 0), (1, 0)]):
            resp = client.post(f"/sessions/{sid}/choose", json={"i": i, "j": j})
            assert resp.status_code == 200, resp.text
            body = resp.json()
            if k < 3:
                assert body["completed_plane"] is False
                assert body["iteration"] == 0
                assert body["grid"]["level"] == k + 1
            else:
                assert body["completed_plane"] is True
                assert body["iteration"] == 1
                assert body["grid"]["level"] == 0

    def test_best_is_neutral_then_last_chosen(self, client):
        created = make_session(client, seed=2)
        sid = created["id"]
        best = client.get(f"/sessions/{sid}/best").json()
        assert np.array_equal(EnhanceParams.from_json(best).to_vector(), np.full(12, 0.5))

        joined = None
        for i, j in [(1, 0), (0, -1), (0, 0), (1, 0)]:
            joined = client.post(f"/sessions/{sid}/choose", json={"i": i, "j": j}).json()
        best = client.get(f"/sessions/{sid}/best").json()
        # after one completed plane the best is the chosen point, which is the
        # center of the fresh level-0 grid
        center = [c for c in joined["grid"]["cells"] if c["i"] == 0 and c["j"] == 0][0]
        assert json.dumps(best, sort_keys=True) == json.dumps(center["params"], sort_keys=True)
        again = client.get(f"/sessions/{sid}/best").json()
        assert json.dumps(again, sort_keys=True) == json.dumps(best, sort_keys=True)

    def test_satisfied_acknowledges_count(self, client):
        created = make_session(client, seed=4)
        sid = created["id"]
        assert client.post(f"/sessions/{sid}/satisfied").json() == {"count": 1}
        assert client.post(f"/sessions/{sid}/satisfied").json() == {"count": 2}
        snap = client.get(f"/sessions/{sid}/snapshot").json()
        assert [entry[0] for entry in snap["satisfied"]] == [0, 0]


class TestHeadlessEquivalence:
    def test_scripted_session_matches_library_composition(self, client):
        seed = 5
        script = [(1, 0), (0, -1), (0, 0), (1, 0)]
        planes = 3
        created = make_session(client, seed=seed)
        sid = created["id"]

        snapshots = []
        for _ in range(planes):
            for i, j in script:
                resp = client.post(f"/sessions/{sid}/choose", json={"i": i, "j": j})
                assert resp.status_code == 200, resp.text
            snapshots.append(client.get(f"/sessions/{sid}/snapshot").json())

        # headless twin built purely from library primitives
        space = SearchSpace(12)
        dataset = Dataset(space)
        plane = initial_plane(space, session_rng(seed, 0))
        config = AcquisitionConfig()
        for iteration in range(planes):
            session = PlaneSession(plane, GridSpec())
            for i, j in script:
                session = choose(session, i, j)
            dataset.add_preference(finalize_preference(session))
            model = map_fit(dataset)
            plane = construct_plane(
                model, config, session_rng(seed, iteration + 1), best_mode="last_chosen"
            )
            snap = snapshots[iteration]
            assert snap["iteration"] == iteration + 1
            # normalize both sides through the same fixed-digit emitter,
            # since parsing JSON turns integral floats into ints
            assert jsonio.dumps(snap["dataset"]) == jsonio.dumps(dataset.to_json())
            assert jsonio.dumps(snap["session"]["plane"]) == jsonio.dumps(plane.to_json())


class TestSnapshotRestore:
    def test_snapshot_restore_snapshot_fixed_point(self, client):
        created = make_session(client, seed=6)
        sid = created["id"]
        for i, j in [(1, 0), (0, 1)]:
            client.post(f"/sessions/{sid}/choose", json={"i": i, "j": j})
        snap1 = client.get(f"/sessions/{sid}/snapshot").text
        restored = client.post("/sessions/restore", content=snap1)
        assert restored.status_code == 200
        assert restored.json()["id"] == sid
        snap2 = client.get(f"/sessions/{sid}/snapshot").text
        assert snap1 == snap2

    def test_restore_preserves_level_and_center_mid_zoom(self, client):
        created = make_session(client, seed=6)
        sid = created["id"]
        client.post(f"/sessions/{sid}/choose", json={"i": 1, "j": -1})
        before = client.get(f"/sessions/{sid}/grid").json()
        snap = client.get(f"/sessions/{sid}/snapshot").text

        other = TestClient(create_app())
        restored = other.post("/sessions/restore", content=snap)
        assert restored.status_code == 200
        after = restored.json()["grid"]
        assert json.dumps(after, sort_keys=True) == json.dumps(before, sort_keys=True)

    def test_restored_session_continues_identically(self, client):
        created = make_session(client, seed=8)
        sid = created["id"]
        script = [(1, 0), (0, -1), (0, 0), (1, 0)]
        for i, j in script[:2]:
            client.post(f"/sessions/{sid}/choose", json={"i": i, "j": j})
        snap = client.get(f"/sessions/{sid}/snapshot").text

        # continue the original
        grids_a = [
            client.post(f"/sessions/{sid}/choose", json={"i": i, "j": j}).json()
            for i, j in script[2:]
        ]
        # continue the restored copy on a fresh service
        other = TestClient(create_app())
        other.post("/sessions/restore", content=snap)
        grids_b = [
            other.post(f"/sessions/{sid}/choose", json={"i": i, "j": j}).json()
            for i, j in script[2:]
        ]
        assert json.dumps(grids_a, sort_keys=True) == json.dumps(grids_b, sort_keys=True)

    def test_malformed_snapshot_422_with_location(self, client):
        resp = client.post("/sessions/restore", content=b'{"id": ')
        assert resp.status_code == 422
        assert "line" in resp.json()["message"]

    def test_incomplete_snapshot_422(self, client):
        resp = client.post("/sessions/restore", json={"id": "x"})
        assert resp.status_code == 422


class TestTokens:
    def test_a_million_tokens_do_not_collide(self):
        seen = {new_token() for _ in range(1_000_000)}
        assert len(seen) == 1_000_000

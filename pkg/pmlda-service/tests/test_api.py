import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from app.main import create_app
from app.services import cache_service
from app.services.cache_service import RunCacheService


@pytest.fixture
def client(monkeypatch):
    monkeypatch.setattr(cache_service, "_cache_service", RunCacheService(enabled=True, mongodb_uri=""))
    return TestClient(create_app())


@pytest.fixture
def corpus(rng):
    return [np.vstack([rng.normal(-4, 1, size=(6, 2)), rng.normal(6, 1, size=(6, 2))]).tolist()
            for _ in range(3)]


def pgm_bytes(image):
    buffer = io.BytesIO()
    Image.fromarray(image.astype(np.uint8)).save(buffer, format="PPM")
    return buffer.getvalue()


class TestHealth:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "healthy", "service": "pmlda-service"}

    def test_root(self, client):
        assert client.get("/").json()["status"] == "healthy"


class TestInference:
    def test_generate(self, client):
        payload = {"means": [[-4, -4], [6, 6]], "alpha": [1, 1], "lambda": 1.0, "D": 2, "N": 10, "seed": 1}
        response = client.post("/generate", json=payload)
        assert response.status_code == 200
        body = response.json()
        assert len(body["corpus"]) == 2 and len(body["corpus"][0]) == 10
        assert len(body["truth"]) == 2 and len(body["truth"][0]["pi"]) == 2

    def test_fit_is_cached(self, client, corpus):
        payload = {"corpus": corpus, "config": {"K": 2, "T": 8, "seed": 4}}
        first = client.post("/fit", json=payload)
        assert first.status_code == 200
        body = first.json()
        assert not body["cached"]
        assert len(body["log_joint_series"]) == 8
        assert body["log_joint"] >= max(body["log_joint_series"])
        assert set(body["acceptance_rates"]) == {"pi", "s", "z", "mu", "sigma"}

        second = client.post("/fit", json=payload).json()
        assert second["cached"]
        assert second["log_joint"] == body["log_joint"]
        assert client.get("/cache/stats").json()["memory_entries"] == 1

    def test_fit_rejects_bad_config(self, client, corpus):
        response = client.post("/fit", json={"corpus": corpus, "config": {"K": 3, "alpha": [1, 2]}})
        assert response.status_code == 422

    def test_fit_rejects_ragged_document(self, client):
        response = client.post("/fit", json={"corpus": [[[1.0, 2.0], [3.0]]], "config": {"T": 2}})
        assert response.status_code == 400

    def test_fcm(self, client, corpus):
        response = client.post("/fcm", json={"corpus": corpus, "config": {"K": 2, "seed": 0}})
        assert response.status_code == 200
        body = response.json()
        assert [len(block) for block in body["memberships"]] == [12, 12, 12]
        np.testing.assert_allclose(np.sum(body["memberships"], axis=2), 1.0)


class TestSegmentation:
    def test_features_tiles(self, client, rng):
        image = rng.integers(0, 256, size=(12, 12))
        response = client.post("/features", files={"image": ("img.pgm", pgm_bytes(image))},
                               data={"window": "6", "stride": "6", "entropy_window": "3"})
        assert response.status_code == 200
        body = response.json()
        assert (body["height"], body["width"], body["dim"]) == (12, 12, 2)
        assert len(body["corpus"]) == 4 and len(body["layout"][0]) == 36

    def test_features_with_labels(self, client, rng):
        image = rng.integers(0, 256, size=(8, 8))
        labels = b"\n".join(b",".join(b"1" if c >= 4 else b"0" for c in range(8)) for _ in range(8))
        response = client.post("/features", files={"image": ("img.pgm", pgm_bytes(image)),
                                                   "labels": ("labels.csv", labels)},
                               data={"extractor": "filter_bank"})
        assert response.status_code == 200
        assert [len(doc) for doc in response.json()["corpus"]] == [32, 32]

    def test_features_rejects_garbage(self, client):
        response = client.post("/features", files={"image": ("img.pgm", b"not an image")})
        assert response.status_code == 400

    def test_segment(self, client):
        payload = {"memberships": [[[0.9, 0.1], [0.5, 0.5]]], "layout": [[[0, 0], [0, 1]]],
                   "height": 1, "width": 3}
        body = client.post("/segment", json=payload).json()
        assert body["coverage"] == [[True, True, False]]
        assert body["crisp"] == [[0, 0, -1]]
        assert body["transition"] == [[False, True, False]]

    def test_roc(self, client):
        payload = {"scores": [[0.9, 0.2], [0.7, 0.1]], "truth": [[1, 0], [1, 0]],
                   "crisp": [[0, 1], [1, 1]], "topic": 0}
        body = client.post("/roc", json=payload).json()
        assert body["auc"] == 1.0
        assert body["thresholds"][0] is None and body["thresholds"][-1] is None
        assert body["crisp_point"] == [0.0, 0.5]

    def test_roc_skips_uncovered_pixels(self, client):
        # the uncovered positive scores below every negative
        payload = {"scores": [[0.9, 0.2, 0.0], [0.7, 0.1, 0.0]], "truth": [[1, 0, 0], [1, 0, 1]]}
        assert client.post("/roc", json=payload).json()["auc"] < 1.0
        payload["coverage"] = [[True, True, False], [True, True, False]]
        body = client.post("/roc", json=payload).json()
        assert body["auc"] == 1.0
        assert len(body["fpr"]) == 6

    def test_roc_single_class(self, client):
        response = client.post("/roc", json={"scores": [[0.5, 0.4]], "truth": [[1, 1]]})
        assert response.status_code == 400


class TestCacheRoutes:
    def test_cleanup_and_clear(self, client, corpus):
        client.post("/fcm", json={"corpus": corpus, "config": {"K": 2}})
        assert client.post("/cache/cleanup").json()["removed"] == 0
        cleared = client.delete("/cache/clear").json()
        assert cleared["removed"] == 1
        assert client.get("/cache/stats").json()["memory_entries"] == 0

import json
import threading

import pytest
from fastapi.testclient import TestClient

from strataeval import (
    STRATUM_CLASSES,
    StudyConfig,
    WeightMode,
    build_report,
    create_study,
    load_corpus,
    load_study,
    save_study,
    serialize_corpus,
)
from strataeval.server import create_app

from conftest import make_sim_corpus


@pytest.fixture
def workbench(tmp_path):
    corpus, oracle = make_sim_corpus(sizes=(100, 100, 100), q=0.9, u=0.05, seed=42)
    corpus_path = tmp_path / "corpus.tsv"
    corpus_path.write_bytes(serialize_corpus(corpus))
    corpus = load_corpus(corpus_path)  # digest of the on-disk bytes
    study_path = tmp_path / "study.json"
    config = StudyConfig(seed=17, pilot_per_stratum=5, target_se=0.05)
    save_study(create_study(corpus, config), study_path)
    app = create_app(study_path, corpus_path)
    return TestClient(app), oracle, study_path, corpus_path, corpus


def judge_everything(client, oracle):
    judged = 0
    while True:
        body = client.get("/api/items/next").json()
        if body["item"] is None:
            return judged
        item = body["item"]
        verdict = oracle[item["item_index"]].value
        response = client.post(
            f"/api/items/{item['item_index']}/judgment",
            json={"verdict": verdict, "judge_id": "ui-tester"},
        )
        assert response.status_code == 200, response.text
        judged += 1


class TestEndpoints:
    def test_study_summary(self, workbench):
        client, *_ = workbench
        body = client.get("/api/study").json()
        assert body["phase"] == "Created"
        assert body["config"]["seed"] == 17
        assert set(body["progress"]) == {"noun", "adjective", "verb"}
        assert body["progress"]["noun"]["population"] == 100
        assert body["plan"] is None

    def test_advance_draws_pilot(self, workbench):
        client, *_ = workbench
        body = client.post("/api/phase/advance").json()
        assert body["phase"] == "PilotDrawn"
        assert body["progress"]["verb"]["drawn"] == 5

    def test_next_item_view(self, workbench):
        client, *_ = workbench
        client.post("/api/phase/advance")
        item = client.get("/api/items/next").json()["item"]
        assert item is not None
        centers = [t for t in item["context"] if t["is_center"]]
        assert len(centers) == 1
        assert len(item["context"]) <= 2 * 5 + 1
        assert item["pos_class"] in ("noun", "adjective", "verb")
        same = client.get(f"/api/items/{item['item_index']}").json()
        assert same["item_index"] == item["item_index"]

    def test_next_item_stratum_filter(self, workbench):
        client, *_ = workbench
        client.post("/api/phase/advance")
        item = client.get("/api/items/next", params={"stratum": "verb"}).json()["item"]
        assert item["pos_class"] == "verb"

    def test_judgment_grows_ledger(self, workbench):
        client, oracle, *_ = workbench
        client.post("/api/phase/advance")
        item = client.get("/api/items/next").json()["item"]
        response = client.post(
            f"/api/items/{item['item_index']}/judgment",
            json={"verdict": oracle[item["item_index"]].value, "judge_id": "j"},
        )
        assert response.status_code == 200
        progress = response.json()["progress"]
        assert sum(p["judged"] for p in progress.values()) == 1

    def test_undrawn_index_is_404_with_code(self, workbench):
        client, *_ = workbench
        client.post("/api/phase/advance")
        drawn = set()
        while True:
            item = client.get("/api/items/next").json()["item"]
            if item is None or item["item_index"] in drawn:
                break
            drawn.add(item["item_index"])
            break  # one drawn index is enough; find an undrawn one below
        undrawn = next(i for i in range(300) if i not in drawn)
        # probe until we hit a genuinely undrawn index
        while True:
            response = client.post(
                f"/api/items/{undrawn}/judgment",
                json={"verdict": "correct", "judge_id": "j"},
            )
            if response.status_code == 404:
                break
            undrawn += 1
        assert response.json()["code"] == "item_not_drawn"

    def test_out_of_range_index_404(self, workbench):
        client, *_ = workbench
        response = client.get("/api/items/99999")
        assert response.status_code == 404
        assert response.json()["code"] == "item_not_drawn"

    def test_inconsistent_verdict_409(self, workbench):
        client, oracle, *_ = workbench
        client.post("/api/phase/advance")
        # find a drawn no-output item via the API
        flipped = None
        seen = []
        while True:
            item = client.get("/api/items/next").json()["item"]
            if item is None:
                break
            index = item["item_index"]
            if item["system_lemma"] is None:
                flipped = ("correct", index)
                break
            seen.append(index)
            client.post(f"/api/items/{index}/judgment",
                        json={"verdict": oracle[index].value, "judge_id": "j"})
        if flipped is None:
            pytest.skip("draw contained no no-output items")
        verdict, index = flipped
        response = client.post(
            f"/api/items/{index}/judgment", json={"verdict": verdict, "judge_id": "j"}
        )
        assert response.status_code == 409
        assert response.json()["code"] == "verdict_inconsistent"

    def test_bad_verdict_is_422_error_body(self, workbench):
        client, *_ = workbench
        client.post("/api/phase/advance")
        item = client.get("/api/items/next").json()["item"]
        response = client.post(
            f"/api/items/{item['item_index']}/judgment",
            json={"verdict": "nope", "judge_id": "j"},
        )
        assert response.status_code == 422
        assert response.json()["code"] == "validation_error"

    def test_advance_without_judgments_409(self, workbench):
        client, *_ = workbench
        client.post("/api/phase/advance")
        response = client.post("/api/phase/advance")
        assert response.status_code == 409
        assert response.json()["code"] == "phase_error"

    def test_report_requires_reported_phase(self, workbench):
        client, *_ = workbench
        response = client.get("/api/report")
        assert response.status_code == 409

    def test_frequency_endpoint(self, workbench):
        client, *_ = workbench
        body = client.get("/api/frequency/noun").json()
        assert body["pos_class"] == "noun"
        assert body["total"] == 100
        assert sum(row["count"] for row in body["rows"]) == 100

    def test_frequency_rejects_other(self, workbench):
        assert workbench[0].get("/api/frequency/other").status_code == 400
        assert workbench[0].get("/api/frequency/bogus").status_code == 400


class TestFullFlow:
    def advance(self, client):
        response = client.post("/api/phase/advance")
        assert response.status_code == 200, response.text
        return response.json()["phase"]

    def test_complete_study_through_api(self, workbench):
        client, oracle, study_path, corpus_path, corpus = workbench
        assert self.advance(client) == "PilotDrawn"
        judged = judge_everything(client, oracle)
        assert judged == 15
        assert self.advance(client) == "PilotJudged"
        assert self.advance(client) == "Allocated"
        assert self.advance(client) == "MainDrawn"
        judge_everything(client, oracle)
        assert self.advance(client) == "Complete"
        assert self.advance(client) == "Reported"

        report = client.get("/api/report").json()
        # the API response must equal the library's report exactly
        direct = build_report(load_study(study_path, corpus)).to_dict()
        assert report == direct

        sample_mode = client.get("/api/report", params={"mode": "sample"}).json()
        assert sample_mode["weight_mode"] == "sample"
        assert sample_mode["modes"] == report["modes"]

    def test_state_persisted_after_each_mutation(self, workbench):
        client, oracle, study_path, corpus_path, corpus = workbench
        client.post("/api/phase/advance")
        on_disk = json.loads(study_path.read_text())
        assert on_disk["phase"] == "PilotDrawn"
        item = client.get("/api/items/next").json()["item"]
        client.post(
            f"/api/items/{item['item_index']}/judgment",
            json={"verdict": oracle[item["item_index"]].value, "judge_id": "j"},
        )
        on_disk = json.loads(study_path.read_text())
        assert str(item["item_index"]) in on_disk["judgments"]
        # reloading the file yields the same state the service reports
        reloaded = load_study(study_path, corpus)
        assert reloaded.phase.value == client.get("/api/study").json()["phase"]

    def test_concurrent_judgments_all_recorded(self, workbench):
        client, oracle, study_path, corpus_path, corpus = workbench
        client.post("/api/phase/advance")
        study = load_study(study_path, corpus)
        indices = [i for cls in STRATUM_CLASSES for i in study.pilot.items[cls]]

        failures = []

        def post(index):
            response = client.post(
                f"/api/items/{index}/judgment",
                json={"verdict": oracle[index].value, "judge_id": "racer"},
            )
            if response.status_code != 200:
                failures.append(response.text)

        threads = [threading.Thread(target=post, args=(i,)) for i in indices]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not failures
        final = load_study(study_path, corpus)
        assert len(final.judgments) == len(indices)
        assert sorted(final.judgments) == sorted(indices)

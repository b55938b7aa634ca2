import json
import math

import numpy as np
import pytest

import mscluster as ms


def barbell():
    a = np.zeros((6, 6))
    for block in (0, 3):
        for i in range(3):
            for j in range(3):
                if i != j:
                    a[block + i, block + j] = 1.0
    a[2, 3] = a[3, 2] = 1.0
    return a


def test_text_processing():
    assert ms.tokenize("Hello, World! 42") == ["hello", "world"]
    docs = ms.ingest('{"id": "a", "text": "Patients were falling", "category": "falls"}\n')
    assert len(docs) == 1
    assert docs[0].id == "a"
    assert docs[0].category == "falls"
    assert "were" not in docs[0].tokens
    with pytest.raises(ValueError):
        ms.ingest('{"id": "a"}\n{"id": "a", "text": "x"}\n')


def test_operator_and_stability():
    op = ms.DiffusionOperator(barbell())
    assert len(op) == 6
    assert np.allclose(op.transition_matrix(1.0).sum(axis=1), 1.0)
    natural = ms.Partition([0, 0, 0, 1, 1, 1])
    bad = ms.Partition([0, 1, 0, 1, 0, 1])
    assert op.stability(natural, 1.0) > op.stability(bad, 1.0)
    assert op.stability(ms.Partition.all_in_one(6), 2.0) == 0.0
    spectral = ms.DiffusionOperator(barbell(), method="spectral")
    action = ms.DiffusionOperator(barbell(), method="action")
    assert spectral.stability(natural, 3.0) == pytest.approx(action.stability(natural, 3.0), abs=1e-10)
    with pytest.raises(ValueError):
        ms.DiffusionOperator(np.zeros((3, 3)))


def test_louvain_and_scan(tmp_path):
    op = ms.DiffusionOperator(barbell())
    p = ms.louvain(op, 1.0, seed=3)
    assert p == ms.Partition([0, 0, 0, 1, 1, 1])
    sr = ms.scan(op, ms.log_time_grid(0.1, 10.0, 8), runs=6, top_m=3, seed=1)
    assert len(sr) == 8
    assert sr.vi_matrix.shape == (8, 8)
    levels = ms.select_robust(sr)
    assert any(level["num_clusters"] == 2 for level in levels)
    sr.save(str(tmp_path / "scan"))
    back = ms.load_scan(str(tmp_path / "scan"))
    assert back.num_clusters == sr.num_clusters


def test_metrics():
    vi, normalized = ms.variation_of_information([0, 0, 1, 1], [0, 1, 0, 1])
    assert vi == pytest.approx(2 * math.log(2))
    assert normalized == pytest.approx(2 * math.log(2) / math.log(4))
    assert ms.nmi([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(1.0)
    table = ms.zscore_contingency([0, 0, 0, 0, 0, 1, 1, 1, 1, 1], [0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    assert table["z"][0, 0] == pytest.approx(3.0)
    flows = json.loads(ms.sankey([ms.Partition([0, 0, 1, 1]), ms.Partition([0, 0, 0, 1])]))
    assert len(flows["layers"]) == 2


def test_graph_construction():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(30, 5))
    sim, dmax = ms.cosine_similarity(x)
    assert sim.shape == (30, 30)
    assert dmax > 0
    adjacency, edges = ms.build_mst_knn(x, 0)
    assert len(edges) == 29
    assert np.allclose(adjacency, adjacency.T)


def write_vectors(path, ids, matrix):
    # vector interchange format: "N d" header, then "id v1 ... vd"
    with open(path, "w") as f:
        f.write(f"{len(ids)} {matrix.shape[1]}\n")
        for doc_id, row in zip(ids, matrix):
            f.write(doc_id + " " + " ".join(repr(float(v)) for v in row) + "\n")


def test_pipeline_with_imported_vectors(tmp_path):
    rng = np.random.default_rng(1)
    words = [["fall", "floor", "hip", "bed"], ["dose", "tablet", "insulin", "chart"], ["monitor", "battery", "pump", "alarm"]]
    centroids = rng.normal(size=(3, 8))
    ids, rows = [], []
    with open(tmp_path / "corpus.jsonl", "w") as f:
        for i in range(45):
            topic = i % 3
            text = " ".join(rng.choice(words[topic], size=12))
            f.write(json.dumps({"id": f"r{i}", "text": text, "category": f"c{topic}"}) + "\n")
            ids.append(f"r{i}")
            rows.append(centroids[topic] + 0.2 * rng.normal(size=8))
    # rows in shuffled order: the pipeline realigns them to the corpus
    order = rng.permutation(len(ids))
    write_vectors(tmp_path / "vectors.txt", [ids[i] for i in order], np.array(rows)[order])
    (tmp_path / "run.cfg").write_text(
        "corpus = corpus.jsonl\nvectors = vectors.txt\nworkdir = work\nk = 4\nt_points = 15\nruns = 8\ntop_m = 4\n"
    )
    status = ms.run_pipeline(str(tmp_path / "run.cfg"))
    assert [name for name, _ in status] == ["ingest", "vectors", "graph", "scan", "select", "evaluate", "export"]
    assert not any(skipped for _, skipped in status)
    levels = json.loads((tmp_path / "work" / "levels.json").read_text())["levels"]
    assert any(level["C"] == 3 for level in levels)
    again = ms.run_pipeline(str(tmp_path / "run.cfg"))
    assert all(skipped for _, skipped in again)
    # a vector file that disagrees with its header is rejected
    (tmp_path / "vectors.txt").write_text("45 8\nr0 1 2 3\n")
    with pytest.raises(Exception, match="vectors"):
        ms.run_pipeline(str(tmp_path / "run.cfg"))

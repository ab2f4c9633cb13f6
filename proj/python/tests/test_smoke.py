import itertools
import json
import os

import pytest

import triquad

K4 = {
    "k": 4,
    "Q": [
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
        [[1, 0, 0, 0], [0, 2, 0, 0], [0, 0, 3, 0], [0, 0, 0, 4]],
        [[0, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0]],
    ],
}

DIAG = {
    "k": 4,
    "Q": [
        [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0]],
        [[1, 0, 0, 0], [0, 2, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
    ],
}


def brute_count(system_dict, n, q):
    k = system_dict["k"]
    Q = system_dict["Q"]
    total = 0
    for x in itertools.product(range(q), repeat=k):
        vals = [
            sum(Q[m][i][j] * x[i] * x[j] for i in range(k) for j in range(k)) % q
            for m in range(3)
        ]
        if vals == [v % q for v in n]:
            total += 1
    return total


def test_load_and_eval():
    sys4 = triquad.load(K4)
    assert sys4.k == 4
    assert triquad.load(json.dumps(K4)).k == 4
    n = sys4.eval([1, 0, 0, 0])
    assert n == [1, 1, 0]
    round_trip = json.loads(sys4.to_json())
    assert round_trip["k"] == 4
    assert round_trip["Q"] == K4["Q"]


def test_load_rejects_bad_input():
    with pytest.raises(ValueError):
        triquad.load({"k": 3, "Q": [[[1]]] * 3})
    bad = json.loads(json.dumps(K4))
    bad["Q"][2][0][1] = 5  # asymmetric
    with pytest.raises(ValueError):
        triquad.load(bad)


def test_certificates():
    good = triquad.certify(triquad.load(K4), mode="fast")
    assert good["status"] == "certified-nonsingular"
    diag = triquad.certify(triquad.load(DIAG), mode="fast")
    assert diag["status"] == "singular-with-witness"
    assert diag["witness"] is not None


def test_counting_matches_brute_force():
    sys4 = triquad.load(K4)
    for q in (2, 3, 4):
        for n in ((0, 0, 0), (1, 1, 0), (2, 1, 1)):
            assert triquad.count(sys4, n, q) == brute_count(K4, n, q)
    assert triquad.count(sys4, (0, 0, 0), 1) == 1


def test_full_sum_identity():
    sys4 = triquad.load(K4)
    for q in (2, 3, 5):
        n = (1, 2, 0)
        assert triquad.sum_all(sys4, n, q) == q**3 * triquad.count(sys4, n, q)


def test_tsum_basics():
    sys4 = triquad.load(K4)
    assert triquad.tsum(sys4, (1, 2, 3), 1) == 1
    n = (1, 0, 2)
    assert triquad.tsum(sys4, n, 6) == triquad.tsum(sys4, n, 2) * triquad.tsum(sys4, n, 3)


def test_singular_series_flags():
    sys4 = triquad.load(K4)
    s = triquad.singular_series(sys4, (1, 1, 0), qmax=8)
    assert s["soluble"] is True
    assert s["value"] > 0
    assert isinstance(s["sigma"], list) and s["sigma"]


def test_classify():
    sys4 = triquad.load(K4)
    c = triquad.classify(sys4, 2, (0, 0, 0))
    assert c["kind"] == "bad"
    c5 = triquad.classify(sys4, 5, (1, 1, 0))
    assert c5["kind"] in ("good-type-I", "good-type-II")


def test_census_and_budget():
    sys4 = triquad.load(K4)
    table = triquad.count_reps(sys4, 3.0)
    assert table["B"] == 3.0
    assert any(row["w"] > 0 for row in table["entries"])
    with pytest.raises(RuntimeError):
        triquad.count_reps(sys4, 500.0)


def test_predict_on_big_system():
    data_dir = os.environ.get("TRIQUAD_DATA")
    if not data_dir:
        pytest.skip("TRIQUAD_DATA not set")
    with open(os.path.join(data_dir, "sysA.json")) as f:
        sys10 = triquad.load(f.read())
    assert sys10.k == 10
    p = triquad.predict(sys10, (1, 1, 1), B=5.0, qmax=8, R=4.0)
    assert p["locally_soluble"] is True
    assert p["value"] > 0
    j = triquad.jint(sys10, (0.7, 0.7, 0.7), R=4.0)
    assert j > 0
    with pytest.raises(ValueError):
        triquad.predict(triquad.load(K4), (1, 1, 1), B=4.0)

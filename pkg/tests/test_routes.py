def test_swagger_document_lists_the_namespaces(client):
    response = client.get("/swagger.json")
    assert response.status_code == 200
    paths = response.get_json()["paths"]
    assert "/fields/{c}/classgroup" in paths
    assert "/sieves/kraus" in paths


def test_class_group(client):
    response = client.get("/fields/23/classgroup")
    assert response.status_code == 200
    data = response.get_json()
    assert data["h_K"] == 3
    assert data["p2_is_generator"] is True


def test_class_group_rejects_non_squarefree(client):
    response = client.get("/fields/12/classgroup")
    assert response.status_code == 400
    assert "error" in response.get_json()


def test_split_prime(client):
    data = client.get("/fields/7/split/2").get_json()
    assert data["kind"] == "split"


def test_factorisation_data(client):
    data = client.get("/fields/23/factorisation/1/13").get_json()
    assert data["j"] == 0


def test_curve_lookup(client):
    data = client.get("/curves/46a1").get_json()
    assert data["conductor"] == "46"
    assert data["conductor_checked"] is True


def test_unknown_curve_is_404_offline(client):
    response = client.get("/curves/11a1")
    assert response.status_code == 404


def test_candidates(client):
    data = client.get("/curves/candidates", query_string={"instance": "1,23,odd"}).get_json()
    assert [r["label"] for r in data["records"]] == ["46a1"]
    good = client.get("/curves/candidates", query_string={"instance": "5,19,odd"}).get_json()
    assert good["not_a_bad_pair"] is True


def test_conductor_and_trace(client):
    response = client.post("/curves/conductor", json={"a_invariants": [1, 11, 0, 32, 0]})
    assert response.get_json()["conductor"] == 46
    response = client.post("/curves/trace", json={"a_invariants": ["0", "1", "0", "1", "0"], "ell": 5})
    assert response.status_code == 200


def test_conductor_rejects_singular_curve(client):
    response = client.post("/curves/conductor", json={"a_invariants": [0, 0, 0, 0, 0]})
    assert response.status_code == 400


def test_frey_curve(client):
    data = client.post("/frey/curve", json={"C1": 1, "q": 23, "x": 45, "y": 2, "alpha": 1, "p": 11}).get_json()
    assert data["level"] == 46
    assert data["tate"]["conductor"] == 46


def test_frey_level(client):
    data = client.get("/frey/level", query_string={"C1": 5, "q": 3, "p_divides_alpha": "true"}).get_json()
    assert data == {"N": 50, "p_divides_alpha": True}


def test_hensel(client):
    data = client.post("/tm/hensel", json={"coefficients": [1, 0, 1], "q": 3}).get_json()
    assert data == {"root_free": True, "k0": 1, "certified": True}


def test_yodd_system(client):
    data = client.post("/tm/yodd", json={"instance": "1,7,odd", "p": 5}).get_json()
    assert "a" in data["cases"]
    assert data["system"]["p"] == 5


def test_yeven_problem(client):
    data = client.post("/tm/yeven", json={"instance": "1,7,odd", "p": 11, "descend": True}).get_json()
    assert data["problem"]["kind"] == "thue_mahler"
    assert data["problem"]["primes"] == [7]
    assert isinstance(data["descents"], list)


def test_kraus_route(client):
    body = {"instance": "1,23,odd", "p": 11, "target": "46a1", "m_max": 30, "ell_count": 4}
    response = client.post("/sieves/kraus", json=body)
    assert response.status_code == 200
    data = response.get_json()
    assert data["method"] == "kraus"
    assert 1 in data["survivors"]


def test_sieve_route_needs_a_target(client):
    response = client.post("/sieves/kraus", json={"instance": "1,23,odd", "p": 11})
    assert response.status_code == 400


def test_bounds(client):
    data = client.get("/bounds/1/7/odd").get_json()
    assert data["params"]["s"] == 1
    assert data["ypbig"]["certified"] is True
    assert data["n0"] == "72341570"
    assert data["audit"]["consistent"] is True


def test_bounds_for_good_pair_is_404(client):
    assert client.get("/bounds/5/19/odd").status_code == 404


def test_y_lower(client):
    data = client.get("/bounds/y-lower/11").get_json()
    assert float(data["y_lower"]) > 27


def test_enumerate(client):
    data = client.post("/search/enumerate", json={"C1": 1, "q": 7, "x_max": 200, "alpha_max": 3}).get_json()
    rows = [[s[k] for k in ("C1", "q", "x", "y", "alpha", "n")] for s in data["solutions"]]
    assert [1, 7, 181, 8, 1, 5] in rows


def test_enumerate_respects_limits(client):
    response = client.post("/search/enumerate", json={"C1": 1, "q": 7, "x_max": 10**9, "alpha_max": 3})
    assert response.status_code == 400


def test_pairs_and_verify(client):
    data = client.get("/search/pairs", query_string={"parity": "even"}).get_json()
    assert len(data["admissible"]) == 13
    assert data["coprime"] == 101
    verdict = client.post("/search/verify", json={"C1": 1, "q": 7, "x": 5, "y": 2, "alpha": 1, "n": 5}).get_json()
    assert verdict["holds"] is True

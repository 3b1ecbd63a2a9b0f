import pytest

from entropy_forge import shipped
from entropy_forge.nonmal import nm_verify, toy_pipeline


@pytest.mark.parametrize("name, build", [("nm_suite.json", shipped.build_nm_suite),
                                         ("micro_pipeline.json", shipped.build_pipeline),
                                         ("mc_point.json", shipped.build_mc_point)])
def test_shipped_files_match_rebuild(name, build):
    import json
    assert shipped.load(name) == json.loads(json.dumps(build()))


def test_nm_suite_loads():
    c, inst = shipped.nm_instances(shipped.load("nm_suite.json"))
    assert len(inst) == 50
    assert {i.good for i in inst} == {1, 2}
    assert all(nm_verify(c, i).holds for i in inst[:4])
    # an explicit instance list round-trips
    suite = {"condenser": c.to_json(), "instances": [i.to_json() for i in inst[:2]]}
    c2, inst2 = shipped.nm_instances(suite)
    assert [i.good for i in inst2] == [1, 2]


def test_pipeline_and_point():
    cfg, src = shipped.pipeline()
    assert src.spec.t == 6
    assert toy_pipeline(src, cfg)[1]["holds"]
    p = shipped.mc_params(shipped.load("mc_point.json"))
    assert (p.n, p.m, p.kprime, p.d) == (10, 4, 3, 0)
    with pytest.raises(ValueError, match="integer"):
        shipped.mc_params({"n": 8, "k": 4, "ell": 1.5, "g": 1, "eps": 0.1})
    with pytest.raises(ValueError, match="'source'"):
        shipped.pipeline({"schedule": {}})

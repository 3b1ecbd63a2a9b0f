import itertools

import numpy as np
import pytest

from entropy_forge.bitdist import FunctionTable, flat, point_mass, product, push_forward, uniform
from entropy_forge.blocks import BlockDist, BlockSpec
from entropy_forge.compose import ChainConfig, compose_chain
from entropy_forge.entropy import clip_excess
from entropy_forge.nonmal import (NmCondenser, NmInstance, PipelineConfig, SomewhereSource,
                                  hull_distance, micro_pipeline_config, nm_eval, nm_verify,
                                  purified_eps, purify_step, row_worst_excess,
                                  search_somewhere_condenser, toy_pipeline, xor_output,
                                  zero_error_nm)
from entropy_forge.primitives import ip_extractor
from entropy_forge.sources import adversarial_nm_instance, random_block_source, random_dist
from helpers import grid_hull_distance, scipy_hull_distance


# -- non-malleable condenser ----------------------------------------------

def ip_nm():
    e = ip_extractor(1)
    return NmCondenser(e, e, e, e, w=1, k=1.0, g=0.0, k0=1.0, eps1=1.0, eps2=1.0)


def test_nm_eval_structure():
    c = ip_nm()
    for b in (1, 2):
        assert nm_eval(c, 0, 0, 0, b) == 0
    c = zero_error_nm(n=2, w=3, m=2, g=1, eps1=2.0 ** -64, eps2=2.0 ** -64, rng_seed=1)
    for b, p in ((1, c.p1), (2, c.p2)):
        table = c.branch_table(b)
        for x, y, z in itertools.product(range(4), range(4), range(8)):
            out = nm_eval(c, x, y, z, b)
            assert out == table[(((x << 2) | y) << 3) | z]
            # bits of z past the prefix are never read
            low = z & ((1 << (3 - p)) - 1)
            assert nm_eval(c, x, y, z ^ low, b) == out
    with pytest.raises(ValueError, match="advice"):
        nm_eval(c, 0, 0, 0, 3)
    with pytest.raises(ValueError, match="fit"):
        nm_eval(c, 4, 0, 0, 1)


def test_nm_condenser_validation_and_json():
    c = zero_error_nm(n=2, w=3, m=2, g=1, eps1=2.0 ** -64, eps2=2.0 ** -64, rng_seed=1)
    again = NmCondenser.from_json(c.to_json())
    assert np.array_equal(again.branch_table(1), c.branch_table(1))
    with pytest.raises(ValueError, match="'eps2'"):
        NmCondenser.from_json({k: v for k, v in c.to_json().items() if k != "eps2"})
    e = ip_extractor(1)
    with pytest.raises(ValueError, match="not a"):
        NmCondenser(e, e, e, e, w=1, k=1.0, g=0.0, k0=1.0, eps1=0.1, eps2=1.0)


def test_bound_arithmetic_and_vacuity():
    c = zero_error_nm(n=3, w=3, m=2, g=1, eps1=2.0 ** -16, eps2=2.0 ** -20, rng_seed=0)
    assert c.p2 == 2
    assert c.bound_eps == pytest.approx(2 ** 6 * 2 ** -4 + 2 ** 5 * 2 ** -5) == 5.0
    inst = adversarial_nm_instance(c, np.random.default_rng(0))
    v = nm_verify(c, inst)
    assert v.vacuous and not v.counted
    assert c.deficit == 1 + 2 * 2 + 2 + 16 + 20


def test_constant_bad_channel_keeps_output_uniform():
    c = zero_error_nm(n=2, w=2, m=2, g=0, eps1=2.0 ** -64, eps2=2.0 ** -64, rng_seed=3)
    xyz = uniform(2 + 2 + 2)
    joint = product(xyz, point_mass(2, 1))
    v = xor_output(c, joint)
    assert np.allclose(v.probs, 0.25)
    inst = NmInstance(BlockDist(BlockSpec((2, 2, 2, 2), (0, 0, 0, 0)), joint), 1)
    assert nm_verify(c, inst).measured_entropy == pytest.approx(2.0)


def test_nm_verify_adversarial_instances():
    c = zero_error_nm(n=3, w=3, m=2, g=2, eps1=2.0 ** -64, eps2=2.0 ** -64, rng_seed=5)
    rng = np.random.default_rng(0)
    for i in range(10):
        v = nm_verify(c, adversarial_nm_instance(c, rng, good=1 + i % 2, cancel=rng.random()))
        assert v.counted and v.holds


def test_nm_verify_precondition():
    c = zero_error_nm(n=2, w=2, m=2, g=1, eps1=2.0 ** -64, eps2=2.0 ** -64, rng_seed=3)
    # Z1 constant has entropy 0 < w - g = 1
    joint = product(uniform(4), product(point_mass(2, 0), uniform(2)))
    inst = NmInstance(BlockDist(BlockSpec((2, 2, 2, 2), (0, 0, 0, 0)), joint), 1)
    with pytest.raises(ValueError, match="precondition"):
        nm_verify(c, inst)
    assert nm_verify(c, NmInstance(inst.joint, 2)).holds
    with pytest.raises(ValueError, match="do not match"):
        nm_verify(c, NmInstance(BlockDist(BlockSpec((2, 2, 2), (0, 0, 0)), uniform(6)), 1))


# -- somewhere sources and purification -------------------------------------

def test_somewhere_source_rows():
    rng = np.random.default_rng(1)
    d = random_dist(6, rng)
    s = SomewhereSource(2, 3, d, 1.0)
    p = d.probs.reshape(8, 8)
    assert np.allclose(s.row(0).probs, p.sum(axis=1))
    assert np.allclose(s.row(1).probs, p.sum(axis=0))
    with pytest.raises(ValueError, match="power of two"):
        SomewhereSource(3, 2, d, 1.0)


def test_purify_halves_rows():
    nm = zero_error_nm(n=1, w=2, m=2, g=0, eps1=2.0 ** -64, eps2=2.0 ** -64, rng_seed=4)
    rng = np.random.default_rng(2)
    rows, dist = 8, random_dist(16, rng)
    seen = []
    while rows > 1:
        joint = BlockDist(BlockSpec((1, 1, rows * 2), (0, 0, 0)),
                          product(uniform(2), dist))
        out = purify_step(nm, joint, rows)
        assert out.rows == rows // 2 and out.row_bits == nm.m
        seen.append(out.rows)
        rows, dist = out.rows, out.dist
    assert seen == [4, 2, 1]
    with pytest.raises(ValueError, match="D >= 2"):
        purify_step(nm, BlockDist(BlockSpec((1, 1, 2), (0, 0, 0)), uniform(4)), 1)


def test_purified_eps_bookkeeping():
    assert purified_eps(0.01, 1e-6) == pytest.approx(0.01 + 0.004 + 1e-6)


def test_row_worst_excess_matches_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(20):
        t = FunctionTable(4, 2, rng.integers(0, 4, 16))
        k, ell = int(rng.integers(0, 4)), float(rng.uniform(0, 2))
        brute = 0.0
        for sup in itertools.combinations(range(16), 1 << k):
            out = push_forward(t, flat(4, sup))
            brute = max(brute, clip_excess(out.probs, ell))
        assert row_worst_excess(t, k, ell) == pytest.approx(brute, abs=1e-12)


def test_somewhere_search():
    sc = search_somewhere_condenser(6, 4, rows=2, w=3, ell=1.0, eps=0.0, trials=50,
                                    rng_seed=0, balanced=True)
    assert sc is not None
    assert row_worst_excess(sc.rows[sc.good_row], sc.k, sc.ell) <= 1e-9
    # a 2-bit output can never carry 3 bits
    assert search_somewhere_condenser(4, 2, rows=2, w=2, ell=3.0, eps=0.0, trials=5,
                                      rng_seed=0) is None


def test_hull_distance_examples():
    rng = np.random.default_rng(4)
    # row 0 uniform: already a somewhere-2-source
    s = product(uniform(2), random_dist(2, rng))
    assert hull_distance(s, 2.0, 2) == pytest.approx(0.0, abs=1e-9)
    assert hull_distance(point_mass(1, 0), 1.0, 1) == pytest.approx(0.5)
    for _ in range(5):
        assert hull_distance(random_dist(4, rng), 0.0, 2) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError, match="cap"):
        hull_distance(uniform(12), 1.0, 2)


def test_hull_distance_monotone_in_r():
    rng = np.random.default_rng(5)
    for _ in range(5):
        s = random_dist(4, rng)
        vals = [hull_distance(s, r, 2) for r in np.linspace(0, 2, 9)]
        assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))


def test_hull_distance_oracles():
    rng = np.random.default_rng(6)
    for _ in range(10):
        s = random_dist(4, rng, sparsity=rng.choice([0.0, 0.5]))
        r = float(rng.uniform(0, 2))
        lp = hull_distance(s, r, 2)
        assert lp == pytest.approx(grid_hull_distance(s, r, 2), abs=1e-4)
        assert lp == pytest.approx(scipy_hull_distance(s, r, 2), abs=1e-7)
    s = random_dist(4, rng)
    assert hull_distance(s, 1.0, 4) == pytest.approx(scipy_hull_distance(s, 1.0, 4), abs=1e-7)
    assert hull_distance(s, 2.5, 1) == pytest.approx(clip_excess(s.probs, 2.5), abs=1e-9)


# -- pipeline ---------------------------------------------------------------

def test_micro_pipeline_report():
    cfg = micro_pipeline_config()
    src = random_block_source(BlockSpec((3,) * 6, (2.0,) * 6), np.random.default_rng(0))
    out, rep = toy_pipeline(src, cfg)
    assert rep["holds"]
    assert rep["tau"] == cfg.baseline_blocks + 2 * sum(r.b for r in cfg.rounds)
    assert [s["rows"] for s in rep["stages"][:-1]] == [2, 1]
    again = PipelineConfig.from_json(cfg.to_json())
    assert toy_pipeline(src, again)[1] == rep
    with pytest.raises(ValueError, match="'rounds'"):
        PipelineConfig.from_json({"baseline": {}, "post": {}})


def test_pipeline_block_accounting():
    cfg = micro_pipeline_config()
    src = random_block_source(BlockSpec((3,) * 5, (2.0,) * 5), np.random.default_rng(0))
    with pytest.raises(ValueError, match="insufficient blocks"):
        toy_pipeline(src, cfg)


def test_single_row_pipeline_is_a_chain():
    full = micro_pipeline_config()
    base = search_somewhere_condenser(6, 4, rows=1, w=2, ell=0.0, eps=0.0, trials=50,
                                      rng_seed=1, balanced=True)
    cfg = PipelineConfig(2, base, (), full.post)
    src = random_block_source(BlockSpec((3,) * 4, (2.0,) * 4), np.random.default_rng(1))
    out, rep = toy_pipeline(src, cfg)
    assert [s["stage"] for s in rep["stages"]] == ["baseline", "post"]
    # same map as the chain fed with the baseline output as its final block
    chain, _ = compose_chain(ChainConfig(cfg.post, (2, 0.0)))
    idx = np.arange(1 << 12)
    final = base.rows[0].table[idx & 63]
    table = chain.table[((idx >> 6) << 2) | final]
    assert np.allclose(push_forward(FunctionTable(12, 2, table), src.joint).probs, out.probs)

"""Shipped micro configurations and the recipes that rebuild them.

Run ``python3 -m entropy_forge.shipped`` to regenerate the JSON files under
``data/``. Large distributions are stored as seeded recipes rather than dense
probability vectors.
"""

from __future__ import annotations

import json
from importlib import resources

from .bitdist import Dist
from .blocks import BlockDist, BlockSpec
from .nonmal import NmCondenser, NmInstance, PipelineConfig, micro_pipeline_config, zero_error_nm
from .primitives import CondenserParams
from .rng import stream
from .sources import adversarial_nm_instance, random_block_source, random_source

NM_SEED = 5
PIPELINE_SEED = 2024
MC_POINT = {"n": 10, "k": 9, "ell": 6, "g": 1, "eps": 1 / 32,
            "trials": 10000, "seed": 10, "source_seed": 10}


def load(name: str) -> dict:
    return json.loads(resources.files("entropy_forge").joinpath("data", name).read_text())


# -- builders ---------------------------------------------------------------

def build_nm_suite() -> dict:
    c = zero_error_nm(n=3, w=3, m=2, g=2, eps1=2.0 ** -64, eps2=2.0 ** -64, rng_seed=NM_SEED)
    return {"condenser": c.to_json(),
            "instances": {"count": 50, "seed": NM_SEED, "cancel": [1.0, 0.5]}}


def build_pipeline() -> dict:
    return {"schedule": micro_pipeline_config(PIPELINE_SEED).to_json(),
            "source": {"t": 6, "n": 3, "k": 2, "seed": PIPELINE_SEED}}


def build_mc_point() -> dict:
    return dict(MC_POINT)


# -- loaders ----------------------------------------------------------------

def nm_instances(suite: dict) -> tuple[NmCondenser, list[NmInstance]]:
    c = NmCondenser.from_json(suite["condenser"])
    rec = suite["instances"]
    if isinstance(rec, list):
        return c, [NmInstance.from_json(obj) for obj in rec]
    cancel = rec.get("cancel", [1.0])
    out = [adversarial_nm_instance(c, stream(rec["seed"], i), good=1 + i % 2,
                                   cancel=cancel[i % len(cancel)])
           for i in range(rec["count"])]
    return c, out


def pipeline_source(rec: dict) -> BlockDist:
    for key in ("t", "n", "k", "seed"):
        if key not in rec:
            raise ValueError("source recipe is missing field '%s'" % key)
    t, n, k = int(rec["t"]), int(rec["n"]), float(rec["k"])
    return random_block_source(BlockSpec((n,) * t, (k,) * t), stream(int(rec["seed"])))


def pipeline(obj: dict | None = None) -> tuple[PipelineConfig, BlockDist]:
    obj = load("micro_pipeline.json") if obj is None else obj
    for key in ("schedule", "source"):
        if key not in obj:
            raise ValueError("pipeline file is missing field '%s'" % key)
    return PipelineConfig.from_json(obj["schedule"]), pipeline_source(obj["source"])


def mc_params(point: dict) -> CondenserParams:
    for key in ("n", "k", "ell", "g", "eps"):
        if key not in point:
            raise ValueError("parameter point is missing field '%s'" % key)
    k, ell, g = float(point["k"]), float(point["ell"]), float(point["g"])
    m = k - ell + g
    if abs(m - round(m)) > 1e-12:
        raise ValueError("m = k - ell + g = %g must be an integer" % m)
    return CondenserParams(n=int(point["n"]), m=int(round(m)), k=k, kprime=k - ell,
                           eps=float(point["eps"]))


def mc_source(point: dict) -> Dist:
    return random_source(int(point["n"]), float(point["k"]), stream(int(point.get("source_seed", 0))))


def main():
    root = resources.files("entropy_forge").joinpath("data")
    for name, obj in (("nm_suite.json", build_nm_suite()),
                      ("micro_pipeline.json", build_pipeline()),
                      ("mc_point.json", build_mc_point())):
        with open(root.joinpath(name), "w") as fh:
            json.dump(obj, fh, indent=1)
            fh.write("\n")


if __name__ == "__main__":
    main()

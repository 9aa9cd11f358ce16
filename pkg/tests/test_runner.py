import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from simplexcf import Runner
from simplexcf.config import RunConfig
from simplexcf.exceptions import (
    RunnerUninitializedError,
    SchemaError,
    SpecViolationError,
)
from simplexcf.io import read_plan, sha256_file


@pytest.fixture
def config(tmp_path, credit_csv):
    return RunConfig(
        dataset=str(credit_csv),
        sensitive="Sex",
        outcome="Risk",
        output=str(tmp_path / "out"),
        workers=2,
    )


def read_manifest(runner):
    return json.loads((runner.output / "manifest.json").read_text(encoding="utf-8"))


@pytest.mark.asyncio
async def test_async_context_manager(config):
    runner = Runner(config)
    async with runner:
        assert runner._executor is not None
    assert runner._executor is None


@pytest.mark.asyncio
async def test_commands_need_the_context_manager(config):
    runner = Runner(config)
    with pytest.raises(RunnerUninitializedError):
        await runner.encode()
    with pytest.raises(RunnerUninitializedError):
        await runner.verify()


@pytest.mark.asyncio
async def test_encode(config):
    async with Runner(config) as runner:
        encoded = await runner.encode()
    assert sorted(encoded) == ["Purpose", "Risk"]

    frame = pd.read_csv(runner.output / "encoded.csv")
    assert "Purpose__equipment" in frame.columns
    assert "Sex__male" not in frame.columns
    assert np.allclose(frame[["Risk__bad", "Risk__good"]].sum(axis=1), 1.0)

    model = json.loads((runner.output / "model_Purpose.json").read_text())
    assert model["reference"] == "cars"
    assert model["features"][0] == "intercept"
    assert len(model["coefficients"]) == len(model["features"])

    manifest = read_manifest(runner)
    assert manifest["command"] == "encode"
    assert manifest["config_hash"] == config.digest()
    assert set(manifest["artifacts"]) == {
        "encoded.csv",
        "scores_Purpose.csv",
        "scores_Risk.csv",
        "model_Purpose.json",
        "model_Risk.json",
    }
    encoded_path = runner.output / "encoded.csv"
    assert manifest["artifacts"]["encoded.csv"] == sha256_file(encoded_path)


@pytest.mark.asyncio
async def test_gaussian_transport(config, credit_frame):
    config.transport.columns = ["Purpose"]
    async with Runner(config) as runner:
        summary = await runner.transport()
    moved = pd.read_csv(runner.output / "transport_Purpose.csv")
    assert len(moved) == (credit_frame["Sex"] == "female").sum()
    assert np.allclose(moved.sum(axis=1), 1.0)
    assert summary["Purpose"]["method"] == "gaussian"
    assert not (runner.output / "plan_Purpose.csv").exists()


@pytest.mark.asyncio
async def test_matching_transport_and_verify(config):
    config.transport.method = "matching"
    config.transport.columns = ["Purpose"]
    async with Runner(config) as runner:
        summary = await runner.transport()
        assert await runner.verify() == {"Purpose": True}
    means = summary["Purpose"]
    assert np.allclose(means["transported_mean"], means["target_mean"], atol=1e-9)

    plan = read_plan(runner.output / "plan_Purpose.csv")
    n0, n1 = plan.shape
    assert np.allclose(plan.sum(axis=0), n0 / n1)


@pytest.mark.asyncio
async def test_verify_flags_a_broken_plan(config):
    out = Path(config.output)
    out.mkdir(parents=True)
    broken = pd.DataFrame({"i": [0, 1], "j": [0, 0], "weight": [1.0, 0.5]})
    broken.to_csv(out / "plan_Broken.csv", index=False)
    async with Runner(config) as runner:
        assert await runner.verify() == {"Broken": False}


@pytest.mark.asyncio
async def test_verify_without_plans(config):
    async with Runner(config) as runner:
        assert await runner.verify() == {}


@pytest.mark.asyncio
async def test_pipeline(config, credit_frame):
    config.pipeline.steps = [
        {"name": "Purpose", "parents": ["Sex", "Age"], "transport": "matching"},
        {"name": "Amount", "kind": "numeric", "parents": ["Sex", "Purpose"]},
    ]
    async with Runner(config) as runner:
        frame = await runner.pipeline()
    assert (frame["Sex"] == "male").all()
    assert len(frame) == (credit_frame["Sex"] == "female").sum()

    written = pd.read_csv(runner.output / "counterfactual.csv")
    assert list(written.columns[-3:]) == [
        "Purpose__cars",
        "Purpose__equipment",
        "Purpose__other",
    ]
    assert (runner.output / "plan_Purpose.csv").exists()
    assert set(read_manifest(runner)["artifacts"]) == {
        "counterfactual.csv",
        "plan_Purpose.csv",
    }


@pytest.mark.asyncio
async def test_pipeline_is_reproducible(tmp_path, config):
    config.seed = 4
    config.seed_given = True
    config.pipeline.steps = [
        {"name": "Purpose", "parents": ["Sex"], "label_mode": "sample"}
    ]
    digests = []
    for run in ("first", "second"):
        config.output = str(tmp_path / run)
        async with Runner(config) as runner:
            await runner.pipeline()
        digests.append(sha256_file(runner.output / "counterfactual.csv"))
    assert digests[0] == digests[1]


@pytest.mark.asyncio
async def test_pipeline_rejects_a_bad_ordering(config):
    config.pipeline.steps = [{"name": "Purpose", "parents": ["Sex", "Risk"]}]
    async with Runner(config) as runner:
        with pytest.raises(SpecViolationError) as e:
            await runner.pipeline()
    assert len(e.value.violations) == 1
    assert not runner.output.exists()


@pytest.mark.asyncio
async def test_fit_dirichlet(config):
    config.transport.columns = ["Purpose"]
    async with Runner(config) as runner:
        fits = await runner.fit_dirichlet()
    assert set(fits["Purpose"]) == {0, 1}
    document = json.loads((runner.output / "dirichlet_Purpose.json").read_text())
    assert sorted(document["groups"]) == ["0", "1"]
    assert all(a > 0 for a in document["groups"]["0"]["alpha"])


@pytest.mark.asyncio
@pytest.mark.parametrize("what", ["points", "transport", "contours"])
async def test_plot(config, what):
    config.plot.what = what
    config.plot.resolution = 60
    async with Runner(config) as runner:
        path = await runner.plot()
    assert path.name == f"plot_{what}_Purpose.svg"
    svg = path.read_text(encoding="utf-8")
    assert svg.startswith("<?xml")
    assert ">equipment</text>" in svg


@pytest.mark.asyncio
async def test_plot_needs_three_categories(config):
    config.plot.column = "Risk"
    async with Runner(config) as runner:
        with pytest.raises(SchemaError):
            await runner.plot()

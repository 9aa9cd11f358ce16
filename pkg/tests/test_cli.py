import json

import numpy as np
import pandas as pd
import pytest

from simplexcf import __version__
from simplexcf.cli import build_parser, load_config, main


@pytest.fixture
def base(tmp_path, credit_csv):
    return {
        "dataset": str(credit_csv),
        "sensitive": "Sex",
        "outcome": "Risk",
        "output": str(tmp_path / "out"),
    }


def test_parser_reads_flags():
    args = build_parser().parse_args(
        ["transport", "--seed", "3", "--method", "matching", "--out", "x"]
    )
    assert args.command == "transport"
    assert args.seed == 3
    assert args.method == "matching"
    assert args.output == "x"


def test_flags_override_the_file(write_config, base):
    path = write_config({**base, "seed": 1, "transport": {"method": "gaussian"}})
    args = build_parser().parse_args(
        ["transport", "--config", str(path), "--method", "matching"]
    )
    config = load_config(args)
    assert config.seed == 1
    assert config.transport.method == "matching"


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["teleport"],
        ["encode", "--bogus"],
        ["transport", "--method", "predict"],
        ["plot", "--what", "pie"],
        ["encode", "--seed", "three"],
    ],
)
def test_usage_errors_exit_64(argv):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 64


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_encode_succeeds(write_config, base, tmp_path):
    assert main(["encode", "--config", str(write_config(base))]) == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["command"] == "encode"


def test_config_errors_exit_65(write_config, base, capsys):
    assert main(["encode", "--config", str(write_config({**base, "colour": 1}))]) == 65
    assert "colour: unknown key" in capsys.readouterr().err
    assert main(["transport", "--out", "x"]) == 65


def test_spec_violation_exits_65(write_config, base, tmp_path):
    steps = [{"name": "Purpose", "parents": ["Sex", "Risk"]}]
    path = write_config({**base, "pipeline": {"steps": steps}})
    assert main(["pipeline", "--config", str(path)]) == 65
    assert not (tmp_path / "out").exists()


def test_plot_of_a_binary_column_exits_65(write_config, base):
    path = write_config(base)
    assert main(["plot", "--config", str(path), "--column", "Risk"]) == 65


def test_empty_group_exits_2(tmp_path, write_config, base, credit_frame):
    female = tmp_path / "female.csv"
    credit_frame[credit_frame["Sex"] == "female"].to_csv(female, index=False)
    declared = {"Sex": {"kind": "categorical", "categories": ["female", "male"]}}
    path = write_config({**base, "dataset": str(female), "schema": declared})
    assert main(["pipeline", "--config", str(path)]) == 2


def test_verify_exit_codes(tmp_path, write_config, base):
    path = str(write_config({**base, "transport": {"method": "matching"}}))
    assert main(["verify", "--config", path]) == 0
    assert main(["transport", "--config", path]) == 0
    assert main(["verify", "--config", path]) == 0

    plan = tmp_path / "out" / "plan_Purpose.csv"
    triplets = pd.read_csv(plan)
    triplets.loc[0, "weight"] += 0.5
    triplets.to_csv(plan, index=False)
    assert main(["verify", "--config", path]) == 2


def test_encode_transport_plot(write_config, base, tmp_path):
    path = str(write_config({**base, "transport": {"method": "gaussian"}}))
    assert main(["encode", "--config", path]) == 0
    assert main(["transport", "--config", path]) == 0
    assert main(["plot", "--config", path, "--column", "Purpose"]) == 0

    out = tmp_path / "out"
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    purpose = summary["Purpose"]
    gap = np.abs(
        np.subtract(purpose["transported_mean"], purpose["target_mean"])
    ).max()
    assert gap < 0.02
    assert list(out.glob("plot_*_Purpose.svg"))

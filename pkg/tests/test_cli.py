import json
import math
from pathlib import Path

import numpy as np
import pytest

from heisenglass import cli, couplings, ladder, verify
from heisenglass.cli import ConfigError, ExperimentConfig


def _read_output(path: Path) -> tuple[dict, list[str]]:
    text = path.read_text()
    head, _, body = text.partition("\n")
    assert head.startswith("# ")
    lines = body.rstrip("\n").split("\n")
    return json.loads(head[2:]), lines


def test_spectrum_report_output(tmp_path):
    rc = cli.main(
        ["spectrum-report", "-L", "12", "-m", "2", "--samples", "2",
         "--seed", "3", "--out", str(tmp_path)]
    )
    assert rc == 0
    header, lines = _read_output(tmp_path / "spectrum_report.csv")
    assert header["command"] == "spectrum-report"
    assert header["sites"] == [12]
    assert "workers" not in header
    assert lines[0] == cli.REPORT_HEADER
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 2 * 66
    for sample in ("0", "1"):
        block = [r for r in rows if r[0] == sample]
        assert len(block) == 66
        # one fully promoted ladder per realization, one energy at S_J
        assert sum(r[6] == "1" for r in block) == 12
        assert sum(abs(float(r[3])) <= 1e-9 for r in block) == 1


def test_phase_diagram_worker_independence(tmp_path, monkeypatch):
    args = ["phase-diagram", "-L", "10", "-m", "2", "--samples", "3",
            "--sigmas", "0,1.5,inf", "--seed", "7"]
    assert cli.main(args + ["--out", str(tmp_path / "serial")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "pooled"), "--workers", "2"]) == 0
    monkeypatch.setenv(cli.WORKERS_ENV, "3")
    assert cli.main(args + ["--out", str(tmp_path / "env")]) == 0

    names = ["phase_sigma_0.csv", "phase_sigma_1.5.csv", "phase_sigma_inf.csv"]
    for name in names:
        serial = (tmp_path / "serial" / name).read_bytes()
        assert (tmp_path / "pooled" / name).read_bytes() == serial
        assert (tmp_path / "env" / name).read_bytes() == serial

    header, lines = _read_output(tmp_path / "serial" / "phase_sigma_inf.csv")
    assert header["sigma"] == "inf"
    assert lines[0] == cli.PHASE_HEADER
    assert len(lines) - 1 == 3 * 45
    header0, _ = _read_output(tmp_path / "serial" / "phase_sigma_0.csv")
    assert header0["sigma"] == 0


def test_scaling_random_promoted_outputs(tmp_path):
    args = ["scaling", "--target", "random-promoted", "-L", "8,12,16,24",
            "--samples", "150", "--seed", "5", "--pairs", "single",
            "--out", str(tmp_path)]
    assert cli.main(args) == 0
    header, lines = _read_output(tmp_path / "scaling_random-promoted.csv")
    assert lines[0] == cli.ensembles.MCEstimate.CSV_HEADER
    # two estimates per L plus four reference rows per L
    assert len(lines) - 1 == 4 * 2 + 4 * 4
    assert header["target"] == "random-promoted"

    fits = json.loads((tmp_path / "scaling_random-promoted_fits.json").read_text())
    mean_block = fits["fits"]["mean-concurrence"]
    prob_block = fits["fits"]["prob-positive-concurrence"]
    assert mean_block["family"] == "power-law"
    assert prob_block["family"] == "power-offset"
    assert mean_block["unweighted"]["converged"]
    assert mean_block["weighted"]["a"] > 0

    # byte-identical rerun
    again = tmp_path / "again"
    assert cli.main(args[:-1] + [str(again)]) == 0
    for name in ("scaling_random-promoted.csv", "scaling_random-promoted_fits.json"):
        assert (again / name).read_bytes() == (tmp_path / name).read_bytes()


def test_scaling_eigenstates_uses_saturation_family(tmp_path):
    rc = cli.main(
        ["scaling", "--target", "eigenstates", "--model", "nn", "-L", "8,9,10,11",
         "-m", "2", "--samples", "4", "--seed", "1", "--out", str(tmp_path)]
    )
    assert rc == 0
    fits = json.loads((tmp_path / "scaling_eigenstates_fits.json").read_text())
    assert fits["fits"]["prob-positive-concurrence"]["family"] == "exp-saturation"
    _, lines = _read_output(tmp_path / "scaling_eigenstates.csv")
    kinds = {line.split(",")[5] for line in lines[1:]}
    assert kinds == {"eigenstates-nearest-neighbour", "reference"}


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum-report", "-L", "10,12"],                        # one size only
        ["spectrum-report", "-L", "10", "-m", "0"],                # empty sector
        ["spectrum-report", "-L", "10", "-m", "10"],               # m must stay below L
        ["spectrum-report", "-L", "60", "-m", "5"],                # dense budget
        ["spectrum-report", "-L", "10", "--samples", "0"],
        ["spectrum-report", "-L", "10", "--seed", "-1"],
        ["spectrum-report", "-L", "10", "--sigma", "-0.5"],
        ["spectrum-report", "-L", "10", "--model", "pl"],          # pl needs sigma
        ["spectrum-report", "-L", "10", "--workers", "0"],
        ["phase-diagram", "-L", "10", "--sigmas", "1,1.0"],        # duplicate labels
        ["phase-diagram", "-L", "10", "--sigmas", "-2"],
        ["scaling", "--target", "random", "-L", "4,8,12,16", "--samples", "200"],
        ["scaling", "--target", "random", "-L", "8,12,16,24", "--samples", "50"],
        ["scaling", "--target", "random", "-L", "8,12,16,24", "--zero-sum"],
        ["scaling", "--target", "random-promoted", "-L", "2,8,12,16,24"],
        ["scaling", "--target", "eigenstates", "-L", "8,12,16,16"],
    ],
)
def test_bad_configuration_exits_two(argv, capsys):
    assert cli.main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_workers_env_must_be_integer(monkeypatch, capsys):
    monkeypatch.setenv(cli.WORKERS_ENV, "many")
    assert cli.main(["spectrum-report", "-L", "10"]) == 2
    assert cli.WORKERS_ENV in capsys.readouterr().err


def test_verify_command_passes(capsys):
    assert cli.main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "13/13 checks passed" in out
    assert "FAIL" not in out


def test_verify_negative_control():
    results = verify.run_checks(tamper="concurrence")
    failed = [name for name, ok, _ in results if not ok]
    assert failed == ["concurrence-wootters"]
    text = verify.report(results)
    assert "FAIL concurrence-wootters" in text
    with pytest.raises(ValueError):
        verify.run_checks(tamper="everything")


def test_parse_helpers():
    assert cli._parse_sigma("inf") == math.inf
    assert cli._parse_sigma("0.5") == 0.5
    assert cli._parse_int_list("8,12") == (8, 12)
    assert cli._parse_sigma_list("0,inf") == (0.0, math.inf)
    with pytest.raises(Exception):
        cli._parse_sigma("wide")
    with pytest.raises(Exception):
        cli._parse_int_list("8;12")
    assert cli.format_sigma(math.inf) == "inf"
    assert cli.format_sigma(0.0) == "0"
    assert cli.format_sigma(1.5) == "1.5"


def test_resolve_model_dispatch():
    assert isinstance(cli.resolve_model("ir", None), couplings.InfiniteRange)
    assert isinstance(cli.resolve_model("nn", None), couplings.NearestNeighbour)
    pl = cli.resolve_model("pl", 1.5)
    assert isinstance(pl, couplings.PowerLaw) and pl.sigma == 1.5
    assert isinstance(cli.resolve_model("pl", math.inf), couplings.NearestNeighbour)
    with pytest.raises(ConfigError):
        cli.resolve_model("pl", None)


def test_scoped_seed_is_stable_and_scope_sensitive():
    a = cli.scoped_seed(20260814, 8)
    assert a == cli.scoped_seed(20260814, 8)
    scopes = {cli.scoped_seed(20260814, L) for L in (8, 12, 16, 24, 32)}
    assert len(scopes) == 5


def test_reference_rows_pass_through():
    rows = {r.quantity: r for r in cli._reference_rows((10,))}
    bound = ladder.localized_promotion_bound(10)
    assert rows["bound-average-concurrence"].mean == bound.average_concurrence
    assert rows["bound-prob-positive"].mean == bound.probability
    assert rows["reference-promoted-concurrence"].mean == pytest.approx(0.0465)
    assert all(r.kind == "reference" and r.n_samples == 0 for r in rows.values())


def test_header_serializes_infinite_sigma():
    cfg = ExperimentConfig(command="phase-diagram", sigma=math.inf, sigmas=(0.0, math.inf))
    header = cfg.header()
    assert header["sigma"] == "inf"
    assert header["sigmas"] == [0.0, "inf"]
    json.dumps(header)  # must stay JSON-safe


def test_eigenstate_sample_matches_job_wrapper():
    model = couplings.InfiniteRange()
    direct = cli.eigenstate_sample(model, 8, 2, 11, 0)
    wrapped = cli._eigen_job((couplings.model_to_dict(model), 8, 2, 11, 0, None, ladder.LADDER_TOL))
    assert [r.csv_row() for r in direct] == [r.csv_row() for r in wrapped]
    assert [r.index for r in direct] == list(range(28))
    assert sum(r.promoted == 1 for r in direct) == 8

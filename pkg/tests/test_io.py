"""Deterministic file output: formatting, hashing, and the CSV writers."""

import math

import numpy as np
import pytest

from airylink import ChannelMatrix, MetricsRecord, SweepResult, build_codebook
from airylink.channels import GREENS_FREE_SPACE
from airylink.io import (
    fmt,
    scenario_hash,
    write_channel_csv,
    write_codebook_csv,
    write_field_cut_csv,
    write_intensity_map,
    write_metadata,
    write_sweep_csv,
    write_trace_csv,
)


def record(k: int = 2, rate: float = 3.5) -> MetricsRecord:
    coupling = 10.0 * np.log10(np.arange(1, k * k + 1, dtype=float).reshape(k, k))
    return MetricsRecord(condition_number=42.5, singular_values=(2.0, 0.5),
                         alpha_power=0.25, common_sinr_db=23.979400086721,
                         sum_rate=rate, coupling_db=coupling)


def tiny_sweep() -> SweepResult:
    return SweepResult(
        sweep_variable="x2_lambda",
        strategies=("trad_all", "airy_geo"),
        points=(
            (-2.0, {"trad_all": record(rate=1.0), "airy_geo": record(rate=2.0)}),
            (-1.0, {"trad_all": record(rate=3.0), "airy_geo": record(rate=4.0)}),
        ),
    )


class TestFmt:
    @pytest.mark.parametrize("value,text", [
        (True, "true"),
        (False, "false"),
        (math.inf, "inf"),
        (-math.inf, "-inf"),
        (1.0, "1"),
        (0.25, "0.25"),
        (1e-10, "1e-10"),
        (1.0107068735, "1.0107068735"),
        (123456789012345.0, "1.23456789012e+14"),
        (7, "7"),
        ("coarse", "coarse"),
    ])
    def test_cases(self, value, text):
        assert fmt(value) == text

    def test_nan(self):
        assert fmt(float("nan")) == "nan"


class TestScenarioHash:
    def test_is_short_hex(self, baseline_scenario):
        h = scenario_hash(baseline_scenario)
        assert len(h) == 12
        int(h, 16)  # must parse as hexadecimal

    def test_stable_across_calls(self, baseline_scenario):
        assert scenario_hash(baseline_scenario) == scenario_hash(baseline_scenario)

    def test_sensitive_to_every_field(self, shadow_scenario, lam):
        import dataclasses

        base = scenario_hash(shadow_scenario)
        variants = [
            dataclasses.replace(shadow_scenario, noise_power=2e-3),
            dataclasses.replace(shadow_scenario, tx_power=2.0e4),
            dataclasses.replace(shadow_scenario, rzf_epsilon=1e-9),
            shadow_scenario.without_obstacle(),
            shadow_scenario.with_users(
                (shadow_scenario.users[1], shadow_scenario.users[0])),
        ]
        hashes = {base} | {scenario_hash(v) for v in variants}
        assert len(hashes) == len(variants) + 1

    def test_ignores_extra_annotations(self, baseline_scenario):
        import dataclasses

        annotated = dataclasses.replace(baseline_scenario,
                                        extra={"note": "anything"})
        assert scenario_hash(annotated) == scenario_hash(baseline_scenario)


class TestWriteSweepCsv:
    def test_one_file_per_strategy(self, tmp_path, baseline_scenario):
        paths = write_sweep_csv(tmp_path, "demo", tiny_sweep(), baseline_scenario)
        assert [p.name for p in paths] == ["demo_trad_all.csv", "demo_airy_geo.csv"]
        for p in paths:
            assert p.exists()

    def test_header_and_rows(self, tmp_path, baseline_scenario):
        paths = write_sweep_csv(tmp_path, "demo", tiny_sweep(), baseline_scenario)
        lines = paths[0].read_text().splitlines()
        assert lines[0] == ("scenario,x2_lambda,kappa,sigma_max,sigma_min,"
                            "alpha_power,sinr_db,sum_rate,"
                            "coupling_db_11,coupling_db_12,"
                            "coupling_db_21,coupling_db_22")
        assert len(lines) == 3
        tag = scenario_hash(baseline_scenario)
        first = lines[1].split(",")
        assert first[0] == tag
        assert first[1] == "-2"
        assert first[2] == "42.5"
        assert first[7] == "1"  # trad_all rate at the first point

    def test_rewrite_is_byte_identical(self, tmp_path, baseline_scenario):
        a = write_sweep_csv(tmp_path / "a", "demo", tiny_sweep(), baseline_scenario)
        b = write_sweep_csv(tmp_path / "b", "demo", tiny_sweep(), baseline_scenario)
        for pa, pb in zip(a, b):
            assert pa.read_bytes() == pb.read_bytes()


class TestWriteChannelCsv:
    def test_interleaved_columns_and_sidecar(self, tmp_path, baseline_scenario):
        entries = np.array([[1 + 2j, 3 - 4j], [-0.5j, 0.25]], dtype=complex)
        m = ChannelMatrix(entries, model=GREENS_FREE_SPACE, kind="effective")
        path = tmp_path / "chan.csv"
        write_channel_csv(path, m, baseline_scenario)
        lines = path.read_text().splitlines()
        assert lines[0] == "h_1_re,h_1_im,h_2_re,h_2_im"
        assert lines[1] == "1,2,3,-4"
        assert lines[2] == "-0,-0.5,0.25,0"  # -0.5j has real part -0.0
        meta = (tmp_path / "chan.csv.meta").read_text()
        assert "[channel]" in meta
        assert f"scenario = {scenario_hash(baseline_scenario)}" in meta
        assert "kind = effective" in meta


class TestWriteIntensityMap:
    def test_matrix_and_sidecar(self, tmp_path, baseline_scenario, array64,
                                 grid_std, lam):
        from airylink import intensity_map, launch_aperture

        f = launch_aperture(np.ones(64, dtype=complex), array64, grid_std, lam)
        m = intensity_map(f, None, [100 * lam, 200 * lam], lam)
        path = tmp_path / "map.csv"
        write_intensity_map(path, m, baseline_scenario)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert len(lines[0].split(",")) == grid_std.nx
        meta = (tmp_path / "map.csv.meta").read_text()
        assert "[grid]" in meta and "[map]" in meta and "[depths]" in meta
        assert "rows = 2" in meta
        assert meta.count("z_m = ") == 2


class TestWriteTraceCsv:
    def test_columns_and_degrees(self, tmp_path, mixed_scenario):
        from airylink import SearchGrids, coarse_to_fine_search

        grids = SearchGrids(coarse_bending=(-25.0,), coarse_focal=(1.75,),
                            coarse_dtheta=(math.radians(0.5),))
        outcome = coarse_to_fine_search(mixed_scenario, grids)
        path = tmp_path / "trace.csv"
        write_trace_csv(path, outcome)
        lines = path.read_text().splitlines()
        assert lines[0] == "bending,focal_m,dtheta_deg,h11_power,feasible,rate,stage"
        assert len(lines) == 1 + outcome.evaluations
        cells = lines[1].split(",")
        assert cells[0] == "-25"
        assert cells[2] == "0.5"  # radians in the trace, degrees on disk
        assert cells[4] in ("true", "false")
        assert cells[6] == "coarse"


class TestWriteCodebookCsv:
    def test_phase_matrix(self, tmp_path, baseline_scenario):
        book = build_codebook(baseline_scenario, "trad_all")
        path = tmp_path / "book.csv"
        write_codebook_csv(path, book)
        lines = path.read_text().splitlines()
        assert lines[0] == "beam_1_phase_rad,beam_2_phase_rad"
        assert len(lines) == 1 + 64
        phase = float(lines[1].split(",")[0])
        # 12 significant digits on disk
        assert phase == pytest.approx(float(book.beams[0].phases[0]), abs=1e-11)


class TestWriteFieldCutCsv:
    def test_three_columns(self, tmp_path, mixed_opt_result):
        path = tmp_path / "cut.csv"
        write_field_cut_csv(path, mixed_opt_result.field_cut)
        lines = path.read_text().splitlines()
        assert lines[0] == "x_m,reference_db,tuned_db"
        assert len(lines) == 1 + len(mixed_opt_result.field_cut.xs)


class TestWriteMetadata:
    def test_exact_output(self, tmp_path):
        path = tmp_path / "run.meta"
        write_metadata(path, {
            "run": {"command": "demo", "points": 3, "ok": True},
            "depths": {"z_m": [1.0, 2.5]},
        })
        assert path.read_text() == (
            "[run]\n"
            "command = demo\n"
            "points = 3\n"
            "ok = true\n"
            "\n"
            "[depths]\n"
            "z_m = 1\n"
            "z_m = 2.5\n"
        )

    def test_unix_line_endings(self, tmp_path):
        path = tmp_path / "run.meta"
        write_metadata(path, {"a": {"k": 1}})
        assert b"\r" not in path.read_bytes()

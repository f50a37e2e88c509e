import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

import oracles as orc
from qrepsim import (
    ChannelModel,
    NoiseParams,
    RepeaterConfig,
    run_paper_circuit,
    run_repeater,
)
from qrepsim.harness import (
    CSV_HEADER,
    ExperimentSpec,
    default_spec,
    emit,
    load_spec,
    parse_rows_csv,
    render_rows_csv,
    render_rows_json,
    run_experiment,
)

REPO = Path(__file__).resolve().parent.parent
CONFIGS = REPO / "configs"


class TestChannelRows:
    def test_dephasing_column(self):
        spec = default_spec("channel", {"noise": NoiseParams(p_hop_dephase=0.1)})
        rows = run_experiment(spec)
        want = [1.0, 0.9, 0.82, 0.756, 0.7048, 0.66384, 0.631072]
        assert [r.sweep_value for r in rows] == [0, 1, 2, 3, 4, 5, 6]
        for row, f in zip(rows, want):
            assert row.fidelity_mean == pytest.approx(f, abs=1e-9)
            assert row.yield_mean == pytest.approx(1.0, abs=1e-15)
            assert row.fidelity_stderr == 0.0

    def test_yield_is_survival_probability(self):
        chan = ChannelModel(length_km=20.0, attenuation_length_km=20.0)
        spec = default_spec("channel", {"channel": chan, "sweep_values": (1, 2)})
        for row in run_experiment(spec):
            assert row.yield_mean == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_sampled_yield_concordance(self):
        chan = ChannelModel(length_km=20.0, attenuation_length_km=20.0)
        spec = default_spec(
            "channel",
            {"channel": chan, "sweep_values": (1,), "mode": "sampled", "trials": 5000},
        )
        row = run_experiment(spec)[0]
        p = math.exp(-1.0)
        assert abs(row.yield_mean - p) < 4.0 * math.sqrt(p * (1 - p) / 5000)
        assert row.yield_stderr > 0.0
        assert row.fidelity_stderr == 0.0  # transit is deterministic


class TestPurifyRows:
    def test_default_ladder_is_monotone(self):
        rows = run_experiment(default_spec("purify"))
        fids = [r.fidelity_mean for r in rows]
        assert fids[0] == pytest.approx(0.8841463414634146, abs=1e-12)
        assert fids[1] == pytest.approx(0.9256756756756757, abs=1e-12)
        assert fids[3] == pytest.approx(0.933377308707124, abs=1e-10)
        assert all(b > a for a, b in zip(fids, fids[1:]))
        assert fids[1] >= fids[0] > 0.85
        yields = [r.yield_mean for r in rows]
        assert all(b < a for a, b in zip(yields, yields[1:]))

    def test_dephased_input_kind(self):
        spec = default_spec(
            "purify",
            {"input_kind": "dephased", "initial_fidelity": 0.85, "sweep_values": (2,)},
        )
        row = run_experiment(spec)[0]
        assert row.fidelity_mean == pytest.approx(0.9697986577181208, abs=1e-12)
        assert row.yield_mean == pytest.approx(0.745, abs=1e-12)

    def test_sampled_concordance(self):
        exact = run_experiment(default_spec("purify", {"sweep_values": (2,)}))[0]
        spec = default_spec(
            "purify", {"sweep_values": (2,), "mode": "sampled", "trials": 3000}
        )
        row = run_experiment(spec)[0]
        p = exact.yield_mean
        assert abs(row.yield_mean - p) < 4.0 * math.sqrt(p * (1 - p) / 3000)
        assert abs(row.fidelity_mean - exact.fidelity_mean) < 4.0 * row.fidelity_stderr + 1e-9


class TestSwapRows:
    def test_iterated_swap_law(self):
        spec = default_spec("swap", {"initial_fidelity": 0.95})
        rows = run_experiment(spec)
        f = 0.95
        expect = {1: f}
        expect[2] = orc.swap_formula(f)
        expect[4] = orc.swap_formula(expect[2])
        expect[8] = orc.swap_formula(expect[4])
        for row in rows:
            assert row.fidelity_mean == pytest.approx(expect[row.sweep_value], abs=1e-11)
            assert row.yield_mean == pytest.approx(1.0, abs=1e-15)


class TestRepeaterRows:
    def test_rows_match_direct_calls(self):
        noise = NoiseParams(p_gate2=0.02, p_meas=0.02)
        spec = default_spec(
            "repeater",
            {"noise": noise, "initial_fidelity": 0.9, "sweep_values": (2, 4)},
        )
        rows = run_experiment(spec)
        for row in rows:
            rep = run_repeater(
                RepeaterConfig(
                    segments=int(row.sweep_value),
                    noise=noise,
                    initial_link_fidelity=0.9,
                )
            )
            assert row.fidelity_mean == pytest.approx(rep.final_fidelity, abs=1e-14)
            assert row.yield_mean == pytest.approx(rep.yield_fraction, abs=1e-14)

    def test_pairs_sweep(self):
        spec = default_spec(
            "repeater",
            {
                "sweep_param": "pairs_per_purification",
                "sweep_values": (1, 2, 3),
                "initial_fidelity": 0.9,
                "noise": NoiseParams(p_gate2=0.01),
            },
        )
        rows = run_experiment(spec)
        assert [r.sweep_value for r in rows] == [1, 2, 3]
        assert rows[1].fidelity_mean > rows[0].fidelity_mean


class TestPaperCircuitRows:
    def test_rows_match_direct_calls(self):
        noise = NoiseParams(p_hop_dephase=0.1)
        spec = default_spec("paper-circuit", {"noise": noise, "sweep_values": (1, 2)})
        rows = run_experiment(spec)
        for row in rows:
            res = run_paper_circuit(noise, ChannelModel(hops=int(row.sweep_value)))
            assert row.fidelity_mean == pytest.approx(res.fidelity, abs=1e-14)
            assert row.yield_mean == pytest.approx(res.yield_fraction, abs=1e-14)


class TestSpecValidation:
    @pytest.mark.parametrize(
        "overrides",
        [
            {"sweep_param": "hops"},  # illegal for purify
            {"sweep_values": ()},
            {"mode": "approximate"},
            {"trials": 0},
            {"seed": -1},
            {"input_kind": "bell"},
            {"out_format": "xml"},
            {"initial_fidelity": 1.2},
            {"sweep_values": (1,)},  # purify needs >= 2 pairs
            {"sweep_values": (2.5,)},
        ],
    )
    def test_bad_spec_rejected(self, overrides):
        with pytest.raises(ValueError):
            default_spec("purify", overrides)

    def test_unknown_experiment(self):
        with pytest.raises(ValueError):
            default_spec("teleport")
        with pytest.raises(ValueError):
            ExperimentSpec(experiment="teleport", sweep_param="hops", sweep_values=(1,))

    def test_negative_hops_rejected(self):
        with pytest.raises(ValueError):
            default_spec("channel", {"sweep_values": (-1,)})


class TestEmission:
    def _one_spec(self):
        return default_spec("swap", {"initial_fidelity": 0.85, "sweep_values": (2,)})

    def test_single_row_csv_has_two_lines(self):
        rows = run_experiment(self._one_spec())
        text = render_rows_csv(rows)
        lines = text.splitlines()
        assert len(lines) == 2
        assert lines[0] == CSV_HEADER
        assert lines[1].startswith("swap,segments,2,0.73,")

    def test_round_trip_preserves_ten_digits(self):
        rows = run_experiment(default_spec("purify"))
        back = parse_rows_csv(render_rows_csv(rows))
        assert len(back) == len(rows)
        for a, b in zip(rows, back):
            assert b.experiment == a.experiment
            assert b.sweep_param == a.sweep_param
            assert b.trials == a.trials
            assert b.seed == a.seed
            assert b.mode == a.mode
            assert b.fidelity_mean == float(f"{a.fidelity_mean:.10g}")
            assert b.yield_mean == float(f"{a.yield_mean:.10g}")

    def test_json_mirrors_csv_values(self):
        rows = run_experiment(self._one_spec())
        payload = json.loads(render_rows_json(rows))
        assert isinstance(payload, list) and len(payload) == 1
        rec = payload[0]
        assert rec["experiment"] == "swap"
        assert rec["fidelity_mean"] == 0.73
        assert set(rec) == set(CSV_HEADER.split(","))

    def test_emit_refuses_empty_rows(self, tmp_path):
        target = tmp_path / "out.csv"
        with pytest.raises(ValueError):
            emit([], "csv", str(target))
        assert not target.exists()

    def test_emit_writes_csv_and_json(self, tmp_path):
        rows = run_experiment(self._one_spec())
        csv_path = tmp_path / "t.csv"
        json_path = tmp_path / "t.json"
        emit(rows, "csv", str(csv_path))
        emit(rows, "json", str(json_path))
        assert csv_path.read_text().startswith(CSV_HEADER)
        assert json.loads(json_path.read_text())[0]["experiment"] == "swap"

    def test_parse_rejects_tampered_header(self):
        rows = run_experiment(self._one_spec())
        text = render_rows_csv(rows).replace("fidelity_mean", "fidelity")
        with pytest.raises(ValueError):
            parse_rows_csv(text)

    def test_parse_rejects_short_row(self):
        text = CSV_HEADER + "\nswap,segments,2,0.73\n"
        with pytest.raises(ValueError):
            parse_rows_csv(text)


class TestLoadSpec:
    def test_loads_every_canned_config(self):
        names = {
            "channel.ini": "channel",
            "purify.ini": "purify",
            "swap.ini": "swap",
            "repeater.ini": "repeater",
            "paper_circuit.ini": "paper-circuit",
        }
        for fname, experiment in names.items():
            spec = load_spec(str(CONFIGS / fname))
            assert spec.experiment == experiment

    def test_repeater_config_fields(self):
        spec = load_spec(str(CONFIGS / "repeater.ini"))
        assert spec.trials == 2000
        assert spec.seed == 7
        assert spec.noise.p_gate2 == 0.02
        assert spec.noise.p_meas == 0.02
        assert spec.initial_fidelity == 0.9
        assert spec.sweep_param == "segments"
        assert spec.sweep_values == (2, 4)

    def test_overrides_win(self):
        spec = load_spec(str(CONFIGS / "repeater.ini"), {"seed": 99, "mode": "sampled"})
        assert spec.seed == 99
        assert spec.mode == "sampled"

    def test_unknown_section_rejected(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[experiment]\nname = swap\n\n[tuning]\nknob = 1\n")
        with pytest.raises(ValueError, match="tuning"):
            load_spec(str(p))

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[experiment]\nname = swap\nspeed = fast\n")
        with pytest.raises(ValueError, match="speed"):
            load_spec(str(p))

    def test_missing_name_rejected(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[noise]\np_meas = 0.1\n")
        with pytest.raises(ValueError, match="experiment.name"):
            load_spec(str(p))

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            load_spec(str(tmp_path / "nope.ini"))

    def test_empty_values_rejected(self, tmp_path):
        p = tmp_path / "bad.ini"
        p.write_text("[experiment]\nname = swap\nvalues =\n")
        with pytest.raises(ValueError):
            load_spec(str(p))


class TestDeterminism:
    def test_sampled_run_renders_identically(self):
        spec = default_spec(
            "purify", {"sweep_values": (2, 3), "mode": "sampled", "trials": 400, "seed": 12}
        )
        a = render_rows_csv(run_experiment(spec))
        b = render_rows_csv(run_experiment(spec))
        assert a == b


class TestCli:
    def _run(self, *args, cwd=REPO):
        return subprocess.run(
            [sys.executable, "-m", "qrepsim", *args],
            capture_output=True,
            text=True,
            cwd=cwd,
        )

    def test_channel_config_to_stdout(self):
        proc = self._run("channel", "--config", str(CONFIGS / "channel.ini"))
        assert proc.returncode == 0, proc.stderr
        lines = proc.stdout.splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 8  # header + seven sweep values

    def test_defaults_without_config(self):
        proc = self._run("swap")
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout.startswith(CSV_HEADER)

    def test_out_file_and_json(self, tmp_path):
        target = tmp_path / "rows.json"
        proc = self._run(
            "purify",
            "--config", str(CONFIGS / "purify.ini"),
            "--out", str(target),
            "--format", "json",
        )
        assert proc.returncode == 0, proc.stderr
        assert proc.stdout == ""
        payload = json.loads(target.read_text())
        assert payload[0]["experiment"] == "purify"

    def test_config_subcommand_mismatch(self):
        proc = self._run("purify", "--config", str(CONFIGS / "channel.ini"))
        assert proc.returncode == 2
        assert "error:" in proc.stderr
        assert "channel" in proc.stderr

    def test_missing_config_file(self):
        proc = self._run("swap", "--config", "no/such/file.ini")
        assert proc.returncode == 2
        assert "error:" in proc.stderr

    def test_unknown_subcommand(self):
        proc = self._run("entangle")
        assert proc.returncode == 2

    def test_seed_flag_changes_sampled_output(self):
        base = ("purify", "--config", str(CONFIGS / "purify.ini"),
                "--mode", "sampled", "--trials", "200")
        a = self._run(*base, "--seed", "1")
        b = self._run(*base, "--seed", "1")
        c = self._run(*base, "--seed", "2")
        assert a.returncode == b.returncode == c.returncode == 0
        assert a.stdout == b.stdout
        assert a.stdout != c.stdout

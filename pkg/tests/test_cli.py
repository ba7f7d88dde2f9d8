import json

import numpy as np

import ftnetlab.cli as cli
from ftnetlab.activations import RELU
from ftnetlab.constructions import EMBEDDING_CSV_HEADER
from ftnetlab.models import FNNParams, RNNParams, load_model, model_to_dict, save_model


def _write_config(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _sample_fnn(rng):
    return FNNParams(2, 3, rng.standard_normal((3, 2)), rng.standard_normal(3),
                     rng.standard_normal(3), RELU)


def _sample_rnn(rng):
    return RNNParams(3, 2, rng.standard_normal((2, 3)),
                     0.3 * rng.standard_normal((2, 2)), rng.standard_normal(2),
                     rng.standard_normal(2), np.zeros(2), RELU)


class TestConvert:
    def test_fnn_to_fftnet(self, tmp_path, rng, capsys):
        save_model(tmp_path / "fnn.json", _sample_fnn(rng))
        cfg = _write_config(tmp_path, "c.json", {
            "in_model": str(tmp_path / "fnn.json"), "target": "fftnet",
            "mode": "zrelu", "out_model": "out.json", "probes": 20})
        rc = cli.main(["convert", "--config", cfg, "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0] == EMBEDDING_CSV_HEADER
        converted = load_model(tmp_path / "out.json")
        assert model_to_dict(converted)["kind"] == "fftnet"
        assert converted.H == max(3, 2 + 1)

    def test_rnn_header_width(self, tmp_path, rng, capsys):
        r = _sample_rnn(rng)
        save_model(tmp_path / "rnn.json", r)
        cfg = _write_config(tmp_path, "c.json", {
            "in_model": str(tmp_path / "rnn.json"), "target": "rftnet",
            "out_model": "out.json"})
        rc = cli.main(["convert", "--config", cfg, "--out", str(tmp_path)])
        assert rc == 0
        converted = json.loads((tmp_path / "out.json").read_text())
        assert converted["H"] == 2 * r.HR + r.I + 1

    def test_contract_breaking_model_rejected(self, tmp_path):
        # crnet with odd input dimension: parses, but violates the contract
        bad = {"kind": "crnet", "I": 3, "H": 1, "activation": "zrelu",
               "W_re": [[1.0]], "W_im": [[0.0]], "b_re": [0.0], "b_im": [0.0],
               "alpha_re": [1.0], "alpha_im": [0.0]}
        (tmp_path / "bad.json").write_text(json.dumps(bad))
        cfg = _write_config(tmp_path, "c.json", {
            "in_model": str(tmp_path / "bad.json"), "target": "fftnet",
            "out_model": "out.json"})
        assert cli.main(["convert", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_unsupported_pair(self, tmp_path, rng):
        save_model(tmp_path / "fnn.json", _sample_fnn(rng))
        cfg = _write_config(tmp_path, "c.json", {
            "in_model": str(tmp_path / "fnn.json"), "target": "rftnet",
            "out_model": "out.json"})
        assert cli.main(["convert", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_unparseable_model(self, tmp_path):
        (tmp_path / "junk.json").write_text("{not json")
        cfg = _write_config(tmp_path, "c.json", {
            "in_model": str(tmp_path / "junk.json"), "target": "fftnet",
            "out_model": "out.json"})
        assert cli.main(["convert", "--config", cfg, "--out", str(tmp_path)]) == 3

    def test_missing_config(self, tmp_path):
        assert cli.main(["convert", "--config", str(tmp_path / "nope.json")]) == 3


class TestVerify:
    def test_small_sweep_passes(self, tmp_path, capsys):
        cfg = _write_config(tmp_path, "v.json", {
            "seed": 5, "instances": 4, "probes": 10, "sequence_length": 4,
            "assemblies": 3})
        rc = cli.main(["verify", "--config", cfg, "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "verify.csv").read_text().strip().splitlines()
        assert lines[0] == EMBEDDING_CSV_HEADER
        assert len(lines) == 1 + 6 * 4 + 3

    def test_corrupted_construction_fails_with_replay(self, tmp_path, monkeypatch):
        import ftnetlab.constructions as cons

        original = cons.crnet_to_fftnet

        def corrupted(crn):
            p = original(crn)
            w = p.W.copy()
            w[0] *= -1.0  # sabotage one row
            return type(p)(p.I, p.H, w, p.V, p.alpha, p.activation)

        monkeypatch.setattr(cli.cons, "crnet_to_fftnet", corrupted)
        cfg = _write_config(tmp_path, "v.json", {
            "seed": 5, "instances": 3, "probes": 10,
            "pairs": ["crnet_to_fftnet"]})
        rc = cli.main(["verify", "--config", cfg, "--out", str(tmp_path)])
        assert rc == 1
        replays = list(tmp_path.glob("replay_crnet_to_fftnet_*.json"))
        assert replays
        payload = json.loads(replays[0].read_text())
        assert payload["model"]["kind"] == "crnet"

    def test_zero_tolerance_reports_rounding(self, tmp_path):
        cfg = _write_config(tmp_path, "v.json", {
            "seed": 5, "instances": 3, "probes": 10, "tolerance": 0.0,
            "pairs": ["crnet_to_fftnet"]})
        assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 1

    def test_unknown_pair_rejected(self, tmp_path):
        cfg = _write_config(tmp_path, "v.json", {"pairs": ["mlp_to_fftnet"]})
        assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_deterministic_csv(self, tmp_path):
        cfg = _write_config(tmp_path, "v.json", {
            "seed": 9, "instances": 3, "probes": 5, "sequence_length": 3,
            "assemblies": 2, "csv_name": "a.csv"})
        assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 0
        cfg2 = _write_config(tmp_path, "v2.json", {
            "seed": 9, "instances": 3, "probes": 5, "sequence_length": 3,
            "assemblies": 2, "csv_name": "b.csv"})
        assert cli.main(["verify", "--config", cfg2, "--out", str(tmp_path)]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestTrain:
    def test_sin_fit_loose_target(self, tmp_path):
        cfg = _write_config(tmp_path, "t.json", {
            "demo": "sin_fit", "H": 8, "samples": 64, "iters": 300,
            "target_mse": 0.05, "seed": 1})
        rc = cli.main(["train", "--config", cfg, "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "sin_fit_model.json").exists()
        trace = (tmp_path / "sin_fit_trace.jsonl").read_text().strip().splitlines()
        losses = [json.loads(l)["loss"] for l in trace]
        assert losses == sorted(losses, reverse=True)

    def test_unreachable_target(self, tmp_path):
        cfg = _write_config(tmp_path, "t.json", {
            "demo": "sin_fit", "H": 4, "samples": 32, "iters": 3,
            "target_mse": 1e-12, "seed": 1})
        rc = cli.main(["train", "--config", cfg, "--out", str(tmp_path)])
        assert rc == 1
        assert (tmp_path / "sin_fit_trace.jsonl").exists()

    def test_same_seed_byte_identical(self, tmp_path):
        for sub in ("a", "b"):
            cfg = _write_config(tmp_path, f"t{sub}.json", {
                "demo": "sin_fit", "H": 6, "samples": 32, "iters": 50,
                "target_mse": 0.05, "seed": 3})
            rc = cli.main(["train", "--config", cfg, "--out", str(tmp_path / sub)])
            assert rc in (0, 1)
        assert ((tmp_path / "a" / "sin_fit_trace.jsonl").read_bytes()
                == (tmp_path / "b" / "sin_fit_trace.jsonl").read_bytes())
        assert ((tmp_path / "a" / "sin_fit_model.json").read_bytes()
                == (tmp_path / "b" / "sin_fit_model.json").read_bytes())

    def test_dods_demo(self, tmp_path):
        cfg = _write_config(tmp_path, "t.json", {
            "demo": "dods_linear", "H": 12, "sequences": 16, "iters": 4000,
            "target_mse": 2e-2, "seed": 0})
        rc = cli.main(["train", "--config", cfg, "--out", str(tmp_path)])
        assert rc == 0
        summary = json.loads((tmp_path / "dods_linear_summary.json").read_text())
        assert summary["reached"]

    def test_unknown_demo(self, tmp_path):
        cfg = _write_config(tmp_path, "t.json", {"demo": "mnist"})
        assert cli.main(["train", "--config", cfg, "--out", str(tmp_path)]) == 2


class TestProbe:
    def test_small_campaign(self, tmp_path):
        cfg = _write_config(tmp_path, "p.json", {
            "n": 3, "I": 4, "instances": 6, "case2_instances": 3,
            "delta": 0.1, "seed": 2})
        rc = cli.main(["probe", "--config", cfg, "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "probe.csv").read_text().strip().splitlines()
        assert lines[0] == cli.PROBE_CSV_HEADER
        assert len(lines) == 7
        cases = {line.split(",")[1] for line in lines[1:]}
        assert cases == {"alpha_nonzero", "alpha_zero"}
        assert all(line.split(",")[5] == "true" for line in lines[1:])
        jsonl = (tmp_path / "probe_results.jsonl").read_text().strip().splitlines()
        assert len(jsonl) == 6
        first = json.loads(jsonl[0])
        assert first["found"] and "deltaZ_re" in first

    def test_oversized_sample_count_rejected(self, tmp_path):
        cfg = _write_config(tmp_path, "p.json", {"n": 9, "I": 4})
        assert cli.main(["probe", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_zero_loss_instances_filtered_with_note(self, tmp_path, monkeypatch, capsys):
        calls = {"count": 0}
        real = cli.empirical_loss

        def mostly_zero(p, data, spec):
            calls["count"] += 1
            return 0.0 if calls["count"] == 1 else real(p, data, spec)

        monkeypatch.setattr(cli, "empirical_loss", mostly_zero)
        cfg = _write_config(tmp_path, "p.json", {
            "n": 2, "I": 3, "instances": 3, "case2_instances": 0, "seed": 4})
        rc = cli.main(["probe", "--config", cfg, "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "filtered out" in out
        lines = (tmp_path / "probe.csv").read_text().strip().splitlines()
        assert len(lines) == 3  # header + 2 surviving instances

    def test_unknown_key_rejected(self, tmp_path):
        cfg = _write_config(tmp_path, "p.json", {"n": 2, "I": 4, "gpu": True})
        assert cli.main(["probe", "--config", cfg, "--out", str(tmp_path)]) == 2


class TestReport:
    def test_report_from_verify(self, tmp_path):
        vcfg = _write_config(tmp_path, "v.json", {
            "seed": 5, "instances": 3, "probes": 5, "sequence_length": 3,
            "assemblies": 2})
        assert cli.main(["verify", "--config", vcfg, "--out", str(tmp_path)]) == 0
        rcfg = _write_config(tmp_path, "r.json", {
            "verify_csv": str(tmp_path / "verify.csv")})
        assert cli.main(["report", "--config", rcfg, "--out", str(tmp_path)]) == 0
        text = (tmp_path / "report.md").read_text()
        assert "max{H_F, I+1}" in text
        assert "2H_R + I + 1" in text
        assert "NOT-VERIFIED" in text

    def test_missing_input(self, tmp_path):
        rcfg = _write_config(tmp_path, "r.json", {
            "verify_csv": str(tmp_path / "nothing.csv")})
        assert cli.main(["report", "--config", rcfg, "--out", str(tmp_path)]) == 3


class TestConfigValidation:
    def test_unknown_command_key(self):
        assert cli.validate_config("verify", {"instances": 3, "cuda": 1})

    def test_missing_required(self):
        assert cli.validate_config("convert", {"in_model": "x"})

    def test_clean_config(self):
        assert cli.validate_config("probe", {"n": 2, "I": 3}) == []


def test_thread_env_capping(monkeypatch):
    monkeypatch.setenv("FTNET_LAB_THREADS", "4")
    assert cli._threads() == 4
    monkeypatch.setenv("FTNET_LAB_THREADS", "bogus")
    assert cli._threads() == 1


def test_threaded_sweep_matches_serial(monkeypatch):
    reports_serial, _ = cli.run_embedding_sweep("fnn_to_fftnet_zrelu", 3, 6, 10)
    monkeypatch.setenv("FTNET_LAB_THREADS", "3")
    reports_threaded, _ = cli.run_embedding_sweep("fnn_to_fftnet_zrelu", 3, 6, 10)
    assert [r.csv_row() for r in reports_serial] == [r.csv_row() for r in reports_threaded]

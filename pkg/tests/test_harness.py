import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kpzlab import records as rec
from kpzlab.cli import main as cli_main
from kpzlab.environment import WeightOracle, env_stats, parse_env_spec, split_seed
from kpzlab.gue import normal_reference
from kpzlab.harness import (CHUNK, ExperimentConfig, run_analyze, run_couple,
                            run_simulate, run_verify)
from kpzlab.lattice import compute_S


def small_config(out, **kw):
    base = dict(env="beta:1,1", n_list=(50,), a=0.3, replicas=5, seed=7,
                workers=1, out=str(out))
    base.update(kw)
    return ExperimentConfig(**base)


class TestRecords:
    def test_canonical_json_stable(self):
        assert (rec.canonical_json({"b": 1, "a": [1.5, 2]})
                == '{"a":[1.5,2],"b":1}')

    def test_config_hash_ignores_key_order(self):
        assert rec.config_hash({"x": 1, "y": 2}) == rec.config_hash(
            {"y": 2, "x": 1})

    @given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50))
                    .map(lambda p: [min(p), max(p) + 1]), max_size=20))
    @settings(max_examples=60, deadline=None)
    def test_merge_ranges_preserves_membership(self, ranges):
        merged = rec._merge_ranges([list(r) for r in ranges])
        member = set()
        for lo, hi in ranges:
            member.update(range(lo, hi))
        merged_member = set()
        for lo, hi in merged:
            merged_member.update(range(lo, hi))
        assert merged_member == member
        # disjoint and sorted
        for (a1, b1), (a2, b2) in zip(merged, merged[1:]):
            assert b1 < a2

    def test_manifest_roundtrip(self, tmp_path):
        out = str(tmp_path / "r.jsonl")
        m = rec.RunManifest("abc", "build", 10)
        m.mark(100, 0, 4)
        m.mark(100, 4, 8)
        m.save(out)
        back = rec.RunManifest.load(out)
        assert back.completed == {"100": [[0, 8]]}
        assert back.is_done(100, 2, 6)
        assert not back.is_done(100, 6, 10)
        assert back.count_completed() == 8

    def test_finalize_sorts_and_drops_partial(self, tmp_path):
        out = str(tmp_path / "r.jsonl")
        rows = [{"n": 10, "index": 1, "v": "b"}, {"n": 5, "index": 3, "v": "a"},
                {"n": 10, "index": 0, "v": "c"}]
        rec.append_partial(out, rows)
        rec.finalize(out, {"h": 1}, rows)
        assert not os.path.exists(rec.partial_path(out))
        header, back = rec.read_records(out)
        assert header == {"h": 1}
        assert [(r["n"], r["index"]) for r in back] == [(5, 3), (10, 0), (10, 1)]

    def test_read_empty_rejected(self, tmp_path):
        p = tmp_path / "empty.jsonl"
        p.write_text("")
        with pytest.raises(ValueError):
            rec.read_records(str(p))


class TestRunSimulate:
    def test_single_replica_matches_pointwise(self, tmp_path):
        out = str(tmp_path / "r.jsonl")
        config = small_config(out, n_list=(10,), replicas=1)
        run_simulate(config)
        _, rows = rec.read_records(out)
        assert len(rows) == 1
        r = rows[0]
        k = int(math.floor(10 ** 0.3))  # = 2
        assert r["target"] == [10, k]
        oracle = WeightOracle(parse_env_spec("beta:1,1"),
                              int(split_seed(7, 0)))
        assert r["S"] == pytest.approx(compute_S(oracle, (0, 0), (10, k)),
                                       rel=1e-12)

    def test_smoke_run_sandwich(self, tmp_path):
        out = str(tmp_path / "r.jsonl")
        run_simulate(small_config(out, n_list=(1000,), replicas=100))
        report = run_verify(env="beta:1,1", envs_per_family=1, max_steps=4,
                            sandwich_instances=100, records_path=out)
        assert report["checks"]["stored_records_sandwich"]["checked"] == 100
        assert not report["failed"]

    def test_worker_independence_bytes(self, tmp_path):
        outs = []
        for w in (1, 2):
            out = str(tmp_path / f"r{w}.jsonl")
            run_simulate(small_config(out, replicas=2 * CHUNK + 3, workers=w))
            outs.append(open(out, "rb").read())
        assert outs[0] == outs[1]

    def test_fixed_k_mode_records(self, tmp_path):
        out = str(tmp_path / "r.jsonl")
        run_simulate(small_config(out, mode="fixed_k", k=1, replicas=3))
        _, rows = rec.read_records(out)
        # k = 1 spans a single vertex row: transverse displacement 0.
        assert rows[0]["target"] == [50, 0]
        assert "t1ii" in rows[0]

    def test_landscape_mode_records(self, tmp_path):
        out = str(tmp_path / "r.jsonl")
        config = small_config(out, mode="landscape", n_list=(200,), a=0.25,
                              replicas=3, pairs=((0, 0, 0, 1), (0, 0, 1, 1)))
        run_simulate(config)
        _, rows = rec.read_records(out)
        assert len(rows) == 6
        assert {r["pair_index"] for r in rows} == {0, 1}
        assert all("sna" in r for r in rows)

    def test_resume_after_interruption(self, tmp_path, monkeypatch):
        import kpzlab.harness as hmod
        out_full = str(tmp_path / "full.jsonl")
        config_full = small_config(out_full, replicas=3 * CHUNK)
        run_simulate(config_full)

        out_int = str(tmp_path / "int.jsonl")
        config_int = small_config(out_int, replicas=3 * CHUNK)
        real_task = hmod._run_task
        calls = {"n": 0}

        def flaky(args):
            calls["n"] += 1
            if calls["n"] > 1:
                raise KeyboardInterrupt
            return real_task(args)

        monkeypatch.setattr(hmod, "_run_task", flaky)
        with pytest.raises(KeyboardInterrupt):
            run_simulate(config_int)
        monkeypatch.setattr(hmod, "_run_task", real_task)
        assert not os.path.exists(out_int)  # not finalized yet
        run_simulate(config_int, resume=True)
        assert open(out_int, "rb").read().replace(b"int.jsonl", b"") == \
            open(out_full, "rb").read().replace(b"full.jsonl", b"")

    def test_resume_config_mismatch(self, tmp_path, monkeypatch):
        out = str(tmp_path / "r.jsonl")
        run_simulate(small_config(out))
        with pytest.raises(ValueError, match="different config"):
            run_simulate(small_config(out, seed=8), resume=True)

    def test_argument_guards(self, tmp_path):
        with pytest.raises(ValueError):
            run_simulate(small_config(tmp_path / "x", replicas=0))
        with pytest.raises(ValueError):
            run_simulate(ExperimentConfig(env="beta:1,1", n_list=(10,)))


class TestRunVerify:
    def test_battery_clean(self):
        report = run_verify(envs_per_family=2, max_steps=5,
                            sandwich_instances=200)
        assert not report["failed"]
        assert report["checks"]["dp_vs_brute_force"]["violations"] == 0
        assert report["checks"]["sandwich"]["violations"] == 0
        assert report["checks"]["superadditivity"]["violations"] == 0
        assert report["checks"]["coupling_domination"]["violations"] == 0

    def test_corrupted_record_detected(self, tmp_path):
        out = str(tmp_path / "r.jsonl")
        run_simulate(small_config(out))
        header, rows = rec.read_records(out)
        rows[0]["S"] = rows[0]["G"] + 1000.0  # push above the entropy bound
        with open(out, "w") as fh:
            fh.write(rec.canonical_json(header) + "\n")
            for r in rows:
                fh.write(rec.canonical_json(r) + "\n")
        report = run_verify(env="beta:1,1", envs_per_family=1, max_steps=3,
                            sandwich_instances=100, records_path=out)
        assert report["failed"]
        assert report["checks"]["stored_records_sandwich"]["violations"] == 1


class TestRunCouple:
    def test_small_run_no_violations(self):
        config = ExperimentConfig(env="logpareto:3,1", n_list=(100, 300),
                                  a=0.3, replicas=3, seed=1, couple_t=1.0,
                                  couple_origins=4)
        summary = run_couple(config)
        assert not summary["failed"]
        assert len(summary["per_n"]) == 2
        assert all(e["ratio"] > 0 for e in summary["per_n"])
        assert summary["p"] == 3.0

    def test_axis_only_region(self):
        # a small enough that floor(t*k) can be 0: degenerate but legal
        config = ExperimentConfig(env="beta:1,1", n_list=(50,), a=0.05,
                                  replicas=2, seed=3, couple_t=1.0,
                                  couple_origins=2)
        summary = run_couple(config)
        assert not summary["failed"]


class TestRunAnalyze:
    def test_null_calibration(self, tmp_path):
        # Records whose statistic is drawn from the reference itself.
        ref = normal_reference(10_000, 3)
        ref_path = str(tmp_path / "ref.jsonl")
        ref.save(ref_path)
        rows = [{"index": i, "n": 100, "t1ii": float(v)}
                for i, v in enumerate(np.random.default_rng(4)
                                      .standard_normal(10_000))]
        out = str(tmp_path / "r.jsonl")
        rec.finalize(out, {"config": {"mode": "fixed_k"}, "config_hash": "x"},
                     rows)
        summary = run_analyze(out, ref_path, "t1ii", threshold=0.02)
        assert summary["passed"]
        assert summary["per_n"][0]["ks"] <= 0.02

    def test_empty_records_rejected(self, tmp_path):
        out = str(tmp_path / "r.jsonl")
        rec.finalize(out, {"config": {}}, [])
        with pytest.raises(ValueError, match="no records"):
            run_analyze(out, None, "t1i")

    def test_missing_statistic_rejected(self, tmp_path):
        out = str(tmp_path / "r.jsonl")
        run_simulate(small_config(out))
        with pytest.raises(ValueError, match="not generated"):
            run_analyze(out, None, "t1ii")

    def test_csv_output(self, tmp_path):
        out = str(tmp_path / "r.jsonl")
        run_simulate(small_config(out, replicas=40))
        csv = str(tmp_path / "q.csv")
        summary = run_analyze(out, None, "t1i", csv_out=csv)
        assert summary["passed"] is None
        lines = open(csv).read().splitlines()
        assert lines[0] == "n,quantile,statistic,reference"
        assert len(lines) == 1 + 99


class TestCli:
    def test_usage_error_exit_1(self, capsys):
        with pytest.raises(SystemExit) as ei:
            cli_main(["simulate", "--n", "abc"])
        assert ei.value.code == 1

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as ei:
            cli_main(["frobnicate"])
        assert ei.value.code == 1

    def test_bad_env_exit_1(self, tmp_path, capsys):
        code = cli_main(["simulate", "--env", "nonsense", "--out",
                         str(tmp_path / "r.jsonl")])
        assert code == 1

    def test_simulate_and_analyze_roundtrip(self, tmp_path, capsys):
        out = str(tmp_path / "r.jsonl")
        assert cli_main(["simulate", "--env", "beta:1,1", "--n", "50",
                         "--replicas", "5", "--seed", "1", "--out", out]) == 0
        ref = str(tmp_path / "ref.jsonl")
        assert cli_main(["gue", "--kind", "normal", "--samples", "2000",
                         "--seed", "2", "--out", ref]) == 0
        summary_path = str(tmp_path / "s.json")
        code = cli_main(["analyze", "--records", out, "--reference", ref,
                         "--statistic", "t1i", "--out", summary_path])
        assert code == 0
        assert json.load(open(summary_path))["statistic"] == "t1i"

    def test_analyze_threshold_failure_exit_2(self, tmp_path, capsys):
        out = str(tmp_path / "r.jsonl")
        cli_main(["simulate", "--env", "beta:1,1", "--n", "50",
                  "--replicas", "30", "--seed", "1", "--out", out])
        ref = str(tmp_path / "ref.jsonl")
        # A reference far from the statistic's law: shifted normal.
        shifted = normal_reference(2000, 5)
        shifted.samples = shifted.samples + 50.0
        shifted.save(ref)
        code = cli_main(["analyze", "--records", out, "--reference", ref,
                         "--statistic", "t1i", "--threshold", "0.5"])
        assert code == 2

    def test_verify_corrupted_exit_2(self, tmp_path, capsys):
        out = str(tmp_path / "r.jsonl")
        cli_main(["simulate", "--env", "beta:1,1", "--n", "50",
                  "--replicas", "3", "--seed", "1", "--out", out])
        header, rows = rec.read_records(out)
        rows[0]["S"] = rows[0]["G"] + 999.0
        with open(out, "w") as fh:
            fh.write(rec.canonical_json(header) + "\n")
            for r in rows:
                fh.write(rec.canonical_json(r) + "\n")
        code = cli_main(["verify", "--env", "beta:1,1",
                         "--envs-per-family", "1", "--max-steps", "3",
                         "--sandwich-instances", "100", "--records", out])
        assert code == 2

    def test_couple_smoke(self, tmp_path, capsys):
        code = cli_main(["couple", "--env", "beta:1,1", "--n", "100",
                         "--replicas", "2", "--origins", "2",
                         "--out", str(tmp_path / "c.json")])
        assert code == 0

    def test_landscape_smoke(self, tmp_path, capsys):
        out = str(tmp_path / "r.jsonl")
        code = cli_main(["landscape", "--env", "beta:1,1", "--n", "200",
                         "--a", "0.25", "--replicas", "3",
                         "--pairs", "0,0,0,1;0,0,1,1", "--out", out])
        assert code == 0
        _, rows = rec.read_records(out)
        assert len(rows) == 6

    def test_workers_env_var(self, monkeypatch):
        from kpzlab.harness import default_workers
        monkeypatch.setenv("KPZLAB_WORKERS", "3")
        assert default_workers() == 3
        monkeypatch.delenv("KPZLAB_WORKERS")
        assert default_workers() == 1

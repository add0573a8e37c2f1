import json
import random

import numpy as np
import pytest

from quadindec.indec_engine import JSON_KEYS, analyze
from quadindec.quad_core import is_squarefree
from quadindec.scanner import (
    ScanConfig, scan, scan_records, sieve_squarefree, summarize_file, work_segment,
)


def test_sieve_small():
    mask = sieve_squarefree(2, 20)
    assert (np.flatnonzero(mask) + 2).tolist() == [2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19]


def test_sieve_known_values():
    assert sieve_squarefree(25982, 25983)[0]
    assert sieve_squarefree(715460, 715463).tolist() == [False, True, True] == [
        is_squarefree(d) for d in (715460, 715461, 715462)]


def test_sieve_matches_trial_division():
    rng = random.Random(3)
    for _ in range(5):
        lo = rng.randrange(1, 10 ** 11)
        mask = sieve_squarefree(lo, lo + 3000)
        assert mask.tolist() == [is_squarefree(d) for d in range(lo, lo + 3000)]


def test_sieve_window_guard():
    with pytest.raises(ValueError):
        sieve_squarefree(1, 1 + (1 << 20) + 1)


def test_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(1, 10)
    with pytest.raises(ValueError):
        ScanConfig(10, 5)
    with pytest.raises(ValueError):
        ScanConfig(2, 10, jobs=0)
    with pytest.raises(ValueError):
        ScanConfig(2, 10, classes=(4,))


def test_segment_env(monkeypatch):
    monkeypatch.setenv("QUADINDEC_SEGMENT", "1234")
    assert work_segment() == 1234
    assert ScanConfig(2, 10).segment == 1234
    monkeypatch.delenv("QUADINDEC_SEGMENT")
    assert work_segment() == 1 << 16


def test_no_counterexamples_below_100():
    s = scan(ScanConfig(2, 100))
    assert s.counts == (0, 0, 0, 0)
    assert s.processed == sum(1 for d in range(2, 101) if is_squarefree(d) and d % 4)


def test_minimal_counterexamples_below_50000(tmp_path):
    out = tmp_path / "hits.jsonl"
    s = scan(ScanConfig(2, 50000, only_counterexamples=True, out_path=str(out)))
    hits = [json.loads(ln) for ln in out.read_text().splitlines()]
    Ds = [h["D"] for h in hits]
    assert {12441, 25982, 46559} <= set(Ds)
    assert min(Ds) == 12441
    assert s.minimal == {"cls1_corrected": 12441, "cls2": 25982, "cls3": 46559}
    for h in hits:
        assert list(h) == list(JSON_KEYS)
        assert analyze(h["D"]).to_json() == h


def _run(tmp_path, name, **kw):
    out = tmp_path / name
    cfg = ScanConfig(2, 30000, segment=2500, out_path=str(out), **kw)
    summary = scan(cfg)
    return out.read_bytes(), summary


def test_jobs_do_not_change_output(tmp_path):
    one, s1 = _run(tmp_path, "a.jsonl", jobs=1)
    two, s2 = _run(tmp_path, "b.jsonl", jobs=2)
    assert one == two
    assert s1 == s2


class _Killed(Exception):
    pass


def test_resume_matches_uninterrupted(tmp_path):
    full, _ = _run(tmp_path, "full.jsonl", max_period=40)
    out = tmp_path / "part.jsonl"
    cfg = ScanConfig(2, 30000, segment=2500, out_path=str(out), max_period=40)

    def die(done, total):
        if done == 5:
            raise _Killed

    with pytest.raises(_Killed):
        scan(cfg, progress=die)
    # a torn write past the checkpoint must be discarded
    with open(out, "a") as fh:
        fh.write('{"D": 99999, "cls"')
    with open(cfg.sidecar, "a") as fh:
        fh.write("29999\n")
    assert json.loads(cfg.ckpt.read_text())["last_complete_segment"] == 4
    scan(cfg, resume=True)
    assert out.read_bytes() == full
    assert cfg.sidecar.read_bytes() == (tmp_path / "full.jsonl.skipped").read_bytes()


def test_resume_rejects_other_config(tmp_path):
    out = tmp_path / "x.jsonl"
    scan(ScanConfig(2, 3000, segment=1000, out_path=str(out)))
    with pytest.raises(ValueError):
        scan(ScanConfig(2, 4000, segment=1000, out_path=str(out)), resume=True)


def test_skipped_sidecar(tmp_path):
    out = tmp_path / "cap.jsonl"
    s = scan(ScanConfig(2, 3000, max_period=8, out_path=str(out)))
    skipped = [int(x) for x in (tmp_path / "cap.jsonl.skipped").read_text().split()]
    assert skipped and s.skipped == len(skipped)
    emitted = {json.loads(ln)["D"] for ln in out.read_text().splitlines()}
    assert not emitted & set(skipped)
    assert all(analyze(D).s > 8 for D in skipped[:50])
    assert s.processed == len(emitted)


def test_csv_output(tmp_path):
    out = tmp_path / "r.csv"
    scan(ScanConfig(12000, 13000, out_path=str(out), fmt="csv"))
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(JSON_KEYS)
    row = next(ln for ln in lines if ln.startswith("12441,"))
    assert row.split(",")[3:6] == ["29", "29", "103"]
    assert "429/4" in row and "true" in row
    s = summarize_file(out)
    assert s.counts == (0, 1, 0, 0)


def test_scan_records_in_order():
    Ds = [r.D for r in scan_records(ScanConfig(2, 5000, segment=700, jobs=2))]
    assert Ds == sorted(Ds)
    assert len(Ds) == sum(1 for d in range(2, 5001) if is_squarefree(d) and d % 4)


def test_class_filter():
    recs = list(scan_records(ScanConfig(2, 2000, classes=(2,))))
    assert recs and all(r.cls == 2 for r in recs)

"""Exhaustive counterexample search over ranges of squarefree D.

The range is cut into fixed work units (segments).  Workers analyse whole
segments; the parent process writes their results strictly in segment order,
so the output does not depend on the number of jobs.  After each segment the
output is flushed and the checkpoint replaced atomically.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import multiprocessing as mp
import os
from dataclasses import asdict, dataclass, field
from math import isqrt
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .cf_engine import PeriodLimitExceeded
from .indec_engine import JSON_KEYS, AnalysisRecord, analyze_fast
from .kernel import NUMBA_D_LIMIT

__all__ = [
    "ScanConfig",
    "ScanSummary",
    "sieve_squarefree",
    "scan",
    "scan_records",
    "summarize",
    "summarize_file",
    "SIEVE_SEGMENT",
    "WORK_SEGMENT",
]

log = logging.getLogger(__name__)

SIEVE_SEGMENT = 1 << 20
WORK_SEGMENT = 1 << 16


def work_segment() -> int:
    env = os.environ.get("QUADINDEC_SEGMENT")
    if env:
        size = int(env)
        if size < 1:
            raise ValueError("QUADINDEC_SEGMENT must be positive")
        return size
    return WORK_SEGMENT


def _small_primes(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    mark = np.ones(limit + 1, dtype=bool)
    mark[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if mark[p]:
            mark[p * p::p] = False
    return np.flatnonzero(mark).astype(np.int64)


def sieve_squarefree(lo: int, hi: int, max_len: int = SIEVE_SEGMENT) -> np.ndarray:
    """Boolean mask over [lo, hi): True where the integer is squarefree."""
    if lo < 1 or hi < lo:
        raise ValueError(f"bad sieve range [{lo}, {hi})")
    if hi - lo > max_len:
        raise ValueError(f"sieve window {hi - lo} exceeds {max_len}")
    mask = np.ones(hi - lo, dtype=bool)
    for p in _small_primes(isqrt(max(hi - 1, 1))).tolist():
        q = p * p
        start = -lo % q
        mask[start::q] = False
    return mask


# -- configuration ----------------------------------------------------------

@dataclass(frozen=True)
class ScanConfig:
    d_min: int
    d_max: int  # inclusive
    classes: tuple[int, ...] = (1, 2, 3)
    max_period: int | None = None
    only_counterexamples: bool = False
    jobs: int = 1
    out_path: str | None = None
    checkpoint_path: str | None = None
    fmt: str = "jsonl"
    segment: int = field(default_factory=work_segment)

    def __post_init__(self):
        if not 1 < self.d_min <= self.d_max:
            raise ValueError(f"need 1 < d_min <= d_max, got {self.d_min}, {self.d_max}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if not self.classes or set(self.classes) - {1, 2, 3}:
            raise ValueError(f"classes must be a non-empty subset of {{1,2,3}}: {self.classes}")
        if self.max_period is not None and self.max_period < 1:
            raise ValueError("max_period must be positive")
        if self.fmt not in ("jsonl", "csv"):
            raise ValueError(f"unknown format {self.fmt!r}")
        if self.segment < 1:
            raise ValueError("segment must be positive")
        object.__setattr__(self, "classes", tuple(sorted(set(self.classes))))

    @property
    def n_segments(self) -> int:
        return (self.d_max - self.d_min) // self.segment + 1

    def bounds(self, k: int) -> tuple[int, int]:
        lo = self.d_min + k * self.segment
        return lo, min(lo + self.segment, self.d_max + 1)

    def config_hash(self) -> str:
        """Hash of everything that shapes the output; jobs and paths excluded."""
        key = {
            "d_min": self.d_min, "d_max": self.d_max, "classes": list(self.classes),
            "max_period": self.max_period, "only_counterexamples": self.only_counterexamples,
            "fmt": self.fmt, "segment": self.segment,
        }
        return hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()

    @property
    def ckpt(self) -> Path | None:
        if self.checkpoint_path:
            return Path(self.checkpoint_path)
        return Path(self.out_path + ".ckpt") if self.out_path else None

    @property
    def sidecar(self) -> Path | None:
        return Path(self.out_path + ".skipped") if self.out_path else None


@dataclass
class ScanSummary:
    cls1_stated: int = 0
    cls1_corrected: int = 0
    cls2: int = 0
    cls3: int = 0
    processed: int = 0
    skipped: int = 0
    minimal: dict[str, int] = field(default_factory=dict)

    def tally(self, D: int, cls: int, stated: bool, corrected: bool) -> None:
        if cls == 1:
            if stated:
                self.cls1_stated += 1
                self.minimal.setdefault("cls1_stated", D)
            if corrected:
                self.cls1_corrected += 1
                self.minimal.setdefault("cls1_corrected", D)
        elif corrected:
            if cls == 2:
                self.cls2 += 1
            else:
                self.cls3 += 1
            self.minimal.setdefault(f"cls{cls}", D)

    def add(self, rec: AnalysisRecord) -> None:
        self.tally(rec.D, rec.cls, rec.is_counterexample_stated, rec.is_counterexample_corrected)

    @property
    def counts(self) -> tuple[int, int, int, int]:
        return self.cls1_stated, self.cls1_corrected, self.cls2, self.cls3

    def counts_line(self) -> str:
        return " ".join(map(str, self.counts))

    def to_json(self) -> dict:
        return asdict(self)


def _is_hit(rec: AnalysisRecord) -> bool:
    return rec.is_counterexample_stated or rec.is_counterexample_corrected


# -- work ------------------------------------------------------------------

def _analyze_segment(args) -> tuple[int, list[AnalysisRecord], list[int], int]:
    """(k, emitted records, skipped D, squarefree D examined) for segment k."""
    k, lo, hi, classes, max_period, only_hits = args
    mask = sieve_squarefree(lo, hi, max(SIEVE_SEGMENT, hi - lo))
    out: list[AnalysisRecord] = []
    skipped: list[int] = []
    seen = 0
    for off in np.flatnonzero(mask).tolist():
        D = lo + off
        if D < 2:
            continue
        cls = D & 3
        if cls not in classes:
            continue
        seen += 1
        try:
            rec = analyze_fast(D, max_period, use_numba=D < NUMBA_D_LIMIT)
        except PeriodLimitExceeded:
            skipped.append(D)
            continue
        if not only_hits or _is_hit(rec):
            out.append(rec)
    return k, out, skipped, seen


def _tasks(cfg: ScanConfig, start: int) -> Iterator[tuple]:
    for k in range(start, cfg.n_segments):
        lo, hi = cfg.bounds(k)
        yield k, lo, hi, cfg.classes, cfg.max_period, cfg.only_counterexamples


def _results(cfg: ScanConfig, start: int = 0):
    tasks = _tasks(cfg, start)
    if cfg.jobs == 1:
        yield from map(_analyze_segment, tasks)
        return
    ctx = mp.get_context("fork" if "fork" in mp.get_all_start_methods() else "spawn")
    with ctx.Pool(cfg.jobs) as pool:
        # imap keeps segment order; the consumer is the single writer
        yield from pool.imap(_analyze_segment, tasks, chunksize=1)


def scan_records(cfg: ScanConfig) -> Iterator[AnalysisRecord]:
    """Records in increasing D, no files touched."""
    for _, recs, _, _ in _results(cfg):
        yield from recs


# -- output -----------------------------------------------------------------

def _row(rec: AnalysisRecord) -> dict:
    return rec.to_json()


def _render(recs: Iterable[AnalysisRecord], fmt: str) -> str:
    if fmt == "jsonl":
        return "".join(json.dumps(_row(r)) + "\n" for r in recs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in recs:
        row = _row(r)
        w.writerow([_csv_cell(row[k]) for k in JSON_KEYS])
    return buf.getvalue()


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _header(fmt: str) -> str:
    return ",".join(JSON_KEYS) + "\n" if fmt == "csv" else ""


def _line_D(line: str, fmt: str) -> int:
    if fmt == "jsonl":
        return int(json.loads(line)["D"])
    return int(line.split(",", 1)[0])


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _truncate(path: Path, bound: int, fmt: str | None, keep_header: str = "") -> None:
    """Drop every line whose D is >= bound (lines past the last checkpoint)."""
    if not path.exists():
        _write_atomic(path, keep_header)
        return
    with open(path) as fh:
        lines = fh.readlines()
    body = lines[1:] if keep_header and lines else lines
    kept = []
    for ln in body:
        if not ln.endswith("\n"):
            break  # torn final line
        D = _line_D(ln, fmt) if fmt else int(ln)
        if D >= bound:
            break
        kept.append(ln)
    _write_atomic(path, keep_header + "".join(kept))


def _read_ckpt(cfg: ScanConfig) -> int:
    """Index of the first segment still to do."""
    p = cfg.ckpt
    if p is None or not p.exists():
        return 0
    data = json.loads(p.read_text())
    if data.get("config_hash") != cfg.config_hash():
        raise ValueError(f"checkpoint {p} belongs to a different scan configuration")
    return int(data["last_complete_segment"]) + 1


def _write_ckpt(cfg: ScanConfig, k: int) -> None:
    _write_atomic(cfg.ckpt, json.dumps({"config_hash": cfg.config_hash(),
                                        "last_complete_segment": k}) + "\n")


def _count_seen(cfg: ScanConfig, upto_segment: int) -> int:
    n = 0
    for k in range(upto_segment):
        lo, hi = cfg.bounds(k)
        idx = np.flatnonzero(sieve_squarefree(lo, hi, max(SIEVE_SEGMENT, hi - lo))) + lo
        idx = idx[idx >= 2]
        n += int(np.isin(idx & 3, cfg.classes).sum())
    return n


def scan(cfg: ScanConfig, resume: bool = False, progress=None) -> ScanSummary:
    """Run the scan into ``cfg.out_path`` and return the summary.

    With ``resume`` the checkpoint decides where to restart; output written
    after the last complete segment is discarded first.
    """
    if cfg.out_path is None:
        summary = ScanSummary()
        for _, recs, skipped, seen in _results(cfg):
            for r in recs:
                summary.add(r)
            summary.skipped += len(skipped)
            summary.processed += seen - len(skipped)
        return summary

    out, side = Path(cfg.out_path), cfg.sidecar
    start = _read_ckpt(cfg) if resume else 0
    if start:
        bound = cfg.bounds(start - 1)[1]
        _truncate(out, bound, cfg.fmt, _header(cfg.fmt))
        _truncate(side, bound, None)
        log.info("resuming at segment %d of %d (D >= %d)", start, cfg.n_segments, bound)
    else:
        _write_atomic(out, _header(cfg.fmt))
        _write_atomic(side, "")

    with open(out, "a") as fo, open(side, "a") as fs:
        for k, recs, skipped, _ in _results(cfg, start):
            fo.write(_render(recs, cfg.fmt))
            fs.write("".join(f"{D}\n" for D in skipped))
            fo.flush()
            fs.flush()
            os.fsync(fo.fileno())
            os.fsync(fs.fileno())
            _write_ckpt(cfg, k)
            if progress is not None:
                progress(k + 1, cfg.n_segments)

    summary = summarize_file(out, cfg.fmt)
    summary.skipped = _count_lines(side)
    summary.processed = _count_seen(cfg, cfg.n_segments) - summary.skipped
    return summary


def _count_lines(p: Path) -> int:
    with open(p) as fh:
        return sum(1 for _ in fh)


# -- summaries --------------------------------------------------------------

def _parse_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).lower() == "true"


def iter_file(path: str | Path, fmt: str | None = None) -> Iterator[dict]:
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix == ".csv" else "jsonl")
    with open(path) as fh:
        if fmt == "jsonl":
            for ln in fh:
                if ln.strip():
                    yield json.loads(ln)
        else:
            for row in csv.DictReader(fh):
                yield row


def summarize(rows: Iterable[dict]) -> ScanSummary:
    """Counts over result rows; ``processed`` is the number of rows."""
    s = ScanSummary()
    for row in rows:
        s.processed += 1
        s.tally(int(row["D"]), int(row["cls"]), _parse_bool(row["counterexample_stated"]),
                _parse_bool(row["counterexample_corrected"]))
    return s


def summarize_file(path: str | Path, fmt: str | None = None) -> ScanSummary:
    """Table-style counts from a results file; processed = rows in the file."""
    return summarize(iter_file(path, fmt))

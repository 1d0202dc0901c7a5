"""JSON-lines record persistence, run manifests, and resume bookkeeping.

A finalized record file is one metadata header line followed by one record
per line, sorted by (n, replica index, pair index); serialization is
canonical (sorted keys, shortest round-trip floats), so a finalized file is
a pure function of (config, master seed) regardless of worker count.  While
a run is in progress records accumulate unordered in `<out>.partial` and the
manifest `<out>.manifest.json` tracks completed replica-index ranges.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(payload: dict) -> str:
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()[:16]


def partial_path(out: str) -> str:
    return out + ".partial"


def manifest_path(out: str) -> str:
    return out + ".manifest.json"


@dataclass
class RunManifest:
    """Completed replica-index ranges, keyed by the lattice size n."""

    config_hash: str
    build: str
    total: int
    completed: dict = field(default_factory=dict)  # str(n) -> [[lo, hi), ...]
    finalized: bool = False

    def mark(self, n, lo: int, hi: int):
        key = str(n)
        ranges = self.completed.setdefault(key, [])
        ranges.append([lo, hi])
        self.completed[key] = _merge_ranges(ranges)

    def is_done(self, n, lo: int, hi: int) -> bool:
        return any(c[0] <= lo and hi <= c[1]
                   for c in self.completed.get(str(n), []))

    def count_completed(self) -> int:
        return sum(hi - lo for ranges in self.completed.values()
                   for lo, hi in ranges)

    def save(self, out: str):
        tmp = manifest_path(out) + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(canonical_json({
                "config_hash": self.config_hash, "build": self.build,
                "total": self.total, "completed": self.completed,
                "finalized": self.finalized}))
        os.replace(tmp, manifest_path(out))

    @classmethod
    def load(cls, out: str) -> "RunManifest":
        with open(manifest_path(out)) as fh:
            d = json.load(fh)
        return cls(d["config_hash"], d["build"], d["total"],
                   d["completed"], d.get("finalized", False))


def _merge_ranges(ranges):
    out = []
    for lo, hi in sorted(ranges):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return out


def append_partial(out: str, records: list):
    """Append a completed task's records in one flushed write."""
    payload = "".join(canonical_json(r) + "\n" for r in records)
    with open(partial_path(out), "a") as fh:
        fh.write(payload)
        fh.flush()
        os.fsync(fh.fileno())


def read_jsonl(path: str):
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def load_partial(out: str, manifest: RunManifest) -> list:
    """Partial records restricted to manifest-completed index ranges."""
    if not os.path.exists(partial_path(out)):
        return []
    keep = []
    for r in read_jsonl(partial_path(out)):
        if manifest.is_done(r.get("n", 0), r["index"], r["index"] + 1):
            keep.append(r)
    return keep


def rewrite_partial(out: str, records: list):
    tmp = partial_path(out) + ".tmp"
    with open(tmp, "w") as fh:
        for r in records:
            fh.write(canonical_json(r) + "\n")
    os.replace(tmp, partial_path(out))


def finalize(out: str, header: dict, records: list):
    """Sort, write the final file atomically, drop the partial file."""
    records = sorted(records, key=lambda r: (r.get("n", 0), r["index"],
                                             r.get("pair_index", 0)))
    tmp = out + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(canonical_json(header) + "\n")
        for r in records:
            fh.write(canonical_json(r) + "\n")
    os.replace(tmp, out)
    if os.path.exists(partial_path(out)):
        os.remove(partial_path(out))


def read_records(path: str):
    """(header, records) from a finalized record file."""
    gen = read_jsonl(path)
    try:
        header = next(gen)
    except StopIteration:
        raise ValueError(f"{path}: empty record file") from None
    return header, list(gen)

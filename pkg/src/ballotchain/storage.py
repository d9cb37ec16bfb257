"""Durable stores: append-only JSONL logs and atomic JSON snapshots.

Log writes are flushed and fsynced per record. A torn final line (a crash
mid-append) is recoverable; a bad line anywhere else means the file was
edited and is treated as corruption.
"""

from __future__ import annotations

import json
import os

from .errors import CorruptStore


def dump_compact(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def append_jsonl(path, record: dict):
    line = dump_compact(record) + "\n"
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(line)
        fh.flush()
        os.fsync(fh.fileno())


def read_jsonl(path, recovery: bool = False):
    """Parse a log; returns (records, torn_tail_bytes).

    strict (default): any malformed or unterminated line raises CorruptStore.
    recovery: a malformed or unterminated FINAL line is dropped as a torn
    write; anything earlier still raises. torn_tail_bytes is the exact count
    to truncate from the file end to remove the torn write.
    """
    if not os.path.exists(path):
        return [], 0
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw:
        return [], 0
    records = []
    lines = raw.split(b"\n")
    terminated = lines[-1] == b""
    if terminated:
        lines = lines[:-1]
    for i, line in enumerate(lines):
        final = i == len(lines) - 1
        torn = final and not terminated
        try:
            parsed = json.loads(line)
        except ValueError:
            parsed = None
            torn = True  # malformed: only acceptable as a torn final line
        if not torn:
            records.append(parsed)
            continue
        if final and recovery:
            return records, len(line) + (1 if terminated else 0)
        raise CorruptStore(f"bad log line {i} in {path}") from None
    return records, 0


def _truncate_tail(path, torn_bytes: int):
    # a torn tail left in place would corrupt the next append
    os.truncate(path, os.path.getsize(path) - torn_bytes)


class EventLog:
    """One JSONL file treated as the source of truth for a store."""

    def __init__(self, path):
        self.path = path

    def append(self, record: dict):
        append_jsonl(self.path, record)

    def load(self, recovery: bool = False):
        records, torn = read_jsonl(self.path, recovery=recovery)
        if torn:
            _truncate_tail(self.path, torn)
        return records, torn


def write_json_atomic(path, obj):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(dump_compact(obj))
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def read_json(path, default=None):
    if not os.path.exists(path):
        return default
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except ValueError:
            raise CorruptStore(f"bad snapshot {path}") from None


class IdempotencyStore:
    """Replied requests by client key, so retries return the first answer."""

    def __init__(self, path=None):
        self.path = path
        self._seen: dict[str, dict] = {}
        if path is not None:
            records, torn = read_jsonl(path, recovery=True)
            if torn:
                _truncate_tail(path, torn)
            for rec in records:
                self._seen[rec["key"]] = rec["response"]

    def get(self, key: str):
        return self._seen.get(key)

    def put(self, key: str, response: dict):
        self._seen[key] = response
        if self.path is not None:
            append_jsonl(self.path, {"key": key, "response": response})

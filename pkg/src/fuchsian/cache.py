"""Append-only JSONL result cache with an exclusive advisory lock.

Records are keyed by a canonical JSON encoding of (kind, key).  Appends take
an exclusive flock on the file so parallel workers do not interleave lines;
lookups read without locking (the file is append-only)."""

from __future__ import annotations

import fcntl
import json
import os


class ResultCache:
    def __init__(self, path: str):
        self.path = path

    @staticmethod
    def _key_string(kind: str, key: dict) -> str:
        return json.dumps({"kind": kind, "key": key}, sort_keys=True)

    def get(self, kind: str, key: dict):
        if not os.path.exists(self.path):
            return None
        wanted = self._key_string(kind, key)
        found = None
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    continue
                if self._key_string(rec.get("kind", ""), rec.get("key", {})) == wanted:
                    found = rec.get("value")
        return found

    def put(self, kind: str, key: dict, value: dict):
        rec = json.dumps({"kind": kind, "key": key, "value": value}, sort_keys=True)
        os.makedirs(os.path.dirname(os.path.abspath(self.path)), exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
            try:
                fh.write(rec + "\n")
                fh.flush()
            finally:
                fcntl.flock(fh.fileno(), fcntl.LOCK_UN)

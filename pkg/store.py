import json
from pathlib import Path
from typing import Dict, Iterator, List, Optional

from filelock import FileLock
from loguru import logger

from errors import ReplayMismatch, StoreCorrupt
from models import Record, canonical_json, record_digest


class RecordStore:
    def __init__(self, directory: str, timeout: float = 30.0):
        """
        Open (and create if needed) an append-only record store

        Args:
            directory (str): Store directory; holds records.jsonl and its lock file
            timeout (float): Seconds to wait for the writer lock
        """
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / "records.jsonl"
        self.lock = FileLock(str(self.path) + ".lock", timeout=timeout)
        self.path.touch(exist_ok=True)

    def append(self, record: Record) -> str:
        """
        Append one record under its content digest; a record already stored is not written twice

        Returns:
            str: the record's digest
        """
        key = record.digest
        line = canonical_json({"digest": key, "kind": record.kind, "record": record.payload()})
        with self.lock:
            if self._has(key):
                logger.debug(f"Record {record.kind}:{key[:12]} already stored")
                return key
            with open(self.path, "a", encoding="utf-8") as file:
                file.write(line + "\n")
        logger.debug(f"Stored {record.kind}:{key[:12]}")
        return key

    def _has(self, key: str) -> bool:
        return any(entry["digest"] == key for entry in self._entries())

    def _entries(self) -> Iterator[Dict]:
        with open(self.path, "r", encoding="utf-8") as file:
            for number, line in enumerate(file, start=1):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError as e:
                    raise StoreCorrupt(f"{self.path.name} line {number}: {str(e)}")
                if not isinstance(entry, dict) or not {"digest", "kind", "record"} <= entry.keys():
                    raise StoreCorrupt(f"{self.path.name} line {number}: not a store entry")
                yield entry

    def records(self, kind: Optional[str] = None) -> List[Dict]:
        return [e["record"] for e in self._entries() if kind is None or e["kind"] == kind]

    def digests(self, kind: Optional[str] = None) -> List[str]:
        return [e["digest"] for e in self._entries() if kind is None or e["kind"] == kind]

    def get(self, key: str, verify: bool = True) -> Dict:
        """
        Fetch a record by digest or unique digest prefix

        Raises:
            StoreCorrupt: unknown or ambiguous key
            ReplayMismatch: the stored content no longer hashes to its key
        """
        matches = [e for e in self._entries() if e["digest"].startswith(key)]
        if len(matches) != 1:
            raise StoreCorrupt(f"{len(matches)} records match key {key!r}")
        entry = matches[0]
        if verify and record_digest(entry["record"]) != entry["digest"]:
            raise ReplayMismatch(f"record {entry['digest'][:12]} was modified after it was stored")
        return entry["record"]

    def latest(self, kind: str) -> Optional[str]:
        keys = self.digests(kind)
        return keys[-1] if keys else None

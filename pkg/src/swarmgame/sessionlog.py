"""Append-only NDJSON session logs with an integrity footer.

Layout per file (one instance):

    {"record": "header", "version", "instance_id", "seed", "config", "roster"}
    {"record": "event", "kind": "instance_start", "t_ms": 0}
    {"record": "input", "t_ms", "agent_id", "keys"}       # inputs, colors,
    {"record": "color", "t_ms", "agent_id", "color"}      # events and states
    {"record": "state", "t_ms", "tick", "agents"}          # interleaved, t_ms
    ...                                                    # non-decreasing
    {"record": "footer", "sha256", "records"}

State records land on exact tick boundaries (t_ms = tick * period). The
footer hash covers every byte before the footer line, so any single-byte
change to a closed file is detectable. Files are written as plain .jsonl
and gzip-compressed on clean close (mtime pinned to 0 so identical runs
produce identical bytes); a crashed writer leaves a readable prefix.
"""

from __future__ import annotations

import gzip
import hashlib
import json
import os
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .errors import ContractViolation, ParseError

LOG_VERSION = "0.1.0"

_TIMED = ("event", "input", "color", "state")


def _encode_record(record: dict[str, Any]) -> bytes:
    return (json.dumps(record, separators=(",", ":"), sort_keys=True) + "\n").encode("utf-8")


def make_header(instance_id: str, config: dict[str, Any], seed: int | None,
                roster: Iterable[tuple[int, int, str]]) -> dict[str, Any]:
    """roster entries: (agent_id, ordinal, token_hash)."""
    return {
        "record": "header",
        "version": LOG_VERSION,
        "instance_id": instance_id,
        "seed": seed,
        "config": config,
        "roster": [
            {"agent_id": a, "ordinal": o, "token_hash": h} for a, o, h in roster
        ],
    }


class SessionLogWriter:
    """Writes one instance's records; call close() to seal and compress."""

    def __init__(self, path: str | Path, header: dict[str, Any]):
        if header.get("record") != "header":
            raise ContractViolation("first record must be the header")
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "wb")
        self._hash = hashlib.sha256()
        self._last_t_ms = 0
        self._count = 0
        self._closed = False
        self._emit(header)

    @property
    def last_t_ms(self) -> int:
        return self._last_t_ms

    def _emit(self, record: dict[str, Any]) -> None:
        raw = _encode_record(record)
        self._hash.update(raw)
        self._fh.write(raw)
        self._count += 1

    def write(self, record: dict[str, Any]) -> None:
        if self._closed:
            raise ContractViolation("writer already closed")
        kind = record.get("record")
        if kind not in _TIMED:
            raise ContractViolation(f"unknown record type {kind!r}")
        t_ms = record.get("t_ms")
        if not isinstance(t_ms, int) or t_ms < self._last_t_ms:
            raise ContractViolation(
                f"t_ms must be a non-decreasing int, got {t_ms!r} after {self._last_t_ms}"
            )
        self._last_t_ms = t_ms
        self._emit(record)
        self._fh.flush()

    def close(self) -> Path:
        """Append the footer, gzip the file and return the final path."""
        if self._closed:
            raise ContractViolation("writer already closed")
        self._closed = True
        footer = {"record": "footer", "sha256": self._hash.hexdigest(),
                  "records": self._count}
        self._fh.write(_encode_record(footer))
        self._fh.close()

        gz_path = self.path.with_suffix(self.path.suffix + ".gz")
        with open(self.path, "rb") as src, open(gz_path, "wb") as out:
            with gzip.GzipFile(filename="", mode="wb", fileobj=out, mtime=0) as gz:
                gz.write(src.read())
        os.remove(self.path)
        return gz_path


@dataclass
class LogDocument:
    header: dict[str, Any]
    records: list[dict[str, Any]] = field(default_factory=list)
    footer: dict[str, Any] | None = None

    @property
    def complete(self) -> bool:
        return self.footer is not None

    def all_records(self) -> list[dict[str, Any]]:
        return [self.header, *self.records]


def _open_log(path: Path) -> bytes:
    data = path.read_bytes()
    if data[:2] == b"\x1f\x8b":
        try:
            data = gzip.decompress(data)
        except (OSError, EOFError, zlib.error) as exc:
            raise ParseError(f"corrupt gzip container: {exc}") from exc
    return data


def read_log(path: str | Path, strict: bool = True) -> LogDocument:
    """Parse a session log.

    strict=True demands a sealed, untampered file: footer present, hash
    matching, every line valid, t_ms non-decreasing. strict=False
    recovers the longest valid prefix of a crashed or truncated file.
    """
    data = _open_log(Path(path))
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    elif strict:
        raise ParseError("log does not end with a newline")

    header: dict[str, Any] | None = None
    records: list[dict[str, Any]] = []
    footer: dict[str, Any] | None = None
    hashed = hashlib.sha256()
    last_t = 0

    for i, line in enumerate(lines):
        try:
            rec = json.loads(line)
            if not isinstance(rec, dict):
                raise ParseError(f"line {i + 1}: record must be an object")
        except (json.JSONDecodeError, UnicodeDecodeError, ParseError) as exc:
            if strict:
                raise ParseError(f"line {i + 1}: {exc}") from exc
            break
        kind = rec.get("record")
        if i == 0:
            if kind != "header":
                raise ParseError("first record is not a header")
            header = rec
        elif kind == "footer":
            footer = rec
            if i != len(lines) - 1 and strict:
                raise ParseError("footer is not the last record")
            break
        elif kind in _TIMED:
            t = rec.get("t_ms")
            if not isinstance(t, int) or t < last_t:
                if strict:
                    raise ParseError(f"line {i + 1}: t_ms regressed")
                break
            last_t = t
            records.append(rec)
        else:
            if strict:
                raise ParseError(f"line {i + 1}: unknown record type {kind!r}")
            break
        hashed.update(line + b"\n")

    if header is None:
        raise ParseError("log has no header")
    if strict:
        if footer is None:
            raise ParseError("log has no footer (file is unsealed or truncated)")
        if footer.get("sha256") != hashed.hexdigest():
            raise ParseError("footer hash mismatch: log bytes were altered")
        if footer.get("records") != 1 + len(records):
            raise ParseError("footer record count mismatch")
    elif footer is not None and footer.get("sha256") != hashed.hexdigest():
        footer = None
    return LogDocument(header, records, footer)


def split_by_agent(doc: LogDocument) -> dict[int, dict[str, list]]:
    """Per-agent views: input records, color records and (t_ms, x, y, color)
    trajectory samples pulled out of the interleaved stream."""
    out: dict[int, dict[str, list]] = {}

    def slot(agent_id: int) -> dict[str, list]:
        return out.setdefault(agent_id, {"inputs": [], "colors": [], "trajectory": []})

    for entry in doc.header.get("roster", []):
        slot(entry["agent_id"])
    for rec in doc.records:
        if rec["record"] == "input":
            slot(rec["agent_id"])["inputs"].append(rec)
        elif rec["record"] == "color":
            slot(rec["agent_id"])["colors"].append(rec)
        elif rec["record"] == "state":
            for agent_id, x, y, color in rec["agents"]:
                slot(agent_id)["trajectory"].append((rec["t_ms"], x, y, color))
    return out


def export_csv(doc: LogDocument, out_path: str | Path) -> Path:
    """Flatten state records to delimited text: t_ms,tick,agent_id,x,y,color."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t_ms,tick,agent_id,x,y,color\n")
        for rec in doc.records:
            if rec["record"] != "state":
                continue
            for agent_id, x, y, color in rec["agents"]:
                fh.write(f"{rec['t_ms']},{rec['tick']},{agent_id},{x!r},{y!r},{color}\n")
    return out_path

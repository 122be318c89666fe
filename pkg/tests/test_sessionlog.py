import gzip
import hashlib
import json

import pytest

from swarmgame.errors import ContractViolation, ParseError
from swarmgame.sessionlog import (
    LOG_VERSION,
    SessionLogWriter,
    export_csv,
    make_header,
    read_log,
    split_by_agent,
)

ROSTER = [(0, 0, "aa" * 32), (1, 1, "bb" * 32)]


def sample_records():
    return [
        {"record": "event", "kind": "instance_start", "t_ms": 0},
        {"record": "input", "t_ms": 100, "agent_id": 0, "keys": ["Up"]},
        {"record": "color", "t_ms": 100, "agent_id": 1, "color": 2},
        {"record": "state", "t_ms": 100, "tick": 1,
         "agents": [[0, 50.0, 60.0, 0], [1, 90.0, 60.0, 2]]},
        {"record": "state", "t_ms": 200, "tick": 2,
         "agents": [[0, 50.0, 58.2, 0], [1, 90.0, 60.0, 2]]},
        {"record": "event", "kind": "instance_end", "t_ms": 200, "reason": "aborted:test"},
    ]


def write_sample(tmp_path, name="run.jsonl"):
    header = make_header("inst-1", {"max_players": 2}, 7, ROSTER)
    writer = SessionLogWriter(tmp_path / name, header)
    for rec in sample_records():
        writer.write(rec)
    return writer.close()


def test_write_read_round_trip(tmp_path):
    gz = write_sample(tmp_path)
    assert gz.name == "run.jsonl.gz"
    assert not (tmp_path / "run.jsonl").exists()
    doc = read_log(gz)
    assert doc.complete
    assert doc.header["version"] == LOG_VERSION
    assert doc.header["instance_id"] == "inst-1"
    assert doc.header["seed"] == 7
    assert doc.header["roster"][1] == {"agent_id": 1, "ordinal": 1, "token_hash": "bb" * 32}
    assert doc.records == sample_records()
    assert doc.footer["records"] == 1 + len(doc.records)
    assert doc.all_records()[0] is doc.header


def test_identical_runs_produce_identical_bytes(tmp_path):
    a = write_sample(tmp_path / "a")
    b = write_sample(tmp_path / "b")
    assert a.read_bytes() == b.read_bytes()


def test_writer_requires_header_record():
    with pytest.raises(ContractViolation):
        SessionLogWriter("/tmp/never-written.jsonl", {"record": "event"})


def test_writer_rejects_bad_records(tmp_path):
    writer = SessionLogWriter(tmp_path / "x.jsonl", make_header("i", {}, None, []))
    with pytest.raises(ContractViolation):
        writer.write({"record": "header"})
    with pytest.raises(ContractViolation):
        writer.write({"record": "state", "t_ms": "soon"})
    writer.write({"record": "state", "t_ms": 500, "tick": 5, "agents": []})
    assert writer.last_t_ms == 500
    with pytest.raises(ContractViolation):
        writer.write({"record": "state", "t_ms": 400, "tick": 4, "agents": []})
    writer.close()
    with pytest.raises(ContractViolation):
        writer.write({"record": "state", "t_ms": 600, "tick": 6, "agents": []})
    with pytest.raises(ContractViolation):
        writer.close()


def test_truncation_recovers_longest_prefix(tmp_path):
    gz = write_sample(tmp_path)
    data = gzip.decompress(gz.read_bytes())
    lines = data.split(b"\n")[:-1]
    ends = []
    acc = 0
    for line in lines:
        acc += len(line) + 1
        ends.append(acc)
    full = sample_records()

    for offset in range(len(data) + 1):
        trunc = tmp_path / "trunc.jsonl"
        trunc.write_bytes(data[:offset])
        # a line parses once all its bytes short of the newline are present
        parsed_lines = sum(1 for e in ends if e - 1 <= offset)
        if parsed_lines == 0:
            with pytest.raises(ParseError):
                read_log(trunc, strict=False)
            continue
        doc = read_log(trunc, strict=False)
        expected = min(parsed_lines - 1, len(full))
        assert doc.records == full[:expected], offset
        assert doc.complete == (parsed_lines == len(lines))
        if offset < len(data):
            with pytest.raises(ParseError):
                read_log(trunc, strict=True)


def test_every_single_byte_flip_is_detected(tmp_path):
    gz = write_sample(tmp_path)
    data = bytearray(gzip.decompress(gz.read_bytes()))
    victim = tmp_path / "flip.jsonl"
    for offset in range(len(data)):
        corrupted = bytearray(data)
        corrupted[offset] ^= 0x20
        victim.write_bytes(corrupted)
        with pytest.raises(ParseError):
            read_log(victim, strict=True)


def test_corrupt_gzip_container_detected(tmp_path):
    gz = write_sample(tmp_path)
    raw = bytearray(gz.read_bytes())
    for offset in (3, len(raw) // 2, len(raw) - 2):
        corrupted = bytearray(raw)
        corrupted[offset] ^= 0xFF
        victim = tmp_path / "bad.jsonl.gz"
        victim.write_bytes(corrupted)
        with pytest.raises(ParseError):
            read_log(victim, strict=True)


def test_regressed_t_ms_rejected_strict(tmp_path):
    header = make_header("i", {}, None, [])
    lines = [
        json.dumps(header, separators=(",", ":"), sort_keys=True),
        json.dumps({"record": "state", "t_ms": 200, "tick": 2, "agents": []},
                   separators=(",", ":"), sort_keys=True),
        json.dumps({"record": "state", "t_ms": 100, "tick": 1, "agents": []},
                   separators=(",", ":"), sort_keys=True),
    ]
    body = "".join(line + "\n" for line in lines).encode()
    footer = {"record": "footer", "sha256": hashlib.sha256(body).hexdigest(), "records": 3}
    path = tmp_path / "regress.jsonl"
    path.write_bytes(body + json.dumps(footer, separators=(",", ":"), sort_keys=True).encode() + b"\n")
    with pytest.raises(ParseError):
        read_log(path, strict=True)
    doc = read_log(path, strict=False)
    assert [r["t_ms"] for r in doc.records] == [200]
    assert not doc.complete


def test_first_record_must_be_header(tmp_path):
    path = tmp_path / "nohdr.jsonl"
    path.write_bytes(b'{"record":"state","t_ms":0,"tick":0,"agents":[]}\n')
    with pytest.raises(ParseError):
        read_log(path, strict=False)


def test_split_by_agent(tmp_path):
    doc = read_log(write_sample(tmp_path))
    views = split_by_agent(doc)
    assert set(views) == {0, 1}
    assert [r["keys"] for r in views[0]["inputs"]] == [["Up"]]
    assert views[0]["colors"] == []
    assert [c["color"] for c in views[1]["colors"]] == [2]
    assert views[0]["trajectory"] == [(100, 50.0, 60.0, 0), (200, 50.0, 58.2, 0)]
    assert views[1]["trajectory"] == [(100, 90.0, 60.0, 2), (200, 90.0, 60.0, 2)]


def test_split_includes_silent_roster_agents(tmp_path):
    header = make_header("i", {}, None, [(5, 0, "cc" * 32)])
    writer = SessionLogWriter(tmp_path / "s.jsonl", header)
    doc = read_log(writer.close())
    assert split_by_agent(doc) == {5: {"inputs": [], "colors": [], "trajectory": []}}


def test_export_csv_lossless_floats(tmp_path):
    header = make_header("i", {}, None, [])
    writer = SessionLogWriter(tmp_path / "c.jsonl", header)
    x = 1.0 / 3.0
    writer.write({"record": "state", "t_ms": 100, "tick": 1, "agents": [[0, x, 2.5, 1]]})
    doc = read_log(writer.close())
    out = export_csv(doc, tmp_path / "out.csv")
    lines = out.read_text().splitlines()
    assert lines[0] == "t_ms,tick,agent_id,x,y,color"
    t_ms, tick, agent_id, xs, ys, color = lines[1].split(",")
    assert (t_ms, tick, agent_id, color) == ("100", "1", "0", "1")
    assert float(xs) == x
    assert float(ys) == 2.5

import json

import pytest

from errors import ReplayMismatch, StoreCorrupt
from models import ClaimRecord, InputRecord, canonical_json


def claim(runtime=0.0):
    return ClaimRecord(claim_id="SD_unique_point", statement="one point", invocation="SD_unique_point",
                       expected="1", actual="1", outcome="Pass", runtime=runtime)


def test_digest_ignores_timing():
    assert claim(0.1).digest == claim(2.5).digest
    assert canonical_json({"b": 1, "a": [2]}) == '{"a":[2],"b":1}'


def test_append_is_deduplicated(store):
    key = store.append(claim(0.1))
    assert store.append(claim(0.7)) == key
    assert store.digests() == [key]
    assert store.get(key[:10])["claim_id"] == "SD_unique_point"
    assert store.latest("claim") == key
    assert store.latest("manifest") is None


def test_prefix_lookup_must_be_unique(store):
    store.append(InputRecord(path="a.txt", text="GF(2)"))
    store.append(InputRecord(path="b.txt", text="GF(3)"))
    with pytest.raises(StoreCorrupt):
        store.get("")
    with pytest.raises(StoreCorrupt):
        store.get("not-a-digest")


def test_edited_record_fails_verification(store):
    key = store.append(claim())
    entry = json.loads(store.path.read_text(encoding="utf-8"))
    entry["record"]["actual"] = "2"
    store.path.write_text(canonical_json(entry) + "\n", encoding="utf-8")
    with pytest.raises(ReplayMismatch):
        store.get(key)
    assert store.get(key, verify=False)["actual"] == "2"


def test_foreign_lines_are_corrupt(store):
    store.path.write_text('{"digest": "x"}\n', encoding="utf-8")
    with pytest.raises(StoreCorrupt):
        store.records()

import json
import sys
import textwrap

import numpy as np
import pytest

from conftest import random_mask
from sesam.errors import BackendUnavailable, MalformedResponse, OracleFailure
from sesam.oracle import OracleRequest, OracleResponse
from sesam.raster import BinaryMask
from sesam.sampling import PointPrompt
from sesam.selection import CandidateMaskSet
from sesam.wire import (
    FileProtocolOracle,
    StreamHeader,
    WireErrorLine,
    decode_request,
    encode_request,
    encode_response,
    match_responses,
    parse_response_line,
)


def make_request(rid="r1", ref="img"):
    return OracleRequest(rid, ref, (PointPrompt(3, 4, 1), PointPrompt(5, 6, 1)))


def make_response(rid="r1", seed=0):
    cands = [random_mask(seed + i, max_side=24, density=0.4) for i in range(3)]
    side = cands[0]
    cands = [BinaryMask(c.bits[: side.height, : side.width]) if c.bits.shape != side.bits.shape else c for c in cands]
    # force equal shapes
    base = np.zeros_like(side.bits)
    fixed = []
    for c in cands:
        buf = base.copy()
        h = min(buf.shape[0], c.bits.shape[0])
        w = min(buf.shape[1], c.bits.shape[1])
        buf[:h, :w] = c.bits[:h, :w]
        fixed.append(BinaryMask(buf))
    return OracleResponse(rid, CandidateMaskSet(fixed, (0.6, 0.9, 0.7)))


def test_request_roundtrip():
    req = make_request()
    line = encode_request(req)
    obj = json.loads(line)
    assert obj == {"request_id": "r1", "image_ref": "img", "points": [[3, 4], [5, 6]]}
    back = decode_request(line)
    assert back.request_id == "r1" and back.image_ref == "img"
    assert [(p.x, p.y) for p in back.prompts] == [(3, 4), (5, 6)]


def test_response_roundtrip():
    resp = make_response(seed=3)
    back = parse_response_line(encode_response(resp))
    assert isinstance(back, OracleResponse)
    assert back.request_id == resp.request_id
    for a, b in zip(back.candidates.candidates, resp.candidates.candidates):
        assert a == b
    assert back.candidates.scores == resp.candidates.scores


def test_header_and_error_lines():
    header = parse_response_line('{"header": {"variant": "vit_b"}}')
    assert isinstance(header, StreamHeader) and header.fields["variant"] == "vit_b"
    err = parse_response_line('{"request_id": "r9", "error": "unknown image"}')
    assert isinstance(err, WireErrorLine) and err.request_id == "r9"


def test_malformed_lines_raise():
    with pytest.raises(MalformedResponse):
        parse_response_line("not json at all")
    with pytest.raises(MalformedResponse):
        parse_response_line('{"request_id": "x", "masks": [], "width": 2, "height": 2}')
    with pytest.raises(MalformedResponse):
        parse_response_line('{"request_id": "x", "width": 2, "height": 2}')


def test_match_responses_out_of_order():
    reqs = [make_request(f"r{i}") for i in range(3)]
    lines = [encode_response(make_response(f"r{i}", seed=i)) for i in (2, 0, 1)]
    lines.insert(0, '{"header": {"variant": "mock"}}')
    matched = match_responses(reqs, lines)
    assert set(matched) == {"r0", "r1", "r2"}


def test_match_responses_missing_id():
    reqs = [make_request("r0"), make_request("r1")]
    lines = [encode_response(make_response("r0"))]
    with pytest.raises(MalformedResponse):
        match_responses(reqs, lines)


def test_match_responses_duplicate_and_unsolicited():
    reqs = [make_request("r0")]
    dup = encode_response(make_response("r0"))
    with pytest.raises(MalformedResponse):
        match_responses(reqs, [dup, dup])
    with pytest.raises(MalformedResponse):
        match_responses(reqs, [encode_response(make_response("zz"))])


def test_match_responses_error_line():
    reqs = [make_request("r0")]
    with pytest.raises(OracleFailure):
        match_responses(reqs, ['{"request_id": "r0", "error": "boom"}'])


ECHO_ADAPTER = textwrap.dedent(
    """
    import sys, json, base64
    sys.stdout.write(json.dumps({"header": {"variant": "echo"}}) + "\\n")
    sys.stdout.flush()
    for line in sys.stdin:
        obj = json.loads(line)
        n = len(obj["points"])
        # 2x2 raster, n%2 pattern: runs [4] (all false) or [0,4] (all true)
        rle = base64.b64encode(b"\\x00\\x04" if n % 2 == 0 else b"\\x04").decode()
        masks = [{"rle": rle, "score": 0.5}] * 3
        out = {"request_id": obj["request_id"], "masks": masks, "width": 2, "height": 2}
        sys.stdout.write(json.dumps(out) + "\\n")
        sys.stdout.flush()
    """
)


def test_file_protocol_oracle_subprocess(tmp_path):
    script = tmp_path / "adapter.py"
    script.write_text(ECHO_ADAPTER)
    with FileProtocolOracle(f"{sys.executable} {script}") as oracle:
        resp = oracle.query(make_request("a"))
        assert resp.candidates.candidates[0].area == 4  # 2 points -> all true
        resp2 = oracle.query(OracleRequest("b", "img", (PointPrompt(1, 1, 0),)))
        assert resp2.candidates.candidates[0].area == 0
        assert oracle.header is not None and oracle.header.fields["variant"] == "echo"


def test_file_protocol_env_var(tmp_path, monkeypatch):
    script = tmp_path / "adapter.py"
    script.write_text(ECHO_ADAPTER)
    monkeypatch.setenv("SESAM_ORACLE_CMD", f"{sys.executable} {script}")
    with FileProtocolOracle() as oracle:
        assert oracle.query(make_request("a")).request_id == "a"


def test_file_protocol_missing_command(monkeypatch):
    monkeypatch.delenv("SESAM_ORACLE_CMD", raising=False)
    with pytest.raises(BackendUnavailable):
        FileProtocolOracle()


def test_file_protocol_spawn_failure():
    oracle = FileProtocolOracle("/nonexistent-adapter-binary")
    with pytest.raises(BackendUnavailable):
        oracle.query(make_request())

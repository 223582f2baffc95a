"""Line-oriented batch protocol for out-of-process oracles.

One JSON object per line. Requests carry ``{request_id, image_ref,
points: [[x, y], ...]}``; responses carry ``{request_id, masks: [{rle:
<base64>, score}, x3], width, height}``. Adapters may emit a leading
``{"header": {...}}`` line (e.g. recording the model variant) and
``{request_id, error}`` lines for per-request failures. Masks travel as
base64 of the run-length codec, bit-exact.
"""

from __future__ import annotations

import base64
import json
import os
import shlex
import subprocess
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BackendUnavailable, MalformedResponse, OracleFailure, UnknownImage
from .oracle import OracleRequest, OracleResponse
from .raster import BinaryMask
from .rle import rle_decode, rle_encode
from .sampling import PointPrompt
from .selection import CandidateMaskSet

ORACLE_CMD_ENV = "SESAM_ORACLE_CMD"


@dataclass(frozen=True)
class WireErrorLine:
    request_id: str
    message: str


@dataclass(frozen=True)
class StreamHeader:
    fields: dict


def encode_request(request: OracleRequest) -> str:
    return json.dumps(
        {
            "request_id": request.request_id,
            "image_ref": request.image_ref,
            "points": [[p.x, p.y] for p in request.prompts],
        },
        separators=(",", ":"),
    )


def decode_request(line: str) -> OracleRequest:
    try:
        obj = json.loads(line)
        points = tuple(
            PointPrompt(int(x), int(y), 0) for x, y in obj["points"]
        )
        return OracleRequest(str(obj["request_id"]), str(obj["image_ref"]), points)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedResponse(f"bad request line: {exc}") from exc


def encode_response(response: OracleResponse) -> str:
    cs = response.candidates
    return json.dumps(
        {
            "request_id": response.request_id,
            "masks": [
                {
                    "rle": base64.b64encode(rle_encode(mask)).decode("ascii"),
                    "score": score,
                }
                for mask, score in zip(cs.candidates, cs.scores)
            ],
            "width": cs.width,
            "height": cs.height,
        },
        separators=(",", ":"),
    )


def parse_response_line(line: str) -> OracleResponse | WireErrorLine | StreamHeader:
    """Parse one adapter output line.

    Raises MalformedResponse for anything that is not a well-formed
    response, error, or header object.
    """
    try:
        obj = json.loads(line)
    except ValueError as exc:
        raise MalformedResponse(f"unparseable line: {line[:80]!r}") from exc
    if not isinstance(obj, dict):
        raise MalformedResponse(f"line is not an object: {line[:80]!r}")
    if "header" in obj:
        return StreamHeader(dict(obj["header"]))
    if "error" in obj:
        return WireErrorLine(str(obj.get("request_id", "")), str(obj["error"]))
    try:
        width = int(obj["width"])
        height = int(obj["height"])
        masks = obj["masks"]
        if len(masks) != 3:
            raise MalformedResponse(
                f"response carries {len(masks)} masks, protocol requires 3"
            )
        candidates: list[BinaryMask] = []
        scores: list[float] = []
        for entry in masks:
            payload = base64.b64decode(entry["rle"], validate=True)
            candidates.append(rle_decode(payload, width, height))
            scores.append(float(entry["score"]))
        cs = CandidateMaskSet(candidates, (scores[0], scores[1], scores[2]))
        return OracleResponse(str(obj["request_id"]), cs)
    except MalformedResponse:
        raise
    except Exception as exc:
        raise MalformedResponse(f"bad response line: {exc}") from exc


def match_responses(
    requests: Sequence[OracleRequest], lines: Iterable[str]
) -> dict[str, OracleResponse]:
    """Pair a batch of requests with adapter output lines by request_id.

    Order-insensitive. Every request id must appear in exactly one
    response line; duplicates, unknown ids, or missing ids raise
    MalformedResponse. Error lines raise for their request.
    """
    wanted = {r.request_id for r in requests}
    if len(wanted) != len(requests):
        raise ValueError("request ids must be unique within a batch")
    matched: dict[str, OracleResponse] = {}
    for raw in lines:
        raw = raw.strip()
        if not raw:
            continue
        parsed = parse_response_line(raw)
        if isinstance(parsed, StreamHeader):
            continue
        if isinstance(parsed, WireErrorLine):
            raise OracleFailure(
                f"oracle error for {parsed.request_id}: {parsed.message}"
            )
        if parsed.request_id not in wanted:
            raise MalformedResponse(f"unsolicited response id {parsed.request_id!r}")
        if parsed.request_id in matched:
            raise MalformedResponse(f"duplicate response id {parsed.request_id!r}")
        matched[parsed.request_id] = parsed
    missing = wanted - set(matched)
    if missing:
        raise MalformedResponse(f"no response for ids {sorted(missing)}")
    return matched


class FileProtocolOracle:
    """Client for an external adapter speaking the line protocol.

    Spawns the adapter once and streams requests over its stdin, matching
    responses by id so out-of-order replies are fine. The command comes
    from the constructor or the SESAM_ORACLE_CMD environment variable.
    """

    def __init__(self, command: str | None = None):
        command = command or os.environ.get(ORACLE_CMD_ENV)
        if not command:
            raise BackendUnavailable(
                f"no adapter command given and {ORACLE_CMD_ENV} is unset"
            )
        self._argv = shlex.split(command)
        self._proc: subprocess.Popen | None = None
        self._buffered: dict[str, OracleResponse] = {}
        self.header: StreamHeader | None = None

    def _ensure_started(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self._argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise BackendUnavailable(f"cannot spawn {self._argv}: {exc}") from exc
        return self._proc

    def query(self, request: OracleRequest) -> OracleResponse:
        proc = self._ensure_started()
        try:
            proc.stdin.write(encode_request(request) + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise BackendUnavailable(f"adapter pipe closed: {exc}") from exc
        while request.request_id not in self._buffered:
            line = proc.stdout.readline()
            if not line:
                raise BackendUnavailable("adapter closed its output stream")
            parsed = parse_response_line(line)
            if isinstance(parsed, StreamHeader):
                self.header = parsed
                continue
            if isinstance(parsed, WireErrorLine):
                if parsed.request_id == request.request_id:
                    raise UnknownImage(parsed.message)
                raise OracleFailure(
                    f"oracle error for {parsed.request_id}: {parsed.message}"
                )
            self._buffered[parsed.request_id] = parsed
        return self._buffered.pop(request.request_id)

    def close(self) -> None:
        if self._proc is not None:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait(timeout=10)
            self._proc = None

    def __enter__(self) -> "FileProtocolOracle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

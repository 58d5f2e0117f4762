"""ASCII line protocol between the acquisition board and the host.

One frame per line::

    $F,<seq>,<mq2>,<mq135>,<mq3>,<tgs2610>,<tgs2611>,<hum>,<temp>*<HH>\\n

``HH`` is the XOR of every byte strictly between ``$`` and ``*``, as two
uppercase hex digits.  Channel values carry exactly three decimals.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator, Union

from .core import N_CHANNELS, SensorFrame

MAX_SEQ = 2**32 - 1

_SEQ_RE = re.compile(rb"[0-9]+")
_VALUE_RE = re.compile(rb"-?[0-9]+\.[0-9]{3}")
_HEX_RE = re.compile(rb"[0-9A-F]{2}")


class FrameError(ValueError):
    """A line that is not a valid frame.  ``kind`` is one of
    ``bad_prefix``, ``bad_field_count``, ``bad_number``, ``bad_checksum``."""

    KINDS = ("bad_prefix", "bad_field_count", "bad_number", "bad_checksum")

    def __init__(self, kind: str, line: bytes, detail: str = ""):
        assert kind in self.KINDS
        super().__init__(f"{kind}: {detail} in {line!r}" if detail else f"{kind} in {line!r}")
        self.kind = kind
        self.line = line


@dataclass(frozen=True)
class WireFrame:
    seq: int
    frame: SensorFrame
    checksum: int


def checksum(payload: bytes) -> int:
    cs = 0
    for b in payload:
        cs ^= b
    return cs


def serialize_frame(seq: int, frame: SensorFrame) -> bytes:
    if not 0 <= seq <= MAX_SEQ:
        raise ValueError(f"sequence number {seq} outside 0..{MAX_SEQ}")
    values = frame.channels if isinstance(frame, SensorFrame) else tuple(frame)
    if len(values) != N_CHANNELS:
        raise ValueError(f"expected {N_CHANNELS} channels, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"non-finite channel value in {values}")
    payload = ("F,%d," % seq + ",".join("%.3f" % v for v in values)).encode("ascii")
    return b"$" + payload + b"*%02X\n" % checksum(payload)


def parse_frame(line: bytes) -> WireFrame:
    """Strictly parse one line (with or without its trailing LF)."""
    line = bytes(line)
    body = line[:-1] if line.endswith(b"\n") else line
    if not body.startswith(b"$F,"):
        raise FrameError("bad_prefix", line)
    star = body.find(b"*")
    if star < 0:
        raise FrameError("bad_checksum", line, "missing '*'")
    payload, tail = body[1:star], body[star + 1:]
    if not _HEX_RE.fullmatch(tail):
        raise FrameError("bad_checksum", line, "checksum must be two uppercase hex digits")
    expected = checksum(payload)
    if int(tail, 16) != expected:
        raise FrameError("bad_checksum", line, f"got {tail.decode()}, computed {expected:02X}")

    fields = payload.split(b",")
    if len(fields) != 2 + N_CHANNELS:
        raise FrameError("bad_field_count", line, f"{len(fields) - 2} channel fields")
    if not _SEQ_RE.fullmatch(fields[1]) or int(fields[1]) > MAX_SEQ:
        raise FrameError("bad_number", line, f"sequence {fields[1]!r}")
    for f in fields[2:]:
        if not _VALUE_RE.fullmatch(f):
            raise FrameError("bad_number", line, f"value {f!r}")
    frame = SensorFrame(tuple(float(f) for f in fields[2:]))
    return WireFrame(int(fields[1]), frame, expected)


# -- stream reading ----------------------------------------------------------


@dataclass(frozen=True)
class SkipNotice:
    """A discarded stretch of bytes; ``count`` is the running total of skips."""

    reason: str
    data: bytes
    count: int


@dataclass(frozen=True)
class GapNotice:
    expected: int
    received: int

    @property
    def missing(self) -> int:
        return self.received - self.expected


StreamEvent = Union[WireFrame, SkipNotice, GapNotice]


class StreamReader:
    """Incremental frame decoder.  Feed arbitrary byte chunks, collect events.

    Lines are split on LF.  Bytes before the last ``$`` of a line are
    reported as garbage so that a frame glued to line noise is still
    recovered.  A trailing CR is tolerated.  Blank lines are ignored.
    """

    def __init__(self):
        self._buf = bytearray()
        self.skipped = 0
        self.frames = 0
        self._last_seq: int | None = None

    def feed(self, chunk: bytes) -> list[StreamEvent]:
        self._buf += chunk
        events: list[StreamEvent] = []
        while True:
            nl = self._buf.find(b"\n")
            if nl < 0:
                break
            line = bytes(self._buf[:nl + 1])
            del self._buf[:nl + 1]
            self._line(line, events)
        return events

    def close(self) -> list[StreamEvent]:
        """Flush an unterminated final line as a skip."""
        events: list[StreamEvent] = []
        if self._buf.strip():
            self._skip("unterminated line at end of stream", bytes(self._buf), events)
        self._buf.clear()
        return events

    def _skip(self, reason: str, data: bytes, events: list) -> None:
        self.skipped += 1
        events.append(SkipNotice(reason, data, self.skipped))

    def _line(self, line: bytes, events: list) -> None:
        body = line[:-1]
        if body.endswith(b"\r"):
            body = body[:-1]
        if not body.strip():
            return
        start = body.rfind(b"$")
        if start > 0:
            self._skip("garbage before frame", body[:start], events)
            body = body[start:]
        try:
            wf = parse_frame(body + b"\n")
        except FrameError as exc:
            self._skip(exc.kind, body, events)
            return
        if self._last_seq is not None and wf.seq > self._last_seq + 1:
            events.append(GapNotice(self._last_seq + 1, wf.seq))
        self._last_seq = wf.seq
        self.frames += 1
        events.append(wf)


def iter_chunks(fh: BinaryIO, size: int = 4096) -> Iterator[bytes]:
    while True:
        chunk = fh.read(size)
        if not chunk:
            return
        yield chunk


def read_stream(source: Iterable[bytes]) -> Iterator[StreamEvent]:
    """Decode frames from an iterable of byte chunks (or a binary file)."""
    if hasattr(source, "read"):
        source = iter_chunks(source)
    reader = StreamReader()
    for chunk in source:
        yield from reader.feed(chunk)
    yield from reader.close()


def frames_to_wire(frames: Iterable[SensorFrame], start_seq: int = 0) -> bytes:
    return b"".join(serialize_frame((start_seq + i) % (MAX_SEQ + 1), f) for i, f in enumerate(frames))

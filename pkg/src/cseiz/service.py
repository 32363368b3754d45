"""Local telemetry service emulating the transmission/storage/access tier.

An append-only per-channel event store with: record ingestion (ack =
sequence number), time-filtered queries, an outbox that receives one
notification per ingested detection, and latest-wins prescriptions that
feed back into the closed loop. Persistence is one JSON object per line,
flushed per append; replaying the log reconstructs identical state.

Wire protocol (HTTP/1.1, JSON bodies):
    POST /channel/{id}/feed          -> {"seq": n}
    GET  /channel/{id}/events?since= -> [records]
    POST /prescription               -> {"seq": n}
    GET  /prescription/latest        -> prescription
"""

import json
import re
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from cseiz.errors import CseizError, SequencingError

RECORD_KINDS = ("frame_summary", "detection", "dose")


@dataclass(frozen=True)
class ChannelRecord:
    timestamp: float
    kind: str
    payload: dict

    def to_json(self):
        return {"timestamp": self.timestamp, "kind": self.kind,
                "payload": self.payload}

    @classmethod
    def from_json(cls, obj):
        return cls(timestamp=float(obj["timestamp"]), kind=str(obj["kind"]),
                   payload=dict(obj["payload"]))


@dataclass(frozen=True)
class Prescription:
    issued_at: float
    dose_duration_s: float
    notes: str = ""

    def __post_init__(self):
        if self.dose_duration_s <= 0:
            raise CseizError("prescription dose duration must be positive")

    def to_json(self):
        return {"issued_at": self.issued_at,
                "dose_duration_s": self.dose_duration_s, "notes": self.notes}

    @classmethod
    def from_json(cls, obj):
        return cls(issued_at=float(obj["issued_at"]),
                   dose_duration_s=float(obj["dose_duration_s"]),
                   notes=str(obj.get("notes", "")))


def validate_record(record):
    """Schema-level validation shared by both ingestion paths."""
    if record.kind not in RECORD_KINDS:
        raise CseizError(f"unknown record kind {record.kind!r}")
    p = record.payload
    if record.kind == "dose":
        if float(p.get("duration_s", 0)) <= 0:
            raise CseizError("dose duration_s must be positive")
        if float(p.get("volume_ml", 0)) < 0:
            raise CseizError("dose volume_ml must be non-negative")
        if float(p.get("reservoir_remaining_ml", 0)) < 0:
            raise CseizError("reservoir_remaining_ml must be non-negative")
    if record.kind == "detection" and "time_s" not in p:
        raise CseizError("detection payload requires time_s")


def _dump(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class EventStore:
    """Append-only store. One writer lock per channel; reads snapshot."""

    def __init__(self, root_dir=None):
        self.root = Path(root_dir) if root_dir is not None else None
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
        self._channels = {}
        self._outbox = []
        self._prescriptions = []
        self._lock = threading.Lock()
        self._channel_locks = {}

    def _lock_for(self, channel):
        with self._lock:
            return self._channel_locks.setdefault(channel, threading.Lock())

    def _append_line(self, name, obj):
        if self.root is None:
            return
        safe = re.sub(r"[^A-Za-z0-9_.-]", "_", name)
        with open(self.root / f"{safe}.jsonl", "a", encoding="utf-8") as f:
            f.write(_dump(obj) + "\n")
            f.flush()

    def ingest_record(self, channel, record):
        """Durably append one record; returns the 1-based sequence number.

        Raises SequencingError on a timestamp regression (equal
        timestamps are allowed: a dose shares its detection's time).
        """
        validate_record(record)
        with self._lock_for(channel):
            records = self._channels.setdefault(channel, [])
            if records and record.timestamp < records[-1].timestamp:
                raise SequencingError(
                    f"timestamp {record.timestamp} regresses behind "
                    f"{records[-1].timestamp} on channel {channel!r}")
            records.append(record)
            seq = len(records)
            self._append_line(f"channel_{channel}", record.to_json())
            note = self.notify_on_detection(channel, record)
            if note is not None:
                self._outbox.append(note)
                self._append_line("outbox", note)
            return seq

    def notify_on_detection(self, channel, record):
        """One notification per detection record, none otherwise."""
        if record.kind != "detection":
            return None
        return {"channel": channel, "timestamp": record.timestamp,
                "event_time_s": record.payload.get("time_s")}

    def query_events(self, channel, since=0.0):
        """Records with timestamp >= since, in append order."""
        with self._lock_for(channel):
            if channel not in self._channels:
                raise KeyError(f"unknown channel {channel!r}")
            return [r for r in self._channels[channel]
                    if r.timestamp >= since]

    def notifications(self):
        return list(self._outbox)

    def post_prescription(self, prescription):
        with self._lock:
            self._prescriptions.append(prescription)
            self._append_line("prescriptions", prescription.to_json())
            return len(self._prescriptions)

    def get_latest_prescription(self):
        with self._lock:
            return self._prescriptions[-1] if self._prescriptions else None

    @classmethod
    def replay(cls, root_dir):
        """Rebuild an in-memory store from its on-disk log."""
        root = Path(root_dir)
        store = cls(root_dir=None)
        for path in sorted(root.glob("channel_*.jsonl")):
            channel = path.stem[len("channel_"):]
            for line in path.read_text().splitlines():
                store.ingest_record(channel,
                                    ChannelRecord.from_json(json.loads(line)))
        pres = root / "prescriptions.jsonl"
        if pres.exists():
            for line in pres.read_text().splitlines():
                store.post_prescription(Prescription.from_json(json.loads(line)))
        return store


class StoreClient:
    """In-process client bound to one channel; same surface as the wire
    client so the closed loop can use either interchangeably."""

    def __init__(self, store, channel="cseiz"):
        self.store = store
        self.channel = channel

    def ingest_record(self, record):
        return self.store.ingest_record(self.channel, record)

    def query_events(self, since=0.0):
        return self.store.query_events(self.channel, since)

    def post_prescription(self, prescription):
        return self.store.post_prescription(prescription)

    def get_latest_prescription(self):
        return self.store.get_latest_prescription()


class WireClient:
    """HTTP client for the service, same surface as StoreClient."""

    def __init__(self, base_url, channel="cseiz", timeout=10.0):
        self.base = base_url.rstrip("/")
        self.channel = channel
        self.timeout = timeout

    def _request(self, method, path, body=None):
        data = _dump(body).encode() if body is not None else None
        req = urllib.request.Request(
            f"{self.base}{path}", data=data, method=method,
            headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return json.loads(resp.read().decode() or "null")
        except urllib.error.HTTPError as err:
            detail = err.read().decode(errors="replace")
            if err.code == 409:
                raise SequencingError(detail)
            if err.code == 404:
                raise KeyError(detail)
            raise CseizError(f"HTTP {err.code}: {detail}")

    def ingest_record(self, record):
        out = self._request("POST", f"/channel/{self.channel}/feed",
                            record.to_json())
        return out["seq"]

    def query_events(self, since=0.0):
        out = self._request(
            "GET", f"/channel/{self.channel}/events?since={since}")
        return [ChannelRecord.from_json(o) for o in out]

    def post_prescription(self, prescription):
        return self._request("POST", "/prescription",
                             prescription.to_json())["seq"]

    def get_latest_prescription(self):
        try:
            out = self._request("GET", "/prescription/latest")
        except KeyError:
            return None
        return Prescription.from_json(out) if out else None


class _Handler(BaseHTTPRequestHandler):
    store = None
    _feed_re = re.compile(r"^/channel/([^/]+)/feed$")
    _events_re = re.compile(r"^/channel/([^/]+)/events$")

    def log_message(self, fmt, *args):  # silence per-request stderr noise
        pass

    def _send(self, code, obj):
        body = _dump(obj).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _body(self):
        length = int(self.headers.get("Content-Length", 0))
        return json.loads(self.rfile.read(length).decode() or "null")

    def do_POST(self):
        parsed = urlparse(self.path)
        m = self._feed_re.match(parsed.path)
        try:
            if m:
                record = ChannelRecord.from_json(self._body())
                seq = self.store.ingest_record(m.group(1), record)
                self._send(200, {"seq": seq})
                return
            if parsed.path == "/prescription":
                seq = self.store.post_prescription(
                    Prescription.from_json(self._body()))
                self._send(200, {"seq": seq})
                return
            self._send(404, {"error": f"no route {parsed.path}"})
        except SequencingError as err:
            self._send(409, {"error": str(err)})
        except (CseizError, KeyError, ValueError) as err:
            self._send(400, {"error": str(err)})

    def do_GET(self):
        parsed = urlparse(self.path)
        m = self._events_re.match(parsed.path)
        try:
            if m:
                since = float(parse_qs(parsed.query).get("since", ["0"])[0])
                records = self.store.query_events(m.group(1), since)
                self._send(200, [r.to_json() for r in records])
                return
            if parsed.path == "/prescription/latest":
                p = self.store.get_latest_prescription()
                if p is None:
                    self._send(404, {"error": "no prescription posted"})
                else:
                    self._send(200, p.to_json())
                return
            self._send(404, {"error": f"no route {parsed.path}"})
        except KeyError as err:
            self._send(404, {"error": str(err)})
        except (CseizError, ValueError) as err:
            self._send(400, {"error": str(err)})


def make_server(store, host="127.0.0.1", port=0):
    """Build (not start) an HTTP server bound to the store. Port 0 picks
    a free port; read it back from ``server.server_address``."""
    handler = type("BoundHandler", (_Handler,), {"store": store})
    return ThreadingHTTPServer((host, port), handler)


def serve_background(store, host="127.0.0.1", port=0):
    """Start the service on a daemon thread; returns (server, base_url)."""
    server = make_server(store, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, actual_port = server.server_address[:2]
    return server, f"http://{host}:{actual_port}"

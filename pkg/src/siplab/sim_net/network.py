"""Synchronous in-process transport with an adversary hook and a global log."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..sip_core import SipMessage, SipParseError, parse_message


class UnknownEndpoint(KeyError):
    pass


class Disposition(str, enum.Enum):
    DELIVERED = "delivered"
    DROPPED = "dropped"
    MODIFIED = "modified"
    INJECTED = "injected"


class HookMode(str, enum.Enum):
    OFF = "off"
    PASSIVE = "passive"
    ACTIVE = "active"


@dataclass(frozen=True)
class NetworkEvent:
    seq: int
    sender: str
    receiver: str
    data: bytes  # bytes as delivered (or as sent, when dropped)
    disposition: Disposition
    sent: bytes | None = None  # original bytes, kept when modified

    def message(self) -> SipMessage:
        return parse_message(self.data)


@dataclass(frozen=True)
class LocalEvent:
    """Something an entity did without touching the wire (a location lookup, an alert)."""

    seq: int
    actor: str
    peer: str
    label: str
    call_id: str = ""


@dataclass
class AdversaryHook:
    """``predicate(sender, receiver, data)`` picks messages; ``mutate(data)`` returns new bytes or None to drop."""

    mode: HookMode = HookMode.OFF
    predicate: Callable[[str, str, bytes], bool] = lambda s, r, d: True
    mutate: Callable[[bytes], bytes | None] | None = None
    seen: list = field(default_factory=list)

    @classmethod
    def drop_all(cls) -> AdversaryHook:
        return cls(HookMode.ACTIVE, mutate=lambda data: None)

    def apply(self, sender: str, receiver: str, data: bytes) -> tuple[bytes | None, Disposition]:
        if self.mode is HookMode.OFF or not self.predicate(sender, receiver, data):
            return data, Disposition.DELIVERED
        self.seen.append(data)
        if self.mode is HookMode.PASSIVE or self.mutate is None:
            return data, Disposition.DELIVERED
        out = self.mutate(data)
        if out is None:
            return None, Disposition.DROPPED
        if out == data:
            return data, Disposition.DELIVERED
        return out, Disposition.MODIFIED


Handler = Callable[[str, bytes], list]


class Network:
    """Endpoints exchange raw bytes; replies are delivered in order until quiet.

    A handler receives ``(sender, data)`` and returns a list of
    ``(receiver, data)`` pairs to send on its behalf.
    """

    def __init__(self, hook: AdversaryHook | None = None):
        self.hook = hook or AdversaryHook()
        self._endpoints: dict[str, Handler] = {}
        self.events: list[NetworkEvent] = []
        self.local_events: list[LocalEvent] = []
        self._seq = 0
        self._queue: deque = deque()
        self._draining = False

    def attach(self, endpoint_id: str, handler: Handler):
        self._endpoints[endpoint_id] = handler

    def detach(self, endpoint_id: str):
        self._endpoints.pop(endpoint_id, None)

    def __contains__(self, endpoint_id: str) -> bool:
        return endpoint_id in self._endpoints

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def send(self, sender: str, receiver: str, data: bytes) -> NetworkEvent:
        return self._submit(sender, receiver, data, injected=False)

    def inject(self, sender: str, receiver: str, data: bytes) -> NetworkEvent:
        """Adversary-originated bytes; they bypass the hook."""
        return self._submit(sender, receiver, data, injected=True)

    def note(self, actor: str, peer: str, label: str, call_id: str = "") -> LocalEvent:
        ev = LocalEvent(self._next_seq(), actor, peer, label, call_id)
        self.local_events.append(ev)
        return ev

    def _submit(self, sender, receiver, data, injected) -> NetworkEvent:
        for endpoint in (sender, receiver):
            if endpoint not in self._endpoints:
                raise UnknownEndpoint(endpoint)
        first = self._record(sender, receiver, bytes(data), injected)
        if not self._draining:
            self._drain()
        return first

    def _record(self, sender, receiver, data, injected) -> NetworkEvent:
        if injected:
            out, disposition = data, Disposition.INJECTED
        else:
            out, disposition = self.hook.apply(sender, receiver, data)
        event = NetworkEvent(
            self._next_seq(),
            sender,
            receiver,
            data if out is None else out,
            disposition,
            sent=data if disposition is Disposition.MODIFIED else None,
        )
        self.events.append(event)
        if out is not None:
            self._queue.append(event)
        return event

    def _drain(self):
        self._draining = True
        try:
            while self._queue:
                event = self._queue.popleft()
                handler = self._endpoints.get(event.receiver)
                if handler is None:
                    continue
                for receiver, data in handler(event.sender, event.data) or ():
                    if receiver not in self._endpoints:
                        raise UnknownEndpoint(receiver)
                    self._record(event.receiver, receiver, bytes(data), injected=False)
        finally:
            self._draining = False

    @property
    def seq(self) -> int:
        return self._seq

    def transcript(self, since: int = 0) -> Transcript:
        return Transcript(tuple(e for e in self.events if e.seq > since))


@dataclass(frozen=True)
class Transcript:
    """What crossed the wire, in order. Built only from network events."""

    events: tuple[NetworkEvent, ...] = ()

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def messages(self) -> list[tuple[NetworkEvent, SipMessage]]:
        """Parsed messages of delivered events; unparseable bytes are skipped."""
        out = []
        for ev in self.events:
            if ev.disposition is Disposition.DROPPED:
                continue
            try:
                out.append((ev, ev.message()))
            except SipParseError:
                continue
        return out

    def filter(self, call_id: str) -> Transcript:
        keep = []
        for ev, msg in self.messages():
            if msg.call_id == call_id:
                keep.append(ev)
        return Transcript(tuple(keep))

    def to_text(self) -> str:
        lines = [f"{e.seq} {e.sender} {e.receiver} {e.disposition.value} {e.data.hex()}" for e in self.events]
        return "\n".join(lines) + ("\n" if lines else "")

    def export(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text())
        return path

    @classmethod
    def from_text(cls, text: str) -> Transcript:
        events = []
        for line in text.splitlines():
            if not line.strip():
                continue
            seq, sender, receiver, disposition, data = line.split(" ")
            events.append(NetworkEvent(int(seq), sender, receiver, bytes.fromhex(data), Disposition(disposition)))
        return cls(tuple(events))

    def raw_bytes(self) -> bytes:
        return b"".join(e.data for e in self.events)

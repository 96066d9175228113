"""Round-clocked transport, transcripts, statistical sizing, and run config.

The transport steps two party state machines through numbered rounds,
delivers a single DELAY tick to the device banks at the configured round,
and enforces the missing-message rule: a party that expected a message and
got none outputs the abort symbol and the run ends.
"""

from __future__ import annotations

import json
import math
import socket
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .errors import ConfigError, DegenerateParameters

EMPTY = "empty"   # the empty-string output token
ABORT = "abort"   # the bottom / abort symbol


# -- statistical sizing -------------------------------------------------------


def chernoff_bound(epsilon: float, mu: float) -> float:
    """2 exp(-eps^2 mu / 3), the two-sided multiplicative Chernoff bound."""
    if epsilon <= 0 or mu <= 0:
        raise DegenerateParameters("epsilon and mu must be positive")
    return 2.0 * math.exp(-(epsilon**2) * mu / 3.0)


def chernoff_trials(epsilon: float, mu_rate: float, confidence: float) -> int:
    """Smallest n making 2 exp(-eps^2 (mu_rate n) / 3) <= 1 - confidence."""
    if not (0 < epsilon < 1 and 0 < mu_rate < 1 and 0 < confidence < 1):
        raise DegenerateParameters("epsilon, mu_rate, confidence must be in (0, 1)")
    fail = 1.0 - confidence
    n = 3.0 * math.log(2.0 / fail) / (epsilon**2 * mu_rate)
    return max(1, math.ceil(n))


def azuma_bound(s: float, n: int, c: float) -> float:
    """exp(-s^2 / (2 n c^2)) for bounded-increment martingales."""
    if s < 0 or n <= 0 or c <= 0:
        raise DegenerateParameters("need s >= 0, n > 0, c > 0")
    return math.exp(-(s**2) / (2.0 * n * c**2))


def wilson_interval(successes: int, trials: int, z: float = 2.576) -> tuple[float, float]:
    """Wilson score interval (z = 2.576 gives 99% coverage)."""
    if trials <= 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1.0 + z**2 / trials
    center = (phat + z**2 / (2 * trials)) / denom
    margin = (z / denom) * math.sqrt(phat * (1 - phat) / trials + z**2 / (4 * trials**2))
    return (max(0.0, center - margin), min(1.0, center + margin))


# -- transcript ---------------------------------------------------------------


@dataclass
class Event:
    round: int
    sender: str           # "alice", "bob", "transport"
    kind: str             # "message", "device", "delay", "output", "abort"
    payload: Any

    def to_json(self) -> dict:
        return {"round": self.round, "sender": self.sender, "kind": self.kind,
                "payload": self.payload}

    @classmethod
    def from_json(cls, obj: dict) -> "Event":
        return cls(obj["round"], obj["sender"], obj["kind"], obj["payload"])


@dataclass
class Transcript:
    """Ordered classical record of one protocol run."""

    events: list[Event] = field(default_factory=list)

    def add(self, round_no: int, sender: str, kind: str, payload: Any) -> None:
        if self.events and round_no < self.events[-1].round:
            raise ValueError("rounds must not decrease")
        self.events.append(Event(round_no, sender, kind, payload))

    def messages(self, sender: str | None = None) -> list[Event]:
        return [
            e
            for e in self.events
            if e.kind == "message" and (sender is None or e.sender == sender)
        ]

    def to_json_line(self) -> str:
        return json.dumps([e.to_json() for e in self.events], sort_keys=True)

    @classmethod
    def from_json_line(cls, line: str) -> "Transcript":
        return cls([Event.from_json(o) for o in json.loads(line)])


# -- party protocol and transport ---------------------------------------------


class Party:
    """Base class for round-driven party state machines.

    Subclasses implement `step(round_no, inbox) -> list of payloads to send`
    and set `self.output` when done.  `expects_message(round_no)` declares
    rounds on which silence from the peer means the peer stalled.
    """

    role = "party"

    def __init__(self):
        self.output: Any = None
        self.done = False

    def expects_message(self, round_no: int) -> bool:
        return False

    def step(self, round_no: int, inbox: list) -> list:
        raise NotImplementedError


def transport_run(
    alice: Party,
    bob: Party,
    delay_round: int | None = None,
    banks: Sequence | None = None,
    max_rounds: int = 64,
) -> Transcript:
    """Run two parties to completion over an in-process round clock.

    Messages emitted in round r are delivered in round r + 1.  At the end of
    `delay_round`, every bank receives its DELAY tick.  A party that
    expected a message and received none outputs ABORT (missing-message
    rule) and the run ends.
    """
    transcript = Transcript()
    pending: dict[str, list] = {"alice": [], "bob": []}
    for round_no in range(max_rounds):
        inbox_a = pending["alice"]
        inbox_b = pending["bob"]
        pending = {"alice": [], "bob": []}
        stalled = False
        for party, inbox, name in ((alice, inbox_a, "alice"), (bob, inbox_b, "bob")):
            if party.done:
                continue
            if party.expects_message(round_no) and not inbox:
                party.output = ABORT
                party.done = True
                transcript.add(round_no, name, "abort", "missing message")
                stalled = True
        if stalled:
            break
        for party, inbox, name, peer in (
            (alice, inbox_a, "alice", "bob"),
            (bob, inbox_b, "bob", "alice"),
        ):
            if party.done:
                continue
            outgoing = party.step(round_no, inbox)
            for payload in outgoing or []:
                transcript.add(round_no, name, "message", payload)
                pending[peer].append(payload)
            if party.done:
                transcript.add(round_no, name, "output", repr(party.output))
        if delay_round is not None and round_no == delay_round:
            for bank in banks or []:
                bank.tick_delay()
            transcript.add(round_no, "transport", "delay", None)
        if alice.done and bob.done:
            break
    return transcript


# -- framed cross-process transport -------------------------------------------
# Frame layout: 4-byte big-endian length, 1-byte round tag, 1-byte sender tag,
# JSON payload.

SENDER_TAGS = {"alice": 0, "bob": 1, "transport": 2}
TAG_SENDERS = {v: k for k, v in SENDER_TAGS.items()}


def encode_frame(round_no: int, sender: str, payload: Any) -> bytes:
    body = json.dumps(payload, sort_keys=True).encode()
    frame = bytes([round_no & 0xFF, SENDER_TAGS[sender]]) + body
    return len(frame).to_bytes(4, "big") + frame


def decode_frame(buf: bytes) -> tuple[int, str, Any, bytes]:
    """Decode one frame; returns (round, sender, payload, rest)."""
    if len(buf) < 4:
        raise ValueError("short frame header")
    length = int.from_bytes(buf[:4], "big")
    frame = buf[4 : 4 + length]
    if len(frame) < length:
        raise ValueError("truncated frame")
    round_no, sender_tag = frame[0], frame[1]
    payload = json.loads(frame[2:].decode())
    return round_no, TAG_SENDERS[sender_tag], payload, buf[4 + length :]


def send_frame(sock: socket.socket, round_no: int, sender: str, payload: Any) -> None:
    sock.sendall(encode_frame(round_no, sender, payload))


def recv_frame(sock: socket.socket) -> tuple[int, str, Any]:
    header = _recv_exact(sock, 4)
    length = int.from_bytes(header, "big")
    frame = _recv_exact(sock, length)
    round_no, sender_tag = frame[0], frame[1]
    return round_no, TAG_SENDERS[sender_tag], json.loads(frame[2:].decode())


def _recv_exact(sock: socket.socket, count: int) -> bytes:
    buf = b""
    while len(buf) < count:
        chunk = sock.recv(count - len(buf))
        if not chunk:
            raise ConnectionError("socket closed mid-frame")
        buf += chunk
    return buf


# -- reports ------------------------------------------------------------------


@dataclass
class Report:
    claim: str
    statistic: float
    ci_lo: float
    ci_hi: float
    threshold: float
    verdict: str          # "pass" or "fail"
    runtime_s: float
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "claim": self.claim,
            "statistic": self.statistic,
            "ci": [self.ci_lo, self.ci_hi],
            "threshold": self.threshold,
            "verdict": self.verdict,
            "runtime_s": self.runtime_s,
            "detail": self.detail,
        }

    @staticmethod
    def csv_header() -> str:
        return "claim,x,y,ci_lo,ci_hi"

    def csv_row(self, x: float | str = "") -> str:
        return f"{self.claim},{x},{self.statistic},{self.ci_lo},{self.ci_hi}"


def make_report(claim: str, statistic: float, threshold: float, runtime_s: float,
                ci: tuple[float, float] | None = None, higher_is_worse: bool = True,
                detail: dict | None = None) -> Report:
    lo, hi = ci if ci is not None else (statistic, statistic)
    ok = statistic <= threshold if higher_is_worse else statistic >= threshold
    return Report(claim, statistic, lo, hi, threshold, "pass" if ok else "fail",
                  runtime_s, detail or {})


# -- run configuration ---------------------------------------------------------

CONFIG_VERSION = 1


@dataclass
class RunConfig:
    protocol: str
    n: int
    device: dict
    code: dict | list
    eps_r: float
    c_r: float
    trials: int
    seed: int
    mode: str = "monte_carlo"
    extractor: dict = field(default_factory=lambda: {"seeded": "toeplitz", "ext3": "trilinear"})
    out: str | None = None
    lambda_report: float | None = None
    warnings: list = field(default_factory=list)

    @classmethod
    def from_json(cls, obj: dict) -> "RunConfig":
        if obj.get("version", CONFIG_VERSION) != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {obj.get('version')}")
        required = ["protocol", "n", "device", "code", "seed"]
        missing = [key for key in required if key not in obj]
        if missing:
            raise ConfigError(f"missing config fields: {missing}")
        cfg = cls(
            protocol=obj["protocol"],
            n=obj["n"],
            device=obj["device"],
            code=obj["code"],
            eps_r=float(_maybe_rational(obj.get("eps_r", 1e-3))),
            c_r=float(_maybe_rational(obj.get("c_r", 0.5))),
            trials=int(obj.get("trials", 1000)),
            seed=int(obj["seed"]),
            mode=obj.get("mode", "monte_carlo"),
            extractor=obj.get("extractor", {"seeded": "toeplitz", "ext3": "trilinear"}),
            out=obj.get("out"),
            lambda_report=obj.get("lambda"),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.protocol not in ("ot", "bc"):
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.mode not in ("exact", "monte_carlo"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.n <= 0 or self.trials <= 0:
            raise ConfigError("n and trials must be positive")
        if self.protocol == "bc":
            if self.n % 3:
                raise ConfigError("bit commitment needs n divisible by 3")
            if self.n // 3 < 9:
                self.warnings.append(
                    f"n/3 = {self.n // 3} < 9: trilinear ext3 sources are very short"
                )


def _maybe_rational(value):
    if isinstance(value, str) and "/" in value:
        from fractions import Fraction

        return Fraction(value)
    return value


def load_config(path: str) -> RunConfig:
    with open(path) as fh:
        return RunConfig.from_json(json.load(fh))

"""The bit-commitment protocol: commit and reveal phases on one device bank.

Commit: both parties fire with uniform inputs, DELAY, Bob sends Y, Alice
splits the common bits into thirds, sends the syndromes and the masked bit
C = d xor ext3(R1, R2, R3).  Reveal: Alice opens (X, A, R); Bob checks
consistency, the syndromes, and the Hamming distance of each block against
his own common bits.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .coding import LinearCode, syndrome, syndrome_decode
from .errors import ConfigError
from .extract import Ext3Fn, ext3, xor_bits
from .harness import ABORT, EMPTY, Party, Transcript, transport_run
from .msdevice import DeviceBank, Side, answer_bit, derive_seed

Bits = tuple[int, ...]


@dataclass(frozen=True)
class BCConfig:
    n: int
    codes: tuple[LinearCode, LinearCode, LinearCode]
    eps_r: float = 1e-9
    c_r: float = 0.5

    def __post_init__(self):
        if self.n % 3:
            raise ConfigError("n must be a multiple of 3")
        for code in self.codes:
            if code.n != self.n // 3:
                raise ConfigError(
                    f"code block length {code.n} != n / 3 = {self.n // 3}"
                )
        if self.reveal_threshold <= 0:
            raise ConfigError("reveal threshold must be positive")

    @property
    def block(self) -> int:
        return self.n // 3

    @property
    def reveal_threshold(self) -> float:
        """Reject a block whose distance from Bob's common bits reaches
        (1 + c_r) * eps_r^(1/6) * n/3."""
        return (1 + self.c_r) * self.eps_r ** (1 / 6) * (self.n / 3)

    def blocks_of(self, v) -> tuple:
        m = self.block
        return tuple(tuple(v[j * m : (j + 1) * m]) for j in range(3))


@dataclass
class CommitMessage:
    c: int
    w: tuple[Bits, Bits, Bits]

    def to_payload(self) -> dict:
        return {"c": self.c, "w": [list(wj) for wj in self.w]}

    @classmethod
    def from_payload(cls, p: dict) -> "CommitMessage":
        return cls(p["c"], tuple(tuple(wj) for wj in p["w"]))


@dataclass
class RevealMessage:
    x: tuple[int, ...]
    a: tuple[int, ...]
    r: tuple[Bits, Bits, Bits]

    def to_payload(self) -> dict:
        return {"x": list(self.x), "a": list(self.a), "r": [list(rj) for rj in self.r]}

    @classmethod
    def from_payload(cls, p: dict) -> "RevealMessage":
        return cls(tuple(p["x"]), tuple(p["a"]), tuple(tuple(rj) for rj in p["r"]))


@dataclass
class AliceCommitState:
    d: int
    x: tuple[int, ...]
    answers: tuple[int, ...]
    y: tuple[int, ...]
    r: tuple[Bits, Bits, Bits]


@dataclass
class BobCommitState:
    y: tuple[int, ...]
    answers: tuple[int, ...]
    commit: CommitMessage


def common_bits(answers, inputs) -> Bits:
    """answers[i] evaluated at inputs[i] (the bit the other side shares)."""
    return tuple(answer_bit(a, q) for a, q in zip(answers, inputs))


def bc_commit_honest(
    cfg: BCConfig, d: int, bank: DeviceBank, seed: int, ext3_fn: Ext3Fn = ext3
) -> tuple[CommitMessage, AliceCommitState, BobCommitState]:
    """Commit phase with both parties honest; phase outputs are both EMPTY."""
    rng_a = random.Random(derive_seed(seed, "bc", "alice"))
    rng_b = random.Random(derive_seed(seed, "bc", "bob"))
    x = tuple(rng_a.randrange(3) for _ in range(cfg.n))
    y = tuple(rng_b.randrange(3) for _ in range(cfg.n))
    a_ans = tuple(bank.sample(Side.ALICE, i, x[i]) for i in range(cfg.n))
    b_ans = tuple(bank.sample(Side.BOB, i, y[i]) for i in range(cfg.n))
    bank.tick_delay()
    # Bob -> Alice: Y
    r_blocks = cfg.blocks_of(common_bits(a_ans, y))
    w = tuple(syndrome(cfg.codes[j], r_blocks[j]) for j in range(3))
    c = d ^ ext3_fn(*r_blocks)
    msg = CommitMessage(c, w)
    alice_state = AliceCommitState(d, x, a_ans, y, r_blocks)
    bob_state = BobCommitState(y, b_ans, msg)
    return msg, alice_state, bob_state


def honest_reveal_message(state: AliceCommitState) -> RevealMessage:
    return RevealMessage(state.x, state.answers, state.r)


def bc_check_reveal(
    cfg: BCConfig, bob_state: BobCommitState, reveal: RevealMessage,
    ext3_fn: Ext3Fn = ext3,
):
    """Bob's reveal-phase output: d, or ABORT when any check fails."""
    opened = cfg.blocks_of(common_bits(reveal.a, bob_state.y))
    mine = cfg.blocks_of(common_bits(bob_state.answers, reveal.x))
    for j in range(3):
        if reveal.r[j] != opened[j]:
            return ABORT
        if syndrome(cfg.codes[j], reveal.r[j]) != bob_state.commit.w[j]:
            return ABORT
        dist = sum(u != v for u, v in zip(reveal.r[j], mine[j]))
        if dist >= cfg.reveal_threshold:
            return ABORT
    return bob_state.commit.c ^ ext3_fn(*reveal.r)


def bc_reveal_honest(
    cfg: BCConfig,
    alice_state: AliceCommitState,
    bob_state: BobCommitState,
    ext3_fn: Ext3Fn = ext3,
):
    """Honest reveal; returns Bob's recovered bit or ABORT."""
    return bc_check_reveal(cfg, bob_state, honest_reveal_message(alice_state), ext3_fn)


# -- transported two-phase run ---------------------------------------------------


class BCAlice(Party):
    role = "alice"

    def __init__(self, cfg: BCConfig, d: int, bank: DeviceBank, seed: int,
                 ext3_fn: Ext3Fn = ext3):
        super().__init__()
        self.cfg = cfg
        self.d = d
        self.bank = bank
        self.rng = random.Random(derive_seed(seed, "bc", "alice"))
        self.ext3_fn = ext3_fn
        self.x: tuple[int, ...] = ()
        self.answers: tuple[int, ...] = ()
        self.r: tuple | None = None
        self.o1 = None

    def expects_message(self, round_no: int) -> bool:
        return round_no == 2  # Bob's Y announcement

    def step(self, round_no: int, inbox: list) -> list:
        if round_no == 0:
            self.x = tuple(self.rng.randrange(3) for _ in range(self.cfg.n))
            self.answers = tuple(
                self.bank.sample(Side.ALICE, i, xi) for i, xi in enumerate(self.x)
            )
            return []
        if round_no == 2 and inbox:
            y = tuple(inbox[0]["y"])
            self.r = self.cfg.blocks_of(common_bits(self.answers, y))
            w = tuple(syndrome(self.cfg.codes[j], self.r[j]) for j in range(3))
            c = self.d ^ self.ext3_fn(*self.r)
            self.o1 = EMPTY
            return [{"phase": "commit", **CommitMessage(c, w).to_payload()}]
        if round_no == 4:
            self.output = EMPTY
            self.done = True
            return [
                {"phase": "reveal", **RevealMessage(self.x, self.answers, self.r).to_payload()}
            ]
        return []


class BCBob(Party):
    role = "bob"

    def __init__(self, cfg: BCConfig, bank: DeviceBank, seed: int,
                 ext3_fn: Ext3Fn = ext3):
        super().__init__()
        self.cfg = cfg
        self.bank = bank
        self.rng = random.Random(derive_seed(seed, "bc", "bob"))
        self.ext3_fn = ext3_fn
        self.y: tuple[int, ...] = ()
        self.answers: tuple[int, ...] = ()
        self.commit: CommitMessage | None = None
        self.o1 = None

    def expects_message(self, round_no: int) -> bool:
        return round_no in (3, 5)

    def step(self, round_no: int, inbox: list) -> list:
        if round_no == 0:
            self.y = tuple(self.rng.randrange(3) for _ in range(self.cfg.n))
            self.answers = tuple(
                self.bank.sample(Side.BOB, i, yi) for i, yi in enumerate(self.y)
            )
            return []
        if round_no == 1:
            return [{"phase": "y", "y": list(self.y)}]
        if round_no == 3 and inbox:
            self.commit = CommitMessage.from_payload(inbox[0])
            self.o1 = EMPTY
            return []
        if round_no == 5 and inbox:
            reveal = RevealMessage.from_payload(inbox[0])
            state = BobCommitState(self.y, self.answers, self.commit)
            self.output = bc_check_reveal(self.cfg, state, reveal, self.ext3_fn)
            self.done = True
        return []


@dataclass
class BCOutcome:
    o1_a: object
    o1_b: object
    o_a: object
    o_b: object            # recovered bit or ABORT
    transcript: Transcript


def bc_run_honest(cfg: BCConfig, d: int, bank: DeviceBank, seed: int,
                  ext3_fn: Ext3Fn = ext3) -> BCOutcome:
    alice = BCAlice(cfg, d, bank, seed, ext3_fn)
    bob = BCBob(cfg, bank, seed, ext3_fn)
    transcript = transport_run(alice, bob, delay_round=0, banks=[bank])
    return BCOutcome(alice.o1, bob.o1, alice.output, bob.output, transcript)


# -- binding machinery -----------------------------------------------------------


def closest(r_tilde: Bits, w_tilde: Bits, code: LinearCode):
    """The unique string within half minimum distance of r_tilde whose
    syndrome is w_tilde, or None (bottom)."""
    shift = syndrome_decode(code, xor_bits(syndrome(code, r_tilde), w_tilde))
    if shift is None:
        return None
    return xor_bits(r_tilde, shift)


@dataclass
class CommitRecord:
    """Alice-side record of a commit transcript, the input to classification."""

    x_tilde: tuple[int, ...]
    a_tilde: tuple[int, ...]
    w_tilde: tuple[Bits, Bits, Bits]
    c_tilde: int
    y: tuple[int, ...]

    def r_tilde(self, cfg: BCConfig) -> tuple[Bits, Bits, Bits]:
        return cfg.blocks_of(common_bits(self.a_tilde, self.y))


def classify_commit(record: CommitRecord, cfg: BCConfig,
                    ext3_fn: Ext3Fn = ext3) -> tuple[str, str]:
    """Deterministic commit classification.

    Returns (cell, tag) with cell one of "D_bot", "D_0", "D_1" and tag "E"
    (cell is D_0 or D_bot) or "Ec".
    """
    r_blocks = record.r_tilde(cfg)
    closests = []
    for j in range(3):
        rc = closest(r_blocks[j], record.w_tilde[j], cfg.codes[j])
        if rc is None:
            return "D_bot", "E"
        closests.append(rc)
    bit = record.c_tilde ^ ext3_fn(*closests)
    return (f"D_{bit}", "E" if bit == 0 else "Ec")

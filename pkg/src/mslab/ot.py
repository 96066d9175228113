"""The oblivious-transfer protocol on Magic Square banks, plus its test phase.

Rounds: both parties fire their device ports, the DELAY ticks, Alice sends
one batch (C0, C1, T0, T1, X, W0, W1), Bob decodes.  Bob never sends
anything, which realizes receiver privacy structurally.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .coding import LinearCode, syndrome, syndrome_decode
from .errors import ConfigError
from .extract import seeded_extract, toeplitz_seed_length, xor_bits
from .harness import ABORT, EMPTY, Party, Transcript, transport_run
from .msdevice import DeviceBank, Side, answer_bit, derive_seed

Bits = tuple[int, ...]


@dataclass(frozen=True)
class OTConfig:
    n: int
    code: LinearCode
    eps_r: float = 1e-3
    c_r: float = 0.5
    out_len: int = 1

    def __post_init__(self):
        if self.code.n != self.n:
            raise ConfigError(f"code block length {self.code.n} != n = {self.n}")
        delta = self.code.d / self.code.n
        if not (1 + self.c_r) * self.eps_r < delta / 2:
            raise ConfigError(
                f"(1 + c_r) * eps_r = {(1 + self.c_r) * self.eps_r} must be < "
                f"delta / 2 = {delta / 2}"
            )

    @property
    def seed_len(self) -> int:
        return toeplitz_seed_length(self.n, self.out_len)


@dataclass
class OTMessages:
    c0: int
    c1: int
    t0: Bits
    t1: Bits
    x: tuple[int, ...]
    w0: Bits
    w1: Bits

    def to_payload(self) -> dict:
        return {
            "c0": self.c0, "c1": self.c1,
            "t0": list(self.t0), "t1": list(self.t1),
            "x": list(self.x), "w0": list(self.w0), "w1": list(self.w1),
        }

    @classmethod
    def from_payload(cls, p: dict) -> "OTMessages":
        return cls(p["c0"], p["c1"], tuple(p["t0"]), tuple(p["t1"]),
                   tuple(p["x"]), tuple(p["w0"]), tuple(p["w1"]))


@dataclass
class OTOutcome:
    o_a: str
    o_b: object          # 0, 1, or ABORT
    transcript: Transcript
    alice_view: dict = field(default_factory=dict)


def alice_compute_messages(
    cfg: OTConfig, s0: int, s1: int, x: tuple[int, ...], answers: list[int],
    rng: random.Random,
) -> tuple[OTMessages, Bits, Bits]:
    """Alice's post-DELAY computation; returns the message batch and R0, R1."""
    r0 = tuple(answer_bit(a, 0) for a in answers)
    r1 = tuple(answer_bit(a, 1) for a in answers)
    t0 = tuple(rng.randrange(2) for _ in range(cfg.seed_len))
    t1 = tuple(rng.randrange(2) for _ in range(cfg.seed_len))
    w0 = syndrome(cfg.code, r0)
    w1 = syndrome(cfg.code, r1)
    c0 = s0 ^ seeded_extract(r0, t0, cfg.out_len)[0]
    c1 = s1 ^ seeded_extract(r1, t1, cfg.out_len)[0]
    return OTMessages(c0, c1, t0, t1, x, w0, w1), r0, r1


def ot_bob_decode(cfg: OTConfig, msgs: OTMessages, b_answers: list[int], d: int):
    """Bob's output rule: syndrome-decode the common-bit string, else bottom."""
    r_prime = tuple(answer_bit(b, msgs.x[i]) for i, b in enumerate(b_answers))
    w_d = msgs.w0 if d == 0 else msgs.w1
    t_d = msgs.t0 if d == 0 else msgs.t1
    c_d = msgs.c0 if d == 0 else msgs.c1
    s = xor_bits(syndrome(cfg.code, r_prime), w_d)
    err = syndrome_decode(cfg.code, s)
    if err is None:
        return ABORT
    l_prime = xor_bits(r_prime, err)
    return c_d ^ seeded_extract(l_prime, t_d, cfg.out_len)[0]


class OTAlice(Party):
    role = "alice"

    def __init__(self, cfg: OTConfig, s0: int, s1: int, bank: DeviceBank, seed: int):
        super().__init__()
        self.cfg = cfg
        self.s0, self.s1 = s0, s1
        self.bank = bank
        self.rng = random.Random(derive_seed(seed, "ot", "alice"))
        self.x: tuple[int, ...] = ()
        self.answers: list[int] = []
        self.msgs: OTMessages | None = None

    def step(self, round_no: int, inbox: list) -> list:
        if round_no == 0:
            self.x = tuple(self.rng.randrange(3) for _ in range(self.cfg.n))
            self.answers = [
                self.bank.sample(Side.ALICE, i, xi) for i, xi in enumerate(self.x)
            ]
            return []
        if round_no == 1:
            self.msgs, _, _ = alice_compute_messages(
                self.cfg, self.s0, self.s1, self.x, self.answers, self.rng
            )
            self.output = EMPTY
            self.done = True
            return [self.msgs.to_payload()]
        return []

    def view(self) -> dict:
        """Everything Alice sees in a run: inputs, randomness, device I/O,
        and the single message she sent.  Used by the receiver-privacy check."""
        return {
            "s0": self.s0,
            "s1": self.s1,
            "x": self.x,
            "answers": tuple(self.answers),
            "sent": self.msgs.to_payload() if self.msgs else None,
            "received": (),
        }


class OTBob(Party):
    role = "bob"

    def __init__(self, cfg: OTConfig, d: int, bank: DeviceBank):
        super().__init__()
        self.cfg = cfg
        self.d = d
        self.bank = bank
        self.answers: list[int] = []

    def expects_message(self, round_no: int) -> bool:
        return round_no == 2

    def step(self, round_no: int, inbox: list) -> list:
        if round_no == 0:
            self.answers = [
                self.bank.sample(Side.BOB, i, self.d) for i in range(self.cfg.n)
            ]
        elif round_no == 2 and inbox:
            msgs = OTMessages.from_payload(inbox[0])
            self.output = ot_bob_decode(self.cfg, msgs, self.answers, self.d)
            self.done = True
        return []


def ot_run_honest(
    cfg: OTConfig, s0: int, s1: int, d: int, bank: DeviceBank, seed: int
) -> OTOutcome:
    """One honest protocol run over the round transport."""
    alice = OTAlice(cfg, s0, s1, bank, seed)
    bob = OTBob(cfg, d, bank)
    transcript = transport_run(alice, bob, delay_round=0, banks=[bank])
    return OTOutcome(alice.output, bob.output, transcript, alice.view())


# -- test phase ---------------------------------------------------------------


@dataclass
class TestPhaseResult:
    alice_pass: bool
    bob_pass: bool
    alice_failures: int
    bob_failures: int

    @property
    def both_pass(self) -> bool:
        return self.alice_pass and self.bob_pass


def _self_test(bank: DeviceBank, eps_dd: float, rng: random.Random) -> tuple[bool, int]:
    """One party samples both ports of its own test devices with uniform
    inputs and counts predicate failures."""
    from .msdevice import ms_predicate

    failures = 0
    n = len(bank)
    for i in range(n):
        x, y = rng.randrange(3), rng.randrange(3)
        a, b = bank.sample(Side.BOTH, i, (x, y))
        if not ms_predicate(a, b, x, y):
            failures += 1
    return failures < 2 * eps_dd * n, failures


def ot_test_phase(
    alice_bank: DeviceBank, bob_bank: DeviceBank, eps_dd: float, seed: int
) -> TestPhaseResult:
    """Table-8 style test: each party tests its own bank; abort when the
    failure set reaches 2 * eps'' * n."""
    rng_a = random.Random(derive_seed(seed, "test", "alice"))
    rng_b = random.Random(derive_seed(seed, "test", "bob"))
    a_ok, a_fail = _self_test(alice_bank, eps_dd, rng_a)
    b_ok, b_fail = _self_test(bob_bank, eps_dd, rng_b)
    return TestPhaseResult(a_ok, b_ok, a_fail, b_fail)


def ot_with_test(
    cfg: OTConfig,
    eps_dd: float,
    s0: int,
    s1: int,
    d: int,
    alice_test_bank: DeviceBank,
    bob_test_bank: DeviceBank,
    run_bank: DeviceBank,
    seed: int,
) -> OTOutcome | str:
    """Test phase on dedicated banks, then the run phase on a fresh bank.

    Returns ABORT when either party's test aborts."""
    result = ot_test_phase(alice_test_bank, bob_test_bank, eps_dd, seed)
    if not result.both_pass:
        return ABORT
    return ot_run_honest(cfg, s0, s1, d, run_bank, seed)


# -- exact output law (tiny n) --------------------------------------------------


def ot_exact_output_law(cfg: OTConfig, tables, s0: int, s1: int, d: int):
    """Exact law of (o_a, o_b) for an honest run, by full enumeration over
    Alice's inputs, device outcomes, and extractor seeds.  Fractions
    throughout; practical for n <= 3."""
    from .extract import FiniteDistribution, bits_from_int
    import itertools

    n = cfg.n
    pmf: dict[tuple, Fraction] = {}
    seed_space = list(itertools.product((0, 1), repeat=cfg.seed_len))
    p_seed = Fraction(1, 2 ** (2 * cfg.seed_len))
    for x in itertools.product((0, 1, 2), repeat=n):
        p_x = Fraction(1, 3**n)
        outcome_sets = [
            list(tables[i].blocks[(x[i], d)].items()) for i in range(n)
        ]
        for combo in itertools.product(*outcome_sets):
            p_dev = Fraction(1)
            answers_a, answers_b = [], []
            for (a, b), p in combo:
                p_dev *= p
                answers_a.append(a)
                answers_b.append(b)
            r0 = tuple(answer_bit(a, 0) for a in answers_a)
            r1 = tuple(answer_bit(a, 1) for a in answers_a)
            w0, w1 = syndrome(cfg.code, r0), syndrome(cfg.code, r1)
            for t0 in seed_space:
                e0 = seeded_extract(r0, t0, 1)[0]
                for t1 in seed_space:
                    e1 = seeded_extract(r1, t1, 1)[0]
                    msgs = OTMessages(s0 ^ e0, s1 ^ e1, t0, t1, x, w0, w1)
                    o_b = ot_bob_decode(cfg, msgs, answers_b, d)
                    key = (EMPTY, o_b)
                    pmf[key] = pmf.get(key, Fraction(0)) + p_x * p_dev * p_seed
    return FiniteDistribution(pmf)

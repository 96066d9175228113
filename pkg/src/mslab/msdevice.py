"""Magic Square devices as classical conditional-distribution tables.

Inputs x, y are trits in {0, 1, 2}.  Answers are 3-bit strings indexed left
to right, stored as integers 0..7 with bit i = (v >> (2 - i)) & 1; Alice's
answers have even parity {000, 011, 101, 110}, Bob's odd parity
{001, 010, 100, 111}.  The game is won when bit y of a equals bit x of b.

A DeviceTable holds Pr(a, b | x, y) on the valid answer pairs, one block per
input pair, exact Fractions where possible.  DeviceBank adds the one-shot /
DELAY sampling semantics the protocols rely on.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    AlreadyFired,
    DoubleTick,
    InputAfterDelay,
    SupportTooLarge,
    ZeroProbabilityEvent,
)
from .extract import FiniteDistribution

TRITS = (0, 1, 2)
ANSWERS_A = (0b000, 0b011, 0b101, 0b110)
ANSWERS_B = (0b001, 0b010, 0b100, 0b111)

Trit = int
Answer = int


def answer_bit(answer: Answer, index: int) -> int:
    """Bit `index` (0 = leftmost) of a 3-bit answer."""
    return (answer >> (2 - index)) & 1


def answer_str(answer: Answer) -> str:
    return format(answer, "03b")


def answer_from_str(s: str) -> Answer:
    return int(s, 2)


def valid_a(answer: Answer) -> bool:
    return answer in ANSWERS_A


def valid_b(answer: Answer) -> bool:
    return answer in ANSWERS_B


def ms_predicate(a: Answer, b: Answer, x: Trit, y: Trit) -> bool:
    """True iff bit y of a equals bit x of b (the common bit agrees)."""
    return answer_bit(a, y) == answer_bit(b, x)


Block = dict[tuple[Answer, Answer], Fraction | float]


class DeviceTable:
    """Normalized conditional distribution Pr(a, b | x, y) on valid pairs."""

    def __init__(self, blocks: dict[tuple[Trit, Trit], Block], check: bool = True):
        self.blocks = blocks
        self._cdf_cache: dict[tuple[Trit, Trit], tuple[list, list]] = {}
        self._marg_cache: dict = {}
        self._cond_cache: dict = {}
        if check:
            for (x, y) in itertools.product(TRITS, TRITS):
                block = blocks[(x, y)]
                total = sum(block.values())
                if abs(float(total) - 1.0) > 1e-12:
                    raise ValueError(f"block ({x},{y}) not normalized: {float(total)}")
                for (a, b), p in block.items():
                    if not (valid_a(a) and valid_b(b)):
                        raise ValueError(f"invalid answer pair {answer_str(a)},{answer_str(b)}")
                    if float(p) < 0:
                        raise ValueError("negative probability")

    def prob(self, x: Trit, y: Trit, a: Answer, b: Answer) -> Fraction | float:
        return self.blocks[(x, y)].get((a, b), 0)

    @property
    def exact(self) -> bool:
        return all(
            isinstance(p, (Fraction, int))
            for block in self.blocks.values()
            for p in block.values()
        )

    def as_float(self) -> "DeviceTable":
        return DeviceTable(
            {
                xy: {ab: float(p) for ab, p in block.items()}
                for xy, block in self.blocks.items()
            },
            check=False,
        )

    # -- sampling ---------------------------------------------------------

    def _cdf(self, x: Trit, y: Trit):
        key = (x, y)
        if key not in self._cdf_cache:
            outcomes = []
            cum = []
            acc = 0.0
            for ab, p in sorted(self.blocks[key].items()):
                fp = float(p)
                if fp <= 0:
                    continue
                acc += fp
                outcomes.append(ab)
                cum.append(acc)
            self._cdf_cache[key] = (outcomes, cum)
        return self._cdf_cache[key]

    def sample(self, x: Trit, y: Trit, rng: random.Random) -> tuple[Answer, Answer]:
        outcomes, cum = self._cdf(x, y)
        u = rng.random() * cum[-1]
        lo, hi = 0, len(cum) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if u <= cum[mid]:
                hi = mid
            else:
                lo = mid + 1
        return outcomes[lo]

    def marginal_a(self, x: Trit) -> dict[Answer, Fraction | float]:
        """Pr(a | x) with the unknown y marginalized uniformly.

        For no-signalling tables this equals Pr(a | x, y) for every y.
        """
        out: dict[Answer, Fraction | float] = {}
        third = Fraction(1, 3)
        for y in TRITS:
            for (a, b), p in self.blocks[(x, y)].items():
                out[a] = out.get(a, 0) + third * p
        return out

    def marginal_b(self, y: Trit) -> dict[Answer, Fraction | float]:
        out: dict[Answer, Fraction | float] = {}
        third = Fraction(1, 3)
        for x in TRITS:
            for (a, b), p in self.blocks[(x, y)].items():
                out[b] = out.get(b, 0) + third * p
        return out

    def conditional_b_given_a(self, x: Trit, y: Trit, a: Answer):
        """Pr(b | a, x, y) as a dict, exact."""
        row = {b: self.blocks[(x, y)].get((a, b), 0) for b in ANSWERS_B}
        total = sum(row.values())
        if total == 0:
            raise ZeroProbabilityEvent(f"a={answer_str(a)} impossible at ({x},{y})")
        return {b: p / total for b, p in row.items() if p != 0}

    def conditional_a_given_b(self, x: Trit, y: Trit, b: Answer):
        col = {a: self.blocks[(x, y)].get((a, b), 0) for a in ANSWERS_A}
        total = sum(col.values())
        if total == 0:
            raise ZeroProbabilityEvent(f"b={answer_str(b)} impossible at ({x},{y})")
        return {a: p / total for a, p in col.items() if p != 0}

    # -- cached float samplers (hot path for Monte Carlo runs) --------------

    def _marginal_sampler(self, side: "Side", value: Trit):
        key = (side, value)
        if key not in self._marg_cache:
            pmf = self.marginal_a(value) if side is Side.ALICE else self.marginal_b(value)
            self._marg_cache[key] = _cdf_of(pmf)
        return self._marg_cache[key]

    def _conditional_sampler(self, side: "Side", x: Trit, y: Trit, given: Answer):
        key = (side, x, y, given)
        if key not in self._cond_cache:
            if side is Side.ALICE:
                pmf = self.conditional_a_given_b(x, y, given)
            else:
                pmf = self.conditional_b_given_a(x, y, given)
            self._cond_cache[key] = _cdf_of(pmf)
        return self._cond_cache[key]

    def sample_marginal(self, side: "Side", value: Trit, rng: random.Random) -> Answer:
        outcomes, cum = self._marginal_sampler(side, value)
        return _pick(outcomes, cum, rng)

    def sample_conditional(
        self, side: "Side", x: Trit, y: Trit, given: Answer, rng: random.Random
    ) -> Answer:
        outcomes, cum = self._conditional_sampler(side, x, y, given)
        return _pick(outcomes, cum, rng)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        obj = {}
        for (x, y) in itertools.product(TRITS, TRITS):
            block = self.blocks[(x, y)]
            probs = []
            for a in ANSWERS_A:
                for b in ANSWERS_B:
                    p = block.get((a, b), 0)
                    if isinstance(p, Fraction):
                        probs.append(f"{p.numerator}/{p.denominator}")
                    else:
                        probs.append(p)
            obj[f"{x},{y}"] = probs
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "DeviceTable":
        blocks: dict[tuple[Trit, Trit], Block] = {}
        for key, probs in obj.items():
            x_s, y_s = key.split(",")
            block: Block = {}
            idx = 0
            for a in ANSWERS_A:
                for b in ANSWERS_B:
                    raw = probs[idx]
                    idx += 1
                    p = Fraction(raw) if isinstance(raw, str) else raw
                    if p != 0:
                        block[(a, b)] = p
            blocks[(int(x_s), int(y_s))] = block
        return cls(blocks)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, s: str) -> "DeviceTable":
        return cls.from_json(json.loads(s))


def ideal_table() -> DeviceTable:
    """The ideal Magic Square table: 1/8 on winning valid pairs, 0 elsewhere."""
    eighth = Fraction(1, 8)
    blocks = {}
    for x, y in itertools.product(TRITS, TRITS):
        block: Block = {}
        for a in ANSWERS_A:
            for b in ANSWERS_B:
                if ms_predicate(a, b, x, y):
                    block[(a, b)] = eighth
        blocks[(x, y)] = block
    return DeviceTable(blocks)


def uniform_valid_table() -> DeviceTable:
    """Uniform over the 16 valid answer pairs in every block."""
    p = Fraction(1, 16)
    blocks = {
        (x, y): {(a, b): p for a in ANSWERS_A for b in ANSWERS_B}
        for x, y in itertools.product(TRITS, TRITS)
    }
    return DeviceTable(blocks)


def forced_answer_table(b_forced: Answer = 0b111) -> DeviceTable:
    """Adversarial table pinning Bob's answer; Alice's answer stays valid and
    wins against it (uniform over the two compatible answers)."""
    blocks = {}
    for x, y in itertools.product(TRITS, TRITS):
        compatible = [a for a in ANSWERS_A if ms_predicate(a, b_forced, x, y)]
        p = Fraction(1, len(compatible))
        blocks[(x, y)] = {(a, b_forced): p for a in compatible}
    return DeviceTable(blocks)


def mix_tables(t1: DeviceTable, t2: DeviceTable, weight: Fraction | float) -> DeviceTable:
    """(1 - weight) * t1 + weight * t2."""
    blocks = {}
    for xy in t1.blocks:
        block: Block = {}
        keys = set(t1.blocks[xy]) | set(t2.blocks[xy])
        for ab in keys:
            p = (1 - weight) * t1.blocks[xy].get(ab, 0) + weight * t2.blocks[xy].get(ab, 0)
            if p != 0:
                block[ab] = p
        blocks[xy] = block
    return DeviceTable(blocks, check=False)


def game_value(table: DeviceTable) -> Fraction | float:
    """Expected win probability under uniform (x, y)."""
    total = sum(
        p
        for (x, y), block in table.blocks.items()
        for (a, b), p in block.items()
        if ms_predicate(a, b, x, y)
    )
    if isinstance(total, Fraction):
        return total / 9
    return total / 9.0


def sup_distance(t1: DeviceTable, t2: DeviceTable) -> float | Fraction:
    """Max over (x, y, a, b) of the absolute entry difference."""
    worst: float | Fraction = 0
    for xy in t1.blocks:
        keys = set(t1.blocks[xy]) | set(t2.blocks[xy])
        for ab in keys:
            diff = abs(t1.blocks[xy].get(ab, 0) - t2.blocks[xy].get(ab, 0))
            if diff > worst:
                worst = diff
    return worst


class PerturbMode(Enum):
    UNIFORM_MIX = "uniform_mix"
    ENTRY_NOISE = "entry_noise"


def perturb_table(
    base: DeviceTable,
    epsilon: Fraction | float,
    mode: PerturbMode = PerturbMode.UNIFORM_MIX,
    rng: random.Random | None = None,
) -> DeviceTable:
    """A table within sup-distance epsilon of `base`.

    UNIFORM_MIX mixes toward the uniform-over-valid-pairs table with the
    largest weight that keeps the sup-distance at epsilon (p = 16*eps for an
    ideal base).  ENTRY_NOISE adds bounded signed noise per block and
    renormalizes, retrying any block that lands beyond epsilon.
    """
    if not 0 <= float(epsilon) <= 1:
        raise ValueError("epsilon must be in [0, 1]")
    if epsilon == 0:
        return base
    if mode is PerturbMode.UNIFORM_MIX:
        unif = uniform_valid_table()
        gap = sup_distance(base, unif)
        if gap == 0:
            return base
        weight = epsilon / gap if isinstance(epsilon, Fraction) and isinstance(gap, Fraction) else float(epsilon) / float(gap)
        if weight > 1:
            weight = 1
        return mix_tables(base, unif, weight)
    if rng is None:
        raise ValueError("ENTRY_NOISE requires an rng")
    eps = float(epsilon)
    blocks: dict[tuple[Trit, Trit], Block] = {}
    for xy in base.blocks:
        base_block = {
            (a, b): float(base.blocks[xy].get((a, b), 0))
            for a in ANSWERS_A
            for b in ANSWERS_B
        }
        for _ in range(1000):
            noisy = {
                ab: max(0.0, p + rng.uniform(-0.5 * eps, 0.5 * eps))
                for ab, p in base_block.items()
            }
            total = sum(noisy.values())
            noisy = {ab: p / total for ab, p in noisy.items()}
            if all(abs(noisy[ab] - base_block[ab]) <= eps for ab in noisy):
                blocks[xy] = {ab: p for ab, p in noisy.items() if p != 0}
                break
        else:  # pragma: no cover - retry budget is generous
            raise RuntimeError("entry-noise rejection did not converge")
    return DeviceTable(blocks, check=False)


VAR_ORDER = ("x", "y", "a", "b")


def conditional(table: DeviceTable, given: dict[str, int]) -> FiniteDistribution:
    """Exact conditional over the free variables of (x, y, a, b).

    Inputs carry a uniform prior when they are marginalized or conditioned
    on; outcomes are tuples of the free variables in (x, y, a, b) order.
    """
    unknown = [k for k in given if k not in VAR_ORDER]
    if unknown:
        raise ValueError(f"unknown variables {unknown}")
    free = [v for v in VAR_ORDER if v not in given]
    ninth = Fraction(1, 9)
    pmf: dict[tuple, Fraction | float] = {}
    for (x, y), block in table.blocks.items():
        if "x" in given and given["x"] != x:
            continue
        if "y" in given and given["y"] != y:
            continue
        for (a, b), p in block.items():
            if "a" in given and given["a"] != a:
                continue
            if "b" in given and given["b"] != b:
                continue
            assign = {"x": x, "y": y, "a": a, "b": b}
            key = tuple(assign[v] for v in free)
            pmf[key] = pmf.get(key, 0) + ninth * p
    total = sum(pmf.values())
    if total == 0:
        raise ZeroProbabilityEvent(f"event {given} has probability zero")
    return FiniteDistribution({k: p / total for k, p in pmf.items()}, check=False)


# -- classical bound ---------------------------------------------------------


def classical_value_oracle() -> tuple[Fraction, tuple[tuple[Answer, ...], tuple[Answer, ...]]]:
    """Exhaustive maximum of the game value over deterministic strategies.

    Searches all 64 x 64 maps (Alice: trit -> AnswerA, Bob: trit -> AnswerB)
    and returns the exact maximum with one witnessing pair.
    """
    best = Fraction(0)
    witness = None
    for fa in itertools.product(ANSWERS_A, repeat=3):
        for fb in itertools.product(ANSWERS_B, repeat=3):
            wins = sum(
                1
                for x in TRITS
                for y in TRITS
                if ms_predicate(fa[x], fb[y], x, y)
            )
            value = Fraction(wins, 9)
            if value > best:
                best = value
                witness = (fa, fb)
    return best, witness


def strategy_table(fa: Sequence[Answer], fb: Sequence[Answer]) -> DeviceTable:
    """The deterministic DeviceTable induced by a classical strategy pair."""
    blocks = {
        (x, y): {(fa[x], fb[y]): Fraction(1)}
        for x, y in itertools.product(TRITS, TRITS)
    }
    return DeviceTable(blocks)


# -- exact multi-device law ---------------------------------------------------

SUPPORT_GUARD = 10**8


def joint_law(
    tables: Sequence[DeviceTable], inputs: Sequence[tuple[Trit, Trit]]
) -> FiniteDistribution:
    """Exact product law over ((a_1, b_1), ..., (a_n, b_n)) for fixed inputs.

    The oracle for independence and Markov-property tests; Fractions
    throughout when the tables are exact.
    """
    if len(tables) != len(inputs):
        raise ValueError("one input pair per table required")
    if 16 ** len(tables) > SUPPORT_GUARD:
        raise SupportTooLarge(f"support 16^{len(tables)} exceeds guard")
    pmf: dict[tuple, Fraction | float] = {(): Fraction(1)}
    for table, (x, y) in zip(tables, inputs):
        nxt: dict[tuple, Fraction | float] = {}
        for prefix, p in pmf.items():
            for ab, q in table.blocks[(x, y)].items():
                nxt[prefix + (ab,)] = p * q
        pmf = nxt
    return FiniteDistribution(pmf, check=False)


# -- one-shot device bank with DELAY ------------------------------------------


class Side(Enum):
    ALICE = "alice"
    BOB = "bob"
    BOTH = "both"


class HandleState(Enum):
    FRESH = "fresh"
    FIRED = "fired"
    DECOHERED = "decohered"


class Clock(Enum):
    PRE_DELAY = "pre_delay"
    POST_DELAY = "post_delay"


def derive_seed(*parts) -> int:
    """Stable child-seed derivation so draws are schedule-invariant."""
    import hashlib

    digest = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class DeviceHandle:
    """One one-shot device: two ports, each queried at most once."""

    index: int
    table: DeviceTable
    rng_a: random.Random
    rng_b: random.Random
    state: HandleState = HandleState.FRESH
    inputs: dict = field(default_factory=lambda: {Side.ALICE: None, Side.BOB: None})
    answers: dict = field(default_factory=lambda: {Side.ALICE: None, Side.BOB: None})
    read: dict = field(default_factory=lambda: {Side.ALICE: False, Side.BOB: False})

    def _rng(self, side: Side) -> random.Random:
        return self.rng_a if side is Side.ALICE else self.rng_b

    def _realize_first(self, side: Side) -> None:
        # Draw this side's half from its one-sided marginal (exact for
        # no-signalling tables; the partner half comes later from the
        # conditional given this draw).
        self.answers[side] = self.table.sample_marginal(
            side, self.inputs[side], self._rng(side)
        )

    def _realize_second(self, side: Side) -> None:
        other = Side.BOB if side is Side.ALICE else Side.ALICE
        xa = self.inputs[Side.ALICE]
        yb = self.inputs[Side.BOB]
        self.answers[side] = self.table.sample_conditional(
            side, xa, yb, self.answers[other], self._rng(side)
        )

    def query(self, side: Side, value: Trit | None, post_delay: bool) -> Answer:
        if self.read[side]:
            raise AlreadyFired(f"device {self.index} side {side.value} already fired")
        if self.inputs[side] is None:
            if post_delay:
                # missing inputs were pinned to 0 at the tick
                if value not in (None, 0):
                    raise InputAfterDelay(
                        f"device {self.index}: input after DELAY (pinned to 0)"
                    )
            else:
                if value is None:
                    raise ValueError("fresh device query requires an input")
                self.inputs[side] = value
        elif value is not None and value != self.inputs[side]:
            raise InputAfterDelay(
                f"device {self.index}: conflicting input for side {side.value}"
            )
        if self.answers[side] is None:
            other = Side.BOB if side is Side.ALICE else Side.ALICE
            if self.answers[other] is not None:
                self._realize_second(side)
            elif self.inputs[other] is not None:
                # both inputs known, nothing realized: draw this side first
                self._realize_first(side)
            else:
                self._realize_first(side)
        self.read[side] = True
        if self.read[Side.ALICE] and self.read[Side.BOB]:
            self.state = HandleState.FIRED
        return self.answers[side]

    def tick(self) -> None:
        if self.state is HandleState.FRESH:
            self.state = HandleState.DECOHERED
        for side in (Side.ALICE, Side.BOB):
            if self.inputs[side] is None:
                self.inputs[side] = 0


def _cdf_of(pmf: dict) -> tuple[list, list]:
    outcomes = []
    cum = []
    acc = 0.0
    for o, p in sorted(pmf.items()):
        fp = float(p)
        if fp <= 0:
            continue
        acc += fp
        outcomes.append(o)
        cum.append(acc)
    return outcomes, cum


def _pick(outcomes: list, cum: list, rng: random.Random):
    u = rng.random() * cum[-1]
    lo, hi = 0, len(cum) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if u <= cum[mid]:
            hi = mid
        else:
            lo = mid + 1
    return outcomes[lo]


class DeviceBank:
    """An ordered collection of independent one-shot devices with a DELAY clock.

    Confined to a single run.  Each (device, side) pair draws from its own
    seeded stream, so outcomes do not depend on the query schedule.
    """

    def __init__(self, tables: Sequence[DeviceTable], seed: int):
        self.devices = [
            DeviceHandle(
                index=i,
                table=t,
                rng_a=random.Random(derive_seed(seed, i, "alice")),
                rng_b=random.Random(derive_seed(seed, i, "bob")),
            )
            for i, t in enumerate(tables)
        ]
        self.clock = Clock.PRE_DELAY
        self.seed = seed

    def __len__(self) -> int:
        return len(self.devices)

    @classmethod
    def uniform(cls, table: DeviceTable, n: int, seed: int) -> "DeviceBank":
        return cls([table] * n, seed)

    def sample(
        self,
        side: Side,
        index: int,
        value: Trit | tuple[Trit, Trit] | None,
        rng: random.Random | None = None,
    ):
        """Query one port (or both, side=BOTH with a (x, y) pair)."""
        del rng  # draws come from the bank's per-device streams
        post = self.clock is Clock.POST_DELAY
        dev = self.devices[index]
        if side is Side.BOTH:
            x, y = value if value is not None else (None, None)
            a = dev.query(Side.ALICE, x, post)
            b = dev.query(Side.BOB, y, post)
            return a, b
        return dev.query(side, value, post)

    def tick_delay(self) -> None:
        if self.clock is Clock.POST_DELAY:
            raise DoubleTick("DELAY already ticked on this bank")
        self.clock = Clock.POST_DELAY
        for dev in self.devices:
            dev.tick()


def bank_sample(bank: DeviceBank, side: Side, index: int, value, rng=None):
    """Functional alias for DeviceBank.sample."""
    return bank.sample(side, index, value, rng)


def tick_delay(bank: DeviceBank) -> DeviceBank:
    bank.tick_delay()
    return bank


# -- convenience builders -----------------------------------------------------


def bank_tables(kind: str, n: int, epsilon: float = 0.0, seed: int = 0,
                mode: PerturbMode = PerturbMode.UNIFORM_MIX,
                tables: Iterable[DeviceTable] | None = None) -> list[DeviceTable]:
    """Device lists for the harness device specs: ideal, eps_near, iid_table,
    raw_table."""
    if kind == "ideal":
        return [ideal_table()] * n
    if kind == "eps_near":
        base = ideal_table()
        if mode is PerturbMode.UNIFORM_MIX:
            return [perturb_table(base, epsilon, mode)] * n
        rng = random.Random(derive_seed(seed, "eps_near"))
        return [perturb_table(base, epsilon, mode, rng) for _ in range(n)]
    if kind == "iid_table":
        (table,) = list(tables)
        return [table] * n
    if kind == "raw_table":
        out = list(tables)
        if len(out) != n:
            raise ValueError(f"raw_table needs {n} tables, got {len(out)}")
        return out
    raise ValueError(f"unknown device kind {kind!r}")

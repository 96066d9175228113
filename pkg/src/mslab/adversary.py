"""Cheating strategies and the statistical security evaluators.

Adaptive Bob fires boxes one at a time, choosing each box and input from the
history of answers.  Cheating Alice tampers with the bit-commitment reveal.
The evaluators run either an exact tiny-n enumeration oracle or a seeded
Monte Carlo guessing game; the "unbounded" guesser is exact Bayesian
posterior maximization wherever the residual space admits it (dynamic
programming over syndrome states) and a documented lower bound elsewhere.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .bc import (
    BCConfig,
    BobCommitState,
    CommitMessage,
    CommitRecord,
    RevealMessage,
    bc_check_reveal,
    classify_commit,
    common_bits,
)
from .coding import LinearCode, coset_mass, sample_coset_conditioned, syndrome
from .errors import DuplicateBoxIndex, ExactModeTooLarge
from .extract import (
    FiniteDistribution,
    ext3,
    seeded_extract,
    xor_bits,
)
from .harness import ABORT, wilson_interval
from .msdevice import (
    ANSWERS_A,
    ANSWERS_B,
    DeviceBank,
    DeviceTable,
    Side,
    answer_bit,
    conditional,
    derive_seed,
)
from .ot import OTConfig, alice_compute_messages

Bits = tuple[int, ...]


# -- adaptive Bob strategies ---------------------------------------------------


class AdaptiveBobStrategy:
    """Chooses the next (box index, input) from the history of fired boxes.

    History entries are (index, input, answer) triples in firing order.
    Strategies must fire every box exactly once; determinism given the
    history and the strategy's seeded randomness is part of the contract.
    """

    name = "adaptive"

    def reset(self, n: int, seed: int) -> None:
        self.n = n
        self.rng = random.Random(derive_seed(seed, "strategy", self.name))

    def next_move(self, history: list[tuple[int, int, int]]) -> tuple[int, int]:
        raise NotImplementedError

    def enumerate_moves(self, history) -> list[tuple[int, int, Fraction]]:
        """(index, input, probability) alternatives for exact enumeration.

        The default covers strategies whose move is a deterministic function
        of the history; randomized strategies override this with their exact
        move law.
        """
        idx, inp = self.next_move(list(history))
        return [(idx, inp, Fraction(1))]

    def announce(self, y_tilde: tuple[int, ...], b_tilde: tuple[int, ...]) -> tuple[int, ...]:
        """Inputs announced to Alice in the BC commit (may differ from the
        real ones)."""
        return y_tilde


class AscendingStrategy(AdaptiveBobStrategy):
    """Fire boxes in index order with a fixed input."""

    def __init__(self, fixed_input: int = 0):
        self.fixed_input = fixed_input
        self.name = f"ascending_{fixed_input}"

    def next_move(self, history):
        return len(history), self.fixed_input


class UniformInputStrategy(AdaptiveBobStrategy):
    """Honest-like: ascending order, fresh uniform input per box."""

    name = "uniform_inputs"

    def next_move(self, history):
        return len(history), self.rng.randrange(3)

    def enumerate_moves(self, history):
        idx = len(history)
        return [(idx, v, Fraction(1, 3)) for v in (0, 1, 2)]


class GreedyCountStrategy(AdaptiveBobStrategy):
    """Adaptive: the next input is the running count of 111 answers mod 3."""

    name = "greedy_count"

    def next_move(self, history):
        seen = sum(1 for _, _, b in history if b == 0b111)
        return len(history), seen % 3


@dataclass
class AdaptivePlay:
    order: list[int]
    y_tilde: tuple[int, ...]      # by box index
    b_tilde: tuple[int, ...]      # by box index
    z: list[int]                  # 111 indicators in firing order


def adaptive_bob_play(
    bank: DeviceBank, strat: AdaptiveBobStrategy, seed: int
) -> AdaptivePlay:
    """Sequential sampling of Bob's ports in strategy order (pre-DELAY)."""
    n = len(bank)
    strat.reset(n, seed)
    history: list[tuple[int, int, int]] = []
    fired = set()
    y = [None] * n
    b = [None] * n
    z = []
    for _ in range(n):
        idx, inp = strat.next_move(history)
        if idx in fired:
            raise DuplicateBoxIndex(f"box {idx} fired twice")
        fired.add(idx)
        ans = bank.sample(Side.BOB, idx, inp)
        y[idx] = inp
        b[idx] = ans
        z.append(1 if ans == 0b111 else 0)
        history.append((idx, inp, ans))
    return AdaptivePlay([h[0] for h in history], tuple(y), tuple(b), z)


# -- GOOD set membership --------------------------------------------------------


class GoodMode(Enum):
    PAPER_N18 = "paper_n18"
    PROOF_N9 = "proof_n9"


def good_btilde(b_tilde, n: int, mode: GoodMode = GoodMode.PROOF_N9) -> bool:
    """Per-block 111-count test; thresholds n/18 (as defined) or n/9 (as the
    concentration proof actually bounds)."""
    if n % 3:
        raise ValueError("n must be a multiple of 3")
    m = n // 3
    denom = 18 if mode is GoodMode.PAPER_N18 else 9
    for j in range(3):
        count = sum(1 for i in range(j * m, (j + 1) * m) if b_tilde[i] == 0b111)
        if count * denom > n:
            return False
    return True


def exact_z_conditionals(
    tables, strat: AdaptiveBobStrategy, seed: int = 0
) -> list[tuple[tuple, Fraction]]:
    """Enumerate every reachable answer history and the exact conditional
    probability that the next fired box answers 111.

    Returns (history-as-answers, E[Z_next | history]) pairs; on ideal banks
    each expectation is exactly 1/4.
    """
    n = len(tables)
    strat.reset(n, seed)
    results: list[tuple[tuple, Fraction]] = []

    def recurse(history, prob):
        if len(history) == n:
            return
        for idx, inp, p_move in strat.enumerate_moves(history):
            marg = tables[idx].marginal_b(inp)
            results.append(
                (tuple(h[2] for h in history), Fraction(marg.get(0b111, 0)))
            )
            for ans, p in marg.items():
                recurse(history + [(idx, inp, ans)], prob * p_move * p)

    recurse([], Fraction(1))
    return results


# -- OT sender security ----------------------------------------------------------


class EvalMode(Enum):
    EXACT_TINY_N = "exact"
    MONTE_CARLO = "monte_carlo"


def hidden_index(y_tilde) -> int:
    """The secret index s_{hidden} that stays masked: 0 when at most half the
    boxes got input 0 (then A(0) is mostly uncommon bits), else 1."""
    n = len(y_tilde)
    l0 = sum(1 for v in y_tilde if v == 0)
    return 0 if 2 * l0 <= n else 1


@dataclass
class SenderSecurityReport:
    mode: str
    n: int
    trials: int
    hidden_assignment: dict
    masked_bit_distance: float | None = None
    per_box_min_entropy: float | None = None
    string_min_entropy: float | None = None
    guesser_advantage: float | None = None
    guesser_ci: tuple | None = None
    guesser: str | None = None

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "n": self.n,
            "trials": self.trials,
            "hidden_assignment": {str(k): v for k, v in self.hidden_assignment.items()},
            "masked_bit_distance": self.masked_bit_distance,
            "per_box_min_entropy": self.per_box_min_entropy,
            "string_min_entropy": self.string_min_entropy,
            "guesser_advantage": self.guesser_advantage,
            "guesser_ci": self.guesser_ci,
            "guesser": self.guesser,
        }


def _strategy_leaves(tables, strat: AdaptiveBobStrategy, seed: int):
    """All (y_tilde, b_tilde, prob) leaves of the strategy's play tree with
    exact probabilities (boxes independent, Bob fires first)."""
    n = len(tables)
    leaves = []

    def recurse(history, prob):
        if len(history) == n:
            y = [None] * n
            b = [None] * n
            for idx, inp, ans in history:
                y[idx] = inp
                b[idx] = ans
            leaves.append((tuple(y), tuple(b), prob))
            return
        strat.reset(n, seed)
        idx, inp = strat.next_move(list(history))
        for ans, p in tables[idx].marginal_b(inp).items():
            recurse(history + [(idx, inp, ans)], prob * p)

    recurse([], Fraction(1))
    return leaves


def _uncommon_bit_posterior(table: DeviceTable, x: int, y: int, b: int, col: int):
    """P(a(col) = 1 | x, y, b), exact."""
    cond = table.conditional_a_given_b(x, y, b)
    return sum(p for a, p in cond.items() if answer_bit(a, col))


def eval_ot_sender_security(
    cfg: OTConfig,
    tables,
    strat: AdaptiveBobStrategy,
    mode: EvalMode,
    trials: int = 10_000,
    seed: int = 0,
    guesser: str = "bayes_dp",
) -> SenderSecurityReport:
    if mode is EvalMode.EXACT_TINY_N:
        return _sender_security_exact(cfg, tables, strat, seed)
    return _sender_security_mc(cfg, tables, strat, trials, seed, guesser)


def _sender_security_exact(cfg: OTConfig, tables, strat, seed) -> SenderSecurityReport:
    """Full enumeration of the cheating-Bob view at tiny n.

    Computes the exact one-norm distance of (C_hidden, rest-of-view) from
    (uniform bit, rest-of-view) and exact uncommon-bit min-entropies,
    with fixed honest inputs s0 = s1 = 0 (the distance is input-independent
    because C just XOR-shifts).
    """
    n = cfg.n
    if n > 4:
        raise ExactModeTooLarge("exact sender-security oracle needs n <= 4")
    leaves = _strategy_leaves(tables, strat, seed)
    seed_space = list(itertools.product((0, 1), repeat=cfg.seed_len))
    p_seed = Fraction(1, 2 ** cfg.seed_len)
    joint: dict[tuple, Fraction] = {}
    hidden_assignment: dict[int, Fraction] = {0: Fraction(0), 1: Fraction(0)}
    worst_box_h = None
    string_h_terms: dict[tuple, float] = {}
    for y_t, b_t, p_leaf in leaves:
        h = hidden_index(y_t)
        hidden_assignment[h] += p_leaf
        for x in itertools.product((0, 1, 2), repeat=n):
            p_x = Fraction(1, 3**n)
            # exact per-box uncommon-bit posteriors for the entropy report
            for i in range(n):
                if y_t[i] == h:
                    continue
                p1 = _uncommon_bit_posterior(tables[i], x[i], y_t[i], b_t[i], h)
                hmin = -_log2_frac(max(p1, 1 - p1))
                if worst_box_h is None or hmin < worst_box_h:
                    worst_box_h = hmin
            a_sets = [
                list(tables[i].conditional_a_given_b(x[i], y_t[i], b_t[i]).items())
                for i in range(n)
            ]
            for combo in itertools.product(*a_sets):
                p_a = Fraction(1)
                answers = []
                for a, p in combo:
                    p_a *= p
                    answers.append(a)
                r = {
                    0: tuple(answer_bit(a, 0) for a in answers),
                    1: tuple(answer_bit(a, 1) for a in answers),
                }
                w = {c: syndrome(cfg.code, r[c]) for c in (0, 1)}
                base = p_leaf * p_x * p_a
                key_atoms = (y_t, b_t, x, w[0], w[1])
                string_h_terms[key_atoms] = string_h_terms.get(key_atoms, 0.0)
                for t_h in seed_space:
                    c_h = seeded_extract(r[h], t_h, 1)[0]  # s_h = 0
                    for t_l in seed_space:
                        c_l = seeded_extract(r[1 - h], t_l, 1)[0]  # s_l = 0
                        view_rest = (y_t, b_t, x, w[0], w[1], t_h, t_l, c_l)
                        key = (view_rest, c_h)
                        joint[key] = joint.get(key, Fraction(0)) + base * p_seed * p_seed
    # one-norm between (C_h, rest) and U_1 x rest
    rest_mass: dict[tuple, Fraction] = {}
    for (rest, _c), p in joint.items():
        rest_mass[rest] = rest_mass.get(rest, Fraction(0)) + p
    dist = Fraction(0)
    for rest, total in rest_mass.items():
        for c in (0, 1):
            dist += abs(joint.get((rest, c), Fraction(0)) - total / 2)
    # exact min-entropy of the whole hidden column given (x, b, y): sum of
    # per-box min-entropies (boxes conditionally independent)
    string_h = _exact_string_min_entropy(cfg, tables, leaves)
    return SenderSecurityReport(
        mode="exact",
        n=n,
        trials=0,
        hidden_assignment={k: float(v) for k, v in hidden_assignment.items()},
        masked_bit_distance=float(dist),
        per_box_min_entropy=worst_box_h,
        string_min_entropy=string_h,
    )


def _exact_string_min_entropy(cfg, tables, leaves) -> float:
    """Worst-case-over-views min-entropy of the hidden column string given
    (x, b_tilde, y_tilde), using per-box conditional independence."""
    worst = None
    for y_t, b_t, _p in leaves:
        h = hidden_index(y_t)
        for x in itertools.product((0, 1, 2), repeat=cfg.n):
            total = 0.0
            for i in range(cfg.n):
                p1 = _uncommon_bit_posterior(tables[i], x[i], y_t[i], b_t[i], h)
                total += -_log2_frac(max(p1, 1 - p1))
            if worst is None or total < worst:
                worst = total
    return worst


def _log2_frac(v) -> float:
    import math

    return math.log2(float(v))


def _toeplitz_row0(seed_bits: Bits, n: int) -> Bits:
    """Row 0 of the Toeplitz matrix for out_len = 1: row[j] = seed[n-1-j]."""
    return tuple(seed_bits[n - 1 - j] for j in range(n))


def masked_bit_posterior(
    cfg: OTConfig, tables, x, y_t, b_t, w_h: Bits, t_h: Bits, col: int
) -> float:
    """Exact P(Ext(R_col, T_col) = 1 | W_col, per-box posteriors) via DP over
    (syndrome, parity) states.  Ignores cross-column information (documented
    approximation of the unbounded guesser)."""
    n = cfg.n
    weights = []
    for i in range(n):
        p1 = float(_uncommon_bit_posterior(tables[i], x[i], y_t[i], b_t[i], col))
        weights.append((1.0 - p1, p1))
    h_ext = np.vstack([cfg.code.H, np.array(_toeplitz_row0(t_h, n), dtype=np.uint8)])
    m0 = coset_mass(weights, h_ext, tuple(w_h) + (0,))
    m1 = coset_mass(weights, h_ext, tuple(w_h) + (1,))
    if m0 + m1 == 0:
        return 0.5
    return m1 / (m0 + m1)


def _sender_security_mc(
    cfg: OTConfig, tables, strat, trials, seed, guesser
) -> SenderSecurityReport:
    """Guessing game: the adversary sees Bob's full view and guesses the
    hidden secret bit."""
    dp_feasible = (cfg.code.n - cfg.code.k + 1) <= 22
    use_dp = guesser == "bayes_dp" and dp_feasible
    correct = 0
    hidden_counts = {0: 0, 1: 0}
    for t in range(trials):
        run_seed = derive_seed(seed, "ot_sender", t)
        rng = random.Random(derive_seed(run_seed, "inputs"))
        bank = DeviceBank(tables, run_seed)
        x = tuple(rng.randrange(3) for _ in range(cfg.n))
        a_ans = [bank.sample(Side.ALICE, i, xi) for i, xi in enumerate(x)]
        play = adaptive_bob_play(bank, strat, run_seed)
        bank.tick_delay()
        s0, s1 = rng.randrange(2), rng.randrange(2)
        msgs, _r0, _r1 = alice_compute_messages(
            cfg, s0, s1, x, a_ans, random.Random(derive_seed(run_seed, "alice"))
        )
        h = hidden_index(play.y_tilde)
        hidden_counts[h] += 1
        s_hidden = s0 if h == 0 else s1
        w_h = msgs.w0 if h == 0 else msgs.w1
        t_h = msgs.t0 if h == 0 else msgs.t1
        c_h = msgs.c0 if h == 0 else msgs.c1
        if use_dp:
            p1 = masked_bit_posterior(
                cfg, tables, x, play.y_tilde, play.b_tilde, w_h, t_h, h
            )
            ext_guess = 1 if p1 > 0.5 else 0
        else:
            # per-box MAP, syndrome-blind
            r_hat = []
            for i in range(cfg.n):
                p1 = float(
                    _uncommon_bit_posterior(
                        tables[i], x[i], play.y_tilde[i], play.b_tilde[i], h
                    )
                )
                r_hat.append(1 if p1 > 0.5 else 0)
            ext_guess = seeded_extract(tuple(r_hat), t_h, 1)[0]
        if (c_h ^ ext_guess) == s_hidden:
            correct += 1
    adv = correct / trials - 0.5
    ci = wilson_interval(correct, trials)
    total = trials or 1
    return SenderSecurityReport(
        mode="monte_carlo",
        n=cfg.n,
        trials=trials,
        hidden_assignment={k: v / total for k, v in hidden_counts.items()},
        guesser_advantage=adv,
        guesser_ci=(ci[0] - 0.5, ci[1] - 0.5),
        guesser="bayes_dp" if use_dp else "per_box_map",
    )


# -- BC hiding --------------------------------------------------------------------


@dataclass
class HidingReport:
    mode: str
    n: int
    trials: int
    distance_d0_d1: float | None = None
    distance_from_uniform: float | None = None
    guesser_advantage: float | None = None
    guesser_ci: tuple | None = None
    guesser: str | None = None

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "n": self.n,
            "trials": self.trials,
            "distance_d0_d1": self.distance_d0_d1,
            "distance_from_uniform": self.distance_from_uniform,
            "guesser_advantage": self.guesser_advantage,
            "guesser_ci": self.guesser_ci,
            "guesser": self.guesser,
        }


def _commit_bit_weights(table: DeviceTable, y_real: int, b: int, y_announced: int):
    """P(a(y_announced) = 1 | real input y_real, answer b), Alice's x uniform."""
    dist = conditional(table, {"y": y_real, "b": b})  # over (x, a)
    p1 = sum(p for (x, a), p in dist.items() if answer_bit(a, y_announced))
    return p1


def eval_bc_hiding(
    cfg: BCConfig,
    tables,
    strat: AdaptiveBobStrategy,
    mode: EvalMode,
    trials: int = 10_000,
    seed: int = 0,
    coset_samples: int = 64,
) -> HidingReport:
    if mode is EvalMode.EXACT_TINY_N:
        return _hiding_exact(cfg, tables, strat, seed)
    return _hiding_mc(cfg, tables, strat, trials, seed, coset_samples)


def _hiding_exact(cfg: BCConfig, tables, strat, seed) -> HidingReport:
    """Exact Bob-view laws for d = 0 vs d = 1 at n = 3 (one box per block;
    the per-block sources are single bits and the syndromes are empty)."""
    if cfg.n != 3:
        raise ExactModeTooLarge("exact hiding oracle is defined at n = 3")
    leaves = _strategy_leaves(tables, strat, seed)
    laws = {0: {}, 1: {}}
    for y_t, b_t, p_leaf in leaves:
        y_bar = strat.announce(y_t, b_t)
        p1 = [
            _commit_bit_weights(tables[i], y_t[i], b_t[i], y_bar[i]) for i in range(3)
        ]
        for r in itertools.product((0, 1), repeat=3):
            p_r = Fraction(1)
            for i in range(3):
                p_r *= p1[i] if r[i] else (1 - p1[i])
            if p_r == 0:
                continue
            e = ext3((r[0],), (r[1],), (r[2],))
            for d in (0, 1):
                key = (y_t, b_t, y_bar, d ^ e)
                laws[d][key] = laws[d].get(key, Fraction(0)) + p_leaf * p_r
    universe = set(laws[0]) | set(laws[1])
    direct = sum(
        abs(laws[0].get(k, Fraction(0)) - laws[1].get(k, Fraction(0))) for k in universe
    )
    return HidingReport(
        mode="exact",
        n=3,
        trials=0,
        distance_d0_d1=float(direct),
        distance_from_uniform=float(direct) / 2,
    )


def _hiding_mc(cfg: BCConfig, tables, strat, trials, seed, coset_samples) -> HidingReport:
    """Guessing game on the commit-phase view: per-block coset-conditioned
    posterior sampling estimates P(ext3 | view); the guess is the MAP bit."""
    correct = 0
    m = cfg.block
    for t in range(trials):
        run_seed = derive_seed(seed, "bc_hiding", t)
        rng = random.Random(derive_seed(run_seed, "inputs"))
        d = rng.randrange(2)
        bank = DeviceBank(tables, run_seed)
        x = tuple(rng.randrange(3) for _ in range(cfg.n))
        a_ans = [bank.sample(Side.ALICE, i, xi) for i, xi in enumerate(x)]
        play = adaptive_bob_play(bank, strat, run_seed)
        bank.tick_delay()
        y_bar = strat.announce(play.y_tilde, play.b_tilde)
        r_blocks = cfg.blocks_of(common_bits(a_ans, y_bar))
        w = tuple(syndrome(cfg.codes[j], r_blocks[j]) for j in range(3))
        c = d ^ ext3(*r_blocks)
        # guesser: per-box posteriors conditioned on each block's syndrome
        samplers = []
        ok = True
        for j in range(3):
            weights = []
            for i in range(j * m, (j + 1) * m):
                p1 = float(
                    _commit_bit_weights(
                        tables[i], play.y_tilde[i], play.b_tilde[i], y_bar[i]
                    )
                )
                weights.append((1.0 - p1, p1))
            samplers.append((weights, cfg.codes[j], w[j]))
        votes = 0
        total = 0
        grng = random.Random(derive_seed(run_seed, "guesser"))
        for _ in range(coset_samples):
            rs = []
            for weights, code, wj in samplers:
                rj = sample_coset_conditioned(weights, code, wj, grng)
                if rj is None:
                    rs = None
                    break
                rs.append(rj)
            if rs is None:
                ok = False
                break
            votes += ext3(*rs)
            total += 1
        if not ok or total == 0:
            guess_ext = 0
        else:
            guess_ext = 1 if 2 * votes > total else 0
        if (c ^ guess_ext) == d:
            correct += 1
    adv = correct / trials - 0.5
    ci = wilson_interval(correct, trials)
    return HidingReport(
        mode="monte_carlo",
        n=cfg.n,
        trials=trials,
        guesser_advantage=adv,
        guesser_ci=(ci[0] - 0.5, ci[1] - 0.5),
        guesser="coset_posterior_sampler",
    )


# -- BC binding -------------------------------------------------------------------


class CheatingAliceStrategy:
    """Commit/reveal behavior of a dishonest committer.

    `commit` runs before/through the commit phase and returns the commit
    record plus private state; `reveal` produces the reveal message.
    Message shapes are always well-formed; contents may be dishonest.
    """

    name = "cheating_alice"

    def commit(self, cfg: BCConfig, bank: DeviceBank, y, rng) -> tuple[CommitRecord, dict]:
        raise NotImplementedError

    def reveal(self, cfg: BCConfig, record: CommitRecord, state: dict, rng) -> RevealMessage:
        raise NotImplementedError


def _honest_commit_record(cfg, bank, y, rng, d) -> tuple[CommitRecord, dict]:
    x = tuple(rng.randrange(3) for _ in range(cfg.n))
    a_ans = tuple(bank.sample(Side.ALICE, i, xi) for i, xi in enumerate(x))
    r_blocks = cfg.blocks_of(common_bits(a_ans, y))
    w = tuple(syndrome(cfg.codes[j], r_blocks[j]) for j in range(3))
    c = d ^ ext3(*r_blocks)
    record = CommitRecord(x, a_ans, w, c, y)
    return record, {"r": r_blocks, "d": d}


def _adjust_answers(a_ans, y, flip_positions) -> tuple[int, ...]:
    """Replace answers at flipped positions with valid answers whose common
    bit is inverted, changing as few other bits as possible."""
    out = list(a_ans)
    for i in flip_positions:
        want = 1 - answer_bit(a_ans[i], y[i])
        candidates = [a for a in ANSWERS_A if answer_bit(a, y[i]) == want]
        out[i] = min(
            candidates, key=lambda a: (bin(a ^ a_ans[i]).count("1"), a)
        )
    return tuple(out)


class HonestAliceStrategy(CheatingAliceStrategy):
    """Honest behavior as a baseline strategy."""

    def __init__(self, d: int):
        self.d = d
        self.name = f"honest_{d}"

    def commit(self, cfg, bank, y, rng):
        return _honest_commit_record(cfg, bank, y, rng, self.d)

    def reveal(self, cfg, record, state, rng):
        return RevealMessage(record.x_tilde, record.a_tilde, state["r"])


class HonestThenFlipStrategy(CheatingAliceStrategy):
    """Commit honestly, then try to reveal the complement by shifting blocks
    by codewords (the only tampering that survives the syndrome check)."""

    def __init__(self, d: int = 0):
        self.d = d
        self.name = f"honest_then_flip_{d}"

    def commit(self, cfg, bank, y, rng):
        return _honest_commit_record(cfg, bank, y, rng, self.d)

    def reveal(self, cfg, record, state, rng):
        from .coding import min_weight_codeword

        r = state["r"]
        codewords = [min_weight_codeword(cfg.codes[j]) for j in range(3)]
        best = None
        for eps in itertools.product((0, 1), repeat=3):
            if not any(eps):
                continue
            shifted = tuple(
                xor_bits(r[j], codewords[j]) if eps[j] else r[j] for j in range(3)
            )
            if ext3(*shifted) != ext3(*r):
                weight = sum(sum(codewords[j]) for j in range(3) if eps[j])
                if best is None or weight < best[0]:
                    best = (weight, shifted, eps)
        if best is None:
            # degenerate: no codeword combination flips the mask; tamper with
            # a non-codeword single flip (will be caught by the syndrome check)
            shifted = (xor_bits(r[0], (1,) + (0,) * (cfg.block - 1)), r[1], r[2])
            eps = (1, 0, 0)
        else:
            _, shifted, eps = best
        flips = [
            j * cfg.block + i
            for j in range(3)
            for i in range(cfg.block)
            if shifted[j][i] != r[j][i]
        ]
        a_bar = _adjust_answers(record.a_tilde, record.y, flips)
        return RevealMessage(record.x_tilde, a_bar, shifted)


class FarRevealStrategy(CheatingAliceStrategy):
    """Reveal a first block at distance >= d/2 from the committed one."""

    def __init__(self, d: int = 0):
        self.d = d
        self.name = f"far_reveal_{d}"

    def reveal_distance(self, cfg) -> int:
        return (cfg.codes[0].d + 1) // 2

    def commit(self, cfg, bank, y, rng):
        return _honest_commit_record(cfg, bank, y, rng, self.d)

    def reveal(self, cfg, record, state, rng):
        r = state["r"]
        dist = self.reveal_distance(cfg)
        flip = tuple(1 if i < dist else 0 for i in range(cfg.block))
        shifted = (xor_bits(r[0], flip), r[1], r[2])
        flips = [i for i in range(cfg.block) if flip[i]]
        a_bar = _adjust_answers(record.a_tilde, record.y, flips)
        return RevealMessage(record.x_tilde, a_bar, shifted)


class SyndromeForgeStrategy(CheatingAliceStrategy):
    """Commit with a forged first syndrome (a distant coset) and reveal a
    matching far string."""

    def __init__(self, d: int = 0):
        self.d = d
        self.name = f"syndrome_forge_{d}"

    def commit(self, cfg, bank, y, rng):
        record, state = _honest_commit_record(cfg, bank, y, rng, self.d)
        dist = (cfg.codes[0].d + 1) // 2
        flip = tuple(1 if i < dist else 0 for i in range(cfg.block))
        far = xor_bits(state["r"][0], flip)
        w = (syndrome(cfg.codes[0], far),) + record.w_tilde[1:]
        state["far_first_block"] = far
        state["flips"] = [i for i in range(cfg.block) if flip[i]]
        return CommitRecord(record.x_tilde, record.a_tilde, w, record.c_tilde, y), state

    def reveal(self, cfg, record, state, rng):
        shifted = (state["far_first_block"], state["r"][1], state["r"][2])
        a_bar = _adjust_answers(record.a_tilde, record.y, state["flips"])
        return RevealMessage(record.x_tilde, a_bar, shifted)


@dataclass
class BindingReport:
    strategy: str
    trials: int
    tag_counts: dict
    outcome_counts: dict
    p_reveal_1_given_e: float
    p_reveal_0_given_ec: float
    p_accept_flipped: float
    abort_rate: float

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "trials": self.trials,
            "tag_counts": self.tag_counts,
            "outcome_counts": {str(k): v for k, v in self.outcome_counts.items()},
            "p_reveal_1_given_e": self.p_reveal_1_given_e,
            "p_reveal_0_given_ec": self.p_reveal_0_given_ec,
            "p_accept_flipped": self.p_accept_flipped,
            "abort_rate": self.abort_rate,
        }


def eval_bc_binding(
    cfg: BCConfig, tables, strat: CheatingAliceStrategy, trials: int, seed: int = 0
) -> BindingReport:
    """Run the strategy against honest Bob; classify each commit transcript
    into E / E^c and tally the reveal outcomes."""
    tag_counts = {"E": 0, "Ec": 0}
    joint = {("E", 1): 0, ("Ec", 0): 0}
    outcome_counts: dict = {}
    aborts = 0
    for t in range(trials):
        run_seed = derive_seed(seed, "bc_binding", strat.name, t)
        rng = random.Random(derive_seed(run_seed, "alice_star"))
        bank = DeviceBank(tables, run_seed)
        bob_rng = random.Random(derive_seed(run_seed, "bob"))
        y = tuple(bob_rng.randrange(3) for _ in range(cfg.n))
        record, state = strat.commit(cfg, bank, y, rng)
        b_ans = tuple(bank.sample(Side.BOB, i, yi) for i, yi in enumerate(y))
        bank.tick_delay()
        cell, tag = classify_commit(record, cfg)
        tag_counts[tag] += 1
        reveal = strat.reveal(cfg, record, state, rng)
        bob_state = BobCommitState(y, b_ans, CommitMessage(record.c_tilde, record.w_tilde))
        outcome = bc_check_reveal(cfg, bob_state, reveal)
        outcome_counts[outcome] = outcome_counts.get(outcome, 0) + 1
        if outcome == ABORT:
            aborts += 1
        elif tag == "E" and outcome == 1:
            joint[("E", 1)] += 1
        elif tag == "Ec" and outcome == 0:
            joint[("Ec", 0)] += 1
    p_e1 = joint[("E", 1)] / tag_counts["E"] if tag_counts["E"] else 0.0
    p_ec0 = joint[("Ec", 0)] / tag_counts["Ec"] if tag_counts["Ec"] else 0.0
    flipped = (joint[("E", 1)] + joint[("Ec", 0)]) / trials
    return BindingReport(
        strategy=strat.name,
        trials=trials,
        tag_counts=tag_counts,
        outcome_counts=outcome_counts,
        p_reveal_1_given_e=p_e1,
        p_reveal_0_given_ec=p_ec0,
        p_accept_flipped=flipped,
        abort_rate=aborts / trials,
    )


# -- common-bit Hamming histogram ----------------------------------------------


def common_bit_hamming(
    tables, a_tilde, x_tilde, y, trials: int, seed: int = 0
) -> dict:
    """Histogram of d_H(B(x_tilde), a_tilde(y)) with Bob's outputs drawn from
    the exact per-box conditional given Alice's view."""
    t = len(tables)
    mismatch_probs = []
    for i in range(t):
        cond = tables[i].conditional_b_given_a(x_tilde[i], y[i], a_tilde[i])
        q = sum(
            p
            for b, p in cond.items()
            if answer_bit(b, x_tilde[i]) != answer_bit(a_tilde[i], y[i])
        )
        mismatch_probs.append(float(q))
    hist: dict[int, int] = {}
    rng = random.Random(derive_seed(seed, "common_bit"))
    for _ in range(trials):
        dist = 0
        for i in range(t):
            cond_sample = tables[i].sample_conditional(
                Side.BOB, x_tilde[i], y[i], a_tilde[i], rng
            )
            if answer_bit(cond_sample, x_tilde[i]) != answer_bit(a_tilde[i], y[i]):
                dist += 1
        hist[dist] = hist.get(dist, 0) + 1
    return {"histogram": hist, "per_box_mismatch": mismatch_probs, "trials": trials}

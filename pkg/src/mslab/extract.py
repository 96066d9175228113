"""Finite distributions, entropy measures, and the two extractors.

Distances follow the one-norm convention sum|p - q| (twice total variation).
The seeded extractor is a Toeplitz universal hash, the three-source extractor
the trilinear inner product; both are desk-scale stand-ins behind a stable
interface and their quality is always measured, never assumed.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .errors import (
    LengthMismatch,
    SeedLengthMismatch,
    SupportMismatch,
    ZeroProbabilityEvent,
)

Outcome = Hashable
Prob = Fraction | float

NORM_TOL = 1e-12


class FiniteDistribution:
    """A probability distribution on an explicit finite support.

    Probabilities may be floats or Fractions; operations preserve exactness
    when every input is a Fraction.
    """

    def __init__(self, pmf: Mapping[Outcome, Prob], check: bool = True):
        self._pmf = {o: p for o, p in pmf.items() if p != 0}
        if check:
            total = sum(self._pmf.values())
            if abs(float(total) - 1.0) > NORM_TOL:
                raise ValueError(f"distribution not normalized: total={float(total)!r}")
            if any(float(p) < 0 for p in self._pmf.values()):
                raise ValueError("negative probability")

    @classmethod
    def uniform(cls, outcomes: Iterable[Outcome]) -> "FiniteDistribution":
        outs = list(outcomes)
        p = Fraction(1, len(outs))
        return cls({o: p for o in outs})

    @classmethod
    def point(cls, outcome: Outcome) -> "FiniteDistribution":
        return cls({outcome: Fraction(1)})

    def items(self):
        return self._pmf.items()

    def outcomes(self):
        return self._pmf.keys()

    def prob(self, outcome: Outcome) -> Prob:
        return self._pmf.get(outcome, 0)

    def __len__(self) -> int:
        return len(self._pmf)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteDistribution):
            return NotImplemented
        return self._pmf == other._pmf

    def __repr__(self) -> str:
        return f"FiniteDistribution({len(self._pmf)} outcomes)"

    # -- structural operations -------------------------------------------

    def map(self, fn: Callable[[Outcome], Outcome]) -> "FiniteDistribution":
        """Pushforward under a deterministic function."""
        out: dict[Outcome, Prob] = {}
        for o, p in self._pmf.items():
            t = fn(o)
            out[t] = out.get(t, 0) + p
        return FiniteDistribution(out, check=False)

    def marginal(self, indices: Sequence[int]) -> "FiniteDistribution":
        """Marginal of tuple-valued outcomes onto the given coordinates."""
        return self.map(lambda o: tuple(o[i] for i in indices))

    def condition(self, predicate: Callable[[Outcome], bool]) -> "FiniteDistribution":
        kept = {o: p for o, p in self._pmf.items() if predicate(o)}
        total = sum(kept.values())
        if total == 0:
            raise ZeroProbabilityEvent("conditioning event has probability zero")
        return FiniteDistribution({o: p / total for o, p in kept.items()}, check=False)

    def product(self, other: "FiniteDistribution") -> "FiniteDistribution":
        """Independent product; tuple outcomes are concatenated."""
        out: dict[Outcome, Prob] = {}
        for o1, p1 in self._pmf.items():
            t1 = o1 if isinstance(o1, tuple) else (o1,)
            for o2, p2 in other._pmf.items():
                t2 = o2 if isinstance(o2, tuple) else (o2,)
                out[t1 + t2] = p1 * p2
        return FiniteDistribution(out, check=False)

    def to_json(self) -> dict:
        return {
            repr(o): (f"{p.numerator}/{p.denominator}" if isinstance(p, Fraction) else p)
            for o, p in sorted(self._pmf.items(), key=lambda kv: repr(kv[0]))
        }


def one_norm(p: FiniteDistribution, q: FiniteDistribution) -> float | Fraction:
    """sum_i |p_i - q_i| over the union support (twice total variation)."""
    universe = set(p.outcomes()) | set(q.outcomes())
    for o in universe:
        if p.prob(o) == 0 and q.prob(o) == 0:  # pragma: no cover - filtered on init
            raise SupportMismatch("empty support entry")
    total = sum(abs(p.prob(o) - q.prob(o)) for o in universe)
    return total


def min_entropy(p: FiniteDistribution) -> float:
    """-log2 of the largest point probability."""
    pmax = max(float(v) for v in p._pmf.values())
    return -math.log2(pmax)


def min_entropy_given(joint: FiniteDistribution, index: int, value) -> float:
    """Min-entropy of the residual outcome after conditioning coordinate
    `index` of tuple-valued outcomes on `value`."""
    cond = joint.condition(lambda o: o[index] == value)
    rest = cond.map(lambda o: tuple(v for i, v in enumerate(o) if i != index))
    return min_entropy(rest)


def avg_cond_min_entropy(joint: FiniteDistribution, cond_index: int) -> float:
    """Average conditional min-entropy -log2 sum_w P(w) max_x P(x|w)."""
    by_w: dict[Outcome, float] = {}
    tot_w: dict[Outcome, float] = {}
    for o, p in joint.items():
        w = o[cond_index]
        fp = float(p)
        tot_w[w] = tot_w.get(w, 0.0) + fp
        by_w[w] = max(by_w.get(w, 0.0), fp)
    # by_w holds max joint prob; sum of max_x P(x,w) = sum_w P(w) max_x P(x|w)
    return -math.log2(sum(by_w.values()))


def is_markov(
    joint: FiniteDistribution, tol: float = 1e-9
) -> bool:
    """Check A - C - D on a distribution over (a, c, d) triples.

    True iff Pr(a|c,d) = Pr(a|c) for every (c,d) of positive probability,
    within `tol` in absolute value.
    """
    p_cd: dict[tuple, float] = {}
    p_acd: dict[tuple, float] = {}
    p_c: dict[Outcome, float] = {}
    p_ac: dict[tuple, float] = {}
    for (a, c, d), p in joint.items():
        fp = float(p)
        p_cd[(c, d)] = p_cd.get((c, d), 0.0) + fp
        p_acd[(a, c, d)] = p_acd.get((a, c, d), 0.0) + fp
        p_c[c] = p_c.get(c, 0.0) + fp
        p_ac[(a, c)] = p_ac.get((a, c), 0.0) + fp
    for (a, c, d), pa in p_acd.items():
        if p_cd[(c, d)] <= 0:
            continue
        lhs = pa / p_cd[(c, d)]
        rhs = p_ac[(a, c)] / p_c[c]
        if abs(lhs - rhs) > tol:
            return False
    return True


def cond_mutual_information(joint: FiniteDistribution) -> float:
    """I(A; D | C) in bits for a distribution over (a, c, d) triples."""
    p_acd: dict[tuple, float] = {}
    for (a, c, d), p in joint.items():
        p_acd[(a, c, d)] = p_acd.get((a, c, d), 0.0) + float(p)
    p_c: dict = {}
    p_ac: dict = {}
    p_cd: dict = {}
    for (a, c, d), p in p_acd.items():
        p_c[c] = p_c.get(c, 0.0) + p
        p_ac[(a, c)] = p_ac.get((a, c), 0.0) + p
        p_cd[(c, d)] = p_cd.get((c, d), 0.0) + p
    total = 0.0
    for (a, c, d), p in p_acd.items():
        if p <= 0:
            continue
        total += p * math.log2(p * p_c[c] / (p_ac[(a, c)] * p_cd[(c, d)]))
    return total


# -- bit-string helpers ----------------------------------------------------

Bits = tuple[int, ...]


def bits_from_int(value: int, length: int) -> Bits:
    return tuple((value >> (length - 1 - i)) & 1 for i in range(length))


def int_from_bits(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | (b & 1)
    return out


def xor_bits(u: Sequence[int], v: Sequence[int]) -> Bits:
    if len(u) != len(v):
        raise LengthMismatch(f"length mismatch: {len(u)} vs {len(v)}")
    return tuple(a ^ b for a, b in zip(u, v))


def inner_product(u: Sequence[int], v: Sequence[int]) -> int:
    if len(u) != len(v):
        raise LengthMismatch(f"length mismatch: {len(u)} vs {len(v)}")
    acc = 0
    for a, b in zip(u, v):
        acc ^= a & b
    return acc


# -- seeded strong extractor (Toeplitz universal hashing) -------------------


def toeplitz_seed_length(n: int, out_len: int) -> int:
    return n + out_len - 1


def seeded_extract(source: Sequence[int], seed: Sequence[int], out_len: int) -> Bits:
    """Toeplitz-hash extraction of `out_len` bits from an n-bit source.

    The seed indexes a Toeplitz matrix M with M[i][j] = seed[i - j + n - 1];
    output bit i is <row_i, source> over GF(2).  Requires
    len(seed) == n + out_len - 1.
    """
    n = len(source)
    if len(seed) != toeplitz_seed_length(n, out_len):
        raise SeedLengthMismatch(
            f"seed length {len(seed)} != n + out_len - 1 = {toeplitz_seed_length(n, out_len)}"
        )
    out = []
    for i in range(out_len):
        acc = 0
        for j in range(n):
            acc ^= seed[i - j + n - 1] & source[j]
        out.append(acc)
    return tuple(out)


# -- three-source extractor -------------------------------------------------


def ext3(r1: Sequence[int], r2: Sequence[int], r3: Sequence[int]) -> int:
    """Trilinear inner-product extractor <r1,r2> xor <r2,r3> xor <r3,r1>.

    Valid as a three-source extractor for independent sources of high
    min-entropy rate; pluggable via `Ext3Fn` wherever protocols take one.
    """
    if not (len(r1) == len(r2) == len(r3)):
        raise LengthMismatch("ext3 sources must have equal length")
    return inner_product(r1, r2) ^ inner_product(r2, r3) ^ inner_product(r3, r1)


Ext3Fn = Callable[[Sequence[int], Sequence[int], Sequence[int]], int]


# -- exact extractor diagnostics --------------------------------------------


def extractor_distance_flat(source_set: Sequence[int], n: int, out_len: int = 1):
    """Exact one-norm distance of (Ext(X,T), T) from uniform for X flat on
    `source_set` (a list of n-bit integers) and T uniform.

    Full enumeration; the independent check against the leftover-hash bound
    2^{-(k - out_len)/2} is left to callers.
    """
    t_len = toeplitz_seed_length(n, out_len)
    joint: dict[tuple, Fraction] = {}
    px = Fraction(1, len(source_set))
    pt = Fraction(1, 2**t_len)
    for t_val in range(2**t_len):
        seed = bits_from_int(t_val, t_len)
        for x in source_set:
            out = seeded_extract(bits_from_int(x, n), seed, out_len)
            key = (out, t_val)
            joint[key] = joint.get(key, Fraction(0)) + px * pt
    ideal = Fraction(1, 2**out_len * 2**t_len)
    dist = Fraction(0)
    for t_val in range(2**t_len):
        for o_val in range(2**out_len):
            key = (bits_from_int(o_val, out_len), t_val)
            dist += abs(joint.get(key, Fraction(0)) - ideal)
    return dist


def ext3_bias_flat(sets: Sequence[Sequence[int]], m: int) -> Fraction:
    """Exact one-norm distance of ext3(X,Y,Z) from a uniform bit for X,Y,Z
    independent and flat on the given supports of m-bit integers."""
    count1 = 0
    total = len(sets[0]) * len(sets[1]) * len(sets[2])
    for x in sets[0]:
        bx = bits_from_int(x, m)
        for y in sets[1]:
            by = bits_from_int(y, m)
            for z in sets[2]:
                count1 += ext3(bx, by, bits_from_int(z, m))
    p1 = Fraction(count1, total)
    return abs(p1 - Fraction(1, 2)) * 2

"""Binary linear codes, syndromes, and promise-based syndrome decoding.

Codes are defined by a full-rank parity-check matrix H over GF(2) with the
exact minimum distance computed at construction and cached.  Decoding is
brute force up to the unique-decoding radius (closed form for repetition
codes); both returned-value conditions are checked before returning.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DistanceSearchTooLarge, LengthMismatch, RankDeficient

Bits = tuple[int, ...]

_DISTANCE_ENUM_LIMIT = 1 << 22  # cap on 2^k codeword enumeration
_SYNDROME_TABLE_LIMIT = 1 << 22  # cap on precomputed coset-leader table size


# -- GF(2) linear algebra -----------------------------------------------------


def gf2_row_reduce(matrix: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Row echelon form over GF(2); returns (reduced matrix, pivot columns)."""
    m = matrix.copy() % 2
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        pivot = None
        for i in range(r, rows):
            if m[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        m[[r, pivot]] = m[[pivot, r]]
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] ^= m[r]
        pivots.append(c)
        r += 1
    return m, pivots


def gf2_rank(matrix: np.ndarray) -> int:
    return len(gf2_row_reduce(matrix)[1])


def gf2_kernel_basis(matrix: np.ndarray) -> np.ndarray:
    """Basis (rows) of the kernel {v : Mv = 0} over GF(2)."""
    m, pivots = gf2_row_reduce(matrix)
    cols = matrix.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.uint8)
        v[f] = 1
        for r, c in enumerate(pivots):
            if m[r, f]:
                v[c] = 1
        basis.append(v)
    return np.array(basis, dtype=np.uint8) if basis else np.zeros((0, cols), dtype=np.uint8)


def _min_distance_by_codewords(gen: np.ndarray) -> int:
    """Exact min nonzero codeword weight via 2^k enumeration (chunked)."""
    k, n = gen.shape
    if k == 0:
        raise ValueError("zero-dimensional code has no distance")
    if 2**k > _DISTANCE_ENUM_LIMIT:
        raise DistanceSearchTooLarge(f"2^{k} codewords exceed enumeration cap")
    best = n + 1
    chunk = 1 << 16
    for start in range(0, 2**k, chunk):
        count = min(chunk, 2**k - start)
        msgs = ((np.arange(start, start + count)[:, None] >> np.arange(k)[None, :]) & 1).astype(np.uint8)
        words = msgs @ gen % 2
        weights = words.sum(axis=1)
        nonzero = weights[weights > 0]
        if nonzero.size:
            best = min(best, int(nonzero.min()))
    return best


def _min_distance_by_columns(h: np.ndarray, cap: int = 6) -> int | None:
    """Smallest w such that some w columns of H are linearly dependent.

    Exact for d <= cap; None when no dependency of size <= cap exists.
    """
    n = h.shape[1]
    cols = [int("".join(map(str, h[:, j]))[::-1] or "0", 2) for j in range(n)]
    # d = 1: a zero column
    if any(c == 0 for c in cols):
        return 1
    # d = 2: equal columns
    if len(set(cols)) < n:
        return 2
    seen_pairs: dict[int, tuple[int, int]] = {}
    col_set = {c: j for j, c in enumerate(cols)}
    # d = 3: c_i ^ c_j == c_k
    for i in range(n):
        for j in range(i + 1, n):
            s = cols[i] ^ cols[j]
            k = col_set.get(s)
            if k is not None and k not in (i, j):
                return 3
            seen_pairs.setdefault(s, (i, j))
    if cap < 4:
        return None
    # d = 4: two disjoint pairs with equal sums
    for i in range(n):
        for j in range(i + 1, n):
            s = cols[i] ^ cols[j]
            prev = seen_pairs.get(s)
            if prev is not None and prev != (i, j) and len({*prev, i, j}) == 4:
                return 4
    # w in {5, 6}: pair-sum ^ triple-sum or triple ^ triple; enumeration
    for w in range(5, cap + 1):
        for combo in itertools.combinations(range(n), w):
            acc = 0
            for c in combo:
                acc ^= cols[c]
            if acc == 0:
                return w
        # combos are expensive; bail out early for large n
        if math.comb(n, w + 1) > 5_000_000:
            break
    return None


@dataclass(frozen=True)
class LinearCode:
    """[n, k, d] binary linear code given by parity-check matrix H."""

    n: int
    k: int
    H: np.ndarray
    d: int
    kind: str = "generic"
    _decode_table: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.H.shape != (self.n - self.k, self.n):
            raise ValueError("H must be (n - k) x n")

    @property
    def radius(self) -> int:
        """Unique-decoding radius floor((d - 1) / 2)."""
        return (self.d - 1) // 2

    def generator(self) -> np.ndarray:
        return gf2_kernel_basis(self.H)

    def codewords(self):
        gen = self.generator()
        for msg in itertools.product((0, 1), repeat=self.k):
            yield tuple(int(v) for v in (np.array(msg, dtype=np.uint8) @ gen % 2))

    def to_json(self) -> dict:
        packed = "".join(
            format(int("".join(map(str, row)), 2) if self.n else 0, f"0{(self.n + 3) // 4}x")
            for row in self.H
        )
        return {"n": self.n, "k": self.k, "H": packed, "d": self.d, "kind": self.kind}

    @classmethod
    def from_json(cls, obj: dict) -> "LinearCode":
        n, k = obj["n"], obj["k"]
        width = (n + 3) // 4
        rows = []
        packed = obj["H"]
        for i in range(n - k):
            chunk = packed[i * width : (i + 1) * width]
            bits = format(int(chunk, 16) if chunk else 0, f"0{n}b")
            rows.append([int(c) for c in bits])
        h = np.array(rows, dtype=np.uint8).reshape(n - k, n)
        return cls(n=n, k=k, H=h, d=obj["d"], kind=obj.get("kind", "generic"))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _exact_distance(h: np.ndarray, k: int) -> int:
    by_cols = _min_distance_by_columns(h)
    if by_cols is not None:
        return by_cols
    gen = gf2_kernel_basis(h)
    return _min_distance_by_codewords(gen)


def _uses_all_components(code: LinearCode) -> bool:
    gen = code.generator()
    if gen.shape[0] == 0:
        return False
    return bool((gen.sum(axis=0) > 0).all() or (gen % 2).any(axis=0).all())


def make_code(
    kind: str,
    n: int | None = None,
    k: int | None = None,
    seed: int | None = None,
    max_retries: int = 200,
) -> LinearCode:
    """Code constructors: 'hamming74', 'repetition', 'random_linear'.

    Random codes retry until H has full rank, the code uses all its
    components, and d >= 2 (no wasted column).
    """
    if kind == "hamming74":
        h = np.array(
            [
                [1, 1, 0, 1, 1, 0, 0],
                [1, 0, 1, 1, 0, 1, 0],
                [0, 1, 1, 1, 0, 0, 1],
            ],
            dtype=np.uint8,
        )
        return LinearCode(n=7, k=4, H=h, d=_exact_distance(h, 4), kind="hamming74")
    if kind == "repetition":
        if n is None or n < 2:
            raise ValueError("repetition code needs n >= 2")
        h = np.zeros((n - 1, n), dtype=np.uint8)
        h[:, 0] = 1
        for i in range(n - 1):
            h[i, i + 1] = 1
        return LinearCode(n=n, k=1, H=h, d=n, kind="repetition")
    if kind == "random_linear":
        if n is None or k is None or seed is None:
            raise ValueError("random_linear needs n, k, seed")
        rng = random.Random(seed)
        for _ in range(max_retries):
            h = np.array(
                [[rng.randrange(2) for _ in range(n)] for _ in range(n - k)],
                dtype=np.uint8,
            )
            if gf2_rank(h) != n - k:
                continue
            d = _exact_distance(h, k)
            code = LinearCode(n=n, k=k, H=h, d=d, kind="random_linear")
            if d >= 2 and _uses_all_components(code):
                return code
        raise RankDeficient(f"no full-rank [{n},{k}] matrix after {max_retries} tries")
    raise ValueError(f"unknown code kind {kind!r}")


def syndrome(code: LinearCode, v: Sequence[int]) -> Bits:
    """H v over GF(2)."""
    if len(v) != code.n:
        raise LengthMismatch(f"vector length {len(v)} != n = {code.n}")
    arr = np.asarray(v, dtype=np.uint8)
    return tuple(int(x) for x in (code.H @ arr % 2))


def _repetition_decode(code: LinearCode, s: Bits) -> Bits | None:
    # H rows are e_1 + e_{i+1}: s_i = e_0 xor e_{i+1}; the two preimages are
    # (0, s) and its complement, and at most one has weight < n / 2.
    cand = (0,) + tuple(s)
    comp = tuple(1 - b for b in cand)
    for e in (cand, comp):
        if 2 * sum(e) < code.d:
            return e
    return None


def _syndrome_table(code: LinearCode) -> dict[Bits, Bits]:
    cache = code._decode_table
    if "table" not in cache:
        size = sum(math.comb(code.n, w) for w in range(code.radius + 1))
        if size > _SYNDROME_TABLE_LIMIT:
            raise DistanceSearchTooLarge(
                f"coset-leader table of {size} entries exceeds cap"
            )
        table: dict[Bits, Bits] = {}
        for w in range(code.radius + 1):
            for positions in itertools.combinations(range(code.n), w):
                e = [0] * code.n
                for p in positions:
                    e[p] = 1
                s = syndrome(code, e)
                table.setdefault(s, tuple(e))
        cache["table"] = table
    return cache["table"]


def syndrome_decode(code: LinearCode, s: Sequence[int]) -> Bits | None:
    """The unique e with weight(e) < d/2 and He = s, or None for bottom.

    Both conditions are re-verified on the candidate before returning.
    """
    if len(s) != code.n - code.k:
        raise LengthMismatch(f"syndrome length {len(s)} != n - k = {code.n - code.k}")
    s_t = tuple(int(b) & 1 for b in s)
    if code.kind == "repetition":
        e = _repetition_decode(code, s_t)
    else:
        e = _syndrome_table(code).get(s_t)
    if e is None:
        return None
    if 2 * sum(e) >= code.d or syndrome(code, e) != s_t:
        return None
    return e


# -- coset-conditioned sampling ----------------------------------------------


def _column_masks(h: np.ndarray) -> list[int]:
    m, n = h.shape
    return [int(sum((int(h[r, i]) & 1) << r for r in range(m))) for i in range(n)]


def _coset_backward(weights, col_masks: list[int], size: int) -> list[np.ndarray]:
    """back[i][state] = mass of suffixes i.. whose syndrome contribution is
    `state` under the per-bit product law."""
    n = len(weights)
    back: list[np.ndarray] = [None] * (n + 1)  # type: ignore[list-item]
    last = np.zeros(size)
    last[0] = 1.0
    back[n] = last
    idx = np.arange(size)
    for i in range(n - 1, -1, -1):
        p0, p1 = weights[i]
        nxt = back[i + 1]
        cur = p0 * nxt
        if p1:
            cur = cur + p1 * nxt[idx ^ col_masks[i]]
        back[i] = cur
    return back


def coset_mass(
    weights: Sequence[tuple[float, float]], h: np.ndarray, target: Sequence[int]
) -> float:
    """P(H v = target) under the per-bit product law given by `weights`."""
    m, n = h.shape
    if len(weights) != n or len(target) != m:
        raise LengthMismatch("weights/target shape mismatch")
    back = _coset_backward(weights, _column_masks(h), 1 << m)
    target_mask = sum((int(b) & 1) << r for r, b in enumerate(target))
    return float(back[0][target_mask])


def sample_coset_conditioned(
    weights: Sequence[tuple[float, float]],
    code: LinearCode,
    target: Sequence[int],
    rng: random.Random,
) -> Bits | None:
    """Draw v ~ product of per-bit laws conditioned on {H v = target}.

    weights[i] = (P(v_i = 0), P(v_i = 1)).  Exact via dynamic programming
    over the 2^(n-k) syndrome states: a backward pass computes the reachable
    mass per partial-syndrome state, a forward pass samples each bit from
    its exact conditional.  Returns None when the event has probability 0.
    """
    n = code.n
    m = code.n - code.k
    if len(weights) != n or len(target) != m:
        raise LengthMismatch("weights/target shape mismatch")
    col_masks = _column_masks(code.H)
    target_mask = sum((int(b) & 1) << r for r, b in enumerate(target))
    back = _coset_backward(weights, col_masks, 1 << m)
    if back[0][target_mask] <= 0:
        return None
    state = target_mask
    out = []
    for i in range(n):
        p0, p1 = weights[i]
        w0 = p0 * back[i + 1][state]
        w1 = p1 * back[i + 1][state ^ col_masks[i]]
        total = w0 + w1
        bit = 1 if rng.random() * total > w0 else 0
        out.append(bit)
        if bit:
            state ^= col_masks[i]
    return tuple(out)

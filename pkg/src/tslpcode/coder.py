"""Prefix-free binary code for normal-form TSLPs.

For a grammar with n nonterminals and size m the codeword is the
concatenation of five words:

    w0  0^(n-1) 1                       the nonterminal count
    w1  two bits per rule type          big-endian, A_0 first
    w2  1 0^|u_1| ... 1 0^|u_(n-1)|     where rho = A_1 u_1 A_2 u_2 ... A_(n-1) u_(n-1)
    w3  0^(k_i - 1) 1 for i = 1..n-1    k_i = occurrences of A_i in rho
    w4  lexicographic rank of omega     among the rearrangements of its multiset,
                                        zero-padded to ceil(log2 |S|) bits

omega is rho with the first occurrence of each A_i removed. The one-rule
grammar for the tree ``a`` has no typed rule and is coded as ``1``; every
other codeword starts with 0, so the code stays prefix-free.

Bit strings are plain ``str`` objects over "0"/"1".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import BinaryIO, Hashable, Iterable, Mapping, Sequence

from .tslp import _ARITY, G_A, NormalFormTslp, omega_word, validate_normal_form

__all__ = [
    "BitString", "DecodeError", "TruncatedCodeError", "RankOutOfRangeError",
    "InconsistentCodeError", "ContainerError", "OccurrenceProfile", "CodeParts",
    "encode", "decode", "code_parts", "code_length", "rank_multiset_word",
    "unrank_multiset_word", "multiset_count", "write_container", "read_container",
    "dumps", "loads", "bits_to_bytes", "bytes_to_bits", "MAGIC", "VERSION",
]

BitString = str

MAGIC = b"TSLP"
VERSION = 1


class DecodeError(ValueError):
    pass


class TruncatedCodeError(DecodeError):
    pass


class RankOutOfRangeError(DecodeError):
    pass


class InconsistentCodeError(DecodeError):
    pass


class ContainerError(DecodeError):
    pass


# enumerative coding

class _Fenwick:
    def __init__(self, counts: Sequence[int]):
        self.n = len(counts)
        self.tree = [0] * (self.n + 1)
        for i, c in enumerate(counts):
            self.add(i, c)

    def add(self, i: int, delta: int) -> None:
        i += 1
        while i <= self.n:
            self.tree[i] += delta
            i += i & -i

    def prefix(self, i: int) -> int:
        """Sum of counts[0:i]."""
        s = 0
        while i > 0:
            s += self.tree[i]
            i -= i & -i
        return s

    def search(self, q: int) -> tuple[int, int]:
        """Largest i with prefix(i) <= q, together with prefix(i)."""
        pos, acc = 0, 0
        step = 1 << self.n.bit_length()
        while step:
            nxt = pos + step
            if nxt <= self.n and acc + self.tree[nxt] <= q:
                pos = nxt
                acc += self.tree[nxt]
            step >>= 1
        return pos, acc


def multiset_count(counts: Iterable[int]) -> int:
    """Number of distinct words with the given symbol counts."""
    counts = list(counts)
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out


def _alphabet(word: Sequence[Hashable], alphabet: Sequence[Hashable] | None) -> list:
    if alphabet is None:
        return sorted(set(word))
    return list(alphabet)


def rank_multiset_word(word: Sequence[Hashable], alphabet: Sequence[Hashable] | None = None) -> int:
    """Index of ``word`` in the lexicographic list of all rearrangements of its letters.

    ``alphabet`` fixes the letter order (default: sorted letters of the word).
    """
    order = _alphabet(word, alphabet)
    pos = {s: k for k, s in enumerate(order)}
    if len(pos) != len(order):
        raise ValueError("alphabet has repeated letters")
    counts = [0] * len(order)
    try:
        idx = [pos[s] for s in word]
    except KeyError as exc:
        raise ValueError(f"letter {exc.args[0]!r} is not in the alphabet") from None
    for k in idx:
        counts[k] += 1
    fen = _Fenwick(counts)
    total = multiset_count(counts)   # words over the remaining letters
    rem = len(idx)
    rank = 0
    for k in idx:
        # total * count[c] / rem words continue with letter c
        rank += total * fen.prefix(k) // rem
        total = total * counts[k] // rem
        counts[k] -= 1
        fen.add(k, -1)
        rem -= 1
    return rank


@dataclass(frozen=True)
class OccurrenceProfile:
    """Counts behind omega: n nonterminals, size m, k_i occurrences of A_i in rho."""

    n: int
    m: int
    k: tuple[int, ...]   # k_1 .. k_(n-1)

    def __post_init__(self):
        if len(self.k) != self.n - 1:
            raise ValueError("need one count per nonterminal A_1..A_(n-1)")
        if any(c < 1 for c in self.k):
            raise ValueError("every A_i with i >= 1 occurs in rho")
        if self.m < sum(self.k):
            raise ValueError("occurrence counts exceed the grammar size")

    @property
    def eta(self) -> tuple[int, ...]:
        """Letter counts of omega indexed by symbol (0 = a, i = A_i)."""
        return (self.m - sum(self.k),) + tuple(c - 1 for c in self.k)

    @property
    def length(self) -> int:
        return self.m - (self.n - 1)

    @property
    def count(self) -> int:
        """|S|, the number of words with these letter counts."""
        return multiset_count(self.eta)

    @property
    def rank_bits(self) -> int:
        """ceil(log2 |S|)."""
        return (self.count - 1).bit_length()

    @classmethod
    def of(cls, g: NormalFormTslp) -> "OccurrenceProfile":
        k = [0] * g.n
        for s in g.rho:
            k[s] += 1
        return cls(g.n, g.size, tuple(k[1:]))


def unrank_multiset_word(profile: OccurrenceProfile | Mapping[Hashable, int] | Sequence[tuple],
                         index: int) -> list:
    """Inverse of :func:`rank_multiset_word`.

    ``profile`` is an :class:`OccurrenceProfile` (letters are symbols 0..n-1),
    or letter counts in alphabet order as a mapping or (letter, count) pairs.
    """
    if isinstance(profile, OccurrenceProfile):
        letters = list(range(profile.n))
        counts = list(profile.eta)
    else:
        pairs = list(profile.items()) if isinstance(profile, Mapping) else list(profile)
        letters = [s for s, _ in pairs]
        counts = [c for _, c in pairs]
    if any(c < 0 for c in counts):
        raise ValueError("negative letter count")
    total = multiset_count(counts)
    if not 0 <= index < total:
        raise RankOutOfRangeError(f"index {index} is outside [0, {total})")
    fen = _Fenwick(counts)
    rem = sum(counts)
    out = []
    while rem:
        # pick the letter c with prefix(c) <= index * rem / total < prefix(c + 1)
        k, before = fen.search(index * rem // total)
        index -= total * before // rem
        total = total * counts[k] // rem
        counts[k] -= 1
        fen.add(k, -1)
        rem -= 1
        out.append(letters[k])
    return out


# the five-word code

@dataclass(frozen=True)
class CodeParts:
    w0: str
    w1: str
    w2: str
    w3: str
    w4: str

    def __str__(self) -> str:
        return self.w0 + self.w1 + self.w2 + self.w3 + self.w4

    def __len__(self) -> int:
        return len(self.w0) + len(self.w1) + len(self.w2) + len(self.w3) + len(self.w4)


def _first_occurrence_gaps(g: NormalFormTslp) -> list[int]:
    """|u_1| .. |u_(n-1)| from rho = A_1 u_1 ... A_(n-1) u_(n-1), checking the order."""
    gaps = []
    nxt = 1
    for s in g.rho:
        if s == nxt:
            gaps.append(0)
            nxt += 1
        elif s > nxt or not gaps:
            raise ValueError("rho does not list first occurrences in index order")
        else:
            gaps[-1] += 1
    if nxt != g.n:
        raise ValueError("some nonterminal does not occur in rho")
    return gaps


def code_parts(g: NormalFormTslp, validate: bool = True) -> CodeParts:
    if validate:
        report = validate_normal_form(g)
        if not report.ok:
            raise ValueError(f"not a normal-form grammar: {report.violations[0]}")
    if g.is_singleton:
        return CodeParts("1", "", "", "", "")
    gaps = _first_occurrence_gaps(g)
    profile = OccurrenceProfile.of(g)
    w0 = "0" * (g.n - 1) + "1"
    w1 = "".join(format(t, "02b") for t in g.types)
    w2 = "".join("1" + "0" * u for u in gaps)
    w3 = "".join("0" * (c - 1) + "1" for c in profile.k)
    width = profile.rank_bits
    rank = rank_multiset_word(omega_word(g), range(g.n))
    w4 = format(rank, f"0{width}b") if width else ""
    parts = CodeParts(w0, w1, w2, w3, w4)
    assert (len(w0), len(w1), len(w2), len(w3), len(w4)) == (
        g.n, 2 * g.n, g.size, sum(profile.k), width)
    return parts


def encode(g: NormalFormTslp, validate: bool = True) -> BitString:
    return str(code_parts(g, validate))


def code_length(g: NormalFormTslp) -> int:
    """|encode(g)| without computing the rank: n + 2n + m + sum k_i + ceil(log2 |S|)."""
    if g.is_singleton:
        return 1
    profile = OccurrenceProfile.of(g)
    return 3 * g.n + g.size + sum(profile.k) + profile.rank_bits


class _Reader:
    def __init__(self, bits: str, pos: int):
        self.bits = bits
        self.pos = pos

    def take(self, count: int, what: str) -> str:
        end = self.pos + count
        if end > len(self.bits):
            raise TruncatedCodeError(f"stream ends inside {what} (bit {len(self.bits)})")
        out = self.bits[self.pos:end]
        self.pos = end
        return out

    def unary(self, what: str) -> int:
        """Zeros before the next 1 (the 1 is consumed)."""
        end = self.bits.find("1", self.pos)
        if end < 0:
            raise TruncatedCodeError(f"stream ends inside {what} (bit {len(self.bits)})")
        count = end - self.pos
        self.pos = end + 1
        return count


def decode(bits: BitString, pos: int = 0) -> tuple[NormalFormTslp, int]:
    """Read one codeword starting at bit ``pos``; returns the grammar and the bits consumed."""
    if any(ch not in "01" for ch in bits):
        raise ValueError("bit strings contain only 0 and 1")
    r = _Reader(bits, pos)
    n = r.unary("w0") + 1
    if n == 1:
        return G_A, r.pos - pos
    w1 = r.take(2 * n, "w1")
    types = tuple(int(w1[2 * i:2 * i + 2], 2) for i in range(n))
    m = sum(_ARITY[t] for t in types)
    w2 = r.take(m, "w2")
    if w2[0] != "1" or w2.count("1") != n - 1:
        raise InconsistentCodeError(f"w2 marks {w2.count('1')} first occurrences, expected {n - 1}")
    k = tuple(r.unary("w3") + 1 for _ in range(n - 1))
    try:
        profile = OccurrenceProfile(n, m, k)
    except ValueError as exc:
        raise InconsistentCodeError(str(exc)) from None
    width = profile.rank_bits
    index = int(r.take(width, "w4"), 2) if width else 0
    if index >= profile.count:
        raise RankOutOfRangeError(f"w4 index {index} is not below |S| = {profile.count}")
    omega = iter(unrank_multiset_word(profile, index))
    rho = []
    nxt = 1
    for bit in w2:
        if bit == "1":
            rho.append(nxt)
            nxt += 1
        else:
            rho.append(next(omega))
    # occurrence counts must agree with where w2 put the first occurrences
    seen = [0] * n
    for s in rho:
        seen[s] += 1
    if tuple(seen[1:]) != k:
        raise InconsistentCodeError("occurrence counts in w3 do not match rho")
    g = NormalFormTslp(types, tuple(rho))
    report = validate_normal_form(g)
    if not report.ok:
        raise InconsistentCodeError(f"decoded grammar is not in normal form: {report.violations[0]}")
    return g, r.pos - pos


# byte container: magic, version, MSB-first payload with zero padding

def bits_to_bytes(bits: BitString) -> bytes:
    padded = bits + "0" * (-len(bits) % 8)
    if not padded:
        return b""
    return int(padded, 2).to_bytes(len(padded) // 8, "big")


def bytes_to_bits(data: bytes) -> BitString:
    if not data:
        return ""
    return bin(int.from_bytes(data, "big"))[2:].zfill(8 * len(data))


def dumps(g: NormalFormTslp) -> bytes:
    return MAGIC + bytes([VERSION]) + bits_to_bytes(encode(g))


def loads(data: bytes) -> NormalFormTslp:
    if len(data) < len(MAGIC) + 1:
        if data != MAGIC[:len(data)]:
            raise ContainerError("bad magic")
        raise TruncatedCodeError("container header is truncated")
    if data[:4] != MAGIC:
        raise ContainerError("bad magic")
    if data[4] != VERSION:
        raise ContainerError(f"unsupported version {data[4]}")
    bits = bytes_to_bits(data[5:])
    g, used = decode(bits)
    tail = bits[used:]
    if len(tail) >= 8:
        raise ContainerError("trailing data after the codeword")
    if "1" in tail:
        raise ContainerError("nonzero padding")
    return g


def write_container(g: NormalFormTslp, sink: BinaryIO | str) -> None:
    data = dumps(g)
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)


def read_container(source: BinaryIO | str | bytes) -> NormalFormTslp:
    if isinstance(source, bytes):
        return loads(source)
    if isinstance(source, str) or hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            return loads(fh.read())
    return loads(source.read())

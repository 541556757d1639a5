"""Finite-field symbols, replicated message stores, and private permutations.

Symbols are plain integers in ``[0, p)`` for a configurable prime modulus
``p``.  GF(2) is the default: every query issued by this toolkit is a plain
sum of distinct-message symbols with unit coefficients, so the binary field
already realizes all of them; ``p`` stays configurable to demonstrate field
independence.

Message and symbol indices are 1-based in memory, matching the query-table
notation used across the package (``a_1``, ``b_2``, ...).  Serialized forms
(JSON, binary store files) are 0-based.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

DEFAULT_PRIME = 2

_STORE_HEADER = struct.Struct("<III")  # message count, length, prime


def is_prime(value: int) -> bool:
    """Trial-division primality check, adequate for one-byte moduli."""
    if value < 2:
        return False
    if value in (2, 3):
        return True
    if value % 2 == 0:
        return False
    d = 3
    while d * d <= value:
        if value % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class Field:
    """Prime field GF(p) with the few operations the toolkit needs."""

    p: int = DEFAULT_PRIME

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"modulus must be prime, got {self.p}")

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError("no inverse of 0")
        return pow(a, self.p - 2, self.p)

    def rand(self, rng: random.Random) -> int:
        return rng.randrange(self.p)


@dataclass(frozen=True)
class MessageStore:
    """The replicated database content: M messages of L symbols each.

    Every database holds an identical copy; the store is immutable after
    construction and safe to share across concurrent workers.
    """

    p: int
    messages: tuple

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"modulus must be prime, got {self.p}")
        if len(self.messages) < 1:
            raise ValueError("store needs at least one message")
        lengths = {len(m) for m in self.messages}
        if lengths != {len(self.messages[0])} or len(self.messages[0]) < 1:
            raise ValueError("messages must share one positive length")
        for msg in self.messages:
            for sym in msg:
                if not 0 <= sym < self.p:
                    raise ValueError(f"symbol {sym} outside [0, {self.p})")

    @property
    def num_messages(self) -> int:
        return len(self.messages)

    @property
    def length(self) -> int:
        return len(self.messages[0])

    def symbol(self, message: int, index: int) -> int:
        """Symbol ``index`` of ``message``, both 1-based."""
        if not 1 <= message <= self.num_messages:
            raise IndexError(f"message {message} out of range")
        if not 1 <= index <= self.length:
            raise IndexError(f"symbol index {index} out of range")
        return self.messages[message - 1][index - 1]


def make_store(num_messages: int, length: int, p: int = DEFAULT_PRIME,
               seed: int = 0) -> MessageStore:
    """Draw an M x L store uniformly and reproducibly from ``seed``."""
    if num_messages < 1:
        raise ValueError("need at least one message")
    if length < 1:
        raise ValueError("need at least one symbol per message")
    field = Field(p)
    rng = random.Random(seed)
    messages = tuple(
        tuple(field.rand(rng) for _ in range(length))
        for _ in range(num_messages)
    )
    return MessageStore(p=p, messages=messages)


def save_store(store: MessageStore, path: Union[str, Path]) -> None:
    """Write a store as a flat binary file.

    Header: message count, length, prime as little-endian 32-bit words.
    Body: row-major symbols, one byte each (requires p <= 256).
    """
    if store.p > 256:
        raise ValueError("binary store format holds one byte per symbol (p <= 256)")
    data = bytearray(_STORE_HEADER.pack(store.num_messages, store.length, store.p))
    for msg in store.messages:
        data.extend(bytes(msg))
    Path(path).write_bytes(bytes(data))


def load_store(path: Union[str, Path]) -> MessageStore:
    raw = Path(path).read_bytes()
    if len(raw) < _STORE_HEADER.size:
        raise ValueError("truncated store file")
    m, length, p = _STORE_HEADER.unpack_from(raw)
    body = raw[_STORE_HEADER.size:]
    if len(body) != m * length:
        raise ValueError("store body size does not match header")
    messages = tuple(
        tuple(body[i * length:(i + 1) * length]) for i in range(m)
    )
    return MessageStore(p=p, messages=messages)


@dataclass(frozen=True)
class Permutation:
    """A private bijection on {1, ..., L}, reproducible from its seed."""

    mapping: tuple

    def __post_init__(self):
        if sorted(self.mapping) != list(range(1, len(self.mapping) + 1)):
            raise ValueError("mapping is not a bijection on 1..L")

    @classmethod
    def identity(cls, length: int) -> "Permutation":
        return cls(tuple(range(1, length + 1)))

    @classmethod
    def random(cls, length: int, rng: random.Random) -> "Permutation":
        values = list(range(1, length + 1))
        rng.shuffle(values)
        return cls(tuple(values))

    def __len__(self) -> int:
        return len(self.mapping)

    def apply(self, index: int) -> int:
        return self.mapping[index - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.mapping)
        for i, image in enumerate(self.mapping, start=1):
            inv[image - 1] = i
        return Permutation(tuple(inv))


def random_permutations(num_messages: int, length: int,
                        rng: random.Random) -> tuple:
    """One independent uniform permutation per message."""
    return tuple(Permutation.random(length, rng) for _ in range(num_messages))


def permuted_view(store: MessageStore, perms: Sequence[Permutation],
                  message: int) -> tuple:
    """The interleaved view of one message: position i holds symbol pi(i)."""
    perm = perms[message - 1]
    if len(perm) != store.length:
        raise ValueError("permutation length does not match store")
    return tuple(store.symbol(message, perm.apply(i))
                 for i in range(1, store.length + 1))


def permuted_symbol(store: MessageStore, perms: Sequence[Permutation],
                    message: int, index: int) -> int:
    perm = perms[message - 1]
    if len(perm) != store.length:
        raise ValueError("permutation length does not match store")
    return store.symbol(message, perm.apply(index))

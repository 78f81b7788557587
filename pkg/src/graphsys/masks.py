"""Bitmask encoding of color subsets.

Colors are 1-based (1..k); a subset I of [k] is the integer mask with bit
i-1 set for each i in I.  The canonical text form is a sorted comma list,
e.g. {1,3} <-> "1,3" and the empty set <-> "".
"""

from __future__ import annotations

from .errors import ValidationError


def mask_of(colors) -> int:
    m = 0
    for c in colors:
        if c < 1:
            raise ValidationError(f"colors are 1-based, got {c}")
        m |= 1 << (c - 1)
    return m


def colors_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def mask_key(mask: int) -> str:
    return ",".join(str(c) for c in colors_of(mask))


def key_mask(key: str) -> int:
    key = key.strip()
    if not key:
        return 0
    return mask_of(int(part) for part in key.split(","))


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def nonempty_masks(k: int):
    """Masks 1..2^k-1 in increasing numeric order."""
    return range(1, 1 << k)


def all_masks(k: int):
    return range(1 << k)


def supersets(mask: int, k: int):
    """All masks J with J >= mask (inclusive), via complement submask iteration."""
    comp = ((1 << k) - 1) & ~mask
    sub = comp
    while True:
        yield mask | sub
        if sub == 0:
            return
        sub = (sub - 1) & comp

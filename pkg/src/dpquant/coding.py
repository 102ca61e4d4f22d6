"""Adaptive arithmetic coding of integer index sequences.

Used only to validate the entropy-based rate estimates: the achieved
codelength of an adaptive order-0 arithmetic coder should sit within a few
hundredths of a nat of the plug-in entropy.  Integer implementation with
32-bit range registers and frequency-count adaptation.
"""

from __future__ import annotations

import math

__all__ = ["arithmetic_encode", "arithmetic_decode", "codelength_nats_per_symbol"]

_PRECISION = 32
_FULL = (1 << _PRECISION) - 1
_HALF = 1 << (_PRECISION - 1)
_QUARTER = 1 << (_PRECISION - 2)


class _AdaptiveModel:
    def __init__(self, alphabet_size: int):
        self.freq = [1] * alphabet_size
        self.total = alphabet_size

    def cum_range(self, sym: int) -> tuple[int, int, int]:
        lo = sum(self.freq[:sym])
        return lo, lo + self.freq[sym], self.total

    def locate(self, target: int) -> int:
        acc = 0
        for s, f in enumerate(self.freq):
            if acc + f > target:
                return s
            acc += f
        raise ValueError("target out of range")

    def update(self, sym: int):
        self.freq[sym] += 1
        self.total += 1


def arithmetic_encode(symbols, alphabet_size: int) -> list[int]:
    """Encode a symbol sequence; returns the bitstream as a list of 0/1."""
    model = _AdaptiveModel(alphabet_size)
    low, high, pending = 0, _FULL, 0
    bits: list[int] = []

    def emit(bit):
        nonlocal pending
        bits.append(bit)
        bits.extend([1 - bit] * pending)
        pending = 0

    for sym in symbols:
        c_lo, c_hi, tot = model.cum_range(sym)
        span = high - low + 1
        high = low + span * c_hi // tot - 1
        low = low + span * c_lo // tot
        while True:
            if high < _HALF:
                emit(0)
            elif low >= _HALF:
                emit(1)
                low -= _HALF
                high -= _HALF
            elif low >= _QUARTER and high < 3 * _QUARTER:
                pending += 1
                low -= _QUARTER
                high -= _QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
        model.update(sym)
    pending += 1
    emit(0 if low < _QUARTER else 1)
    return bits


def arithmetic_decode(bits, n_symbols: int, alphabet_size: int) -> list[int]:
    model = _AdaptiveModel(alphabet_size)
    stream = iter(list(bits) + [0] * (_PRECISION + 16))
    low, high = 0, _FULL
    code = 0
    for _ in range(_PRECISION):
        code = (code << 1) | next(stream)
    out = []
    for _ in range(n_symbols):
        span = high - low + 1
        target = ((code - low + 1) * model.total - 1) // span
        sym = model.locate(target)
        out.append(sym)
        c_lo, c_hi, tot = model.cum_range(sym)
        high = low + span * c_hi // tot - 1
        low = low + span * c_lo // tot
        while True:
            if high < _HALF:
                pass
            elif low >= _HALF:
                low -= _HALF
                high -= _HALF
                code -= _HALF
            elif low >= _QUARTER and high < 3 * _QUARTER:
                low -= _QUARTER
                high -= _QUARTER
                code -= _QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
            code = (code << 1) | next(stream)
        model.update(sym)
    return out


def codelength_nats_per_symbol(symbols, alphabet_size: int) -> float:
    bits = arithmetic_encode(symbols, alphabet_size)
    return len(bits) * math.log(2.0) / max(1, len(symbols))

"""d-wise independent hash families via polynomials over GF(2^m).

A family member is a degree-(d-1) polynomial with coefficients drawn from a
seed of exactly d*max(gamma, beta_bits) bits; evaluation maps gamma-bit inputs
to beta_bits-bit outputs by truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import GraphError
from .rng import stream

# one irreducible polynomial per field size (bit mask without the leading term)
_IRREDUCIBLE = {
    1: 0b1, 2: 0b11, 3: 0b011, 4: 0b0011, 5: 0b00101, 6: 0b000011,
    7: 0b0000011, 8: 0b00011011, 9: 0b000010001, 10: 0b0000001001,
    11: 0b00000000101, 12: 0b000001010011, 13: 0b0000000011011,
    14: 0b10001000011, 15: 0b000000000000011, 16: 0b0001000000001011,
    17: 0b000000000001001, 18: 0b000000000010000001, 19: 0b0000000000000100111,
    20: 0b00000000000000001001, 24: 0b000000000000000010000111,
    32: 0b10001101,
}


def gf_mul(a: int, b: int, m: int) -> int:
    """Carry-less multiply modulo the degree-m irreducible polynomial."""
    if m not in _IRREDUCIBLE:
        raise GraphError(f"no irreducible polynomial configured for GF(2^{m})")
    red = _IRREDUCIBLE[m] | (1 << m)
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> m & 1:
            a ^= red
    return out


@dataclass(frozen=True)
class HashFamilyMember:
    gamma: int
    beta_bits: int
    d: int
    seed_bits: tuple[int, ...]   # exactly d*max(gamma, beta_bits) bits

    @property
    def field_bits(self) -> int:
        return max(self.gamma, self.beta_bits)

    def coefficients(self) -> list[int]:
        m = self.field_bits
        return [int("".join(map(str, self.seed_bits[i * m:(i + 1) * m])), 2)
                for i in range(self.d)]


def hash_family_sample(gamma: int, beta_bits: int, d: int, seed: int) -> HashFamilyMember:
    if d < 1 or gamma < 1 or beta_bits < 1:
        raise GraphError("gamma, beta_bits, d must all be >= 1")
    if d > 2 ** gamma:
        raise GraphError(f"d={d} exceeds the 2^gamma={2 ** gamma} domain size")
    m = max(gamma, beta_bits)
    rng = stream(seed, "hash", gamma, beta_bits, d)
    bits = tuple(rng.getrandbits(1) for _ in range(d * m))
    return HashFamilyMember(gamma, beta_bits, d, bits)


def hash_eval(member: HashFamilyMember, x: int) -> int:
    """Evaluate the polynomial at x (gamma-bit input), truncated to beta_bits."""
    if not 0 <= x < 2 ** member.gamma:
        raise GraphError(f"input {x} outside [0, 2^{member.gamma})")
    m = member.field_bits
    acc = 0
    for coeff in member.coefficients():  # Horner over GF(2^m)
        acc = gf_mul(acc, x, m) ^ coeff
    return acc & ((1 << member.beta_bits) - 1)

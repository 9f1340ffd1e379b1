import itertools
from collections import Counter

import pytest

from treepack.graph import GraphError
from treepack.hashing import (
    _IRREDUCIBLE,
    HashFamilyMember,
    gf_mul,
    hash_eval,
    hash_family_sample,
)


def int_to_bits(value, width):
    return tuple(value >> (width - 1 - i) & 1 for i in range(width))


class TestField:
    @pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6, 7, 8])
    def test_multiplication_forms_group(self, m):
        # every nonzero element acts as a bijection => no zero divisors
        size = 2 ** m
        for a in range(1, size):
            image = {gf_mul(a, b, m) for b in range(size)}
            assert len(image) == size

    @pytest.mark.parametrize("m", [4, 8, 12, 16, 20, 32])
    def test_ring_axioms_spot(self, m):
        vals = [1, 2, 3, 5, (1 << m) - 1]
        for a, b, c in itertools.product(vals, repeat=3):
            assert gf_mul(a, b, m) == gf_mul(b, a, m)
            assert gf_mul(gf_mul(a, b, m), c, m) == gf_mul(a, gf_mul(b, c, m), m)
            assert gf_mul(a, b ^ c, m) == gf_mul(a, b, m) ^ gf_mul(a, c, m)

    def test_configured_sizes_present(self):
        for m in (1, 8, 16, 32):
            assert m in _IRREDUCIBLE

    def test_unconfigured_size_errors(self):
        with pytest.raises(GraphError):
            gf_mul(1, 1, 23)


class TestFamily:
    def test_seed_length_exact(self):
        member = hash_family_sample(gamma=10, beta_bits=6, d=3, seed=1)
        assert len(member.seed_bits) == 3 * 10
        member = hash_family_sample(gamma=4, beta_bits=12, d=2, seed=1)
        assert len(member.seed_bits) == 2 * 12

    def test_degree_zero_is_constant(self):
        member = hash_family_sample(gamma=5, beta_bits=5, d=1, seed=3)
        values = {hash_eval(member, x) for x in range(32)}
        assert len(values) == 1

    def test_deterministic(self):
        a = hash_family_sample(6, 6, 3, seed=42)
        b = hash_family_sample(6, 6, 3, seed=42)
        assert a == b
        assert [hash_eval(a, x) for x in range(64)] == [hash_eval(b, x) for x in range(64)]

    def test_domain_checks(self):
        member = hash_family_sample(4, 4, 2, seed=0)
        with pytest.raises(GraphError):
            hash_eval(member, 16)
        with pytest.raises(GraphError):
            hash_family_sample(2, 2, 5, seed=0)

    def test_truncation_width(self):
        member = hash_family_sample(gamma=8, beta_bits=3, d=2, seed=9)
        assert all(hash_eval(member, x) < 8 for x in range(256))


class TestPairwiseIndependence:
    def test_exhaustive_on_16_element_field(self):
        # d=2 over GF(2^4): across all 2^8 coefficient seeds, (H(x1), H(x2))
        # hits every value pair exactly once for any fixed x1 != x2
        gamma = beta = 4
        for x1, x2 in [(0, 1), (3, 7), (5, 14)]:
            counts = Counter()
            for seed_val in range(2 ** 8):
                member = HashFamilyMember(gamma, beta, 2, int_to_bits(seed_val, 8))
                counts[(hash_eval(member, x1), hash_eval(member, x2))] += 1
            assert len(counts) == 256
            assert set(counts.values()) == {1}

    def test_three_wise_on_8_element_field(self):
        gamma = beta = 3
        xs = (1, 2, 5)
        counts = Counter()
        for seed_val in range(2 ** 9):
            member = HashFamilyMember(gamma, beta, 3, int_to_bits(seed_val, 9))
            counts[tuple(hash_eval(member, x) for x in xs)] += 1
        assert len(counts) == 512 and set(counts.values()) == {1}

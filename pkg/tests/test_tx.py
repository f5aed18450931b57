import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imnoma.codec import SubblockSpec, build_subblock, int_to_bits
from imnoma.tx import (add_cp, assemble_block, deinterleave, interleave, interleaver_permutation,
                       remove_cp, spectral_efficiency, superpose, to_freq_domain, to_time_domain)


def test_assemble_small_block():
    spec = SubblockSpec(4, 2, 4)
    block = assemble_block(np.arange(12) % 2, spec, 2)
    assert block.z.shape == (8,) and block.N == 8
    assert np.count_nonzero(block.z) == 4
    assert np.array_equal(block.z[:4], build_subblock([0, 1, 0, 1, 0, 1], spec).vector)


def test_assemble_reference_block_consumes_256_bits():
    spec = SubblockSpec(4, 3, 4)
    block = assemble_block(np.zeros(256, dtype=np.uint8), spec, 32)
    assert block.z.shape == (128,)
    single = build_subblock(int_to_bits(0, 8), spec).vector
    assert np.array_equal(block.z, np.tile(single, 32))
    with pytest.raises(ValueError):
        assemble_block(np.zeros(255, dtype=np.uint8), spec, 32)


def test_spectral_efficiency_reference_values():
    assert spectral_efficiency(SubblockSpec(4, 3, 4), 128, 16) == pytest.approx(1.7778, abs=1e-4)
    assert spectral_efficiency(SubblockSpec(4, 1, 4), 128, 16) == pytest.approx(0.8889, abs=1e-4)
    assert spectral_efficiency(SubblockSpec(4, 4, 4), 128, 16) == pytest.approx(1.7778, abs=1e-4)
    assert spectral_efficiency(SubblockSpec(4, 4, 2), 128, 16) == pytest.approx(0.8889, abs=1e-4)


def test_superpose_boundaries(rng):
    a = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    assert np.array_equal(superpose(a, b, 0.0, 2.0).x_sc, np.sqrt(2.0) * b)
    assert np.array_equal(superpose(a, b, 1.0, 2.0).x_sc, np.sqrt(2.0) * a)
    sb = superpose(np.ones(1), np.zeros(1), 0.15)
    assert sb.x_sc[0] == pytest.approx(0.3873, abs=1e-4)
    assert superpose(np.zeros(1), np.ones(1), 0.15).x_sc[0] == pytest.approx(0.9220, abs=1e-4)
    assert (sb.P_NU, sb.P_FU) == pytest.approx((0.15, 0.85))


@pytest.mark.parametrize("args", [(np.ones(4), np.ones(5), 0.3), (np.ones(4), np.ones(4), 1.2),
                                  (np.ones(4), np.ones(4), -0.1)])
def test_superpose_rejects(args):
    with pytest.raises(ValueError):
        superpose(*args)


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(0, 1), seed=st.integers(0, 2**32 - 1))
def test_superpose_linearity(alpha, seed):
    r = np.random.default_rng(seed)
    z1 = r.standard_normal(16) + 1j * r.standard_normal(16)
    z2 = r.standard_normal(16) + 1j * r.standard_normal(16)
    zero = np.zeros(16)
    lhs = superpose(z1, zero, alpha).x_sc + superpose(zero, z2, alpha).x_sc
    assert np.allclose(lhs, superpose(z1, z2, alpha).x_sc, atol=1e-12)


def test_interleaver_square_involution(rng):
    x = rng.standard_normal(16)
    assert np.array_equal(interleave(interleave(x, 4, 4), 4, 4), x)


def test_interleaver_small_permutation():
    perm = interleaver_permutation(4, 2)
    assert sorted(perm) == list(range(8))
    assert list(perm) == [0, 4, 1, 5, 2, 6, 3, 7]
    x = np.arange(8.0)
    assert np.array_equal(deinterleave(interleave(x, 4, 2), 4, 2), x)


def test_interleaver_spreads_subblock_by_g():
    n, g = 4, 32
    out_pos = np.argsort(interleaver_permutation(n, g))  # input position -> output position
    for xi in range(g):
        pos = out_pos[xi * n:(xi + 1) * n]
        assert np.all(np.diff(pos) == g)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 16), g=st.integers(1, 16))
def test_interleaver_inverse_property(n, g):
    x = np.arange(n * g)
    assert np.array_equal(deinterleave(interleave(x, n, g), n, g), x)
    assert np.array_equal(interleave(deinterleave(x, n, g), n, g), x)


def test_interleaver_rejects_bad_layout():
    with pytest.raises(ValueError):
        interleave(np.zeros(10), 4, 2)


def test_ifft_identities(rng):
    N = 64
    imp = to_time_domain(np.ones(N))
    assert imp[0] == pytest.approx(np.sqrt(N))
    assert np.allclose(imp[1:], 0, atol=1e-12)
    x = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    assert abs(np.linalg.norm(to_time_domain(x)) ** 2 - np.linalg.norm(x) ** 2) < 1e-9
    assert np.allclose(to_freq_domain(to_time_domain(x)), x, atol=1e-9)


def test_cyclic_prefix():
    x = np.array([1, 2, 3, 4])
    assert np.array_equal(add_cp(x, 0), x)
    assert np.array_equal(add_cp(x, 2), [3, 4, 1, 2, 3, 4])
    assert add_cp(np.zeros(128), 16).shape == (144,)
    assert np.array_equal(remove_cp(add_cp(x, 2), 2), x)
    with pytest.raises(ValueError):
        add_cp(x, 4)

import itertools

import numpy as np
import pytest

from growcut3d.grid import BinaryMask, InputError
from growcut3d.morphology import (
    StructuringElement,
    component_count,
    dilate,
    erode,
    remove_islands,
)

from conftest import brute_dilate, brute_erode, flood_components


def mask_of(bits):
    return BinaryMask(np.asarray(bits, dtype=bool))


def random_mask(rng, shape=(8, 8, 8), p=0.4):
    return mask_of(rng.random(shape) < p)


class TestDilate:
    def test_single_voxel_cross(self):
        bits = np.zeros((5, 5, 5), bool)
        bits[2, 2, 2] = True
        out = dilate(mask_of(bits), StructuringElement(6, 1))
        assert out.voxel_count == 7

    def test_empty_mask(self):
        out = dilate(BinaryMask.empty((4, 4, 4)), StructuringElement(26, 2))
        assert out.voxel_count == 0

    @pytest.mark.parametrize("connectivity", [6, 18, 26])
    def test_matches_set_union_oracle(self, rng, connectivity):
        for _ in range(6):
            mask = random_mask(rng)
            got = dilate(mask, StructuringElement(connectivity, 1))
            assert np.array_equal(got.bits, brute_dilate(mask.bits, connectivity))

    def test_radius_is_iterated_unit(self, rng):
        mask = random_mask(rng, (6, 6, 6), 0.15)
        twice = dilate(dilate(mask, StructuringElement(6, 1)), StructuringElement(6, 1))
        assert np.array_equal(dilate(mask, StructuringElement(6, 2)).bits, twice.bits)


class TestErode:
    def test_single_voxel_vanishes(self):
        bits = np.zeros((5, 5, 5), bool)
        bits[2, 2, 2] = True
        for connectivity in (6, 18, 26):
            assert erode(mask_of(bits), StructuringElement(connectivity, 1)).voxel_count == 0

    def test_full_block_shrinks_to_interior(self):
        out = erode(mask_of(np.ones((5, 5, 5), bool)), StructuringElement(6, 1))
        assert out.voxel_count == 27
        assert out.bits[1:4, 1:4, 1:4].all()

    @pytest.mark.parametrize("connectivity", [6, 26])
    def test_matches_intersection_oracle(self, rng, connectivity):
        for _ in range(6):
            mask = random_mask(rng, p=0.7)
            got = erode(mask, StructuringElement(connectivity, 1))
            assert np.array_equal(got.bits, brute_erode(mask.bits, connectivity))

    def test_closing_contains_original(self, rng):
        # holds for masks clear of the volume border; border foreground is
        # always lost because out-of-bounds counts as background for erosion
        se = StructuringElement(6, 1)
        for _ in range(100):
            inner = rng.random((6, 6, 6)) < 0.3
            bits = np.zeros((8, 8, 8), bool)
            bits[1:7, 1:7, 1:7] = inner
            mask = mask_of(bits)
            closed = erode(dilate(mask, se), se)
            assert np.all(closed.bits | ~mask.bits)  # mask ⊆ closed

    def test_closing_drops_border_foreground(self):
        # the documented border policy: a lone border voxel does not survive
        bits = np.zeros((3, 3, 3), bool)
        bits[0, 0, 0] = True
        se = StructuringElement(6, 1)
        assert erode(dilate(mask_of(bits), se), se).voxel_count == 0


def padded_complement_dilate(mask: BinaryMask, se: StructuringElement) -> np.ndarray:
    """Dilation of the volume-embedded complement, where everything beyond the
    border belongs to the complement; realized by padding with True."""
    r = se.radius
    padded = np.pad(~mask.bits, r, constant_values=True)
    out = dilate(mask_of(padded), se).bits
    return out[r:-r, r:-r, r:-r]


class TestDuality:
    def test_exhaustive_2x2x2(self):
        se = StructuringElement(6, 1)
        for bits in itertools.product([False, True], repeat=8):
            mask = mask_of(np.array(bits).reshape(2, 2, 2))
            assert np.array_equal(erode(mask, se).bits, ~padded_complement_dilate(mask, se))

    @pytest.mark.parametrize("connectivity,radius", [(6, 1), (18, 1), (26, 1), (6, 2)])
    def test_randomized_8cubed(self, rng, connectivity, radius):
        se = StructuringElement(connectivity, radius)
        for _ in range(20):
            mask = random_mask(rng, p=0.6)
            assert np.array_equal(erode(mask, se).bits, ~padded_complement_dilate(mask, se))

    def test_monotonicity(self, rng):
        se = StructuringElement(26, 1)
        for _ in range(20):
            m2 = random_mask(rng, (6, 6, 6), 0.5)
            m1 = mask_of(m2.bits & (rng.random((6, 6, 6)) < 0.6))  # m1 ⊆ m2
            assert np.all(dilate(m2, se).bits | ~dilate(m1, se).bits)
            assert np.all(erode(m2, se).bits | ~erode(m1, se).bits)


class TestRemoveIslands:
    def test_keeps_largest_of_two(self):
        bits = np.zeros((6, 6, 6), bool)
        bits[0:2, 0:2, 0:2] = True          # 8-voxel block ...
        bits[0:2, 0, 2] = True              # ... plus 2 attached: size 10
        bits[4:5, 4:5, 3:6] = True          # size 3, far away
        mask = mask_of(bits)
        out = remove_islands(mask, 6)
        comps = flood_components(bits, 6)
        assert sorted(len(c) for c in comps) == [3, 10]
        assert out.voxel_count == 10
        assert not out.bits[4, 4, 3]

    def test_single_component_unchanged(self, rng):
        bits = np.zeros((5, 5, 5), bool)
        bits[1:4, 1:4, 1:4] = True
        mask = mask_of(bits)
        out = remove_islands(mask, 26)
        assert np.array_equal(out.bits, bits)

    def test_empty_mask(self):
        out = remove_islands(BinaryMask.empty((4, 4, 4)), 6)
        assert out.voxel_count == 0

    def test_tie_break_smallest_linear_index(self):
        # two single-voxel components; x-fastest linear order prefers (1,0,0)
        bits = np.zeros((3, 3, 3), bool)
        bits[0, 0, 1] = True   # voxel (x=1, y=0, z=0), linear index 1
        bits[2, 2, 0] = True   # voxel (x=0, y=2, z=2), linear index 24
        out = remove_islands(mask_of(bits), 6)
        assert out.voxel_count == 1
        assert out.bits[0, 0, 1]

    @pytest.mark.parametrize("connectivity", [6, 26])
    def test_matches_flood_fill_oracle(self, rng, connectivity):
        for _ in range(10):
            mask = random_mask(rng, (7, 7, 7), 0.25)
            out = remove_islands(mask, connectivity)
            comps = flood_components(mask.bits, connectivity)
            if not comps:
                assert out.voxel_count == 0
                continue
            biggest = max(len(c) for c in comps)
            winners = [c for c in comps if len(c) == biggest]
            # oracle tie-break: smallest (z, y, x) == smallest x-fastest index
            winner = min(winners, key=lambda c: c[0])
            expected = np.zeros_like(mask.bits)
            for z, y, x in winner:
                expected[z, y, x] = True
            assert np.array_equal(out.bits, expected)

    def test_result_is_single_component_and_subset(self, rng):
        for _ in range(10):
            mask = random_mask(rng, (6, 6, 6), 0.2)
            out = remove_islands(mask, 6)
            assert np.all(mask.bits | ~out.bits)  # out ⊆ mask
            assert component_count(out, 6) <= 1


class TestStructuringElement:
    def test_validation(self):
        with pytest.raises(InputError):
            StructuringElement(7, 1)
        with pytest.raises(InputError):
            StructuringElement(6, 0)

import numpy as np
import pytest

from rsbeam import Box, DegenerateBoxError, branch


def box4(gamma=((0, 4), (0, 2)), s=(0, 1), alpha=((0, np.pi),)):
    g = np.array(gamma, dtype=float)
    a = np.array(alpha, dtype=float)
    return Box(
        gamma_lo=g[:, 0], gamma_hi=g[:, 1],
        s_lo=s[0], s_hi=s[1],
        alpha_lo=a[:, 0], alpha_hi=a[:, 1],
    )


def test_longest_edge_selected():
    left, right = branch(box4())
    # edge lengths (4, 2, 1, pi): gamma_1 splits at 2
    assert left.gamma_hi[0] == pytest.approx(2.0)
    assert right.gamma_lo[0] == pytest.approx(2.0)
    assert left.gamma_lo[0] == 0.0 and right.gamma_hi[0] == 4.0


def test_tie_breaks_to_lowest_dimension():
    box = box4(gamma=((0, 1), (0, 1)), s=(0, 1), alpha=((0, 1),))
    left, right = branch(box)
    assert left.gamma_hi[0] == pytest.approx(0.5)
    assert right.gamma_lo[0] == pytest.approx(0.5)
    np.testing.assert_allclose(left.gamma_hi[1], 1.0)


def test_relative_rule_uses_reference_widths():
    box = box4(gamma=((0, 2), (0, 2)), s=(0, 0), alpha=((0, 0),))
    ref = np.array([100.0, 2.0, 1.0, 1.0])
    left, right = branch(box, rule="relative", ref_widths=ref)
    # widths relative to ref: (0.02, 1.0, 0, 0) -> second gamma dimension
    assert left.gamma_hi[1] == pytest.approx(1.0)
    assert right.gamma_lo[1] == pytest.approx(1.0)


def test_children_partition_parent():
    rng = np.random.default_rng(0)
    for _ in range(200):
        lo = rng.uniform(0, 1, size=4)
        hi = lo + rng.uniform(0.01, 3, size=4)
        box = Box(lo[:2], hi[:2], lo[2], hi[2], lo[3:], hi[3:])
        left, right = branch(box)
        j = int(np.argmax(box.widths()))
        mid = 0.5 * (box.lower()[j] + box.upper()[j])
        assert left.upper()[j] == pytest.approx(mid)
        assert right.lower()[j] == pytest.approx(mid)
        keep = np.arange(4) != j
        np.testing.assert_allclose(left.lower()[keep], box.lower()[keep])
        np.testing.assert_allclose(right.upper()[keep], box.upper()[keep])


def test_active_mask_skips_angle_edges():
    box = box4(gamma=((0, 1), (0, 1)), s=(0, 1), alpha=((0, 2 * np.pi),))
    active = np.array([True, True, True, False])
    left, _ = branch(box, active=active)
    # the alpha edge is longest but masked; dim 0 wins the tie instead
    assert left.gamma_hi[0] == pytest.approx(0.5)
    np.testing.assert_allclose(left.alpha_hi, [2 * np.pi])


def test_mask_falls_back_when_nothing_active():
    box = box4(gamma=((0, 0), (0, 0)), s=(0, 0), alpha=((0, np.pi),))
    active = np.array([True, True, True, False])
    left, right = branch(box, active=active)
    assert left.alpha_hi[0] == pytest.approx(np.pi / 2)
    assert right.alpha_lo[0] == pytest.approx(np.pi / 2)


def test_degenerate_box_raises():
    box = box4(gamma=((0, 0), (1, 1)), s=(2, 2), alpha=((0.5, 0.5),))
    with pytest.raises(DegenerateBoxError):
        branch(box)


def test_contains_and_widths():
    box = box4()
    assert box.contains([1.0, 1.0], 0.5, [1.0])
    assert not box.contains([5.0, 1.0], 0.5, [1.0])
    np.testing.assert_allclose(box.widths(), [4, 2, 1, np.pi])
    assert not box.is_empty()

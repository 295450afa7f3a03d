import math

import pytest
from hypothesis import given, strategies as st

from exosim.hand import (
    DIP_COUPLING_RATIO,
    Digit,
    FINGERS,
    HandModel,
    HandPose,
    Joint,
    JointKind,
    WRIST_EXTENSION_DEG,
    clamp_pose,
    default_hand,
    full_flexion_pose,
    spastic_rest_pose,
    zero_pose,
)


def test_default_hand_has_twenty_articulations():
    hand = default_hand()
    assert len(hand.joints) == 20
    # 4 thumb joints + 4 per finger
    thumb = [j for j in hand.joints if j.digit is Digit.THUMB]
    assert len(thumb) == 4
    for digit in FINGERS:
        assert len([j for j in hand.joints if j.digit is digit]) == 4


def test_default_ranges():
    hand = default_hand()
    assert hand.joint((Digit.INDEX, JointKind.MCP)).flexion_max_deg == 90.0
    assert hand.joint((Digit.INDEX, JointKind.PIP)).flexion_max_deg == 100.0
    assert hand.joint((Digit.INDEX, JointKind.DIP)).flexion_max_deg == 70.0
    abd = hand.joint((Digit.MIDDLE, JointKind.ABDUCTION))
    assert (abd.flexion_min_deg, abd.flexion_max_deg) == (-15.0, 15.0)
    assert hand.joint((Digit.THUMB, JointKind.CMC)).flexion_max_deg == 50.0


def test_wrist_fixed_at_30_degrees():
    hand = default_hand()
    assert zero_pose(hand).wrist_extension_deg == WRIST_EXTENSION_DEG == 30.0


def test_empty_joint_range_rejected():
    with pytest.raises(ValueError):
        Joint(Digit.INDEX, JointKind.MCP, 10.0, 10.0)


def test_depth_must_be_positive():
    hand = default_hand()
    with pytest.raises(ValueError):
        hand.with_uniform_depth(0.0)
    with pytest.raises(ValueError):
        hand.with_uniform_depth(-1.0)


def test_validate_pose_rejects_out_of_range():
    hand = default_hand()
    bad = zero_pose(hand).replace_angles({(Digit.INDEX, JointKind.MCP): 95.0})
    assert not hand.pose_in_limits(bad)
    with pytest.raises(ValueError):
        hand.validate_pose(bad)


def test_clamp_pose_examples():
    hand = default_hand()
    pose = zero_pose(hand).replace_angles(
        {
            (Digit.INDEX, JointKind.MCP): 120.0,
            (Digit.INDEX, JointKind.ABDUCTION): -40.0,
        }
    )
    clamped = clamp_pose(hand, pose)
    assert clamped.angle((Digit.INDEX, JointKind.MCP)) == 90.0
    assert clamped.angle((Digit.INDEX, JointKind.ABDUCTION)) == -15.0
    assert hand.pose_in_limits(clamped)


angle_values = st.floats(
    min_value=-720, max_value=720, allow_nan=False, allow_infinity=False
)


@given(st.lists(angle_values, min_size=20, max_size=20))
def test_clamp_pose_idempotent(angles):
    hand = default_hand()
    pose = HandPose(dict(zip(hand.joint_ids(), angles)))
    once = clamp_pose(hand, pose)
    twice = clamp_pose(hand, once)
    assert hand.pose_in_limits(once)
    assert once.angles_deg == twice.angles_deg


def test_full_flexion_pose_hits_limits():
    hand = default_hand()
    pose = full_flexion_pose(hand)
    assert pose.angle((Digit.LITTLE, JointKind.PIP)) == 100.0
    assert pose.angle((Digit.THUMB, JointKind.ABDUCTION)) == 0.0
    assert hand.pose_in_limits(pose)


def test_spastic_rest_pose_scalar_fraction():
    hand = default_hand()
    pose = spastic_rest_pose(hand, 0.75)
    assert pose.angle((Digit.INDEX, JointKind.MCP)) == pytest.approx(67.5)
    assert pose.angle((Digit.INDEX, JointKind.PIP)) == pytest.approx(75.0)
    # DIP slaved to the PIP
    assert pose.angle((Digit.INDEX, JointKind.DIP)) == pytest.approx(
        DIP_COUPLING_RATIO * 75.0
    )
    assert pose.angle((Digit.THUMB, JointKind.CMC)) == pytest.approx(0.75 * 50.0)
    assert hand.pose_in_limits(pose)


def test_spastic_rest_pose_per_digit_fraction():
    hand = default_hand()
    pose = spastic_rest_pose(hand, {"default": 0.6, Digit.INDEX: 0.75})
    assert pose.angle((Digit.INDEX, JointKind.MCP)) == pytest.approx(67.5)
    assert pose.angle((Digit.MIDDLE, JointKind.MCP)) == pytest.approx(54.0)
    assert pose.angle((Digit.RING, JointKind.PIP)) == pytest.approx(60.0)


@given(st.floats(min_value=0.0, max_value=1.0))
def test_spastic_rest_pose_always_in_limits(fraction):
    hand = default_hand()
    assert hand.pose_in_limits(spastic_rest_pose(hand, fraction))


def test_total_finger_flexion():
    hand = default_hand()
    pose = spastic_rest_pose(hand, 0.75)
    # 67.5 + 75 + 52.5
    assert pose.total_finger_flexion(Digit.INDEX) == pytest.approx(195.0)


def test_duplicate_joint_rejected():
    j = Joint(Digit.INDEX, JointKind.MCP, 0.0, 90.0)
    with pytest.raises(ValueError):
        HandModel((j, j), {j.jid: 9.0})

"""Bimanual non-prehensile manipulation primitives from hand demonstrations.

Three-stage toolkit: retarget noisy 21-joint hand trajectories to coarse
gripper poses, post-optimize them (coplanar spline smoothing, anchor-based
rotation interpolation, iterative contact adjustment against a verifier),
and re-parameterize verified primitives for same-category objects of a
different size.
"""

from .contact import (AdjustConfig, AdjustResult, AttemptRecord, SkillPattern, VerifierResult,
                      anchor_point, decay_schedule, iterate_adjust, relocate, retarget_contact,
                      scale_primary)
from .errors import (AllAttemptsFailed, ArmDesynchronized, BehindCamera, BinomapError,
                     DegenerateGeometry, DegenerateHand, DegenerateInput, EmptySlice,
                     InputFormatError, InvalidRotation, NoAlignedPair, NoValidPoint,
                     PreconditionError, Unreachable, UnknownScenario)
from .geometry import (Plane, fit_plane, plane_residual, project_to_plane, quat_to_rotation,
                       rotation_about_axis, rotation_to_quat, slerp)
from .oracle import OracleConfig, WindowOracle, verify_geometric, verify_window
from .parameterize import (PrimitiveRecord, SliceConfig, adapt_primitive, load_record,
                           save_record, size_delta)
from .pointcloud import PointCloud, load_point_cloud, min_distance, save_point_cloud
from .retarget import (CameraIntrinsics, HandFrame, HandSequence, JointIndexConfig,
                       contact_point, extract_coarse, hand_pose, lift_to_scene,
                       load_hand_sequence, project_point, save_hand_sequence)
from .smoothing import (AnchorSet, SmoothConfig, SmoothResult, fit_spline_2d, select_anchors,
                        smooth_positions, smooth_rotations, smooth_trajectory)
from .synthetic import SCENARIO_NAMES, generate_scenario, write_scenario
from .trajectory import (ArmTrack, BimanualTrajectory, Pose, load_trajectory, save_trajectory)

__version__ = "0.1.0"

"""Exact construction and analysis of staircase laminates of diagonal matrices."""
from .errors import (AmbiguousMembership, BadIndex, CounterViolation, InsufficientPoints, InvalidParams,
                     InvalidSetId, InvariantViolation, LaminateError, MassBoundViolation, NonConvexSplit,
                     NotInSet, RegimeMismatch, RootMismatch, UnsupportedRegime)
from .matrix import DiagMatrix, det, diag, dist, identity, inverse, op_norm, sorted_spectrum
from .laminate import (Atom, CertificateBuilder, Laminate, SplitCertificate, SplitStep, apply_split,
                       barycenter, compose, det_expectation, inverse_laminate, invert_certificate,
                       merge_atoms, replay, validate_certificate)
from .sets import EXACT_3D, OPEN_ND, PARAMS_3D, Params, SetId, classify, inverse_set, member
from .staircase3d import (build_sequence_3d, push_A_row_3d, push_B_row_3d, split_A_3d,
                          split_B_3d)
from .staircase_nd import (build_sequence_nd, push_A_row_nd, push_B_row_nd, push_S_nd, split_A_nd,
                           split_B_nd, split_S_nd)
from .constants import constants_run, detect_bounded
from .analysis import (degeneracy_profile, fit_exponent, mass_profile, pushforward_volume, rank_collapse,
                       tail, tail_inverse)

__version__ = "0.1.0"

"""CONGEST-model simulator and lower-bound construction toolkit."""

from .congest import (ExecutionTrace, Message, NodeAlgorithm, SharedTape,
                      default_bandwidth, replay_check, run)
from .errors import (BandwidthViolation, BudgetExceeded, CoverageGap,
                     ExactnessViolation, IndexOutOfRange, InstanceTooLarge,
                     ParamViolation, RoundLimitExceeded, StructuralViolation,
                     TooManySteps, XplabError)
from .family import (FamilyParams, build_F, build_G, per_path_length, phi,
                     phi_prime, s_set, validate_structure)
from .gadget import (GadgetGraph, GadgetParams, build_gadget,
                     exact_destination_distribution, exact_follow_probability,
                     expected_path, reduction_run, sample_walk)
from .multigraph import UNBOUNDED, MultiGraph
from .pointer_chasing import (PcInstance, distributed_pc_algorithm, g,
                              naive_direct_protocol,
                              one_round_everything_protocol, pc)
from .cutsim import TwoPartyTranscript, crossing_messages, schedule, simulate, t_r

__all__ = [name for name in dir() if not name.startswith("_")]

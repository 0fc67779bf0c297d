"""Explicit low-distortion embeddings of binary trees, with exact distortion audits."""

from .audit import DistortionReport, ExhaustivePairs, SampledPairs, audit, exhaustive_pairs, sample_pairs, verify_bounds
from .constructions import BourgainFinite, Hyperbolic, L1Isometric, Lp, build_construction
from .hyperbolic import HyperbolicEmbedding, c0_distance, lambda_weight
from .james import JamesSystem, bourgain_embed, functional_eval, pair_identity_check
from .lp import DiagonalIso, LpBlockVector, LpEmbedding, embed_lp, lp_sum_distance, make_iso, phi
from .stepped import BlockVector, SteppedVector, combine, coord, sup_norm, summing_vector
from .tree import TreeNode, ancestor_set, dp_dist, enumerate_nodes, gca_info, preorder_index, rho

__version__ = "0.1.0"

"""Classical laboratory for a BV-based quantum related-key attack on toy block ciphers."""

from .attack import (AttackConfig, AttackReport, StructResult, check_condition1, check_condition2,
                     find_struct, recover_key, recover_key_gvariant, theorem2_bound, theorem3_bound,
                     verify_candidates)
from .boolfn import (BooleanFunction, VectorFunction, delta_F, delta_f, exact_linear_structures,
                     sigma_close_structures, support, vector_linear_structures, walsh_spectrum)
from .cipher import derived_f, derived_g, random_cipher, toy_em, toy_spn
from .costmodel import CostLedger, attack_cost_estimate, bv_run_cost
from .gf2 import AffineSolutionSet, BitVec, dot, enumerate_solutions, intersect_tagged, solve_affine_system
from .qoracle import RelatedKeyOracle, RngStream, bv_exact_distribution, bv_sample

__version__ = "0.1.0"

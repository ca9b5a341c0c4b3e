"""Certified q-WZ pairs and telescoping certificates for basic hypergeometric identities."""

from .catalog import IdentityEntry, get, list_ids, specialize, verify_numeric
from .engine import (ProofObject, Status, SubstitutionRecipe, WZPair, build_F, check_conditions,
                     companion, determine_constant, iterate_AnBn, telescope_certify, wz_discover)
from .exactnum import MultiPoly, RatFunc
from .gosper import antidifference, gosper_normal_form, qgosper_solve
from .grammar import parse_ratfunc, parse_term, pretty_term, print_term
from .numeric import TruncationPolicy, eval_poch, eval_term, sum_series
from .terms import QHyperTerm, quotient, shift_ratio_k, shift_ratio_n

__version__ = "0.1.0"

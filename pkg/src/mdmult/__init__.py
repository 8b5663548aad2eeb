"""Certified multiplier-norm bounds on finite and truncated groups.

The package computes two-sided certified bounds for d-factorable multiplier
norms (Herz-Schur at d = 2, operator factorizations for higher d), builds the
classical explicit multiplier families (Fejer terms on the integers, radial
tree multipliers on free-group balls, heat kernels with certified tails,
coefficient witnesses on finite groups), and implements measured-coupling
induction maps that transport functions and witnesses between groups without
norm growth.
"""

from .groups import (Carrier, FiniteGroup, FreeBall, GroupFunction,
                     IntegerWindow, alternating_group, build_group, constant,
                     cyclic_group, delta, dihedral_group, free_ball,
                     random_function, random_pd_function, subgroup,
                     subgroup_elements, symmetric_group)
from .numerics import (SolveOptions, dft_l1_norm, is_psd, operator_norm,
                       schur_norm, schur_norm_oracle, trace_min)
from .norms import (FactorizationWitness, NormReport, a_norm, b_norm,
                    is_pd_function, m2_norm, md_sandwich, pairing,
                    search_factorization, verify_factorization)
from .constructions import (FejerTerm, HaagerupFamily, NetReport, TreeFamily,
                            ball_net_report, coefficient_witness, fejer,
                            fejer_net_report, haagerup_family, haagerup_tail,
                            radial_multipliers, singleton_net_report,
                            tree_net_report, tree_witness)
from .coupling import (CouplingSpace, TracedSpace, fixed_algebra, induce,
                       induce_dual, induce_witness, koopman_check,
                       lattice_coupling, lattice_induce, me_coupling,
                       subgroup_coupling, theta)

__version__ = "0.1.0"

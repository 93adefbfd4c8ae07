"""Homomorphism preservation on finite structures, at desk scale.

Relational structures and homomorphisms, cores, graph parameters
(tree-width, tree-depth, longest path, minors), first-order logic with
model tables, circuits and monotone projections, and colored subgraph
isomorphism with the reductions that tie these together.
"""

from .errors import BoundExceeded, PreservationFailure, SignatureMismatch
from .structures import (Signature, Structure, VertexMap, BitEncoding, parse_structure,
                         from_graph, binary_structure, encode, decode, find_homomorphism,
                         homomorphic, hom_equivalent, isomorphic, gaifman)
from .cores import (GeneratedClass, compute_core, core, find_retraction, is_core, min_cores,
                    is_hom_preserved, min_cores_of_sentence)
from .graphparams import (Graph, parse_graph, tree_width, tree_depth, longest_path,
                          minor_contains, trichotomy_check)
from .folog import (parse_formula, parse_sentence, render, evaluate, model_table,
                    quantifier_rank, variable_width, classify, to_pp_disjunction,
                    ep_sentence_of_class)
from .circuits import (Circuit, MonotoneProjection, compile_fo, eval_circuit, measure,
                       apply_projection, compose_projections, verify_reduction,
                       restrict_circuit, circuit_to_formula)
from .subiso import (BlowUp, SubInstance, sub_bruteforce, sub_dp_treewidth,
                     sub_formula_treedepth, minor_reduction, minor_reduction_chain,
                     path_reduction, hpt_reduction, verify_hpt_reduction, hpt_pipeline)

__version__ = "0.1.0"

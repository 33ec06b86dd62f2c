"""Tree ciphering isomorphism, lossless DAG compression and subtree pattern mining."""
from .analytics import a_n, a_pq, delta_f, f_variadic, state_bound
from .dag import Dag, compress, dag_stats, decompress
from .dagrw import Cipher, DagRw, compress_rw, decompress_rw, rw_stats
from .estimators import CipheringClassifier, SubtreePatternMiner, TreeCompressor
from .miner import PatternReport, mine, pattern_counts, table_summary
from .solver import (
    IsoResult,
    SearchState,
    SearchTrace,
    Verdict,
    deduction_phase,
    is_ciphering_isomorphic,
    verify_ciphering,
)
from .synthgen import GenSpec, gen_iso_pair, gen_noniso_pair, gen_tree
from .tree import (
    LabeledTree,
    SignatureRegistry,
    canonical_classes,
    compute_stats,
    parse_tree,
    read_dataset,
    serialize_tree,
)
from .validation import check_dataset, check_tree

__version__ = "0.1.0"

__all__ = [
    "Cipher",
    "CipheringClassifier",
    "Dag",
    "DagRw",
    "GenSpec",
    "IsoResult",
    "LabeledTree",
    "PatternReport",
    "SearchState",
    "SearchTrace",
    "SignatureRegistry",
    "SubtreePatternMiner",
    "TreeCompressor",
    "Verdict",
    "a_n",
    "a_pq",
    "canonical_classes",
    "check_dataset",
    "check_tree",
    "compress",
    "compress_rw",
    "compute_stats",
    "dag_stats",
    "decompress",
    "decompress_rw",
    "deduction_phase",
    "delta_f",
    "f_variadic",
    "gen_iso_pair",
    "gen_noniso_pair",
    "gen_tree",
    "is_ciphering_isomorphic",
    "mine",
    "parse_tree",
    "pattern_counts",
    "read_dataset",
    "rw_stats",
    "serialize_tree",
    "state_bound",
    "table_summary",
    "verify_ciphering",
]

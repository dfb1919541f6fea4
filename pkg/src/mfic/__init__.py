"""Table constraint compression with maximal frequent itemsets, and a MAC
solver with STR2 / STR-MFIC propagators."""

from .compression import (
    CompressedTable,
    CompressionConfig,
    CompressionStats,
    Entry,
    compress_table,
    compression_stats,
    decompress,
)
from .mining import MinedPattern, mine_closed, mine_maximal, to_transactions, topk_closed
from .model import Instance, TableConstraint, canonicalize, is_solution, satisfies
from .search import SolveConfig, SolveResult, solve

__all__ = [
    "CompressedTable",
    "CompressionConfig",
    "CompressionStats",
    "Entry",
    "Instance",
    "MinedPattern",
    "SolveConfig",
    "SolveResult",
    "TableConstraint",
    "canonicalize",
    "compress_table",
    "compression_stats",
    "decompress",
    "is_solution",
    "mine_closed",
    "mine_maximal",
    "satisfies",
    "solve",
    "to_transactions",
    "topk_closed",
]

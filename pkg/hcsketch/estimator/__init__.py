"""
Estimator模块 - 模式预处理、哈希、单副本sketch与估计器组
"""

from .bank import (
    CopyPlan,
    EstimatorBank,
    bank_estimate,
    bank_merge,
    bank_query_values,
    bank_update,
    bank_update_many,
    deserialize_bank,
    empirical_variance,
    recommend_copies,
    serialize_bank,
)
from .config import Limits, load_limits
from .hashing import KWiseHash, RandomBasis, derive_basis, eval_hash, x_exponent, y_value
from .pattern import (
    Hypergraph,
    PatternProfile,
    build_pattern_profile,
    count_automorphisms,
    exact_count,
    exact_count_stream,
)
from .sketch import Sketch, StreamEdge, deserialize, merge, query, raw_product, serialize, term_exponent, update

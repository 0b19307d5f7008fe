from ._montecarlo import CLIP_TOLERANCE
from ._montecarlo import DIMENSION_CAP
from ._montecarlo import BandMatrix
from ._montecarlo import LagField
from ._montecarlo import McConfig
from ._montecarlo import McEstimate
from ._montecarlo import MomentEstimate
from ._montecarlo import assemble_band_matrix
from ._montecarlo import autocovariance
from ._montecarlo import embedding_length
from ._montecarlo import estimate
from ._montecarlo import field_sequences
from ._montecarlo import generate_lag_field
from ._montecarlo import per_antenna_mutual_info
from ._montecarlo import pseudo_covariance

__all__ = [
    "CLIP_TOLERANCE",
    "DIMENSION_CAP",
    "BandMatrix",
    "LagField",
    "McConfig",
    "McEstimate",
    "MomentEstimate",
    "assemble_band_matrix",
    "autocovariance",
    "embedding_length",
    "estimate",
    "field_sequences",
    "generate_lag_field",
    "per_antenna_mutual_info",
    "pseudo_covariance",
]

"""Secrecy metrics of TAS/MRC mixed RF / underwater-optical dual-hop links."""
from ._kernels import BACKEND
from .analytic import (
    Method,
    MetricResult,
    asc_b_term,
    asc_direct,
    asc_series_1,
    asc_series_2,
    asc_term,
    sop_exact_mc_reference,
    sop_lower,
    sop_term,
    spsc,
)
from .errors import (
    CancellationWarning,
    DegenerateEta,
    DomainError,
    MissingEngine,
    NonConvergent,
    ParseError,
    PoleError,
    SecrecyError,
    SeriesDiverged,
    ValidationError,
)
from .linkstats import (
    DualHop,
    EtaMuMrc,
    Megg,
    TasExpansion,
    TasSnr,
    dualhop_cdf,
    dualhop_cdf_expanded,
    eav_cdf,
    eav_cdf_series,
    eav_pdf,
    etamu_mrc_cdf,
    etamu_mrc_pdf,
    etamu_mrc_pdf_bessel,
    megg_cdf,
    megg_pdf,
    tas_cdf,
    tas_cdf_expanded,
)
from .montecarlo import (
    McEstimate,
    RngStream,
    estimate_metric,
    estimate_metrics,
    sample_end_to_end,
    sample_etamu_mrc,
    sample_megg,
    sample_tas_snr,
)
from .params import (
    Detection,
    EtaMuFormat,
    MeggParams,
    RfLinkParams,
    SystemConfig,
    db_to_linear,
    derive_h_H,
    electrical_snr,
    linear_to_db,
    megg_kernel_constants,
)

__version__ = "0.1.0"

"""Trading energy levels for asset returns.

Core numerics live in :mod:`amplitude`, :mod:`spectral`,
:mod:`oscillator`, :mod:`modality`, and :mod:`pipeline`.  The HTTP
surface is :mod:`tradelevels.service` (FastAPI app) and the command line
client is :mod:`tradelevels.cli`.
"""

__version__ = "0.1.0"

from .amplitude import (
    Amplitude,
    AmplitudeGrid,
    components,
    interference_density,
    superpose,
)
from .errors import (
    CsvParseError,
    DomainError,
    GridMismatchError,
    LevelBreakdownError,
    ResolutionError,
    TradeLevelsError,
    TruncationWarning,
)
from .modality import ModalityVerdict, Sample, dip_statistic, modality_pvalue
from .oscillator import (
    DensityGrid,
    EigenState,
    EnergyLevel,
    ModelParams,
    SdgParams,
    anharmonic_level,
    anharmonic_levels,
    count_modes,
    density_from_state,
    harmonic_density,
    harmonic_level,
    hermite,
    mixture_density,
    numeric_spectrum,
)
from .pipeline import (
    DailyBar,
    DetectionConfig,
    DetectionResult,
    ReturnRecord,
    TraceStep,
    compute_returns,
    detect_ground_level,
    eligible,
    load_bars,
    sample_returns,
    synthesize_market,
)
from .spectral import (
    GridSpec,
    SpectrumGrid,
    VolumeReport,
    decompose,
    intrinsic_volume,
    potential_volume,
    realized_volume,
    reconstruct,
)

__all__ = [name for name in dir() if not name.startswith("_")]

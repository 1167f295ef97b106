"""Dual-microphone adaptive noise suppression and respiration-rate estimation.

An outer-ear microphone serves as the noise reference for an adaptive filter
that cleans the in-ear signal; spectral breathing features and a harmonic
spectrum turn the cleaned stream into per-window respiration rates, fused
binaurally with discrepancy-based outlier rejection.
"""

from .adaptive import (AnsStage, LmsConfig, LmsState, ans_process, clip_factor,
                       lms_run, lms_step)
from .blocks import BeltSignal, SampleBlock
from .config import PipelineConfig, load_config, save_config
from .errors import (AlignmentError, DegenerateWindowError, DivergenceError,
                     FormatError, FusionUnavailableError, InsufficientDataError,
                     ParameterError, PipelineError, UndefinedMetricError)
from .filters import BiquadCascade, decimate, design_bandpass, design_highpass, design_lowpass
from .fusion import WindowRecord, discrepancy, fuse, reject_outliers, retained_fraction
from .groundtruth import GtReading, belt_readings, gt_rr, segment_windows, validity_filter
from .metrics import (EvalReport, MadInterval, bland_altman, build_report,
                      error_metrics, g_ratio_from_variances,
                      generalizability_ratio, mad_interval, noise_reduction_db,
                      ri_index, threshold_sweep)
from .pipeline import (DenoiseResult, attach_ground_truth, denoise,
                       estimate_channel, run_binaural, to_rate)
from .spectral import (FeatureSeries, RrEstimate, Spectrogram,
                       average_breath_spectrum, breathing_feature,
                       combine_features, estimate_rr, log_spectral_energy,
                       prepare_feature, quantile_mask, spectral_dissimilarity,
                       stft)
from .synth import (ScenarioData, SynthScenario, gen_binaural_scenario,
                    gen_breathing, gen_scenario, random_path)

__version__ = "0.1.0"

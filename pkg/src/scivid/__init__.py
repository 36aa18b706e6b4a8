"""Snapshot compressive video toolkit.

Simulates aperture-multiplexed shifting-mask video encoding (one coded 2-D
snapshot per B frames) and reconstructs the video with GAP-based
plug-and-play solvers: built-in TV prior plus an out-of-process denoiser
plugin slot.
"""

from .bench import compare_masks_noise_sweep, run_experiment
from .config import ExperimentConfig, parse_flat_config
from .denoise import DenoiserChain, TvStage, chain_denoise, tv_denoise
from .errors import (CalibrationDegenerateError, OperatorTooLargeError,
                     PluginError, PluginTimeoutError, PluginTransportError,
                     ProtocolViolationError, ShiftOutOfBoundsError,
                     SolverAbortedError)
from .estimators import GapReconstructor, SnapshotEncoder
from .forward import (CalibrationSet, Measurement, NoiseModel, VideoCube,
                      adjoint_op, calibrate, dense_operator, encode,
                      forward_op, hht_diag, preprocess_measurement)
from .metrics import MetricReport, evaluate, psnr, ssim
from .optics import (AperturePattern, MaskStack, MasterMask, OpticsGeometry,
                     compose_mask, gen_mask_stack, gen_pattern,
                     geometric_shift, make_master_mask, shift_window)
from .plugin import PluginClient, PluginEndpoint, plugin_denoise
from .scenes import load_scene
from .solver import (ReconResult, SolverOptions, gap_x_update, run_gap,
                     sigma_schedule)
from .vsct import load_tensor, save_tensor

__version__ = "0.1.0"

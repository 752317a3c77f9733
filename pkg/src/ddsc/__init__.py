"""Dynamic dual-signal curriculum: per-example reweighting from prototype
entropy and smoothed loss change."""

from .engine import (CurriculumState, DDSCPolicy, EpochReport, Trainer, TrainingSet, new_state,
                     run_epoch, run_training)
from .invariance import (PrototypeBank, device_posterior, normalized_entropy, score_embeddings,
                         smooth_invariance, update_prototypes)
from .kernels import BACKEND
from .progress import SampleLedger, finalize_epoch_losses, normalize_progress, record_loss, record_losses
from .schedule import (ScheduleConfig, batch_weighted_loss, fuse_scores, lambda_at, scores_to_weights,
                       weight_entropy)

__version__ = "0.1.0"

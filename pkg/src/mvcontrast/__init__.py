"""Multi-view linear feature extraction with dual contrastive losses."""

from .data import (MultiViewDataset, PaddedViewMatrix, SplitSpec, load_views,
                   save_views, split, stack_padded, standardize, synth_blobs)
from .diagnostics import (column_sum_residual, cross_view_alignment,
                          laplacian_equivalence_gap, scatter_matrix)
from .errors import ConfigError, DataError, MvError, NumericError
from .evaluation import (ResultsTable, evaluate_split, fuse, knn_accuracy,
                         project, run_experiment)
from .gradients import (GradCheckReport, check_gradients, fd_gradient, grad_P,
                        grad_w)
from .losses import (CoefficientSet, ProjectionStack, cosine_sim,
                     reconstruction_penalty, sample_infonce,
                     structural_contrastive, total_loss)
from .params import Hyperparams
from .trainer import (AdamState, Model, TrainState, adam_step, fit,
                      init_state, load_model, save_model, sweep_W)

__version__ = "0.1.0"

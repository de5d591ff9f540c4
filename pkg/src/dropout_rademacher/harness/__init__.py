from .config import GapConfig, SweepConfig, load_config, read_config, spec_from_text, spec_to_text
from .sweep import SweepRow, fit_loglog_slope, gap_experiment, run_sweep, slopes_by_group
from .training import TrainConfig, bound_check, dropout_risk, train_with_dropout

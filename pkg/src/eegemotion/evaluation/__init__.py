from .experiment import RunReport, TrialResult, run_experiment, run_features, trial_seed
from .folds import FoldPlan, make_folds
from .metrics import AVERAGINGS, ConfusionMatrix, confusion, f1
from .report import (Comparison, ReportFormatError, compare, read_report, report_dict,
                     scores_csv, write_report)
from .stats import ScoreSet, TTestResult, betainc, t_cdf, t_sf2, welch_t

__all__ = [
    "AVERAGINGS", "Comparison", "ConfusionMatrix", "FoldPlan", "ReportFormatError", "RunReport",
    "ScoreSet", "TTestResult", "TrialResult", "betainc", "compare", "confusion", "f1",
    "make_folds", "read_report", "report_dict", "run_experiment", "run_features",
    "scores_csv", "t_cdf", "t_sf2", "trial_seed", "welch_t", "write_report",
]

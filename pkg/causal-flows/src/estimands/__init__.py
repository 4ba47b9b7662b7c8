from src.estimands.bootstrap import bootstrap, percentile_interval
from src.estimands.decompose import decompose_check
from src.estimands.estimator import estimate, estimate_many
from src.estimands.planner import contrast_labels, plan_for
from src.estimands.sensitivity import correlation_matrix, sensitivity_sweep

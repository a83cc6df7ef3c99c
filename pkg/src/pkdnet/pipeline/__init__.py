from .charts import correlation_svg, emit_correlation_chart
from .metrics import Metrics, evaluate
from .persist import dumps_model, load_bundle, load_model, predict_proba, save_model
from .run import RunConfig, fingerprint, run_pipeline

__all__ = [
    "Metrics", "RunConfig", "correlation_svg", "dumps_model", "emit_correlation_chart",
    "evaluate", "fingerprint", "load_bundle", "load_model", "predict_proba", "run_pipeline",
    "save_model",
]

from .metrics import METRICS_HEADER, CsvMetricsSink, MetricsRecord, read_metrics
from .run_directory import RunDirectory

__all__ = ["METRICS_HEADER", "CsvMetricsSink", "MetricsRecord", "RunDirectory", "read_metrics"]

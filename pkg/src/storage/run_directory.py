"""
Run directory layout: ``<out>/<experiment>-<param>-seed<seed>/``.

Holds the effective config (``config.txt``), telemetry (``metrics.csv``), the loss curve
(``loss.svg``) and, for two-dimensional inputs, a decision map (``decision_map.ppm``).
"""

import logging
from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import CsvMetricsSink, MetricsRecord  # noqa: E402

logger = logging.getLogger(__name__)

CLASS_COLOURS = ((220, 30, 30), (30, 60, 220))


class RunDirectory:
    """Files belonging to a single training run."""

    def __init__(self, out_dir: Path, run_name: str) -> None:
        self.path = Path(out_dir) / run_name
        self.path.mkdir(parents=True, exist_ok=True)

    @property
    def config_path(self) -> Path:
        return self.path / "config.txt"

    @property
    def metrics_path(self) -> Path:
        return self.path / "metrics.csv"

    @property
    def plot_path(self) -> Path:
        return self.path / "loss.svg"

    @property
    def decision_map_path(self) -> Path:
        return self.path / "decision_map.ppm"

    def write_config(self, text: str) -> None:
        """
        Save the serialized run config verbatim.

        Raises:
            OSError: If the file cannot be written
        """
        try:
            self.config_path.write_text(text, encoding="utf-8")
        except OSError:
            logger.exception("Failed to save config to %s", self.config_path)
            raise

    def metrics_sink(self) -> CsvMetricsSink:
        return CsvMetricsSink(self.metrics_path)

    def save_loss_plot(self, records: Sequence[MetricsRecord], title: str = "") -> None:
        """Training loss and accuracies against iteration as an SVG line chart."""
        fig, (ax_loss, ax_acc) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
        iterations = [r.iteration for r in records]
        ax_loss.plot(iterations, [r.loss for r in records], color="black", linewidth=1)
        ax_loss.set_ylabel("loss")
        if records and min(r.loss for r in records) > 0:
            ax_loss.set_yscale("log")
        ax_acc.plot(iterations, [r.train_acc for r in records], label="train", linewidth=1)
        ax_acc.plot(iterations, [r.test_acc for r in records], label="test", linewidth=1)
        ax_acc.set_ylim(0.0, 1.02)
        ax_acc.set_xlabel("iteration")
        ax_acc.set_ylabel("accuracy")
        ax_acc.legend(loc="lower right")
        if title:
            ax_loss.set_title(title)
        fig.tight_layout()
        try:
            fig.savefig(self.plot_path, format="svg")
        finally:
            plt.close(fig)

    def save_decision_map(
        self,
        grey: np.ndarray,
        points: np.ndarray,
        classes: np.ndarray,
        extent: float,
        marker: int = 1,
    ) -> None:
        """
        Write a binary PPM: grey background with class-coloured points on top.

        Args:
            grey: (rows, cols) values in [0, 1]; row 0 is the top of the image (largest y)
            points: 2 x n coordinates in [-extent, extent]
            classes: n class indices, 0 or 1
            extent: half-width of the square the image covers
            marker: half-size in pixels of the square drawn for each point
        """
        rows, cols = grey.shape
        level = np.clip(np.rint(255.0 * grey), 0, 255).astype(np.uint8)
        image = np.repeat(level[:, :, None], 3, axis=2)
        px = np.rint((points[0] + extent) / (2 * extent) * (cols - 1)).astype(np.int64)
        py = np.rint((extent - points[1]) / (2 * extent) * (rows - 1)).astype(np.int64)
        for x, y, c in zip(px, py, np.asarray(classes, dtype=np.int64), strict=True):
            image[
                max(y - marker, 0) : min(y + marker + 1, rows),
                max(x - marker, 0) : min(x + marker + 1, cols),
            ] = CLASS_COLOURS[c]
        header = f"P6\n{cols} {rows}\n255\n".encode("ascii")
        try:
            self.decision_map_path.write_bytes(header + image.tobytes())
        except OSError:
            logger.exception("Failed to save decision map to %s", self.decision_map_path)
            raise

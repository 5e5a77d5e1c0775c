"""Conditioning of raw experimental series before identification.

Two steps: a median filter against impulsive sensor noise, and DC removal
so the estimator sees deviation-scale data.  DC comes off either as the
series mean or as a declared reference level (the operating point).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import median_filter as _nd_median

from .model import Dataset


@dataclass(frozen=True)
class PreprocessConfig:
    """median_window must be odd; inputs are filtered only when asked."""

    median_window: int = 5
    filter_inputs: bool = False

    def __post_init__(self):
        if self.median_window < 1 or self.median_window % 2 == 0:
            raise ValueError(
                f"median_window must be odd and >= 1, got {self.median_window}"
            )


def median_filter(x, window: int) -> np.ndarray:
    """Sliding median with boundary samples replicated at the edges."""
    x = np.asarray(x, dtype=float)
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 1, got {window}")
    if window > x.size:
        raise ValueError(f"window {window} exceeds series length {x.size}")
    if window == 1:
        return x.copy()
    return _nd_median(x, size=window, mode="nearest")


def remove_dc(x, reference: float | None = None) -> tuple[np.ndarray, float]:
    """Subtract the DC component; returns (deviation series, offset removed).

    With ``reference`` None the series mean is removed, otherwise the given
    reference level (e.g. the operating point).  Adding the offset back
    reconstructs the input exactly.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("series is empty")
    offset = float(np.mean(x)) if reference is None else float(reference)
    return x - offset, offset


def prepare_dataset(data: Dataset, config: PreprocessConfig = PreprocessConfig()) -> tuple[Dataset, dict]:
    """Filter and de-trend a dataset for identification.

    Outputs are median filtered (inputs too if configured), then every
    signal is shifted to deviation scale: signals with a declared operating
    point lose that reference, the rest lose their mean.  Returns the
    deviation-scale dataset and the offsets that were removed.
    """
    offsets: dict[str, float] = {}

    def strip(series, name):
        out, offset = remove_dc(series, data.operating_point.get(name))
        offsets[name] = offset
        return out

    inputs = data.inputs.copy()
    outputs = data.outputs.copy()
    for j in range(data.n_outputs):
        outputs[:, j] = median_filter(outputs[:, j], config.median_window)
    if config.filter_inputs:
        for j in range(data.n_inputs):
            inputs[:, j] = median_filter(inputs[:, j], config.median_window)
    for j, name in enumerate(data.input_names):
        inputs[:, j] = strip(inputs[:, j], name)
    for j, name in enumerate(data.output_names):
        outputs[:, j] = strip(outputs[:, j], name)

    deviations = Dataset(
        sample_period=data.sample_period,
        inputs=inputs,
        outputs=outputs,
        input_names=data.input_names,
        output_names=data.output_names,
        units=dict(data.units),
        operating_point={},
    )
    return deviations, offsets

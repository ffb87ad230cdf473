"""Scattering-path features, mRMR selection and ridge classification for multivariate time series."""

from ._core import (
    DataError,
    Dataset,
    Error,
    Model,
    ProtocolError,
    UsageError,
    dilated_xcorr,
    dilations,
    estimate_macs,
    kernel_bank,
    load_dataset,
    make_sinusoid_dataset,
    save_dataset,
    scatter_path,
    train,
    transform_full,
)

__all__ = [
    "DataError",
    "Dataset",
    "Error",
    "Model",
    "ProtocolError",
    "UsageError",
    "dilated_xcorr",
    "dilations",
    "estimate_macs",
    "kernel_bank",
    "load_dataset",
    "make_sinusoid_dataset",
    "save_dataset",
    "scatter_path",
    "train",
    "transform_full",
]

"""Time series to image toolkit."""

from ._core import (
    Error,
    __version__,
    accuracy,
    align_image,
    detect_period,
    gaf,
    gaf_diag_inverse,
    gen_ar1,
    gen_periodic,
    imaging_methods,
    mae,
    mse,
    performance_drop,
    perturb,
    render,
    reoccurrence_n,
    resize,
    run_cli,
    standardize_image,
    uvh,
    uvh_inverse,
)

__all__ = [
    "Error",
    "__version__",
    "accuracy",
    "align_image",
    "detect_period",
    "gaf",
    "gaf_diag_inverse",
    "gen_ar1",
    "gen_periodic",
    "imaging_methods",
    "mae",
    "mse",
    "performance_drop",
    "perturb",
    "render",
    "reoccurrence_n",
    "resize",
    "run_cli",
    "standardize_image",
    "uvh",
    "uvh_inverse",
]

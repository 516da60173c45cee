"""Filter-bank sparsifying transforms: learning, analysis and denoising."""

from ._fbst import (
    Error,
    FilterBankTransform,
    InfeasibleError,
    ModelFormatError,
    ShapeError,
    SingularOperatorError,
    add_gaussian_noise,
    dct_basis,
    denoise,
    gram_eigenvalues,
    hard_threshold,
    init_transform,
    learn,
    linear_pr_threshold,
    load_model,
    load_pgm,
    psnr,
    save_model,
    save_pgm,
    spectrum_report,
)

__all__ = [
    "Error",
    "FilterBankTransform",
    "InfeasibleError",
    "ModelFormatError",
    "ShapeError",
    "SingularOperatorError",
    "add_gaussian_noise",
    "dct_basis",
    "denoise",
    "gram_eigenvalues",
    "hard_threshold",
    "init_transform",
    "learn",
    "linear_pr_threshold",
    "load_model",
    "load_pgm",
    "psnr",
    "save_model",
    "save_pgm",
    "spectrum_report",
]

"""Double-phase ROF denoising."""

from ._dprof import (
    ImageIoError,
    MetricError,
    add_noise,
    build_weight,
    d_l2,
    d_tv,
    denoise,
    divergence,
    evaluate,
    gradient,
    load_image,
    psnr,
    save_image,
    ssim,
    sweep,
    synthetic,
    total_variation,
    weight_function,
)

__all__ = [
    "ImageIoError",
    "MetricError",
    "add_noise",
    "build_weight",
    "d_l2",
    "d_tv",
    "denoise",
    "divergence",
    "evaluate",
    "gradient",
    "load_image",
    "psnr",
    "save_image",
    "ssim",
    "sweep",
    "synthetic",
    "total_variation",
    "weight_function",
]

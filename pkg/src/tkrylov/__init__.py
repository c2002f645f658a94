"""T-product tensor Krylov solvers for ill-posed tensor equations.

The main entry points are :func:`gmres_restarted` (T-global GMRES with a
Tikhonov parameter chosen by generalized cross validation) and
:func:`ggkb_tikhonov` (T-global Golub-Kahan with the discrepancy principle),
both acting on a :class:`TensorLinearOperator` ``X -> A ⋆ X`` or
``X -> A ⋆ X ⋆ B``.
"""

from .operators import (
    BlurModel,
    TensorLinearOperator,
    build_cross_channel_blur,
    build_within_channel_video_blur,
    gaussian_band_matrix,
)
from .solvers import (
    GgkbConfig,
    GmresConfig,
    NumericalError,
    SolveReport,
    ggkb_tikhonov,
    gmres_restarted,
)
from .tensor_core import load_t3, save_t3, t_transpose
from .tproduct_fft import t_product

__version__ = "0.1.0"

__all__ = [
    "BlurModel",
    "TensorLinearOperator",
    "build_cross_channel_blur",
    "build_within_channel_video_blur",
    "gaussian_band_matrix",
    "GgkbConfig",
    "GmresConfig",
    "NumericalError",
    "SolveReport",
    "ggkb_tikhonov",
    "gmres_restarted",
    "load_t3",
    "save_t3",
    "t_transpose",
    "t_product",
]

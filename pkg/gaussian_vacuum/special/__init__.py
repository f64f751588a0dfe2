from .bessel import bessel_k0, bessel_k0e, bessel_k1, bessel_k1e
from .lambert import (
    BRANCH_POINT,
    BranchId,
    lambert_w,
    lambert_w0_exp,
    lambert_wm1_negexp,
)

__all__ = [
    "BRANCH_POINT",
    "BranchId",
    "bessel_k0",
    "bessel_k0e",
    "bessel_k1",
    "bessel_k1e",
    "lambert_w",
    "lambert_w0_exp",
    "lambert_wm1_negexp",
]

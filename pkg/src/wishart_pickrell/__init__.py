"""Wishart-Pickrell measures on Hermitian matrices and the polymorphisms
indexed by contractions."""

from ._backend import BACKEND
from .linalg import (
    BlockUnitary,
    DimensionError,
    as_hermitian,
    build_Um,
    determinant,
    is_hermitian,
    operator_norm,
    psd_sqrt,
    unitary_dilation,
)
from .measure import (
    PickrellParams,
    SampleConfig,
    ergodic_cf,
    ergodic_cf_summable,
    mc_cf,
    sample_truncated,
)
from .polymorphism import (
    Contraction,
    VerificationReport,
    compose_check,
    corner_approx,
    coupled_sample,
    gram_matrix,
    joint_cf_contraction,
    joint_cf_unitary,
    mc_joint_cf,
    mc_nu_s_cf,
    nu_s_cf,
    nu_s_pair_sample,
    verify_eventual_constancy,
)

__version__ = "0.1.0"

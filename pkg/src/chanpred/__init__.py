"""Channel prediction lab: SOS Rayleigh fading, Wiener and recurrent predictors."""

from chanpred.numerics import (
    DomainError,
    HermitianToeplitz,
    SingularMatrixError,
    bessel_j0,
    mean_power,
    solve_hermitian_toeplitz,
)
from chanpred.channel import (
    ChannelTrace,
    LsTrace,
    SosParameters,
    corrupt_to_ls,
    draw_sos_parameters,
    generate_trace,
    jakes_acf,
    jakes_spectrum,
)
from chanpred.wiener import AcfEstimate, WienerPredictor, design, empirical_mse, predict, sample_acf

__version__ = "0.1.0"

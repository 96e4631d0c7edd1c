"""Numerical settings shared across modules.

All tolerances are relative unless a quantity's natural scale is zero, in
which case the docstring of the consuming routine states the absolute scale.
"""

from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class Settings:
    # adaptive Gauss-Legendre
    quad_tol: float = 1e-11
    quad_max_depth: int = 26

    # theta lattice sum
    theta_rmax: int = 40
    theta_tail_rel: float = 1e-13

    # numerical rank threshold: singular values below rank_rtol * sigma_max
    # count as zero
    rank_rtol: float = 1e-9

    # |Den| below den_zero_rtol * (term scale) raises DenZero
    den_zero_rtol: float = 1e-12

    # jet division guard on |constant term|
    jet_div_eps: float = 1e-300

    # condition-number caps
    periods_cond_max: float = 1e8
    basis_cond_max: float = 1e8

    # geometric guards, as fractions of the configuration scale
    branch_clearance: float = 1e-6
    probe_margin: float = 0.05

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT = Settings()

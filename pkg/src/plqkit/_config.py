"""Tolerances and size guards.

All tolerances are scale-relative where the operation has a natural scale;
the constants here are the dimensionless factors.  Guards bound the exact
combinatorial algorithms and can be overridden per call or via CLI flags.
"""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Config:
    # base membership / agreement tolerance factor
    base_tol: float = 1e-9
    # eigh: allowed relative asymmetry, reconstruction residual factor
    sym_tol: float = 1e-12
    eigh_resid_tol: float = 1e-9
    # copositivity dead-band factor: min >= -cop_tol*scale counts copositive,
    # strict requires min >= +cop_tol*scale
    cop_tol: float = 1e-8
    # KKT residual factor
    kkt_tol: float = 1e-8
    # continuity / C1 coefficient test factor
    continuity_tol: float = 1e-9
    # cross-block annihilation tolerance (absolute, scaled by |Q|)
    annihilation_tol: float = 1e-8
    # point dedup (absolute), value dedup (relative)
    dedup_point_tol: float = 1e-7
    dedup_value_tol: float = 1e-8
    # null-eigenvalue threshold factor for the Schur reduction
    null_eig_tol: float = 1e-9

    # guards
    max_eigh_dim: int = 64
    max_face_rows: int = 25
    max_cone_rows: int = 18
    max_polytope_rows: int = 20
    max_maxmin_terms: int = 20
    max_rep_pieces: int = 8
    max_rep_rows: int = 8
    max_enum_rows: int = 20
    max_composite_dim: int = 6
    max_composite_pieces: int = 4

    def override(self, **kwargs) -> "Config":
        return replace(self, **kwargs)


DEFAULT = Config()

"""Discrete 2-modulus of conjugate curve families on meshed metric surfaces."""

from ._recipmod import (
    KAPPA,
    Certificate,
    CoareaReport,
    CurvePath,
    FamilySpec,
    InvalidInput,
    LevelCurve,
    MaxPrincipleReport,
    MetricMesh,
    ModulusOptions,
    ModulusResult,
    PotentialField,
    QuadFrame,
    Surface,
    ball,
    build_collapsed_disk,
    build_conformal,
    build_potential,
    build_rectangle,
    certify,
    coarea_check,
    double_traversal,
    extract_path,
    gamma1,
    gamma2,
    level_set,
    make_surface,
    max_principle_check,
    reciprocality_report,
    ring_modulus,
    run_experiment,
    solve_modulus,
    upper_gradient_violations,
)


def modulus(surface, family=1, **options):
    """Mod Gamma_1 (family=1) or Mod Gamma_2 (family=2) of a surface's frame."""
    opts = ModulusOptions()
    for key, value in options.items():
        setattr(opts, key, value)
    fam = gamma1(surface.frame) if family == 1 else gamma2(surface.frame)
    return solve_modulus(surface.mesh, fam, opts)


__all__ = [name for name in dir() if not name.startswith("_")]

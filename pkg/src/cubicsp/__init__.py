"""cubicsp: cubic parameter curves S_p, Misiurewicz maps, and similarity zooms.

The package is organised as a numpy library:

- ``dynamics``: the cubic family, orbits, escape tests, Green potential,
  Newton solvers and continuation;
- ``curve``: the curve equation eta, local charts, Misiurewicz certificates,
  locus membership, transversality (B0 and winding checks);
- ``similarity``: the Poincare linearizer, magnification scales rho_k, the
  rescaled families, rasterizers, and the two Hausdorff experiments;
- ``grids``: bitmap sets, the circular window operator, exact Hausdorff
  distance, PGM I/O;
- ``rays``: Boettcher coordinates, external dynamic rays, parameter angles,
  and landing checks;
- ``cli``: script front end (``cubicsp <command>``).
"""

from . import errors
from .curve import (
    CurvePoint,
    LocalChart,
    MisiurewiczCertificate,
    build_chart,
    certificate_from_json,
    certificate_to_json,
    chart_grid,
    chart_point,
    compute_B0,
    curve_point,
    eta,
    eta_gradient,
    find_misiurewicz,
    locus_mask,
    locus_membership,
    s2_delta_chart,
    transversality_winding,
    winding_number,
)
from .dynamics import (
    CubicMap,
    OrbitRecord,
    PeriodicPoint,
    bounded_mask,
    continue_periodic_point,
    cycle_eval,
    green_potential,
    in_filled_julia,
    iterate,
    newton_periodic_point,
    orbit_param_jet,
)
from .grids import (
    GridSet,
    convergence_report,
    from_predicate,
    hausdorff_distance,
    pgm_bytes,
    read_pgm,
    truncate_window,
    write_pgm,
)
from .rays import (
    LandingReport,
    RayTrace,
    bottcher_coordinate,
    cocritical_parameter_angle,
    landing_check,
    scan_cocritical_angles,
    trace_dynamic_ray,
)
from .similarity import (
    PoincareEvaluator,
    SimilarityReport,
    dynamical_rescaling,
    magnification_scale,
    parameter_rescaling,
    poincare_eval,
    rasterize,
    run_similarity,
    verify_main_theorem,
)

__version__ = "0.1.0"

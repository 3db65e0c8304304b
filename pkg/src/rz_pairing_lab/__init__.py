"""rz-pairing-lab: R/Z-valued analytic duality pairings on model manifolds."""

from .circlevals import (
    DEFAULT_TOL,
    CircleValue,
    circle_add,
    circle_dist,
    circle_eq,
    circle_neg,
    reduce_mod_z,
)
from .eta import (
    EtaResult,
    ZetaConvergenceError,
    dai_zhang_reduced,
    eta_circle_flat,
    eta_sharp,
    eta_sharp_bruteforce,
    hurwitz_eta_zero,
    hurwitz_zeta,
    reduced_eta,
)
from .forms import (
    BottBundle,
    BoxBundle,
    BundleData,
    Circle,
    Cylinder,
    Form,
    K1DirectSum,
    K1Element,
    K1GridUnitary,
    K1Identity,
    K1Winding,
    LineBundle,
    ModelManifold,
    Point,
    ProductManifold,
    Sphere,
    SumBundle,
    TensorBundle,
    Torus2,
    TrivialBundle,
    UnitaryHomotopy,
    atom_form,
    ch_bundle,
    circle_grid_form,
    circle_theta,
    constant_form,
    exactness_residual,
    exp_form,
    exterior_derivative,
    form_to_json,
    integrate,
    k1_manifold,
    k1_rank,
    k1_samples,
    k1_winding,
    odd_ch,
    sup_norm,
    todd_form,
    top_form,
    torus_grid_form,
    transgression,
    virtual_rank,
    wedge,
    zero_form,
)
from .pairing import (
    BundleModification,
    CatalogMap,
    ConstantMap,
    DirectSumRelation,
    DisjointUnionRelation,
    FactorProjection,
    GeometricKCycle,
    IdentityMap,
    PairingReport,
    RZK0Cocycle,
    SelfMapDegree,
    UnsupportedCycleError,
    analytic_term_k0,
    cap_product,
    ch_rq,
    k0_relation_residual,
    khomology_residual,
    modified_cycle,
    module_action,
    pair_h1,
    pair_h2,
    pair_k0,
    pullback_bundle,
    pullback_form,
    pullback_k1,
)
from .spectra import (
    BlockOperatorData,
    Spectrum,
    circle_twisted_spectrum,
    collate_spectrum,
    eta_partial_sum,
    sharp_product_spectrum,
    spectrum_from_csv,
)
from .spectral_flow import (
    CircleTwistPath,
    ConstantFamily,
    ResolutionError,
    SpectralFamily,
    TabulatedFamily,
    affine_twist,
    reversed_family,
    spectral_flow,
    subpath,
)

__version__ = "0.1.0"

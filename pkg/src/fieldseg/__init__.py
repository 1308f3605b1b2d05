"""Field-map based cell instance segmentation toolkit.

Generates per-instance scalar field maps (Poisson, diffusion, Euclidean
distance transform) from labeled images, segments fields back into
instances with an h-minima watershed, and scores the result with
instance-level metrics.
"""

from .diffusion import (
    DiffusionConfig,
    DiffusionReport,
    diffusion_field_map,
    diffusion_step,
    run_diffusion,
)
from .edt import edt_field_map, squared_edt
from .grid import (
    FieldMap,
    LabelImage,
    Region,
    Segmentation,
    boundary_pixels,
    extract_regions,
    relabel_connected,
)
from .io import (
    read_fmap,
    read_gray_png,
    read_label_png,
    write_field_png,
    write_fmap,
    write_gray_png,
    write_label_png,
    write_label_viz_png,
)
from .metrics import (
    MatchTable,
    MetricsReport,
    aggregate,
    evaluate,
    match_instances,
    overlap_scores,
    panoptic_quality,
    write_metrics_csv,
)
from .poisson import (
    PoissonSolveReport,
    assemble_laplacian,
    poisson_field_map,
    poisson_field_map_with_reports,
    solve_poisson,
)
from .synth import SynthSpec, generate, generate_dataset
from .watershed import (
    MarkerSet,
    WatershedParams,
    background_mask,
    flood,
    hminima_markers,
    segment,
)

__version__ = "0.1.0"

__all__ = [
    "DiffusionConfig",
    "DiffusionReport",
    "FieldMap",
    "LabelImage",
    "MarkerSet",
    "MatchTable",
    "MetricsReport",
    "PoissonSolveReport",
    "Region",
    "Segmentation",
    "SynthSpec",
    "WatershedParams",
    "aggregate",
    "assemble_laplacian",
    "background_mask",
    "boundary_pixels",
    "diffusion_field_map",
    "diffusion_step",
    "edt_field_map",
    "evaluate",
    "extract_regions",
    "flood",
    "generate",
    "generate_dataset",
    "hminima_markers",
    "match_instances",
    "overlap_scores",
    "panoptic_quality",
    "poisson_field_map",
    "poisson_field_map_with_reports",
    "read_fmap",
    "read_gray_png",
    "read_label_png",
    "relabel_connected",
    "run_diffusion",
    "segment",
    "solve_poisson",
    "squared_edt",
    "write_field_png",
    "write_fmap",
    "write_gray_png",
    "write_label_png",
    "write_label_viz_png",
    "write_metrics_csv",
    "__version__",
]

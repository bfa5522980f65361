"""Pointwise-information guided sub-sampling of multivariate gridded data."""

from ._accel import USE_NUMBA
from .evaluate import (RasterImage, RegionOfInterest, distance_correlation, mse, pearson,
                       rasterize_slice, ssim)
from .fieldio import (Field, GridDims, MultiField, SampledPointSet, load_field,
                      load_multifield, load_pointset, save_field, save_multifield,
                      save_pointset)
from .histogram import (AxisBinning, BinAssignment, JointHistogram, build_joint, marginal,
                        probabilities)
from .pointinfo import (PointInfoTable, mutual_information, pmi_field, pmi_table,
                        total_correlation)
from .pipeline import BenchmarkReport, run_pipeline
from .query import And, Leaf, Or, QueryResult, jaccard, parse_query, query_raw, query_sampled
from .reconstruct import (DelaunayLinear, NearestNeighbor, ShepardIDW, reconstruct,
                          reconstruct_many)
from .sampler import AcceptanceTable, build_acceptance, pmi_sample, random_sample
from .synthetic import SyntheticSpec, feature_spec, make_synthetic, noise_spec

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA", "RasterImage", "RegionOfInterest", "distance_correlation", "mse", "pearson",
    "rasterize_slice", "ssim", "Field", "GridDims", "MultiField", "SampledPointSet",
    "load_field", "load_multifield", "load_pointset", "save_field", "save_multifield",
    "save_pointset", "AxisBinning", "BinAssignment", "JointHistogram", "build_joint",
    "marginal", "probabilities", "PointInfoTable", "mutual_information", "pmi_field",
    "pmi_table", "total_correlation", "And", "Leaf", "Or", "QueryResult", "jaccard",
    "parse_query", "query_raw", "query_sampled", "DelaunayLinear", "NearestNeighbor",
    "ShepardIDW", "reconstruct", "reconstruct_many", "BenchmarkReport", "run_pipeline", "AcceptanceTable", "build_acceptance", "pmi_sample",
    "random_sample", "SyntheticSpec", "feature_spec", "make_synthetic", "noise_spec",
]

"""Defect detection in periodic textures with a Gabor wavelet bank and Ward clustering."""

from .blocks import BlockGrid, CropSpec, Periodicity, block_energies, crop_sizes, four_corner_crops
from .clustering import ClusterAssignment, Dendrogram, cut_two, select_defective, ward_cluster
from .evaluation import ConfusionCounts, Metrics, ground_truth_labels, score
from .filtering import convolve, fuse_l2, gabor_space
from .fusion import InspectOptions, InspectionReport, block_boundaries, canny_edges, fill_holes, inspect
from .gabor import GaborBankConfig, GaborKernel, kernel_size_from_periodicity, make_bank, make_kernel
from .imaging import load_grayscale, pad, save_grayscale, save_overlay

__all__ = [
    "block_boundaries",
    "block_energies",
    "BlockGrid",
    "canny_edges",
    "ClusterAssignment",
    "ConfusionCounts",
    "convolve",
    "crop_sizes",
    "CropSpec",
    "cut_two",
    "Dendrogram",
    "fill_holes",
    "four_corner_crops",
    "fuse_l2",
    "gabor_space",
    "GaborBankConfig",
    "GaborKernel",
    "ground_truth_labels",
    "inspect",
    "InspectionReport",
    "InspectOptions",
    "kernel_size_from_periodicity",
    "load_grayscale",
    "make_bank",
    "make_kernel",
    "Metrics",
    "pad",
    "Periodicity",
    "save_grayscale",
    "save_overlay",
    "score",
    "select_defective",
    "ward_cluster",
]

__version__ = "0.1.0"

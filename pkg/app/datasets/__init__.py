from app.datasets.base import Dataset, standardize, export_csv, import_csv
from app.datasets.synthetic import generate_blobs, generate_blob_splits
from app.datasets.cifar10 import load_cifar10, dump_cifar10, load_cifar10_split
from app.datasets.projection import pca_project

__all__ = [
    "Dataset",
    "standardize",
    "export_csv",
    "import_csv",
    "generate_blobs",
    "generate_blob_splits",
    "load_cifar10",
    "dump_cifar10",
    "load_cifar10_split",
    "pca_project",
]

"""alpha-stable subordinated heat kernels on flat geometries and their perturbations."""

__version__ = "0.1.0"

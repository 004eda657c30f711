"""Numerical substrate for camera-controllable multi-view video diffusion.

Submodules
----------
camera      pose algebra, Plücker ray grids, pose text files
attention   view-integrated attention layouts and a reference attention core
edm         EDM preconditioning, score, DSM loss, probability-flow ODE sampling
dataset     orbit trajectories, multi-view reformatting, stride sampling
curation    clip filters, optical-flow motion classifier, manifest pipeline
metrics     angular pose errors, AUC, epipolar precision, Fréchet distance
tensorio    the ``CAVT`` binary tensor container
"""
from . import attention, camera, curation, dataset, edm, metrics, tensorio
from .errors import ContractError

__version__ = "0.1.0"

__all__ = ["attention", "camera", "curation", "dataset", "edm", "metrics", "tensorio", "ContractError"]

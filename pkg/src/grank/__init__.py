"""Gossip-driven unsupervised learn-to-rank with a seeded attack simulator."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("grank")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0+local"

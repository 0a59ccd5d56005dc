"""Multi-view learning toolkit: tensor feature selection, side-view subgraph
mining, partially symmetric tensor embedding and GRU late-fusion models."""

__version__ = "0.1.0"

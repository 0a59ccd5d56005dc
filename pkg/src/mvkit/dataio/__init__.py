"""Loaders, writers and synthetic generators for every dataset shape."""
from .graphs import load_graph_corpus, write_graph_corpus
from .modelio import load_model, save_model
from .multiview import load_multiview, minmax_normalize, write_multiview
from .networks import load_network_stack, write_network_stack
from .sessions import dichotomize_hdrs, load_sessions, write_sessions
from .synth import (PlantedTensor, synth_graph_corpus, synth_multiview, synth_planted_tensor,
                    synth_sessions)

__all__ = [
    "load_graph_corpus", "write_graph_corpus", "load_model", "save_model",
    "load_multiview", "minmax_normalize", "write_multiview", "load_network_stack",
    "write_network_stack", "dichotomize_hdrs", "load_sessions", "write_sessions",
    "PlantedTensor", "synth_graph_corpus", "synth_multiview", "synth_planted_tensor",
    "synth_sessions",
]

"""carequeue-figures: batch rendering of simulation artifacts.

Consumes the CSV files written by the carequeue CLI (never the simulator
itself; the schema-tagged CSV is the only interface) and renders one image
per figure id: the priority-rule cost curves with their crossing, the two
improvement sweeps, and the queue-length tradeoff scatter.
"""

from .csvdata import SchemaError, load_artifact
from .render import FIGURE_IDS, FigureSpec, RenderResult, render

__version__ = "0.1.0"

__all__ = [
    "FIGURE_IDS",
    "FigureSpec",
    "RenderResult",
    "SchemaError",
    "load_artifact",
    "render",
    "__version__",
]

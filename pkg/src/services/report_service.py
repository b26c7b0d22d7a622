"""SVG rendering of per-cell incompatibility."""

import io
import logging
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.collections import PolyCollection
from matplotlib.figure import Figure

from src.models.body import SimplicialBody

logger = logging.getLogger(__name__)

# fixed ids and no timestamp keep the SVG byte-stable across runs
matplotlib.rcParams["svg.hashsalt"] = "anelkin"
matplotlib.rcParams["svg.fonttype"] = "none"


class ReportService:
    """Draws a body colored by cell residual, with an optional loop overlay."""

    def render_svg(
        self,
        body: SimplicialBody,
        coords: np.ndarray,
        residuals: np.ndarray,
        loop_points: Optional[np.ndarray] = None,
        title: str = "",
    ) -> str:
        """Planar bodies draw every triangle; 3D bodies draw cell barycenters projected on x-y."""
        fig = Figure(figsize=(6, 5))
        ax = fig.add_subplot(1, 1, 1)
        vmax = float(residuals.max()) if residuals.size and residuals.max() > 0 else 1.0

        if body.dim == 2:
            artist = PolyCollection(
                coords[body.cells], array=residuals, cmap="viridis", edgecolors="0.6", linewidths=0.2
            )
            artist.set_clim(0.0, vmax)
            ax.add_collection(artist)
        else:
            centers = body.barycenters(coords)
            artist = ax.scatter(centers[:, 0], centers[:, 1], c=residuals, cmap="viridis", vmin=0.0, vmax=vmax, s=6)

        if loop_points is not None and len(loop_points):
            ax.plot(loop_points[:, 0], loop_points[:, 1], color="crimson", linewidth=1.2)

        ax.autoscale_view()
        ax.set_aspect("equal")
        ax.set_title(title or "cell incompatibility")
        colorbar = fig.colorbar(artist, ax=ax)
        colorbar.set_label(
            "cell incompatibility (all zero)" if not residuals.any() else "cell incompatibility"
        )

        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
        logger.debug(f"Rendered SVG for {body.n_cells} cells")
        return buffer.getvalue()

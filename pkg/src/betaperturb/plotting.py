"""
Scatter plots of perturbed spectra in the complex plane, written as SVG.

Output is deterministic: the SVG hash salt is fixed and no creation date is
embedded, so equal input gives byte-identical files.
"""

from __future__ import annotations

from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["caption_text", "scatter_svg"]

_SVG_RC = {
    "svg.hashsalt": "betaperturb",
    "svg.fonttype": "none",
    "path.simplify": False,
}


def caption_text(ensemble: Optional[str], beta: Optional[float], n: Optional[int], l,
                 m: Optional[int] = None) -> str:
    """One-line caption naming the ensemble, beta, n (and m) and l."""
    parts = [f"ensemble={ensemble if ensemble else '?'}"]
    parts.append(f"beta={beta:g}" if beta is not None else "beta=?")
    parts.append(f"n={n}" if n is not None else "n=?")
    if m is not None:
        parts.append(f"m={m}")
    if isinstance(l, str):
        parts.append(f"l={l}")
    elif l is None:
        parts.append("l=?")
    else:
        parts.append(f"l={l:g}")
    return ", ".join(parts)


def scatter_svg(z, path, caption: str = "", size: float = 5.0) -> None:
    """Write a scatter of ``(Re z, Im z)`` to ``path`` as SVG.

    The axes cross at the origin, the quadrant lines are drawn, and the
    view is symmetric about zero. An empty ``z`` gives empty axes.
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(size, size))
        try:
            reach = float(np.max(np.abs(np.concatenate([z.real, z.imag])))) if len(z) else 1.0
            reach = 1.1 * reach if reach > 0 else 1.0
            ax.set_xlim(-reach, reach)
            ax.set_ylim(-reach, reach)
            ax.axhline(0.0, color="0.6", linewidth=0.8, zorder=1)
            ax.axvline(0.0, color="0.6", linewidth=0.8, zorder=1)
            for side in ("left", "bottom"):
                ax.spines[side].set_position("zero")
            for side in ("right", "top"):
                ax.spines[side].set_visible(False)
            ax.grid(True, linestyle=":", linewidth=0.5, color="0.8")
            if len(z):
                ax.scatter(z.real, z.imag, s=12, color="tab:blue", zorder=3)
            ax.set_aspect("equal")
            ax.set_xlabel("Re z", loc="right")
            ax.set_ylabel("Im z", loc="top")
            fig.text(0.5, 0.01, caption, ha="center", va="bottom", fontsize=9)
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)

"""Optional plotting helper: figures are skipped when matplotlib is absent."""

import os

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:  # pragma: no cover
    plt = None

OUT = os.environ.get("HOLODOF_DEMO_OUT", os.path.join(os.path.dirname(__file__), "figures"))


def save(fig, name):
    os.makedirs(OUT, exist_ok=True)
    path = os.path.join(OUT, name)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    print(f"figure written to {path}")

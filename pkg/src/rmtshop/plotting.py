"""Gantt charts and RPD box plots rendered to SVG text with matplotlib."""

from __future__ import annotations

import io
from contextlib import contextmanager

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .engine import Schedule  # noqa: E402
from .model import Instance, rest_time_for  # noqa: E402

# fixed salt and no timestamp/glyph ids keep SVG output byte-stable
STYLE = {
    "svg.hashsalt": "rmtshop",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.titlesize": 11,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "hatch.linewidth": 0.6,
}


@contextmanager
def figure(width=8.0, height=4.0):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, height))
        try:
            yield fig, ax
        finally:
            plt.close(fig)


def to_svg(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    return buf.getvalue()


def job_color(job: int):
    return plt.get_cmap("tab20")(job % 20)


def gantt_svg(sched: Schedule, instance: Instance | None = None, title: str | None = None) -> str:
    """One lane per machine and one per worker.

    With ``instance`` given, setup intervals are hatched on machine lanes and
    moving/rest intervals on worker lanes.
    """
    if not sched.assign:
        raise ValueError("cannot draw an empty schedule")
    machines = sched.machine_timeline
    workers = sched.worker_timeline
    lanes = [f"M{k}" for k in machines] + [f"W{w}" for w in workers]
    height = 1.2 + 0.45 * len(lanes)
    with figure(9.0, height) as (fig, ax):
        row = 0
        for k, seq in machines.items():
            y = len(lanes) - 1 - row
            for n, a in enumerate(seq):
                ax.add_patch(Rectangle((a.start, y - 0.35), a.completion - a.start, 0.7,
                                       facecolor=job_color(a.job), edgecolor="black", linewidth=0.5,
                                       gid=f"op-{a.job}-{a.op}"))
                ax.text((a.start + a.completion) / 2, y, f"{a.job},{a.op}\nw{a.worker}",
                        ha="center", va="center", fontsize=6)
                if instance is not None and n + 1 < len(seq):
                    setup = instance.setup[k][a.config][seq[n + 1].config]
                    if setup:
                        ax.add_patch(Rectangle((a.completion, y - 0.35), setup, 0.7, fill=False,
                                               hatch="////", edgecolor="0.4", linewidth=0,
                                               gid=f"setup-{k}-{n}"))
            row += 1
        for w, seq in workers.items():
            y = len(lanes) - 1 - row
            for n, a in enumerate(seq):
                ax.add_patch(Rectangle((a.start, y - 0.25), a.completion - a.start, 0.5,
                                       facecolor=job_color(a.job), edgecolor="black", linewidth=0.4,
                                       alpha=0.8, gid=f"wop-{a.job}-{a.op}"))
                ax.text((a.start + a.completion) / 2, y, f"M{a.machine}", ha="center", va="center", fontsize=6)
                if instance is not None and n + 1 < len(seq):
                    nxt = seq[n + 1]
                    if nxt.machine != a.machine:
                        gap, hatch, kind = instance.moving[a.machine][nxt.machine], "xxxx", "move"
                    else:
                        pt = instance.operation(a.oid).proc_time(a.machine, a.config)
                        gap, hatch, kind = rest_time_for(instance.rest_factor, pt), "....", "rest"
                    if gap:
                        ax.add_patch(Rectangle((a.completion, y - 0.25), gap, 0.5, fill=False,
                                               hatch=hatch, edgecolor="0.4", linewidth=0,
                                               gid=f"{kind}-{w}-{n}"))
            row += 1
        ax.set_yticks(range(len(lanes)))
        ax.set_yticklabels(lanes[::-1])
        ax.set_ylim(-0.6, len(lanes) - 0.4)
        ax.set_xlim(0, max(sched.makespan, 1) * 1.02)
        ax.set_xlabel("time")
        ax.axvline(sched.makespan, color="firebrick", linewidth=0.8, linestyle="--")
        ax.set_title(title or f"makespan {sched.makespan}, total energy {sched.total_energy}")
        fig.tight_layout()
        return to_svg(fig)


def boxplot_svg(rpd_lists: dict[str, list[float]], title: str = "RPD per algorithm") -> str:
    """Box plot (median, quartiles, 1.5 IQR whiskers) of RPD values per algorithm."""
    if not rpd_lists or any(len(v) == 0 for v in rpd_lists.values()):
        raise ValueError("every algorithm needs at least one RPD value")
    names = list(rpd_lists)
    with figure(5.0, 3.6) as (fig, ax):
        ax.boxplot([rpd_lists[n] for n in names], whis=1.5, widths=0.5,
                   medianprops={"color": "firebrick"})
        ax.set_xticks(range(1, len(names) + 1))
        ax.set_xticklabels([n.upper() for n in names])
        ax.set_ylabel("RPD (%)")
        ax.set_title(title)
        fig.tight_layout()
        return to_svg(fig)

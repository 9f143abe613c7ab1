"""Run reports: a delimited per-tick timeline plus rendered figures.

``run --report-dir`` drops four files next to the metrics output:
``timeline.csv`` (one row per tick) and three PNGs summarizing where tick
time went, message traffic, and goal completion. Timing columns are wall
clock and therefore not reproducible run-to-run; the metrics JSON stays
the deterministic artifact.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def write_timeline_csv(timeline: list[dict], path: str) -> None:
    systems: list[str] = []
    for row in timeline:
        for name in row["systemSeconds"]:
            if name not in systems:
                systems.append(name)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "events", "delivered"] + [f"seconds:{s}" for s in systems])
        for row in timeline:
            writer.writerow(
                [row["tick"], row["events"], row["delivered"]]
                + [f"{row['systemSeconds'].get(s, 0.0):.9f}" for s in systems]
            )


def _figure_system_time(timeline: list[dict], path: str) -> None:
    totals: dict[str, float] = {}
    for row in timeline:
        for name, seconds in row["systemSeconds"].items():
            totals[name] = totals.get(name, 0.0) + seconds
    names = sorted(totals)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(names, [totals[n] * 1000 for n in names], color="#4878a8")
    ax.set_ylabel("cumulative time (ms)")
    ax.set_title("time per system")
    ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _figure_deliveries(timeline: list[dict], path: str) -> None:
    ticks = [row["tick"] for row in timeline]
    delivered = [row["delivered"] for row in timeline]
    events = [row["events"] for row in timeline]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ticks, delivered, label="messages delivered", color="#4878a8")
    ax.plot(ticks, events, label="events drained", color="#b0604d", alpha=0.7)
    ax.set_xlabel("tick")
    ax.set_ylabel("count")
    ax.set_title("per-tick traffic")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _figure_goals(metrics: dict, path: str) -> None:
    achieved = metrics.get("goalsAchieved", {})
    names = sorted(achieved)
    counts = [len(achieved[n]) for n in names]
    fig, ax = plt.subplots(figsize=(7, 4))
    if names:
        ax.barh(names, counts, color="#6a9a58")
    ax.set_xlabel("goals achieved")
    ax.set_title(f"goal completion (total {metrics.get('goalsAchievedTotal', 0)})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(timeline: list[dict], metrics: dict, out_dir: str) -> list[str]:
    """Write the CSV timeline and figures; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    csv_path = os.path.join(out_dir, "timeline.csv")
    write_timeline_csv(timeline, csv_path)
    written.append(csv_path)
    for name, renderer in (
        ("system_time.png", lambda p: _figure_system_time(timeline, p)),
        ("traffic.png", lambda p: _figure_deliveries(timeline, p)),
        ("goals.png", lambda p: _figure_goals(metrics, p)),
    ):
        path = os.path.join(out_dir, name)
        renderer(path)
        written.append(path)
    return written

"""The full retrospective loop: monitoring rows to a verdict.

Synthetic monitoring data realizes a canonical schedule exactly, so the
hypothesis is CONFIRMED; holding one object back flips the verdict to
REFUTED and the divergence table names the state deviation.
"""

from pathlib import Path
from tempfile import TemporaryDirectory

from hierion import MonitoringStore, TimeInterval, ingest_monitoring, read_bundle
from hierion.pipeline import retrospect

bundle = read_bundle(Path(__file__).parent / "data" / "retro_bundle.json")


def monitoring_rows(stuck=()):
    lines = ["source,object,parameter,tick,value"]
    for obj in ("o1", "o2", "o3", "o4"):
        for tick in range(9):
            if obj in stuck:
                value = 2.0
            else:
                value = 2.0 if tick <= 2 else 12.0 if tick <= 5 else 25.0
            lines.append(f"survey,{obj},maturity,{tick},{value}")
    return "\n".join(lines) + "\n"


with TemporaryDirectory() as scratch:
    for label, rows in (
        ("faithful population", monitoring_rows()),
        ("o4 never develops", monitoring_rows(stuck=("o4",))),
    ):
        store = MonitoringStore(Path(scratch) / f"{label[:4]}.jsonl")
        report_in = ingest_monitoring(store, rows)
        report = retrospect(
            bundle,
            store,
            diagram_id="dev",
            interval=TimeInterval(0, 8),
            snapshots=[0, 4, 8],
        )
        print(f"{label}: ingested {report_in.ingested} rows -> {report.verdict}")
        if not report.divergence.confirmed:
            tick = report.divergence.first_violation_tick
            print(f"  first violation at scheduled tick {tick}")
            for entry in report.divergence.entries:
                if entry.deviation != 0:
                    print(
                        f"  tick {entry.scheduled_tick}: state {entry.state} "
                        f"required {entry.required}, actual {entry.actual} "
                        f"({entry.deviation:+d})"
                    )

"""Distribution tables over labeled streams: network shares, device shares,
and hour-of-day histograms per situation. Share rows sum to 1."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from ..domain import DeviceType, NetworkType, Situation, Stream


@dataclass(frozen=True)
class DistributionReport:
    # situation tag -> row of shares / counts, in enum declaration order
    network_shares: dict[str, dict[str, float]]
    device_shares: dict[str, dict[str, float]]
    hour_histograms: dict[str, list[int]]  # 24 buckets per situation

    def network_csv(self) -> str:
        return _shares_csv("situation", [n.value for n in NetworkType], self.network_shares)

    def device_csv(self) -> str:
        return _shares_csv("situation", [d.value for d in DeviceType], self.device_shares)

    def hours_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["situation"] + [f"h{h:02d}" for h in range(24)])
        for tag, hist in self.hour_histograms.items():
            w.writerow([tag] + list(hist))
        return buf.getvalue()


def _shares_csv(key: str, columns: list[str], rows: dict[str, dict[str, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([key] + columns)
    for tag, shares in rows.items():
        w.writerow([tag] + [repr(shares[c]) for c in columns])
    return buf.getvalue()


def distribution_report(streams: list[Stream]) -> DistributionReport:
    """Tabulate labeled streams; unlabeled streams are ignored."""
    present: list[Situation] = []
    seen = set()
    for s in streams:
        if s.situation is not None and s.situation not in seen:
            seen.add(s.situation)
            present.append(s.situation)
    present.sort(key=lambda s: s.index)

    network_shares: dict[str, dict[str, float]] = {}
    device_shares: dict[str, dict[str, float]] = {}
    hour_histograms: dict[str, list[int]] = {}
    for situation in present:
        rows = [s for s in streams if s.situation is situation]
        n = len(rows)
        net_counts = {t.value: 0 for t in NetworkType}
        dev_counts = {t.value: 0 for t in DeviceType}
        hist = [0] * 24
        for s in rows:
            net_counts[s.device.network_type.value] += 1
            dev_counts[s.device.device_type.value] += 1
            hist[s.device.local_timestamp.hour] += 1
        network_shares[situation.value] = {k: v / n for k, v in net_counts.items()}
        device_shares[situation.value] = {k: v / n for k, v in dev_counts.items()}
        hour_histograms[situation.value] = hist
    return DistributionReport(network_shares, device_shares, hour_histograms)

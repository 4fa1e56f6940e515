"""Repeat statistics and the CSV results format."""

import csv
import dataclasses
import math
import statistics

from scipy import stats

COLUMNS = ("workload", "impl", "threads", "dummy_count", "repeat_index",
           "seconds", "mean", "ci99_halfwidth")


def ci99_halfwidth(samples):
    """Half-width of the two-sided 99% Student-t interval for the mean."""
    n = len(samples)
    if n < 2:
        return math.nan
    sem = statistics.stdev(samples) / math.sqrt(n)
    return float(stats.t.ppf(0.995, n - 1)) * sem


@dataclasses.dataclass
class BenchResult:
    workload: str
    impl: str
    threads: int
    dummy_count: int
    seconds: list = dataclasses.field(default_factory=list)

    @property
    def mean(self):
        return statistics.fmean(self.seconds)

    @property
    def ci99_halfwidth(self):
        return ci99_halfwidth(self.seconds)

    def key(self):
        return (self.workload, self.impl, self.threads, self.dummy_count)


def emit_csv(results, path):
    """Write one row per repeat and one summary row per result."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for r in results:
            prefix = [r.workload, r.impl, r.threads, r.dummy_count]
            for i, secs in enumerate(r.seconds):
                writer.writerow(prefix + [i, repr(secs), "", ""])
            ci = r.ci99_halfwidth
            writer.writerow(prefix + ["", "", repr(r.mean),
                                      "" if math.isnan(ci) else repr(ci)])


def read_csv(path):
    """Parse a file written by ``emit_csv`` back into ``BenchResult`` objects."""
    results = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        for row in reader:
            key = (row["workload"], row["impl"], int(row["threads"]),
                   int(row["dummy_count"]))
            result = results.get(key)
            if result is None:
                result = results[key] = BenchResult(*key)
            if row["repeat_index"] != "":
                assert int(row["repeat_index"]) == len(result.seconds)
                result.seconds.append(float(row["seconds"]))
    return list(results.values())

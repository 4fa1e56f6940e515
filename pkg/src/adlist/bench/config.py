"""Benchmark configuration and the LRU workload presets."""

import dataclasses

WORKLOADS = ("uniform", "lru-warmup", "lru-reclaim", "lru-reprioritize", "dummy-sweep")
IMPLS = ("dlist", "adlist", "adlist-dummy")
SWEEP_DUMMIES = (1, 2, 4, 8, 16, 32, 64)

# per-thread counts: picks, inserts, available, evict k, evict cost (us)
LRU_PRESETS = {
    "lru-warmup": dict(picks_per_thread=100_000, inserts_per_thread=100_000,
                       available_per_thread=100_000, evict_batch_k=100,
                       evict_cost_us=50.0),
    "lru-reclaim": dict(picks_per_thread=200_000, inserts_per_thread=20_000,
                        available_per_thread=10_000, evict_batch_k=100,
                        evict_cost_us=50.0),
    "lru-reprioritize": dict(picks_per_thread=2_000_000, inserts_per_thread=20_000,
                             available_per_thread=10_000, evict_batch_k=100,
                             evict_cost_us=50.0),
}
LRU_PRESETS["dummy-sweep"] = LRU_PRESETS["lru-reprioritize"]


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class WorkloadConfig:
    workload: str = "uniform"
    impl: str = "adlist"
    threads: int = 1
    batch_size: int = 128
    batches: int = 1000
    picks_per_thread: int = 0
    inserts_per_thread: int = 0
    available_per_thread: int = 0
    evict_batch_k: int = 100
    evict_cost_us: float = 50.0
    dummy_count: int = 64
    repeats: int = 1
    seed: int = 0
    # evictions between dummy rebalances for adlist-dummy
    rebalance_every: int = 1024

    @classmethod
    def preset(cls, workload, **overrides):
        """Config for ``workload`` with the paper-scale LRU counts filled in."""
        values = dict(workload=workload)
        if workload == "dummy-sweep":
            values.update(impl="adlist-dummy", threads=10)
        values.update(LRU_PRESETS.get(workload, {}))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def is_lru(self):
        return self.workload != "uniform"

    @property
    def elements_per_thread(self):
        """Elements each thread inserts and removes in the uniform workload."""
        return self.batch_size * self.batches

    @property
    def element_count(self):
        """Size of the LRU element array: every element that can be cached."""
        return self.threads * self.available_per_thread

    def validate(self):
        if self.workload not in WORKLOADS:
            raise ConfigError(f"unknown workload {self.workload!r}")
        if self.impl not in IMPLS:
            raise ConfigError(f"unknown impl {self.impl!r}")
        if self.workload == "uniform" and self.impl == "adlist-dummy":
            raise ConfigError("the uniform workload compares dlist and adlist only")
        if self.workload == "dummy-sweep" and self.impl != "adlist-dummy":
            raise ConfigError("dummy-sweep runs on adlist-dummy")
        counts = ["threads", "repeats", "dummy_count"]
        if self.is_lru:
            counts += ["picks_per_thread", "inserts_per_thread",
                       "available_per_thread", "evict_batch_k"]
        else:
            counts += ["batch_size", "batches"]
        for name in counts:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.evict_cost_us < 0:
            raise ConfigError("evict_cost_us must not be negative")
        if self.rebalance_every < 0:
            raise ConfigError("rebalance_every must not be negative")
        return self

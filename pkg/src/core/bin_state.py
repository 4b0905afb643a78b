"""
Load vector of the process and the structures derived from it

BinState keeps per-bin loads plus everything a step needs in O(1) or
O(log n): the set of non-empty bins, the load histogram, a prefix-sum tree
for proportional-to-load sampling and the running min/max loads.
"""

from collections import Counter
from typing import Dict, Iterable, List, Optional

from core.errors import StateCorruption


class LoadPrefixTree:
    """Fenwick tree over bin loads (cumulative weights, updated per ball)"""

    def __init__(self, loads: Iterable[int]):
        values = list(loads)
        self.size = len(values)
        self.total = sum(values)
        self._tree = [0] * (self.size + 1)
        for i, value in enumerate(values, start=1):
            self._tree[i] += value
            parent = i + (i & -i)
            if parent <= self.size:
                self._tree[parent] += self._tree[i]
        self._top_bit = 1 << (self.size.bit_length() - 1) if self.size else 0

    def add(self, index: int, delta: int) -> None:
        self.total += delta
        i = index + 1
        while i <= self.size:
            self._tree[i] += delta
            i += i & -i

    def prefix(self, count: int) -> int:
        """Sum of the first `count` loads"""
        result = 0
        i = count
        while i > 0:
            result += self._tree[i]
            i -= i & -i
        return result

    def sample(self, k: int) -> int:
        """Bin holding ball k (0-based) in bin-id order"""
        if not 0 <= k < self.total:
            raise ValueError(f"ball index {k} outside [0, {self.total})")
        position = 0
        remaining = k
        step = self._top_bit
        while step:
            nxt = position + step
            if nxt <= self.size and self._tree[nxt] <= remaining:
                position = nxt
                remaining -= self._tree[nxt]
            step >>= 1
        return position

    def raw(self) -> List[int]:
        return list(self._tree)


class NonemptyIndex:
    """Set of non-empty bin ids with O(1) insert, remove and uniform pick"""

    def __init__(self, n: int, members: Iterable[int] = ()):
        self.items: List[int] = []
        self.position: List[int] = [-1] * n
        for bin_id in members:
            self.add(bin_id)

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, bin_id: int) -> bool:
        return self.position[bin_id] >= 0

    def add(self, bin_id: int) -> None:
        if self.position[bin_id] >= 0:
            return
        self.position[bin_id] = len(self.items)
        self.items.append(bin_id)

    def remove(self, bin_id: int) -> None:
        slot = self.position[bin_id]
        if slot < 0:
            return
        last = self.items.pop()
        if last != bin_id:
            self.items[slot] = last
            self.position[last] = slot
        self.position[bin_id] = -1

    def pick(self, k: int) -> int:
        return self.items[k]


class BinState:
    """Live configuration of n bins"""

    def __init__(self, loads: Iterable[int], max_total_load: Optional[int] = None):
        self.loads: List[int] = [int(x) for x in loads]
        if not self.loads:
            raise ValueError("a configuration needs at least one bin")
        if any(x < 0 for x in self.loads):
            raise ValueError("loads must be non-negative")
        self.n = len(self.loads)
        self.total_load = sum(self.loads)
        if max_total_load is None:
            max_total_load = self.total_load
        if max_total_load < self.total_load:
            raise ValueError("max_total_load cannot be below the current total load")
        self.max_total_load = max_total_load
        self._rebuild_derived()

    def _rebuild_derived(self) -> None:
        self.nonempty_index = NonemptyIndex(self.n, (i for i, x in enumerate(self.loads) if x > 0))
        self.load_histogram: Dict[int, int] = dict(Counter(self.loads))
        self.load_prefix_tree = LoadPrefixTree(self.loads)
        self.max_load = max(self.load_histogram)
        self.min_load = min(self.load_histogram)

    # ----- construction -----

    @classmethod
    def empty(cls, n: int) -> "BinState":
        return cls([0] * n)

    @classmethod
    def balanced(cls, n: int, m: int) -> "BinState":
        """Most balanced configuration of m balls (first m mod n bins get one extra)"""
        base, extra = divmod(m, n)
        return cls([base + 1] * extra + [base] * (n - extra))

    @classmethod
    def from_loads(cls, loads: Iterable[int], max_total_load: Optional[int] = None) -> "BinState":
        return cls(loads, max_total_load)

    def copy(self) -> "BinState":
        return BinState(self.loads, self.max_total_load)

    # ----- mutation -----

    def _move_histogram(self, old: int, new: int) -> None:
        hist = self.load_histogram
        hist[old] -= 1
        if hist[old] == 0:
            del hist[old]
        hist[new] = hist.get(new, 0) + 1

    def add_ball(self, bin_id: int) -> None:
        old = self.loads[bin_id]
        new = old + 1
        self.loads[bin_id] = new
        self.total_load += 1
        if self.total_load > self.max_total_load:
            self.max_total_load = self.total_load
        self._move_histogram(old, new)
        self.load_prefix_tree.add(bin_id, 1)
        if old == 0:
            self.nonempty_index.add(bin_id)
        if new > self.max_load:
            self.max_load = new
        if old == self.min_load and old not in self.load_histogram:
            self.min_load = new

    def remove_ball(self, bin_id: int) -> None:
        old = self.loads[bin_id]
        if old == 0:
            raise StateCorruption(f"cannot remove a ball from empty bin {bin_id}")
        new = old - 1
        self.loads[bin_id] = new
        self.total_load -= 1
        self._move_histogram(old, new)
        self.load_prefix_tree.add(bin_id, -1)
        if new == 0:
            self.nonempty_index.remove(bin_id)
        if new < self.min_load:
            self.min_load = new
        if old == self.max_load and old not in self.load_histogram:
            self.max_load = new

    # ----- views -----

    @property
    def average(self) -> float:
        return self.total_load / self.n

    @property
    def nonempty_count(self) -> int:
        return len(self.nonempty_index)

    def sorted_loads(self) -> List[int]:
        """Loads in non-increasing order (the rank-sorted view)"""
        return sorted(self.loads, reverse=True)

    def bins_with_load(self, load: int) -> List[int]:
        return [i for i, x in enumerate(self.loads) if x == load]

    def verify_coherence(self) -> None:
        """Compare every maintained structure with a rebuild from loads"""
        fresh = BinState(self.loads, self.max_total_load)
        problems = []
        if self.total_load != fresh.total_load:
            problems.append("total_load")
        if self.load_histogram != fresh.load_histogram:
            problems.append("load_histogram")
        if sorted(self.nonempty_index.items) != sorted(fresh.nonempty_index.items):
            problems.append("nonempty_index")
        for slot, bin_id in enumerate(self.nonempty_index.items):
            if self.nonempty_index.position[bin_id] != slot:
                problems.append("nonempty_index positions")
                break
        if self.load_prefix_tree.raw() != fresh.load_prefix_tree.raw():
            problems.append("load_prefix_tree")
        if (self.max_load, self.min_load) != (fresh.max_load, fresh.min_load):
            problems.append("min/max trackers")
        if self.max_total_load < self.total_load:
            problems.append("max_total_load")
        if problems:
            raise StateCorruption("incremental structures diverged: " + ", ".join(problems))

    def __eq__(self, other) -> bool:
        return isinstance(other, BinState) and self.loads == other.loads \
            and self.max_total_load == other.max_total_load

    def __repr__(self) -> str:
        return f"BinState(n={self.n}, m={self.total_load}, m_max={self.max_total_load})"

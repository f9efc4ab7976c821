"""Online decision-tree induction over a bounded element pool.

Leaves own "elements": slots in flat statistics pools sized up front to
max_leaves. Splitting consumes two fresh elements for the children (they
must both be free before the parent's is recycled, so a split needs two
free slots at decision time) and returns the parent's. When the pool, the
leaf budget, or the depth cap cannot accommodate a decided split, the leaf
freezes instead: it keeps a plain class-count vector for prediction but
never re-enters split trials, so the tree degrades gracefully rather than
failing.

Training is strictly stream-ordered and deterministic: the same samples in
the same order with the same config produce the identical tree, split log,
and predictions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np

from . import split_eval
from .leaf_stats import (
    BACKEND_FIXED,
    BACKEND_FLOAT,
    METHOD_GAUSSIAN,
    METHOD_QUANTILE,
    LeafElement,
    StatsPool,
)
from .schema import CATEGORICAL, NUMERIC, DatasetSchema, Sample, parse_schema, schema_to_json

SNAPSHOT_FORMAT = "streamtree-snapshot"
SNAPSHOT_VERSION = 1


class SnapshotError(ValueError):
    """Snapshot payload is corrupt, truncated, or version-incompatible."""


@dataclass(frozen=True)
class TreeConfig:
    delta: float = 1e-3
    tau: float = 0.05
    n_min: int = 200
    split_points: int = 10
    quantile_count: int = 8
    lam: float = 0.01
    max_leaves: int = 1024
    max_depth: int = 15
    method: str = METHOD_QUANTILE
    numeric_backend: str = BACKEND_FLOAT
    r_range: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must be in (0, 1)")
        if self.tau <= 0.0:
            raise ValueError("tau must be > 0")
        if self.n_min < 1:
            raise ValueError("n_min must be >= 1")
        if self.split_points < 1:
            raise ValueError("split_points must be >= 1")
        if self.quantile_count < 2:
            raise ValueError("quantile_count must be >= 2")
        if self.lam <= 0.0:
            raise ValueError("lam must be > 0")
        if self.max_leaves < 2:
            raise ValueError("max_leaves must be >= 2")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.method not in (METHOD_QUANTILE, METHOD_GAUSSIAN):
            raise ValueError(f"unknown method {self.method!r}")
        if self.numeric_backend not in (BACKEND_FLOAT, BACKEND_FIXED):
            raise ValueError(f"unknown backend {self.numeric_backend!r}")
        if self.method == METHOD_GAUSSIAN and self.numeric_backend == BACKEND_FIXED:
            raise ValueError("fixed backend applies to the quantile method only")
        if self.r_range <= 0.0:
            raise ValueError("r_range must be > 0")


class LeafNode:
    __slots__ = ("element", "cached_majority", "majority_count", "depth",
                 "frozen_counts")

    def __init__(self, element: Optional[LeafElement], depth: int,
                 cached_majority: int = 0):
        self.element = element
        self.depth = depth
        self.cached_majority = cached_majority
        self.majority_count = 0
        self.frozen_counts: Optional[np.ndarray] = None

    @property
    def frozen(self) -> bool:
        return self.element is None


class InternalNode:
    __slots__ = ("attribute", "threshold", "is_categorical", "left", "right")

    def __init__(self, attribute: int, threshold, is_categorical: bool,
                 left: "Node", right: "Node"):
        self.attribute = attribute
        self.threshold = threshold
        self.is_categorical = is_categorical
        self.left = left
        self.right = right


Node = Union[LeafNode, InternalNode]


class ElementPool:
    """Dense element ids with a LIFO free list; conservation is exact."""

    def __init__(self, stats: StatsPool):
        self.stats = stats
        self.capacity = stats.capacity
        self.free_list = list(range(self.capacity - 1, -1, -1))  # pops 0,1,2,...

    @property
    def free_count(self) -> int:
        return len(self.free_list)

    @property
    def allocated_count(self) -> int:
        return self.capacity - len(self.free_list)

    def alloc(self) -> LeafElement:
        if not self.free_list:
            raise RuntimeError("element pool exhausted")
        return LeafElement(self.stats, self.free_list.pop())

    def release(self, el: LeafElement) -> None:
        self.stats.reset_element(el.eid)
        self.free_list.append(el.eid)


@dataclass
class SplitEvent:
    kind: str  # "split" or "freeze"
    depth: int
    n_f: int
    attribute: Optional[int]
    split_point: object
    reason: str
    epsilon: float


class HoeffdingTree:
    def __init__(self, schema: DatasetSchema, config: TreeConfig = TreeConfig()):
        self.schema = schema
        self.config = config
        self.stats = StatsPool(
            schema,
            capacity=config.max_leaves,
            method=config.method,
            quantile_count=config.quantile_count,
            lam=config.lam,
            backend=config.numeric_backend,
        )
        self.pool = ElementPool(self.stats)
        self.root: Node = LeafNode(self.pool.alloc(), depth=0)
        self.leaf_count = 1
        self.frozen_leaf_count = 0
        self.split_count = 0
        self.freeze_count = 0
        self.trial_count = 0
        self.train_count = 0
        self.split_log: list[SplitEvent] = []

    # ------------------------------------------------------------- routing

    def sort_to_leaf(self, s: Sample) -> LeafNode:
        node = self.root
        values = s.values
        while not isinstance(node, LeafNode):
            v = values[node.attribute]
            if node.is_categorical:
                node = node.left if v == node.threshold else node.right
            else:
                node = node.left if v <= node.threshold else node.right
        return node

    # ------------------------------------------------------------ training

    def train_one(self, s: Sample) -> Optional[SplitEvent]:
        self.train_count += 1
        leaf = self.sort_to_leaf(s)
        if leaf.frozen:
            counts = leaf.frozen_counts
            counts[s.label] += 1
            c = counts[s.label]
            if (c > leaf.majority_count
                    or (c == leaf.majority_count and s.label < leaf.cached_majority)):
                leaf.cached_majority = s.label
                leaf.majority_count = int(c)
            return None
        el = leaf.element
        el.observe(s)
        c = int(el.pool.n_fj[el.eid, s.label])
        if (c > leaf.majority_count
                or (c == leaf.majority_count and s.label < leaf.cached_majority)):
            leaf.cached_majority = s.label
            leaf.majority_count = c
        n = el.n_f
        if n % self.config.n_min == 0:
            self.trial_count += 1
            decision = split_eval.evaluate_split_trial(el, self.config)
            if decision.taken:
                return self.apply_split(leaf, decision)
        return None

    def apply_split(self, leaf: LeafNode, decision: split_eval.SplitDecision) -> SplitEvent:
        el = leaf.element
        n = el.n_f
        best = decision.best
        if (leaf.depth + 1 > self.config.max_depth
                or self.leaf_count + 1 > self.config.max_leaves
                or self.pool.free_count < 2):
            return self._freeze(leaf, decision)
        majority = leaf.cached_majority
        left = LeafNode(self.pool.alloc(), leaf.depth + 1, majority)
        right = LeafNode(self.pool.alloc(), leaf.depth + 1, majority)
        self.pool.release(el)
        is_cat = self.schema.attributes[best.attribute].kind == CATEGORICAL
        internal = InternalNode(best.attribute, best.split_point, is_cat, left, right)
        self._replace_node(leaf, internal)
        self.leaf_count += 1
        self.split_count += 1
        event = SplitEvent("split", leaf.depth, n, best.attribute,
                           best.split_point, decision.reason, decision.epsilon)
        self.split_log.append(event)
        return event

    def _freeze(self, leaf: LeafNode, decision: split_eval.SplitDecision) -> SplitEvent:
        el = leaf.element
        n = el.n_f
        leaf.frozen_counts = el.n_fj.copy()
        leaf.majority_count = int(leaf.frozen_counts.max())
        leaf.cached_majority = int(np.argmax(leaf.frozen_counts))
        self.pool.release(el)
        leaf.element = None
        self.frozen_leaf_count += 1
        self.freeze_count += 1
        event = SplitEvent("freeze", leaf.depth, n, None, None,
                           decision.reason, decision.epsilon)
        self.split_log.append(event)
        return event

    def _replace_node(self, old: Node, new: Node) -> None:
        if self.root is old:
            self.root = new
            return
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, InternalNode):
                if node.left is old:
                    node.left = new
                    return
                if node.right is old:
                    node.right = new
                    return
                stack.append(node.left)
                stack.append(node.right)
        raise RuntimeError("node to replace not found")

    def train(self, stream: Iterable[Sample]) -> int:
        count = 0
        for s in stream:
            self.train_one(s)
            count += 1
        return count

    # ----------------------------------------------------------- inference

    def predict(self, s: Sample) -> int:
        return self.sort_to_leaf(s).cached_majority

    # ------------------------------------------------------------- metrics

    @property
    def depth(self) -> int:
        best = 0
        stack = [(self.root, 0)]
        while stack:
            node, d = stack.pop()
            if isinstance(node, InternalNode):
                stack.append((node.left, d + 1))
                stack.append((node.right, d + 1))
            else:
                best = max(best, d)
        return best

    def counters(self) -> dict:
        return {
            "trained": self.train_count,
            "leaves": self.leaf_count,
            "frozen_leaves": self.frozen_leaf_count,
            "splits": self.split_count,
            "freezes": self.freeze_count,
            "trials": self.trial_count,
            "depth": self.depth,
            "pool_free": self.pool.free_count,
            "pool_allocated": self.pool.allocated_count,
            "saturations": self.stats.saturation_count,
        }

    # ------------------------------------------------------------ snapshot

    def snapshot(self) -> bytes:
        doc = {
            "format": SNAPSHOT_FORMAT,
            "version": SNAPSHOT_VERSION,
            "config": {
                "delta": self.config.delta,
                "tau": self.config.tau,
                "n_min": self.config.n_min,
                "split_points": self.config.split_points,
                "quantile_count": self.config.quantile_count,
                "lam": self.config.lam,
                "max_leaves": self.config.max_leaves,
                "max_depth": self.config.max_depth,
                "method": self.config.method,
                "numeric_backend": self.config.numeric_backend,
                "r_range": self.config.r_range,
            },
            "schema": json.loads(schema_to_json(self.schema)),
            "tree": self._node_to_doc(self.root),
            "elements": self._elements_to_doc(),
            "free_list": list(self.pool.free_list),
            "generations": self.stats.generation.tolist(),
            "counters": {
                "trained": self.train_count,
                "leaves": self.leaf_count,
                "frozen_leaves": self.frozen_leaf_count,
                "splits": self.split_count,
                "freezes": self.freeze_count,
                "trials": self.trial_count,
                "saturations": self.stats.saturation_count,
            },
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")

    def _node_to_doc(self, node: Node) -> dict:
        if isinstance(node, InternalNode):
            return {
                "kind": "internal",
                "attribute": node.attribute,
                "threshold": node.threshold,
                "categorical": node.is_categorical,
                "left": self._node_to_doc(node.left),
                "right": self._node_to_doc(node.right),
            }
        doc = {
            "kind": "leaf",
            "depth": node.depth,
            "majority": node.cached_majority,
            "majority_count": node.majority_count,
        }
        if node.frozen:
            doc["frozen_counts"] = node.frozen_counts.tolist()
        else:
            doc["element"] = node.element.eid
        return doc

    def _elements_to_doc(self) -> dict:
        stats = self.stats
        used = sorted(set(range(stats.capacity)) - set(self.pool.free_list))
        out = {}
        for e in used:
            doc = {
                "n_f": int(stats.n_f[e]),
                "n_fj": stats.n_fj[e].tolist(),
                "min_a": stats.min_a[e].tolist(),
                "max_a": stats.max_a[e].tolist(),
                "hists": [h[e].tolist() for h in stats.hists],
            }
            if stats.method == METHOD_QUANTILE:
                if stats.backend == BACKEND_FLOAT:
                    doc["qvals"] = stats.qvals[e].tolist()
                else:
                    doc["qraw"] = stats.qraw[e].tolist()
            else:
                doc["g_mean"] = stats.g_mean[e].tolist()
                doc["g_vsum"] = stats.g_vsum[e].tolist()
            out[str(e)] = doc
        return out


def new_tree(schema: DatasetSchema, config: TreeConfig = TreeConfig()) -> HoeffdingTree:
    return HoeffdingTree(schema, config)


def restore(payload: bytes) -> HoeffdingTree:
    try:
        doc = json.loads(payload.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as e:
        raise SnapshotError(f"snapshot payload is not valid JSON: {e}") from None
    if not isinstance(doc, dict) or doc.get("format") != SNAPSHOT_FORMAT:
        raise SnapshotError("payload is not a tree snapshot")
    if doc.get("version") != SNAPSHOT_VERSION:
        raise SnapshotError(
            f"snapshot version {doc.get('version')!r} not supported "
            f"(expected {SNAPSHOT_VERSION})"
        )
    try:
        schema = parse_schema(json.dumps(doc["schema"]))
        config = TreeConfig(**doc["config"])
        tree = HoeffdingTree(schema, config)
        stats = tree.stats
        stats.generation[:] = doc["generations"]
        for key, el_doc in doc["elements"].items():
            e = int(key)
            stats.n_f[e] = el_doc["n_f"]
            stats.n_fj[e] = el_doc["n_fj"]
            stats.min_a[e] = el_doc["min_a"]
            stats.max_a[e] = el_doc["max_a"]
            for h, vals in zip(stats.hists, el_doc["hists"]):
                h[e] = vals
            if stats.method == METHOD_QUANTILE:
                if stats.backend == BACKEND_FLOAT:
                    stats.qvals[e] = el_doc["qvals"]
                else:
                    stats.qraw[e] = el_doc["qraw"]
            else:
                stats.g_mean[e] = el_doc["g_mean"]
                stats.g_vsum[e] = el_doc["g_vsum"]
        tree.pool.free_list = [int(x) for x in doc["free_list"]]
        tree.root = _node_from_doc(doc["tree"], tree)
        counters = doc["counters"]
        tree.train_count = counters["trained"]
        tree.leaf_count = counters["leaves"]
        tree.frozen_leaf_count = counters["frozen_leaves"]
        tree.split_count = counters["splits"]
        tree.freeze_count = counters["freezes"]
        tree.trial_count = counters["trials"]
        stats.saturation_count = counters["saturations"]
        return tree
    except SnapshotError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise SnapshotError(f"snapshot payload is corrupt: {e}") from None


def _node_from_doc(doc: dict, tree: HoeffdingTree) -> Node:
    if doc["kind"] == "internal":
        return InternalNode(
            doc["attribute"],
            doc["threshold"],
            doc["categorical"],
            _node_from_doc(doc["left"], tree),
            _node_from_doc(doc["right"], tree),
        )
    if doc["kind"] != "leaf":
        raise SnapshotError(f"unknown node kind {doc['kind']!r}")
    if "frozen_counts" in doc:
        leaf = LeafNode(None, doc["depth"], doc["majority"])
        leaf.frozen_counts = np.asarray(doc["frozen_counts"], dtype=np.int64)
    else:
        leaf = LeafNode(LeafElement(tree.stats, doc["element"]), doc["depth"],
                        doc["majority"])
    leaf.majority_count = doc["majority_count"]
    return leaf

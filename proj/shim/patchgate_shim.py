#!/usr/bin/env python3
"""Sandbox-side test executor for patchgate.

Reads one job document from stdin:

    {"source": str, "entry_point": str, "adapter": str|null,
     "cases": [{"input": [...], "expected": ...}, ...]}

and writes one JSON object per case to stdout, in case order:

    {"case": k, "status": "value|error|load_error", "value": <json>, "detail": str}

Candidate output written through sys.stdout is swallowed. The harness owns
timeouts; this process never emits "timeout".
"""

import contextlib
import io
import json
import math
import os
import subprocess
import sys
import types

RECURSION_LIMIT = 3000


class Node:
    def __init__(self, value=None, successor=None, successors=None,
                 predecessors=None, incoming_nodes=None, outgoing_nodes=None):
        self.value = value
        self.successor = successor
        self.successors = list(successors or [])
        self.predecessors = list(predecessors or [])
        self.incoming_nodes = list(incoming_nodes or [])
        self.outgoing_nodes = list(outgoing_nodes or [])

    def __repr__(self):
        return "Node(%r)" % (self.value,)


class CanonicalizationError(Exception):
    pass


# Adapters turn JSON-only case inputs into the structures QuixBugs programs
# expect, and map structured results back to JSON.

def _linked_list_args(args):
    if not args or not isinstance(args[0], list):
        raise ValueError("linked_list adapter expects an array as first argument")
    values = args[0]
    cycle_to = args[1] if len(args) > 1 else None
    nodes = [Node(value=v) for v in values]
    for a, b in zip(nodes, nodes[1:]):
        a.successor = b
    if nodes and cycle_to is not None:
        nodes[-1].successor = nodes[cycle_to]
    return [nodes[0] if nodes else None]


def _linked_list_node(node):
    seen = set()
    values = []
    while node is not None:
        if id(node) in seen:
            raise CanonicalizationError("cyclic linked list")
        seen.add(id(node))
        values.append(node.value)
        node = node.successor
    return values


def _build_graph(spec, weighted):
    nodes = {name: Node(value=name) for name in spec["nodes"]}
    lengths = {}
    for edge in spec["edges"]:
        src, dst = nodes[edge[0]], nodes[edge[1]]
        src.successors.append(dst)
        dst.predecessors.append(src)
        src.outgoing_nodes.append(dst)
        dst.incoming_nodes.append(src)
        if weighted:
            lengths[src, dst] = edge[2]
    return nodes, lengths


def _graph_args(args, weighted):
    if not args or not isinstance(args[0], dict):
        raise ValueError("graph adapter expects a graph object as first argument")
    nodes, lengths = _build_graph(args[0], weighted)
    rest = [nodes[a] if isinstance(a, str) and a in nodes else a for a in args[1:]]
    return ([lengths] if weighted else []) + rest


def _edge_map_args(args):
    n, edges = args
    return [n, {(e[0], e[1]): e[2] for e in edges}]


def _edge_map_result(value):
    if isinstance(value, dict) and all(isinstance(k, tuple) for k in value):
        return [list(k) + [v] for k, v in sorted(value.items())]
    return value


ADAPTERS = {
    "linked_list": (_linked_list_args, None, _linked_list_node),
    "node_graph": (lambda a: _graph_args(a, False), None, lambda n: n.value),
    "weighted_graph": (lambda a: _graph_args(a, True), None, lambda n: n.value),
    "edge_map": (_edge_map_args, _edge_map_result, None),
}


def _sort_key(value):
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def canonicalize(value, node_hook):
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if math.isnan(value):
            return "NaN"
        if math.isinf(value):
            return "Infinity" if value > 0 else "-Infinity"
        return value
    if isinstance(value, Node):
        if node_hook is None:
            raise CanonicalizationError("Node result without adapter")
        return canonicalize(node_hook(value), node_hook)
    if isinstance(value, (list, tuple)):
        return [canonicalize(v, node_hook) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted((canonicalize(v, node_hook) for v in value), key=_sort_key)
    if isinstance(value, dict):
        out = {}
        for k, v in value.items():
            if not isinstance(k, str):
                raise CanonicalizationError("non-string object key %r" % (k,))
            out[k] = canonicalize(v, node_hook)
        return out
    if isinstance(value, (types.GeneratorType, map, filter, zip, range, reversed)):
        return [canonicalize(v, node_hook) for v in value]
    raise CanonicalizationError("unserializable %s" % type(value).__name__)


def _denied(*_args, **_kwargs):
    raise PermissionError("process creation is not permitted in the sandbox")


def _lock_down():
    os.system = _denied
    os.fork = _denied
    os.execv = _denied
    os.execvp = _denied
    subprocess.Popen = _denied
    subprocess.run = _denied
    subprocess.call = _denied
    subprocess.check_output = _denied


def _emit(out, case, status, value=None, detail=""):
    line = json.dumps({"case": case, "status": status, "value": value, "detail": detail},
                      sort_keys=True, separators=(",", ":"), allow_nan=False,
                      ensure_ascii=False)
    out.write(line + "\n")
    out.flush()


def execute_job(job, out):
    source = job["source"]
    entry_point = job["entry_point"]
    adapter_name = job.get("adapter")
    cases = job["cases"]
    if adapter_name is not None and adapter_name not in ADAPTERS:
        raise ValueError("unknown adapter %r" % adapter_name)
    build_args, result_pre, node_hook = ADAPTERS.get(adapter_name, (None, None, None))

    sink = io.StringIO()
    namespace = {"__name__": "__candidate__", "__builtins__": __builtins__, "Node": Node}
    load_detail = None
    try:
        with contextlib.redirect_stdout(sink):
            code = compile(source, "<candidate>", "exec")
            exec(code, namespace)
        fn = namespace.get(entry_point)
        if not callable(fn):
            load_detail = "entry point %r not defined" % entry_point
    except BaseException as e:  # noqa: B902 - SystemExit from candidate is a load failure too
        load_detail = type(e).__name__

    for k, case in enumerate(cases):
        if load_detail is not None:
            _emit(out, k, "load_error", None, load_detail)
            continue
        try:
            raw = case["input"]
            args = build_args(raw) if build_args else list(raw)
            with contextlib.redirect_stdout(sink):
                result = fn(*args)
                if result_pre is not None:
                    result = result_pre(result)
                value = canonicalize(result, node_hook)
            sink.seek(0)
            sink.truncate()
        except BaseException as e:  # noqa: B902
            _emit(out, k, "error", None, type(e).__name__)
            continue
        try:
            _emit(out, k, "value", value)
        except (TypeError, ValueError) as e:
            _emit(out, k, "error", None, type(e).__name__)


def main():
    out = sys.stdout
    sys.setrecursionlimit(RECURSION_LIMIT)
    try:
        job = json.load(sys.stdin)
        if not isinstance(job, dict) or not isinstance(job.get("cases"), list):
            raise ValueError("job must be an object with a cases array")
        for field in ("source", "entry_point"):
            if not isinstance(job.get(field), str):
                raise ValueError("job field %r must be a string" % field)
    except Exception as e:
        out.write(json.dumps({"status": "protocol_error", "detail": str(e)}) + "\n")
        out.flush()
        return 2
    sys.stdin = io.StringIO("")
    _lock_down()
    try:
        execute_job(job, out)
    except ValueError as e:
        out.write(json.dumps({"status": "protocol_error", "detail": str(e)}) + "\n")
        out.flush()
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

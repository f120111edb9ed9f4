"""Deterministic JSON emission."""
import json


def dumps(obj):
    """Sorted keys and fixed indentation, so identical reports give identical bytes."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"

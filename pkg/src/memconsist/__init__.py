"""Consistency-model checking for shared-memory execution traces."""

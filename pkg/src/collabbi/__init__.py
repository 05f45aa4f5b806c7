"""Collaborative business intelligence toolkit.

Module map: `ssb` (deterministic star-schema data), `cube` (cube schema
documents), `engine` (query execution and OLAP operators), `kb` (triple
store), `sessions` / `annotations` (collaboration records), `dashboard`
(saved analyses and export), `platform` (everything assembled over one
data directory), `api` (HTTP face), `cli` (command line).
"""

__version__ = "0.1.0"

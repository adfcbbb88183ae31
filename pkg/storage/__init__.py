"""
Storage Module

Artifact persistence shared by every stage:
- Binary array format with key=value sidecars
- Atomic temp-write → fsync → rename
- Deterministic artifact paths
"""

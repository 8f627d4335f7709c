"""lmscube: turns LMS activity logs and questionnaires into a five-level
integration assessment per course unit, rolled up across the institutional
hierarchy and queryable as a role-scoped multidimensional cube."""

__version__ = "0.1.0"
